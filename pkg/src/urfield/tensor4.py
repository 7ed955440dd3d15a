"""Four-mode tensor space: basis indexing, states, and lifted operators.

Basis states ``|N1, N2, N3, N4>`` are flattened row-major with mode 1 slowest.
Mode order is ``(a, b, c, d)`` in the spinor basis and ``(x, y, z, t)`` in the
spacetime basis. Both label the same vector space, so the basis tag is carried
as metadata only.

Operators are kept as sums of Kronecker terms ``coeff * F1 (x) F2 (x) F3 (x) F4``
(``None`` standing for an identity factor). Sums and products stay in this form,
and the sparse matrix is assembled on demand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from ._io import iter_json_array
from .errors import CutoffError, FormatError
from .fock import Cutoff, LadderMatrix, as_cutoff, interior_mask, make_ladder

N_MODES = 4
BASIS_LABELS = {
    "spinor": ("a", "b", "c", "d"),
    "spacetime": ("x", "y", "z", "t"),
}


@dataclass(frozen=True)
class ModeId:
    label: str
    basis: str = "spacetime"

    def __post_init__(self):
        if self.basis not in BASIS_LABELS:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.label not in BASIS_LABELS[self.basis]:
            raise ValueError(f"mode {self.label!r} is not part of the {self.basis} basis")

    @property
    def position(self) -> int:
        return BASIS_LABELS[self.basis].index(self.label)


def mode(label: str) -> ModeId:
    """Resolve a bare label to a ModeId, inferring the basis."""
    for basis, labels in BASIS_LABELS.items():
        if label in labels:
            return ModeId(label, basis)
    raise ValueError(f"unknown mode label {label!r}")


@dataclass(frozen=True)
class ModeOccupation:
    counts: tuple
    basis: str = "spacetime"

    def __post_init__(self):
        counts = tuple(self.counts)
        if len(counts) != N_MODES:
            raise ValueError(f"need {N_MODES} occupation numbers, got {len(counts)}")
        for n in counts:
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
                raise ValueError(f"occupation numbers must be non-negative integers, got {counts}")
        if self.basis not in BASIS_LABELS:
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(self, "counts", tuple(int(n) for n in counts))

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    @property
    def total(self) -> int:
        return sum(self.counts)


def _counts(occ) -> tuple:
    return occ.counts if isinstance(occ, ModeOccupation) else ModeOccupation(tuple(occ)).counts


def dimension(cutoff) -> int:
    return as_cutoff(cutoff).dim ** N_MODES


def index(occ, cutoff) -> int:
    """Flat row-major index of an occupation tuple (mode 1 slowest)."""
    cutoff = as_cutoff(cutoff)
    counts = _counts(occ)
    if max(counts) > cutoff.n_max:
        raise CutoffError(f"occupation {counts} exceeds cutoff {cutoff.n_max}")
    i = 0
    for n in counts:
        i = i * cutoff.dim + n
    return i


def deindex(i: int, cutoff, basis: str = "spacetime") -> ModeOccupation:
    cutoff = as_cutoff(cutoff)
    if not 0 <= i < dimension(cutoff):
        raise CutoffError(f"flat index {i} out of range for cutoff {cutoff.n_max}")
    counts = []
    for _ in range(N_MODES):
        i, n = divmod(i, cutoff.dim)
        counts.append(n)
    return ModeOccupation(tuple(reversed(counts)), basis)


def occupation_table(cutoff) -> np.ndarray:
    """``(dim, 4)`` integer array; row ``k`` holds the occupation of flat index ``k``."""
    d = as_cutoff(cutoff).dim
    grids = np.indices((d,) * N_MODES).reshape(N_MODES, -1)
    return grids.T.copy()


def interior_indices(cutoff, margin: int) -> np.ndarray:
    """Flat indices whose occupations all sit ``margin`` or more below the cutoff."""
    m = interior_mask(cutoff, margin)
    full = reduce(np.logical_and.outer, [m] * N_MODES).reshape(-1)
    return np.flatnonzero(full)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Coefficients ``c(N)`` over the flattened tensor-space basis."""

    coefficients: np.ndarray
    cutoff: Cutoff
    basis: str = "spacetime"

    def __post_init__(self):
        cutoff = as_cutoff(self.cutoff)
        c = np.array(self.coefficients, dtype=complex).reshape(-1)
        if c.size != dimension(cutoff):
            raise CutoffError(f"state has {c.size} coefficients, cutoff {cutoff.n_max} needs {dimension(cutoff)}")
        if not np.all(np.isfinite(c)):
            raise ValueError("state coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "cutoff", cutoff)

    @classmethod
    def zeros(cls, cutoff, basis="spacetime"):
        return cls(np.zeros(dimension(cutoff), dtype=complex), cutoff, basis)

    @classmethod
    def from_terms(cls, terms: Mapping, cutoff, basis="spacetime"):
        """Build from ``{occupation tuple: coefficient}``."""
        c = np.zeros(dimension(cutoff), dtype=complex)
        for occ, value in terms.items():
            c[index(occ, cutoff)] += value
        return cls(c, cutoff, basis)

    @property
    def tensor(self) -> np.ndarray:
        return self.coefficients.reshape((self.cutoff.dim,) * N_MODES)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def amplitude(self, occ) -> complex:
        return complex(self.coefficients[index(occ, self.cutoff)])

    def nonzero_terms(self):
        """Yield ``(ModeOccupation, coefficient)`` for nonzero entries in index order."""
        for i in np.flatnonzero(self.coefficients):
            yield deindex(int(i), self.cutoff, self.basis), complex(self.coefficients[i])

    def _check(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        if other.cutoff != self.cutoff:
            raise CutoffError("states have different cutoffs")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateVector(self.coefficients + other.coefficients, self.cutoff, self.basis)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateVector(self.coefficients - other.coefficients, self.cutoff, self.basis)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return StateVector(scalar * self.coefficients, self.cutoff, self.basis)

    __rmul__ = __mul__


def vacuum(cutoff, basis="spacetime") -> StateVector:
    return build_basis_state((0, 0, 0, 0), cutoff, basis)


def build_basis_state(occ, cutoff, basis="spacetime") -> StateVector:
    """Unit coordinate vector at ``index(occ)``."""
    c = np.zeros(dimension(cutoff), dtype=complex)
    c[index(occ, cutoff)] = 1.0
    return StateVector(c, cutoff, basis)


def build_basis_state_by_creators(occ, cutoff, basis="spacetime") -> StateVector:
    """Apply ``(a_i^dag)^{N_i} / sqrt(N_i!)`` for every mode to the vacuum."""
    cutoff = as_cutoff(cutoff)
    counts = _counts(occ)
    if max(counts) > cutoff.n_max:
        raise CutoffError(f"occupation {counts} exceeds cutoff {cutoff.n_max}")
    labels = BASIS_LABELS[basis]
    create = make_ladder("create", cutoff)
    psi = vacuum(cutoff, basis).coefficients.copy()
    for label, n in zip(labels, counts):
        op = lift(create, ModeId(label, basis), cutoff).matrix
        for _ in range(n):
            psi = op @ psi
        psi = psi / math.sqrt(math.factorial(n))
    return StateVector(psi, cutoff, basis)


def inner_product(lhs: StateVector, rhs: StateVector) -> complex:
    """``<lhs|rhs> = sum_N conj(d(N)) c(N)``."""
    if lhs.cutoff != rhs.cutoff:
        raise CutoffError("states have different cutoffs")
    return complex(np.vdot(lhs.coefficients, rhs.coefficients))


# -- operators ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KronTerm:
    coeff: complex
    factors: tuple  # four csr matrices, None for identity

    def active(self) -> tuple:
        return tuple(i for i, f in enumerate(self.factors) if f is not None)


def _mul_factor(f, g):
    if f is None:
        return g
    if g is None:
        return f
    return (f @ g).tocsr()


def _kron_all(factors, d) -> sp.csr_matrix:
    eye = sp.identity(d, dtype=complex, format="csr")
    mats = [eye if f is None else f for f in factors]
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), mats)


class FourModeOperator:
    """A linear operator on the four-mode cutoff space, stored as Kronecker terms."""

    __array_ufunc__ = None  # keep numpy scalars from broadcasting over us

    def __init__(self, terms: Iterable[KronTerm], cutoff):
        self.cutoff = as_cutoff(cutoff)
        self.terms = tuple(t for t in terms if t.coeff != 0)

    @classmethod
    def zero(cls, cutoff):
        return cls((), cutoff)

    @classmethod
    def identity(cls, cutoff):
        return cls((KronTerm(1.0, (None,) * N_MODES),), cutoff)

    @property
    def dim(self) -> int:
        return dimension(self.cutoff)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        d = self.cutoff.dim
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for t in self.terms:
            total = total + t.coeff * _kron_all(t.factors, d)
        total.sort_indices()
        return total

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def active_modes(self) -> tuple:
        return tuple(sorted({i for t in self.terms for i in t.active()}))

    def restricted(self, modes: tuple) -> sp.csr_matrix:
        """The operator on the tensor factor of ``modes``; all other factors must be identities."""
        d = self.cutoff.dim
        dim = d ** len(modes)
        total = sp.csr_matrix((dim, dim), dtype=complex)
        for t in self.terms:
            if any(t.factors[i] is not None for i in range(N_MODES) if i not in modes):
                raise ValueError("operator acts outside the requested modes")
            sub = [t.factors[i] for i in modes]
            total = total + t.coeff * _kron_all(sub, d)
        return total.tocsr()

    def dag(self) -> "FourModeOperator":
        terms = []
        for t in self.terms:
            factors = tuple(None if f is None else f.conj().T.tocsr() for f in t.factors)
            terms.append(KronTerm(np.conj(t.coeff), factors))
        return FourModeOperator(terms, self.cutoff)

    def apply(self, state: StateVector) -> StateVector:
        if state.cutoff != self.cutoff:
            raise CutoffError("operator and state have different cutoffs")
        return StateVector(self.matrix @ state.coefficients, self.cutoff, state.basis)

    def _coerce(self, other):
        if not isinstance(other, FourModeOperator):
            return None
        if other.cutoff != self.cutoff:
            raise CutoffError("operators have different cutoffs")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FourModeOperator(self.terms + other.terms, self.cutoff)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return FourModeOperator([KronTerm(scalar * t.coeff, t.factors) for t in self.terms], self.cutoff)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return self.apply(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = []
        for s in self.terms:
            for o in other.terms:
                factors = tuple(_mul_factor(f, g) for f, g in zip(s.factors, o.factors))
                terms.append(KronTerm(s.coeff * o.coeff, factors))
        return FourModeOperator(terms, self.cutoff)

    def __repr__(self):
        return f"FourModeOperator(n_max={self.cutoff.n_max}, terms={len(self.terms)})"


def lift(op: LadderMatrix, mode_id, cutoff=None) -> FourModeOperator:
    """Embed a single-mode operator as ``I (x) ... (x) op (x) ... (x) I``."""
    if isinstance(mode_id, str):
        mode_id = mode(mode_id)
    cutoff = op.cutoff if cutoff is None else as_cutoff(cutoff)
    if op.cutoff != cutoff:
        raise CutoffError(f"operator cutoff {op.cutoff.n_max} does not match {cutoff.n_max}")
    factors = [None] * N_MODES
    if op.kind != "identity":
        factors[mode_id.position] = op.entries
    return FourModeOperator((KronTerm(1.0, tuple(factors)),), cutoff)


def commutator(a: FourModeOperator, b: FourModeOperator) -> FourModeOperator:
    """``[a, b]`` kept in Kronecker-term form."""
    return a @ b - b @ a


def commutator_matrix(a: FourModeOperator, b: FourModeOperator) -> sp.csr_matrix:
    """``[a, b]`` from the assembled sparse matrices.

    Cheaper than expanding terms, and exact wherever the entrywise products are
    (e.g. against a diagonal integer operator).
    """
    ma, mb = a.matrix, b.matrix
    return (ma @ mb - mb @ ma).tocsr()


def total_number(cutoff) -> FourModeOperator:
    n = make_ladder("number", cutoff)
    return reduce(lambda x, y: x + y, [lift(n, ModeId(lbl)) for lbl in BASIS_LABELS["spacetime"]])


def restrict(matrix: sp.spmatrix, idx: np.ndarray) -> sp.csr_matrix:
    """Compress ``P M P`` onto the index set ``idx``."""
    m = sp.csr_matrix(matrix)
    return m[idx][:, idx]


# -- serialization -----------------------------------------------------------


def state_to_json(state: StateVector) -> str:
    """JSON array of ``{modes, re, im}`` records, nonzero entries only, index order."""
    records = [
        {"modes": list(occ.counts), "re": float(c.real), "im": float(c.imag)}
        for occ, c in state.nonzero_terms()
    ]
    return json.dumps(records, indent=1) + "\n"


def state_from_json(text: str, cutoff, basis="spacetime") -> StateVector:
    """Parse the record-array format.

    Raises :class:`FormatError` (with a line number) for malformed records or
    duplicated mode tuples and :class:`CutoffError` for occupations beyond the
    cutoff.
    """
    cutoff = as_cutoff(cutoff)
    c = np.zeros(dimension(cutoff), dtype=complex)
    seen = {}
    for line, rec in iter_json_array(text):
        if not isinstance(rec, dict) or "modes" not in rec:
            raise FormatError("record must be an object with a 'modes' field", line)
        modes = rec["modes"]
        if (
            not isinstance(modes, list)
            or len(modes) != N_MODES
            or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 0 for n in modes)
        ):
            raise FormatError(f"'modes' must be four non-negative integers, got {modes!r}", line)
        try:
            re_, im_ = float(rec.get("re", 0.0)), float(rec.get("im", 0.0))
        except (TypeError, ValueError):
            raise FormatError("'re' and 'im' must be numbers", line) from None
        key = tuple(modes)
        if key in seen:
            raise FormatError(f"duplicate mode tuple {list(key)} (first seen on line {seen[key]})", line)
        seen[key] = line
        c[index(key, cutoff)] = complex(re_, im_)
    return StateVector(c, cutoff, basis)
