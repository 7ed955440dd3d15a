"""Second quantization over tensor-space modes, and the propagator.

Field modes are labeled by four-mode occupation tuples ``N`` with every entry
at most ``mode_cutoff``. A field basis state assigns a particle count to each
label; it is stored as a canonical sorted tuple of ``(label, count)`` pairs
with zero counts dropped, so equality is structural.

Conventions: ``[c(N), c^dag(N')] = delta_{N N'}`` (no factor i), and field basis
states are normalized with ``1/sqrt(count!)`` per mode.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ._io import FORMAT_VERSION, atomic_write, fmt, iter_json_array
from .errors import CutoffError, FormatError, ParticleCapError, PreconditionError
from .position_rep import hermite_functions
from .tensor4 import N_MODES


def mode_labels(mode_cutoff: int) -> list[tuple]:
    """All labels with entries ``<= mode_cutoff``, row-major (first entry slowest)."""
    if mode_cutoff < 0:
        raise CutoffError(f"mode cutoff must be >= 0, got {mode_cutoff}")
    return list(itertools.product(range(mode_cutoff + 1), repeat=N_MODES))


def _check_label(label, mode_cutoff) -> tuple:
    label = tuple(int(n) for n in label)
    if len(label) != N_MODES or min(label) < 0:
        raise ValueError(f"mode label must be four non-negative integers, got {label}")
    if max(label) > mode_cutoff:
        raise CutoffError(f"mode label {label} exceeds mode cutoff {mode_cutoff}")
    return label


@dataclass(frozen=True, order=True)
class OccupationMap:
    """Particle counts per mode label; ``items`` is sorted with zero counts removed."""

    items: tuple = ()

    @classmethod
    def from_counts(cls, counts: Mapping) -> "OccupationMap":
        clean = {}
        for label, n in counts.items():
            n = int(n)
            if n < 0:
                raise ValueError(f"particle count must be non-negative, got {n}")
            if n:
                label = tuple(int(v) for v in label)
                clean[label] = clean.get(label, 0) + n
        return cls(tuple(sorted(clean.items())))

    def count(self, label) -> int:
        return dict(self.items).get(tuple(label), 0)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.items)

    def with_count(self, label, n) -> "OccupationMap":
        d = dict(self.items)
        d[tuple(label)] = n
        return OccupationMap.from_counts(d)


EMPTY = OccupationMap()


@dataclass(frozen=True, eq=False)
class FieldState:
    """Sparse superposition ``sum C(occ) |occ>`` over capped occupation maps."""

    coeffs: Mapping
    mode_cutoff: int
    cap: int

    def __post_init__(self):
        if self.cap < 0:
            raise PreconditionError("particle cap must be >= 0")
        clean = {}
        for occ, c in self.coeffs.items():
            if not isinstance(occ, OccupationMap):
                raise TypeError("keys must be OccupationMap")
            if occ.total > self.cap:
                raise ParticleCapError(f"state has {occ.total} particles, cap is {self.cap}")
            for label, _ in occ.items:
                _check_label(label, self.mode_cutoff)
            c = complex(c)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise ValueError("coefficients must be finite")
            if c != 0:
                clean[occ] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    def amplitude(self, occ: OccupationMap) -> complex:
        return self.coeffs.get(occ, 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def _like(self, coeffs):
        return FieldState(coeffs, self.mode_cutoff, self.cap)

    def _compatible(self, other):
        if (other.mode_cutoff, other.cap) != (self.mode_cutoff, self.cap):
            raise CutoffError("field states use different truncations")

    def __add__(self, other):
        if not isinstance(other, FieldState):
            return NotImplemented
        self._compatible(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0j) + v
        return self._like(out)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._like({k: scalar * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    def is_zero(self) -> bool:
        return not self.coeffs


def field_vacuum(mode_cutoff: int, cap: int) -> FieldState:
    return FieldState({EMPTY: 1.0}, mode_cutoff, cap)


def create_particle(label, state: FieldState) -> FieldState:
    """``c^dag(N)``: raise the count of ``label`` by one with factor ``sqrt(n + 1)``."""
    label = _check_label(label, state.mode_cutoff)
    out = {}
    for occ, c in state.coeffs.items():
        if occ.total + 1 > state.cap:
            raise ParticleCapError(f"creating a particle in {label} exceeds cap {state.cap}")
        n = occ.count(label)
        new = occ.with_count(label, n + 1)
        out[new] = out.get(new, 0j) + c * math.sqrt(n + 1)
    return state._like(out)


def annihilate_particle(label, state: FieldState) -> FieldState:
    """``c(N)``: lower the count of ``label`` by one with factor ``sqrt(n)``."""
    label = _check_label(label, state.mode_cutoff)
    out = {}
    for occ, c in state.coeffs.items():
        n = occ.count(label)
        if n == 0:
            continue
        new = occ.with_count(label, n - 1)
        out[new] = out.get(new, 0j) + c * math.sqrt(n)
    return state._like(out)


def field_inner(lhs: FieldState, rhs: FieldState) -> complex:
    """``<lhs|rhs>``, conjugate-linear in ``lhs``."""
    lhs._compatible(rhs)
    return complex(sum(np.conj(c) * rhs.coeffs.get(k, 0j) for k, c in lhs.coeffs.items()))


def field_basis_state(occ: OccupationMap, mode_cutoff: int, cap: int) -> FieldState:
    """``prod_N (c^dag(N))^{n_N} / sqrt(n_N!) |0>``, built by repeated creation."""
    state = field_vacuum(mode_cutoff, cap)
    for label, n in occ.items:
        for _ in range(n):
            state = create_particle(label, state)
        state = state * (1.0 / math.sqrt(math.factorial(n)))
    return state


def enumerate_occupation_maps(mode_cutoff: int, cap: int) -> list[OccupationMap]:
    """Every occupation map over the label set with total particles ``<= cap``."""
    labels = mode_labels(mode_cutoff)
    out = []
    for total in range(cap + 1):
        for combo in itertools.combinations_with_replacement(labels, total):
            counts = {}
            for label in combo:
                counts[label] = counts.get(label, 0) + 1
            out.append(OccupationMap.from_counts(counts))
    return out


def _mode_amplitudes(X, mode_cutoff: int) -> dict:
    """``phi_N(X)`` for every label."""
    tables = [hermite_functions(mode_cutoff, np.array(float(xi))) for xi in X]
    return {lab: float(np.prod([tables[i][n] for i, n in enumerate(lab)])) for lab in mode_labels(mode_cutoff)}


def apply_field_operator(X, state: FieldState, daggered: bool = False) -> FieldState:
    """``Psi(X)|state>`` or, with ``daggered``, ``Psi^dag(X)|state>``.

    ``Psi(X) = sum_N phi_N(X) c(N)``; the adjoint uses ``conj(phi_N(X)) c^dag(N)``.
    """
    if len(X) != N_MODES:
        raise ValueError("a spacetime point has four coordinates")
    amps = _mode_amplitudes(X, state.mode_cutoff)
    total = state._like({})
    for label, amp in amps.items():
        if amp == 0:
            continue
        if daggered:
            total = total + np.conj(amp) * create_particle(label, state)
        else:
            total = total + amp * annihilate_particle(label, state)
    return total


@dataclass(frozen=True)
class PropagatorValue:
    delta: complex
    X: tuple
    X2: tuple
    mode_cutoff: int


def propagator_direct(X, X2, mode_cutoff: int) -> PropagatorValue:
    """``sum_N phi_N(X) conj(phi_N(X2))`` over every label within the cutoff."""
    X, X2 = tuple(map(float, X)), tuple(map(float, X2))
    if not all(np.isfinite(X + X2)):
        raise ValueError("points must be finite")
    tx = [hermite_functions(mode_cutoff, np.array(v)) for v in X]
    tx2 = [hermite_functions(mode_cutoff, np.array(v)) for v in X2]
    total = 0j
    for label in mode_labels(mode_cutoff):
        a = 1.0
        b = 1.0
        for i, n in enumerate(label):
            a *= tx[i][n]
            b *= tx2[i][n]
        total += a * np.conj(b)
    return PropagatorValue(complex(total), X, X2, mode_cutoff)


def propagator_vev(X, X2, mode_cutoff: int, cap: int = 1) -> PropagatorValue:
    """``<0|Psi(X) Psi^dag(X2)|0>`` evaluated as the field inner product of
    ``Psi^dag(X)|0>`` with ``Psi^dag(X2)|0>``."""
    if cap < 1:
        raise PreconditionError("propagator needs a particle cap of at least 1")
    X, X2 = tuple(map(float, X)), tuple(map(float, X2))
    vac = field_vacuum(mode_cutoff, cap)
    ket = apply_field_operator(X2, vac, daggered=True)
    bra = apply_field_operator(X, vac, daggered=True)
    return PropagatorValue(field_inner(bra, ket), X, X2, mode_cutoff)


# -- serialization -----------------------------------------------------------


def field_state_to_json(state: FieldState) -> str:
    records = []
    for occ, c in state.coeffs.items():
        records.append({
            "occupations": [{"modes": list(label), "count": n} for label, n in occ.items],
            "re": c.real,
            "im": c.imag,
        })
    return json.dumps(records, indent=1) + "\n"


def field_state_from_json(text: str, mode_cutoff: int, cap: int) -> FieldState:
    coeffs = {}
    for line, rec in iter_json_array(text):
        if not isinstance(rec, dict) or not isinstance(rec.get("occupations"), list):
            raise FormatError("record needs an 'occupations' list", line)
        counts = {}
        for o in rec["occupations"]:
            try:
                label = tuple(o["modes"])
                n = int(o["count"])
            except (KeyError, TypeError, ValueError):
                raise FormatError("occupation entries need 'modes' and 'count'", line) from None
            if len(label) != N_MODES:
                raise FormatError(f"mode label must have four entries, got {list(label)}", line)
            if label in counts:
                raise FormatError(f"mode {list(label)} listed twice", line)
            counts[label] = n
        occ = OccupationMap.from_counts(counts)
        if occ in coeffs:
            raise FormatError("duplicate occupation map", line)
        coeffs[occ] = complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))
    return FieldState(coeffs, mode_cutoff, cap)


PROPAGATOR_HEADER = "x,y,z,t,x2,y2,z2,t2,delta"


def propagator_csv(values: list[PropagatorValue], max_discrepancy: float | None = None) -> str:
    lines = [f"# format_version: {FORMAT_VERSION}"]
    if max_discrepancy is not None:
        lines.append(f"# max_abs_direct_minus_vev: {fmt(max_discrepancy)}")
    lines.append(PROPAGATOR_HEADER)
    for v in values:
        lines.append(",".join(fmt(u) for u in (*v.X, *v.X2, v.delta.real)))
    return "\n".join(lines) + "\n"


def write_propagator_table(values, path, max_discrepancy=None) -> None:
    atomic_write(path, propagator_csv(values, max_discrepancy))
