"""Position/momentum operators, Poincare generators, and the commutator audit.

Index convention: mu = 0 is the t mode, 1/2/3 are x/y/z.

Every Lorentz generator is kept in two forms. The xp-form is assembled from
products of ``x_i`` and ``p_j`` and is the one used for transformations. The
ladder form transcribes the bilinears in creators and annihilators exactly as
printed in the source construction. The audit compares the two rather than
assuming they agree, and it measures the realized Lie algebra against the
Poincare relations for a chosen metric signature.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from ._io import FORMAT_VERSION
from .errors import CutoffError, NormLeakError, PreconditionError
from .fock import as_cutoff, make_ladder
from .tensor4 import (
    N_MODES,
    FourModeOperator,
    ModeId,
    StateVector,
    commutator_matrix,
    interior_indices,
    lift,
    restrict,
)

AXIS_OF_INDEX = {0: "t", 1: "x", 2: "y", 3: "z"}
ROTATIONS = ((1, 2), (1, 3), (2, 3))
BOOSTS = ((0, 1), (0, 2), (0, 3))
LORENTZ = BOOSTS + ROTATIONS
SQRT2 = np.sqrt(2.0)

TOL_PP = 1e-14
TOL_HEISENBERG = 1e-12
TOL_FORM = 1e-12
TOL_ROTATION = 1e-10
SIGN_TIE = 1e-12


def _name(mu, nu):
    return f"M{mu}{nu}"


@dataclass(frozen=True, eq=False)
class PhaseSpaceOperators:
    """``x, y, z, t`` and their conjugate momenta, keyed by axis label."""

    position: dict
    momentum: dict
    annihilators: dict

    @property
    def cutoff(self):
        return self.position["x"].cutoff


def build_phase_space(cutoff) -> PhaseSpaceOperators:
    """``q = (a + a^dag)/sqrt 2`` and ``p = -i (a - a^dag)/sqrt 2`` for each spacetime mode."""
    cutoff = as_cutoff(cutoff)
    ann = make_ladder("annihilate", cutoff)
    cre = make_ladder("create", cutoff)
    pos, mom, anns = {}, {}, {}
    for label in "xyzt":
        a = lift(ann, ModeId(label))
        ad = lift(cre, ModeId(label))
        anns[label] = a
        pos[label] = (a + ad) * (1 / SQRT2)
        mom[label] = (a - ad) * (-1j / SQRT2)
    return PhaseSpaceOperators(pos, mom, anns)


@dataclass(frozen=True, eq=False)
class PoincareGenerators:
    """``P[mu]`` plus each ``M[(mu, nu)]`` (mu < nu) in xp-form and ladder form."""

    P: dict
    M: dict
    M_ladder: dict
    phase_space: PhaseSpaceOperators

    @property
    def cutoff(self):
        return self.phase_space.cutoff

    def lorentz(self, mu: int, nu: int, ladder: bool = False):
        """Antisymmetric extension: ``M[nu, mu] = -M[mu, nu]``, ``M[mu, mu] = 0`` (returns None)."""
        table = self.M_ladder if ladder else self.M
        if mu == nu:
            return None
        if mu < nu:
            return table[(mu, nu)]
        return -table[(nu, mu)]


def build_generators(cutoff) -> PoincareGenerators:
    cutoff = as_cutoff(cutoff)
    ps = build_phase_space(cutoff)
    q, p, a = ps.position, ps.momentum, ps.annihilators
    ad = {k: v.dag() for k, v in a.items()}

    P = {mu: p[AXIS_OF_INDEX[mu]] for mu in range(4)}
    M = {
        (2, 3): q["y"] @ p["z"] - q["z"] @ p["y"],
        (1, 3): q["z"] @ p["x"] - q["x"] @ p["z"],
        (1, 2): q["x"] @ p["y"] - q["y"] @ p["x"],
        (0, 1): q["t"] @ p["x"] + q["x"] @ p["t"],
        (0, 2): q["t"] @ p["y"] + q["y"] @ p["t"],
        (0, 3): q["t"] @ p["z"] + q["z"] @ p["t"],
    }
    M_ladder = {
        (2, 3): 1j * (ad["y"] @ a["z"] - ad["z"] @ a["y"]),
        (1, 3): 1j * (ad["z"] @ a["x"] - ad["x"] @ a["z"]),
        (1, 2): 1j * (ad["x"] @ a["y"] - ad["y"] @ a["x"]),
        (0, 1): 1j * (a["t"] @ a["x"] - ad["x"] @ ad["t"]),
        (0, 2): 1j * (a["t"] @ a["y"] - ad["y"] @ ad["t"]),
        (0, 3): 1j * (a["t"] @ a["z"] - ad["z"] @ ad["t"]),
    }
    return PoincareGenerators(P, M, M_ladder, ps)


# -- metric ------------------------------------------------------------------


@dataclass(frozen=True)
class MetricSignature:
    eta: tuple

    def __post_init__(self):
        eta = tuple(int(e) for e in self.eta)
        if len(eta) != 4 or any(e not in (1, -1) for e in eta):
            raise ValueError(f"metric diagonal must be four entries of +-1, got {self.eta}")
        object.__setattr__(self, "eta", eta)

    @classmethod
    def parse(cls, text: str) -> "MetricSignature":
        # index 0 is time, so only the two Lorentzian conventions make sense
        if text not in ("+---", "-+++"):
            raise ValueError(f"signature must look like '+---' or '-+++', got {text!r}")
        return cls(tuple(1 if ch == "+" else -1 for ch in text))

    def __str__(self):
        return "".join("+" if e > 0 else "-" for e in self.eta)

    def __getitem__(self, key):
        mu, nu = key
        return self.eta[mu] if mu == nu else 0


MOSTLY_MINUS = MetricSignature((1, -1, -1, -1))
MOSTLY_PLUS = MetricSignature((-1, 1, 1, 1))


# -- audit -------------------------------------------------------------------


@dataclass(frozen=True)
class AuditEntry:
    sector: str
    relation: str
    lhs: str
    rhs: str
    signature: str | None
    best_sign: int
    residual: float
    margin: int
    cutoff: int


@dataclass(frozen=True)
class AlgebraAuditReport:
    signature: str
    margin: int
    cutoff: int
    entries: tuple = field(default_factory=tuple)

    def sector(self, name: str) -> list[AuditEntry]:
        return [e for e in self.entries if e.sector == name]

    def max_residual(self, name: str) -> float:
        return max((e.residual for e in self.sector(name)), default=0.0)

    @property
    def form_signs(self) -> dict:
        return {e.relation: e.best_sign for e in self.sector("form")}

    @property
    def rotation_signs(self) -> tuple:
        return tuple(e.best_sign for e in self.sector("rotation_closure"))

    @property
    def rotation_closure_consistent(self) -> bool:
        # rescaling each generator by +-1 can fix the signs iff all cyclic signs agree
        return len(set(self.rotation_signs)) == 1

    def failures(self) -> list[str]:
        """Exactly verifiable checks that miss their tolerance."""
        out = []
        for e in self.sector("PP"):
            if e.residual > TOL_PP:
                out.append(f"{e.relation}: residual {e.residual:.3e} > {TOL_PP:g}")
        for e in self.sector("heisenberg"):
            if e.residual > TOL_HEISENBERG or e.best_sign != 1:
                out.append(f"{e.relation}: residual {e.residual:.3e}, sign {e.best_sign:+d}")
        for e in self.sector("form"):
            if e.residual > TOL_FORM:
                out.append(f"{e.relation}: residual {e.residual:.3e} > {TOL_FORM:g}")
        for e in self.sector("rotation_closure"):
            if e.residual > TOL_ROTATION:
                out.append(f"{e.relation}: residual {e.residual:.3e} > {TOL_ROTATION:g}")
        if self.sector("rotation_closure") and not self.rotation_closure_consistent:
            out.append(f"rotation closure signs inconsistent: {self.rotation_signs}")
        return out

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "signature": self.signature,
            "margin": self.margin,
            "cutoff": self.cutoff,
            "form_signs": self.form_signs,
            "rotation_closure_consistent": self.rotation_closure_consistent,
            "entries": [asdict(e) for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


class _Interior:
    """Caches interior-restricted matrices for one cutoff and margin."""

    def __init__(self, cutoff, margin):
        self.idx = interior_indices(cutoff, margin)
        self.size = len(self.idx)
        self._cache = {}

    def __call__(self, op, key=None):
        if op is None:
            return sp.csr_matrix((self.size, self.size), dtype=complex)
        if key is not None and key in self._cache:
            return self._cache[key]
        m = restrict(op if sp.issparse(op) else op.matrix, self.idx)
        if key is not None:
            self._cache[key] = m
        return m


def best_sign(lhs: sp.spmatrix, rhs: sp.spmatrix) -> tuple[int, float]:
    """Sign ``s`` minimizing ``||lhs - s * rhs||_F``; ties (within 1e-12) go to +1."""
    r_plus = sp.linalg.norm(lhs - rhs) if (lhs - rhs).nnz else 0.0
    r_minus = sp.linalg.norm(lhs + rhs) if (lhs + rhs).nnz else 0.0
    if r_minus < r_plus - SIGN_TIE:
        return -1, float(r_minus)
    return 1, float(r_plus)


def _fmt_coeff(c):
    return {1: "+", -1: "-"}[c]


def audit_algebra(generators: PoincareGenerators, signature, margin: int,
                  include_boosts: bool = True) -> AlgebraAuditReport:
    """Measure every asserted commutator relation on the interior subspace.

    Residuals are Frobenius norms of ``P (lhs - s * rhs) P`` where ``P``
    projects onto occupations at least ``margin`` below the cutoff in every
    mode, and ``s`` is the best-fitting global sign.

    Sectors: ``PP`` (6), ``MP`` (24), ``MM`` (15), ``heisenberg`` (16),
    ``form`` (6, xp-form vs ladder form) and ``rotation_closure`` (3). Without
    boosts the boost-carrying entries are skipped.
    """
    if isinstance(signature, str):
        signature = MetricSignature.parse(signature)
    n_max = generators.cutoff.n_max
    min_margin = 2 if include_boosts else 1
    if margin < min_margin:
        raise PreconditionError(f"margin must be >= {min_margin} for this audit, got {margin}")
    if margin >= n_max:
        raise PreconditionError(f"margin {margin} leaves no interior at cutoff {n_max}")
    sig = str(signature)
    inner = _Interior(generators.cutoff, margin)
    lorentz = LORENTZ if include_boosts else ROTATIONS
    entries = []

    def add(sector, relation, lhs_m, rhs_m, lhs, rhs, signature_tag):
        s, r = best_sign(lhs_m, rhs_m)
        entries.append(AuditEntry(sector, relation, lhs, rhs, signature_tag, s, r, margin, n_max))

    def Pm(mu):
        return inner(generators.P[mu], ("P", mu))

    def Mm(mu, nu):
        if mu == nu:
            return inner(None)
        if mu < nu:
            return inner(generators.M[(mu, nu)], ("M", mu, nu))
        return -Mm(nu, mu)

    zero = inner(None)

    # [P_mu, P_nu] = 0
    for mu, nu in itertools.combinations(range(4), 2):
        lhs = inner(commutator_matrix(generators.P[mu], generators.P[nu]))
        add("PP", f"[P{mu},P{nu}]", lhs, zero, f"[P{mu},P{nu}]", "0", sig)

    # Heisenberg [q_i, p_j] = i delta_ij
    ps = generators.phase_space
    eye = sp.identity(inner.size, dtype=complex, format="csr")
    for i, j in itertools.product("xyzt", repeat=2):
        lhs = inner(commutator_matrix(ps.position[i], ps.momentum[j]))
        rhs = 1j * eye if i == j else zero
        add("heisenberg", f"[{i},p_{j}]", lhs, rhs, f"[{i},p_{j}]", "i" if i == j else "0", None)

    # xp-form vs printed ladder form
    for mu, nu in lorentz:
        lhs = Mm(mu, nu)
        rhs = inner(generators.M_ladder[(mu, nu)])
        add("form", _name(mu, nu), lhs, rhs, f"{_name(mu, nu)} (xp)", f"{_name(mu, nu)} (ladder)", None)

    eta = signature
    # [M_mn, P_r] = i eta_mr P_n - i eta_nr P_m
    for (mu, nu), rho in itertools.product(lorentz, range(4)):
        lhs = inner(commutator_matrix(generators.M[(mu, nu)], generators.P[rho]))
        rhs = 1j * eta[mu, rho] * Pm(nu) - 1j * eta[nu, rho] * Pm(mu)
        terms = []
        if eta[mu, rho]:
            terms.append(f"{_fmt_coeff(eta[mu, rho])}i P{nu}")
        if eta[nu, rho]:
            terms.append(f"{_fmt_coeff(-eta[nu, rho])}i P{mu}")
        add("MP", f"[{_name(mu, nu)},P{rho}]", lhs, rhs, f"[{_name(mu, nu)},P{rho}]",
            " ".join(terms) or "0", sig)

    # [M_mn, M_rs] = -i eta_mr M_ns + i eta_ms M_nr - i eta_nr M_ms + i eta_ns M_mr
    for (mu, nu), (rho, sg) in itertools.combinations(lorentz, 2):
        lhs = inner(commutator_matrix(generators.M[(mu, nu)], generators.M[(rho, sg)]))
        rhs = (
            -1j * eta[mu, rho] * Mm(nu, sg)
            + 1j * eta[mu, sg] * Mm(nu, rho)
            - 1j * eta[nu, rho] * Mm(mu, sg)
            + 1j * eta[nu, sg] * Mm(mu, rho)
        )
        add("MM", f"[{_name(mu, nu)},{_name(rho, sg)}]", lhs, rhs,
            f"[{_name(mu, nu)},{_name(rho, sg)}]", "eta-contracted M", sig)

    # rotation closure, cyclic over (M23, M13, M12)
    cyc = ((2, 3), (1, 3), (1, 2))
    for k in range(3):
        a, b, c = cyc[k], cyc[(k + 1) % 3], cyc[(k + 2) % 3]
        lhs = inner(commutator_matrix(generators.M[a], generators.M[b]))
        add("rotation_closure", f"[{_name(*a)},{_name(*b)}]", lhs, 1j * Mm(*c),
            f"[{_name(*a)},{_name(*b)}]", f"i {_name(*c)}", None)

    return AlgebraAuditReport(sig, margin, n_max, tuple(entries))


# -- transformations ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TransformParameters:
    """Translation ``a[mu]`` and antisymmetric ``omega[mu, nu]``.

    The generator is ``sum_mu a[mu] P_mu + sum_{mu<nu} omega[mu, nu] M_{mu nu}``,
    with no metric raising and no factor of two.
    """

    translation: np.ndarray = field(default_factory=lambda: np.zeros(4))
    omega: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    def __post_init__(self):
        a = np.array(self.translation, dtype=float).reshape(4)
        w = np.array(self.omega, dtype=float).reshape(4, 4)
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(w)):
            raise ValueError("transform parameters must be finite")
        if not np.allclose(w, -w.T, rtol=0, atol=1e-15):
            raise ValueError("omega must be antisymmetric")
        object.__setattr__(self, "translation", a)
        object.__setattr__(self, "omega", w)

    @classmethod
    def rotation(cls, mu: int, nu: int, angle: float) -> "TransformParameters":
        w = np.zeros((4, 4))
        w[mu, nu] = angle
        w[nu, mu] = -angle
        return cls(omega=w)

    @classmethod
    def shift(cls, mu: int, amount: float) -> "TransformParameters":
        a = np.zeros(4)
        a[mu] = amount
        return cls(translation=a)


@dataclass(frozen=True, eq=False)
class TransformResult:
    state: StateVector
    leak: float  # squared norm fraction outside the interior subspace


def generator_combination(params: TransformParameters, generators: PoincareGenerators) -> FourModeOperator:
    g = FourModeOperator.zero(generators.cutoff)
    for mu in range(4):
        if params.translation[mu] != 0:
            g = g + float(params.translation[mu]) * generators.P[mu]
    for mu, nu in LORENTZ:
        if params.omega[mu, nu] != 0:
            g = g + float(params.omega[mu, nu]) * generators.M[(mu, nu)]
    return g


DENSE_EXPM_LIMIT = 4096


def _exp_apply(h: sp.csr_matrix, block: np.ndarray) -> np.ndarray:
    """``exp(i h) @ block``: dense scaling-and-squaring when small, truncated Taylor (expm_multiply) otherwise."""
    if h.shape[0] <= DENSE_EXPM_LIMIT:
        return scipy.linalg.expm(1j * h.toarray()) @ block
    return scipy.sparse.linalg.expm_multiply(1j * h.tocsc(), block)


def poincare_transform(state: StateVector, params: TransformParameters, generators: PoincareGenerators,
                       margin: int = 2, leak_threshold: float = 1e-3) -> TransformResult:
    """Apply ``exp(i (a.P + omega.M))`` to ``state``.

    The exponential is taken on the tensor factor of the modes the generator
    actually touches, so a translation along x at cutoff 32 is a 33x33 problem.
    Raises :class:`NormLeakError` when more than ``leak_threshold`` of the norm
    ends up within ``margin`` of the cutoff in some mode.
    """
    if state.cutoff != generators.cutoff:
        raise CutoffError("state and generators have different cutoffs")
    d = state.cutoff.dim
    g = generator_combination(params, generators)
    modes = g.active_modes
    if not modes:
        out = state.coefficients.copy()
    else:
        h = g.restricted(modes)
        rest = tuple(i for i in range(N_MODES) if i not in modes)
        t = np.transpose(state.tensor, modes + rest)
        block = t.reshape(d ** len(modes), -1)
        new = _exp_apply(h, block).reshape(t.shape)
        out = np.transpose(new, np.argsort(modes + rest)).reshape(-1)
    result = StateVector(out, state.cutoff, state.basis)
    leak = _leak(result, margin)
    if leak > leak_threshold:
        raise NormLeakError(leak, leak_threshold)
    return TransformResult(result, leak)


def _leak(state: StateVector, margin: int) -> float:
    total = float(np.sum(np.abs(state.coefficients) ** 2))
    if total == 0.0:
        return 0.0
    idx = interior_indices(state.cutoff, margin)
    inside = float(np.sum(np.abs(state.coefficients[idx]) ** 2))
    return max(0.0, (total - inside) / total)
