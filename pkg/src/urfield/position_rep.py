"""Position representation of tensor-space states via Hermite functions.

Each occupation number maps to an orthonormal harmonic-oscillator eigenfunction
``phi_n``; a basis state ``|Nx, Ny, Nz, Nt>`` becomes the product
``phi_Nx(x) phi_Ny(y) phi_Nz(z) phi_Nt(t)``. The time axis is treated exactly
like the spatial ones.

Normalization is the orthonormal one, ``(2^n n!)^{-1/2} pi^{-1/4} H_n(x) exp(-x^2/2)``,
evaluated by the three-term recurrence (no factorials).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_hermite

from ._io import FORMAT_VERSION, atomic_write, fmt
from .errors import PreconditionError
from .tensor4 import N_MODES, StateVector

AXES = ("x", "y", "z", "t")
PI_QUARTER = np.pi ** -0.25
MAX_ORDER = 4096


def hermite_functions(n_max: int, x, scaled: bool = False) -> np.ndarray:
    """Table of ``phi_0 .. phi_{n_max}`` at ``x``; shape ``(n_max + 1,) + x.shape``.

    With ``scaled=True`` the Gaussian factor is dropped, i.e. the table holds
    ``phi_n(x) exp(x^2 / 2)``. That form is what Gauss-Hermite quadrature wants.
    """
    if n_max < 0:
        raise PreconditionError(f"order must be non-negative, got {n_max}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = PI_QUARTER if scaled else PI_QUARTER * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


@dataclass(frozen=True)
class HermiteEvaluator:
    """Hermite functions up to a fixed maximum order."""

    n_max: int

    def __post_init__(self):
        if not 0 <= self.n_max <= MAX_ORDER:
            raise PreconditionError(f"maximum order must lie in [0, {MAX_ORDER}], got {self.n_max}")

    def table(self, x) -> np.ndarray:
        return hermite_functions(self.n_max, x)

    def __call__(self, n: int, x):
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 0 <= n <= self.n_max:
            raise PreconditionError(f"order {n!r} outside [0, {self.n_max}]")
        return hermite_functions(int(n), x)[n]


def phi(n: int, x):
    """Orthonormal Hermite function ``phi_n(x)``."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 0 <= n <= MAX_ORDER:
        raise PreconditionError(f"order {n!r} outside [0, {MAX_ORDER}]")
    v = hermite_functions(int(n), x)[n]
    return float(v) if v.ndim == 0 else v


def phi_product(occ, X) -> float:
    """``phi_N(X)``: product of the four single-axis values."""
    counts = tuple(occ)
    if len(counts) != N_MODES or len(X) != N_MODES:
        raise ValueError("need four occupation numbers and four coordinates")
    return float(np.prod([phi(int(n), float(xi)) for n, xi in zip(counts, X)]))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for the weight ``exp(-x^2)``; exact to degree ``2q - 1``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return len(self.nodes)


def gauss_hermite(q: int) -> QuadratureRule:
    if q < 1:
        raise PreconditionError("quadrature order must be >= 1")
    # scipy switches to an asymptotic rule at high order where hermgauss overflows
    x, w = roots_hermite(q)
    return QuadratureRule(x, w)


def overlap_matrix(n_max: int, q: int) -> np.ndarray:
    """``[<phi_m|phi_n>]`` for ``m, n <= n_max`` by Gauss-Hermite quadrature."""
    rule = gauss_hermite(q)
    table = hermite_functions(n_max, rule.nodes, scaled=True)
    return (table * rule.weights) @ table.T


# -- grids -------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid: ``axes`` maps labels to ``(min, max, steps)``; the rest are fixed."""

    axes: dict
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        for label, bounds in self.axes.items():
            if label not in AXES:
                raise ValueError(f"unknown axis {label!r}")
            lo, hi, steps = bounds
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise ValueError(f"axis {label}: need finite min < max, got {lo}, {hi}")
            if int(steps) != steps or steps < 2:
                raise ValueError(f"axis {label}: need at least 2 steps, got {steps}")
        for label, value in self.fixed.items():
            if label not in AXES:
                raise ValueError(f"unknown axis {label!r}")
            if label in self.axes:
                raise ValueError(f"axis {label} is both swept and fixed")
            if not np.isfinite(value):
                raise ValueError(f"axis {label}: fixed value must be finite")

    def points(self, label: str) -> np.ndarray:
        if label in self.axes:
            lo, hi, steps = self.axes[label]
            return np.linspace(lo, hi, int(steps))
        return np.array([float(self.fixed.get(label, 0.0))])

    @property
    def shape(self) -> tuple:
        return tuple(len(self.points(a)) for a in AXES)

    def coordinates(self) -> np.ndarray:
        """``(n_points, 4)`` array in row-major order, x slowest."""
        mesh = np.meshgrid(*(self.points(a) for a in AXES), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def to_dict(self) -> dict:
        return {
            "axes": {k: [float(v[0]), float(v[1]), int(v[2])] for k, v in sorted(self.axes.items(), key=lambda kv: AXES.index(kv[0]))},
            "fixed": {a: float(self.fixed.get(a, 0.0)) for a in AXES if a not in self.axes},
        }


@dataclass(frozen=True, eq=False)
class WavefunctionGrid:
    grid: GridSpec
    values: np.ndarray  # flattened, row-major over (x, y, z, t)
    n_max: int

    def __post_init__(self):
        if self.values.size != int(np.prod(self.grid.shape)):
            raise ValueError("sample count does not match grid")

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


def _contract(state: StateVector, tables) -> np.ndarray:
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", state.tensor, *tables, optimize=True)


def synthesize(state: StateVector, grid: GridSpec) -> WavefunctionGrid:
    """``Psi(X) = sum_N c(N) phi_N(X)`` at every grid point."""
    n = state.cutoff.n_max
    tables = [hermite_functions(n, grid.points(a)) for a in AXES]
    values = _contract(state, tables).reshape(-1)
    return WavefunctionGrid(grid, values, n)


def evaluate(state: StateVector, X) -> complex:
    """``Psi`` at a single point."""
    n = state.cutoff.n_max
    tables = [hermite_functions(n, np.array([xi])) for xi in X]
    return complex(_contract(state, tables).reshape(-1)[0])


def parseval_check(state: StateVector, q: int) -> tuple[float, float]:
    """Return ``(sum |c|^2, integral |Psi|^2 d^4X)``, the latter by tensor Gauss-Hermite quadrature."""
    n = state.cutoff.n_max
    if q < n + 1:
        raise PreconditionError(f"quadrature order {q} too low for cutoff {n}; need >= {n + 1}")
    rule = gauss_hermite(q)
    table = hermite_functions(n, rule.nodes, scaled=True)
    psi = _contract(state, [table] * N_MODES)
    w = rule.weights
    w4 = np.einsum("i,j,k,l->ijkl", w, w, w, w)
    coeff = float(np.sum(np.abs(state.coefficients) ** 2))
    return coeff, float(np.sum(w4 * np.abs(psi) ** 2))


def shifted_vacuum_fidelity(state: StateVector, shift: float, axis: str = "x", half_width: float = 16.0,
                            points: int = 4001) -> float:
    """``|<g|Psi>|^2 / <Psi|Psi>`` for ``g`` the vacuum Gaussian displaced by ``shift`` along ``axis``.

    The overlap integrals ``<g|phi_n>`` are taken numerically on a uniform grid
    (trapezoidal, spectrally accurate for Gaussian tails).
    """
    ax = AXES.index(axis)
    n = state.cutoff.n_max
    x = np.linspace(-half_width, half_width, points)
    g = PI_QUARTER * np.exp(-0.5 * (x - shift) ** 2)
    proj = np.trapezoid(hermite_functions(n, x) * g, x, axis=1)
    # <phi_0|phi_m> = delta on the untouched axes
    sl = [0] * N_MODES
    sl[ax] = slice(None)
    amp = np.dot(proj, state.tensor[tuple(sl)])
    return float(abs(amp) ** 2 / state.norm() ** 2)


# -- export ------------------------------------------------------------------


def wavefunction_csv(wf: WavefunctionGrid) -> str:
    rows = [f"# format_version: {FORMAT_VERSION}", "x,y,z,t,re,im"]
    for (x, y, z, t), v in zip(wf.grid.coordinates(), wf.values):
        rows.append(",".join(fmt(u) for u in (x, y, z, t, v.real, v.imag)))
    return "\n".join(rows) + "\n"


def wavefunction_metadata(wf: WavefunctionGrid, extra: dict | None = None) -> dict:
    meta = {"format_version": FORMAT_VERSION, "cutoff": wf.n_max, "grid": wf.grid.to_dict()}
    meta.update(extra or {})
    return meta


def write_wavefunction(wf: WavefunctionGrid, path, extra: dict | None = None) -> None:
    """Write the CSV table and a ``<path>.json`` metadata sidecar."""
    atomic_write(path, wavefunction_csv(wf))
    meta = wavefunction_metadata(wf, extra)
    atomic_write(f"{path}.json", json.dumps(meta, indent=2) + "\n")

