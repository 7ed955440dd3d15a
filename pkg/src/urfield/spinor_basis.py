"""Change of basis from Weyl-spinor components (a, b, c, d) to (a_x, a_y, a_z, a_t).

A unit of quantum information is the spinor ``u = (a + b i, c + d i)``. The
spacetime components are fixed real combinations with entries +-1/2, and the
4x4 matrix is orthogonal, so the quantized combinations keep canonical
commutators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import as_cutoff, make_ladder
from .tensor4 import FourModeOperator, ModeId, lift

# rows: x, y, z, t; columns: a, b, c, d
BASIS_ROTATION = 0.5 * np.array(
    [
        [1, -1, 1, -1],
        [1, -1, -1, 1],
        [1, 1, -1, -1],
        [1, 1, 1, 1],
    ],
    dtype=float,
)
BASIS_ROTATION.setflags(write=False)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "t": np.eye(2, dtype=complex),
}
for _m in PAULI.values():
    _m.setflags(write=False)


@dataclass(frozen=True)
class SpinorAmplitude:
    a: float
    b: float
    c: float
    d: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d], dtype=float)

    def norm_squared(self) -> float:
        return float(np.sum(self.as_array() ** 2))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm_squared() - 1.0) <= tol

    def weyl_spinor(self) -> np.ndarray:
        return np.array([self.a + 1j * self.b, self.c + 1j * self.d])


def to_xyzt(s: SpinorAmplitude) -> np.ndarray:
    return BASIS_ROTATION @ s.as_array()


def from_xyzt(v) -> SpinorAmplitude:
    # orthogonal, so the inverse is the transpose
    a, b, c, d = BASIS_ROTATION.T @ np.asarray(v, dtype=float)
    return SpinorAmplitude(float(a), float(b), float(c), float(d))


def weyl_spinor_from_xyzt(v) -> np.ndarray:
    """The spinor written directly in terms of (a_x, a_y, a_z, a_t)."""
    ax, ay, az, at = np.asarray(v, dtype=float)
    u1 = 0.5 * (ax + ay + az + at) + 0.5 * (-ax - ay + az + at) * 1j
    u2 = 0.5 * (ax - ay - az + at) + 0.5 * (-ax + ay - az + at) * 1j
    return np.array([u1, u2])


def lift_basis_change(cutoff) -> dict[str, FourModeOperator]:
    """Spacetime-basis annihilators as combinations of the lifted spinor-basis ones.

    Returns ``{"x": a_x, "y": a_y, "z": a_z, "t": a_t}``. Downstream code builds
    spacetime operators directly per mode; this route exists for auditing.
    """
    cutoff = as_cutoff(cutoff)
    ann = make_ladder("annihilate", cutoff)
    spinor_ops = [lift(ann, ModeId(lbl, "spinor")) for lbl in "abcd"]
    out = {}
    for row, label in zip(BASIS_ROTATION, "xyzt"):
        op = FourModeOperator.zero(cutoff)
        for coeff, a in zip(row, spinor_ops):
            op = op + float(coeff) * a
        out[label] = op
    return out
