"""Single-mode bosonic ladder operators on a hard-truncated number basis.

The basis is ``|0>, |1>, ..., |n_max>``. Truncation is a hard cutoff, so the
creator sends ``|n_max>`` to zero and ``[a, a^dag]`` deviates from the identity
only in its last diagonal entry (value ``-n_max`` instead of ``1``). Identity
checks are therefore made on the interior subspace, see
:func:`interior_projector`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CutoffError, PreconditionError

KINDS = ("annihilate", "create", "number", "identity", "projector")


@dataclass(frozen=True)
class Cutoff:
    """Largest occupation number kept per mode."""

    n_max: int

    def __post_init__(self):
        n = self.n_max
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise CutoffError(f"cutoff must be an integer, got {n!r}")
        if n < 1:
            raise CutoffError(f"cutoff must be >= 1, got {n}")
        object.__setattr__(self, "n_max", int(n))

    @property
    def dim(self) -> int:
        return self.n_max + 1


def as_cutoff(cutoff) -> Cutoff:
    return cutoff if isinstance(cutoff, Cutoff) else Cutoff(cutoff)


@dataclass(frozen=True, eq=False)
class LadderMatrix:
    """A sparse single-mode operator tagged with its kind and cutoff."""

    kind: str
    cutoff: Cutoff
    entries: sp.csr_matrix

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ladder kind {self.kind!r}")
        d = self.cutoff.dim
        if self.entries.shape != (d, d):
            raise CutoffError(f"matrix shape {self.entries.shape} does not match cutoff {self.cutoff.n_max}")

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def dag(self) -> sp.csr_matrix:
        return self.entries.conj().T.tocsr()


def _annihilator(d: int) -> sp.csr_matrix:
    # <N-1|a|N> = sqrt(N) on the first superdiagonal
    return sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), dtype=complex, format="csr")


def make_ladder(kind: str, cutoff) -> LadderMatrix:
    """Build ``a``, ``a^dag``, ``a^dag a`` or the identity for one mode.

    The number operator is the exact diagonal ``diag(0..n_max)``, not the float
    product of the two ladder matrices.

    Parameters
    ----------
    kind : {"annihilate", "create", "number", "identity"}
    cutoff : Cutoff or int
        ``n_max``; the matrix has dimension ``n_max + 1``.
    """
    cutoff = as_cutoff(cutoff)
    d = cutoff.dim
    if kind == "annihilate":
        m = _annihilator(d)
    elif kind == "create":
        m = _annihilator(d).conj().T.tocsr()
    elif kind == "number":
        m = sp.diags(np.arange(d, dtype=float), 0, shape=(d, d), dtype=complex, format="csr")
    elif kind == "identity":
        m = sp.identity(d, dtype=complex, format="csr")
    else:
        raise ValueError(f"unknown ladder kind {kind!r}")
    return LadderMatrix(kind, cutoff, m)


def interior_mask(cutoff, margin: int) -> np.ndarray:
    """Boolean mask of occupation numbers ``N <= n_max - margin``."""
    cutoff = as_cutoff(cutoff)
    if margin < 0 or margin >= cutoff.n_max:
        raise PreconditionError(f"margin must satisfy 0 <= margin < n_max={cutoff.n_max}, got {margin}")
    return np.arange(cutoff.dim) <= cutoff.n_max - margin


def interior_projector(cutoff, margin: int) -> LadderMatrix:
    """Diagonal 0/1 projector onto occupations at least ``margin`` below the cutoff."""
    cutoff = as_cutoff(cutoff)
    mask = interior_mask(cutoff, margin)
    m = sp.diags(mask.astype(complex), 0, format="csr")
    return LadderMatrix("projector", cutoff, m)
