"""Relativistic quantum mechanics and field theory on a truncated four-mode Fock space."""

from .errors import (
    CutoffError,
    FormatError,
    NormLeakError,
    ParticleCapError,
    PreconditionError,
    UrfieldError,
)
from .fock import Cutoff, LadderMatrix, interior_projector, make_ladder
from .tensor4 import (
    FourModeOperator,
    ModeId,
    ModeOccupation,
    StateVector,
    build_basis_state,
    inner_product,
    lift,
)

__version__ = "0.1.0"
