"""Exception types raised across the package."""


class UrfieldError(Exception):
    """Base class for all errors raised by urfield."""


class CutoffError(UrfieldError, ValueError):
    """Invalid cutoff, or an occupation number beyond the cutoff."""


class PreconditionError(UrfieldError, ValueError):
    """An operation was called outside its documented domain."""


class NormLeakError(UrfieldError):
    """A transformation pushed too much norm out of the interior subspace."""

    def __init__(self, leak, threshold):
        self.leak = leak
        self.threshold = threshold
        super().__init__(
            f"norm leaked past the interior subspace: {leak:.3e} > {threshold:.3e}; "
            "increase the cutoff or reduce the parameters"
        )


class ParticleCapError(UrfieldError):
    """Creating a particle would exceed the field-space particle cap."""


class FormatError(UrfieldError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
