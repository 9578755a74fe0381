"""Exception hierarchy shared by every module of the package."""


class TwinBeamError(Exception):
    """Base class for all errors raised by :mod:`twinbeam`."""


class DomainError(TwinBeamError, ValueError):
    """A parameter lies outside the range where the model is defined."""


class StructuralError(TwinBeamError, ValueError):
    """An array has the wrong shape or violates a structural invariant."""


class UnsupportedPathError(TwinBeamError, ValueError):
    """The requested fast path does not cover the given parameters."""


class NumericalError(TwinBeamError, RuntimeError):
    """A numerical procedure failed (no bracket, truncation leakage, ...)."""


class TruncationError(NumericalError):
    """The Fock cutoff is too small for the requested tolerance."""
