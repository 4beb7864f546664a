"""Exception hierarchy shared by every backend."""


class TnsimError(Exception):
    """Base class for all errors raised by :mod:`tnsim`."""


class DimensionError(TnsimError, ValueError):
    """Extents of joined modes disagree."""


class ParseError(TnsimError, ValueError):
    """Malformed circuit, bit-string or observable text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class AdjacencyError(TnsimError, ValueError):
    """A two-qubit operation was applied to non-adjacent sites of a chain ansatz."""


class InfeasibleError(TnsimError):
    """No slicing of the network fits the memory budget."""


class ResourceError(TnsimError):
    """A dense result would exceed the supported size."""


class SamplingError(TnsimError):
    """A conditional branch has (numerically) zero probability."""


class InternalConsistencyError(TnsimError, RuntimeError):
    """Execution diverged from the contraction plan's bookkeeping."""


class NoiseModelError(TnsimError, ValueError):
    """Invalid channel or noise-model document."""
