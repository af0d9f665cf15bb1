"""Exception hierarchy shared by every module."""


class CoherenceLabError(Exception):
    """Base class for all errors raised by coherence_lab."""


class InvalidStateError(CoherenceLabError, ValueError):
    """A vector or matrix fails the pure-state / density-matrix invariants."""


class NormalizationError(InvalidStateError):
    """Amplitudes or coefficients do not have unit norm."""

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class DimensionError(CoherenceLabError, ValueError):
    """Array shapes or subsystem dimensions are inconsistent."""


class InvalidMachineError(CoherenceLabError, ValueError):
    """A cloning machine prescription cannot be realized as a unitary."""


class InnerProductError(InvalidMachineError):
    """Prescribed input or output vectors are not orthonormal."""


class ContractError(InvalidMachineError):
    """Joint outputs do not reproduce the known states' coherence.

    ``failures`` maps a label such as ``"Psi1/A"`` to ``(expected, got)``.
    """

    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = dict(failures)
