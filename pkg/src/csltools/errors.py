"""
Exception hierarchy for csltools.

Every error raised by the library derives from CslError, so callers (the CLI
in particular) can catch computation failures with a single except clause.
"""


class CslError(ValueError):
    """Base class for all csltools computation errors."""


class ZeroNorm(CslError):
    """A state vector has vanishing norm and cannot be normalized."""


class NotNormalized(CslError):
    """A state vector was expected to have unit norm."""


class DimensionMismatch(CslError):
    """Two objects defined over different basis sizes were combined."""


class NonHermitianHamiltonian(CslError):
    """A Hamiltonian matrix is not Hermitian within tolerance."""


class InvalidDensityMatrix(CslError):
    """A density matrix violates Hermiticity, trace or positivity checks."""


class IndexOutOfRange(CslError):
    """A basis index lies outside the observable."""


class NonPositiveInput(CslError):
    """A physical input that must be strictly positive was not."""


class InvalidParameter(CslError):
    """A configuration value violates its documented range."""


class EmptyRecord(CslError):
    """A statistical test was handed no samples."""


class InvalidGame(CslError):
    """A gambler's ruin game has negative or zero total stake."""


class IncompatibleDimensions(CslError):
    """Arithmetic between physical quantities of incompatible dimension."""
