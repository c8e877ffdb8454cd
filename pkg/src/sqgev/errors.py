"""Exception types shared across the package."""


class SqgevError(Exception):
    """Base class for all package-specific errors."""


class NonEvenSymbol(SqgevError):
    """A Fourier multiplier is not even in k and would break Hermitian symmetry."""


class WeightOverflow(SqgevError):
    """A Gevrey/Sobolev weight exceeds the representable floating-point range
    on a mode carrying a nonzero coefficient."""


class StabilityViolation(SqgevError):
    """The field norm grew by more than the allowed factor in a single step."""


class ZeroInitialData(SqgevError):
    """An estimate that divides by the initial norm received zero initial data."""


class Divergence(SqgevError):
    """Picard iterate distances grew for several consecutive sweeps."""


class NonPositiveRemaining(SqgevError):
    """The blow-up envelope was evaluated at a non-positive time-to-blow-up."""


class EmptyLedger(SqgevError):
    """A monitor needs at least one recorded time but the ledger is empty."""


class InequalityViolated(SqgevError):
    """A theorem-level pointwise inequality failed on a sample (a bug signal)."""


class BandOutOfRange(SqgevError):
    """Requested wavenumber band falls outside the grid's dealiased region."""


class ParseError(SqgevError):
    """Config document could not be parsed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(SqgevError):
    """A config value violates a named constraint."""

    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key}: {constraint}")
