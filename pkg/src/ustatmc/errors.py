"""Exception types shared across the package."""


class UstatmcError(Exception):
    """Base class for all package errors."""


class NotErgodic(UstatmcError):
    """The transition matrix has no strictly positive power within the probe
    horizon, or a certified mixing sequence shows no observable decay."""


class NotCanonical(UstatmcError):
    """An operation requiring a completely degenerate (pi-canonical) kernel
    was given one with a lower degeneracy order."""


class BudgetExceeded(UstatmcError):
    """An exact enumeration or tensor build would exceed the configured
    work budget."""


class DegreeTooLarge(UstatmcError):
    """The trajectory is shorter than the kernel degree (n < m)."""


class NonIntegrable(UstatmcError):
    """A projection needs exact integrals against pi but the kernel has no
    dense table (general state space without a quadrature rule)."""


class NeedDeclaredEnvelope(UstatmcError):
    """B_q requested on a general state space without a declared envelope."""


class PNotPositive(UstatmcError):
    """A moment-splitting exponent p must be strictly positive."""


class Unbounded(UstatmcError):
    """A declared ergodicity profile cannot bound the requested supremum."""


class DomainError(UstatmcError):
    """A closed-form bound was evaluated outside its parameter domain."""


class ConfigError(UstatmcError):
    """A configuration file is malformed or fails schema validation."""
