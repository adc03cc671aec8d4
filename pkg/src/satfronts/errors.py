"""Exception types raised across the package."""


class SatFrontsError(Exception):
    """Base class for all package errors."""


class DomainError(SatFrontsError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ValidationError(SatFrontsError, ValueError):
    """A reaction or flux does not satisfy the structural hypotheses."""


class QuadratureError(SatFrontsError):
    """A numerical integral (typically a tail) failed to converge."""


class SeedError(SatFrontsError):
    """No admissible local start exists for a shot from an equilibrium."""


class StepError(SatFrontsError):
    """The integrator could not advance away from the singular ceiling."""


class BracketError(SatFrontsError):
    """No sign-changing speed bracket could be found."""


class IpofError(SatFrontsError):
    """The linear control |f(s)| <= f'(alpha)|s - alpha| fails."""


class RegimeError(SatFrontsError):
    """The requested speed lies outside the admissible interval."""


class WindowError(SatFrontsError, ValueError):
    """A test function is supported outside the sampled profile window."""
