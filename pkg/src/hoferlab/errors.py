"""Exception types for numerical failure modes and scenario validation."""

from __future__ import annotations


class HoferLabError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatchError(HoferLabError, ValueError):
    """Operands do not live in the same phase space."""


class IntegrationError(HoferLabError):
    """The flow integration produced invalid data (non-symmetric generator,
    NaN/overflow, or a node matrix that failed the symplecticity checks)."""


class CrossingResolutionError(HoferLabError):
    """Crossings sit closer than the scan grid can separate; refine steps."""


class IrregularCrossingError(HoferLabError):
    """A crossing form is singular on the kernel, so the index is undefined
    without perturbation.  Valid Morse scenarios never hit this."""


class EndpointCrossingError(HoferLabError):
    """A crossing coincides with an interval endpoint under a policy that
    forbids it."""


class DegenerateEndpointError(HoferLabError):
    """The flow has eigenvalue 1 at the final time, violating the
    nondegeneracy hypothesis."""


class ScenarioValidationError(HoferLabError):
    """A scenario failed structural validation.  Carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
