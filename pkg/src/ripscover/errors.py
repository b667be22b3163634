"""Exception hierarchy shared by all ripscover modules."""


class RipscoverError(Exception):
    """Base class for all ripscover errors."""


class ScenarioError(RipscoverError):
    """Structurally invalid scenario data."""


class EmptyRestrictedDomain(RipscoverError):
    """No grid cell survives rasterization of the restricted domain."""


class LengthMismatch(RipscoverError):
    """Perturbation target list does not match the sensor list."""


class AssumptionFailure(RipscoverError):
    """A criterion was invoked on a scenario violating its assumptions."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"assumption check failed: {report.failures()}")


class EmptySet(RipscoverError):
    """Hausdorff distance of an empty point set."""


class PreconditionViolated(RipscoverError):
    """A documented operation precondition does not hold."""


class CollisionError(RipscoverError):
    """Graph correspondence rejected: f collapses a subset point with an
    outside point."""

    def __init__(self, inside, outside):
        self.inside = inside
        self.outside = outside
        super().__init__(f"f({inside}) == f({outside}) crosses the subset boundary")


class CombinatorialBlowup(RipscoverError):
    """Simplex enumeration exceeded the configured budget."""


class NotACycle(RipscoverError):
    """Input chain has a nonzero boundary."""


class NotARelativeCycle(RipscoverError):
    """Input chain's boundary has a component outside the fence."""


class ZeroChain(RipscoverError):
    """Coverage of the zero chain is undefined."""


class SimplexMissing(RipscoverError):
    """A transported simplex is absent from the target complex."""


class NotSimplicial(RipscoverError):
    """Vertex map is not subordinate to an eps-simplicial correspondence."""


class NumericalFailure(RipscoverError):
    """Floating-point LP solve could not be certified; exact retry failed too."""


class EmptyMask(RipscoverError):
    """Connectivity check on an empty mask."""


class SizeExceeded(RipscoverError):
    """Brute-force oracle invoked beyond its size limit."""
