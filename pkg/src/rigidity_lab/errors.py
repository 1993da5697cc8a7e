"""Exception types shared across the toolkit."""


class RigidityLabError(Exception):
    """Base class for every error raised by rigidity_lab."""


class InvalidInput(RigidityLabError, ValueError):
    """Input data violates a precondition."""


class DegenerateCone(InvalidInput):
    pass


class NonUnitNormal(InvalidInput):
    pass


class ParallelNormals(InvalidInput):
    pass


class OutOfRangeAngle(InvalidInput):
    pass


class DegenerateSide(InvalidInput):
    pass


class NotPositiveDefinite(InvalidInput):
    pass


class XiOutsideDualInterior(InvalidInput):
    pass


class LengthMismatch(InvalidInput):
    pass


class StencilInvalid(RigidityLabError):
    pass


class HypothesisViolated(InvalidInput):
    pass


class AngleConditionViolated(InvalidInput):
    pass


class EmptyInterior(InvalidInput):
    pass


class AxisParallelToEdge(InvalidInput):
    pass


class AxisBelowBase(InvalidInput):
    pass


class ZeroAngle(InvalidInput):
    pass


class DegenerateTriangle(InvalidInput):
    pass


class ApexInPlane(InvalidInput):
    pass


class StepTooLarge(InvalidInput):
    pass


class NoIntersection(InvalidInput):
    pass


class QuadratureUnderResolved(RigidityLabError):
    pass


class EdgeAngleDegenerate(InvalidInput):
    pass


class ParseError(InvalidInput):
    pass


class AssertionFailure(RigidityLabError):
    """A verified invariant did not hold; carries the invariant name and margin."""

    def __init__(self, name: str, margin: float, detail: str = "", report=None):
        self.name = name
        self.margin = float(margin)
        self.detail = detail
        self.report = report  # the partial report, when one was produced before the check failed
        super().__init__(f"{name}: margin {self.margin:.3e} {detail}".strip())
