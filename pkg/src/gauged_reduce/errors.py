"""Exception types raised by gauged_reduce."""


class ReductionError(ValueError):
    """Base class for all numerical contract violations."""


class ClosureViolation(ReductionError):
    """A matrix expected to lie in the algebra left its span."""


class OffManifold(ReductionError):
    pass


class OffTangent(ReductionError):
    pass


class Degenerate(ReductionError):
    """Inertia tensor lost rank (isotropy jumped)."""


class SectionDegenerate(ReductionError):
    pass


class CanonicalizationFailure(ReductionError):
    pass


class InvarianceViolation(ReductionError):
    """An observable is not invariant under the residual isotropy."""


class RepresentativeAmbiguity(ReductionError):
    pass


class StepOutOfDomain(ReductionError):
    pass


class ScenarioSelfCheckFailure(ReductionError):
    def __init__(self, scenario, invariant, detail=""):
        self.scenario = scenario
        self.invariant = invariant
        super().__init__(f"{scenario}: invariant '{invariant}' failed {detail}".rstrip())


class ParseError(ReductionError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class EvalError(ReductionError):
    pass
