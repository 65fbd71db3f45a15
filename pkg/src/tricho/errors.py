"""Exception types shared across the package."""


class DomainError(ValueError):
    """Time argument outside the domain of a rate or operator."""


class ExtrapolationError(DomainError):
    """Tabulated rate queried outside its knot span."""


class StructuralError(ValueError):
    """Inconsistent dimensions or missing components."""


class PreconditionError(ValueError):
    """Input violates a documented precondition of an operation."""


class NotStronglyInvariantError(RuntimeError):
    """The operator restricted to a projector range is not invertible."""


class ScenarioError(ValueError):
    """Scenario file missing, malformed, or violating an invariant."""
