"""Exception types shared across the package."""


class CoopGridError(Exception):
    """Base class for all package-specific errors."""


class LpValidationError(CoopGridError, ValueError):
    """A linear program failed structural validation."""


class ScenarioError(CoopGridError, ValueError):
    """A scenario document or generated scenario is malformed or inconsistent."""


class DispatchError(CoopGridError, RuntimeError):
    """A dispatch solve failed (infeasible or unbounded program)."""


class MissingCoalitionError(CoopGridError, KeyError):
    """A required coalition value is absent from a characteristic function."""
