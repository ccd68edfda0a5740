"""Exception and warning types shared across the package."""


class UnlearnkitError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(UnlearnkitError):
    """A matrix required to be positive definite has a pivot at or below threshold."""


class DimensionMismatch(UnlearnkitError):
    pass


class BadLabel(UnlearnkitError):
    """Logistic labels must be in {-1, +1}."""


class NonSmoothRegularizer(UnlearnkitError):
    """Derivative requested for a regularizer that is not differentiable."""


class EmptyDataset(UnlearnkitError):
    pass


class ConstantsInvalid(UnlearnkitError):
    """Smoothness/convexity constants are non-positive or inconsistent."""


class DidNotConverge(UnlearnkitError):
    def __init__(self, max_iters, residual=None):
        self.max_iters = max_iters
        self.residual = residual
        msg = f"no convergence after {max_iters} iterations"
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        super().__init__(msg)


class AllDataDeleted(UnlearnkitError):
    pass


class AlreadyDeleted(UnlearnkitError):
    pass


class BranchMismatch(UnlearnkitError):
    """Unlearner branch does not match the smoothness of the objective."""


class BadBudget(UnlearnkitError):
    """Privacy budget outside epsilon > 0, 0 < delta < 1."""


class OutOfRegime(UnlearnkitError):
    """Deletion-capacity bound queried outside its stated (epsilon, delta) regime."""


class BadN(UnlearnkitError):
    pass


class BadShape(UnlearnkitError):
    pass


class ParseError(UnlearnkitError):
    def __init__(self, line, column, detail=""):
        self.line = line
        self.column = column
        super().__init__(f"parse error at line {line}, column {column}: {detail}")


class RaggedRows(UnlearnkitError):
    def __init__(self, line):
        self.line = line
        super().__init__(f"row at line {line} has inconsistent width")


class NonBinaryLabels(UnlearnkitError):
    pass


class StreamTooLong(UnlearnkitError):
    pass


class ConfigError(UnlearnkitError):
    """Invalid benchmark configuration (CLI exit code 2)."""


class CapacityExhausted(UnlearnkitError):
    """Deletion count reached the capacity lower bound (hard-error mode)."""


class CapacityWarning(UserWarning):
    """Deletion count reached the capacity lower bound (default warning mode)."""
