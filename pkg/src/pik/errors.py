"""Exception types shared across the package."""


class NonFiniteError(ValueError):
    """NaN or Inf reached a numerical entry point."""


class ShapeError(ValueError):
    """Dimension mismatch between operands."""


class DefinitenessError(ValueError):
    """Matrix expected to be symmetric positive definite is not."""


class ZMatrixViolation(ValueError):
    """M-matrix test called on a matrix with a positive off-diagonal entry."""


class RankError(ValueError):
    """Operation requires full rank at the query point."""


class SingularityInRegion(RuntimeError):
    """A sampled configuration in the certified region is singular."""


class DivergenceError(RuntimeError):
    """Integration produced non-finite or unbounded state.

    Carries the truncated trajectory and the last valid sample index.
    """

    def __init__(self, message, trajectory=None, last_valid=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.last_valid = last_valid


class ConfigError(ValueError):
    """Scenario configuration is malformed or inconsistent."""
