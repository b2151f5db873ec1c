"""Exception types shared across the package."""


class GapsolError(Exception):
    """Base class for all package-specific errors."""


class FieldError(GapsolError):
    """Invalid field data: non-finite entries, wrong length, or zero field."""


class GridMismatchError(GapsolError):
    """Operation applied to fields living on different grids."""


class DegenerateCentroidError(GapsolError):
    """Circular mean is ill-defined (resultant near zero, e.g. two equal bumps)."""


class FieldFormatError(GapsolError):
    """Malformed binary field file."""


class ModelError(GapsolError):
    """Model construction or sampling violates a declared invariant."""


class HypothesisViolationError(GapsolError):
    """A standing hypothesis failed; solvers refuse to run."""


class ConvergenceError(GapsolError):
    """Iteration exhausted its budget. Carries the best iterate found."""

    def __init__(self, message, best=None, residual=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class LinearSolveError(GapsolError):
    """Inner preconditioned conjugate-gradient solve did not converge."""


class BracketFailureError(GapsolError):
    """Fiber map never turns negative before the bracketing cap.

    Signals an effective superlinearity violation at this resolution, or a
    degenerate input supported where the focusing coefficient vanishes.
    """


class ProjectionError(GapsolError):
    """Projection onto the constraint manifold failed its certificate."""


class ConfigError(GapsolError):
    """Run configuration is syntactically or semantically invalid."""
