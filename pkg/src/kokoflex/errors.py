"""Exception hierarchy for the kokoflex package."""


class KokoflexError(Exception):
    """Base class for all package-specific errors."""


class NoRealSolution(KokoflexError):
    """A quadratic or chain step has no real root for the given input."""


class InconsistentInput(KokoflexError):
    """Input values violate a structural precondition (angle ranges, closure)."""


class EvaluationAtPole(KokoflexError):
    """A rational expression was evaluated where its denominator vanishes."""


class DegenerateBranch(KokoflexError):
    """An equation degenerated to 0 = 0 and defines no discrete solution."""


class CellFormulaInconsistency(KokoflexError):
    """Closed-form cell-number candidates fail their own defining equations.

    Carries enough data to inspect the failure: the published candidate
    values, their residuals in the defining equations, and the corrected
    pair obtained by solving those equations directly.
    """

    def __init__(self, message, published, residuals, corrected):
        super().__init__(message)
        self.published = published
        self.residuals = residuals
        self.corrected = corrected


class DegenerateElimination(KokoflexError):
    """Resultant elimination is vacuous: both leading coefficient rows vanish."""


class AssemblyError(KokoflexError):
    """A mesh could not be embedded from the given linkage data."""


class TraceError(KokoflexError):
    """Motion tracing failed to continue a branch within tolerance."""


class ParseError(KokoflexError):
    """A design file is malformed or contains an unsupported expression."""
