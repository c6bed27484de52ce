"""Exception hierarchy for the twcc package."""


class TwccError(Exception):
    """Base class for all twcc-specific errors."""


class ParameterError(TwccError, ValueError):
    """Base class for invalid-parameter errors."""


class ZeroParameterError(ParameterError):
    """A dependence parameter is zero (or not finite)."""


class SignConditionError(ParameterError):
    """The product of the three dependence parameters is not positive."""


class NoValidPermutationError(ParameterError):
    """No index permutation satisfies the strict dominance inequality."""


class DegenerateBoundaryError(ParameterError):
    """Parameters sit on (or within tolerance of) the validity boundary."""


class BranchInfeasibleError(ParameterError):
    """The requested permutation branch is not satisfied by the parameters."""


class UnitConcentrationError(ParameterError):
    """Wrapped Cauchy concentration equal to 1 is degenerate."""


class NegativeRadicandError(TwccError, ArithmeticError):
    """Normalizing-constant radicand came out non-positive (internal guard)."""


class IllegalC1Error(ParameterError):
    """Free denominator offset at or below its legal lower bound."""


class NegativeFactorError(TwccError, ArithmeticError):
    """A bracketed factor of the generalized normalizer is not positive."""


class ModulusOutOfRangeError(ParameterError):
    """Elliptic-integral modulus outside the convergent range."""


class DimensionTooLargeError(ParameterError):
    """Torus dimension beyond the supported numeric-normalization range."""


class DenominatorNonpositiveError(ParameterError):
    """Density denominator is not positive everywhere on the torus."""


class QuadratureNotConvergedError(TwccError, RuntimeError):
    """Adaptive torus quadrature did not reach the requested tolerance."""


class ZeroResultantError(TwccError, ValueError):
    """Circular mean undefined: a column has (near-)zero mean resultant."""


class DegenerateSampleError(TwccError, ValueError):
    """Sample unusable for fitting (too small or all rows identical)."""


class AllStartsFailedError(TwccError, RuntimeError):
    """Every optimizer start failed on every branch."""
