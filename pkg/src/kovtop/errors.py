"""Exception types shared across the package.

Exit-code mapping used by the CLI:
  ConfigError        -> 2
  NumericalError     -> 3
  RegimeError        -> 4
"""


class KovtopError(Exception):
    """Base class for all package errors."""


class ConfigError(KovtopError):
    """Invalid run configuration."""


class SchemaError(ConfigError):
    """Config violates the documented schema (unknown/missing keys)."""


class NumericalError(KovtopError):
    """A numerical procedure failed to meet its tolerance contract."""


class StepSizeUnderflow(NumericalError):
    """Integrator step fell below the resolvable scale."""


class NotFound(NumericalError):
    """Search exhausted its restart budget without a solution."""


class QuadratureNonConvergent(NumericalError):
    """Period/Abel quadrature refinement stalled above tolerance."""


class BranchJump(NumericalError):
    """Branch continuity tracking detected a jump (sampling too coarse)."""


class NonIntegralCharacteristic(NumericalError):
    """Characteristic integrals did not land on lattice integers."""


class RegimeError(KovtopError):
    """Parameters outside the admissible regime of the requested analysis."""


class DegenerateInertia(RegimeError):
    """Some of B-C, C-A, A-B vanish; the generic balance does not apply."""


class AllZeroCenter(RegimeError):
    """Center of gravity at the fixed point (no balance equation)."""


class NotDegenerate(RegimeError):
    """A = B required for the degenerate balance systems."""


class MuZero(RegimeError):
    """Auxiliary constant vanished; leading coefficients undefined."""


class SingularLeading(RegimeError):
    """Resonance polynomial lost its degree-6 leading coefficient."""


class CoincidentPoints(RegimeError):
    """x1 = x2 (a branch point); the requested route is undefined."""


class DegenerateQuintic(RegimeError):
    """Two branch points coincide; theta machinery needs distinct roots."""


class NotFourRealRegime(RegimeError):
    """Quartic does not have four real roots."""


class RealityWindowViolated(RegimeError):
    """Branch-point ordering k1 > e1 > k2 fails."""


class OutsideWindow(RegimeError):
    """(s1, s2) outside the admissible real windows."""


class DegenerateDenominator(RegimeError):
    """A reconstruction denominator vanished."""


class RegimeViolated(RegimeError):
    """Constants violate the admissibility inequalities."""


class NotConvergent(NumericalError):
    """Theta series cannot converge (Im tau not positive definite)."""


class ThetaZeroDenominator(NumericalError):
    """Evaluation point lies on the theta divisor."""


class ConditionViolated(RegimeError):
    """Inertia triple does not satisfy the ratio condition."""


class NotRealizable(RegimeError):
    """Mount offset would be imaginary (B1 <= 2*C1)."""
