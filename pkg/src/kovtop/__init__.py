"""Heavy rigid body about a fixed point: the completely integrable case.

Simulation of the equations of motion, numerical verification of the four
first integrals, the meromorphic-solution (resonance) test, separation
variables on the genus-2 curve, quartic root classification, state
reconstruction from the separation variables, theta-function machinery and
the physical mount construction.
"""

__version__ = "0.1.0"

from .euler_poisson import (
    BodyParameters,
    IntegralSet,
    MotionState,
    OrientationState,
    Trajectory,
    first_integrals,
    integrate,
    kovalevskaya_parameters,
    rhs_general,
    rhs_kovalevskaya,
    state_from_invariants,
)

__all__ = [
    "__version__",
    "BodyParameters",
    "IntegralSet",
    "MotionState",
    "OrientationState",
    "Trajectory",
    "first_integrals",
    "integrate",
    "kovalevskaya_parameters",
    "rhs_general",
    "rhs_kovalevskaya",
    "state_from_invariants",
]
