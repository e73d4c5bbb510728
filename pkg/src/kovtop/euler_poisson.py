"""Heavy rigid body about a fixed point: state, equations of motion, integrals.

State variables are the body-frame angular velocity (p, q, r) and the
vertical direction cosines (gamma, gamma1, gamma2).  The reduced weight
constant is c0 = Mg*x0 in units where C = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853, RK45

from .errors import NotFound, StepSizeUnderflow

__all__ = [
    "BodyParameters",
    "MotionState",
    "IntegralSet",
    "OrientationState",
    "Trajectory",
    "kovalevskaya_parameters",
    "rhs_general",
    "rhs_kovalevskaya",
    "cosine_rhs",
    "first_integrals",
    "integrate",
    "integral_drift",
    "state_from_invariants",
]

_STEPPERS = {"RK45": RK45, "DOP853": DOP853}


@dataclass(frozen=True)
class BodyParameters:
    """Principal inertia moments, weight intensity and center-of-gravity offsets.

    Moments are taken about the fixed point.  ``eq_rtol`` is the relative
    tolerance used by the parameter-equality predicates.
    """

    A: float
    B: float
    C: float
    mg: float = 1.0
    x0: float = 0.0
    y0: float = 0.0
    z0: float = 0.0
    eq_rtol: float = 1e-12

    def __post_init__(self):
        if min(self.A, self.B, self.C) <= 0.0:
            raise ValueError("inertia moments must be positive")
        if self.mg < 0.0:
            raise ValueError("weight intensity must be nonnegative")
        a, b, c = self.A, self.B, self.C
        if a > b + c + self.eq_rtol or b > c + a + self.eq_rtol or c > a + b + self.eq_rtol:
            warnings.warn(
                "inertia moments violate the triangle inequalities; "
                "not realizable by a mass distribution",
                stacklevel=2,
            )

    @property
    def c0(self) -> float:
        """Reduced weight constant Mg*x0."""
        return self.mg * self.x0

    def _close(self, u: float, v: float) -> bool:
        return abs(u - v) <= self.eq_rtol * max(abs(u), abs(v), 1.0)

    @property
    def is_euler(self) -> bool:
        return self.x0 == 0.0 and self.y0 == 0.0 and self.z0 == 0.0

    @property
    def is_lagrange(self) -> bool:
        return self._close(self.A, self.B) and self.x0 == 0.0 and self.y0 == 0.0

    @property
    def is_kovalevskaya(self) -> bool:
        return (
            self._close(self.A, self.B)
            and self._close(self.A, 2.0 * self.C)
            and abs(self.z0) <= self.eq_rtol * max(1.0, abs(self.x0), abs(self.y0))
        )


def kovalevskaya_parameters(c0: float) -> BodyParameters:
    """Body in the normalized Kovalevskaya form A = B = 2, C = 1, weight c0."""
    if c0 <= 0.0:
        raise ValueError("c0 must be positive")
    return BodyParameters(A=2.0, B=2.0, C=1.0, mg=1.0, x0=c0, y0=0.0, z0=0.0)


@dataclass(frozen=True)
class MotionState:
    """Instantaneous (p, q, r, gamma, gamma1, gamma2)."""

    p: float
    q: float
    r: float
    gamma: float
    gamma1: float
    gamma2: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.p, self.q, self.r, self.gamma, self.gamma1, self.gamma2], dtype=float
        )

    @staticmethod
    def from_array(y) -> "MotionState":
        p, q, r, g, g1, g2 = (float(v) for v in y)
        return MotionState(p, q, r, g, g1, g2)

    @property
    def gamma_norm(self) -> float:
        return self.gamma**2 + self.gamma1**2 + self.gamma2**2


@dataclass(frozen=True)
class IntegralSet:
    """The four conserved quantities (l1, l, k^2, |gamma|^2).

    ``k_sq_imag`` is the imaginary residue of xi1*xi2; it vanishes for real
    states and is reported as a numerical health metric.
    """

    l1: float
    l: float
    k_sq: float
    norm: float
    k_sq_imag: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l, self.k_sq, self.norm], dtype=float)


@dataclass(frozen=True)
class OrientationState:
    """Full 3x3 direction-cosine matrix with rows (alpha, beta, gamma)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("orientation matrix must be 3x3")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @staticmethod
    def identity() -> "OrientationState":
        return OrientationState(np.eye(3))

    @staticmethod
    def from_gamma_row(state: MotionState) -> "OrientationState":
        """Orthonormal matrix whose third row is the state's gamma row."""
        g = np.array([state.gamma, state.gamma1, state.gamma2], dtype=float)
        g = g / np.linalg.norm(g)
        probe = np.array([1.0, 0.0, 0.0]) if abs(g[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        a = probe - g * (probe @ g)
        a /= np.linalg.norm(a)
        b = np.cross(g, a)
        return OrientationState(np.vstack([a, b, g]))

    def orthogonality_defect(self) -> float:
        return float(np.max(np.abs(self.matrix @ self.matrix.T - np.eye(3))))

    def det_defect(self) -> float:
        return float(abs(np.linalg.det(self.matrix) - 1.0))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with solver metadata.  Immutable once built."""

    t: np.ndarray
    states: np.ndarray
    orientations: np.ndarray | None = None
    n_steps: int = 0
    nfev: int = 0
    tol: float = 0.0
    method: str = "RK45"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        if s.shape != (t.size, 6):
            raise ValueError("states must have shape (len(t), 6)")
        t.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "states", s)
        if self.orientations is not None:
            o = np.asarray(self.orientations, dtype=float)
            o.flags.writeable = False
            object.__setattr__(self, "orientations", o)

    def __len__(self) -> int:
        return self.t.size

    def state(self, i: int) -> MotionState:
        return MotionState.from_array(self.states[i])

    def orientation(self, i: int) -> OrientationState:
        if self.orientations is None:
            raise ValueError("trajectory carries no orientation samples")
        return OrientationState(self.orientations[i].copy())


def _rhs_general(params: BodyParameters, y: np.ndarray) -> np.ndarray:
    p, q, r, g, g1, g2 = y
    A, B, C = params.A, params.B, params.C
    mg = params.mg
    x0, y0, z0 = params.x0, params.y0, params.z0
    return np.array(
        [
            ((B - C) * q * r + mg * (y0 * g2 - z0 * g1)) / A,
            ((C - A) * r * p + mg * (z0 * g - x0 * g2)) / B,
            ((A - B) * p * q + mg * (x0 * g1 - y0 * g)) / C,
            r * g1 - q * g2,
            p * g2 - r * g,
            q * g - p * g1,
        ]
    )


def rhs_general(params: BodyParameters, state: MotionState) -> MotionState:
    """Time derivative of the full Euler-Poisson system."""
    return MotionState.from_array(_rhs_general(params, state.as_array()))


def _rhs_kovalevskaya(c0: float, y: np.ndarray) -> np.ndarray:
    p, q, r, g, g1, g2 = y
    return np.array(
        [
            0.5 * q * r,
            -0.5 * (p * r + c0 * g2),
            c0 * g1,
            r * g1 - q * g2,
            p * g2 - r * g,
            q * g - p * g1,
        ]
    )


def rhs_kovalevskaya(c0: float, state: MotionState) -> MotionState:
    """Time derivative in the reduced Kovalevskaya form (A = B = 2, C = 1)."""
    if c0 <= 0.0:
        raise ValueError("c0 must be positive")
    return MotionState.from_array(_rhs_kovalevskaya(c0, state.as_array()))


def cosine_rhs(state: MotionState, orient: OrientationState) -> np.ndarray:
    """Row-wise derivative of the direction-cosine matrix: dm/dt = m x omega."""
    omega = np.array([state.p, state.q, state.r])
    return np.cross(orient.matrix, omega)


def first_integrals(c0: float, state: MotionState) -> IntegralSet:
    """Evaluate the four first integrals at a state."""
    p, q, r = state.p, state.q, state.r
    g, g1, g2 = state.gamma, state.gamma1, state.gamma2
    l1 = (2.0 * (p * p + q * q) + r * r - 2.0 * c0 * g) / 6.0
    l = (2.0 * (p * g + q * g1) + r * g2) / 2.0
    xi1 = (p + 1j * q) ** 2 + c0 * (g + 1j * g1)
    xi2 = (p - 1j * q) ** 2 + c0 * (g - 1j * g1)
    k_sq = xi1 * xi2
    norm = g * g + g1 * g1 + g2 * g2
    return IntegralSet(
        l1=l1, l=l, k_sq=float(k_sq.real), norm=norm, k_sq_imag=float(k_sq.imag)
    )


def _project_gamma(y: np.ndarray) -> np.ndarray:
    n = np.sqrt(y[3] ** 2 + y[4] ** 2 + y[5] ** 2)
    if n > 0.0:
        y = y.copy()
        y[3:6] /= n
    return y


def integrate(
    params: BodyParameters,
    state0: MotionState,
    t_end: float,
    tol: float,
    *,
    t0: float = 0.0,
    sample_step: float | None = None,
    t_eval: np.ndarray | None = None,
    renormalize: bool = False,
    orientation0: OrientationState | None = None,
    method: str = "RK45",
) -> Trajectory:
    """Integrate the equations of motion with an embedded Runge-Kutta pair.

    Local error is controlled at relative tolerance ``tol`` (absolute floor
    1e-2*tol).  Dense output is evaluated at the requested sample times; by
    default the accepted step points are returned.  Gamma renormalization is
    off by default so that norm drift stays observable.
    """
    if not 1e-14 <= tol <= 1e-3:
        raise ValueError("tol must lie in [1e-14, 1e-3]")
    if t_end == t0:
        raise ValueError("t_end must differ from t0")
    if sample_step is not None and t_eval is not None:
        raise ValueError("give either sample_step or t_eval, not both")

    with_orient = orientation0 is not None
    if with_orient:
        y0 = np.concatenate([state0.as_array(), orientation0.matrix[0], orientation0.matrix[1]])

        def fun(t, y):
            dy = np.empty(12)
            dy[:6] = _rhs_general(params, y[:6])
            p, q, r = y[0], y[1], y[2]
            omega = np.array([p, q, r])
            dy[6:9] = np.cross(y[6:9], omega)
            dy[9:12] = np.cross(y[9:12], omega)
            return dy

    else:
        y0 = state0.as_array()

        def fun(t, y):
            return _rhs_general(params, y)

    if t_eval is None:
        if sample_step is not None:
            n = int(np.floor(abs(t_end - t0) / sample_step + 1e-9)) + 1
            t_eval = t0 + np.sign(t_end - t0) * sample_step * np.arange(n)
        # else: sample at the accepted step points
    else:
        t_eval = np.asarray(t_eval, dtype=float)

    stepper_cls = _STEPPERS[method]
    stepper = stepper_cls(
        fun, t0, y0, t_end, rtol=tol, atol=1e-2 * tol, first_step=None
    )
    min_step = 1e-14 * max(abs(t_end - t0), abs(t_end), 1.0)

    ts = [t0]
    ys = [y0]
    n_steps = 0
    eval_idx = 0
    eval_ts: list[float] = []
    eval_ys: list[np.ndarray] = []
    if t_eval is not None and t_eval.size and np.isclose(t_eval[0], t0):
        eval_ts.append(t0)
        eval_ys.append(y0)
        eval_idx = 1

    while stepper.status == "running":
        msg = stepper.step()
        if stepper.status == "failed":
            raise StepSizeUnderflow(msg or "integrator failed")
        if abs(stepper.t - stepper.t_old) < min_step:
            raise StepSizeUnderflow(f"step below {min_step:g} at t={stepper.t:g}")
        n_steps += 1
        if renormalize:
            stepper.y = _project_gamma(stepper.y)
        if t_eval is None:
            ts.append(stepper.t)
            ys.append(stepper.y.copy())
        else:
            dense = stepper.dense_output()
            direction = np.sign(t_end - t0)
            while eval_idx < t_eval.size and direction * (t_eval[eval_idx] - stepper.t) <= 1e-12:
                eval_ts.append(float(t_eval[eval_idx]))
                eval_ys.append(dense(t_eval[eval_idx]))
                eval_idx += 1

    if t_eval is None:
        t_arr = np.array(ts)
        y_arr = np.vstack(ys)
    else:
        t_arr = np.array(eval_ts)
        y_arr = np.vstack(eval_ys)

    if t_end < t0:
        t_arr = t_arr[::-1]
        y_arr = y_arr[::-1]

    orients = None
    if with_orient:
        n = t_arr.shape[0]
        orients = np.empty((n, 3, 3))
        orients[:, 0, :] = y_arr[:, 6:9]
        orients[:, 1, :] = y_arr[:, 9:12]
        orients[:, 2, :] = y_arr[:, 3:6]

    return Trajectory(
        t=t_arr,
        states=y_arr[:, :6],
        orientations=orients,
        n_steps=n_steps,
        nfev=stepper.nfev,
        tol=tol,
        method=method,
    )


def integral_drift(c0: float, traj: Trajectory) -> dict[str, float]:
    """Max relative drift of each first integral along a trajectory."""
    base = first_integrals(c0, traj.state(0)).as_array()
    scale = np.maximum(np.abs(base), 1.0)
    worst = np.zeros(4)
    for i in range(len(traj)):
        cur = first_integrals(c0, traj.state(i)).as_array()
        worst = np.maximum(worst, np.abs(cur - base) / scale)
    return {"l1": worst[0], "l": worst[1], "k_sq": worst[2], "norm": worst[3]}


def _invariant_residual(c0: float, y: np.ndarray, target: IntegralSet):
    p, q, r, g, g1, g2 = y
    a = p * p - q * q + c0 * g
    b = 2.0 * p * q + c0 * g1
    f = np.array(
        [
            (2.0 * (p * p + q * q) + r * r - 2.0 * c0 * g) / 6.0 - target.l1,
            p * g + q * g1 + 0.5 * r * g2 - target.l,
            a * a + b * b - target.k_sq,
            g * g + g1 * g1 + g2 * g2 - target.norm,
        ]
    )
    jac = np.array(
        [
            [4 * p / 6, 4 * q / 6, 2 * r / 6, -2 * c0 / 6, 0.0, 0.0],
            [g, g1, 0.5 * g2, p, q, 0.5 * r],
            [
                4 * p * a + 4 * q * b,
                -4 * q * a + 4 * p * b,
                0.0,
                2 * c0 * a,
                2 * c0 * b,
                0.0,
            ],
            [0.0, 0.0, 0.0, 2 * g, 2 * g1, 2 * g2],
        ]
    )
    return f, jac


def state_from_invariants(
    c0: float,
    target: IntegralSet,
    seed: int,
    *,
    max_restarts: int = 60,
    tol: float = 1e-11,
) -> MotionState:
    """Find a state realizing (l1, l, k^2) on the unit gamma sphere.

    Damped Gauss-Newton with minimum-norm steps, restarted from seeded random
    points.  Deterministic for a given seed.  Raises NotFound when the budget
    is exhausted (the invariant set may be empty, e.g. k^2 < 0).
    """
    if abs(target.norm - 1.0) > 1e-9:
        raise ValueError("target.norm must be 1")
    if target.k_sq < 0.0:
        raise NotFound("k^2 is a product of complex conjugates; negative target")
    rng = np.random.default_rng(seed)
    for _ in range(max_restarts):
        y = rng.normal(size=6)
        y = _project_gamma(y)
        for _ in range(200):
            f, jac = _invariant_residual(c0, y, target)
            err = np.max(np.abs(f))
            if err < tol:
                return MotionState.from_array(y)
            step = -np.linalg.pinv(jac) @ f
            lam = 1.0
            for _ in range(30):
                f_new, _ = _invariant_residual(c0, y + lam * step, target)
                if np.max(np.abs(f_new)) < err:
                    break
                lam *= 0.5
            else:
                break
            y = y + lam * step
    raise NotFound("no state found for the requested invariants")
