import numpy as np
import pytest

from kovtop.errors import NotFound
from kovtop.euler_poisson import (
    BodyParameters,
    IntegralSet,
    MotionState,
    OrientationState,
    cosine_rhs,
    first_integrals,
    integral_drift,
    integrate,
    kovalevskaya_parameters,
    rhs_general,
    rhs_kovalevskaya,
    state_from_invariants,
)

EULER = BodyParameters(3.0, 2.0, 1.0)
KOV = kovalevskaya_parameters(1.0)


def test_euler_permanent_rotation_is_equilibrium():
    state = MotionState(0.0, 0.0, 2.0, 0.0, 0.0, 1.0)
    d = rhs_general(EULER, state)
    assert np.all(d.as_array() == 0.0)


def test_kovalevskaya_vertical_rest_state():
    state = MotionState(0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    d = rhs_general(KOV, state)
    assert d.q == pytest.approx(-0.5, abs=1e-15)
    arr = d.as_array()
    arr[1] = 0.0
    assert np.all(arr == 0.0)


def test_kovalevskaya_rhs_rest_states():
    d = rhs_kovalevskaya(1.0, MotionState(0, 0, 0, 1, 0, 0))
    assert np.all(d.as_array() == 0.0)
    d = rhs_kovalevskaya(1.0, MotionState(0, 0, 0, 0, 1, 0))
    assert d.r == pytest.approx(1.0)
    arr = d.as_array()
    arr[2] = 0.0
    assert np.all(arr == 0.0)


def test_general_matches_kovalevskaya_form():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10_000):
        st = MotionState.from_array(rng.normal(size=6))
        d1 = rhs_general(KOV, st).as_array()
        d2 = rhs_kovalevskaya(1.0, st).as_array()
        worst = max(worst, np.max(np.abs(d1 - d2)))
    assert worst <= 1e-14


def test_gamma_norm_derivative_vanishes():
    rng = np.random.default_rng(1)
    for _ in range(200):
        st = MotionState.from_array(rng.normal(size=6))
        d = rhs_kovalevskaya(0.7, st)
        ddt = 2 * (st.gamma * d.gamma + st.gamma1 * d.gamma1 + st.gamma2 * d.gamma2)
        assert abs(ddt) < 1e-13 * max(1.0, st.gamma_norm)


def test_finite_difference_consistency_along_trajectory():
    st0 = MotionState(0.3, -0.2, 0.9, 0.5, 0.1, np.sqrt(1 - 0.26))
    h = 1e-4
    traj = integrate(KOV, st0, 1.0, 1e-12, sample_step=h)
    worst = 0.0
    for i in range(1, len(traj) - 1, 57):
        fd = (traj.states[i + 1] - traj.states[i - 1]) / (2 * h)
        d = rhs_kovalevskaya(1.0, traj.state(i)).as_array()
        worst = max(worst, np.max(np.abs(fd - d)))
    assert worst < 5e-6  # O(h^2)


def test_first_integral_values():
    ints = first_integrals(1.0, MotionState(0, 0, 0, 1, 0, 0))
    assert ints.l1 == pytest.approx(-1.0 / 3.0)
    assert ints.l == 0.0
    assert ints.k_sq == pytest.approx(1.0)
    assert ints.norm == pytest.approx(1.0)
    assert ints.k_sq_imag == 0.0
    ints = first_integrals(1.0, MotionState(0, 0, 0, 0, 0, 1))
    assert ints.l1 == 0.0 and ints.l == 0.0 and ints.k_sq == 0.0
    assert ints.norm == 1.0


def test_integrate_permanent_rotation_returns_home():
    st0 = MotionState(0.0, 0.0, 2.0, 0.0, 0.0, 1.0)
    traj = integrate(EULER, st0, 10.0, 1e-12)
    assert np.max(np.abs(traj.states[-1] - st0.as_array())) < 1e-10


def test_integrate_reversibility():
    st0 = MotionState(0.2, 0.1, 1.2, 0.3, -0.4, np.sqrt(1 - 0.25))
    tol = 1e-10
    fwd = integrate(KOV, st0, 5.0, tol)
    back = integrate(KOV, fwd.state(len(fwd) - 1), 0.0, tol, t0=5.0)
    final = back.states[0]  # samples stored with increasing t
    assert np.max(np.abs(final - st0.as_array())) < 10 * tol


def test_integral_drift_long_run():
    rng = np.random.default_rng(3)
    st0 = MotionState.from_array(
        np.concatenate([rng.normal(size=3), _unit(rng.normal(size=3))])
    )
    traj = integrate(KOV, st0, 100.0, 1e-12, method="DOP853")
    drift = integral_drift(1.0, traj)
    assert max(drift.values()) < 1e-8


def test_per_step_drift_bound():
    st0 = MotionState(0.3, 0.2, 1.0, 0.4, 0.2, np.sqrt(1 - 0.2))
    tol = 1e-10
    traj = integrate(KOV, st0, 10.0, tol)
    base = first_integrals(1.0, traj.state(0)).as_array()
    scale = np.maximum(np.abs(base), 1.0)
    prev = base
    for i in range(1, len(traj)):
        cur = first_integrals(1.0, traj.state(i)).as_array()
        dt = traj.t[i] - traj.t[i - 1]
        assert np.max(np.abs(cur - prev) / scale) < 100 * tol * max(dt, 1e-3)
        prev = cur


def _unit(v):
    return v / np.linalg.norm(v)


def test_cosine_rhs_skew_structure():
    orient = OrientationState.identity()
    state = MotionState(0.0, 0.0, 2.0, 0.0, 0.0, 1.0)
    d = cosine_rhs(state, orient)
    m = orient.matrix
    defect = d @ m.T + m @ d.T
    assert np.max(np.abs(defect)) == 0.0


def test_cosine_rhs_gamma_row_matches_state_rhs():
    rng = np.random.default_rng(5)
    st = MotionState.from_array(rng.normal(size=6))
    orient = OrientationState.from_gamma_row(st)
    g = np.array([st.gamma, st.gamma1, st.gamma2])
    orient_g = OrientationState(np.vstack([orient.matrix[:2], g / np.linalg.norm(g)]))
    d = cosine_rhs(st, orient_g)
    dk = rhs_kovalevskaya(1.0, st).as_array()[3:]
    assert np.max(np.abs(d[2] * np.linalg.norm(g) - dk)) < 1e-12


def test_orientation_stays_orthogonal():
    rng = np.random.default_rng(6)
    st0 = MotionState.from_array(
        np.concatenate([rng.normal(size=3), _unit(rng.normal(size=3))])
    )
    traj = integrate(
        KOV, st0, 100.0, 1e-12,
        orientation0=OrientationState.from_gamma_row(st0), method="DOP853",
    )
    worst_orth = 0.0
    worst_det = 0.0
    for i in range(0, len(traj), 7):
        o = traj.orientation(i)
        worst_orth = max(worst_orth, o.orthogonality_defect())
        worst_det = max(worst_det, o.det_defect())
    assert worst_orth < 1e-8
    assert worst_det < 1e-8


def test_state_from_invariants_round_trip():
    rng = np.random.default_rng(7)
    st = MotionState.from_array(
        np.concatenate([rng.normal(size=3), _unit(rng.normal(size=3))])
    )
    target = first_integrals(1.0, st)
    found = state_from_invariants(1.0, target, seed=2)
    got = first_integrals(1.0, found)
    assert np.max(np.abs(got.as_array() - target.as_array())) < 1e-10


def test_state_from_invariants_rest_target():
    target = IntegralSet(l1=-1.0 / 3.0, l=0.0, k_sq=1.0, norm=1.0)
    found = state_from_invariants(1.0, target, seed=0)
    got = first_integrals(1.0, found)
    assert np.max(np.abs(got.as_array() - target.as_array())) < 1e-10


def test_state_from_invariants_infeasible():
    with pytest.raises(NotFound):
        state_from_invariants(1.0, IntegralSet(l1=0.0, l=0.0, k_sq=-1.0, norm=1.0), seed=0)


def test_kovalevskaya_predicate_and_triangle_warning():
    assert KOV.is_kovalevskaya
    assert not EULER.is_kovalevskaya
    assert BodyParameters(2.0, 2.0, 1.0, x0=1.0, z0=1e-15).is_kovalevskaya
    with pytest.warns(UserWarning):
        BodyParameters(10.0, 1.0, 1.0)


def test_tolerance_domain():
    st = MotionState(0, 0, 1, 0, 0, 1)
    with pytest.raises(ValueError):
        integrate(KOV, st, 1.0, 1e-2)
    with pytest.raises(ValueError):
        integrate(KOV, st, 1.0, 1e-15)
