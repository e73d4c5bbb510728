import numpy as np
import pytest

from kovtop.errors import CoincidentPoints, DegenerateQuintic
from kovtop.euler_poisson import (
    IntegralSet,
    MotionState,
    first_integrals,
    integrate,
    kovalevskaya_parameters,
    state_from_invariants,
)
from kovtop.separation import (
    QuarticData,
    quadrature_residuals,
    quartic_identity_residual,
    quintic_from_constants,
    s_from_x,
    separation_series,
    to_complex_coords,
    w_squared,
)

QD = QuarticData(l1=2.0, l=0.3, c0=0.5, k=1.0)


@pytest.fixture(scope="module")
def flagship():
    st0 = state_from_invariants(
        0.5, IntegralSet(l1=2.0, l=0.3, k_sq=1.0, norm=1.0), seed=7
    )
    traj = integrate(
        kovalevskaya_parameters(0.5), st0, 10.0, 1e-12, sample_step=1e-3,
        method="DOP853",
    )
    return st0, traj


def test_complex_coordinate_values():
    c = to_complex_coords(MotionState(1, 0, 0, 1, 0, 0), 0.7)
    assert c.x1 == c.x2 == 1.0
    assert c.xi1 == c.xi2 == pytest.approx(1.7)
    c = to_complex_coords(MotionState(0, 1, 0, 0, 0, 1), 0.7)
    assert c.x1 == 1j and c.x2 == -1j
    assert c.xi1 == c.xi2 == pytest.approx(-1.0)


def test_xi_product_is_fourth_integral():
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        st = MotionState.from_array(rng.normal(size=6))
        c = to_complex_coords(st, 0.5)
        ksq = first_integrals(0.5, st).k_sq
        scale = max(1.0, abs(ksq))
        assert abs((c.xi1 * c.xi2).real - ksq) < 1e-12 * scale


def test_quartic_identity():
    assert abs(quartic_identity_residual(QD, 0.7 + 0.2j, 0.7 + 0.2j)) < 1e-12
    rng = np.random.default_rng(3)
    for _ in range(2000):
        x1 = complex(*rng.normal(size=2))
        x2 = complex(*rng.normal(size=2))
        res = quartic_identity_residual(QD, x1, x2)
        scale = max(abs(QD.R(x1) * QD.R(x2)), 1.0)
        assert abs(res) < 1e-9 * scale


def test_quartic_identity_x2_zero_form():
    rng = np.random.default_rng(4)
    for _ in range(100):
        x1 = complex(*rng.normal(size=2))
        fa, fb, fc = QD.frak(x1, 0.0)
        manual = QD.R(x1) * QD.R(0.0) - (fb * x1 + fc) ** 2 - x1**2 * QD.R1_pair(x1, 0.0)
        assert abs(manual - quartic_identity_residual(QD, x1, 0.0)) < 1e-12 * max(
            1.0, abs(manual)
        )


def test_w_squared_routes_agree():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        x1 = complex(*rng.normal(size=2))
        x2 = complex(*rng.normal(size=2))
        w = w_squared(QD, x1, x2)
        scale = max(abs(w["7"]), 1.0)
        assert abs(w["7"] - w["7p"]) < 1e-9 * scale
        assert abs(w["7"] - w["10"]) < 1e-9 * scale


def test_w_squared_zero_invariant_case():
    qd0 = QuarticData(l1=1.0, l=0.2, c0=0.5, k=0.0)
    rng = np.random.default_rng(6)
    for _ in range(50):
        x1 = complex(*rng.normal(size=2))
        x2 = complex(*rng.normal(size=2))
        w = w_squared(qd0, x1, x2, routes=("7",))
        ref = qd0.R1_pair(x1, x2) ** 2
        assert abs(w["7"] - ref) < 1e-12 * max(1.0, abs(ref))


def test_w_squared_coincident_raises():
    with pytest.raises(CoincidentPoints):
        w_squared(QD, 0.5 + 0.1j, 0.5 + 0.1j, routes=("10",))
    # route 7 alone works at coincident points
    w_squared(QD, 0.5 + 0.1j, 0.5 + 0.1j, routes=("7",))


def test_w_squared_vanishes_when_s1_hits_k1():
    # scan a conjugate-pair family for s1 = k1 and check route 10 vanishes
    def s1_of(t):
        c = to_complex_coords(MotionState(t, 0.6, 0, 0, 0, 0), QD.c0)
        return s_from_x(QD, c).s1.real - QD.k1

    from scipy.optimize import brentq

    ts = np.linspace(0.05, 2.5, 200)
    vals = [s1_of(t) for t in ts]
    bracket = next(
        (i for i in range(len(ts) - 1) if vals[i] * vals[i + 1] < 0), None
    )
    assert bracket is not None
    t_star = brentq(s1_of, ts[bracket], ts[bracket + 1], xtol=1e-14)
    c = to_complex_coords(MotionState(t_star, 0.6, 0, 0, 0, 0), QD.c0)
    w = w_squared(QD, c.x1, c.x2)
    assert abs(w["10"]) < 1e-8 * max(1.0, abs(w["7"]) + 1.0)


def test_s_from_x_defining_relations(flagship):
    st0, traj = flagship
    prev = None
    for i in range(0, 500, 17):
        c = to_complex_coords(traj.state(i), QD.c0)
        sv = s_from_x(QD, c, prev)
        r_sum, r_dif = sv.residuals(QD, c.x1, c.x2)
        assert r_sum < 1e-10 and r_dif < 1e-10
        prev = sv


def test_xi_from_s_matches_direct(flagship):
    # the branch-resolved xi expressions through (s1, s2)
    st0, traj = flagship
    prev = None
    for i in range(0, 2000, 29):
        st = traj.state(i)
        c = to_complex_coords(st, QD.c0)
        sv = s_from_x(QD, c, prev)
        prev = sv
        d2 = (c.x1 - c.x2) ** 2
        r1 = np.sqrt(complex((sv.s1 - QD.k1) * (sv.s2 - QD.k1)))
        r2 = np.sqrt(complex((sv.s1 - QD.k2) * (sv.s2 - QD.k2)))
        cands1 = [
            d2 / QD.R(c.x2) * ((e1 * r1 + e2 * r2) ** 2 - QD.k**2)
            for e1 in (1, -1)
            for e2 in (1, -1)
        ]
        best = min(abs(v - c.xi1) for v in cands1)
        assert best < 1e-8 * max(1.0, abs(c.xi1))
        # products multiply back to k^2
        for e1 in (1, -1):
            v1 = d2 / QD.R(c.x2) * ((e1 * r1 + r2) ** 2 - QD.k**2)
            v2 = d2 / QD.R(c.x1) * ((e1 * r1 - r2) ** 2 - QD.k**2)
            assert abs(v1 * v2 - QD.k**2) < 1e-9 * max(1.0, QD.k**2)


def test_s_windows_along_trajectory(flagship):
    st0, traj = flagship
    quintic = quintic_from_constants(2.0, 0.3, 0.5, 1.0)
    series = separation_series(QD, traj)
    s1 = series.s1.real[series.valid]
    s2 = series.s2.real[series.valid]
    assert np.all(s1 > quintic.e1.real - 1e-9)
    assert np.all(s1 < quintic.k1 + 1e-9)
    assert np.all(s2 < quintic.k2)
    assert np.max(np.abs(series.s1.imag[series.valid])) < 1e-10
    assert np.max(np.abs(series.s2.imag[series.valid])) < 1e-10


def test_quintic_degenerate_case():
    with pytest.raises(DegenerateQuintic):
        quintic_from_constants(1.0, 0.0, 0.7, 0.7)


def test_quintic_flagship_ordering():
    q = quintic_from_constants(2.0, 0.3, 0.5, 1.0)
    assert q.g2 == pytest.approx(12.75)
    assert q.g3 == pytest.approx(-6.4775)
    assert q.k1 - q.k2 == pytest.approx(1.0)
    assert q.k1 > q.e1.real > q.e2.real > q.k2 > q.e3.real
    for e in (q.e1, q.e2, q.e3):
        assert abs(q.S(e)) < 1e-10
    coeffs = q.R1_coeffs()
    s = 0.37
    assert np.polyval(coeffs, s) == pytest.approx(q.R1(s), rel=1e-12)


def test_quadrature_residuals_flagship(flagship):
    st0, traj = flagship
    rep = quadrature_residuals(QD, traj)
    ok = rep.valid
    r0 = np.abs(rep.residual_zero[ok])
    rt = np.abs(rep.residual_time[ok])
    assert np.percentile(r0, 99) < 1e-6
    assert np.percentile(rt, 99) < 1e-6
    assert np.mean((r0 < 1e-6) & (rt < 1e-6)) >= 0.99


def test_quadrature_residuals_equilibrium_not_silent():
    # at the vertical rest state the constants are doubly degenerate: the
    # quintic develops a repeated branch point and q = 0 throughout; either
    # failure is reported loudly rather than producing silent zeros
    from kovtop.errors import KovtopError

    st0 = MotionState(0, 0, 0, 1, 0, 0)
    traj = integrate(kovalevskaya_parameters(1.0), st0, 0.2, 1e-10, sample_step=1e-2)
    ints = first_integrals(1.0, st0)
    qd = QuarticData(l1=ints.l1, l=ints.l, c0=1.0, k=1.0)
    try:
        rep = quadrature_residuals(qd, traj)
    except KovtopError:
        return
    assert rep.valid.sum() == 0
    assert rep.n_excluded == len(traj)


def test_x_velocity_identity(flagship):
    # -4 (dx1/dt)^2 = R(x1) + (x1 - x2)^2 xi1 along the trajectory
    st0, traj = flagship
    h = traj.t[1] - traj.t[0]
    coords = [to_complex_coords(traj.state(i), QD.c0) for i in range(0, 4000)]
    x1 = np.array([c.x1 for c in coords])
    x2 = np.array([c.x2 for c in coords])
    xi1 = np.array([c.xi1 for c in coords])
    dx1 = (x1[:-4] - 8 * x1[1:-3] + 8 * x1[3:-1] - x1[4:]) / (12 * h)
    lhs = -4.0 * dx1**2
    rhs = (QD.R(x1) + (x1 - x2) ** 2 * xi1)[2:-2]
    scale = np.maximum(np.abs(rhs), 1.0)
    assert np.max(np.abs(lhs - rhs) / scale) < 1e-8


def test_branch_decisions_stable_under_refinement():
    st0 = state_from_invariants(
        0.5, IntegralSet(l1=2.0, l=0.3, k_sq=1.0, norm=1.0), seed=7
    )
    params = kovalevskaya_parameters(0.5)
    t_a = integrate(params, st0, 2.0, 1e-12, sample_step=2e-3, method="DOP853")
    t_b = integrate(params, st0, 2.0, 1e-12, sample_step=1e-3, method="DOP853")
    s_a = separation_series(QD, t_a)
    s_b = separation_series(QD, t_b)
    # common samples: every sample of the coarse grid
    assert np.max(np.abs(s_a.s1 - s_b.s1[::2])) < 1e-8
    assert np.max(np.abs(s_a.sqrt_r_x1 - s_b.sqrt_r_x1[::2])) < 1e-6


def test_branch_jump_detection():
    from kovtop.errors import BranchJump
    from kovtop.separation import SeparationVariables

    c = to_complex_coords(MotionState(0.9, 0.6, -3.0, -0.7, -0.2, -0.7), QD.c0)
    good = s_from_x(QD, c)
    fake_prev = SeparationVariables(
        s1=good.s1, s2=good.s2,
        sqrt_r_x1=10.0 + 10.0j, sqrt_r_x2=good.sqrt_r_x2,
        k1=good.k1, k2=good.k2,
    )
    with pytest.raises(BranchJump):
        s_from_x(QD, c, fake_prev)
