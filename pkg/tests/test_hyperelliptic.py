import numpy as np
import pytest

from kovtop.errors import RegimeViolated
from kovtop.euler_poisson import (
    IntegralSet,
    integrate,
    kovalevskaya_parameters,
    state_from_invariants,
)
from kovtop.hyperelliptic import (
    abel_map,
    abel_trajectory,
    build_curve,
    build_theta_context,
    characteristics,
    p_via_theta,
    periods,
    theta,
    theta_constants,
)
from kovtop.reconstruction import ReconstructionSigns, context, p_values
from kovtop.separation import QuarticData, separation_series


@pytest.fixture(scope="module")
def ctx():
    return context(2.0, 0.3, 0.5, 1.0)


@pytest.fixture(scope="module")
def tctx(ctx):
    return build_theta_context(ctx)


def test_period_matrix_properties(tctx):
    assert tctx.pd.tau_symmetry_defect < 1e-10
    assert np.all(tctx.pd.im_tau_eigenvalues > 0.0)
    assert np.max(np.abs(tctx.pd.tau.real)) < 1e-12  # all-real branch points


def test_period_refinement_stability(ctx):
    curve = build_curve(ctx)
    loose = periods(curve, tol=1e-10)
    tight = periods(curve, tol=1e-13)
    assert np.max(np.abs(loose.K - tight.K)) < 1e-11


def test_characteristics_integral_and_reduced(tctx, ctx):
    chars = tctx.chars
    assert len(chars) == 16
    for lab, ch in chars.items():
        assert set(ch.m) <= {0, -1}
        assert set(ch.n) <= {0, 1}
    # recomputing at a different quadrature tolerance gives identical integers
    curve = build_curve(ctx)
    pd2 = periods(curve, tol=1e-11)
    chars2 = characteristics(curve, pd2)
    for lab in chars:
        assert chars[lab].m == chars2[lab].m
        assert chars[lab].n == chars2[lab].n


def test_pair_of_equal_labels_is_zero_characteristic(tctx):
    # congruence x + x = 0 (mod 2)
    for lam in range(5):
        ch = tctx.chars[str(lam)]
        m = -((-(np.array(ch.m) + np.array(ch.m))) % 2)
        n = (np.array(ch.n) + np.array(ch.n)) % 2
        assert tuple(m) == (0, 0) and tuple(n) == (0, 0)


def test_theta_quasi_periodicity(tctx):
    rng = np.random.default_rng(0)
    pd = tctx.pd
    for _ in range(20):
        v = rng.uniform(-0.5, 0.5, size=2) + 1j * rng.uniform(-0.2, 0.2, size=2)
        t0 = theta(pd, v)
        assert abs(theta(pd, v + np.array([1.0, 0.0])) - t0) < 1e-12 * max(1.0, abs(t0))
        assert abs(theta(pd, v + np.array([0.0, 1.0])) - t0) < 1e-12 * max(1.0, abs(t0))
        for alpha in (0, 1):
            shift = pd.tau[:, alpha]
            phase = np.exp(-1j * np.pi * (2.0 * v[alpha] + pd.tau[alpha, alpha]))
            lhs = theta(pd, v + shift)
            assert abs(lhs - t0 * phase) < 1e-12 * max(1.0, abs(t0 * phase))


def test_theta_parity(tctx):
    rng = np.random.default_rng(1)
    v = rng.uniform(-0.4, 0.4, size=2) + 1j * rng.uniform(-0.1, 0.1, size=2)
    for lab, ch in tctx.chars.items():
        a = theta(tctx.pd, v, ch)
        b = theta(tctx.pd, -v, ch)
        assert abs(b - ch.parity * a) < 1e-12 * max(1.0, abs(a))


def test_parity_census(tctx):
    assert sorted(tctx.odd_labels) == ["02", "04", "1", "13", "24", "3"]
    for lab in tctx.odd_labels:
        assert abs(tctx.constants[lab]) < 1e-12
    evens = [lab for lab in tctx.chars if lab not in tctx.odd_labels]
    assert len(evens) == 10
    for lab in evens:
        assert abs(tctx.constants[lab]) > 1e-3


def test_constant_identities(tctx):
    rep = theta_constants(tctx)
    assert rep.max_residual < 1e-8
    # quantities recomputed from the curve roots agree with the quintic data
    e1, e2, e3 = tctx.ctx.e
    a = tctx.curve.a
    assert (a[3] - a[2]) / (a[4] - a[1]) == pytest.approx((e1 - e2) / tctx.ctx.k)


def test_regime_gate():
    # four-real quartic but l^2 >= (3 l1 - k)/2 violates the admissibility
    bad = context(2.0, 1.7, 0.5, 1.0)
    with pytest.raises(RegimeViolated):
        build_theta_context(bad)


def test_abel_base_points(tctx):
    v = abel_map(tctx, tctx.curve.a[3], tctx.curve.a[1])
    assert np.max(np.abs(v)) < 1e-10


def test_p_via_theta_matches_direct(tctx, ctx):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(30):
        s1 = rng.uniform(ctx.e[0] + 1e-3, ctx.k1 - 1e-3)
        s2 = ctx.s2_upper - 10 ** rng.uniform(-2, 1.2)
        v = abel_map(tctx, s1, s2)
        P, Pab = p_via_theta(tctx, v)
        ref = p_values(ctx, s1, s2, ReconstructionSigns(w1=1, w2=1))
        scale = max(1.0, float(np.max(np.abs(ref.P))), float(np.max(np.abs(ref.Pab))))
        worst = max(
            worst,
            max(float(np.max(np.abs(P - ref.P))), float(np.max(np.abs(Pab - ref.Pab))))
            / scale,
        )
        # squares are branch-free
        sq = P**2 - (s1 - ctx.roots) * (s2 - ctx.roots)
        assert np.max(np.abs(sq)) < 1e-8 * scale**2
    assert worst < 1e-6


def test_p1_vanishes_at_zero_argument(tctx):
    P, _ = p_via_theta(tctx, np.zeros(2))
    assert abs(P[0]) < 1e-8   # s1 = a3 is the branch point e1
    assert abs(P[4]) < 1e-8   # s2 = a1 is the branch point k2


def test_abel_linearity_along_trajectory(tctx):
    st0 = state_from_invariants(
        0.5, IntegralSet(l1=2.0, l=0.3, k_sq=1.0, norm=1.0), seed=7
    )
    traj = integrate(
        kovalevskaya_parameters(0.5), st0, 6.0, 1e-12, sample_step=1e-3,
        method="DOP853",
    )
    qd = QuarticData(l1=2.0, l=0.3, c0=0.5, k=1.0)
    series = separation_series(qd, traj)
    rep = abel_trajectory(tctx, series)
    assert rep.max_residual < 1e-6
    # the time derivative of v is (2K)^{-1} (1, 0) up to orientation
    assert np.max(np.abs(np.abs(rep.slope) - np.abs(rep.expected_slope))) < 1e-8
    assert np.max(np.abs(rep.slope.imag)) < 1e-8


def test_constant_identity_residuals_scale_with_quadrature(ctx):
    loose = build_theta_context(ctx, calibrate=False, period_tol=1e-4)
    tight = build_theta_context(ctx, calibrate=False, period_tol=1e-8)
    r_loose = theta_constants(loose).max_residual
    r_tight = theta_constants(tight).max_residual
    assert r_tight < r_loose / 10.0 or r_tight < 1e-12
