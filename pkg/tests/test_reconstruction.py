import numpy as np
import pytest

from kovtop.errors import NotFourRealRegime, OutsideWindow, RealityWindowViolated
from kovtop.euler_poisson import (
    IntegralSet,
    first_integrals,
    integrate,
    kovalevskaya_parameters,
    state_from_invariants,
)
from kovtop.reconstruction import (
    context,
    fit_signs,
    identity_suite,
    p_values,
    reconstruct,
    reconstruct_trajectory,
    reconstruct_with_closed_gamma,
)
from kovtop.separation import QuarticData, separation_series


@pytest.fixture(scope="module")
def ctx():
    return context(2.0, 0.3, 0.5, 1.0)


@pytest.fixture(scope="module")
def flagship_traj():
    st0 = state_from_invariants(
        0.5, IntegralSet(l1=2.0, l=0.3, k_sq=1.0, norm=1.0), seed=7
    )
    return integrate(
        kovalevskaya_parameters(0.5), st0, 10.0, 1e-12, sample_step=1e-3,
        method="DOP853",
    )


def _window_samples(ctx, n, seed=0):
    rng = np.random.default_rng(seed)
    s1 = rng.uniform(ctx.e[0] + 1e-3, ctx.k1 - 1e-3, size=n)
    s2 = ctx.s2_upper - 10 ** rng.uniform(-2, 1.5, size=n)
    return s1, s2


def test_context_flagship(ctx):
    assert ctx.k1 > ctx.e[0] > ctx.e[1] > ctx.k2 > ctx.e[2]
    assert ctx.e[2] > -ctx.l1
    assert ctx.h_sum_residual() < 1e-12


def test_context_rejects_wrong_regime():
    with pytest.raises(NotFourRealRegime):
        context(-1.0, 0.0, 1.0, np.sqrt(2.0))  # k0 = c0^2 - k^2 = -1, l1 < 0
    # push c0 up until the ordering k1 > e1 breaks
    raised = False
    for c0 in np.linspace(0.5, 3.0, 60):
        try:
            context(2.0, 0.3, float(c0), 1.0)
        except RealityWindowViolated:
            raised = True
            break
        except NotFourRealRegime:
            raised = True
            break
    assert raised


def test_p_values_reality_pattern(ctx):
    pv = p_values(ctx, 1.47, -3.0)
    for a in (0, 1, 2, 4):  # P1, P2, P3, P5 imaginary
        assert abs(pv.P[a].real) < 1e-12
    assert abs(pv.P[3].imag) < 1e-12  # P4 real
    for i, j in ((0, 1), (0, 2), (1, 2), (0, 4), (1, 4), (2, 4)):
        assert abs(pv.Pab[i, j].imag) < 1e-12 * max(1.0, abs(pv.Pab[i, j]))
    for i, j in ((0, 3), (1, 3), (2, 3), (3, 4)):
        assert abs(pv.Pab[i, j].real) < 1e-12 * max(1.0, abs(pv.Pab[i, j]))
    # symmetry of the pair quantities
    assert np.max(np.abs(pv.Pab - pv.Pab.T)) == 0.0


def test_p_vanishes_at_window_edge(ctx):
    pv = p_values(ctx, ctx.e[0] + 1e-12, -3.0)
    assert abs(pv.P[0]) < 1e-5


def test_p_values_outside_window(ctx):
    with pytest.raises(OutsideWindow):
        p_values(ctx, ctx.k1 + 0.01, -3.0)
    with pytest.raises(OutsideWindow):
        p_values(ctx, 1.47, ctx.e[2] + 0.01)


def test_identity_suite_random_samples(ctx):
    s1, s2 = _window_samples(ctx, 1000, seed=1)
    rep = identity_suite(ctx, s1, s2)
    assert rep.max_relative < 1e-9
    assert rep.n_checked == 120 * 1000


def test_identity_delta_epsilon_symmetry(ctx):
    # the product P_ad P_ae is invariant under swapping the last two indices
    pv = p_values(ctx, 1.46, -4.0)
    a, d, e = 0, 3, 4
    assert pv.Pab[a, d] * pv.Pab[a, e] == pv.Pab[a, e] * pv.Pab[a, d]


def test_reconstruct_energy_closure(ctx):
    s1, s2 = _window_samples(ctx, 50, seed=2)
    for a, b in zip(s1, s2):
        st = reconstruct(ctx, float(a), float(b))
        res = (
            2.0 * (st.p**2 + st.q**2) + st.r**2 - 2.0 * ctx.c0 * st.gamma - 6.0 * ctx.l1
        )
        assert abs(res) < 1e-8


def test_reconstruct_continuity_near_edge(ctx):
    s1 = ctx.e[0] + 1e-6
    a = reconstruct(ctx, s1, -3.0).as_array()
    b = reconstruct(ctx, s1 + 1e-8, -3.0).as_array()
    assert np.max(np.abs(a - b)) < 1e-4


def test_fit_signs_then_invariants_on_output(ctx, flagship_traj):
    qd = QuarticData(l1=2.0, l=0.3, c0=0.5, k=1.0)
    series = separation_series(qd, flagship_traj)
    i = 81
    st = flagship_traj.state(i)
    signs = fit_signs(ctx, float(series.s1[i].real), float(series.s2[i].real), st)
    assert signs is not None
    rec = reconstruct(ctx, float(series.s1[i].real), float(series.s2[i].real), signs)
    assert np.max(np.abs(rec.as_array() - st.as_array())) < 1e-8
    ints = first_integrals(ctx.c0, rec)
    assert abs(ints.l1 - ctx.l1) < 1e-8
    assert abs(ints.l - ctx.l) < 1e-8
    assert abs(ints.k_sq - ctx.k**2) < 1e-8


def test_closed_gamma_matches_energy_route(ctx, flagship_traj):
    qd = QuarticData(l1=2.0, l=0.3, c0=0.5, k=1.0)
    series = separation_series(qd, flagship_traj)
    i = 81
    st = flagship_traj.state(i)
    signs = fit_signs(ctx, float(series.s1[i].real), float(series.s2[i].real), st)
    rec, g_closed = reconstruct_with_closed_gamma(
        ctx, float(series.s1[i].real), float(series.s2[i].real), signs
    )
    assert abs(g_closed.real - rec.gamma) < 1e-9
    assert abs(g_closed.imag) < 1e-9


def test_round_trip_flagship(ctx, flagship_traj):
    res = reconstruct_trajectory(ctx, flagship_traj)
    assert res.valid.sum() > 0.98 * len(flagship_traj)
    assert res.fraction_within(1e-6) >= 0.99
    ok = res.valid
    assert np.nanpercentile(res.max_abs_error[ok], 50) < 1e-9
    assert np.nanpercentile(res.imag_residue[ok], 99) < 1e-9


def test_round_trip_away_from_branch_points(ctx, flagship_traj):
    qd = QuarticData(l1=2.0, l=0.3, c0=0.5, k=1.0)
    series = separation_series(qd, flagship_traj)
    res = reconstruct_trajectory(ctx, flagship_traj, series)
    x_gap = np.abs(series.x1 - series.x2)
    safe = res.valid & (x_gap > 1e-3)
    # margin in |x1 - x2| keeps the pole of s2 far away
    assert np.nanmax(res.max_abs_error[safe & (np.abs(series.s2) < 1e3)]) < 1e-6
