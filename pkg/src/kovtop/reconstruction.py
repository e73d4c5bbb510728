"""State reconstruction from the separation variables in the all-real regime.

Everything is built from the fifteen radical quantities P_a and P_ab on the
quintic curve.  In the admissible windows s1 in (e1, k1), s2 < min(e3, k2)
all radicands are real, so the machinery runs in real arithmetic with
explicit imaginary factors; this keeps square-root branches away from the
principal cut.  The discrete branch freedom is a handful of sign bits fixed
once per trajectory and advanced by turning/pole events.

Two quotient expressions are pinned by direct-integration cross-checks
(the tie-breaks are surfaced in reports):
  * the vertical-cosine quotient must carry the P-sum denominator; the
    companion pair-sum denominator is not real-valued in the admissible
    windows;
  * the middle-cosine bracket carries the curve leading coefficient on its
    (e_b - e_c)^2 P_a terms, matching the structure of the product
    identities it derives from.
The gamma component itself is recovered from the energy integral; the
closed quotient form (with its factor 4 on the P-sum term) is kept for
cross-checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDenominator,
    NotFourRealRegime,
    OutsideWindow,
    RealityWindowViolated,
)
from .euler_poisson import MotionState, Trajectory
from .quartic import RootClass, classify
from .separation import (
    QuarticData,
    QuinticData,
    SeparationSeries,
    quintic_from_constants,
    separation_series,
)

__all__ = [
    "RealCaseContext",
    "ReconstructionSigns",
    "PValues",
    "IdentityReport",
    "context",
    "p_values",
    "identity_suite",
    "reconstruct",
    "fit_signs",
    "reconstruct_trajectory",
    "ReconstructionResult",
]

R0 = -4.0  # leading coefficient of the quintic


@dataclass(frozen=True)
class RealCaseContext:
    """Quintic data plus the radical coefficient families of the real case."""

    l1: float
    l: float
    c0: float
    k: float
    quintic: QuinticData
    e: np.ndarray          # (e1, e2, e3), descending
    roots: np.ndarray      # (e1, e2, e3, k1, k2) in P-index order
    rad: np.ndarray        # sqrt(l1 + e_i), positive
    E: float               # (e2-e3)(e3-e1)(e1-e2)

    @property
    def k1(self) -> float:
        return self.quintic.k1

    @property
    def k2(self) -> float:
        return self.quintic.k2

    @property
    def s2_upper(self) -> float:
        return min(float(self.e[2]), self.k2)

    def L_family(self):
        """L, M, N (imaginary), L1, M1, N1 (real), L2, M2, N2 (imaginary)."""
        e1, e2, e3 = self.e
        r1, r2, r3 = self.rad
        L = 1j * (e2 - e3) * r1
        M = 1j * (e3 - e1) * r2
        N = 1j * (e1 - e2) * r3
        L1 = (e2 - e3) * r2 * r3
        M1 = (e3 - e1) * r3 * r1
        N1 = (e1 - e2) * r1 * r2
        L2 = 1j * (e2**2 - e3**2) * r1
        M2 = 1j * (e3**2 - e1**2) * r2
        N2 = 1j * (e1**2 - e2**2) * r3
        return (L, M, N), (L1, M1, N1), (L2, M2, N2)

    def h_sum_residual(self) -> float:
        """(L + M + N)/i against the same sum built from the radicals."""
        (L, M, N), _, _ = self.L_family()
        e1, e2, e3 = self.e
        h1 = (e2 - e3) * self.rad[0] + (e3 - e1) * self.rad[1] + (e1 - e2) * self.rad[2]
        return abs((L + M + N) / 1j - h1)


def context(l1: float, l: float, c0: float, k: float) -> RealCaseContext:
    """Build the real-case context; validates regime and root ordering."""
    k0 = c0 * c0 - k * k
    l0 = c0 * l
    if classify(l1, k0, l0) is not RootClass.FOUR_REAL:
        raise NotFourRealRegime(
            f"quartic is {classify(l1, k0, l0).value} for these constants"
        )
    quintic = quintic_from_constants(l1, l, c0, k)
    if not quintic.all_real:
        raise NotFourRealRegime("cubic roots are not all real")
    e = np.array([quintic.e1.real, quintic.e2.real, quintic.e3.real])
    if not (quintic.k1 > e[0] > quintic.k2):
        raise RealityWindowViolated(
            f"need k1 > e1 > k2, got {quintic.k1:.6g}, {e[0]:.6g}, {quintic.k2:.6g}"
        )
    if e[2] <= -l1:
        raise RealityWindowViolated("need e3 > -l1 for real radicals")
    roots = np.array([e[0], e[1], e[2], quintic.k1, quintic.k2])
    rad = np.sqrt(l1 + e)
    E = float((e[1] - e[2]) * (e[2] - e[0]) * (e[0] - e[1]))
    return RealCaseContext(
        l1=l1, l=l, c0=c0, k=k, quintic=quintic, e=e, roots=roots, rad=rad, E=E
    )


@dataclass(frozen=True)
class ReconstructionSigns:
    """Discrete branch data: P1..P3 signs, the two sheet signs, and the
    time orientation of the curve flow (nu = d/dt vs d/du1).

    P4's sign is the convention +1; P5's follows from the product relation
    P1 P2 P3 P4 P5 = sqrt(R1(s1)) sqrt(R1(s2)) / R0 that underwrites the
    six product identities.
    """

    eta1: int = 1
    eta2: int = 1
    eta3: int = 1
    w1: int = 1
    w2: int = -1
    nu: int = 1

    @property
    def eta(self) -> np.ndarray:
        e5 = -self.w1 * self.w2 * self.eta1 * self.eta2 * self.eta3
        return np.array([self.eta1, self.eta2, self.eta3, 1, e5])

    def flipped(self, *names: str) -> "ReconstructionSigns":
        vals = {
            "eta1": self.eta1, "eta2": self.eta2, "eta3": self.eta3,
            "w1": self.w1, "w2": self.w2, "nu": self.nu,
        }
        for nm in names:
            vals[nm] = -vals[nm]
        return ReconstructionSigns(**vals)


@dataclass(frozen=True)
class PValues:
    """The five P_a and the ten P_ab with their branch bookkeeping."""

    P: np.ndarray     # shape (5,), complex
    Pab: np.ndarray   # shape (5,5), complex, symmetric, zero diagonal
    w1: complex
    w2: complex
    signs: ReconstructionSigns


def _window_check(ctx: RealCaseContext, s1: float, s2: float) -> None:
    if not (ctx.e[0] < s1 < ctx.k1) or not (s2 < ctx.s2_upper):
        raise OutsideWindow(
            f"(s1, s2) = ({s1:.6g}, {s2:.6g}) outside "
            f"({ctx.e[0]:.6g}, {ctx.k1:.6g}) x (-inf, {ctx.s2_upper:.6g})"
        )


def _build(ctx, s1, s2, signs):
    """P_a and P_ab arrays at one in-window point (real arithmetic)."""
    t = s1 - ctx.roots
    u = s2 - ctx.roots
    tu = t * u
    eta = signs.eta
    P = np.where(tu < 0, 1j, 1.0 + 0j) * eta * np.sqrt(np.abs(tu))
    w1 = signs.w1 * np.sqrt(abs(ctx.quintic.R1(s1)))
    w2 = signs.w2 * np.sqrt(abs(ctx.quintic.R1(s2)))
    phi = (w1 / np.multiply.outer(t, t) - w2 / np.multiply.outer(u, u)) / (s1 - s2)
    Pab = np.multiply.outer(P, P) * phi
    np.fill_diagonal(Pab, 0.0)
    return P, Pab, w1, w2


def p_values(
    ctx: RealCaseContext, s1: float, s2: float,
    signs: ReconstructionSigns = ReconstructionSigns(),
) -> PValues:
    """All fifteen radical quantities at an admissible (s1, s2).

    In-window, P1, P2, P3 are purely imaginary, P4 real, P5 imaginary, and
    the pair quantities P_ab are real exactly when the index 4 (the root
    k1) is not involved.
    """
    _window_check(ctx, s1, s2)
    P, Pab, w1, w2 = _build(ctx, s1, s2, signs)
    return PValues(P=P, Pab=Pab, w1=w1, w2=w2, signs=signs)


def _dP_du1(P, Pab, a, roots):
    others = [j for j in range(5) if j != a]
    be, ga = others[0], others[1]
    return (P[ga] * Pab[a, ga] - P[be] * Pab[a, be]) / (2.0 * (roots[be] - roots[ga]))


@dataclass(frozen=True)
class IdentityReport:
    """Worst-case residuals of the two product-identity families."""

    triple_max: float     # R0 P_a P_b P_c - P_bc (...) = P_ad P_ae
    square_max: float     # R0 (P_b^2 + P_c^2) P_a - ... = P_bd P_ce + ...
    scale: float
    n_checked: int

    @property
    def max_relative(self) -> float:
        return max(self.triple_max, self.square_max) / self.scale


def identity_suite(
    ctx: RealCaseContext, s1, s2, signs: ReconstructionSigns = ReconstructionSigns()
) -> IdentityReport:
    """Residuals of both identity families over all index assignments.

    Accepts scalars or equally-shaped arrays of in-window samples.
    """
    s1 = np.atleast_1d(np.asarray(s1, dtype=float))
    s2 = np.atleast_1d(np.asarray(s2, dtype=float))
    for a, b in zip(s1, s2):
        _window_check(ctx, float(a), float(b))
    a_ = ctx.roots
    t = s1[None, :] - a_[:, None]
    u = s2[None, :] - a_[:, None]
    tu = t * u
    eta = signs.eta
    P = np.where(tu < 0, 1j, 1.0 + 0j) * eta[:, None] * np.sqrt(np.abs(tu))
    w1 = signs.w1 * np.sqrt(np.abs(ctx.quintic.R1(s1)))
    w2 = signs.w2 * np.sqrt(np.abs(ctx.quintic.R1(s2)))
    phi = (w1 / (t[:, None, :] * t[None, :, :]) - w2 / (u[:, None, :] * u[None, :, :])) / (
        s1 - s2
    )
    Pab = P[:, None, :] * P[None, :, :] * phi

    triple = 0.0
    square = 0.0
    scale = float(np.max(np.abs(Pab))) ** 2 + 1.0
    for al, be, ga, de, ep in itertools.permutations(range(5)):
        lhs = R0 * P[al] * P[be] * P[ga] - Pab[be, ga] * (
            P[ga] * Pab[al, ga] - P[be] * Pab[al, be]
        ) / (a_[be] - a_[ga])
        triple = max(triple, float(np.max(np.abs(lhs - Pab[al, de] * Pab[al, ep]))))
        lhs4 = (
            R0 * (P[be] ** 2 + P[ga] ** 2) * P[al]
            - Pab[al, ga] * (P[be] * Pab[be, ga] - P[al] * Pab[al, ga]) / (a_[al] - a_[be])
            - Pab[al, be] * (P[al] * Pab[al, be] - P[ga] * Pab[be, ga]) / (a_[ga] - a_[al])
        )
        rhs4 = (
            Pab[be, de] * Pab[ga, ep]
            + Pab[be, ep] * Pab[ga, de]
            + R0 * (a_[be] - a_[ga]) ** 2 * P[al]
        )
        square = max(square, float(np.max(np.abs(lhs4 - rhs4))))
    return IdentityReport(
        triple_max=triple, square_max=square, scale=scale, n_checked=120 * s1.size
    )


def _assemble(ctx: RealCaseContext, P, Pab, signs):
    (L, M, N), (L1, M1, N1), (L2, M2, N2) = ctx.L_family()
    e1, e2, e3 = ctx.e
    S = L * P[0] + M * P[1] + N * P[2]
    if abs(S) < 1e-12 * max(1.0, float(np.max(np.abs(P[:3])))):
        raise DegenerateDenominator("L P1 + M P2 + N P3 vanished")
    S1 = L1 * P[0] + M1 * P[1] + N1 * P[2]
    S2 = L2 * P[0] + M2 * P[1] + N2 * P[2]
    T = L * Pab[1, 2] + M * Pab[0, 2] + N * Pab[0, 1]
    T1 = L1 * Pab[1, 2] + M1 * Pab[0, 2] + N1 * Pab[0, 1]

    p = -1j * S1 / S
    q = ctx.E / S
    r = -1j * T / S
    gamma2 = T1 / (ctx.c0 * S)
    # bracket of the middle-cosine formula; equals 2 (T' S - T S') on u1
    bracket = (
        L * L * Pab[0, 3] * Pab[0, 4]
        + M * M * Pab[1, 3] * Pab[1, 4]
        + N * N * Pab[2, 3] * Pab[2, 4]
        + M * N * (Pab[1, 3] * Pab[2, 4] + Pab[1, 4] * Pab[2, 3] + R0 * (e2 - e3) ** 2 * P[0])
        + N * L * (Pab[2, 3] * Pab[0, 4] + Pab[2, 4] * Pab[0, 3] + R0 * (e3 - e1) ** 2 * P[1])
        + L * M * (Pab[0, 3] * Pab[1, 4] + Pab[0, 4] * Pab[1, 3] + R0 * (e1 - e2) ** 2 * P[2])
    )
    gamma1 = -1j * signs.nu * bracket / (2.0 * ctx.c0 * S * S)
    gamma = (2.0 * (p * p + q * q) + r * r - 6.0 * ctx.l1) / (2.0 * ctx.c0)
    gamma_closed = (-4.0 * ctx.l1 + 4.0 * S2 / S - (T / S) ** 2) / (2.0 * ctx.c0)
    return np.array([p, q, r, gamma, gamma1, gamma2]), gamma_closed


def reconstruct(
    ctx: RealCaseContext, s1: float, s2: float,
    signs: ReconstructionSigns = ReconstructionSigns(),
    *,
    imag_tol: float = 1e-9,
) -> MotionState:
    """State (p, q, r, gamma, gamma', gamma'') at an admissible (s1, s2)."""
    _window_check(ctx, s1, s2)
    P, Pab, _, _ = _build(ctx, s1, s2, signs)
    vec, _ = _assemble(ctx, P, Pab, signs)
    resid = float(np.max(np.abs(vec.imag)))
    if resid > imag_tol * max(1.0, float(np.max(np.abs(vec.real)))):
        raise DegenerateDenominator(f"imaginary residue {resid:.3g} on output")
    return MotionState.from_array(vec.real)


def reconstruct_with_closed_gamma(ctx, s1, s2, signs=ReconstructionSigns()):
    """Reconstruction plus the closed quotient form of gamma (cross-check)."""
    _window_check(ctx, s1, s2)
    P, Pab, _, _ = _build(ctx, s1, s2, signs)
    vec, g_closed = _assemble(ctx, P, Pab, signs)
    return MotionState.from_array(vec.real), complex(g_closed)


_ALL_SIGNS = [
    ReconstructionSigns(e1, e2, e3, w1, w2, nu)
    for e1 in (1, -1) for e2 in (1, -1) for e3 in (1, -1)
    for w1 in (1, -1) for w2 in (1, -1) for nu in (1, -1)
]


def fit_signs(
    ctx: RealCaseContext, s1: float, s2: float, state: MotionState,
    *, tol: float = 1e-6,
) -> ReconstructionSigns | None:
    """Sign bits reproducing a known state at (s1, s2), or None."""
    target = state.as_array()
    _window_check(ctx, s1, s2)
    best = None
    for signs in _ALL_SIGNS:
        P, Pab, _, _ = _build(ctx, s1, s2, signs)
        try:
            vec, _ = _assemble(ctx, P, Pab, signs)
        except DegenerateDenominator:
            continue
        err = float(np.max(np.abs(vec.real - target)) + np.max(np.abs(vec.imag)))
        if best is None or err < best[0]:
            best = (err, signs)
    if best is None or best[0] > tol:
        return None
    return best[1]


def _event_tracks(ctx: RealCaseContext, series: SeparationSeries) -> dict[str, np.ndarray]:
    """Per-sample sign multipliers from turning and pole-passage events.

    s1 turnings at e1 flip (eta1, w1); at k1 flip w1 alone (P5 absorbs the
    parity).  s2 turnings at e3 flip (eta3, w2); the passage of s2 through
    infinity flips (eta1, eta2, eta3, w2).  Flip instants come from the
    parabola vertex through the extremum triple; 1/s2 is used for the s2
    events because it stays smooth through the pole.
    """
    t = series.t
    n = t.size
    tracks = {kk: np.ones(n) for kk in ("eta1", "eta2", "eta3", "w1", "w2")}
    x1 = np.real(series.s1)
    with np.errstate(divide="ignore", invalid="ignore"):
        x2r = np.where(np.isfinite(series.s2.real), np.real(1.0 / series.s2), 0.0)
    mid = 0.5 * (ctx.e[0] + ctx.k1)
    pole_cut = 0.5 / max(abs(ctx.e[2]), 1e-6)

    def apply(t0, keys):
        after = t >= t0
        for kk in keys:
            tracks[kk][after] *= -1.0

    def vertex(j, x):
        h = 0.5 * (t[j + 1] - t[j - 1])
        den = x[j - 1] - 2.0 * x[j] + x[j + 1]
        off = 0.0 if den == 0.0 else 0.5 * h * (x[j - 1] - x[j + 1]) / den
        return t[j] + float(np.clip(off, -h, h))

    for j in range(1, n - 1):
        d0, d1 = x1[j] - x1[j - 1], x1[j + 1] - x1[j]
        if d0 != 0.0 and d1 != 0.0 and (d0 > 0.0) != (d1 > 0.0):
            apply(vertex(j, x1), ("eta1", "w1") if x1[j] < mid else ("w1",))
        d0, d1 = x2r[j] - x2r[j - 1], x2r[j + 1] - x2r[j]
        if d0 != 0.0 and d1 != 0.0 and (d0 > 0.0) != (d1 > 0.0):
            if abs(x2r[j]) < pole_cut:
                apply(vertex(j, x2r), ("eta1", "eta2", "eta3", "w2"))
            else:
                apply(vertex(j, x2r), ("eta3", "w2"))
    return tracks


@dataclass(frozen=True)
class ReconstructionResult:
    """Round-trip reconstruction along a trajectory."""

    t: np.ndarray
    states: np.ndarray          # reconstructed (n, 6)
    valid: np.ndarray
    max_abs_error: np.ndarray   # against the direct states, nan when invalid
    imag_residue: np.ndarray
    base_signs: ReconstructionSigns
    n_events: int
    notes: tuple[str, ...]

    def fraction_within(self, tol: float) -> float:
        ok = self.valid & np.isfinite(self.max_abs_error)
        if not ok.any():
            return 0.0
        return float(np.mean(self.max_abs_error[ok] < tol))


_FORMULA_NOTES = (
    "gamma recovered from the energy integral; the closed quotient form "
    "carries a factor 4 on its P-sum term and is kept as a cross-check",
    "gamma'' uses the P-sum denominator (the pair-sum variant is not "
    "real-valued in the admissible windows)",
    "gamma' bracket carries the curve leading coefficient on its "
    "(e_b-e_c)^2 P_a terms, matching the product identities",
)


def reconstruct_trajectory(
    ctx: RealCaseContext,
    traj: Trajectory,
    series: SeparationSeries | None = None,
) -> ReconstructionResult:
    """Reconstruct every admissible sample of a trajectory.

    The sign bits are fitted once, against the first admissible direct
    state, and advanced by the event rules afterwards; the direct states
    are otherwise used only to measure the round-trip error.
    """
    if series is None:
        qd = QuarticData(l1=ctx.l1, l=ctx.l, c0=ctx.c0, k=ctx.k)
        series = separation_series(qd, traj)
    n = series.t.size
    s1 = np.real(series.s1)
    s2 = np.real(series.s2)
    in_window = (
        series.valid
        & np.isfinite(s1)
        & np.isfinite(s2)
        & (s1 > ctx.e[0])
        & (s1 < ctx.k1)
        & (s2 < ctx.s2_upper)
    )
    tracks = _event_tracks(ctx, series)
    n_events = sum(int(np.sum(np.diff(tr) != 0.0)) for tr in tracks.values())

    states = np.full((n, 6), np.nan)
    errors = np.full(n, np.nan)
    imag_res = np.full(n, np.nan)
    valid = np.zeros(n, dtype=bool)

    first = None
    base = None
    for i in np.flatnonzero(in_window):
        cand = fit_signs(ctx, float(s1[i]), float(s2[i]), traj.state(i))
        if cand is not None:
            first, base = int(i), cand
            break
    if base is None:
        return ReconstructionResult(
            t=series.t, states=states, valid=valid, max_abs_error=errors,
            imag_residue=imag_res, base_signs=ReconstructionSigns(),
            n_events=n_events, notes=_FORMULA_NOTES + ("no admissible start sample",),
        )

    rel = {kk: tracks[kk] / tracks[kk][first] for kk in tracks}
    for i in np.flatnonzero(in_window):
        signs = ReconstructionSigns(
            eta1=int(base.eta1 * rel["eta1"][i]),
            eta2=int(base.eta2 * rel["eta2"][i]),
            eta3=int(base.eta3 * rel["eta3"][i]),
            w1=int(base.w1 * rel["w1"][i]),
            w2=int(base.w2 * rel["w2"][i]),
            nu=base.nu,
        )
        P, Pab, _, _ = _build(ctx, float(s1[i]), float(s2[i]), signs)
        try:
            vec, _ = _assemble(ctx, P, Pab, signs)
        except DegenerateDenominator:
            continue
        states[i] = vec.real
        imag_res[i] = float(np.max(np.abs(vec.imag)))
        errors[i] = float(np.max(np.abs(vec.real - traj.states[i])))
        valid[i] = True
    return ReconstructionResult(
        t=series.t, states=states, valid=valid, max_abs_error=errors,
        imag_residue=imag_res, base_signs=base, n_events=n_events,
        notes=_FORMULA_NOTES,
    )
