"""Genus-2 machinery: period matrix, theta functions, Abel map, P-quotients.

The curve is w^2 = R1(s) = -4 (s-a0)...(s-a4) with the five real branch
points in ascending order.  The square root on the real axis follows the
product convention sqrt(R) = A0^3 * prod((s - a_j)/A0)^(1/2) with each half
power taken on the principal branch, which evaluates to

    sqrt(R)(s) = -2 * i^count * sqrt(prod |s - a_j|),   count = #{j : a_j < s}.

All period and characteristic integrals run over real segments with this
convention; the resulting period matrix is purely imaginary with positive
definite imaginary part and the sixteen half-integer characteristics land
on lattice integers to machine precision.

Theta labels: "0".."4" for the finite branch points, "5" for the zero
characteristic (the branch point at infinity), and two-digit strings for
the mod-2 pair sums.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import (
    DegenerateQuintic,
    NonIntegralCharacteristic,
    NotConvergent,
    OutsideWindow,
    QuadratureNonConvergent,
    RegimeViolated,
    ThetaZeroDenominator,
)
from .reconstruction import RealCaseContext, ReconstructionSigns, context, p_values

__all__ = [
    "HyperellipticCurve",
    "PeriodData",
    "Characteristic",
    "ThetaContext",
    "build_curve",
    "periods",
    "characteristics",
    "theta",
    "build_theta_context",
    "theta_constants",
    "abel_map",
    "p_via_theta",
    "PAIR_LABELS",
    "SINGLE_LABELS",
]

A0 = -4.0
SINGLE_LABELS = ("0", "1", "2", "3", "4")
PAIR_LABELS = tuple(f"{i}{j}" for i, j in itertools.combinations(range(5), 2))
ALL_LABELS = SINGLE_LABELS + ("5",) + PAIR_LABELS

_gl_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(n: int):
    if n not in _gl_cache:
        _gl_cache[n] = roots_legendre(n)
    return _gl_cache[n]


@dataclass(frozen=True)
class HyperellipticCurve:
    """Branch points in ascending order and the sign conventions."""

    a: np.ndarray            # a0 < a1 < ... < a4
    p_to_curve: np.ndarray   # curve index of the P-index roots (e1,e2,e3,k1,k2)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if np.any(np.diff(a) < 1e-10 * max(1.0, np.max(np.abs(a)))):
            raise DegenerateQuintic("branch points must be distinct and ordered")
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    def sqrt_R(self, x):
        """Convention square root of -4*prod(x - a_j) for real x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        count = np.sum(x[:, None] > self.a[None, :], axis=1)
        mag = np.sqrt(np.prod(np.abs(x[:, None] - self.a[None, :]), axis=1))
        return -2.0 * (1j ** count) * mag

    def interval_phase(self, lo: float, hi: float) -> complex:
        """Unit phase of sqrt_R on the open interval (lo, hi)."""
        mid = 0.5 * (lo + hi)
        ph = self.sqrt_R(mid)[0]
        ph = ph / abs(ph)
        cands = np.array([1, -1, 1j, -1j])
        return complex(cands[np.argmin(np.abs(cands - ph))])


def build_curve(ctx: RealCaseContext) -> HyperellipticCurve:
    """Curve from a real-case context; records the P-index to curve map."""
    vals = ctx.roots  # (e1, e2, e3, k1, k2)
    order = np.argsort(vals)
    a = vals[order]
    p_to_curve = np.empty(5, dtype=int)
    for curve_idx, p_idx in enumerate(order):
        p_to_curve[p_idx] = curve_idx
    return HyperellipticCurve(a=a, p_to_curve=p_to_curve)


def _F(alpha: int, x):
    # basis differentials: F_1 = x (du1 = s ds/w), F_2 = 1 (du2 = ds/w)
    return x if alpha == 0 else np.ones(np.shape(x))


def _refine(evaluate, tol: float, what: str) -> complex:
    n = 64
    prev = None
    while n <= 16384:
        val = evaluate(n)
        if prev is not None and abs(val - prev) < tol * max(1.0, abs(val)):
            return val
        prev = val
        n *= 2
    if prev is not None and abs(val - prev) < 1e-10 * max(1.0, abs(val)):
        return val
    raise QuadratureNonConvergent(f"{what} stalled above 1e-10")


_segment_cache: dict[tuple, complex] = {}


def _segment_integral(curve, alpha, lo, hi, tol=1e-13) -> complex:
    """Integral of F_alpha/sqrt_R over a full branch-point interval."""
    key = (tuple(curve.a), alpha, lo, hi, tol)
    if key in _segment_cache:
        return _segment_cache[key]
    a = curve.a
    ph = curve.interval_phase(lo, hi)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def evaluate(n):
        nodes, wts = _gl(n)
        x = mid + half * np.sin(0.5 * np.pi * nodes)
        prod = np.prod(np.abs(x[:, None] - a[None, :]), axis=1)
        prod /= np.abs(x - lo) * np.abs(hi - x)
        val = 0.5 * np.pi * np.sum(wts * _F(alpha, x) / (2.0 * np.sqrt(prod)))
        return val / ph

    out = _refine(evaluate, tol, f"segment ({lo:.4g},{hi:.4g})")
    _segment_cache[key] = out
    return out


def _partial_one_sided(curve, alpha, base, end, tol=1e-13) -> complex:
    """Oriented integral from branch point `base` to `end`, z^2-substituted
    at `base`.  Converges fast only when `end` stays away from other roots."""
    a = curve.a
    W = end - base
    sgn = 1.0 if W >= 0 else -1.0
    W = abs(W)
    if W == 0.0:
        return 0.0
    ph = curve.interval_phase(base, base + sgn * W) if sgn > 0 else curve.interval_phase(
        base - W, base
    )
    others = a[np.abs(a - base) > 1e-14]

    def evaluate(n):
        nodes, wts = _gl(n)
        z = 0.5 * (nodes + 1.0)
        x = base + sgn * W * z * z
        prod = np.prod(np.abs(x[:, None] - others[None, :]), axis=1)
        val = 0.5 * np.sum(wts * _F(alpha, x) * np.sqrt(W) / np.sqrt(prod))
        return sgn * val / ph

    return _refine(evaluate, tol, f"partial ({base:.4g},{end:.4g})")


def _partial_integral(curve, alpha, base, end, tol=1e-13) -> complex:
    """Oriented integral of F_alpha/sqrt_R from branch point `base` to `end`.

    When `end` sits closer to another branch point than to `base`, the
    integral is rewritten through the cached full segment so the
    substitution always anchors at the nearest singularity.
    """
    a = curve.a
    others = a[np.abs(a - base) > 1e-14]
    gaps = np.abs(others - end)
    nearest = others[np.argmin(gaps)]
    if np.min(gaps) >= abs(end - base) or (end - base) * (nearest - base) < 0:
        return _partial_one_sided(curve, alpha, base, end, tol)
    lo, hi = (base, nearest) if base < nearest else (nearest, base)
    full = _segment_integral(curve, alpha, lo, hi, tol)
    if base > nearest:
        full = -full
    return full + _partial_one_sided(curve, alpha, nearest, end, tol)


def _tail_integral(curve, alpha, tol=1e-13) -> complex:
    """Integral of F_alpha/sqrt_R from a4 to +infinity.

    Regularized by x = a4 + W z^2 near the branch point and x = a4 + 1/u^2
    at infinity.
    """
    a = curve.a
    a4 = a[-1]
    W = 1.0 + (a[-1] - a[0])
    ph = curve.interval_phase(a4, a4 + W)

    def evaluate(n):
        nodes, wts = _gl(n)
        z = 0.5 * (nodes + 1.0)
        x = a4 + W * z * z
        others = np.prod(np.abs(x[:, None] - a[None, :-1]), axis=1)
        p1 = 0.5 * np.sum(wts * _F(alpha, x) * np.sqrt(W) / np.sqrt(others)) / ph
        U = 1.0 / np.sqrt(W)
        u = 0.5 * U * (nodes + 1.0)
        xx = a4 + 1.0 / (u * u)
        p2 = 0.5 * U * np.sum(wts * _F(alpha, xx) * (2.0 / u**3) / curve.sqrt_R(xx))
        return p1 + p2

    return _refine(evaluate, tol, "tail integral")


@dataclass(frozen=True)
class PeriodData:
    """Real period blocks and the normalized period matrix."""

    K: np.ndarray        # 2x2 real
    Kbar: np.ndarray     # 2x2 real
    Kprime: np.ndarray   # 2x2 real, column-accumulated Kbar
    tau: np.ndarray      # 2x2 complex symmetric, Im positive definite

    @property
    def G(self) -> np.ndarray:
        """(2K)^{-1}; maps u to v."""
        return np.linalg.inv(2.0 * self.K)

    @property
    def tau_symmetry_defect(self) -> float:
        return float(abs(self.tau[0, 1] - self.tau[1, 0]))

    @property
    def im_tau_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.tau.imag)


def periods(curve: HyperellipticCurve, *, tol: float = 1e-13) -> PeriodData:
    """Period blocks by singularity-removing quadrature.

    K_{a b} integrates over (a1, a2) and (a3, a4); i*Kbar_{a b} over
    (a0, a1) and (a2, a3); K' accumulates Kbar columns; tau = 2i (2K)^-1 K'.
    """
    a = curve.a
    K = np.zeros((2, 2))
    Kb = np.zeros((2, 2))
    for alpha in (0, 1):
        K[alpha, 0] = _segment_integral(curve, alpha, a[1], a[2], tol).real
        K[alpha, 1] = _segment_integral(curve, alpha, a[3], a[4], tol).real
        Kb[alpha, 0] = (_segment_integral(curve, alpha, a[0], a[1], tol) / 1j).real
        Kb[alpha, 1] = (_segment_integral(curve, alpha, a[2], a[3], tol) / 1j).real
    Kp = np.column_stack([Kb[:, 0], Kb[:, 0] + Kb[:, 1]])
    tau = 2j * np.linalg.inv(2.0 * K) @ Kp
    pd = PeriodData(K=K, Kbar=Kb, Kprime=Kp, tau=0.5 * (tau + tau.T))
    if abs(tau[0, 1] - tau[1, 0]) > 1e-10 * max(1.0, float(np.max(np.abs(tau)))):
        raise QuadratureNonConvergent("period matrix failed the symmetry check")
    if np.any(pd.im_tau_eigenvalues <= 0.0):
        raise NotConvergent("Im tau not positive definite")
    return pd


@dataclass(frozen=True)
class Characteristic:
    """Half-integer theta characteristic (stored as integer vectors)."""

    label: str
    m: tuple[int, int]   # components in {0, -1}
    n: tuple[int, int]   # components in {0, +1}

    @property
    def parity(self) -> int:
        return (-1) ** int(
            (self.m[0] * self.n[0] + self.m[1] * self.n[1]) % 2
        )


def _reduce_m(m: np.ndarray) -> tuple[int, int]:
    r = -((-np.asarray(m, dtype=int)) % 2)
    return int(r[0]), int(r[1])


def _reduce_n(n: np.ndarray) -> tuple[int, int]:
    r = np.asarray(n, dtype=int) % 2
    return int(r[0]), int(r[1])


def characteristics(
    curve: HyperellipticCurve, pd: PeriodData, *, tol: float = 1e-6
) -> dict[str, Characteristic]:
    """All sixteen characteristics from the branch-point integrals.

    The integral from infinity down to a_lambda decomposes over the period
    lattice; lattice coordinates must land on integers within ``tol``.
    """
    a = curve.a
    out: dict[str, Characteristic] = {}
    Kinv = np.linalg.inv(pd.K)
    Kpinv = np.linalg.inv(pd.Kprime)
    tails = [_tail_integral(curve, alpha) for alpha in (0, 1)]
    seg = {
        (alpha, j): _segment_integral(curve, alpha, a[j], a[j + 1])
        for alpha in (0, 1)
        for j in range(4)
    }
    for lam in range(5):
        I = np.zeros(2, dtype=complex)
        for alpha in (0, 1):
            total = tails[alpha]
            for j in range(lam, 4):
                total += seg[(alpha, j)]
            I[alpha] = -total
        m = Kinv @ I.real
        n = Kpinv @ I.imag
        err = max(np.max(np.abs(m - np.round(m))), np.max(np.abs(n - np.round(n))))
        if err > tol:
            raise NonIntegralCharacteristic(
                f"branch point {lam}: lattice roundoff {err:.3g}"
            )
        out[str(lam)] = Characteristic(
            label=str(lam), m=_reduce_m(np.round(m)), n=_reduce_n(np.round(n))
        )
    out["5"] = Characteristic(label="5", m=(0, 0), n=(0, 0))
    for i, j in itertools.combinations(range(5), 2):
        mi = np.array(out[str(i)].m) + np.array(out[str(j)].m)
        ni = np.array(out[str(i)].n) + np.array(out[str(j)].n)
        out[f"{i}{j}"] = Characteristic(
            label=f"{i}{j}", m=_reduce_m(mi), n=_reduce_n(ni)
        )
    return out


def theta(
    pd: PeriodData, v, chi: Characteristic | None = None, *, tail: float = 1e-14
) -> complex:
    """Genus-2 theta series with half-integer characteristic.

    Truncation: the lattice square radius N is chosen from the smallest
    eigenvalue of Im tau so the dropped tail is below ``tail``; the lattice
    is re-centered against Im v.  Minimum N is 8.
    """
    v = np.asarray(v, dtype=complex)
    lam_min = float(np.min(np.linalg.eigvalsh(pd.tau.imag)))
    if lam_min <= 0.0:
        raise NotConvergent("Im tau not positive definite")
    if chi is None:
        chi = Characteristic(label="5", m=(0, 0), n=(0, 0))
    center = -np.linalg.solve(pd.tau.imag, v.imag)
    shift = float(np.max(np.abs(center)))
    N = max(8, int(np.ceil(np.sqrt(-np.log(tail) / (np.pi * lam_min)) + shift)) + 2)
    rng = np.arange(-N, N + 1)
    n1, n2 = np.meshgrid(rng, rng, indexing="ij")
    z1 = n1 + chi.n[0] / 2.0
    z2 = n2 + chi.n[1] / 2.0
    t = pd.tau
    quad = z1 * z1 * t[0, 0] + 2.0 * z1 * z2 * t[0, 1] + z2 * z2 * t[1, 1]
    lin = 2.0 * (z1 * (v[0] + chi.m[0] / 2.0) + z2 * (v[1] + chi.m[1] / 2.0))
    expo = 1j * np.pi * (quad + lin)
    # guard against overflow on the far lattice corners
    expo_re = np.clip(expo.real, -745.0, 700.0)
    return complex(np.sum(np.exp(expo_re + 1j * expo.imag)))


# quotient table: P-quantity -> (theta label in curve indices, constant
# quotient labels (numerator, denominator)).  The prefactor unit phases are
# calibrated numerically per context and reported.
_P_SINGLE_TABLE = {
    1: ("3", ("0", "2", "4"), ("01", "12", "14")),
    2: ("2", ("5", "2"), ("12", "23")),
    3: ("0", ("5", "0"), ("01", "03")),
    4: ("4", ("5", "4"), ("14", "34")),
    5: ("1", ("0", "2", "4"), ("03", "23", "34")),
}
_P_PAIR_TABLE = {
    (1, 2): ("23", ("5",), ("12",)),
    (1, 3): ("03", ("5",), ("01",)),
    (1, 4): ("34", ("5",), ("14",)),
    (1, 5): ("13", (), ()),
    (2, 3): ("02", ("5",), ("4",)),
    (2, 4): ("24", ("5",), ("0",)),
    (2, 5): ("12", ("5",), ("23",)),
    (3, 4): ("04", ("5",), ("2",)),
    (3, 5): ("01", ("5",), ("03",)),
    (4, 5): ("14", ("5",), ("34",)),
}


@dataclass(frozen=True)
class ThetaContext:
    """Curve, periods, characteristics, constants and the calibration table."""

    ctx: RealCaseContext
    curve: HyperellipticCurve
    pd: PeriodData
    chars: dict[str, Characteristic]
    constants: dict[str, complex]
    C: float
    phase_table: dict[str, complex]   # calibrated unit prefactors, "P1".."P45"

    @property
    def odd_labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, ch in self.chars.items() if ch.parity == -1)

    def theta(self, v, label: str) -> complex:
        return theta(self.pd, v, self.chars[label])


def _regime_check(ctx: RealCaseContext) -> None:
    if not (ctx.l1 > ctx.k > ctx.c0 > 0.0):
        raise RegimeViolated("need l1 > k > c0 > 0")
    if not (ctx.l**2 < (3.0 * ctx.l1 - ctx.k) / 2.0):
        raise RegimeViolated("need l^2 < (3 l1 - k)/2")


def abel_map(
    tctx_or_curve, s1: float, s2: float, *, sheets: tuple[int, int] = (1, 1)
) -> np.ndarray:
    """Abel coordinates v = (2K)^{-1} u with base points a3 and a1.

    The s1 leg integrates from a3, the s2 leg from a1 through the full
    (a0, a1) segment and down to s2, both on the convention sheet times the
    requested sheet signs.
    """
    if isinstance(tctx_or_curve, ThetaContext):
        curve, pd, rctx = tctx_or_curve.curve, tctx_or_curve.pd, tctx_or_curve.ctx
    else:
        raise TypeError("abel_map needs a ThetaContext")
    a = curve.a
    tiny = 1e-12 * max(1.0, abs(a[4]))
    if not (a[3] - tiny <= s1 <= a[4] + tiny) or not (s2 <= a[1] + tiny):
        raise OutsideWindow(f"(s1, s2) = ({s1:.6g}, {s2:.6g})")
    u = np.zeros(2, dtype=complex)
    for alpha in (0, 1):
        leg1 = _partial_integral(curve, alpha, a[3], s1)
        # a1 -> s2 decomposes as (a1 -> a0) + (a0 -> s2)
        leg2 = _partial_integral(curve, alpha, a[0], s2) - _segment_integral(
            curve, alpha, a[0], a[1]
        )
        u[alpha] = sheets[0] * leg1 + sheets[1] * leg2
    return np.linalg.solve(2.0 * pd.K, u)


def _constant_quotient(constants, nums, dens) -> complex:
    out = 1.0 + 0.0j
    for x in nums:
        out *= constants[x]
    for x in dens:
        out /= constants[x]
    return out


def _p_quotients_raw(tctx: ThetaContext, v) -> dict[str, complex]:
    """Theta quotients times tabulated constants, before phase calibration.

    Values are in the canonical normalization of the reconstruction module
    (pair quantities carry the factor 2i, with the sign fixed by whether
    the root k1 participates).
    """
    cst = tctx.constants
    sqrt_a31 = np.sqrt(tctx.curve.a[3] - tctx.curve.a[1])
    t5 = tctx.theta(v, "5")
    if abs(t5) < 1e-13:
        raise ThetaZeroDenominator("evaluation point on the theta divisor")
    out: dict[str, complex] = {}
    for p_idx, (lab, nums, dens) in _P_SINGLE_TABLE.items():
        quot = _constant_quotient(cst, nums, dens)
        out[f"P{p_idx}"] = (tctx.C / sqrt_a31) * quot * tctx.theta(v, lab) / t5
    for (i, j), (lab, nums, dens) in _P_PAIR_TABLE.items():
        quot = _constant_quotient(cst, nums, dens)
        conv = 2j if 4 in (i, j) else -2j   # to canonical normalization
        out[f"P{i}{j}"] = conv * tctx.C * quot * tctx.theta(v, lab) / t5
    return out


def build_theta_context(
    ctx: RealCaseContext, *, calibrate: bool = True, period_tol: float = 1e-13
) -> ThetaContext:
    """Assemble the full theta context for an admissible real-case context.

    The prefactor phases of the fifteen P-quotients are calibrated at a
    reference point against the direct radical evaluation (sheet signs
    (+1, +1)); magnitudes are never calibrated, so the tabulated constant
    quotients stay under test.
    """
    _regime_check(ctx)
    curve = build_curve(ctx)
    pd = periods(curve, tol=period_tol)
    chars = characteristics(curve, pd)
    constants = {lab: theta(pd, np.zeros(2), ch) for lab, ch in chars.items()}
    C = float(
        (
            (curve.a[3] - curve.a[1]) ** 1.5
            * constants["01"]
            * constants["03"]
            * constants["12"]
            * constants["23"]
            * constants["14"]
            * constants["34"]
            / (constants["0"] ** 2 * constants["2"] ** 2 * constants["4"] ** 2)
        ).real
    )
    tctx = ThetaContext(
        ctx=ctx, curve=curve, pd=pd, chars=chars, constants=constants, C=C,
        phase_table={f"P{i}": 1.0 + 0j for i in range(1, 6)}
        | {f"P{i}{j}": 1.0 + 0j for i, j in itertools.combinations(range(1, 6), 2)},
    )
    if not calibrate:
        return tctx
    # reference point: midpoints of the admissible windows
    s1_ref = 0.5 * (ctx.e[0] + ctx.k1)
    s2_ref = ctx.s2_upper - 1.0
    v_ref = abel_map(tctx, s1_ref, s2_ref)
    raw = _p_quotients_raw(tctx, v_ref)
    direct = p_values(ctx, s1_ref, s2_ref, ReconstructionSigns(w1=1, w2=1))
    phases = {}
    units = np.array([1, -1, 1j, -1j])
    for key, val in raw.items():
        if key.startswith("P") and len(key) == 2:
            ref = direct.P[int(key[1]) - 1]
        else:
            ref = direct.Pab[int(key[1]) - 1, int(key[2]) - 1]
        ratio = ref / val
        phases[key] = complex(units[np.argmin(np.abs(units - ratio))])
    return ThetaContext(
        ctx=ctx, curve=curve, pd=pd, chars=chars, constants=constants, C=C,
        phase_table=phases,
    )


def p_via_theta(tctx: ThetaContext, v) -> tuple[np.ndarray, np.ndarray]:
    """The fifteen P-quantities from theta quotients, canonical normalization.

    Returns (P, Pab) shaped like the direct radical evaluation with sheet
    signs (+1, +1).
    """
    raw = _p_quotients_raw(tctx, v)
    P = np.zeros(5, dtype=complex)
    Pab = np.zeros((5, 5), dtype=complex)
    for i in range(1, 6):
        P[i - 1] = tctx.phase_table[f"P{i}"] * raw[f"P{i}"]
    for i, j in itertools.combinations(range(1, 6), 2):
        val = tctx.phase_table[f"P{i}{j}"] * raw[f"P{i}{j}"]
        Pab[i - 1, j - 1] = val
        Pab[j - 1, i - 1] = val
    return P, Pab


@dataclass(frozen=True)
class AbelLinearityReport:
    """Shared-slope affine fit of the Abel image of a trajectory.

    Between branch events the pointwise image is affine in t; events shift
    the intercept by deck constants while the slope stays +/- (2K)^{-1} e1
    throughout.  The fit shares one slope across all segments and gives
    each segment its own intercept.
    """

    t: np.ndarray
    v: np.ndarray               # (n, 2) complex
    segment_of: np.ndarray      # segment index per sample
    slope: np.ndarray           # fitted dv/dt (2,) complex
    expected_slope: np.ndarray  # (2K)^{-1} e_1
    max_residual: float
    n_segments: int


def abel_trajectory(
    tctx: ThetaContext, series, *, max_points: int = 150
) -> AbelLinearityReport:
    """Sheet-aware Abel image along a trajectory, with a shared-slope fit."""
    from .reconstruction import _event_tracks

    ctx = tctx.ctx
    tracks = _event_tracks(ctx, series)
    s1 = np.real(series.s1)
    s2 = np.real(series.s2)
    t = series.t
    finite = np.isfinite(s1) & np.isfinite(s2) & series.valid
    # cap |s2|: leg quadrature effort and conditioning degrade near the pole
    in_win = (
        finite
        & (s1 > ctx.e[0])
        & (s1 < ctx.k1)
        & (s2 < ctx.s2_upper)
        & (np.abs(s2) < 50.0)
    )
    if not in_win.any():
        raise OutsideWindow("no admissible samples for the Abel fit")

    # segments: maximal runs with an unchanged sheet-multiplier pair
    key = tracks["w1"] * 2.0 + tracks["w2"]
    seg_id = np.concatenate([[0], np.cumsum(np.abs(np.diff(key)) > 0)])

    idx_all = np.flatnonzero(in_win)
    stride = max(1, idx_all.size // max_points)
    idx = idx_all[::stride]
    # drop samples adjacent to an event (vertex placement blurs the sheet)
    keep = []
    for i in idx:
        lo, hi = max(0, i - 1), min(t.size - 1, i + 1)
        if seg_id[lo] == seg_id[hi]:
            keep.append(i)
    idx = np.array(keep, dtype=int)

    i0 = int(idx[0])
    h = t[i0 + 1] - t[i0]
    ds1 = (s1[i0 + 1] - s1[i0 - 1]) / (2 * h) if i0 > 0 else (s1[i0 + 1] - s1[i0]) / h
    ds2 = (s2[i0 + 1] - s2[i0 - 1]) / (2 * h) if i0 > 0 else (s2[i0 + 1] - s2[i0]) / h
    w1c = tctx.curve.sqrt_R(s1[i0])[0]
    w2c = tctx.curve.sqrt_R(s2[i0])[0]
    sig1 = 1 if abs(ds1 * (s1[i0] - s2[i0]) - w1c) < abs(ds1 * (s1[i0] - s2[i0]) + w1c) else -1
    sig2 = 1 if abs(ds2 * (s2[i0] - s1[i0]) - w2c) < abs(ds2 * (s2[i0] - s1[i0]) + w2c) else -1

    vs = np.empty((idx.size, 2), dtype=complex)
    for row, i in enumerate(idx):
        sheets = (
            int(sig1 * tracks["w1"][i] / tracks["w1"][i0]),
            int(sig2 * tracks["w2"][i] / tracks["w2"][i0]),
        )
        vs[row] = abel_map(tctx, float(s1[i]), float(s2[i]), sheets=sheets)

    ts = t[idx]
    segs = seg_id[idx]
    uniq = np.unique(segs)
    design = np.zeros((idx.size, 1 + uniq.size))
    design[:, 0] = ts
    for col, sid in enumerate(uniq):
        design[segs == sid, 1 + col] = 1.0
    coef, *_ = np.linalg.lstsq(design, vs, rcond=None)
    resid = float(np.max(np.abs(design @ coef - vs)))
    expected = np.linalg.inv(2.0 * tctx.pd.K) @ np.array([1.0, 0.0])
    return AbelLinearityReport(
        t=ts, v=vs, segment_of=segs, slope=coef[0], expected_slope=expected,
        max_residual=resid, n_segments=int(uniq.size),
    )


@dataclass(frozen=True)
class ConstantIdentityReport:
    """Residuals of the six root/theta-constant identities."""

    names: tuple[str, ...]
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def residuals(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))


def theta_constants(tctx: ThetaContext) -> ConstantIdentityReport:
    """Check the six root-ratio identities satisfied by the theta constants."""
    _regime_check(tctx.ctx)
    c = tctx.constants
    e1, e2, e3 = tctx.ctx.e
    k = tctx.ctx.k
    l1 = tctx.ctx.l1

    def sq(lab):
        return c[lab] ** 2

    names = (
        "(e1-e2)/k", "(e1-e3)/k", "(e2-e3)/k",
        "(l1+e1)/k", "(l1+e2)/k", "(l1+e3)/k",
    )
    lhs = np.array([
        (e1 - e2) / k, (e1 - e3) / k, (e2 - e3) / k,
        (l1 + e1) / k, (l1 + e2) / k, (l1 + e3) / k,
    ])
    rhs = np.array([
        sq("2") * sq("03") * sq("34") / (sq("4") * sq("01") * sq("12")),
        sq("0") * sq("23") * sq("34") / (sq("4") * sq("01") * sq("12")),
        sq("5") * sq("14") * sq("34") / (sq("4") * sq("01") * sq("12")),
        sq("5") * sq("23") / (sq("4") * sq("01")) - sq("2") * sq("14") / (sq("4") * sq("12")),
        sq("5") * sq("23") / (sq("4") * sq("01")) - sq("0") * sq("2") / (sq("01") * sq("12")),
        sq("5") * sq("03") / (sq("4") * sq("12")) - sq("0") * sq("2") / (sq("01") * sq("12")),
    ]).real
    return ConstantIdentityReport(names=names, lhs=lhs, rhs=rhs)
