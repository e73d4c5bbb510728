"""Complex coordinates, the quartic R, separation variables and quadratures.

The change of variables goes (p, q, gamma, gamma1) -> (x1, x2, xi1, xi2) ->
(s1, s2).  Square-root branches are carried explicitly and continued along
trajectories by nearest-value continuation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchJump, CoincidentPoints, DegenerateQuintic
from .euler_poisson import MotionState, Trajectory

__all__ = [
    "ComplexCoordinates",
    "QuarticData",
    "SeparationVariables",
    "QuinticData",
    "to_complex_coords",
    "quartic_identity_residual",
    "w_squared",
    "s_from_x",
    "quintic_from_constants",
    "separation_series",
    "quadrature_residuals",
]


@dataclass(frozen=True)
class ComplexCoordinates:
    x1: complex
    x2: complex
    y1: complex
    y2: complex
    xi1: complex
    xi2: complex


def to_complex_coords(state: MotionState, c0: float) -> ComplexCoordinates:
    """x = p +/- qi, y = gamma +/- gamma1*i, xi = x^2 + c0*y."""
    x1 = state.p + 1j * state.q
    x2 = state.p - 1j * state.q
    y1 = state.gamma + 1j * state.gamma1
    y2 = state.gamma - 1j * state.gamma1
    return ComplexCoordinates(
        x1=x1, x2=x2, y1=y1, y2=y2, xi1=x1 * x1 + c0 * y1, xi2=x2 * x2 + c0 * y2
    )


@dataclass(frozen=True)
class QuarticData:
    """Constants of the motion plus the R-polynomial evaluators.

    k is the positive square root of the fourth integral; k0 = c0^2 - k^2
    and l0 = c0*l.
    """

    l1: float
    l: float
    c0: float
    k: float

    @property
    def k0(self) -> float:
        return self.c0**2 - self.k**2

    @property
    def l0(self) -> float:
        return self.c0 * self.l

    @property
    def k1(self) -> float:
        return 0.5 * (self.l1 + self.k)

    @property
    def k2(self) -> float:
        return 0.5 * (self.l1 - self.k)

    def R(self, x):
        """Quartic -x^4 + 6*l1*x^2 + 4*l*c0*x + c0^2 - k^2 (complex capable)."""
        x = np.asarray(x, dtype=complex) if np.ndim(x) else complex(x)
        return -(x**4) + 6.0 * self.l1 * x**2 + 4.0 * self.l0 * x + self.k0

    def frak(self, x1, x2):
        """Coefficients (A, B, C) of R seen as a quadratic in either argument."""
        fa = 6.0 * self.l1 - (x1 + x2) ** 2
        fb = 2.0 * self.l0 + x1 * x2 * (x1 + x2)
        fc = self.k0 - (x1 * x2) ** 2
        return fa, fb, fc

    def R_pair(self, x1, x2):
        """The mixed form A*x1*x2 + B*(x1 + x2) + C."""
        fa, fb, fc = self.frak(x1, x2)
        return fa * x1 * x2 + fb * (x1 + x2) + fc

    def R1_pair(self, x1, x2):
        """The combination A*C - B^2."""
        fa, fb, fc = self.frak(x1, x2)
        return fa * fc - fb * fb


def quartic_identity_residual(qd: QuarticData, x1: complex, x2: complex) -> complex:
    """R(x1)R(x2) - R_pair^2 - (x1 - x2)^2 * R1_pair; identically zero."""
    return (
        qd.R(x1) * qd.R(x2)
        - qd.R_pair(x1, x2) ** 2
        - (x1 - x2) ** 2 * qd.R1_pair(x1, x2)
    )


@dataclass(frozen=True)
class SeparationVariables:
    """The pair (s1, s2) plus the square-root branch bookkeeping.

    ``sqrt_r_x1``/``sqrt_r_x2`` record the chosen branches of sqrt(R(x1)),
    sqrt(R(x2)); their product enters s2 - s1.
    """

    s1: complex
    s2: complex
    sqrt_r_x1: complex
    sqrt_r_x2: complex
    k1: float
    k2: float

    @property
    def sum_minus_l1(self) -> complex:
        return self.s1 + self.s2

    def residuals(self, qd: QuarticData, x1: complex, x2: complex) -> tuple[float, float]:
        """Relative residuals of the defining sum/difference relations."""
        d2 = (x1 - x2) ** 2
        sum_ref = qd.R_pair(x1, x2) / d2 + qd.l1
        dif_ref = self.sqrt_r_x1 * self.sqrt_r_x2 / d2
        scale = max(abs(self.s1), abs(self.s2), 1.0)
        r_sum = abs((self.s1 + self.s2) - sum_ref) / scale
        r_dif = abs((self.s2 - self.s1) - dif_ref) / scale
        return r_sum, r_dif


def _continued_sqrt(value: complex, prev: complex | None) -> complex:
    root = np.sqrt(complex(value))
    if prev is not None:
        if abs(root - prev) > abs(-root - prev):
            root = -root
        gap = abs(root - prev)
        scale = max(abs(root), abs(prev))
        if scale > 1e-8 and gap > 0.5 * scale:
            raise BranchJump(
                "square-root branch moved by more than half its magnitude "
                "between samples; sampling too coarse"
            )
    return root


def s_from_x(
    qd: QuarticData,
    coords: ComplexCoordinates,
    prev: SeparationVariables | None = None,
) -> SeparationVariables:
    """Separation variables from complex coordinates, branches by continuity.

    Without ``prev`` the principal square roots are taken and the product
    branch is flipped if needed so that Re(s1) >= Re(s2) (s1 is the variable
    living in the upper window of the real regime).
    """
    x1, x2 = coords.x1, coords.x2
    scale = max(abs(x1), abs(x2), 1.0)
    if abs(x1 - x2) < 1e-12 * scale:
        raise CoincidentPoints("x1 = x2 is a branch point of the substitution")
    d2 = (x1 - x2) ** 2
    rp = qd.R_pair(x1, x2)
    if prev is None:
        w1 = np.sqrt(complex(qd.R(x1)))
        w2 = np.sqrt(complex(qd.R(x2)))
        s1 = rp / (2.0 * d2) - w1 * w2 / (2.0 * d2) + qd.l1 / 2.0
        s2 = rp / (2.0 * d2) + w1 * w2 / (2.0 * d2) + qd.l1 / 2.0
        if s2.real > s1.real:
            w2 = -w2
            s1, s2 = s2, s1
    else:
        w1 = _continued_sqrt(qd.R(x1), prev.sqrt_r_x1)
        w2 = _continued_sqrt(qd.R(x2), prev.sqrt_r_x2)
        half = rp / (2.0 * d2) + qd.l1 / 2.0
        prod = w1 * w2 / (2.0 * d2)
        s1 = half - prod
        s2 = half + prod
        if abs(s1 - prev.s1) + abs(s2 - prev.s2) > abs(s2 - prev.s1) + abs(s1 - prev.s2):
            # the recorded roots drifted past a swap; keep labels continuous
            w2 = -w2
            s1, s2 = s2, s1
    return SeparationVariables(
        s1=s1, s2=s2, sqrt_r_x1=w1, sqrt_r_x2=w2, k1=qd.k1, k2=qd.k2
    )


def w_squared(qd: QuarticData, x1: complex, x2: complex, routes=("7", "7p", "10")) -> dict:
    """W^2 by up to three routes; they agree wherever defined.

    Route "7" is the direct quadratic form, "7p" the four-factor form and
    "10" the separation-variable product.  Routes "7p" and "10" need
    x1 != x2.
    """
    out: dict[str, complex] = {}
    k2sq = qd.k**2
    d2 = (x1 - x2) ** 2
    if "7" in routes:
        r1 = qd.R1_pair(x1, x2)
        out["7"] = (r1 + k2sq * d2) ** 2 - 4.0 * k2sq * qd.R(x1) * qd.R(x2)
    needs_diff = [r for r in routes if r in ("7p", "10")]
    if needs_diff:
        scale = max(abs(x1), abs(x2), 1.0)
        if abs(x1 - x2) < 1e-12 * scale:
            raise CoincidentPoints("routes 7p/10 require x1 != x2")
    if "7p" in routes:
        rp = qd.R_pair(x1, x2)
        prod = np.sqrt(complex(qd.R(x1))) * np.sqrt(complex(qd.R(x2)))
        fm = (rp - prod) / d2
        fp = (rp + prod) / d2
        out["7p"] = d2**2 * (fm**2 - k2sq) * (fp**2 - k2sq)
    if "10" in routes:
        sv = s_from_x(qd, ComplexCoordinates(x1, x2, 0, 0, 0, 0))
        out["10"] = (
            16.0
            * d2**2
            * (sv.s1 - qd.k1)
            * (sv.s2 - qd.k1)
            * (sv.s1 - qd.k2)
            * (sv.s2 - qd.k2)
        )
    return out


@dataclass(frozen=True)
class QuinticData:
    """The quintic R1(s) = -4(s-e1)(s-e2)(s-e3)(s-k1)(s-k2) and its data."""

    g2: float
    g3: float
    e1: complex
    e2: complex
    e3: complex
    k1: float
    k2: float

    @property
    def roots(self) -> np.ndarray:
        return np.array([self.e1, self.e2, self.e3, self.k1, self.k2])

    @property
    def all_real(self) -> bool:
        return bool(np.all(np.abs(np.array([self.e1, self.e2, self.e3]).imag) < 1e-12))

    def S(self, s):
        """Cubic 4s^3 - g2*s - g3."""
        return 4.0 * s**3 - self.g2 * s - self.g3

    def R1(self, s):
        """Quintic -S(s)(s - k1)(s - k2)."""
        return -self.S(s) * (s - self.k1) * (s - self.k2)

    def R1_coeffs(self) -> np.ndarray:
        """Expanded coefficients of -4*prod(s - root), highest power first."""
        return -4.0 * np.poly(self.roots)


def quintic_from_constants(l1: float, l: float, c0: float, k: float) -> QuinticData:
    """Build the quintic data from the constants of motion.

    Cubic roots are ordered e1 >= e2 >= e3 (by real part when complex).
    Raises DegenerateQuintic when two of the five branch points coincide.
    """
    g2 = k * k - c0 * c0 + 3.0 * l1 * l1
    g3 = l1 * (k * k - c0 * c0 - l1 * l1) + l * l * c0 * c0
    roots = np.roots([4.0, 0.0, -g2, -g3])
    scale = max(1.0, np.max(np.abs(roots)))
    roots = np.array([r.real if abs(r.imag) < 1e-12 * scale else r for r in roots])
    order = np.argsort(-roots.real)
    e1, e2, e3 = roots[order]
    k1 = 0.5 * (l1 + k)
    k2 = 0.5 * (l1 - k)
    qd = QuinticData(g2=g2, g3=g3, e1=e1, e2=e2, e3=e3, k1=k1, k2=k2)
    # a double cubic root splits numerically by ~sqrt(eps); the discriminant
    # catches it at full precision
    disc_scale = max(1.0, abs(g2)) ** 3
    if abs(g2**3 - 27.0 * g3**2) < 1e-10 * disc_scale:
        raise DegenerateQuintic("cubic factor has a repeated root")
    pts = qd.roots
    sc = max(1.0, np.max(np.abs(pts)))
    for i in range(5):
        for j in range(i + 1, 5):
            if abs(pts[i] - pts[j]) < 1e-10 * sc:
                raise DegenerateQuintic(
                    f"branch points {pts[i]:.6g} and {pts[j]:.6g} coincide"
                )
    return qd


@dataclass(frozen=True)
class SeparationSeries:
    """Branch-continued (s1, s2) samples along a trajectory."""

    t: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    sqrt_r_x1: np.ndarray
    sqrt_r_x2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    valid: np.ndarray  # samples away from branch points by the stated margins


def separation_series(
    qd: QuarticData,
    traj: Trajectory,
    *,
    x_margin: float = 1e-6,
    r_margin: float = 1e-12,
) -> SeparationSeries:
    """Track (s1, s2) along a trajectory with branch continuity.

    Samples with |x1 - x2| < x_margin or |R(xi)| < r_margin*scale are marked
    invalid (branch-point adjacency) but the branch state is still advanced
    whenever the value is computable.
    """
    n = len(traj)
    s1 = np.empty(n, dtype=complex)
    s2 = np.empty(n, dtype=complex)
    w1 = np.empty(n, dtype=complex)
    w2 = np.empty(n, dtype=complex)
    x1a = np.empty(n, dtype=complex)
    x2a = np.empty(n, dtype=complex)
    valid = np.ones(n, dtype=bool)
    r_scale = max(1.0, abs(qd.k0), abs(qd.l0), abs(qd.l1))

    prev: SeparationVariables | None = None
    for i in range(n):
        st = traj.state(i)
        coords = to_complex_coords(st, qd.c0)
        x1a[i], x2a[i] = coords.x1, coords.x2
        near_coincident = abs(coords.x1 - coords.x2) < x_margin
        near_root = (
            abs(qd.R(coords.x1)) < r_margin * r_scale
            or abs(qd.R(coords.x2)) < r_margin * r_scale
        )
        try:
            sv = s_from_x(qd, coords, prev)
        except CoincidentPoints:
            valid[i] = False
            s1[i] = s2[i] = w1[i] = w2[i] = np.nan
            continue
        s1[i], s2[i] = sv.s1, sv.s2
        w1[i], w2[i] = sv.sqrt_r_x1, sv.sqrt_r_x2
        if near_coincident or near_root:
            valid[i] = False
        prev = sv
    return SeparationSeries(
        t=traj.t.copy(), s1=s1, s2=s2, sqrt_r_x1=w1, sqrt_r_x2=w2, x1=x1a, x2=x2a, valid=valid
    )


def _five_point_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Centered 5-point first derivative on a uniform grid (O(h^4))."""
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-8):
        raise ValueError("5-point differences need a uniform grid")
    dy = np.full_like(y, np.nan, dtype=complex)
    dy[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12.0 * h)
    return dy


def extremum_flip_signs(t: np.ndarray, series: np.ndarray) -> np.ndarray:
    """Sign track that flips at every local extremum of a sampled real series.

    Along the real flow, sqrt(R1(s)) changes sign exactly where ds/dt does:
    at the branch-point turnings and at the passage through infinity (the
    sampled series shows a local extremum in both cases).  Flip instants are
    placed at the parabola vertex through the three samples around each
    extremum, so the sample nearest a turning gets the correct side.
    """
    x = np.real(series)
    n = x.size
    flip_times = []
    d = np.diff(x)
    for j in range(1, n - 1):
        if d[j - 1] == 0.0 or d[j] == 0.0:
            continue
        if (d[j - 1] > 0.0) != (d[j] > 0.0):
            h = 0.5 * (t[j + 1] - t[j - 1])
            denom = x[j - 1] - 2.0 * x[j] + x[j + 1]
            off = 0.0 if denom == 0.0 else 0.5 * h * (x[j - 1] - x[j + 1]) / denom
            flip_times.append(t[j] + np.clip(off, -h, h))
    signs = np.ones(n)
    cur = 1.0
    k = 0
    flip_times.sort()
    for i in range(n):
        while k < len(flip_times) and flip_times[k] <= t[i]:
            cur = -cur
            k += 1
        signs[i] = cur
    return signs


@dataclass(frozen=True)
class QuadratureReport:
    """Residuals of the two quadrature relations along a trajectory."""

    t: np.ndarray
    residual_zero: np.ndarray  # ds1/sqrt(R1(s1)) + ds2/sqrt(R1(s2))
    residual_time: np.ndarray  # s1*ds1/sqrt(R1(s1)) + s2*ds2/sqrt(R1(s2)) - 1
    valid: np.ndarray
    n_excluded: int


def quadrature_residuals(
    qd: QuarticData,
    traj: Trajectory,
    *,
    x_margin: float = 1e-6,
    r_margin: float = 1e-12,
) -> QuadratureReport:
    """Check the two differential quadrature relations by finite differences.

    Derivatives of the branch-continued s-series come from centered 5-point
    differences, so the check is independent of the chain-rule route.
    ds2/dt is differenced through the reciprocal series 1/s2, which stays
    smooth across the periodic passage of s2 through infinity (the q = 0
    branch point of the substitution).
    """
    series = separation_series(qd, traj, x_margin=x_margin, r_margin=r_margin)
    quintic = quintic_from_constants(qd.l1, qd.l, qd.c0, qd.k)
    n = series.t.size
    valid = series.valid.copy()
    valid &= np.isfinite(series.s1.real)

    inv2 = np.where(np.isfinite(series.s2), 1.0 / series.s2, np.nan)
    ds1 = _five_point_derivative(series.t, series.s1)
    ds2 = -series.s2**2 * _five_point_derivative(series.t, inv2)
    # a residual needs its whole 5-point stencil clean
    bad = ~valid
    stencil_bad = bad.copy()
    for off in (-2, -1, 1, 2):
        stencil_bad[max(0, off) : n + min(0, off)] |= bad[max(0, -off) : n - max(0, off)]
    stencil_bad[:2] = True
    stencil_bad[-2:] = True
    valid = ~stencil_bad

    if not valid.any():
        return QuadratureReport(series.t, np.full(n, np.nan), np.full(n, np.nan), valid, n)

    w1 = np.sqrt(np.asarray(quintic.R1(series.s1), dtype=complex)) * extremum_flip_signs(
        series.t, series.s1
    )
    w2 = np.sqrt(np.asarray(quintic.R1(series.s2), dtype=complex)) * extremum_flip_signs(
        series.t, inv2
    )

    # global branch orientation from the flow relation at the first clean
    # sample:  ds1/dt = sqrt(R1(s1))/(s1 - s2)  and its s2 companion.
    first = int(np.argmax(valid))
    if abs(ds1[first] * (series.s1[first] - series.s2[first]) - w1[first]) > abs(
        ds1[first] * (series.s1[first] - series.s2[first]) + w1[first]
    ):
        w1 = -w1
    if abs(ds2[first] * (series.s2[first] - series.s1[first]) - w2[first]) > abs(
        ds2[first] * (series.s2[first] - series.s1[first]) + w2[first]
    ):
        w2 = -w2

    with np.errstate(divide="ignore", invalid="ignore"):
        res0 = ds1 / w1 + ds2 / w2
        rest = series.s1 * ds1 / w1 + series.s2 * ds2 / w2 - 1.0
    return QuadratureReport(
        t=series.t,
        residual_zero=res0,
        residual_time=rest,
        valid=valid,
        n_excluded=int(n - valid.sum()),
    )
