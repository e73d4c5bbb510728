"""Meromorphic-ansatz analysis: leading balances, resonances, integrability.

The ansatz p, q, r ~ t^-1 and gamma, gamma', gamma'' ~ t^-2 leads to an
algebraic system for the leading coefficients and, per order m, to a linear
system whose 6x6 determinant is a degree-6 polynomial in m.  Integrability
of the three classical cases shows up as all-integer resonance spectra.

Weight enters only through the products Mg*(x0, y0, z0); the analysis
normalizes to Mg = 1 internally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    AllZeroCenter,
    DegenerateInertia,
    MuZero,
    NotDegenerate,
    SingularLeading,
)
from .euler_poisson import BodyParameters

__all__ = [
    "BalanceFamily",
    "LeadingBalance",
    "ResonanceSpectrum",
    "PainleveCase",
    "PainleveVerdict",
    "solve_lambda",
    "leading_coefficients",
    "degenerate_balances",
    "euler_balances",
    "resonance_polynomial",
    "painleve_test",
]


class BalanceFamily(enum.Enum):
    GENERIC = "Generic"
    DEGENERATE_I = "DegenerateI"
    DEGENERATE_II = "DegenerateII"
    EULER = "Euler"


@dataclass(frozen=True)
class LeadingBalance:
    """Leading Laurent coefficients of one pole family."""

    p0: complex
    q0: complex
    r0: complex
    f0: complex
    g0: complex
    h0: complex
    family: BalanceFamily
    eps: int = 1
    lam: complex = 0.0
    mu: complex = 0.0

    @property
    def lambda0(self) -> complex:
        """(p0^2 + q0^2 + r0^2)/2; equals -2 for gamma-pole balances."""
        return 0.5 * (self.p0**2 + self.q0**2 + self.r0**2)

    def coefficients(self) -> tuple[complex, ...]:
        return (self.p0, self.q0, self.r0, self.f0, self.g0, self.h0)

    def system_residual(self, params: BodyParameters) -> float:
        """Max residual of the six leading-order balance equations."""
        A, B, C = params.A, params.B, params.C
        X0, Y0, Z0 = params.mg * params.x0, params.mg * params.y0, params.mg * params.z0
        p0, q0, r0, f0, g0, h0 = self.coefficients()
        eqs = (
            A * p0 + (B - C) * q0 * r0 + Y0 * h0 - Z0 * g0,
            B * q0 + (C - A) * r0 * p0 + Z0 * f0 - X0 * h0,
            C * r0 + (A - B) * p0 * q0 + X0 * g0 - Y0 * f0,
            2.0 * f0 + r0 * g0 - q0 * h0,
            2.0 * g0 + p0 * h0 - r0 * f0,
            2.0 * h0 + q0 * f0 - p0 * g0,
        )
        return max(abs(e) for e in eqs)


def _weights(params: BodyParameters) -> tuple[float, float, float]:
    return params.mg * params.x0, params.mg * params.y0, params.mg * params.z0


def _abc(params: BodyParameters, lam: complex, signs) -> tuple[complex, complex, complex]:
    A, B, C = params.A, params.B, params.C
    a = signs[0] * np.sqrt((2.0 * A + lam) / (B - C))
    b = signs[1] * np.sqrt((2.0 * B + lam) / (C - A))
    c = signs[2] * np.sqrt((2.0 * C + lam) / (A - B))
    return a, b, c


def _lambda_equation(params: BodyParameters, lam: complex, signs) -> complex:
    X0, Y0, Z0 = _weights(params)
    A, B, C = params.A, params.B, params.C
    a, b, c = _abc(params, lam, signs)
    return X0 * (A + lam) * b * c + Y0 * (B + lam) * c * a - Z0 * (C + lam) * a * b


def solve_lambda(
    params: BodyParameters, signs: tuple[int, int, int], *, residual_tol: float = 1e-10
) -> list[complex]:
    """All lambda values for one sign choice of (a, b, c).

    The sign-dependent equation is turned into a polynomial by multiplying
    over the sign classes (degree 8); candidate roots are kept when they
    satisfy the original equation under the requested signs.  Roots agreeing
    within 1e-9 relative are deduplicated.
    """
    A, B, C = params.A, params.B, params.C
    A1, B1, C1 = B - C, C - A, A - B
    if min(abs(A1), abs(B1), abs(C1)) < params.eq_rtol * max(A, B, C):
        raise DegenerateInertia("A1, B1, C1 must all be nonzero")
    X0, Y0, Z0 = _weights(params)
    if X0 == 0.0 and Y0 == 0.0 and Z0 == 0.0:
        raise AllZeroCenter("equation vanishes identically (Euler case)")

    def lin(u, v):  # coefficients of (u + lam), increasing order
        return np.array([u, v], dtype=float)

    x2 = npoly.polymul(npoly.polymul(lin(A, 1), lin(A, 1)), npoly.polymul(lin(2 * B, 1), lin(2 * C, 1)))
    y2 = npoly.polymul(npoly.polymul(lin(B, 1), lin(B, 1)), npoly.polymul(lin(2 * C, 1), lin(2 * A, 1)))
    z2 = npoly.polymul(npoly.polymul(lin(C, 1), lin(C, 1)), npoly.polymul(lin(2 * A, 1), lin(2 * B, 1)))
    x2 = x2 * (X0**2 / (B1 * C1))
    y2 = y2 * (Y0**2 / (C1 * A1))
    z2 = z2 * (Z0**2 / (A1 * B1))
    # product of the sign-class variants of X + Y - Z:
    # X^4 - 2 X^2 (Y^2 + Z^2) + (Y^2 - Z^2)^2
    prod = npoly.polysub(
        npoly.polyadd(npoly.polymul(x2, x2), npoly.polymul(npoly.polysub(y2, z2), npoly.polysub(y2, z2))),
        2.0 * npoly.polymul(x2, npoly.polyadd(y2, z2)),
    )
    prod = np.trim_zeros(prod, "b")
    if prod.size < 2:
        raise AllZeroCenter("lambda polynomial degenerated")
    candidates = npoly.polyroots(prod)

    scale = max(1.0, abs(X0), abs(Y0), abs(Z0)) * max(1.0, A, B, C) ** 2
    out: list[complex] = []
    for lam in candidates:
        if abs(_lambda_equation(params, lam, signs)) < residual_tol * scale:
            if not any(abs(lam - seen) <= 1e-9 * max(1.0, abs(seen)) for seen in out):
                out.append(complex(lam))
    return out


def leading_coefficients(
    params: BodyParameters, lam: complex, signs: tuple[int, int, int]
) -> LeadingBalance:
    """Leading coefficients of the generic pole family for a solved lambda."""
    A, B, C = params.A, params.B, params.C
    A1, B1, C1 = B - C, C - A, A - B
    X0, Y0, Z0 = _weights(params)
    a, b, c = _abc(params, lam, signs)
    p0, q0, r0 = b * c, c * a, -a * b
    mu = A * X0 * p0 + B * Y0 * q0 + C * Z0 * r0
    lam_eff = 0.5 * (A * p0**2 + B * q0**2 + C * r0**2)
    if abs(mu) < 1e-12 * max(1.0, abs(lam_eff)):
        raise MuZero("gamma leading coefficients undefined for mu = 0")
    f0 = -A1 * q0 * r0 * lam_eff / mu
    g0 = -B1 * r0 * p0 * lam_eff / mu
    h0 = -C1 * p0 * q0 * lam_eff / mu
    return LeadingBalance(
        p0=p0, q0=q0, r0=r0, f0=f0, g0=g0, h0=h0,
        family=BalanceFamily.GENERIC, lam=complex(lam), mu=complex(mu),
    )


def degenerate_balances(params: BodyParameters, *, p0_free: complex = 0.0) -> list[LeadingBalance]:
    """The two pole families of the symmetric case A = B (y0 = 0 assumed).

    Labels follow the direction-cosine discussion: system I has r0 = 0 and
    q0 = 2i*eps; system II has r0 = 2i*eps.  In the Kovalevskaya subcase
    (A = 2C, z0 = 0) the system-II leading coefficient p0 is a free
    parameter of the family; ``p0_free`` selects the representative.
    """
    A, B, C = params.A, params.B, params.C
    if abs(A - B) > params.eq_rtol * max(A, B):
        raise NotDegenerate("degenerate balances need A = B")
    X0, Y0, Z0 = _weights(params)
    if abs(Y0) > 1e-14 * max(1.0, abs(X0), abs(Z0)):
        raise NotDegenerate("rotate axes so that y0 = 0 first")
    out = []
    for eps in (1, -1):
        # system I: r0 = 0
        q0 = 2j * eps
        if X0 == 0.0 and Z0 == 0.0:
            raise AllZeroCenter("center at the fixed point")
        h0 = 2j * eps * A / (X0 - 1j * eps * Z0)
        f0 = 1j * eps * h0
        out.append(
            LeadingBalance(
                p0=0.0, q0=q0, r0=0.0, f0=f0, g0=0.0, h0=h0,
                family=BalanceFamily.DEGENERATE_I, eps=eps,
            )
        )
    for eps in (1, -1):
        # system II: r0 = 2i*eps, h0 = 0; needs x0 != 0
        if X0 == 0.0:
            continue  # Lagrange: only system I exists
        r0 = 2j * eps
        g0 = -C * r0 / X0
        f0 = -2.0 * C / X0
        if abs(A - 2.0 * C) > params.eq_rtol * max(A, C):
            p0 = 2j * eps * C * Z0 / (X0 * (A - 2.0 * C))
        else:
            if abs(Z0) > 1e-14 * max(1.0, abs(X0)):
                continue  # A = 2C with z0 != 0: no consistent system II
            p0 = complex(p0_free)
        out.append(
            LeadingBalance(
                p0=p0, q0=1j * eps * p0, r0=r0, f0=f0, g0=g0, h0=0.0,
                family=BalanceFamily.DEGENERATE_II, eps=eps,
            )
        )
    return out


def euler_balances(params: BodyParameters) -> list[LeadingBalance]:
    """Pole families of the zero-center case (gamma has no pole there)."""
    A, B, C = params.A, params.B, params.C
    A1, B1, C1 = B - C, C - A, A - B
    if min(abs(A1), abs(B1), abs(C1)) < params.eq_rtol * max(A, B, C):
        raise DegenerateInertia("symmetric zero-center case has no pole family")
    out = []
    for sp in (1, -1):
        for sq in (1, -1):
            p0 = sp * np.sqrt(complex(B * C / (B1 * C1)))
            q0 = sq * np.sqrt(complex(C * A / (C1 * A1)))
            r0 = -A * p0 / (A1 * q0)
            out.append(
                LeadingBalance(
                    p0=p0, q0=q0, r0=r0, f0=0.0, g0=0.0, h0=0.0,
                    family=BalanceFamily.EULER, eps=sp,
                )
            )
    return out


def _resonance_matrix(params: BodyParameters, bal: LeadingBalance, m: complex) -> np.ndarray:
    """Linear system for the order-m coefficients (unknowns p_m ... h_m)."""
    A, B, C = params.A, params.B, params.C
    A1, B1, C1 = B - C, C - A, A - B
    X0, Y0, Z0 = _weights(params)
    p0, q0, r0, f0, g0, h0 = bal.coefficients()
    return np.array(
        [
            [(m - 1) * A, -A1 * r0, -A1 * q0, 0.0, Z0, -Y0],
            [-B1 * r0, (m - 1) * B, -B1 * p0, -Z0, 0.0, X0],
            [-C1 * q0, -C1 * p0, (m - 1) * C, Y0, -X0, 0.0],
            [0.0, h0, -g0, m - 2, -r0, q0],
            [-h0, 0.0, f0, r0, m - 2, -p0],
            [g0, -f0, 0.0, -q0, p0, m - 2],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class ResonanceSpectrum:
    """Degree-6 determinant polynomial in m and its root structure."""

    poly: np.ndarray  # seven coefficients, increasing order
    roots: np.ndarray
    integer_roots: tuple[int, ...]
    all_integral: bool
    family: BalanceFamily
    eps: int = 1

    @property
    def degree_ok(self) -> bool:
        return abs(self.poly[6]) > 1e-10 * max(1.0, np.max(np.abs(self.poly)))

    @property
    def nonnegative_count(self) -> int:
        """Nonnegative integer roots counted with multiplicity."""
        return sum(1 for k in self.integer_roots if k >= 0)


def resonance_polynomial(
    params: BodyParameters,
    bal: LeadingBalance,
    *,
    int_tol: float = 1e-6,
) -> ResonanceSpectrum:
    """Resonance polynomial det M(m) by evaluation at m = 0..6 + interpolation.

    Roots come from the companion matrix and get one Newton polish; integer
    detection is then made multiplicity-safe by checking that the monic
    polynomial equals the product over the rounded roots (relative
    coefficient residual < 1e-8).  A triple root (the zero-center case)
    scatters its companion eigenvalues by far more than its own accuracy,
    so the product test is the robust gate while |root - nearest integer|
    < ``int_tol`` still decides for well-separated roots.
    """
    ms = np.arange(7.0)
    dets = np.array([np.linalg.det(_resonance_matrix(params, bal, m)) for m in ms])
    vander = np.vander(ms, 7, increasing=True).astype(float)
    coef = np.linalg.solve(vander, dets)
    lead = params.A * params.B * params.C
    if abs(coef[6]) < 1e-10 * max(1.0, abs(lead)):
        raise SingularLeading("degree-6 coefficient vanished")

    roots = npoly.polyroots(coef)
    dcoef = npoly.polyder(coef)
    val = npoly.polyval(roots, coef)
    slope = npoly.polyval(roots, dcoef)
    ok = np.abs(slope) > 1e-300
    roots = roots.copy()
    roots[ok] -= val[ok] / slope[ok]

    # per-root detection at the stated tolerance
    near = [
        int(round(r.real))
        for r in roots
        if abs(r.imag) < 10 * int_tol and abs(r.real - round(r.real)) < int_tol
    ]
    # multiplicity-safe gate: compare against the product over rounded roots
    cluster = np.round(roots.real).astype(int)
    clustered = np.all(np.abs(roots.real - cluster) < 1e-3) and np.all(np.abs(roots.imag) < 1e-3)
    all_integral = False
    integer_roots: tuple[int, ...] = tuple(sorted(near))
    if clustered:
        candidate = coef[6] * npoly.polyfromroots(cluster.astype(float))
        rel = np.max(np.abs(candidate - coef)) / max(np.max(np.abs(coef)), 1e-300)
        if rel < 1e-8:
            all_integral = True
            integer_roots = tuple(sorted(int(k) for k in cluster))
    return ResonanceSpectrum(
        poly=coef,
        roots=roots,
        integer_roots=integer_roots,
        all_integral=all_integral,
        family=bal.family,
        eps=bal.eps,
    )


class PainleveCase(enum.Enum):
    EULER = "Euler"
    LAGRANGE = "Lagrange"
    KOVALEVSKAYA = "Kovalevskaya"
    GENERAL = "General"


@dataclass(frozen=True)
class PainleveVerdict:
    """Outcome of the meromorphic-solution test for one parameter set."""

    case: PainleveCase
    passes: bool
    spectra: tuple[ResonanceSpectrum, ...]
    distinct_nonnegative: tuple[int, ...]
    reason: str = ""

    @property
    def max_family_count(self) -> int:
        return max((s.nonnegative_count for s in self.spectra), default=0)


def _classify_parameters(params: BodyParameters) -> PainleveCase:
    X0, Y0, Z0 = _weights(params)
    zero = 1e-14 * max(1.0, abs(X0), abs(Y0), abs(Z0))
    if abs(X0) < zero and abs(Y0) < zero and abs(Z0) < zero:
        return PainleveCase.EULER
    if params.is_kovalevskaya:
        return PainleveCase.KOVALEVSKAYA
    if params.is_lagrange:
        return PainleveCase.LAGRANGE
    return PainleveCase.GENERAL


def _balances_for(params: BodyParameters) -> list[LeadingBalance]:
    A, B, C = params.A, params.B, params.C
    X0, Y0, Z0 = _weights(params)
    zero_center = max(abs(X0), abs(Y0), abs(Z0)) < 1e-14
    if zero_center:
        return euler_balances(params)
    if abs(A - B) <= params.eq_rtol * max(A, B):
        return degenerate_balances(params)
    bals: list[LeadingBalance] = []
    seen: list[tuple[complex, complex, complex]] = []
    for signs in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        for lam in solve_lambda(params, signs):
            try:
                bal = leading_coefficients(params, lam, signs)
            except MuZero:
                continue
            key = (bal.p0, bal.q0, bal.r0)
            if any(
                abs(key[0] - s[0]) + abs(key[1] - s[1]) + abs(key[2] - s[2]) < 1e-9
                for s in seen
            ):
                continue
            seen.append(key)
            bals.append(bal)
    return bals


def painleve_test(params: BodyParameters) -> PainleveVerdict:
    """Classify the parameters and check the integer-resonance condition.

    A parameter set passes when every pole family has an all-integer
    resonance spectrum bounded below by -1 and at least one family carries
    five nonnegative integer resonances counted with multiplicity (the five
    free constants besides the pole location).  The Kovalevskaya families
    jointly realize the five distinct values {0, 1, 2, 3, 4}.
    """
    case = _classify_parameters(params)
    try:
        balances = _balances_for(params)
    except (DegenerateInertia, AllZeroCenter, NotDegenerate) as exc:
        return PainleveVerdict(
            case=case, passes=False, spectra=(), distinct_nonnegative=(),
            reason=f"no usable pole family: {exc}",
        )
    if not balances:
        return PainleveVerdict(
            case=case, passes=False, spectra=(), distinct_nonnegative=(),
            reason="no pole family found",
        )
    spectra = tuple(resonance_polynomial(params, b) for b in balances)
    reasons = []
    ok = True
    for s in spectra:
        if not s.all_integral:
            ok = False
            reasons.append(f"{s.family.value}: non-integer resonances")
        elif s.integer_roots and min(s.integer_roots) < -1:
            ok = False
            reasons.append(f"{s.family.value}: resonance below -1")
    distinct = tuple(
        sorted({k for s in spectra if s.all_integral for k in s.integer_roots if k >= 0})
    )
    if ok and max(s.nonnegative_count for s in spectra) < 5:
        ok = False
        reasons.append("fewer than five nonnegative resonances in every family")
    if ok and case is PainleveCase.GENERAL:
        # only the three named cases count as passing
        ok = False
        reasons.append("integer resonances for unclassified parameters")
    return PainleveVerdict(
        case=case,
        passes=ok,
        spectra=spectra,
        distinct_nonnegative=distinct,
        reason="; ".join(reasons),
    )
