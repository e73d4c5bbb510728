"""Root classification for the quartic R(x) = -x^4 + 6*l1*x^2 + 4*l0*x + k0.

Here k0 = c0^2 - k^2 and l0 = c0*l.  Classification goes through the
invariants of the binary quartic; a companion-matrix solve provides the
independent numeric oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuarticInvariants",
    "RootClass",
    "ThresholdPair",
    "invariants",
    "classify",
    "thresholds",
    "numeric_roots",
]


class RootClass(enum.Enum):
    FOUR_REAL = "FourReal"
    FOUR_IMAGINARY = "FourImaginary"
    TWO_REAL_TWO_IMAGINARY = "TwoRealTwoImaginary"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class QuarticInvariants:
    """Invariants of A*x^4 + 4B*x^3 + 6C*x^2 + 4B'*x + A' for our coefficients."""

    A: float
    B: float
    C: float
    Bp: float
    Ap: float
    g2: float
    g3: float
    D: float
    E: float
    G: float

    def cubic_relation_residual(self) -> float:
        """Residual of 4(D/A)^3 - g2*(D/A) - g3 = E^2/A^3."""
        da = self.D / self.A
        lhs = 4.0 * da**3 - self.g2 * da - self.g3
        rhs = self.E**2 / self.A**3
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


@dataclass(frozen=True)
class ThresholdPair:
    """Transition values of l0^2 separating the root-count regimes."""

    l0p_sq: complex
    l0pp_sq: complex

    def identity_residual(self, l1: float, k0: float) -> float:
        lhs = l1**2 * (k0 + l1**2) ** 2
        rhs = k0 * (k0 + 9.0 * l1**2) ** 2 / 27.0 + ((-k0 + 3.0 * l1**2) / 3.0) ** 3
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


def invariants(l1: float, k0: float, l0: float) -> QuarticInvariants:
    """Quartic invariants for coefficients (A, B, C, B', A') = (-1, 0, l1, l0, k0)."""
    A, B, C, Bp, Ap = -1.0, 0.0, l1, l0, k0
    g2 = A * Ap - 4.0 * B * Bp + 3.0 * C * C
    g3 = A * C * Ap + 2.0 * B * C * Bp - A * Bp * Bp - Ap * B * B - C**3
    D = B * B - A * C
    E = A * A * Bp - 3.0 * A * B * C + 2.0 * B**3
    G = g2**3 - 27.0 * g3**2
    return QuarticInvariants(A=A, B=B, C=C, Bp=Bp, Ap=Ap, g2=g2, g3=g3, D=D, E=E, G=G)


def _g_scale(inv: QuarticInvariants) -> float:
    return max(1.0, abs(inv.g2) ** 3, 27.0 * inv.g3**2)


def classify(l1: float, k0: float, l0: float, *, margin: float = 1e-9) -> RootClass:
    """Classify the quartic roots from the sign of G and the auxiliary conditions.

    G < 0 gives two real roots; G > 0 gives four real roots exactly when
    B^2 - AC > 0 and 12(B^2 - AC)^2 - A^2 g2 > 0, else four imaginary.
    |G| below margin*scale is reported as Degenerate rather than guessed.
    """
    inv = invariants(l1, k0, l0)
    if abs(inv.G) < margin * _g_scale(inv):
        return RootClass.DEGENERATE
    if inv.G < 0.0:
        return RootClass.TWO_REAL_TWO_IMAGINARY
    d = inv.D
    aux = 12.0 * d * d - inv.A**2 * inv.g2
    if d > 0.0 and aux > 0.0:
        return RootClass.FOUR_REAL
    return RootClass.FOUR_IMAGINARY


def thresholds(l1: float, k0: float) -> ThresholdPair:
    """Both l0^2 transition values; complex when the radicand is negative."""
    rad = complex((-k0 + 3.0 * l1 * l1) / 3.0) ** 1.5
    base = l1 * (k0 + l1 * l1)
    return ThresholdPair(l0p_sq=base + rad, l0pp_sq=base - rad)


def numeric_roots(l1: float, k0: float, l0: float) -> np.ndarray:
    """Companion-matrix roots of the quartic, polished by one Newton step."""
    coeffs = np.array([-1.0, 0.0, 6.0 * l1, 4.0 * l0, k0])
    roots = np.roots(coeffs)
    der = np.polyder(coeffs)
    val = np.polyval(coeffs, roots)
    slope = np.polyval(der, roots)
    ok = np.abs(slope) > 1e-300
    roots[ok] = roots[ok] - val[ok] / slope[ok]
    return roots


def real_root_count(l1: float, k0: float, l0: float, *, imag_tol: float = 1e-7) -> int:
    roots = numeric_roots(l1, k0, l0)
    scale = max(1.0, np.max(np.abs(roots)))
    return int(np.sum(np.abs(roots.imag) < imag_tol * scale))
