"""Physical realization: mounting a body so the symmetric-top ratio holds.

Given the central principal moments (A1, B1, C1) and total mass M, the
fixed point is moved a distance `a` along the first central axis.  The
parallel-axis shift then produces moments (A1, B1 + M a^2, C1 + M a^2)
about the mount, and the target configuration A = B = 2C is reachable
exactly when A1 = 2(B1 - C1) with B1 > 2C1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConditionViolated, NotRealizable

__all__ = ["InertiaTriple", "MountSpec", "design_mount", "verify_mount"]


@dataclass(frozen=True)
class InertiaTriple:
    """Central principal moments and the total mass."""

    A1: float
    B1: float
    C1: float
    M: float = 1.0

    def __post_init__(self):
        if min(self.A1, self.B1, self.C1) <= 0.0 or self.M <= 0.0:
            raise ValueError("moments and mass must be positive")
        t = (self.A1, self.B1, self.C1)
        for i in range(3):
            if t[i] > t[(i + 1) % 3] + t[(i + 2) % 3] + 1e-12 * max(t):
                warnings.warn("central moments violate the triangle inequalities", stacklevel=2)


@dataclass(frozen=True)
class MountSpec:
    """Mount offset along the first central axis and the resulting moments."""

    a: float
    A: float  # moment about the mount, first axis
    B: float
    C: float


def design_mount(t: InertiaTriple, *, rtol: float = 1e-10) -> MountSpec:
    """Mount offset realizing A = B = 2C about the fixed point.

    Requires A1 = 2(B1 - C1) within ``rtol`` relative and B1 > 2C1 so that
    a^2 = (A1 - B1)/M is positive.
    """
    target = 2.0 * (t.B1 - t.C1)
    if abs(t.A1 - target) > rtol * max(abs(t.A1), abs(target), 1.0):
        raise ConditionViolated(
            f"A1 = {t.A1:.6g} but 2(B1 - C1) = {target:.6g}"
        )
    a_sq = (t.A1 - t.B1) / t.M
    if a_sq <= 0.0:
        raise NotRealizable("B1 <= 2C1 gives a nonpositive offset square")
    a = float(np.sqrt(a_sq))
    return MountSpec(a=a, A=t.A1, B=t.B1 + t.M * a_sq, C=t.C1 + t.M * a_sq)


@dataclass(frozen=True)
class MountReport:
    """Re-derived moments and the defect of the target relations."""

    moments: tuple[float, float, float]
    b_defect: float       # B1 + M a^2 - A1
    c_defect: float       # C1 + M a^2 - A1/2
    off_diagonal_zero: bool
    symmetric_top: bool
    center_on_first_axis: bool

    @property
    def max_defect(self) -> float:
        return max(abs(self.b_defect), abs(self.c_defect))


def verify_mount(t: InertiaTriple, spec: MountSpec, *, b: float = 0.0, c: float = 0.0) -> MountReport:
    """Recompute the moments at the mount and check the target relations.

    Nonzero transverse offsets (b, c) are rejected: the products of inertia
    M*a*b, M*b*c, M*c*a cannot vanish with the axis conditions, so only a
    mount on the first central axis can work.
    """
    Ma2 = t.M * spec.a**2
    A = t.A1 + t.M * (b * b + c * c)
    B = t.B1 + t.M * (c * c + spec.a**2)
    C = t.C1 + t.M * (spec.a**2 + b * b)
    off_zero = (t.M * b * c == 0.0) and (t.M * c * spec.a == 0.0) and (t.M * spec.a * b == 0.0)
    b_defect = t.B1 + Ma2 - t.A1
    c_defect = t.C1 + Ma2 - 0.5 * t.A1
    sym = abs(A - B) <= 1e-12 * max(A, B) and abs(A - 2 * C) <= 1e-12 * max(A, 2 * C)
    return MountReport(
        moments=(A, B, C),
        b_defect=b_defect,
        c_defect=c_defect,
        off_diagonal_zero=off_zero,
        symmetric_top=sym and b == 0.0 and c == 0.0,
        center_on_first_axis=(b == 0.0 and c == 0.0),
    )
