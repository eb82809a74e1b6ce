"""Points on the real projective line in homogeneous coordinates.

Joint angles enter all computations through the half-angle tangent
x = tan(phi/2), which sweeps the projective line RP^1 as phi sweeps
the circle. Folded-flat states sit at x = infinity, so every formula
here is kept homogeneous: a point is a unit-norm pair (p, q) with
x = p/q and the convention q >= 0 (and p = 1 when q = 0).
"""

from __future__ import annotations

import math

from .errors import DegenerateBranch, InconsistentInput, NoRealSolution


class ProjectiveReal:
    """A point of RP^1 as a normalized homogeneous pair (p, q)."""

    __slots__ = ("p", "q")

    def __init__(self, p: float, q: float):
        n = math.hypot(p, q)
        if n == 0.0 or not math.isfinite(n):
            raise InconsistentInput(f"invalid homogeneous pair ({p}, {q})")
        p, q = p / n, q / n
        if q < 0.0 or (q == 0.0 and p < 0.0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q if q != 0.0 else 0.0)

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveReal is immutable")

    @classmethod
    def from_value(cls, x: float) -> "ProjectiveReal":
        if math.isinf(x):
            return cls(1.0, 0.0)
        return cls(x, 1.0)

    @classmethod
    def from_angle(cls, phi: float) -> "ProjectiveReal":
        # tan(phi/2) in homogeneous form; phi = pi maps to infinity
        p, q = math.sin(0.5 * phi), math.cos(0.5 * phi)
        if abs(q) < 4e-16 * abs(p):
            q = 0.0
        return cls(p, q)

    @classmethod
    def infinity(cls) -> "ProjectiveReal":
        return cls(1.0, 0.0)

    @property
    def value(self) -> float:
        if self.q == 0.0:
            return math.inf
        return self.p / self.q

    @property
    def angle(self) -> float:
        # principal angle in (-pi, pi]
        return 2.0 * math.atan2(self.p, self.q)

    @property
    def is_infinite(self) -> bool:
        return self.q == 0.0

    def apply(self, m) -> "ProjectiveReal":
        """Image under the fractional-linear map with matrix [[a, b], [c, d]]."""
        (a, b), (c, d) = m
        return ProjectiveReal(a * self.p + b * self.q, c * self.p + d * self.q)

    def chordal(self, other: "ProjectiveReal") -> float:
        """Chordal distance |p1 q2 - p2 q1|; both points are unit pairs."""
        return abs(self.p * other.q - other.p * self.q)

    def isclose(self, other: "ProjectiveReal", tol: float = 1e-9) -> bool:
        return self.chordal(other) <= tol

    def __neg__(self) -> "ProjectiveReal":
        return ProjectiveReal(-self.p, self.q)

    def __repr__(self) -> str:
        if self.is_infinite:
            return "ProjectiveReal(inf)"
        return f"ProjectiveReal({self.value:.12g})"


def solve_quadratic(A: float, B: float, C: float, tol: float = 1e-12):
    """Real roots of A x^2 + B x + C = 0 on the projective line.

    Returns a list of two ProjectiveReal roots (a double root twice).
    The leading coefficient may vanish: the lost root reappears at
    infinity. Raises NoRealSolution for negative discriminant beyond
    tolerance and DegenerateBranch when all coefficients vanish.
    """
    if A == 0.0 and B == 0.0:
        if C == 0.0:
            raise DegenerateBranch("identically zero quadratic")
        # C q^2 = 0 forces q = 0: double root at infinity
        inf = ProjectiveReal.infinity()
        return [inf, inf]
    if A == 0.0:
        return [ProjectiveReal(-C, B), ProjectiveReal.infinity()]
    D = B * B - 4.0 * A * C
    scale = max(B * B, abs(4.0 * A * C))
    if D < -tol * scale:
        raise NoRealSolution(f"negative discriminant {D:.3g}")
    if D <= tol * scale:
        r = ProjectiveReal(-B, 2.0 * A)
        return [r, r]
    s = math.sqrt(D)
    # shift the subtraction cancellation into the smaller root's numerator
    qq = -0.5 * (B + math.copysign(s, B)) if B != 0.0 else 0.5 * s
    return [ProjectiveReal(qq, A), ProjectiveReal(C, qq)]
