"""Coupling of two vertex configuration spaces across a mesh edge.

Two spherical quads meeting along a hinge share that hinge's fold
variable up to a constant offset angle; in half-tangent coordinates the
offset acts as a Moebius map. When the two quads' diagonal-fold
involutions agree through that map the coupling is involutive, the pair
of biquadratics descends to a single rational equation between the two
outer fold variables, and the symmetric coordinate w = x + m/x
transforms by another Moebius map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EvaluationAtPole, InconsistentInput
from .projective import ProjectiveReal

QE_ELLIPTIC_ELLIPTIC = "elliptic-elliptic"
QE_ELLIPTIC_DELTOID = "elliptic-deltoid"
QE_DELTOID_DELTOID = "deltoid-deltoid"


def _as_point(value) -> ProjectiveReal:
    if isinstance(value, ProjectiveReal):
        return value
    return ProjectiveReal.from_value(float(value))


def mobius(F, x: ProjectiveReal) -> ProjectiveReal:
    """Offset map y = (x + F)/(1 - F x); F = 0 is the identity.

    F may be a real, math.inf, or a ProjectiveReal; F at infinity sends
    x to -1/x.
    """
    f = _as_point(F)
    return x.apply(((f.q, f.p), (-f.p, f.q)))


def is_involutive(F, lambda_prev: float, lambda_next: float,
                  tol: float = 1e-10) -> bool:
    """Whether the two diagonal folds agree through the offset map.

    F = 0 needs equal factors; finite nonzero F needs both equal to -1;
    infinite F needs reciprocal factors.
    """
    f = _as_point(F)
    if f.is_infinite:
        return abs(lambda_prev * lambda_next - 1.0) <= tol
    if f.p == 0.0:
        return abs(lambda_prev - lambda_next) <= tol
    return abs(lambda_prev + 1.0) <= tol and abs(lambda_next + 1.0) <= tol


def induced_involution(F, lambda_next: float, x: ProjectiveReal) -> ProjectiveReal:
    """The next quad's fold x -> lambda/x pulled back through the offset."""
    f = _as_point(F)
    p, q = f.p, f.q
    m = (
        (-(lambda_next + 1.0) * p * q, lambda_next * q * q - p * p),
        (q * q - lambda_next * p * p, (lambda_next + 1.0) * p * q),
    )
    return x.apply(m)


def w_transform(w, t, k: float = 1.0) -> ProjectiveReal:
    """Symmetric-coordinate transport w' = k (2w + 4t)/(2 - t w).

    w and t may be reals, math.inf, or ProjectiveReal; the infinite-t
    limit w' = -4k/w falls out of the homogeneous coefficients.
    """
    wp = _as_point(w)
    tp = _as_point(t)
    m = (
        (2.0 * k * tp.q, 4.0 * k * tp.p),
        (-tp.p, 2.0 * tp.q),
    )
    return wp.apply(m)


def t_of(F) -> ProjectiveReal:
    """Angle doubling t = 2F/(1 - F^2), infinite when F = +-1."""
    f = _as_point(F)
    return ProjectiveReal(2.0 * f.p * f.q, f.q * f.q - f.p * f.p)


def principal_F(t) -> ProjectiveReal:
    """The offset with |F| <= 1 mapping to a given t; -1/F is the other."""
    tp = _as_point(t)
    return ProjectiveReal.from_angle(math.atan2(tp.p, tp.q))


@dataclass(frozen=True)
class Coupling:
    """Hinge offset between adjacent quads, optionally with its two
    Euclidean dihedral summands tau and zeta (F = tan((tau+zeta)/2)).

    k is the multiplier the quotient equations pick up from an infinite
    offset; it stays 1 for finite F.
    """

    F: ProjectiveReal
    k: float = 1.0
    tau: float | None = None
    zeta: float | None = None

    def __post_init__(self):
        if not self.F.is_infinite and self.k != 1.0:
            raise InconsistentInput("k differs from 1 on a finite offset")
        if (self.tau is None) != (self.zeta is None):
            raise InconsistentInput("tau and zeta only come together")
        if self.tau is not None:
            target = ProjectiveReal.from_angle(self.tau + self.zeta)
            if self.F.chordal(target) > 1e-12:
                raise InconsistentInput("F does not match tan((tau+zeta)/2)")

    @property
    def t(self) -> ProjectiveReal:
        return t_of(self.F)

    @property
    def t_value(self) -> float:
        return self.t.value


def make_coupling(F, lambda_next: float | None = None, tau: float | None = None,
                  zeta: float | None = None) -> Coupling:
    """Coupling with the k multiplier filled in from the next factor."""
    f = _as_point(F)
    if not f.is_infinite:
        return Coupling(f, 1.0, tau, zeta)
    if lambda_next is None:
        raise InconsistentInput("infinite offset needs lambda_next for k")
    return Coupling(f, -lambda_next, tau, zeta)


@dataclass(frozen=True)
class QuotientEquation:
    """One rational equation in the two outer fold variables (x1, x3).

    The kind tag picks among the three shapes: both quads elliptic, the
    second an (anti)deltoid, or both (anti)deltoids, each laterally
    coupled. t and k belong to the middle coupling, F_out converts x3 to
    the second quad's own variable. The xi slots hold the tabulated apex
    invariants; as in the single-quad factored equation, each apex term
    is applied with the extra sign n.
    """

    kind: str
    t: ProjectiveReal
    k: float
    F_out: ProjectiveReal
    mu1: float | None = None
    nu1: float | None = None
    mu2: float | None = None
    nu2: float | None = None
    xi1: float | None = None
    n1: int | None = None
    xi2: float | None = None
    n2: int | None = None


def elliptic_elliptic(mu1, nu1, mu2, nu2, t, k=1.0, F_out=0.0) -> QuotientEquation:
    return QuotientEquation(QE_ELLIPTIC_ELLIPTIC, _as_point(t), k,
                            _as_point(F_out), mu1=mu1, nu1=nu1,
                            mu2=mu2, nu2=nu2)


def elliptic_deltoid(mu1, nu1, xi2, n2, t, k=1.0, F_out=0.0) -> QuotientEquation:
    return QuotientEquation(QE_ELLIPTIC_DELTOID, _as_point(t), k,
                            _as_point(F_out), mu1=mu1, nu1=nu1,
                            xi2=xi2, n2=n2)


def deltoid_deltoid(xi1, n1, xi2, n2, t, k=1.0, F_out=0.0) -> QuotientEquation:
    return QuotientEquation(QE_DELTOID_DELTOID, _as_point(t), k,
                            _as_point(F_out), xi1=xi1, n1=n1,
                            xi2=xi2, n2=n2)


def _lhs_fraction(eq: QuotientEquation, x1: ProjectiveReal):
    """Homogeneous (numerator, denominator) of the x1-side fraction."""
    p, q = x1.p, x1.q
    pt, qt = eq.t.p, eq.t.q
    if eq.kind == QE_DELTOID_DELTOID:
        xp, xq = (p, q) if eq.n1 == 1 else (q, p)
        e1 = eq.n1 * eq.xi1
        num = 2.0 * qt * e1 * xp + 4.0 * pt * xq
        den = -pt * e1 * xp + 2.0 * qt * xq
        return num, den
    num = 4.0 * pt * p * p + 2.0 * eq.nu1 * qt * p * q \
        + 4.0 * pt * eq.mu1 * q * q
    den = 2.0 * qt * p * p - pt * eq.nu1 * p * q \
        + 2.0 * eq.mu1 * qt * q * q
    return num, den


def quotient_residual(eq: QuotientEquation, x1: ProjectiveReal,
                      x3: ProjectiveReal) -> float:
    """Cleared-denominator residual of the quotient equation; zero on
    the coupled configuration space. Indeterminate inputs (the x1-side
    fraction at a 0/0 point, or an infinity on both sides of an apex
    shape) raise instead of returning a spurious zero.
    """
    num, den = _lhs_fraction(eq, x1)
    if num == 0.0 and den == 0.0:
        raise EvaluationAtPole("x1-side fraction is indeterminate")
    y3 = mobius(eq.F_out, x3)
    if eq.kind == QE_ELLIPTIC_ELLIPTIC:
        n3 = y3.p * y3.p + eq.mu2 * y3.q * y3.q
        d3 = y3.p * y3.q
        return eq.k * num * n3 - eq.nu2 * den * d3
    yp, yq = (y3.p, y3.q) if eq.n2 == 1 else (y3.q, y3.p)
    if yq == 0.0 and den == 0.0:
        raise EvaluationAtPole("both sides infinite in the apex equation")
    return eq.k * num * yq - eq.n2 * eq.xi2 * yp * den
