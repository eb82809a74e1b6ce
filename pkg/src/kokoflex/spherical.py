"""Configuration space of a single spherical quadrilateral.

A mesh vertex with its four incident faces cuts a spherical quadrilateral
out of the unit sphere around it; the four side lengths are the planar
angles alpha, beta, gamma, delta in cyclic order. The hinge dihedrals at
two adjacent vertices of that quadrilateral satisfy a biquadratic relation
in half-tangent coordinates, and for orthodiagonal quads (perpendicular
diagonals) the relation factors through scalar involution factors. This
module provides the polynomial, the orthodiagonality and type predicates,
the factors, and partner-angle solving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DegenerateBranch,
    EvaluationAtPole,
    InconsistentInput,
    NoRealSolution,
)
from .projective import ProjectiveReal, solve_quadratic

STRUCT_TOL = 1e-10

ELLIPTIC = "elliptic"
DELTOID = "deltoid"
ANTIDELTOID = "antideltoid"

# apex pair names: which two opposite vertices carry the symmetry diagonal
APEX_AB_GD = "alpha-beta/gamma-delta"
APEX_AD_BG = "alpha-delta/beta-gamma"


@dataclass(frozen=True)
class SphericalQuad:
    """Four side lengths in cyclic order, each in the open interval (0, pi)."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name, v in zip("alpha beta gamma delta".split(), self.sides):
            if not 0.0 < v < math.pi:
                raise InconsistentInput(f"side {name}={v} outside (0, pi)")
        if all(abs(v - 0.5 * math.pi) < 1e-14 for v in self.sides):
            # this quad only folds trivially
            raise InconsistentInput("all four sides equal pi/2")

    @property
    def sides(self):
        return (self.alpha, self.beta, self.gamma, self.delta)


def _angles_of(quad):
    if isinstance(quad, SphericalQuad):
        return quad.sides
    a, b, g, d = quad
    return (float(a), float(b), float(g), float(d))


@dataclass(frozen=True)
class RootSet:
    """Real roots of a partner solve; a double root is stored once."""

    values: tuple
    is_double: bool = False

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __bool__(self):
        return bool(self.values)


def _collapse(roots) -> RootSet:
    if len(roots) == 2 and roots[0].chordal(roots[1]) == 0.0:
        return RootSet((roots[0],), is_double=True)
    return RootSet(tuple(roots))


@dataclass(frozen=True)
class ConfigPolynomial:
    """Biquadratic c22 u^2 v^2 + c20 u^2 + c02 v^2 + 2 c11 u v + c00.

    The first slot u is the half-tangent at the vertex between sides
    delta and alpha, the second slot v at the vertex between gamma and
    delta, both adjacent to side delta.
    """

    c22: float
    c20: float
    c02: float
    c11: float
    c00: float

    @property
    def coefficients(self):
        return (self.c22, self.c20, self.c02, self.c11, self.c00)

    def evaluate(self, u: ProjectiveReal, v: ProjectiveReal) -> float:
        """Homogeneous value on unit pairs; zero exactly on the curve."""
        pu, qu, pv, qv = u.p, u.q, v.p, v.q
        return (
            self.c22 * pu * pu * pv * pv
            + self.c20 * pu * pu * qv * qv
            + self.c02 * qu * qu * pv * pv
            + 2.0 * self.c11 * pu * qu * pv * qv
            + self.c00 * qu * qu * qv * qv
        )

    def solve_first(self, v: ProjectiveReal) -> RootSet:
        """Real roots in the first slot for a given second-slot value."""
        pv, qv = v.p, v.q
        A = self.c22 * pv * pv + self.c20 * qv * qv
        B = 2.0 * self.c11 * pv * qv
        C = self.c02 * pv * pv + self.c00 * qv * qv
        try:
            return _collapse(solve_quadratic(A, B, C))
        except NoRealSolution:
            return RootSet(())

    def solve_second(self, u: ProjectiveReal) -> RootSet:
        """Real roots in the second slot for a given first-slot value."""
        pu, qu = u.p, u.q
        A = self.c22 * pu * pu + self.c02 * qu * qu
        B = 2.0 * self.c11 * pu * qu
        C = self.c20 * pu * pu + self.c00 * qu * qu
        try:
            return _collapse(solve_quadratic(A, B, C))
        except NoRealSolution:
            return RootSet(())


def config_poly(quad) -> ConfigPolynomial:
    """Sine-product coefficients of the configuration biquadratic.

    Accepts a SphericalQuad or a plain (alpha, beta, gamma, delta) tuple;
    the tuple form permits evaluating boundary cases that the quad type
    rejects.
    """
    a, b, g, d = _angles_of(quad)
    return ConfigPolynomial(
        c22=math.sin(0.5 * (a + b + g - d)) * math.sin(0.5 * (a - b + g - d)),
        c20=math.sin(0.5 * (a - b - g - d)) * math.sin(0.5 * (a + b - g - d)),
        c02=math.sin(0.5 * (a + b - g + d)) * math.sin(0.5 * (a - b - g + d)),
        c11=-math.sin(a) * math.sin(g),
        c00=math.sin(0.5 * (a - b + g + d)) * math.sin(0.5 * (a + b + g + d)),
    )


def is_orthodiagonal(quad, tol: float = STRUCT_TOL) -> bool:
    """Perpendicular diagonals: cos(alpha) cos(gamma) = cos(beta) cos(delta)."""
    a, b, g, d = _angles_of(quad)
    return abs(math.cos(a) * math.cos(g) - math.cos(b) * math.cos(d)) <= tol


def complete_orthodiagonal(alpha: float, beta: float, gamma: float,
                           tol: float = STRUCT_TOL) -> float:
    """The delta in (0, pi) making (alpha, beta, gamma, delta) orthodiagonal."""
    target = math.cos(alpha) * math.cos(gamma)
    cb = math.cos(beta)
    if abs(cb) <= tol:
        if abs(target) > tol:
            raise InconsistentInput(
                "beta = pi/2 forces cos(alpha) cos(gamma) = 0"
            )
        return 0.5 * math.pi
    ratio = target / cb
    if not -1.0 < ratio < 1.0:
        raise NoRealSolution(f"cos(delta) = {ratio} out of range")
    return math.acos(ratio)


@dataclass(frozen=True)
class QuadClass:
    """Type tag: elliptic, or (anti)deltoid with its apex pair."""

    kind: str
    apex_pair: str | None = None

    @property
    def is_elliptic(self):
        return self.kind == ELLIPTIC


def classify(quad, tol: float = STRUCT_TOL) -> QuadClass:
    """Type of an orthodiagonal quad by its side pattern.

    Deltoid: two pairs of equal adjacent sides. Antideltoid: two pairs of
    adjacent sides summing to pi. Elliptic: no signed sum of the four
    sides vanishes mod 2 pi. Ambiguous side patterns (e.g. a rhombus)
    resolve to the alpha-beta/gamma-delta apex pairing.
    """
    a, b, g, d = _angles_of(quad)
    if abs(a - b) <= tol and abs(g - d) <= tol:
        return QuadClass(DELTOID, APEX_AB_GD)
    if abs(a - d) <= tol and abs(b - g) <= tol:
        return QuadClass(DELTOID, APEX_AD_BG)
    if abs(a + b - math.pi) <= tol and abs(g + d - math.pi) <= tol:
        return QuadClass(ANTIDELTOID, APEX_AB_GD)
    if abs(a + d - math.pi) <= tol and abs(b + g - math.pi) <= tol:
        return QuadClass(ANTIDELTOID, APEX_AD_BG)
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            for s3 in (1.0, -1.0):
                total = a + s1 * b + s2 * g + s3 * d
                if min(abs(total % (2.0 * math.pi)),
                       abs(-total % (2.0 * math.pi))) <= tol:
                    raise InconsistentInput(
                        "degenerate side sum without an apex pattern"
                    )
    return QuadClass(ELLIPTIC)


@dataclass(frozen=True)
class InvolutionFactors:
    """Scalar invariants of an orthodiagonal quad's configuration space.

    lam lives at the vertex between sides delta and alpha, mu at the
    vertex between gamma and delta. Elliptic quads have lam, mu, nu;
    an (anti)deltoid keeps the factor at its non-apex vertex plus xi,
    with n = +1 for a deltoid and -1 for an antideltoid.
    """

    kind: str
    lam: float | None = None
    mu: float | None = None
    nu: float | None = None
    xi: float | None = None
    n: int | None = None
    apex_pair: str | None = None


_RIGHT = 0.5 * math.pi


def _is_right(angle: float, tol: float) -> bool:
    return abs(angle - _RIGHT) <= tol


def _lambda_factor(a, b, g, d, tol):
    # vertex between delta and alpha; sin form avoids tan poles
    if _is_right(a, tol) and _is_right(d, tol):
        return (math.cos(b) + math.cos(g)) / (math.cos(b) - math.cos(g))
    return math.sin(d + a) / math.sin(d - a)


def _mu_factor(a, b, g, d, tol):
    # vertex between gamma and delta
    if _is_right(g, tol) and _is_right(d, tol):
        return (math.cos(b) + math.cos(a)) / (math.cos(b) - math.cos(a))
    return math.sin(d + g) / math.sin(d - g)


def _nu_factor(lam, mu, a, b, g, d, tol):
    if not _is_right(d, tol):
        return (lam - 1.0) * (mu - 1.0) / math.cos(d)
    if _is_right(a, tol) and _is_right(g, tol):
        return 4.0 / math.cos(b)
    if _is_right(g, tol):
        return 2.0 * (mu - 1.0) * math.tan(a)
    # delta = pi/2 forces alpha or gamma = pi/2 on orthodiagonal quads
    return 2.0 * (lam - 1.0) * math.tan(g)


def involution_factors(quad, tol: float = STRUCT_TOL) -> InvolutionFactors:
    """Involution factors per quad type, covering the pi/2 special cases."""
    a, b, g, d = _angles_of(quad)
    if not is_orthodiagonal(quad, tol):
        raise InconsistentInput("involution factors need an orthodiagonal quad")
    cls = classify(quad, tol)
    if cls.kind == ELLIPTIC:
        lam = _lambda_factor(a, b, g, d, tol)
        mu = _mu_factor(a, b, g, d, tol)
        return InvolutionFactors(
            ELLIPTIC, lam=lam, mu=mu, nu=_nu_factor(lam, mu, a, b, g, d, tol)
        )
    n = 1 if cls.kind == DELTOID else -1
    if cls.apex_pair == APEX_AB_GD:
        # apices at alpha-beta and gamma-delta; lam survives
        lam = _lambda_factor(a, b, g, d, tol)
        if _is_right(d, tol) and _is_right(g, tol):
            xi = 2.0 * math.tan(a)
        else:
            xi = (lam - 1.0) / math.cos(d)
        return InvolutionFactors(cls.kind, lam=lam, xi=xi, n=n,
                                 apex_pair=cls.apex_pair)
    # apices at alpha-delta and beta-gamma; mu survives
    mu = _mu_factor(a, b, g, d, tol)
    if _is_right(d, tol) and _is_right(a, tol):
        xi = 2.0 * math.tan(g)
    else:
        xi = (mu - 1.0) / math.cos(d)
    return InvolutionFactors(cls.kind, mu=mu, xi=xi, n=n,
                             apex_pair=cls.apex_pair)


def _w_pair(x: ProjectiveReal, m: float):
    # x + m/x as a homogeneous pair (numerator, denominator)
    return x.p * x.p + m * x.q * x.q, x.p * x.q


def factored_residual(factors: InvolutionFactors, x2: ProjectiveReal,
                      x1: ProjectiveReal) -> float:
    """Cleared-denominator residual of the factored configuration equation.

    Elliptic: (x2 + lam/x2)(x1 + mu/x1) - nu. Apex pairing alpha-beta:
    x2 + lam/x2 - n xi x1^n. Apex pairing alpha-delta: x1 + mu/x1 -
    n xi x2^n. The apex term carries the extra sign n because xi is kept
    exactly as the tabulated invariant, which for an antideltoid is the
    negative of the coefficient that actually factors the biquadratic.
    Evaluated on unit homogeneous pairs so the value is scale-stable;
    simultaneous poles of both sides of an apex equation raise.
    """
    if factors.kind == ELLIPTIC:
        n2, d2 = _w_pair(x2, factors.lam)
        n1, d1 = _w_pair(x1, factors.mu)
        return n2 * n1 - factors.nu * d2 * d1
    if factors.apex_pair == APEX_AB_GD:
        nw, dw = _w_pair(x2, factors.lam)
        lin = x1
    else:
        nw, dw = _w_pair(x1, factors.mu)
        lin = x2
    # rhs xi * lin^n has a pole where lin^n = infinity
    rp, rq = (lin.p, lin.q) if factors.n == 1 else (lin.q, lin.p)
    if rq == 0.0 and dw == 0.0:
        raise EvaluationAtPole("both sides of the apex equation at a pole")
    return nw * rq - factors.n * factors.xi * rp * dw


def solve_partner(factors: InvolutionFactors, x1: ProjectiveReal) -> RootSet:
    """All real x2 paired with the given x1 by the configuration space."""
    if factors.kind == ELLIPTIC:
        # (x2 + lam/x2) = nu / (x1 + mu/x1), quadratic in x2
        n1, d1 = _w_pair(x1, factors.mu)
        A, B, C = n1, -factors.nu * d1, factors.lam * n1
        try:
            return _collapse(solve_quadratic(A, B, C))
        except NoRealSolution:
            return RootSet(())
    eff_xi = factors.n * factors.xi
    if factors.apex_pair == APEX_AB_GD:
        rp, rq = (x1.p, x1.q) if factors.n == 1 else (x1.q, x1.p)
        try:
            return _collapse(solve_quadratic(rq, -eff_xi * rp, factors.lam * rq))
        except NoRealSolution:
            return RootSet(())
    # alpha-delta pairing: x1 + mu/x1 = n xi x2^n is linear in x2^n
    n1, d1 = _w_pair(x1, factors.mu)
    if n1 == 0.0 and d1 == 0.0:
        raise DegenerateBranch("identically satisfied apex equation")
    if factors.n == 1:
        return RootSet((ProjectiveReal(n1, eff_xi * d1),))
    return RootSet((ProjectiveReal(eff_xi * d1, n1),))


def _reciprocal_scaled(m: float, x: ProjectiveReal) -> ProjectiveReal:
    return ProjectiveReal(m * x.q, x.p)


def involution_i(factors: InvolutionFactors, x1: ProjectiveReal) -> ProjectiveReal:
    """Diagonal fold acting on the second-slot variable: x1 -> mu/x1."""
    if factors.mu is None:
        raise InconsistentInput("mu undefined at an apex vertex")
    return _reciprocal_scaled(factors.mu, x1)


def involution_j(factors: InvolutionFactors, x2: ProjectiveReal) -> ProjectiveReal:
    """Diagonal fold acting on the first-slot variable: x2 -> lam/x2."""
    if factors.lam is None:
        raise InconsistentInput("lambda undefined at an apex vertex")
    return _reciprocal_scaled(factors.lam, x2)
