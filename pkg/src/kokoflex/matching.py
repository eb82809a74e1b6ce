"""Rank-one compatibility for closed four-vertex chains.

A cyclic chain of four orthodiagonal spherical quads, glued by involutive
couplings, moves with one degree of freedom exactly when the two symmetric
coordinate relations it induces describe the same surface.  That is a
rank-one condition on a 2x4 coefficient matrix built from the factor
products ``nu_i`` and the coupling offsets ``t_i``.  This module evaluates
the matrix and its six scaled 2x2 minors, walks the two parametric
solution branches of the minor system, decides real existence of the
motion, and evaluates the analogous minor systems for chains whose middle
vertices are deltoids or antideltoids.

All polynomial evaluation is duck typed: feed floats to get floats, feed
``Fraction`` or ``Surd`` values to get exact results.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .errors import (
    CellFormulaInconsistency,
    DegenerateBranch,
    InconsistentInput,
)

__all__ = [
    "EllipticParams",
    "MinorVector",
    "ExistenceReport",
    "DET_FACTORS",
    "matrix_N",
    "minors",
    "is_oi_match",
    "solve_t2",
    "solve_t4",
    "generic_branch_residuals",
    "linear_branch",
    "cad_cell_sample",
    "local_existence",
    "global_existence",
    "deltoid_minors_B1",
    "deltoid_minors_B2",
]

# det(columns i, j) of matrix_N equals DET_FACTORS[(i, j)] * p_ij.
DET_FACTORS = {
    (1, 2): -2,
    (1, 3): 2,
    (1, 4): 4,
    (2, 3): 1,
    (2, 4): 2,
    (3, 4): -2,
}

MINOR_PAIRS = tuple(sorted(DET_FACTORS))

_FACTOR_TOL = 1e-9


def _is_infinite(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


def _close(a, b) -> bool:
    return math.isclose(float(a), float(b), rel_tol=_FACTOR_TOL, abs_tol=_FACTOR_TOL)


def _check_edge(prev, nxt, t, label: str) -> None:
    # coupling table: offset zero needs equal or reciprocal factors,
    # any nonzero offset forces both factors to -1
    if not _is_infinite(t) and t == 0:
        if _close(prev, nxt) or _close(prev * nxt, 1):
            return
        raise InconsistentInput(
            f"coupling {label}: zero offset needs equal or reciprocal "
            f"factors, got {prev} and {nxt}"
        )
    if _close(prev, -1) and _close(nxt, -1):
        return
    raise InconsistentInput(
        f"coupling {label}: nonzero offset needs both factors -1, "
        f"got {prev} and {nxt}"
    )


@dataclass(frozen=True)
class EllipticParams:
    """Factor products, coupling offsets and involution factors of a chain.

    ``nu``, ``lam`` and ``mu`` hold (nu_1..nu_4), (lambda_1..lambda_4) and
    (mu_1..mu_4); ``t`` holds the coupling offsets (t_1..t_4), each a real
    or ``math.inf``.  Construction validates the coupling table on all
    four edges and rejects zero factors.
    """

    nu: Tuple
    t: Tuple
    lam: Tuple
    mu: Tuple

    def __post_init__(self):
        for name in ("nu", "t", "lam", "mu"):
            seq = getattr(self, name)
            if len(seq) != 4:
                raise InconsistentInput(f"{name} needs 4 entries, got {len(seq)}")
            object.__setattr__(self, name, tuple(seq))
        for name in ("nu", "lam", "mu"):
            for k, value in enumerate(getattr(self, name)):
                if value == 0:
                    raise InconsistentInput(f"{name}{k + 1} must be nonzero")
        lam, mu, t = self.lam, self.mu, self.t
        _check_edge(mu[3], mu[0], t[0], "1 (mu4/mu1)")
        _check_edge(lam[0], lam[1], t[1], "2 (lambda1/lambda2)")
        _check_edge(mu[1], mu[2], t[2], "3 (mu2/mu3)")
        _check_edge(lam[2], lam[3], t[3], "4 (lambda3/lambda4)")


@dataclass(frozen=True)
class MinorVector:
    """The six scaled 2x2 minors p_ij of the compatibility matrix."""

    p12: object
    p13: object
    p14: object
    p23: object
    p24: object
    p34: object

    def as_tuple(self) -> Tuple:
        return (self.p12, self.p13, self.p14, self.p23, self.p24, self.p34)

    def max_abs(self) -> float:
        return max(abs(float(v)) for v in self.as_tuple())


@dataclass(frozen=True)
class ExistenceReport:
    """Real-existence verdict for the motion of a matched chain."""

    local_ok: Tuple[bool, bool, bool, bool]
    case: int
    global_ok: bool
    note: str = ""


def _t_pair(t):
    """Homogenize an offset: t as (numerator, denominator)."""
    if _is_infinite(t):
        return (1.0, 0.0)
    return (t, t * 0 + 1)


def _rows(p: EllipticParams):
    """Matrix entries as pairs of monomials, entry = m1 + m2.

    Row 1 is homogenized in (t2, t3) and row 2 in (t1, t4); with finite
    offsets the sums reproduce the plain bilinear entries.
    """
    n1, n2, n3, n4 = p.nu
    p1, q1 = _t_pair(p.t[0])
    p2, q2 = _t_pair(p.t[1])
    p3, q3 = _t_pair(p.t[2])
    p4, q4 = _t_pair(p.t[3])
    row1 = (
        (8 * p2 * q3, 2 * n2 * p3 * q2),
        (16 * p2 * p3, -4 * n2 * q2 * q3),
        (4 * n1 * q2 * q3, -n1 * n2 * p2 * p3),
        (2 * n1 * n2 * p2 * q3, 8 * n1 * p3 * q2),
    )
    row2 = (
        (2 * n4 * p1 * q4, 8 * p4 * q1),
        (4 * n3 * q1 * q4, -n3 * n4 * p1 * p4),
        (16 * p1 * p4, -4 * n4 * q1 * q4),
        (8 * n3 * p1 * q4, 2 * n3 * n4 * p4 * q1),
    )
    return row1, row2


def matrix_N(p: EllipticParams):
    """The 2x4 compatibility matrix; rank one certifies a common surface.

    Rows with an infinite offset are returned in their homogeneous limit
    form (finite entries, same row span).
    """
    row1, row2 = _rows(p)
    return (
        tuple(m1 + m2 for m1, m2 in row1),
        tuple(m1 + m2 for m1, m2 in row2),
    )


def _minor_monomials(p: EllipticParams):
    """Each minor as its eight monomial contributions (exact split)."""
    row1, row2 = _rows(p)
    out = {}
    for (i, j), factor in DET_FACTORS.items():
        e1i, e1j = row1[i - 1], row1[j - 1]
        e2i, e2j = row2[i - 1], row2[j - 1]
        terms = [a * b for a in e1i for b in e2j]
        terms += [-(a * b) for a in e1j for b in e2i]
        if any(isinstance(term, float) for term in terms):
            out[(i, j)] = tuple(term / factor for term in terms)
        else:
            out[(i, j)] = tuple(_exact_div(term, factor) for term in terms)
    return out


def _exact_div(value, factor: int):
    from fractions import Fraction

    if isinstance(value, int):
        q, r = divmod(value, factor)
        return q if r == 0 else Fraction(value, factor)
    return value / factor


def minors(p: EllipticParams) -> MinorVector:
    """Evaluate the six minors p_ij; exact when the inputs are exact."""
    mono = _minor_monomials(p)
    return MinorVector(*(sum(mono[pair]) for pair in MINOR_PAIRS))


def is_oi_match(p: EllipticParams, tol: float = 1e-8) -> bool:
    """True when all six minors vanish relative to their own term size.

    Each minor is normalized by its largest absolute monomial
    contribution, so the verdict does not depend on the overall scale of
    the parameters.
    """
    mono = _minor_monomials(p)
    for pair in MINOR_PAIRS:
        terms = [float(term) for term in mono[pair]]
        scale = max(abs(term) for term in terms)
        if scale == 0.0:
            continue
        if abs(sum(terms)) > tol * scale:
            return False
    return True


def _guard_denominator(terms: Sequence, what: str):
    den = sum(terms)
    if isinstance(den, float):
        scale = max(abs(float(term)) for term in terms)
        if scale == 0.0 or abs(den) <= 1e-12 * scale:
            raise DegenerateBranch(f"{what}: denominator vanishes")
    elif den == 0:
        raise DegenerateBranch(f"{what}: denominator vanishes")
    return den


def solve_t2(nu: Sequence, t1, t3):
    """Offset t2 on the generic branch, from the common-root condition.

    The minors p12 and p13 are linear in t4; requiring a shared root is
    linear in t2, and this returns that root.  Raises DegenerateBranch
    when the denominator vanishes (the caller falls back to
    :func:`linear_branch`).
    """
    n1, n2, n3, n4 = nu
    num = 4 * (
        n4 * (n1 * n3 * n4 - 16 * n2) * t1 * t1
        + n2 * n3 * (n4 * n4 - 16) * t1 * t3
        + 16 * (n1 * n3 - n2 * n4)
    )
    den_terms = (
        n4 * (n1 * n2 * n3 * n4 - 256) * t1 * t1 * t3,
        16 * n3 * (16 - n4 * n4) * t1,
        16 * (n1 * n2 * n3 - 16 * n4) * t3,
    )
    den = _guard_denominator(den_terms, "solve_t2")
    return num / den


def solve_t4(nu: Sequence, t1, t3):
    """Offset t4 on the generic branch; with solve_t2 it zeroes p12, p13."""
    n1, n2, n3, n4 = nu
    num = 4 * (
        (-16 * n1 * n4 + n2 * n2 * n4 * n1) * t1 * t3
        + (-16 * n2 * n4 + n1 * n2 * n2 * n3) * t3 * t3
        - 16 * n2 * n4
        + 16 * n1 * n3
    )
    den_terms = (
        (n2 * n2 * n4 * n1 * n3 - 256 * n2) * t1 * t3 * t3,
        (16 * n1 * n3 * n4 - 256 * n2) * t1,
        (-16 * n1 * n2 * n2 + 256 * n1) * t3,
    )
    den = _guard_denominator(den_terms, "solve_t4")
    return num / den


def generic_branch_residuals(nu: Sequence, t1, t3):
    """Values of the two quartic factors gating the generic branch.

    After substituting the generic-branch t2 and t4, the remaining minor
    p14 factors into two biquadratics in (t1, t3); a zero of the left one
    lies on the generic family, a zero of the right one falls back to the
    linear branch.
    """
    n1, n2, n3, n4 = nu
    prod = n1 * n2 * n3 * n4
    a22 = (prod - 256) * (n1 * n4 - n2 * n3)
    a20 = (n1 * n3 * n4 - 16 * n2) * (n1 * n2 * n4 - 16 * n3)
    a02 = (16 * n1 - n2 * n3 * n4) * (n1 * n2 * n3 - 16 * n4)
    a00 = 16 * (n1 * n3 - n2 * n4) * (n1 * n2 - n3 * n4)
    b22 = n2 * n4 * (prod - 256)
    b20 = 16 * n4 * (n1 * n3 * n4 - 16 * n2)
    b02 = 16 * n2 * (n1 * n2 * n3 - 16 * n4)
    b00 = 256 * (n1 * n3 - n2 * n4)
    T1 = t1 * t1
    T3 = t3 * t3
    left = a22 * T1 * T3 + a20 * T1 + a02 * T3 + a00
    right = b22 * T1 * T3 + b20 * T1 + b02 * T3 + b00
    return left, right


def _linear_case_terms(nu: Sequence, t1, t3):
    n1, n2, n3, n4 = nu
    p23_terms = (
        n2 * n4 * (n1 * n2 * n3 * n4 - 256) * t1 * t1 * t3 * t3,
        16 * n4 * (n1 * n3 * n4 - 16 * n2) * t1 * t1,
        16 * n2 * (n1 * n2 * n3 - 16 * n4) * t3 * t3,
        256 * (n1 * n3 - n2 * n4),
    )
    p24_terms = (
        n1 * n4 * n4 * (n2 * n2 - 16) * t1 * t1 * t3,
        16 * n2 * (n4 * n4 - 16) * t1 * t3 * t3,
        16 * n2 * (n4 * n4 - 16) * t1,
        16 * n1 * (n2 * n2 - 16) * t3,
    )
    return p23_terms, p24_terms


def linear_branch(nu: Sequence, t1, t3):
    """The branch with a vanishing first matrix column.

    Returns (t2, t4, p23, p24) where t2 and t4 are the forced offsets
    and p23, p24 are the two surviving compatibility polynomials.  On
    this branch p12, p13 and p14 vanish identically; p34 vanishes as a
    consequence once p23 = p24 = 0.
    """
    n2, n4 = nu[1], nu[3]
    t2 = -(n2 * t3) / 4
    t4 = -(n4 * t1) / 4
    p23_terms, p24_terms = _linear_case_terms(nu, t1, t3)
    return t2, t4, sum(p23_terms), sum(p24_terms)


def _normalized_linear_residuals(nu: Sequence, t1, t3):
    p23_terms, p24_terms = _linear_case_terms(nu, t1, t3)
    out = []
    for terms in (p23_terms, p24_terms):
        vals = [float(v) for v in terms]
        scale = max(abs(v) for v in vals)
        out.append(abs(sum(vals)) / scale if scale > 0 else 0.0)
    return tuple(out)


def cad_cell_sample(nu2, nu4, t1, t3):
    """Complete (nu2, nu4, t1, t3) to (nu1, nu3) on one linear-branch cell.

    Valid on the cell t1 > 0, t3 < 0, nu2 > 4, nu4 > 4.  The published
    closed-form pair is evaluated first and plugged back into the linear
    case polynomials; it is returned only if both residuals vanish.
    Otherwise a CellFormulaInconsistency is raised that carries the
    published values, their residuals, and a corrected pair obtained by
    solving p24 = 0 for nu1 (it is linear in nu1) and p23 = 0 for the
    product nu1*nu3.
    """
    if not (float(t1) > 0 and float(t3) < 0 and float(nu2) > 4 and float(nu4) > 4):
        raise InconsistentInput(
            "cell preconditions need t1 > 0, t3 < 0, nu2 > 4, nu4 > 4"
        )
    T1 = t1 * t1
    T3 = t3 * t3
    nu3_pub = -16 * nu4 * (T1 + 1) / ((nu4 * nu4 - 16) * t1 * t3)
    nu1_pub = (
        256 * nu2 * nu4 * (T1 + 1) * (T3 + 1)
        / (nu3_pub * (nu4 * nu4 * T1 + 16) * (nu2 * nu2 * T3 + 16))
    )
    published = (nu1_pub, nu3_pub)
    residuals = _normalized_linear_residuals(
        (nu1_pub, nu2, nu3_pub, nu4), t1, t3
    )
    if max(residuals) <= 1e-9:
        return published
    nu1_corr = (
        -16 * nu2 * (nu4 * nu4 - 16) * t1 * (T3 + 1)
        / ((nu2 * nu2 - 16) * t3 * (nu4 * nu4 * T1 + 16))
    )
    nu3_corr = (
        -16 * nu4 * (nu2 * nu2 - 16) * (T1 + 1) * t3
        / ((nu4 * nu4 - 16) * (nu2 * nu2 * T3 + 16) * t1)
    )
    raise CellFormulaInconsistency(
        "published cell formulas fail the plug-back gate",
        published=published,
        residuals=residuals,
        corrected=(nu1_corr, nu3_corr),
    )


def local_existence(lam, mu, nu) -> bool:
    """Real points on a single quad's configuration curve.

    True when a factor is negative, or both are positive and
    nu^2/(lam*mu) exceeds 16 (strictly; the boundary is a point, not a
    motion).
    """
    lam_f, mu_f, nu_f = float(lam), float(mu), float(nu)
    if lam_f < 0 or mu_f < 0:
        return True
    return nu_f * nu_f / (lam_f * mu_f) > 16


def _case4_interval_ok(f1, f2, n_a, n_b, t) -> Tuple[bool, str]:
    # two positive factor sets one edge apart: the transported interval
    # must meet the local one, a strict inequality in the coupling offset
    if not _is_infinite(t) and t == 0:
        return True, ""
    s1, s2 = math.sqrt(float(f1)), math.sqrt(float(f2))
    lhs = 16 * s1 * s2 - abs(float(n_a) * float(n_b))
    if _is_infinite(t):
        rhs = 0.0
    else:
        rhs = (4 * abs(float(n_b)) * s1 + 4 * abs(float(n_a)) * s2) / abs(float(t))
    if lhs < rhs:
        return True, ""
    return False, (
        f"interval condition fails: 16*sqrt({float(f1):g}*{float(f2):g})"
        f" - |{float(n_a):g}*{float(n_b):g}| = {lhs:g} >= {rhs:g}"
    )


def global_existence(p: EllipticParams) -> ExistenceReport:
    """Decide whether the per-quad real intervals admit a common motion.

    The four involution-factor sets around the chain share a sign per
    edge; the sign pattern picks one of five cases.  Only the pattern
    with two opposite positive sets (case 4) needs a condition beyond
    local existence.
    """
    local = tuple(
        local_existence(p.lam[i], p.mu[i], p.nu[i]) for i in range(4)
    )
    signs = (
        float(p.mu[0]) > 0,
        float(p.lam[0]) > 0,
        float(p.mu[1]) > 0,
        float(p.lam[2]) > 0,
    )
    positive = [i for i, s in enumerate(signs) if s]
    n_pos = len(positive)
    note = ""
    if n_pos == 0:
        case = 1
        extra_ok = True
    elif n_pos == 1:
        case = 2
        extra_ok = True
    elif n_pos == 2:
        gap = (positive[1] - positive[0]) % 4
        if gap == 2:
            case = 4
            if signs[0]:
                # positive mu sets: condition on the offset t2
                extra_ok, note = _case4_interval_ok(
                    p.mu[0], p.mu[1], p.nu[0], p.nu[1], p.t[1]
                )
            else:
                # positive lambda sets: condition on the offset t3
                extra_ok, note = _case4_interval_ok(
                    p.lam[1], p.lam[2], p.nu[1], p.nu[2], p.t[2]
                )
        else:
            case = 3
            extra_ok = True
    else:
        case = 5
        extra_ok = True
    if not all(local):
        bad = [str(i + 1) for i, ok in enumerate(local) if not ok]
        note = (note + "; " if note else "") + (
            "local existence fails at quad " + ", ".join(bad)
        )
    return ExistenceReport(
        local_ok=local,
        case=case,
        global_ok=all(local) and extra_ok,
        note=note,
    )


def deltoid_minors_B1(nu1, xi2, xi3, nu4, t1, t2, F3, t4, antideltoid: bool = False):
    """Minor system for a chain whose two middle vertices are deltoids.

    With ``antideltoid=True`` both middle vertices are antideltoids and
    the apex offset enters with the opposite sign.
    """
    if antideltoid:
        F3 = -F3
    p12 = (
        -2 * xi3 * nu4 * t1 * t2 * t4 + 2 * xi2 * nu4 * t1 + 8 * xi3 * t2
        + 8 * xi2 * t4
        + F3 * (4 * nu4 * t1 * t2 + xi2 * xi3 * nu4 * t1 * t4 + 16 * t2 * t4
                - 4 * xi2 * xi3)
    )
    p13 = xi3 * (
        -nu1 * xi2 * nu4 * t1 * t2 * t4 + 16 * xi2 * t1 + 4 * nu1 * xi2 * t2
        + 4 * xi2 * nu4 * t4
        + F3 * (32 * t1 * t2 + 2 * nu1 * nu4 * t1 * t4 + 8 * nu4 * t2 * t4
                - 8 * nu1)
    )
    p14 = (
        2 * (16 * xi2 - nu1 * xi3 * nu4) * t1 * t4 + 8 * (nu1 * xi3 - xi2 * nu4)
        + F3 * ((64 - nu1 * xi2 * xi3 * nu4) * t1 * t2 * t4
                + 4 * (nu1 * xi2 * xi3 - 4 * nu4) * t2)
    )
    p23 = (
        (nu1 * xi2 * nu4 - 16 * xi3) * t1 * t2
        + 4 * (nu1 * xi2 - xi3 * nu4) * t2 * t4
        + F3 * (2 * (4 * xi2 * xi3 - nu1 * nu4) * t1
                + 2 * (xi2 * xi3 * nu4 - 4 * nu1) * t4)
    )
    p24 = (
        -64 * t1 * t2 * t4 + 4 * nu1 * nu4 * t1 + 16 * nu4 * t2 + 16 * nu1 * t4
        + F3 * (2 * nu1 * xi2 * nu4 * t1 * t2 + 32 * xi2 * t1 * t4
                + 8 * nu1 * xi2 * t2 * t4 - 8 * xi2 * nu4)
    )
    p34 = nu1 * (
        -8 * xi2 * t1 * t2 * t4 + 8 * xi3 * t1 + 2 * xi2 * nu4 * t2
        + 2 * xi3 * nu4 * t4
        + F3 * (4 * xi2 * xi3 * t1 * t2 + 16 * t1 * t4
                + xi2 * xi3 * nu4 * t2 * t4 - 4 * nu4)
    )
    return (p12, p13, p14, p23, p24, p34)


def deltoid_minors_B2(nu1, xi2, xi3, nu4, t1, t2, F3, t4):
    """Minor system for a chain with one deltoid and one antideltoid."""
    p12 = (
        2 * xi3 * nu4 * t1 * t2 * F3 * t4 - 4 * nu4 * t1 * t2
        + 2 * xi2 * nu4 * t1 * F3 + xi2 * xi3 * nu4 * t1 * t4
        - 8 * xi3 * t2 * F3 - 16 * t2 * t4 + 8 * xi2 * F3 * t4
        - 4 * xi2 * xi3
    )
    p13 = (
        32 * t1 * t2 * F3 * t4 + nu1 * xi2 * nu4 * t1 * t2
        - 2 * nu1 * nu4 * t1 * F3 + 16 * xi2 * t1 * t4 - 8 * nu4 * t2 * F3
        + 4 * nu1 * xi2 * t2 * t4 - 8 * nu1 * F3 * t4 - 4 * xi2 * nu4
    )
    p14 = (
        (nu1 * xi2 * nu4 + 16 * xi3) * t1 * t2 * F3
        + 4 * (nu1 * xi2 + xi3 * nu4) * t2 * F3 * t4
        + 2 * (nu1 * nu4 + 4 * xi2 * xi3) * t1
        + 2 * (4 * nu1 + xi2 * xi3 * nu4) * t4
    )
    p23 = (
        (nu1 * xi2 * xi3 * nu4 + 64) * t1 * t2 * t4
        - 2 * (16 * xi2 + nu1 * xi3 * nu4) * t1 * F3 * t4
        - 4 * (4 * nu4 + nu1 * xi2 * xi3) * t2
        + 8 * (xi2 * nu4 + nu1 * xi3) * F3
    )
    p24 = xi3 * (
        nu1 * xi2 * nu4 * t1 * t2 * F3 * t4 + 32 * t1 * t2
        - 16 * xi2 * t1 * F3 + 2 * nu1 * nu4 * t1 * t4
        - 4 * nu1 * xi2 * t2 * F3 + 8 * nu4 * t2 * t4
        - 4 * xi2 * nu4 * F3 * t4 - 8 * nu1
    )
    p34 = nu1 * (
        8 * xi2 * t1 * t2 * F3 * t4 - 4 * xi2 * xi3 * t1 * t2
        + 8 * xi3 * t1 * F3 + 16 * t1 * t4 - 2 * xi2 * nu4 * t2 * F3
        - xi2 * xi3 * nu4 * t2 * t4 + 2 * xi3 * nu4 * F3 * t4 - 4 * nu4
    )
    return (p12, p13, p14, p23, p24, p34)
