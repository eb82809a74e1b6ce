"""Edge couplings: offset maps, involutivity, w-transport, quotients.

Oracles: the offset map is checked against plain angle addition, the
w-transport against the explicit detour through the offset variable,
and quotient residuals against chains assembled from single-quad
partner solves.
"""

import math
import random

import pytest

from kokoflex.coupling import (
    Coupling,
    QE_DELTOID_DELTOID,
    deltoid_deltoid,
    elliptic_deltoid,
    elliptic_elliptic,
    induced_involution,
    is_involutive,
    make_coupling,
    mobius,
    principal_F,
    quotient_residual,
    t_of,
    w_transform,
)
from kokoflex.errors import EvaluationAtPole, InconsistentInput
from kokoflex.projective import ProjectiveReal
from kokoflex.spherical import ELLIPTIC, InvolutionFactors, solve_partner

INF = ProjectiveReal.infinity()


def rand_point(rng):
    return ProjectiveReal.from_angle(rng.uniform(-math.pi, math.pi))


class TestMobius:
    def test_zero_offset_is_identity(self):
        x = ProjectiveReal(0.7, 1.0)
        assert mobius(0.0, x).isclose(x)

    def test_unit_offset_shifts_zero(self):
        y = mobius(1.0, ProjectiveReal(0.0, 1.0))
        assert y.value == pytest.approx(1.0)

    def test_infinite_offset_inverts(self):
        y = mobius(INF, ProjectiveReal.from_value(2.0))
        assert y.value == pytest.approx(-0.5)

    def test_matches_angle_addition(self):
        # x = tan(a/2), F = tan(b/2) gives y = tan((a+b)/2)
        rng = random.Random(31)
        for _ in range(300):
            a = rng.uniform(-math.pi, math.pi)
            b = rng.uniform(-math.pi, math.pi)
            y = mobius(ProjectiveReal.from_angle(b),
                       ProjectiveReal.from_angle(a))
            assert y.chordal(ProjectiveReal.from_angle(a + b)) < 1e-12

    def test_inverse_offset_round_trip(self):
        rng = random.Random(32)
        for _ in range(200):
            F = rand_point(rng)
            Fneg = -F
            x = rand_point(rng)
            assert mobius(Fneg, mobius(F, x)).chordal(x) < 1e-12

    def test_t_and_principal_offset_round_trip(self):
        rng = random.Random(33)
        for _ in range(100):
            t = rng.uniform(-20.0, 20.0)
            F = principal_F(t)
            assert abs(F.value) <= 1.0 + 1e-12
            assert t_of(F).value == pytest.approx(t, rel=1e-10, abs=1e-10)
        assert principal_F(INF).value == pytest.approx(1.0)
        assert t_of(ProjectiveReal.from_value(1.0)).is_infinite


class TestInvolutive:
    def test_zero_offset_needs_equal_factors(self):
        assert is_involutive(0.0, 3.0, 3.0)
        assert not is_involutive(0.0, 3.0, 2.0)

    def test_finite_offset_needs_minus_one(self):
        assert is_involutive(0.4, -1.0, -1.0)
        assert not is_involutive(0.4, -1.0, -0.5)
        assert not is_involutive(0.4, 3.0, 3.0)

    def test_infinite_offset_needs_reciprocal(self):
        assert is_involutive(INF, 2.0, 0.5)
        assert not is_involutive(INF, 2.0, 2.0)

    def test_induced_reduces_to_direct_fold_at_zero(self):
        y = induced_involution(0.0, 5.0, ProjectiveReal.from_value(2.0))
        assert y.value == pytest.approx(2.5)

    def test_induced_is_an_involution(self):
        rng = random.Random(34)
        for _ in range(200):
            F = rng.choice([ProjectiveReal.from_value(rng.uniform(-3, 3)),
                            INF])
            lam = rng.uniform(-4.0, 4.0) or 1.0
            x = rand_point(rng)
            y = induced_involution(F, lam, x)
            assert induced_involution(F, lam, y).chordal(x) < 1e-12

    def test_induced_closed_form(self):
        rng = random.Random(35)
        for _ in range(200):
            F = rng.uniform(-3.0, 3.0)
            lam = rng.uniform(-4.0, 4.0)
            x = rand_point(rng)
            y = induced_involution(F, lam, x)
            p, q = x.p, x.q
            ref = ProjectiveReal(
                -(lam + 1.0) * F * p + (lam - F * F) * q,
                (1.0 - lam * F * F) * p + (lam + 1.0) * F * q,
            )
            assert y.chordal(ref) < 1e-12

    def test_involutive_couplings_match_previous_fold(self):
        # when the table holds the induced fold equals lambda_prev/x
        rng = random.Random(36)
        cases = []
        for _ in range(50):
            lam = rng.uniform(0.2, 4.0)
            cases.append((ProjectiveReal(0.0, 1.0), lam, lam))
            cases.append((ProjectiveReal.from_value(rng.uniform(-2, 2) or 0.3),
                          -1.0, -1.0))
            cases.append((INF, 1.0 / lam, lam))
        for F, lam_prev, lam_next, in cases:
            assert is_involutive(F, lam_prev, lam_next)
            x = rand_point(rng)
            ref = x.apply(((0.0, lam_prev), (1.0, 0.0)))
            assert induced_involution(F, lam_next, x).chordal(ref) < 1e-12


class TestWTransform:
    def test_zero_t_identity(self):
        assert w_transform(7.0, 0.0).value == pytest.approx(7.0)

    def test_infinite_t_limit(self):
        w = w_transform(2.0, INF, k=1.0)
        assert w.value == pytest.approx(-2.0)
        assert w_transform(2.0, INF, k=-3.0).value == pytest.approx(6.0)

    def test_flagship_coupling_value(self):
        t2 = 2.0 * math.sqrt(14.0) / 7.0
        got = w_transform(1.0, t2).value
        assert got == pytest.approx((2.0 + 4.0 * t2) / (2.0 - t2))

    def test_matches_offset_route(self):
        # w' computed directly from y = mobius(F, x) for each offset class
        rng = random.Random(37)
        checked = 0
        while checked < 1000:
            kind = rng.randrange(3)
            if kind == 0:
                F = ProjectiveReal(0.0, 1.0)
                lam_prev = lam_next = rng.uniform(-4.0, 4.0) or 1.0
            elif kind == 1:
                F = ProjectiveReal.from_value(rng.uniform(-2.5, 2.5) or 0.7)
                lam_prev = lam_next = -1.0
            else:
                F = INF
                lam_next = rng.uniform(0.3, 3.0)
                lam_prev = 1.0 / lam_next
            k = -lam_next if F.is_infinite else 1.0
            x = rand_point(rng)
            y = mobius(F, x)
            if abs(x.p * x.q) < 1e-8 or abs(y.p * y.q) < 1e-8:
                continue
            w = (x.p * x.p + lam_prev * x.q * x.q) / (x.p * x.q)
            w_direct = (y.p * y.p + lam_next * y.q * y.q) / (y.p * y.q)
            got = w_transform(w, t_of(F), k)
            assert got.chordal(ProjectiveReal.from_value(w_direct)) < 1e-9
            checked += 1


class TestCouplingType:
    def test_t_consistency(self):
        c = Coupling(ProjectiveReal.from_value(0.5))
        assert c.t_value == pytest.approx(2.0 * 0.5 / (1.0 - 0.25))
        c = Coupling(ProjectiveReal.from_value(1.0))
        assert c.t.is_infinite

    def test_k_validation(self):
        with pytest.raises(InconsistentInput):
            Coupling(ProjectiveReal.from_value(0.5), k=2.0)
        c = make_coupling(INF, lambda_next=4.0)
        assert c.k == -4.0
        with pytest.raises(InconsistentInput):
            make_coupling(INF)

    def test_euclidean_angles_checked(self):
        tau, zeta = 0.6, -0.2
        F = ProjectiveReal.from_angle(tau + zeta)
        c = Coupling(F, tau=tau, zeta=zeta)
        assert c.tau == tau
        with pytest.raises(InconsistentInput):
            Coupling(ProjectiveReal.from_value(0.9), tau=tau, zeta=zeta)
        with pytest.raises(InconsistentInput):
            Coupling(F, tau=tau)


def chain_points(rng, f1, F2, f2swap, F3):
    """Sample (x1, x3) on the coupled space via partner solves."""
    x1 = rand_point(rng)
    out = []
    for x2 in solve_partner(f1, x1):
        y2 = mobius(F2, x2)
        for y3 in solve_partner(f2swap, y2):
            out.append((x1, mobius(-F3, y3)))
    return out


class TestQuotientResidual:
    def test_pseudo_planar_reduction(self):
        # all offsets zero: residual equals the composed symmetric form
        eq = elliptic_elliptic(mu1=-2.0, nu1=5.0, mu2=-3.0, nu2=4.0, t=0.0)
        rng = random.Random(38)
        for _ in range(100):
            x1, x3 = rand_point(rng), rand_point(rng)
            w1n = x1.p * x1.p - 2.0 * x1.q * x1.q
            w1d = x1.p * x1.q
            w3n = x3.p * x3.p - 3.0 * x3.q * x3.q
            w3d = x3.p * x3.q
            ref = 2.0 * (5.0 * w1d * w3n - 4.0 * w1n * w3d)
            assert quotient_residual(eq, x1, x3) == pytest.approx(
                ref, rel=1e-9, abs=1e-12)

    def test_elliptic_chain_membership(self):
        # points assembled through the shared variable satisfy the
        # quotient equation, for all three offset classes
        rng = random.Random(39)
        for F2, lam in ((ProjectiveReal(0.0, 1.0), 2.5),
                        (ProjectiveReal.from_value(0.8), -1.0),
                        (INF, -1.0)):
            lam2 = 1.0 / lam if F2.is_infinite else lam
            mu1, mu2 = -1.7, -0.6
            nu1, nu2 = 5.0, 3.0
            f1 = InvolutionFactors(ELLIPTIC, lam=lam, mu=mu1, nu=nu1)
            f2s = InvolutionFactors(ELLIPTIC, lam=mu2, mu=lam2, nu=nu2)
            F3 = ProjectiveReal.from_value(0.3)
            k2 = -lam2 if F2.is_infinite else 1.0
            eq = elliptic_elliptic(mu1, nu1, mu2, nu2, t=t_of(F2), k=k2,
                                   F_out=F3)
            checked = 0
            for _ in range(80):
                for x1, x3 in chain_points(rng, f1, F2, f2s, F3):
                    assert abs(quotient_residual(eq, x1, x3)) < 1e-9
                    checked += 1
            assert checked > 100

    def test_deltoid_chain_membership(self):
        rng = random.Random(40)
        for n2 in (1, -1):
            lam = -1.0
            F2 = ProjectiveReal.from_value(0.5)
            mu1, nu1 = -2.0, 4.0
            xi2 = 1.8
            f1 = InvolutionFactors(ELLIPTIC, lam=lam, mu=mu1, nu=nu1)
            F3 = ProjectiveReal.from_value(-0.4)
            eq = elliptic_deltoid(mu1, nu1, xi2, n2, t=t_of(F2), F_out=F3)
            checked = 0
            for _ in range(100):
                x1 = rand_point(rng)
                for x2 in solve_partner(f1, x1):
                    y2 = mobius(F2, x2)
                    if abs(y2.p * y2.q) < 1e-10:
                        continue
                    w2p = (y2.p * y2.p + lam * y2.q * y2.q) / (y2.p * y2.q)
                    # apex equation: w2' = n2 xi2 y3^{n2}
                    y3pow = w2p / (n2 * xi2)
                    y3 = (ProjectiveReal.from_value(y3pow) if n2 == 1
                          else ProjectiveReal.from_value(1.0 / y3pow))
                    x3 = mobius(-F3, y3)
                    assert abs(quotient_residual(eq, x1, x3)) < 1e-9
                    checked += 1
            assert checked > 100

    def test_two_deltoid_chain_membership(self):
        rng = random.Random(41)
        for n1, n2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            lam = -1.0
            xi1, xi2 = 2.2, -1.4
            F2 = ProjectiveReal.from_value(0.35)
            F3 = ProjectiveReal.from_value(0.15)
            eq = deltoid_deltoid(xi1, n1, xi2, n2, t=t_of(F2), F_out=F3)
            assert eq.kind == QE_DELTOID_DELTOID
            checked = 0
            for _ in range(120):
                x1 = rand_point(rng)
                if abs(x1.p) < 1e-10 or abs(x1.q) < 1e-10:
                    continue
                w2 = n1 * xi1 * (x1.value if n1 == 1 else 1.0 / x1.value)
                disc = w2 * w2 - 4.0 * lam
                r = 0.5 * (w2 + math.copysign(math.sqrt(disc), w2 or 1.0))
                for x2v in (r, lam / r):
                    x2 = ProjectiveReal.from_value(x2v)
                    y2 = mobius(F2, x2)
                    if abs(y2.p * y2.q) < 1e-10:
                        continue
                    w2p = (y2.p * y2.p + lam * y2.q * y2.q) / (y2.p * y2.q)
                    y3pow = w2p / (n2 * xi2)
                    y3 = (ProjectiveReal.from_value(y3pow) if n2 == 1
                          else ProjectiveReal.from_value(1.0 / y3pow))
                    x3 = mobius(-F3, y3)
                    assert abs(quotient_residual(eq, x1, x3)) < 1e-9
                    checked += 1
            assert checked > 100

    def test_elliptic_residual_is_total(self):
        # numerator and denominator of the x1-side fraction solve a
        # linear system with determinant -4 nu1 (t^2 + 1), so they never
        # vanish together for nonzero factors: no input raises
        rng = random.Random(42)
        for _ in range(500):
            eq = elliptic_elliptic(
                mu1=rng.uniform(-3.0, 3.0) or -1.0,
                nu1=rng.uniform(-5.0, 5.0) or 2.0,
                mu2=rng.uniform(-3.0, 3.0) or -1.0,
                nu2=rng.uniform(-5.0, 5.0) or 2.0,
                t=rng.choice([rng.uniform(-4.0, 4.0), INF]),
                F_out=rng.uniform(-2.0, 2.0),
            )
            r = quotient_residual(eq, rand_point(rng), rand_point(rng))
            assert math.isfinite(r)

    def test_apex_double_infinity_raises(self):
        # lhs fraction infinite and y3 infinite at once
        eq = elliptic_deltoid(mu1=-1.0, nu1=2.0, xi2=1.5, n2=1,
                              t=0.0, F_out=0.0)
        x1 = ProjectiveReal.from_value(1.0)  # w1 = 0, fraction pole
        with pytest.raises(EvaluationAtPole):
            quotient_residual(eq, x1, ProjectiveReal.infinity())
