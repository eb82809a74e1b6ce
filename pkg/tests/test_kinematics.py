"""Tests for chain solving, motion tracing and the geometric invariants."""

import math
import random

import numpy as np
import pytest

from kokoflex.errors import InconsistentInput, TraceError
from kokoflex.kinematics import (
    CLOSE_ACCEPT,
    CLOSE_REJECT,
    RealIntervalSet,
    admissible_interval,
    chain_candidates,
    chain_solve,
    closure_residual,
    embed,
    geometric_property_check,
    oriented_dihedrals,
    probe_closure,
    trace_motion,
)
from kokoflex.matching import EllipticParams
from kokoflex.projective import ProjectiveReal
from kokoflex.spherical import SphericalQuad
from kokoflex.synthesis import MeshDesign, assemble_design, build_central_tetrahedron

S14 = math.sqrt(14)
FLAG_NU = (8.0, 16.0, 8.0, 16.0)
FLAG_T = (S14 / 14, 2 * S14 / 7, -S14 / 14, -2 * S14 / 7)


def flagship_design():
    params = EllipticParams(nu=FLAG_NU, t=FLAG_T,
                            lam=(-1.0,) * 4, mu=(-1.0,) * 4)
    return assemble_design(params)


def perturbed_design():
    # same couplings, slightly different first central angle: breaks matching
    base = flagship_design()
    deltas = [q.delta for q in base.quads]
    deltas[0] += 0.05
    quads = (SphericalQuad(math.pi / 2, math.pi / 2, math.pi / 2, deltas[0]),) \
        + base.quads[1:]
    vertices, _taus = build_central_tetrahedron(deltas)
    return MeshDesign(quads, base.couplings, tuple(map(tuple, vertices)),
                      base.spokes_b, base.spokes_c)


class TestIntervalSet:
    def test_full_circle(self):
        ivs = RealIntervalSet.full_circle()
        assert ivs.full and not ivs.is_empty
        assert ivs.contains(0.3) and ivs.contains(-1.2)

    def test_empty(self):
        ivs = RealIntervalSet.empty()
        assert ivs.is_empty and not ivs.contains(0.0)

    def test_arc_membership(self):
        ivs = RealIntervalSet(((-0.5, 0.25),))
        assert ivs.contains(0.0)
        assert not ivs.contains(1.0)
        assert ivs.measure == pytest.approx(0.75, abs=1e-12)


class TestChainSolve:
    def test_flagship_closes_everywhere(self):
        design = flagship_design()
        rng = random.Random(31)
        for _ in range(25):
            x1 = ProjectiveReal.from_value(math.tan(rng.uniform(-1.5, 1.5)))
            state = chain_solve(design, x1)
            assert state.residual < CLOSE_ACCEPT

    def test_candidates_share_driving_value(self):
        design = flagship_design()
        x1 = ProjectiveReal.from_value(0.37)
        cands = chain_candidates(design, x1)
        assert len(cands) >= 1
        for st in cands:
            assert st.x[0].value == pytest.approx(0.37, abs=1e-15)

    def test_perturbed_never_closes(self):
        design = perturbed_design()
        hits = 0
        n = 100
        for i in range(n):
            th = -0.5 * math.pi + (i + 0.5) * math.pi / n
            x1 = ProjectiveReal.from_value(math.tan(th))
            if closure_residual(design, x1) > CLOSE_REJECT:
                hits += 1
        assert hits >= 95

    def test_infinite_driving_value(self):
        design = flagship_design()
        state = chain_solve(design, ProjectiveReal.infinity())
        assert state.residual < CLOSE_ACCEPT


class TestAdmissibleInterval:
    def test_flagship_full_circle(self):
        design = flagship_design()
        ivs = admissible_interval(design)
        assert ivs.full

    def test_probe_closure_levels(self):
        assert probe_closure(flagship_design()) < CLOSE_ACCEPT
        assert probe_closure(perturbed_design()) > CLOSE_REJECT


class TestEmbed:
    def test_corner_angles_reproduced(self):
        design = flagship_design()
        state = chain_solve(design, ProjectiveReal.from_value(0.21))
        A, B, C = embed(design, state)
        for h in range(4):
            u = B[h] - A[h]
            v = C[h] - A[h]
            ang = math.atan2(np.linalg.norm(np.cross(u, v)),
                             float(np.dot(u, v)))
            assert ang == pytest.approx(design.quads[h].beta, abs=1e-10)

    def test_spoke_lengths(self):
        design = flagship_design()
        state = chain_solve(design, ProjectiveReal.from_value(-0.4))
        A, B, C = embed(design, state)
        for h in range(4):
            assert np.linalg.norm(B[h] - A[h]) == pytest.approx(
                design.spokes_b[h], rel=1e-12)
            assert np.linalg.norm(C[h] - A[h]) == pytest.approx(
                design.spokes_c[h], rel=1e-12)

    def test_dihedral_round_trip(self):
        design = flagship_design()
        rng = random.Random(47)
        for _ in range(20):
            x1 = ProjectiveReal.from_value(math.tan(rng.uniform(-1.5, 1.5)))
            state = chain_solve(design, x1)
            A, B, C = embed(design, state)
            phi, psi = oriented_dihedrals(design.positions(), B, C)
            for h in range(4):
                assert phi[h] == pytest.approx(state.phi[h], abs=1e-9)
                assert psi[h] == pytest.approx(state.psi[h], abs=1e-9)


class TestTraceMotion:
    def test_flagship_two_hundred_frames(self):
        design = flagship_design()
        frames = trace_motion(design, frames=200)
        assert len(frames) == 200
        assert max(f.closure_residual for f in frames) < 1e-8
        assert max(f.max_corner_deviation for f in frames) < 1e-8

    def test_fold_angle_sum_invariant(self):
        # psi - phi stays congruent to tau + zeta at every hinge
        design = flagship_design()
        frames = trace_motion(design, frames=64)
        for f in frames:
            for h in range(4):
                total = design.tau[h] + design.zeta[h]
                dev = (f.psi[h] - f.phi[h] - total) % (2 * math.pi)
                dev = min(dev, 2 * math.pi - dev)
                assert dev < 1e-9

    def test_frames_deterministic(self):
        design = flagship_design()
        a = trace_motion(design, frames=16)
        b = trace_motion(design, frames=16)
        for fa, fb in zip(a, b):
            assert fa.theta == fb.theta
            assert np.array_equal(fa.spokes_b, fb.spokes_b)

    def test_bad_frame_count(self):
        with pytest.raises(InconsistentInput):
            trace_motion(flagship_design(), frames=0)

    def test_perturbed_raises(self):
        with pytest.raises(TraceError):
            trace_motion(perturbed_design(), frames=8)


class TestGeometricProperties:
    def test_flagship_invariants(self):
        report = geometric_property_check(flagship_design(), frames=16)
        assert report.ok
        assert report.max_orthogonality < 1e-10
        assert report.max_zeta_deviation < 1e-10
        assert report.max_fold_symmetry < 1e-10
