"""From matched abstract parameters to a realized mesh design.

The pipeline inverts the factor definitions to planar angles, solves a
central tetrahedron realizing the four delta angles, splits each hinge
offset t into the fixed dihedral pair (tau, zeta), and assembles a
complete design whose closure is probed kinematically.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .coupling import Coupling, make_coupling, principal_F
from .errors import AssemblyError, InconsistentInput, NoRealSolution
from .matching import EllipticParams, global_existence, is_oi_match
from .projective import ProjectiveReal
from .spherical import (
    ANTIDELTOID,
    DELTOID,
    SphericalQuad,
    classify,
    config_poly,
    involution_factors,
    is_orthodiagonal,
)

PLANAR_TOL = 1e-10


def _wrap(angle: float) -> float:
    """Normalize into (-pi, pi]."""
    rem = math.remainder(angle, math.tau)
    return math.pi if rem <= -math.pi else rem


def _sign(v: float) -> float:
    return -1.0 if v < 0.0 else 1.0


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0.0:
        raise NoRealSolution("zero vector has no direction")
    return v / n


def _angle_between(u, v) -> float:
    return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))


@dataclass(frozen=True)
class AngleRecovery:
    """Planar angles reconstructed from involution factors."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def to_quad(self) -> SphericalQuad:
        return SphericalQuad(self.alpha, self.beta, self.gamma, self.delta)


def _check_cosine(c: float, what: str) -> float:
    if abs(c) >= 1.0 - 1e-12:
        raise NoRealSolution(f"{what}: cosine magnitude {c!r} out of range")
    return math.acos(c)


def _angle_from_tan(t: float) -> float:
    a = math.atan(t)
    return a + math.pi if a <= 0.0 else a


def recover_quad_angles(lam: float, mu: float, nu: float,
                        tol: float = PLANAR_TOL) -> AngleRecovery:
    """Invert the factor formulas of an elliptic orthodiagonal quad.

    cos(delta) = (lam-1)(mu-1)/nu, tan(alpha) = tan(delta)(lam-1)/(lam+1),
    tan(gamma) analogous with mu, and beta closes the orthodiagonality
    relation. lam = -1 and mu = -1 select the right-angle branches.
    """
    if nu == 0.0:
        raise InconsistentInput("nu must be nonzero")
    lam_right = math.isclose(lam, -1.0, abs_tol=1e-12)
    mu_right = math.isclose(mu, -1.0, abs_tol=1e-12)
    if math.isclose(lam, 1.0, abs_tol=1e-12) or math.isclose(mu, 1.0, abs_tol=1e-12):
        # factor 1 forces delta = pi/2, where (lam, mu, nu) no longer
        # pin the remaining angles
        raise InconsistentInput("unit factor: the delta = pi/2 family is not recoverable")
    delta = _check_cosine((lam - 1.0) * (mu - 1.0) / nu, "delta recovery")
    tan_d = math.tan(delta)
    alpha = math.pi / 2 if lam_right else _angle_from_tan(tan_d * (lam - 1.0) / (lam + 1.0))
    gamma = math.pi / 2 if mu_right else _angle_from_tan(tan_d * (mu - 1.0) / (mu + 1.0))
    cos_b = math.cos(alpha) * math.cos(gamma) / math.cos(delta)
    if abs(cos_b) >= 1.0:
        raise NoRealSolution("beta recovery: cosine magnitude out of range")
    beta = math.acos(cos_b)
    rec = AngleRecovery(alpha, beta, gamma, delta)
    f = involution_factors(rec.to_quad())
    if f.kind != "elliptic":
        raise NoRealSolution(f"recovered quad degenerates to {f.kind}")
    drift = max(abs(f.lam - lam), abs(f.mu - mu), abs(f.nu - nu))
    if drift > tol * max(1.0, abs(lam), abs(mu), abs(nu)):
        raise NoRealSolution(f"factor round trip drifted by {drift:.3e}")
    return rec


def recover_deltoid_angles(lam: float, xi: float, antideltoid: bool = False,
                           tol: float = PLANAR_TOL) -> AngleRecovery:
    """Invert the factor formulas of an (anti)deltoid with its apex at
    the second-slot vertex.

    xi is the effective apex factor as it multiplies the linear term of
    the chain equation, so cos(delta) = (lam-1)/xi for a deltoid and
    (1-lam)/xi for an antideltoid; beta and gamma then pair with alpha
    and delta (equal for a deltoid, supplementary for an antideltoid).
    """
    if xi == 0.0:
        raise InconsistentInput("xi must be nonzero")
    signed = (1.0 - lam) if antideltoid else (lam - 1.0)
    delta = _check_cosine(signed / xi, "apex recovery")
    lam_right = math.isclose(lam, -1.0, abs_tol=1e-12)
    alpha = math.pi / 2 if lam_right else _angle_from_tan(
        math.tan(delta) * (lam - 1.0) / (lam + 1.0))
    if antideltoid:
        rec = AngleRecovery(alpha, math.pi - alpha, math.pi - delta, delta)
        want = ANTIDELTOID
    else:
        rec = AngleRecovery(alpha, alpha, delta, delta)
        want = DELTOID
    quad = rec.to_quad()
    kind = classify(quad)
    if kind.kind != want:
        raise NoRealSolution(f"recovered quad classifies as {kind.kind}, wanted {want}")
    f = involution_factors(quad)
    drift = max(abs(f.lam - lam), abs(f.n * f.xi - xi))
    if drift > tol * max(1.0, abs(lam), abs(xi)):
        raise NoRealSolution(f"apex factor round trip drifted by {drift:.3e}")
    return rec


def tau_from_vertices(vertices) -> tuple:
    """Oriented dihedral angles of the central tetrahedron.

    Sign orientation alternates with index parity; the zero dihedral of
    a planar tetrahedron gets the positive sign.
    """
    A = np.asarray(vertices, dtype=float)
    a = [A[i] - A[i - 1] for i in range(4)]
    taus = []
    for i in range(4):
        n_prev = np.cross(a[i - 1], a[i])
        n_next = np.cross(a[i], a[(i + 1) % 4])
        if np.linalg.norm(n_prev) == 0.0 or np.linalg.norm(n_next) == 0.0:
            raise NoRealSolution("collinear central edges")
        mag = math.acos(max(-1.0, min(1.0, float(np.dot(_unit(n_prev), _unit(n_next))))))
        if i % 2 == 0:     # odd hinge: orient against the outgoing edge pair
            orient = float(np.dot(np.cross(a[i], a[(i + 1) % 4]), a[(i + 2) % 4]))
        else:              # even hinge: orient against the incoming edge pair
            orient = float(np.dot(np.cross(a[i - 1], a[i]), a[(i + 1) % 4]))
        taus.append(_sign(orient) * mag)
    return tuple(taus)


def _planar_angles(vertices) -> tuple:
    A = np.asarray(vertices, dtype=float)
    out = []
    for i in range(4):
        out.append(_angle_between(A[i - 1] - A[i], A[(i + 1) % 4] - A[i]))
    return tuple(out)


def _rotz(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1], 0.0])


def _tetra_seeds(A1, A2, A4, delta):
    # planar guesses: intersect the delta_2 ray from A2 with the
    # delta_4 ray from A4, both side choices, then out-of-plane kicks
    seeds = []
    for s2, s4 in ((1, -1), (-1, 1), (1, 1), (-1, -1)):
        d2 = _rotz(_unit(A1 - A2), s2 * delta[1])
        d4 = _rotz(_unit(A1 - A4), s4 * delta[3])
        M = np.array([[d2[0], -d4[0]], [d2[1], -d4[1]]])
        rhs = (A4 - A2)[:2]
        det = np.linalg.det(M)
        if abs(det) < 1e-12:
            continue
        st = np.linalg.solve(M, rhs)
        base = A2 + st[0] * d2
        for kick in (0.3, -0.3, 0.0):
            seeds.append(np.array([base[0], base[1], kick]))
    rng = random.Random(17)
    for _ in range(8):
        seeds.append(np.array([rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                               rng.uniform(-1.0, 1.0)]))
    return seeds


def build_central_tetrahedron(delta, base_lengths=(1.0, 1.0), tol: float = PLANAR_TOL):
    """Central quad positions realizing the four corner angles.

    A1 sits at the origin, A2 on the x-axis at the first base length, A4
    in the xy-plane at angle delta_1; A3 is solved from the remaining
    three angle constraints. Of the two mirror solutions the one with
    tau_1 >= 0 is returned, along with all four oriented dihedrals.
    """
    delta = tuple(float(d) for d in delta)
    if len(delta) != 4 or any(not 0.0 < d < math.pi for d in delta):
        raise InconsistentInput("four corner angles in (0, pi) required")
    A1 = np.zeros(3)
    A2 = np.array([float(base_lengths[0]), 0.0, 0.0])
    A4 = float(base_lengths[1]) * np.array([math.cos(delta[0]), math.sin(delta[0]), 0.0])

    def residual(A3):
        return np.array([
            _angle_between(A1 - A2, A3 - A2) - delta[1],
            _angle_between(A2 - A3, A4 - A3) - delta[2],
            _angle_between(A3 - A4, A1 - A4) - delta[3],
        ])

    best = None
    for seed in _tetra_seeds(A1, A2, A4, delta):
        A3 = seed.copy()
        for _ in range(60):
            f = residual(A3)
            if not np.all(np.isfinite(f)):
                break
            if np.max(np.abs(f)) < 1e-13:
                break
            J = np.empty((3, 3))
            h = 1e-7
            for col in range(3):
                step = np.zeros(3)
                step[col] = h
                J[:, col] = (residual(A3 + step) - f) / h
            try:
                delta_step = np.linalg.solve(J, f)
            except np.linalg.LinAlgError:
                break
            A3 = A3 - delta_step
        f = residual(A3)
        if np.all(np.isfinite(f)):
            err = float(np.max(np.abs(f)))
            if best is None or err < best[0]:
                best = (err, A3)
        if best is not None and best[0] < 1e-13:
            break
    if best is None or best[0] > tol:
        achieved = math.inf if best is None else best[0]
        raise NoRealSolution(f"central tetrahedron: best angle residual {achieved:.3e}")
    vertices = np.vstack([A1, A2, best[1], A4])
    taus = tau_from_vertices(vertices)
    if taus[0] < 0.0:
        vertices = vertices * np.array([1.0, 1.0, -1.0])
        taus = tau_from_vertices(vertices)
    return vertices, taus


def recover_zeta(t, tau: float):
    """Split a hinge offset into zeta given tau: tan(tau + zeta) = t.

    Returns the principal choice and its alternate; t pins tau + zeta
    only modulo pi, and only kinematic closure separates the two.
    """
    if isinstance(t, ProjectiveReal):
        full = math.atan2(t.p, t.q)
    else:
        full = math.pi / 2 if math.isinf(t) else math.atan(float(t))
    zeta = _wrap(full - tau)
    return zeta, _wrap(zeta + math.pi)


def _flip_F(F: ProjectiveReal) -> ProjectiveReal:
    # the alternate branch F -> -1/F, i.e. tau + zeta shifted by pi
    return ProjectiveReal(-F.q, F.p)


@dataclass(frozen=True)
class LinkageDesign:
    """The abstract mechanism: four corner quads and four hinge
    couplings, with no central embedding."""

    quads: tuple
    couplings: tuple
    _polys: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if len(self.quads) != 4 or len(self.couplings) != 4:
            raise InconsistentInput("four quads and four couplings required")
        object.__setattr__(self, "quads", tuple(self.quads))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        for q in self.quads:
            if not is_orthodiagonal(q, PLANAR_TOL):
                raise InconsistentInput("quad is not orthodiagonal")
        object.__setattr__(self, "_polys", tuple(config_poly(q) for q in self.quads))

    @property
    def polys(self) -> tuple:
        return self._polys

    def factors(self) -> tuple:
        return tuple(involution_factors(q) for q in self.quads)

    def classifications(self) -> tuple:
        return tuple(classify(q).kind for q in self.quads)

    def elliptic_params(self) -> EllipticParams:
        f = self.factors()
        if any(fi.kind != "elliptic" for fi in f):
            raise InconsistentInput("elliptic parameters need four elliptic quads")
        return EllipticParams(
            nu=tuple(fi.nu for fi in f),
            t=tuple(c.t_value for c in self.couplings),
            lam=tuple(fi.lam for fi in f),
            mu=tuple(fi.mu for fi in f),
        )


@dataclass(frozen=True)
class MeshDesign:
    """A fully realized flexible mesh: four corner quads, four hinge
    couplings carrying (tau, zeta), central vertex positions, and spoke
    lengths for the outer flaps."""

    quads: tuple
    couplings: tuple
    vertices: tuple
    spokes_b: tuple = (1.0, 1.0, 1.0, 1.0)
    spokes_c: tuple = (1.0, 1.0, 1.0, 1.0)
    _polys: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if len(self.quads) != 4 or len(self.couplings) != 4:
            raise InconsistentInput("four quads and four couplings required")
        object.__setattr__(self, "quads", tuple(self.quads))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "vertices",
                           tuple(tuple(float(c) for c in v) for v in self.vertices))
        object.__setattr__(self, "spokes_b", tuple(float(v) for v in self.spokes_b))
        object.__setattr__(self, "spokes_c", tuple(float(v) for v in self.spokes_c))
        if len(self.vertices) != 4:
            raise InconsistentInput("four central vertices required")
        for q in self.quads:
            if not is_orthodiagonal(q, PLANAR_TOL):
                raise InconsistentInput("quad is not orthodiagonal")
        for c in self.couplings:
            if c.tau is None:
                raise InconsistentInput("couplings must carry tau and zeta")
        got = _planar_angles(self.vertices)
        for i, q in enumerate(self.quads):
            if abs(got[i] - q.delta) > PLANAR_TOL:
                raise InconsistentInput(
                    f"central angle {i + 1} is {got[i]:.12f}, quad wants {q.delta:.12f}")
        object.__setattr__(self, "_polys", tuple(config_poly(q) for q in self.quads))

    @property
    def polys(self) -> tuple:
        return self._polys

    @property
    def tau(self) -> tuple:
        return tuple(c.tau for c in self.couplings)

    @property
    def zeta(self) -> tuple:
        return tuple(c.zeta for c in self.couplings)

    def positions(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def factors(self) -> tuple:
        return tuple(involution_factors(q) for q in self.quads)

    def classifications(self) -> tuple:
        return tuple(classify(q).kind for q in self.quads)

    def elliptic_params(self) -> EllipticParams:
        f = self.factors()
        if any(fi.kind != "elliptic" for fi in f):
            raise InconsistentInput("elliptic parameters need four elliptic quads")
        return EllipticParams(
            nu=tuple(fi.nu for fi in f),
            t=tuple(c.t_value for c in self.couplings),
            lam=tuple(fi.lam for fi in f),
            mu=tuple(fi.mu for fi in f),
        )


def _normalize_spokes(spoke_lengths):
    if spoke_lengths is None:
        return (1.0,) * 4, (1.0,) * 4
    if isinstance(spoke_lengths, (int, float)):
        return (float(spoke_lengths),) * 4, (float(spoke_lengths),) * 4
    b, c = spoke_lengths
    return tuple(float(v) for v in b), tuple(float(v) for v in c)


def _probe_and_fix(quads, couplings, vertices, spokes_b, spokes_c, probe_tol):
    """Resolve the zeta branch per coupling by closure probing."""
    from . import kinematics

    combos = sorted(itertools.product((0, 1), repeat=4), key=sum)
    best = (math.inf, None)
    for combo in combos:
        cs = []
        for flip, c in zip(combo, couplings):
            if not flip:
                cs.append(c)
            else:
                cs.append(Coupling(_flip_F(c.F), c.k, c.tau, _wrap(c.zeta + math.pi)))
        design = MeshDesign(quads, tuple(cs), vertices, spokes_b, spokes_c)
        worst = kinematics.probe_closure(design, samples=3)
        if worst < probe_tol:
            return design
        if worst < best[0]:
            best = (worst, combo)
    raise AssemblyError(
        f"no zeta branch closes: best combo {best[1]} has residual {best[0]:.3e}")


def assemble_design(p: EllipticParams, spoke_lengths=None, choices=None,
                    probe_tol: float = 1e-6) -> MeshDesign:
    """Realize a matched elliptic parameter set as a mesh design.

    The parameters must already match (all six minors vanish) and admit
    a global motion. The zeta branch on each coupling is selected by a
    kinematic closure probe unless explicit choices are supplied.
    """
    if not is_oi_match(p, tol=1e-8):
        raise InconsistentInput("parameters do not match: minors do not vanish")
    report = global_existence(p)
    if not report.global_ok:
        raise InconsistentInput(f"no global motion: {report.note}")
    quads = tuple(
        recover_quad_angles(p.lam[i], p.mu[i], p.nu[i]).to_quad() for i in range(4))
    vertices, taus = build_central_tetrahedron([q.delta for q in quads])
    spokes_b, spokes_c = _normalize_spokes(spoke_lengths)
    couplings = []
    for i in range(4):
        F = principal_F(p.t[i])
        zeta, alt = recover_zeta(p.t[i], taus[i])
        if choices is not None and choices[i]:
            couplings.append(Coupling(_flip_F(F), 1.0, taus[i], alt))
        else:
            couplings.append(make_coupling(F, tau=taus[i], zeta=zeta))
    if choices is not None:
        return MeshDesign(quads, tuple(couplings), vertices, spokes_b, spokes_c)
    return _probe_and_fix(quads, tuple(couplings), vertices, spokes_b, spokes_c,
                          probe_tol)


def assemble_deltoid_design(nu1: float, xi2: float, xi3: float, nu4: float,
                            t1, t2, F3, t4, antideltoid_pair: bool = True,
                            spoke_lengths=None, probe_tol: float = 1e-6) -> MeshDesign:
    """Realize a matched chain whose second and third quads are
    (anti)deltoids with their apexes on the shared hinge.

    antideltoid_pair selects deltoid+antideltoid; otherwise both middle
    quads are deltoids. The elliptic end quads have all right angles, as
    forced by the nonzero offsets on their hinges.
    """
    quads = (
        recover_quad_angles(-1.0, -1.0, nu1).to_quad(),
        recover_deltoid_angles(-1.0, xi2, antideltoid=False).to_quad(),
        recover_deltoid_angles(-1.0, xi3, antideltoid=antideltoid_pair).to_quad(),
        recover_quad_angles(-1.0, -1.0, nu4).to_quad(),
    )
    vertices, taus = build_central_tetrahedron([q.delta for q in quads])
    spokes_b, spokes_c = _normalize_spokes(spoke_lengths)
    couplings = []
    for i, t in enumerate((t1, t2, None, t4)):
        if i == 2:
            F = ProjectiveReal.from_value(float(F3))
            zeta = _wrap(2.0 * math.atan(float(F3)) - taus[2])
        else:
            F = principal_F(t)
            zeta, _ = recover_zeta(t, taus[i])
        couplings.append(make_coupling(F, tau=taus[i], zeta=zeta))
    return _probe_and_fix(quads, tuple(couplings), vertices, spokes_b, spokes_c,
                          probe_tol)
