"""Motion of an assembled mesh design.

The driving fold x1 determines the remaining seven fold variables
through the four corner biquadratics and the hinge offset maps; the
closure residual measures how well the loop returns to its start. The
admissible driving range is computed exactly in the symmetric
coordinate w = x + m/x, folds are embedded as spoke endpoints in
space, and oriented dihedrals recover the fold angles from positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import mobius, w_transform
from .errors import (
    DegenerateBranch,
    InconsistentInput,
    NoRealSolution,
    TraceError,
)
from .projective import ProjectiveReal
from .spherical import ELLIPTIC

# closure verdict thresholds: at most ACCEPT certifies, beyond REJECT
# refutes, between them is reported as inconclusive
CLOSE_ACCEPT = 1e-8
CLOSE_REJECT = 1e-3

_JUMP = 0.5
_HALF_PI = 0.5 * math.pi


def _wrap(angle: float) -> float:
    rem = math.remainder(angle, math.tau)
    return math.pi if rem <= -math.pi else rem


def _sign(v: float) -> float:
    return -1.0 if v < 0.0 else 1.0


def _x_of(theta: float) -> ProjectiveReal:
    return ProjectiveReal(math.sin(theta), math.cos(theta))


def _theta_of(x: ProjectiveReal) -> float:
    th = math.atan2(x.p, x.q)
    return th - math.pi if th >= _HALF_PI else th


def _as_x(value) -> ProjectiveReal:
    if isinstance(value, ProjectiveReal):
        return value
    return ProjectiveReal.from_value(float(value))


@dataclass(frozen=True)
class RealIntervalSet:
    """Arcs of the driving angle theta = atan(x1), taken modulo pi.

    Each arc is (lo, hi) with lo in [-pi/2, pi/2) and 0 < hi - lo <= pi;
    an arc may run past pi/2, wrapping around the fold-flat point.
    """

    arcs: tuple = ()
    full: bool = False

    @classmethod
    def full_circle(cls) -> "RealIntervalSet":
        return cls(((-_HALF_PI, _HALF_PI),), True)

    @classmethod
    def empty(cls) -> "RealIntervalSet":
        return cls((), False)

    @property
    def is_empty(self) -> bool:
        return not self.full and not self.arcs

    @property
    def measure(self) -> float:
        if self.full:
            return math.pi
        return sum(hi - lo for lo, hi in self.arcs)

    def contains(self, theta: float, tol: float = 0.0) -> bool:
        if self.full:
            return True
        for lo, hi in self.arcs:
            if (theta - lo) % math.pi <= (hi - lo) + tol:
                return True
            if tol > 0.0 and (lo - theta) % math.pi <= tol:
                return True
        return False

    def contains_value(self, x, tol: float = 0.0) -> bool:
        return self.contains(_theta_of(_as_x(x)), tol)

    def endpoints(self) -> tuple:
        """All arc endpoints normalized into [-pi/2, pi/2), sorted."""
        if self.full:
            return ()
        out = []
        for lo, hi in self.arcs:
            for v in (lo, hi):
                v = math.remainder(v, math.pi)
                if v >= _HALF_PI:
                    v -= math.pi
                out.append(v)
        return tuple(sorted(out))

    def sample(self, n: int) -> list:
        """n interior driving angles spread across the arcs."""
        if self.full:
            return [-_HALF_PI + (j + 0.5) * math.pi / n for j in range(n)]
        if not self.arcs:
            return []
        total = self.measure
        out = []
        for lo, hi in self.arcs:
            count = max(1, round(n * (hi - lo) / total))
            out.extend(lo + (j + 0.5) * (hi - lo) / count for j in range(count))
        return out


@dataclass
class ChainState:
    """All eight fold variables at one driving value, with the branch
    indices taken at the three solved corners and the closure residual
    of the fourth."""

    x: tuple
    y: tuple
    branches: tuple
    residual: float

    @property
    def phi(self) -> tuple:
        return tuple(v.angle for v in self.x)

    @property
    def psi(self) -> tuple:
        return tuple(v.angle for v in self.y)


def _state_distance(s1: ChainState, s2: ChainState) -> float:
    d = 0.0
    for a, b in zip(s1.x + s1.y, s2.x + s2.y):
        d += a.chordal(b)
    return d


def _p4_scale(design) -> float:
    return max(abs(c) for c in design.polys[3].coefficients)


def chain_candidates(design, x1) -> list:
    """Every branch combination of the chain solve at one driving value."""
    x1 = _as_x(x1)
    P = design.polys
    F = [c.F for c in design.couplings]
    scale = _p4_scale(design)
    y1 = mobius(F[0], x1)
    out = []
    try:
        roots1 = P[0].solve_first(x1)
    except DegenerateBranch:
        return []
    for b1, x2 in enumerate(roots1):
        y2 = mobius(F[1], x2)
        try:
            roots2 = P[1].solve_second(y2)
        except DegenerateBranch:
            continue
        for b2, y3 in enumerate(roots2):
            x3 = mobius(F[2], y3) if F[2].is_infinite else mobius(-F[2], y3)
            try:
                roots3 = P[2].solve_first(x3)
            except DegenerateBranch:
                continue
            for b3, x4 in enumerate(roots3):
                y4 = mobius(F[3], x4)
                res = abs(P[3].evaluate(y4, y1)) / scale
                out.append(ChainState((x1, x2, x3, x4), (y1, y2, y3, y4),
                                      (b1, b2, b3), res))
    return out


def chain_solve(design, x1, branches=(0, 0, 0)) -> ChainState:
    """Solve the chain along one fixed branch triple.

    Branch indices clamp to the available root count (a double root
    offers only one); an unsolvable corner raises NoRealSolution naming
    the hinge variable that failed.
    """
    x1 = _as_x(x1)
    P = design.polys
    F = [c.F for c in design.couplings]
    y1 = mobius(F[0], x1)
    roots1 = P[0].solve_first(x1)
    if not roots1:
        raise NoRealSolution("no real fold x2 at this driving value")
    x2 = roots1.values[min(branches[0], len(roots1) - 1)]
    y2 = mobius(F[1], x2)
    roots2 = P[1].solve_second(y2)
    if not roots2:
        raise NoRealSolution("no real fold y3 at this driving value")
    y3 = roots2.values[min(branches[1], len(roots2) - 1)]
    x3 = mobius(F[2], y3) if F[2].is_infinite else mobius(-F[2], y3)
    roots3 = P[2].solve_first(x3)
    if not roots3:
        raise NoRealSolution("no real fold x4 at this driving value")
    x4 = roots3.values[min(branches[2], len(roots3) - 1)]
    y4 = mobius(F[3], x4)
    res = abs(P[3].evaluate(y4, y1)) / _p4_scale(design)
    return ChainState((x1, x2, x3, x4), (y1, y2, y3, y4), tuple(branches), res)


def closure_residual(design, x1) -> float:
    """Best closure over all branch combinations; inf when no corner
    has a real solution."""
    cands = chain_candidates(design, x1)
    if not cands:
        return math.inf
    return min(c.residual for c in cands)


def _recip(nu: float, w: ProjectiveReal) -> ProjectiveReal:
    # partner through w w' = nu
    return ProjectiveReal(nu * w.q, w.p)


def _w_untransform(w: ProjectiveReal, t: ProjectiveReal, k: float) -> ProjectiveReal:
    m = ((2.0 * t.q, -4.0 * k * t.p), (t.p, 2.0 * k * t.q))
    return w.apply(m)


def _range_ok(w: ProjectiveReal, m: float) -> bool:
    # x + m/x stays outside (-2 sqrt(m), 2 sqrt(m)) for m > 0
    if m <= 0.0:
        return True
    return abs(w.p) >= 2.0 * math.sqrt(m) * abs(w.q)


def _admissible_predicate(design):
    f = design.factors()
    if any(fi.kind != ELLIPTIC for fi in f):
        raise InconsistentInput("admissible ranges need four elliptic quads")
    lam = [fi.lam for fi in f]
    mu = [fi.mu for fi in f]
    nu = [fi.nu for fi in f]
    t = [c.t for c in design.couplings]
    k = [c.k for c in design.couplings]
    if lam[0] < 0.0 and mu[1] < 0.0 and lam[2] < 0.0:
        return None    # every corner solves everywhere

    def pred(theta: float) -> bool:
        x1 = _x_of(theta)
        w1 = ProjectiveReal(x1.p * x1.p + mu[0] * x1.q * x1.q, x1.p * x1.q)
        w2 = _recip(nu[0], w1)
        if not _range_ok(w2, lam[0]):
            return False
        w3p = _recip(nu[1], w_transform(w2, t[1], k[1]))
        if not _range_ok(w3p, mu[1]):
            return False
        w4 = _recip(nu[2], _w_untransform(w3p, t[2], k[2]))
        return _range_ok(w4, lam[2])

    return pred


def _refine_edge(pred, th_false: float, th_true: float, iters: int = 52) -> float:
    for _ in range(iters):
        mid = 0.5 * (th_false + th_true)
        if pred(mid):
            th_true = mid
        else:
            th_false = mid
    return 0.5 * (th_false + th_true)


def admissible_interval(design, samples: int = 4096) -> RealIntervalSet:
    """Driving angles where all four corners have real folds.

    Exact range conditions in the symmetric coordinate are sampled on a
    uniform grid and the arc boundaries refined by bisection; only
    all-elliptic designs have the needed factorization.
    """
    pred = _admissible_predicate(design)
    if pred is None:
        return RealIntervalSet.full_circle()
    step = math.pi / samples
    ths = [-_HALF_PI + (i + 0.5) * step for i in range(samples)]
    vals = [pred(th) for th in ths]
    if all(vals):
        return RealIntervalSet.full_circle()
    if not any(vals):
        return RealIntervalSet.empty()
    arcs = []
    # pred is pi-periodic in theta, so refinement may run past the seam
    for run in _circular_runs(vals):
        th_first = ths[run[0]]
        th_last = ths[run[-1] % samples] + (math.pi if run[-1] >= samples else 0.0)
        lo = _refine_edge(pred, th_first - step, th_first)
        hi = _refine_edge(pred, th_last + step, th_last)
        lo_n = math.remainder(lo, math.pi)
        if lo_n >= _HALF_PI:
            lo_n -= math.pi
        arcs.append((lo_n, lo_n + (hi - lo)))
    arcs.sort()
    return RealIntervalSet(tuple(arcs))


def probe_closure(design, samples: int = 3) -> float:
    """Worst closure residual over interior points of the best arc.

    Small iff the design genuinely flexes on some admissible arc. Falls
    back to a residual scan for designs without the elliptic range
    predicate.
    """
    try:
        ivs = admissible_interval(design, samples=1024)
    except InconsistentInput:
        ivs = None
    if ivs is not None:
        if ivs.is_empty:
            return math.inf
        best = math.inf
        for lo, hi in ivs.arcs:
            worst = 0.0
            for j in range(samples):
                th = lo + (j + 0.5) * (hi - lo) / samples
                worst = max(worst, closure_residual(design, _x_of(th)))
            best = min(best, worst)
        return best
    n = 240
    ths = [-_HALF_PI + (i + 0.5) * math.pi / n for i in range(n)]
    vals = [closure_residual(design, _x_of(th)) for th in ths]
    best = math.inf
    for run in _circular_runs([math.isfinite(v) for v in vals]):
        if len(run) < 3:
            continue
        rv = [vals[i % n] for i in run]
        w = max(3, len(rv) // 4)
        for s in range(len(rv) - w + 1):
            best = min(best, max(rv[s:s + w]))
    return best


def _circular_runs(flags: list) -> list:
    """Maximal circular runs of true indices (indices may exceed n)."""
    n = len(flags)
    if all(flags):
        return [list(range(n))]
    runs = []
    i = 0
    while i < n:
        if flags[i] and not flags[i - 1]:
            j = i
            while flags[j % n]:
                j += 1
            runs.append(list(range(i, j)))
            i = j
        else:
            i += 1
    return runs


def _unit_or_raise(v, what: str):
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise DegenerateBranch(f"degenerate face: {what}")
    return v / n


def _star(v: float) -> float:
    # supplement keeping the sign; an involution, with star(0) = pi
    return _sign(v) * (math.pi - abs(v))


def embed(design, state: ChainState):
    """Spoke endpoints realizing the fold variables in space.

    Returns (A, B, C): the central vertices and, per corner i, the two
    outer spoke endpoints B_i and C_i hanging on the corner's two
    hinges at the recorded dihedrals and at the design's spoke angles.
    """
    A = design.positions()
    hinge = [A[h] - A[h - 1] for h in range(4)]
    phi = state.phi
    psi = state.psi
    B = np.empty((4, 3))
    C = np.empty((4, 3))
    for h in range(4):
        h1 = (h + 1) % 4
        n = _unit_or_raise(np.cross(hinge[h], hinge[h1]), "collinear hinges")
        # B spoke on the corner's first hinge; the fold variable measures
        # the face against the flat state, the spoke construction needs
        # the supplementary rotation -star(v)
        e = _unit_or_raise(hinge[h], "zero hinge")
        m = np.cross(n, e)
        d = -_star(phi[h] if h % 2 == 0 else psi[h])
        pl = design.quads[h].gamma if h % 2 == 0 else design.quads[h].alpha
        B[h] = A[h] + design.spokes_b[h] * (
            -math.cos(pl) * e + math.sin(pl) * (math.cos(d) * m - math.sin(d) * n))
        # C spoke on the corner's second hinge
        e1 = _unit_or_raise(hinge[h1], "zero hinge")
        m1 = np.cross(n, e1)
        d = _star(psi[h1] if h % 2 == 1 else phi[h1])
        pl = design.quads[h].gamma if h % 2 == 1 else design.quads[h].alpha
        C[h] = A[h] + design.spokes_c[h] * (
            math.cos(pl) * e1 + math.sin(pl) * (math.cos(d) * m1 + math.sin(d) * n))
    return A, B, C


def oriented_dihedrals(vertices, spokes_b, spokes_c):
    """Fold angles (phi, psi) recovered from spoke positions alone.

    Each hinge carries one B-side and one C-side plane; their oriented
    dihedrals against the central planes give the fold variables, with
    the parity of the hinge deciding which of the pair is phi and which
    is psi. A vanishing face normal raises DegenerateBranch.
    """
    A = np.asarray(vertices, dtype=float)
    B = np.asarray(spokes_b, dtype=float)
    C = np.asarray(spokes_c, dtype=float)
    hinge = [A[h] - A[h - 1] for h in range(4)]
    phi = [0.0] * 4
    psi = [0.0] * 4
    for h in range(4):
        h1 = (h + 1) % 4
        b_vec = A[h] - B[h]
        n1 = _unit_or_raise(np.cross(hinge[h], hinge[h1]), "central plane")
        n2 = _unit_or_raise(np.cross(hinge[h], b_vec), "B-side plane")
        raw_b = _sign(float(np.dot(np.cross(hinge[h], hinge[h1]), b_vec))) \
            * math.atan2(float(np.linalg.norm(np.cross(n1, n2))),
                         float(np.dot(n1, n2)))
        c_vec = C[h - 1] - A[h - 1]
        n1c = _unit_or_raise(np.cross(hinge[h - 1], hinge[h]), "central plane")
        n2c = _unit_or_raise(np.cross(c_vec, hinge[h]), "C-side plane")
        raw_c = _sign(float(np.dot(np.cross(hinge[h - 1], hinge[h]), c_vec))) \
            * math.atan2(float(np.linalg.norm(np.cross(n1c, n2c))),
                         float(np.dot(n1c, n2c)))
        # the B-side normal pair measures the supplement with reversed
        # orientation relative to the fold variable; the C-side pair
        # measures it directly
        if h % 2 == 0:
            phi[h] = -raw_b
            psi[h] = raw_c
        else:
            phi[h] = raw_c
            psi[h] = -raw_b
    return tuple(phi), tuple(psi)


@dataclass
class MotionFrame:
    """One traced configuration: fold variables, spoke positions and
    the per-frame quality measures."""

    index: int
    theta: float
    state: ChainState
    phi: tuple
    psi: tuple
    spokes_b: np.ndarray
    spokes_c: np.ndarray
    closure_residual: float
    max_corner_deviation: float

    @property
    def x1(self) -> float:
        return self.state.x[0].value


def _corner_deviation(design, B, C) -> float:
    A = design.positions()
    worst = 0.0
    for h in range(4):
        u = B[h] - A[h]
        v = C[h] - A[h]
        ang = math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))
        worst = max(worst, abs(ang - design.quads[h].beta))
    return worst


def _best_continuation(design, x1, prev: ChainState, close_tol: float = math.inf):
    # spurious factored branches of (anti)deltoid corners can cross the
    # true motion, so continuity alone may not separate them: restrict
    # to closing candidates whenever any exist
    cands = chain_candidates(design, x1)
    if not cands:
        return None, math.inf
    closing = [s for s in cands if s.residual <= close_tol]
    pool = closing if closing else cands
    if prev is None:
        best = min(pool, key=lambda s: s.residual)
        return best, 0.0
    best = min(pool, key=lambda s: _state_distance(s, prev))
    return best, _state_distance(best, prev)


def _walk(design, th0: float, s0: ChainState, th1: float, min_step: float,
          close_tol: float = math.inf) -> ChainState:
    state, dist = _best_continuation(design, _x_of(th1), s0, close_tol)
    if state is not None and dist <= _JUMP:
        return state
    if abs(th1 - th0) <= min_step:
        raise TraceError(
            f"irreconcilable branch jump near theta={th1:.9f} (distance {dist:.3f})")
    mid = 0.5 * (th0 + th1)
    sm = _walk(design, th0, s0, mid, min_step, close_tol)
    return _walk(design, mid, sm, th1, min_step, close_tol)


def _scan_arcs(design, probe_tol: float):
    n = 720
    ths = [-_HALF_PI + (i + 0.5) * math.pi / n for i in range(n)]
    vals = [closure_residual(design, _x_of(th)) for th in ths]
    runs = _circular_runs([v < probe_tol for v in vals])
    if not runs:
        raise TraceError("no driving value closes the chain")
    best = max(runs, key=len)
    if len(best) == n:
        return (-_HALF_PI, _HALF_PI), True
    lo = ths[best[0] % n]
    hi = lo + (len(best) - 1) * math.pi / n
    return (lo, hi), False


def _select_arc(design, probe_tol: float):
    try:
        ivs = admissible_interval(design)
    except InconsistentInput:
        return _scan_arcs(design, probe_tol)
    if ivs.is_empty:
        raise TraceError("empty admissible driving range")
    if ivs.full:
        # isolated closures can hide inside a fully admissible range
        worst = 0.0
        for j in range(5):
            th = -_HALF_PI + (j + 0.5) * math.pi / 5
            worst = max(worst, closure_residual(design, _x_of(th)))
        if worst > probe_tol:
            raise TraceError(
                f"admissible range does not close; worst residual {worst:.3e}")
        return (-_HALF_PI, _HALF_PI), True
    best = (math.inf, None)
    for lo, hi in ivs.arcs:
        worst = 0.0
        for j in range(3):
            th = lo + (j + 0.5) * (hi - lo) / 3
            worst = max(worst, closure_residual(design, _x_of(th)))
        if worst < probe_tol:
            return (lo, hi), False
        if worst < best[0]:
            best = (worst, (lo, hi))
    raise TraceError(
        f"no admissible arc closes; best residual {best[0]:.3e}")


def trace_motion(design, frames: int = 200, probe_tol: float = 1e-6) -> list:
    """Follow one motion branch across the admissible driving range.

    Frames sample the closing arc (strictly inside its endpoints, where
    fold branches collide); between frames the branch is continued by
    nearest-configuration tracking with adaptive step halving.
    """
    if frames < 1:
        raise InconsistentInput("at least one frame required")
    (lo, hi), full = _select_arc(design, probe_tol)
    span = hi - lo
    if full:
        thetas = [lo + j * span / frames for j in range(frames)]
    else:
        thetas = [lo + (j + 0.5) * span / frames for j in range(frames)]
    min_step = max(span * 1e-9, 1e-15)
    out = []
    prev = None
    prev_th = None
    for idx, th in enumerate(thetas):
        if prev is None:
            state, _ = _best_continuation(design, _x_of(th), None, probe_tol)
            if state is None:
                raise TraceError(f"no real configuration at theta={th:.9f}")
        else:
            state = _walk(design, prev_th, prev, th, min_step, probe_tol)
        A, B, C = embed(design, state)
        frame = MotionFrame(
            index=idx, theta=th, state=state,
            phi=state.phi, psi=state.psi,
            spokes_b=B, spokes_c=C,
            closure_residual=state.residual,
            max_corner_deviation=_corner_deviation(design, B, C),
        )
        out.append(frame)
        prev, prev_th = state, th
    return out


@dataclass(frozen=True)
class GeometryReport:
    """Worst-case residuals of the three invariant geometric properties
    across a traced motion."""

    max_orthogonality: float
    max_zeta_deviation: float
    max_fold_symmetry: float
    frames: int
    tol: float

    @property
    def ok(self) -> bool:
        return (self.max_orthogonality <= self.tol
                and self.max_zeta_deviation <= self.tol
                and self.max_fold_symmetry <= self.tol)


def _perp(v, e):
    return v - float(np.dot(v, e)) * e


def _half_residual(v: float) -> float:
    w = abs(_wrap(v))
    return min(w, math.pi - w)


def geometric_property_check(design, frames: int = 16,
                             tol: float = CLOSE_ACCEPT) -> GeometryReport:
    """Verify the three invariants that characterize this mesh family.

    (1) At every corner the B-side plane through the outgoing hinge is
    perpendicular to the C-side plane through the incoming hinge.
    (2) The angle along each hinge between the B-plane of one corner
    and the C-plane of the next stays equal to that hinge's zeta.
    (3) At each hinge, folding both incident quads to their partner
    branches shifts the two fold variables by a common rotation.
    """
    motion = trace_motion(design, frames=frames)
    A = design.positions()
    hinge = [A[h] - A[h - 1] for h in range(4)]
    try:
        factors = design.factors()
    except Exception:
        factors = None
    worst_orth = 0.0
    worst_zeta = 0.0
    worst_fold = 0.0
    fold_pairs = None
    if factors is not None and all(f.kind == ELLIPTIC for f in factors):
        fold_pairs = (
            (factors[0].mu, factors[3].mu),
            (factors[0].lam, factors[1].lam),
            (factors[2].mu, factors[1].mu),
            (factors[2].lam, factors[3].lam),
        )
    for fr in motion:
        B, C = fr.spokes_b, fr.spokes_c
        for h in range(4):
            h1 = (h + 1) % 4
            n1 = np.cross(B[h] - A[h], A[h1] - A[h])
            n2 = np.cross(C[h] - A[h], A[h - 1] - A[h])
            orth = abs(float(np.dot(n1, n2)))
            orth /= max(np.linalg.norm(n1) * np.linalg.norm(n2), 1e-300)
            worst_orth = max(worst_orth, orth)
            e = hinge[h1] / np.linalg.norm(hinge[h1])
            u = _perp(B[h] - A[h], e)
            v = _perp(C[h1] - A[h1], e)
            signed = math.atan2(float(np.dot(np.cross(u, v), e)),
                                float(np.dot(u, v)))
            # the rotation sense about the hinge alternates with parity
            want = design.zeta[h1] if h1 % 2 == 0 else -design.zeta[h1]
            worst_zeta = max(worst_zeta, abs(_wrap(signed - want)))
        if fold_pairs is not None:
            for h in range(4):
                m_x, m_y = fold_pairs[h]
                fx = fr.state.x[h].apply(((0.0, m_x), (1.0, 0.0)))
                fy = fr.state.y[h].apply(((0.0, m_y), (1.0, 0.0)))
                phi, phi_f = fr.state.x[h].angle, fx.angle
                psi, psi_f = fr.state.y[h].angle, fy.angle
                off = design.tau[h] + design.zeta[h]
                r1 = _half_residual(0.5 * (phi_f - phi) - 0.5 * (psi_f - psi))
                r2 = _half_residual(0.5 * (psi + psi_f) - 0.5 * (phi + phi_f) - off)
                worst_fold = max(worst_fold, r1, r2)
    return GeometryReport(worst_orth, worst_zeta, worst_fold, len(motion), tol)
