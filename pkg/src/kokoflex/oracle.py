"""Independent brute-force verification paths for certified designs.

Deliberately self-contained: corner polynomials are rebuilt here from raw
corner angles, couplings enter only through their projective parameter,
and flexibility is re-established by dense resultant elimination and
exhaustive scanning.  None of the factored machinery used by the main
code path is reused, so agreement between the two is meaningful evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .errors import DegenerateElimination, InconsistentInput
from .kinematics import CLOSE_ACCEPT, RealIntervalSet, closure_residual
from .projective import ProjectiveReal

_HALF_PI = math.pi / 2.0


def _on_circle(theta: float) -> ProjectiveReal:
    return ProjectiveReal(math.sin(theta), math.cos(theta))


@dataclass(frozen=True)
class BiquadraticPoly:
    """Homogeneous polynomial of degree 2 in each of two projective slots.

    ``grid[i][j]`` multiplies ``basis_i(u) * basis_j(v)`` where the basis
    runs (p^2, p q, q^2) per slot.
    """

    grid: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(c) for c in row) for row in self.grid)
        if len(rows) != 3 or any(len(row) != 3 for row in rows):
            raise InconsistentInput("coefficient grid must be 3x3")
        object.__setattr__(self, "grid", rows)

    @classmethod
    def from_corner_angles(cls, alpha: float, beta: float, gamma: float,
                           delta: float) -> "BiquadraticPoly":
        # closure condition of one corner, rebuilt from the raw angles;
        # first slot is the fold on the delta-alpha side
        s = math.sin
        c22 = s((alpha + beta + gamma - delta) / 2) * s((alpha - beta + gamma - delta) / 2)
        c20 = s((alpha - beta - gamma - delta) / 2) * s((alpha + beta - gamma - delta) / 2)
        c02 = s((alpha + beta - gamma + delta) / 2) * s((alpha - beta - gamma + delta) / 2)
        c00 = s((alpha - beta + gamma + delta) / 2) * s((alpha + beta + gamma + delta) / 2)
        cross = -2.0 * s(alpha) * s(gamma)
        return cls(((c22, 0.0, c20), (0.0, cross, 0.0), (c02, 0.0, c00)))

    def evaluate(self, u: ProjectiveReal, v: ProjectiveReal) -> float:
        bu = (u.p * u.p, u.p * u.q, u.q * u.q)
        bv = (v.p * v.p, v.p * v.q, v.q * v.q)
        return float(sum(self.grid[i][j] * bu[i] * bv[j]
                         for i in range(3) for j in range(3)))

    def first_coefficients(self, v: ProjectiveReal) -> Tuple[float, float, float]:
        """(A, B, C) of A p^2 + B p q + C q^2 in the first slot at fixed v."""
        bv = (v.p * v.p, v.p * v.q, v.q * v.q)
        return tuple(sum(self.grid[i][j] * bv[j] for j in range(3))
                     for i in range(3))

    def substituted(self, first: ProjectiveReal,
                    second: ProjectiveReal) -> "BiquadraticPoly":
        """Pull back through the rotations u -> u + first, v -> v + second."""
        m = np.array(self.grid)
        t_first = _shift_basis(first)
        t_second = _shift_basis(second)
        return BiquadraticPoly(tuple(map(tuple, t_first.T @ m @ t_second)))


def _shift_basis(shift: ProjectiveReal) -> np.ndarray:
    # row i expresses basis_i of the shifted slot in the unshifted basis
    p, q = shift.p, shift.q
    return np.array([
        [q * q, 2.0 * p * q, p * p],
        [-p * q, q * q - p * p, p * q],
        [p * p, -2.0 * p * q, q * q],
    ])


def sylvester_resultant(P: BiquadraticPoly, Q: BiquadraticPoly) -> Callable:
    """Eliminate the shared first slot; returns R(second-of-P, second-of-Q).

    The value is the 4x4 Sylvester determinant normalized by the squared
    coefficient scales of both quadratics, so magnitudes are comparable
    across slices.
    """
    if all(c == 0.0 for c in P.grid[0]) and all(c == 0.0 for c in Q.grid[0]):
        raise DegenerateElimination(
            "both leading coefficient rows vanish; the resultant is identically zero")

    def resultant(vp: ProjectiveReal, vq: ProjectiveReal) -> float:
        a2, a1, a0 = P.first_coefficients(vp)
        b2, b1, b0 = Q.first_coefficients(vq)
        scale_a = max(abs(a2), abs(a1), abs(a0))
        scale_b = max(abs(b2), abs(b1), abs(b0))
        if scale_a == 0.0 or scale_b == 0.0:
            # a slice where one polynomial vanishes identically shares all roots
            return 0.0
        mat = np.array([
            [a2, a1, a0, 0.0],
            [0.0, a2, a1, a0],
            [b2, b1, b0, 0.0],
            [0.0, b2, b1, b0],
        ])
        return float(np.linalg.det(mat)) / (scale_a * scale_a * scale_b * scale_b)

    return resultant


def corner_polynomials(design) -> Tuple[BiquadraticPoly, ...]:
    """The four corner polynomials rebuilt from raw angles only."""
    return tuple(BiquadraticPoly.from_corner_angles(q.alpha, q.beta, q.gamma, q.delta)
                 for q in design.quads)


def design_resultants(design) -> Tuple[Callable, Callable]:
    """Eliminate the two passive folds; both callables take (x1, x3).

    The upper pair couples corners 1-2 through hinges 2 and 3, the lower
    pair couples corners 3-4 through hinges 4 and 1; a flexible design
    makes the two zero sets share a curve.
    """
    o1, o2, o3, o4 = corner_polynomials(design)
    f = [c.F for c in design.couplings]
    r12 = sylvester_resultant(o1, o2.substituted(f[1], f[2]))
    raw34 = sylvester_resultant(o3, o4.substituted(f[3], f[0]))

    def r34(x1: ProjectiveReal, x3: ProjectiveReal) -> float:
        return raw34(x3, x1)

    return r12, r34


def _golden_min(f: Callable, lo: float, hi: float,
                iters: int = 80) -> Tuple[float, float]:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def _line_roots(f: Callable, samples: int = 128,
                root_accept: float = 1e-12) -> List[float]:
    """Zeros of a pi-periodic slice, located as refined minima of |f|.

    An involutive pairing makes the resultant touch zero without a sign
    change, so sign-change bisection misses exactly the roots that
    matter; minima of the magnitude catch both simple and double zeros.
    """
    step = math.pi / samples
    thetas = [(i + 0.5) * step - _HALF_PI for i in range(samples)]
    values = [abs(f(th)) for th in thetas]
    roots = []
    for i in range(samples):
        v = values[i]
        if v <= values[i - 1] and v < values[(i + 1) % samples]:
            th, val = _golden_min(lambda t: abs(f(t)),
                                  thetas[i] - step, thetas[i] + step)
            if val < root_accept:
                roots.append(th)
    return roots


def common_component_score(design, grid_size: int = 48,
                           tol: float = 1e-6) -> float:
    """Fraction of one resultant's zero samples that lie on the other's.

    Near 1 when the two eliminated systems share a motion curve, near 0
    when their zero sets only cross in isolated points.
    """
    r12, r34 = design_resultants(design)
    hits = 0
    total = 0
    for j in range(grid_size):
        th3 = (j + 0.5) * math.pi / grid_size - _HALF_PI
        x3 = _on_circle(th3)

        def slice_fn(th: float) -> float:
            return r12(_on_circle(th), x3)

        for th1 in _line_roots(slice_fn):
            total += 1
            if abs(r34(_on_circle(th1), x3)) < tol:
                hits += 1
    if total == 0:
        return 0.0
    return hits / total


def _runs(flags: Sequence[bool]) -> List[List[int]]:
    # maximal circular runs of True, indices may exceed len on wrap
    n = len(flags)
    if all(flags) or not any(flags):
        return [list(range(n))] if flags[0] else []
    start = next(i for i in range(n) if not flags[i])
    runs: List[List[int]] = []
    current: List[int] = []
    for off in range(1, n + 1):
        i = (start + off) % n
        if flags[i]:
            current.append(start + off)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def _refine_edge(feasible: Callable, th_out: float, th_in: float,
                 iters: int = 52) -> float:
    for _ in range(iters):
        mid = 0.5 * (th_out + th_in)
        if feasible(mid):
            th_in = mid
        else:
            th_out = mid
    return th_in


def brute_force_interval(design, n: int = 720,
                         accept: float = CLOSE_ACCEPT) -> RealIntervalSet:
    """Driving values where the chain closes, found by exhaustive scan.

    Samples n driving angles over one period, marks the closure-feasible
    ones, merges them into arcs and sharpens each endpoint by bisection.
    """
    step = math.pi / n
    thetas = [(i + 0.5) * step - _HALF_PI for i in range(n)]

    def feasible(th: float) -> bool:
        return closure_residual(design, _on_circle(th)) < accept

    flags = [feasible(th) for th in thetas]
    if all(flags):
        return RealIntervalSet.full_circle()
    if not any(flags):
        return RealIntervalSet.empty()
    arcs = []
    for run in _runs(flags):
        th_first = thetas[run[0] % n] + (math.pi if run[0] >= n else 0.0)
        th_last = thetas[run[-1] % n] + (math.pi if run[-1] >= n else 0.0)
        lo = _refine_edge(feasible, th_first - step, th_first)
        hi = _refine_edge(feasible, th_last + step, th_last)
        lo_n = math.remainder(lo, math.pi)
        if lo_n >= _HALF_PI:
            lo_n -= math.pi
        arcs.append((lo_n, lo_n + (hi - lo)))
    return RealIntervalSet(tuple(sorted(arcs)))
