"""Exact brute-force oracles for commutative (diagonal) data.

Functions on a finite point set form a commutative algebra in which every
coefficient combination acts pointwise through the nonnegative weights
``|g_i(x)|^2``.  Membership questions therefore reduce to plane geometry:
at each point the target value must lie in the 2-D convex hull of the
generator values (with 0 adjoined in sub-unital mode).  These oracles are
deliberately independent of the matrix solver so the two can cross-check
each other.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .kraus import KrausCombination, MatrixFamily, Mode
from .matrix_core import CMatrix

__all__ = [
    "DiagonalFamily",
    "UbabsSystem",
    "PointwiseMembership",
    "CoverDecomposition",
    "CoverError",
    "pointwise_hull_membership",
    "scalar_hull_membership",
    "lambda_sequence",
    "plane_hull_distance",
    "ubabs_gap",
    "projection_cover_decompose",
]

SCALAR_TOL = 1e-12
POINTWISE_TOL = 1e-9


class CoverError(ValueError):
    """The target set is not contained in the union of the cover sets."""


@dataclass(frozen=True, eq=False)
class DiagonalFamily:
    """k complex-valued functions on a finite set of m points."""

    points: int
    functions: tuple
    labels: tuple | None = None

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("point count must be positive")
        funcs = []
        for f in self.functions:
            arr = np.asarray(f, dtype=np.complex128)
            if arr.shape != (self.points,):
                raise ValueError(
                    f"function of length {arr.shape} does not match {self.points} points"
                )
            arr = arr.copy()
            arr.setflags(write=False)
            funcs.append(arr)
        if not funcs:
            raise ValueError("family must contain at least one function")
        object.__setattr__(self, "functions", tuple(funcs))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(funcs):
                raise ValueError("labels must match functions one-to-one")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.functions)

    def as_matrix_family(self) -> MatrixFamily:
        """Embed the functions as diagonal matrices in M_m."""
        gens = tuple(CMatrix.diag(f) for f in self.functions)
        return MatrixFamily(self.points, gens, self.labels)

    def without(self, index: int) -> "DiagonalFamily":
        funcs = tuple(f for i, f in enumerate(self.functions) if i != index)
        labels = None
        if self.labels is not None:
            labels = tuple(s for i, s in enumerate(self.labels) if i != index)
        return DiagonalFamily(self.points, funcs, labels)


# --------------------------------------------------------------------------
# Plane geometry core


def _xy(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).ravel()
    return np.column_stack([arr.real, arr.imag])


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_vertices(pts: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counter-clockwise, collinear points dropped."""
    uniq = sorted({(float(x), float(y)) for x, y in pts})
    if len(uniq) == 1:
        return np.array(uniq)
    lower = []
    for p in uniq:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(uniq):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def _segment_distance(p, a, b) -> float:
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    denom = ab[0] * ab[0] + ab[1] * ab[1]
    if denom == 0.0:
        return math.hypot(ap[0], ap[1])
    t = min(1.0, max(0.0, (ap[0] * ab[0] + ap[1] * ab[1]) / denom))
    return math.hypot(p[0] - (a[0] + t * ab[0]), p[1] - (a[1] + t * ab[1]))


def _distance_to_hull(point_xy, pts: np.ndarray) -> float:
    hull = _hull_vertices(pts)
    n = len(hull)
    if n == 1:
        return math.hypot(point_xy[0] - hull[0][0], point_xy[1] - hull[0][1])
    if n == 2:
        return _segment_distance(point_xy, hull[0], hull[1])
    inside = all(
        _cross(hull[i], hull[(i + 1) % n], point_xy) >= 0.0 for i in range(n)
    )
    if inside:
        return 0.0
    return min(
        _segment_distance(point_xy, hull[i], hull[(i + 1) % n]) for i in range(n)
    )


def plane_hull_distance(target, points, include_zero: bool = False) -> float:
    """Euclidean distance from a complex point to conv(points [+ {0}]).

    Returns 0 exactly when the target is a member of the closed hull.
    """
    pts = list(points)
    if not pts:
        raise ValueError("points must be nonempty")
    if include_zero:
        pts = pts + [0j]
    t = complex(target)
    return _distance_to_hull((t.real, t.imag), _xy(pts))


def _convex_weights(values: np.ndarray, target: complex, tol: float) -> np.ndarray | None:
    """Convex coefficients writing target over values, by Caratheodory search.

    Scans single points, then segments, then nondegenerate triangles; a 2-D
    hull member always lies in one of those.  Returns None if nothing fits
    within tol.
    """
    n = len(values)
    diffs = np.abs(values - target)
    w = np.zeros(n)
    j = int(np.argmin(diffs))
    if diffs[j] <= tol:
        w[j] = 1.0
        return w
    # segments
    for a in range(n):
        for b in range(a + 1, n):
            va, vb = values[a], values[b]
            seg = vb - va
            denom = (seg.real**2 + seg.imag**2)
            if denom == 0.0:
                continue
            rel = target - va
            t = (rel.real * seg.real + rel.imag * seg.imag) / denom
            t = min(1.0, max(0.0, t))
            if abs(va + t * seg - target) <= tol:
                w = np.zeros(n)
                w[a], w[b] = 1.0 - t, t
                return w
    # triangles
    for a in range(n):
        va = values[a]
        for b in range(a + 1, n):
            vb = values[b]
            for c in range(b + 1, n):
                vc = values[c]
                m00, m01 = (va - vc).real, (vb - vc).real
                m10, m11 = (va - vc).imag, (vb - vc).imag
                det = m00 * m11 - m01 * m10
                if abs(det) < 1e-14:
                    continue
                r0, r1 = (target - vc).real, (target - vc).imag
                wa = (m11 * r0 - m01 * r1) / det
                wb = (-m10 * r0 + m00 * r1) / det
                wc = 1.0 - wa - wb
                if min(wa, wb, wc) >= -1e-9:
                    w = np.zeros(n)
                    w[a], w[b], w[c] = max(wa, 0.0), max(wb, 0.0), max(wc, 0.0)
                    total = w.sum()
                    if total > 0:
                        w /= total
                    return w
    return None


def scalar_hull_membership(values, target, mode: Mode) -> bool:
    """Membership of a complex scalar in conv(values) or conv(values + {0})."""
    mode = Mode(mode)
    include_zero = mode is Mode.SUB_UNITAL
    return plane_hull_distance(target, list(values), include_zero) <= SCALAR_TOL


@dataclass(frozen=True)
class PointwiseMembership:
    member: bool
    weights: np.ndarray | None
    failing_point: int | None


def pointwise_hull_membership(
    family: DiagonalFamily, target, mode: Mode, tol: float = POINTWISE_TOL
) -> PointwiseMembership:
    """Decide hull membership pointwise over the finite point set.

    In the commutative algebra a combination acts at each point x through
    the weights |g_i(x)|^2 summing to one (exact) or at most one (sub), and
    on a finite discrete set every nonnegative weight assignment is
    attainable, so membership holds iff at every point the target value lies
    in the 2-D convex hull of the generator values (zero adjoined in sub
    mode).  The witnessing convex weights are returned per point, one row
    per point and one column per generator.
    """
    mode = Mode(mode)
    tgt = np.asarray(target, dtype=np.complex128)
    if tgt.shape != (family.points,):
        raise ValueError(
            f"target length {tgt.shape} does not match {family.points} points"
        )
    k = len(family.functions)
    weights = np.zeros((family.points, k))
    for x in range(family.points):
        vals = np.array([f[x] for f in family.functions], dtype=np.complex128)
        candidates = vals
        if mode is Mode.SUB_UNITAL:
            candidates = np.concatenate([vals, [0j]])
        if plane_hull_distance(tgt[x], candidates, include_zero=False) > tol:
            return PointwiseMembership(member=False, weights=None, failing_point=x)
        w = _convex_weights(candidates, complex(tgt[x]), tol)
        if w is None:
            w = _convex_weights(candidates, complex(tgt[x]), 100 * tol)
        if w is None:  # pragma: no cover - Caratheodory scan is complete
            raise RuntimeError(f"weight extraction failed at point {x}")
        weights[x, :] = w[:k]
    return PointwiseMembership(member=True, weights=weights, failing_point=None)


# --------------------------------------------------------------------------
# The unit-circle scalar family


def lambda_sequence(n: int) -> np.ndarray:
    """First n points of the unit-circle sequence 1, e^{i pi/4}, e^{i 3pi/8}, ...

    The argument of the k-th point is (1 - 2^-k) * pi/2, so the points climb
    strictly toward (but never reach) the imaginary axis.  Every point stays
    outside the convex hull of the others together with 0, which makes the
    sequence a standing example of a separated scalar family.
    """
    if n < 1:
        raise ValueError("need at least one point")
    out = [1.0 + 0j]
    for k in range(1, n):
        out.append(cmath.exp(1j * (1.0 - 2.0**-k) * math.pi / 2.0))
    return np.array(out)


# --------------------------------------------------------------------------
# Almost-biorthogonal systems


@dataclass(frozen=True, eq=False)
class UbabsSystem:
    """Functions paired with anchor points where each one peaks at 1.

    Off-anchor values are bounded by eta < 1 in modulus, which keeps each
    function at sup-distance at least 1 - eta from the sub-unital hull of
    the others.
    """

    family: DiagonalFamily
    anchor_points: tuple
    eta: float

    def __post_init__(self):
        anchors = tuple(int(a) for a in self.anchor_points)
        object.__setattr__(self, "anchor_points", anchors)
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")
        if len(anchors) != len(self.family.functions):
            raise ValueError("one anchor point per function required")
        for alpha, x in enumerate(anchors):
            if not 0 <= x < self.family.points:
                raise ValueError(f"anchor {x} outside the point set")
            f = self.family.functions[alpha]
            if abs(f[x] - 1.0) > 1e-12:
                raise ValueError(f"function {alpha} is not 1 at its anchor")
            for beta, g in enumerate(self.family.functions):
                if beta != alpha and abs(g[x]) > self.eta + 1e-12:
                    raise ValueError(
                        f"function {beta} exceeds eta={self.eta} at anchor {alpha}"
                    )


def ubabs_gap(system: UbabsSystem) -> float:
    """Certified sup-norm distance gap 1 - eta, cross-checked pointwise.

    For each function the distance at its anchor from the sub-unital hull of
    the other functions' anchor values must already be at least 1 - eta;
    the plane-geometry check below re-derives that bound independently.
    """
    gap = 1.0 - system.eta
    for alpha, x in enumerate(system.anchor_points):
        others = [
            system.family.functions[beta][x]
            for beta in range(len(system.family.functions))
            if beta != alpha
        ]
        target = system.family.functions[alpha][x]
        if others:
            d = plane_hull_distance(target, others, include_zero=True)
        else:
            d = abs(target)
        if d < gap - 1e-9:
            raise ValueError(
                f"pointwise distance {d:.6f} at anchor {alpha} undercuts the "
                f"declared gap {gap:.6f}"
            )
    return gap


# --------------------------------------------------------------------------
# Indicator decompositions


@dataclass(frozen=True)
class CoverDecomposition:
    """Greedy partition of a target set along a cover, with its combination."""

    blocks: tuple
    cover_indices: tuple
    family: MatrixFamily
    combination: KrausCombination


def projection_cover_decompose(
    target_set, cover_sets, points: int
) -> CoverDecomposition:
    """Write an indicator projection as a combination of cover indicators.

    Greedily partition the target into blocks ``B_i = (target & cover_i) -
    earlier blocks`` and pair each cover indicator generator with the
    coefficient ``q_i = indicator(B_i)``; then ``sum q_i p_i q_i`` equals the
    target indicator exactly and ``sum q_i^2`` is its (sub-unital) support.
    Empty blocks are dropped.
    """
    target = frozenset(int(p) for p in target_set)
    covers = [frozenset(int(p) for p in c) for c in cover_sets]
    universe = set(range(points))
    if not target <= universe or any(not c <= universe for c in covers):
        raise ValueError("sets must be subsets of range(points)")
    union = frozenset().union(*covers) if covers else frozenset()
    if not target <= union:
        raise CoverError(f"target points {sorted(target - union)} are uncovered")

    def indicator(subset) -> np.ndarray:
        v = np.zeros(points, dtype=np.complex128)
        for p in subset:
            v[p] = 1.0
        return v

    gens = tuple(CMatrix.diag(indicator(c)) for c in covers)
    family = MatrixFamily(points, gens)

    blocks, kept, taken = [], [], set()
    for i, cover in enumerate(covers):
        block = frozenset((target & cover) - taken)
        taken |= block
        if block:
            blocks.append(block)
            kept.append(i)
    terms = tuple(
        (i, CMatrix.diag(indicator(block))) for i, block in zip(kept, blocks)
    )
    comb = KrausCombination(mode=Mode.SUB_UNITAL, terms=terms)
    return CoverDecomposition(
        blocks=tuple(blocks), cover_indices=tuple(kept), family=family, combination=comb
    )
