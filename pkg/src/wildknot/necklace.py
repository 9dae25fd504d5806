"""Beaded necklaces and the stage-by-stage inverting process.

A stage-0 necklace is a closed thread plus k >= 3 disjoint beads.  Stage m
has k(k-1)^m beads; the bead with address ``(a1, ..., a_{m+1})`` is
``apply_word((a1, ..., am), gens, B_{a_{m+1}})``.

Thread geometry is only realised for 1-knots (polylines in R^3).  In higher
ambient dimension the thread may be omitted and everything that does not
look at the thread still works.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .conformal import (
    GEOM_TOL,
    Ball,
    GeometryError,
    Sphere,
    Word,
    apply_word,
    invert_balls,
    invert_points,
)
from .polyline import Polyline

log = logging.getLogger(__name__)


class ConstructionFault(RuntimeError):
    """A numeric containment check failed while building a stage."""


class RefinementRequired(ValueError):
    """The thread sampling is too coarse to resolve bead crossings."""


class DimensionEstimateError(ValueError):
    pass


def address_str(w: Sequence[int]) -> str:
    return ".".join(str(a) for a in w)


def parse_address(s: str) -> Word:
    s = s.strip()
    return tuple(int(a) for a in s.split(".")) if s else ()


@dataclass(frozen=True, eq=False)
class ThreadSample:
    """Closed sampled thread; the last point connects back to the first."""

    points: np.ndarray
    params: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        t = np.asarray(self.params, dtype=float)
        if P.ndim != 2 or P.shape[0] < 3:
            raise ValueError("thread needs at least three points")
        if P.shape[1] < 3:
            raise ValueError("ambient dimension must be at least 3")
        if t.shape != (P.shape[0],):
            raise ValueError("one parameter per thread point")
        if t[0] < 0 or t[-1] >= 1 or np.any(np.diff(t) <= 0):
            raise ValueError("thread parameters must be strictly increasing in [0, 1)")
        seg = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
        if np.any(seg == 0.0):
            raise ValueError("consecutive thread points must be distinct")
        P.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "params", t)

    @classmethod
    def from_points(cls, points) -> "ThreadSample":
        P = np.asarray(points, dtype=float)
        seg = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)[:-1]]) / seg.sum()
        return cls(P, s)

    @property
    def dim_ambient(self) -> int:
        return self.points.shape[1]

    @property
    def resolution(self) -> float:
        """Longest segment length."""
        return float(np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1).max())

    def polyline(self) -> Polyline:
        return Polyline(self.points, closed=True)

    def nearest_param(self, x) -> float:
        """Thread parameter of the point of the polyline nearest to ``x``."""
        P = self.points
        Q = np.roll(P, -1, axis=0)
        ab = Q - P
        L2 = np.einsum("ij,ij->i", ab, ab)
        t = np.clip(np.einsum("ij,ij->i", np.asarray(x, float) - P, ab) / L2, 0.0, 1.0)
        d = np.linalg.norm(P + t[:, None] * ab - x, axis=1)
        i = int(np.argmin(d))
        t_next = self.params[i + 1] if i + 1 < len(self.params) else 1.0
        return float(self.params[i] + t[i] * (t_next - self.params[i]))


def unit_circle_thread(n_points: int = 360, d: int = 3) -> ThreadSample:
    """Unit circle in the x1-x2 plane; 360 samples put vertices at every degree."""
    t = np.arange(n_points) / n_points
    P = np.zeros((n_points, d))
    P[:, 0] = np.cos(2 * np.pi * t)
    P[:, 1] = np.sin(2 * np.pi * t)
    return ThreadSample(P, t)


@dataclass(frozen=True, eq=False)
class Bead:
    ball: Ball
    address: Word
    parent: Word | None = None

    @property
    def stage(self) -> int:
        return len(self.address) - 1


@dataclass(frozen=True, eq=False)
class Necklace:
    thread: ThreadSample | None
    beads: tuple[Bead, ...]
    stage: int
    generators: tuple[Sphere, ...]
    tol: float = GEOM_TOL

    def __post_init__(self):
        object.__setattr__(self, "beads", tuple(self.beads))
        object.__setattr__(self, "generators", tuple(self.generators))
        k = len(self.generators)
        if k < 3:
            raise ValueError("a beaded necklace needs k >= 3 beads")
        expected = k * (k - 1) ** self.stage
        if len(self.beads) != expected:
            raise ValueError(f"stage {self.stage} must carry {expected} beads, got {len(self.beads)}")
        dims = {s.dim for s in self.generators}
        if self.thread is not None:
            dims.add(self.thread.dim_ambient)
        if len(dims) != 1:
            raise ValueError("generators and thread disagree on ambient dimension")

    @classmethod
    def from_balls(cls, thread: ThreadSample | None, balls: Sequence[Ball],
                   tol: float = GEOM_TOL) -> "Necklace":
        gens = tuple(b.sphere for b in balls)
        beads = tuple(Bead(b, (j,), None) for j, b in enumerate(balls, start=1))
        return cls(thread, beads, 0, gens, tol)

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.generators[0].dim

    @property
    def base_balls(self) -> list[Ball]:
        return [s.ball() for s in self.generators]

    def arrays(self):
        C = np.stack([b.ball.center for b in self.beads])
        R = np.array([b.ball.radius for b in self.beads])
        return C, R

    def scaled(self, lam: float) -> "Necklace":
        """Similar copy scaled about the origin by ``lam`` (stage-0 only)."""
        if self.stage != 0:
            raise ValueError("scale stage-0 necklaces and rebuild")
        thread = None
        if self.thread is not None:
            thread = ThreadSample(self.thread.points * lam, self.thread.params)
        balls = [Ball(b.center * lam, b.radius * lam) for b in self.base_balls]
        return Necklace.from_balls(thread, balls, self.tol)


def symmetric_necklace(k: int = 3, radius: float = 0.5, n_points: int = 360,
                       d: int = 3, tol: float = GEOM_TOL) -> Necklace:
    """Unit-circle thread with k equal beads centered at angles 2*pi*j/k."""
    thread = unit_circle_thread(n_points, d)
    balls = []
    for j in range(k):
        c = np.zeros(d)
        c[0] = math.cos(2 * math.pi * j / k)
        c[1] = math.sin(2 * math.pi * j / k)
        balls.append(Ball(c, radius))
    return Necklace.from_balls(thread, balls, tol)


# ---------------------------------------------------------------------------
# crossings and validation


@dataclass(frozen=True)
class Crossing:
    segment: int
    t: float
    point: np.ndarray
    entering: bool


def sphere_crossings(points: np.ndarray, ball: Ball) -> list[Crossing]:
    """Transversal crossings of the closed polyline with the ball's boundary."""
    P = np.asarray(points, float)
    Q = np.roll(P, -1, axis=0)
    D = Q - P
    W = P - ball.center
    a = np.einsum("ij,ij->i", D, D)
    b = np.einsum("ij,ij->i", W, D)
    c = np.einsum("ij,ij->i", W, W) - ball.radius ** 2
    disc = b * b - a * c
    out: list[Crossing] = []
    for i in np.flatnonzero(disc > 0):
        sq = math.sqrt(disc[i])
        for t in sorted(((-b[i] - sq) / a[i], (-b[i] + sq) / a[i])):
            if 0.0 <= t < 1.0:
                entering = (a[i] * t + b[i]) < 0
                out.append(Crossing(int(i), float(t), P[i] + t * D[i], bool(entering)))
    return out


@dataclass
class ValidationReport:
    disjoint: bool
    centered: bool | None
    tangle: bool | None
    radius_bound: bool | None = None
    min_gap: float = float("nan")
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v is not False for v in (self.disjoint, self.centered, self.tangle, self.radius_bound))

    def as_rows(self):
        return [("disjoint", self.disjoint), ("centered", self.centered),
                ("tangle", self.tangle), ("radius_bound", self.radius_bound)]


def validate(neck: Necklace, tol: float | None = None, reach: float | None = None,
             check_centers: bool = True) -> ValidationReport:
    """Check the stage-0 necklace conditions.

    Conditions: pairwise disjoint beads with margin ``tol``; bead centers on the
    thread; each bead crossed exactly twice by the thread (trivial-tangle
    proxy); optionally every radius below ``reach / 2``.  Thread checks are
    reported as ``None`` when there is no thread.
    """
    if neck.stage != 0:
        raise ValueError("validate expects a stage-0 necklace")
    tol = neck.tol if tol is None else tol
    failures: list[str] = []
    balls = neck.base_balls
    gaps = [(balls[i].gap(balls[j]), i, j) for i in range(len(balls)) for j in range(i + 1, len(balls))]
    min_gap = min(g for g, _, _ in gaps)
    for g, i, j in gaps:
        if g <= tol:
            failures.append(f"beads {i + 1} and {j + 1} overlap or touch (gap {g:.3g})")
    disjoint = min_gap > tol

    centered = tangle = None
    if neck.thread is not None:
        poly = neck.thread.polyline()
        from .polyline import distance_to_polyline

        if check_centers:
            off = distance_to_polyline(np.stack([b.center for b in balls]), poly)
            centered = bool(np.all(off <= tol))
            for j in np.flatnonzero(off > tol):
                failures.append(f"bead {j + 1} center is {off[j]:.3g} off the thread")
        tangle = True
        for j, b in enumerate(balls, start=1):
            cr = sphere_crossings(neck.thread.points, b)
            if len(cr) != 2 or cr[0].entering == cr[1].entering:
                tangle = False
                failures.append(f"thread crosses bead {j} boundary {len(cr)} times (need 2)")
    radius_bound = None
    if reach is not None:
        radius_bound = all(b.radius < reach / 2 for b in balls)
        if not radius_bound:
            failures.append(f"some bead radius is not below reach/2 = {reach / 2:.3g}")
    return ValidationReport(disjoint, centered, tangle, radius_bound, float(min_gap), failures)


def auto_beads(thread: ThreadSample, k: int, params: Sequence[float] | None = None,
               safety: float = 0.9, reach: float | None = None,
               tol: float = GEOM_TOL) -> Necklace:
    """Center k beads at thread points and give them the largest common radius
    that passes :func:`validate`, shrunk by ``safety``."""
    if k < 3:
        raise ValueError("k >= 3 required")
    if params is None:
        params = np.arange(k) / k
    idx = [int(np.argmin(np.abs(thread.params - p))) for p in params]
    centers = [thread.points[i] for i in idx]

    def passes(r):
        neck = Necklace.from_balls(thread, [Ball(c, r) for c in centers], tol)
        return validate(neck, tol, reach).ok

    span = max(np.ptp(thread.points, axis=0))
    grid = span * np.geomspace(1e-4, 1.0, 80)
    good = [r for r in grid if passes(r)]
    if not good:
        raise GeometryError("no bead radius passes validation at these thread points")
    lo = max(good)
    hi = min([r for r in grid if r > lo], default=2 * lo)
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if passes(mid) else (lo, mid)
    r = safety * lo
    return Necklace.from_balls(thread, [Ball(c, r) for c in centers], tol)


# ---------------------------------------------------------------------------
# stages


@dataclass(frozen=True, eq=False)
class StageArrays:
    """Vectorised beads of one stage, rows sorted by address."""

    stage: int
    centers: np.ndarray
    radii: np.ndarray
    addresses: np.ndarray  # (N, stage + 1) int array

    def address_tuples(self) -> list[Word]:
        return [tuple(int(a) for a in row) for row in self.addresses]


def _stage0_arrays(neck0: Necklace) -> StageArrays:
    C = np.stack([s.center for s in neck0.generators])
    R = np.array([s.radius for s in neck0.generators])
    A = np.arange(1, neck0.k + 1).reshape(-1, 1)
    return StageArrays(0, C, R, A)


def next_stage_arrays(prev: StageArrays, gens: Sequence[Sphere]) -> StageArrays:
    """Invert the previous stage in every generator not equal to its first letter."""
    Cs, Rs, As = [], [], []
    for j, s in enumerate(gens, start=1):
        mask = prev.addresses[:, 0] != j
        c, r = invert_balls(s, prev.centers[mask], prev.radii[mask])
        Cs.append(c)
        Rs.append(r)
        As.append(np.hstack([np.full((int(mask.sum()), 1), j), prev.addresses[mask]]))
    return StageArrays(prev.stage + 1, np.concatenate(Cs), np.concatenate(Rs), np.concatenate(As))


def iter_stage_arrays(neck0: Necklace, depth: int) -> Iterator[StageArrays]:
    st = _stage0_arrays(neck0)
    yield st
    for _ in range(depth):
        st = next_stage_arrays(st, neck0.generators)
        yield st


def stage_arrays(neck0: Necklace, m: int) -> StageArrays:
    for st in iter_stage_arrays(neck0, m):
        pass
    return st


def build_stage(neck: Necklace) -> Necklace:
    """One step of the inverting process: stage m -> stage m + 1.

    Each new bead is checked to lie inside its parent (address prefix) with
    positive margin beyond ``neck.tol``.
    """
    prev = StageArrays(
        neck.stage,
        *neck.arrays(),
        np.array([b.address for b in neck.beads], dtype=np.int64),
    )
    nxt = next_stage_arrays(prev, neck.generators)
    parent_ball = {b.address: b.ball for b in neck.beads}
    beads = []
    for c, r, a in zip(nxt.centers, nxt.radii, nxt.address_tuples()):
        ball = Ball(c, r)
        par = parent_ball[a[:-1]]
        margin = par.containment_margin(ball)
        if margin <= -neck.tol:
            raise ConstructionFault(f"bead {address_str(a)} leaves its parent by {-margin:.3g}")
        beads.append(Bead(ball, a, a[:-1]))
    beads.sort(key=lambda b: b.address)
    return Necklace(neck.thread, tuple(beads), neck.stage + 1, neck.generators, neck.tol)


def enumerate_beads(neck0: Necklace, depth: int) -> Iterator[Bead]:
    """Stream every bead of stages 0..depth in lexicographic address order.

    Depth-first over address prefixes; each ball is computed directly with
    :func:`apply_word`, so no intermediate necklace is stored.
    """
    gens = neck0.generators
    base = neck0.base_balls
    k = len(gens)

    def walk(prefix: Word):
        for j in range(1, k + 1):
            if prefix and prefix[-1] == j:
                continue
            addr = prefix + (j,)
            yield Bead(apply_word(prefix, gens, base[j - 1]), addr, prefix or None)
            if len(addr) <= depth:
                yield from walk(addr)

    yield from walk(())


def bead_count(k: int, m: int) -> int:
    return k * (k - 1) ** m


@dataclass(frozen=True, eq=False)
class LimitCloud:
    """Depth-L bead centers; each is within its radius of a unique limit point."""

    depth: int
    points: np.ndarray
    radii: np.ndarray
    addresses: list[Word]

    def __len__(self):
        return self.points.shape[0]


def limit_points(neck0: Necklace, depth: int) -> LimitCloud:
    st = stage_arrays(neck0, depth)
    return LimitCloud(depth, st.centers, st.radii, st.address_tuples())


@dataclass
class StageStats:
    stage: int
    count: int
    max_radius: float
    min_gap: float


def min_gap(centers: np.ndarray, radii: np.ndarray) -> float:
    """Smallest ``|ci - cj| - ri - rj`` over distinct pairs (exact, KD-tree pruned)."""
    n = len(radii)
    if n < 2:
        return float("inf")
    tree = cKDTree(centers)
    dd, ii = tree.query(centers, k=2)
    best = float(np.min(dd[:, 1] - radii - radii[ii[:, 1]]))
    rmax = float(radii.max())
    pairs = tree.query_pairs(r=max(best, 0.0) + 2 * rmax + 1e-15, output_type="ndarray")
    if pairs.size:
        g = np.linalg.norm(centers[pairs[:, 0]] - centers[pairs[:, 1]], axis=1) \
            - radii[pairs[:, 0]] - radii[pairs[:, 1]]
        best = min(best, float(g.min()))
    return best


def stage_statistics(neck0: Necklace, depth: int) -> list[StageStats]:
    out = []
    for st in iter_stage_arrays(neck0, depth):
        out.append(StageStats(st.stage, len(st.radii), float(st.radii.max()),
                              min_gap(st.centers, st.radii)))
    return out


# ---------------------------------------------------------------------------
# knot approximation (n = 1)


@dataclass(frozen=True, eq=False)
class Piece:
    kind: str  # "R": image w(R-arc); "inner": thread arc inside bead ``label``
    label: Word
    points: np.ndarray

    def reversed(self) -> "Piece":
        return Piece(self.kind, self.label, self.points[::-1])


@dataclass(frozen=True, eq=False)
class KnotApprox:
    """Stage-m knot as a closed polyline.

    ``stitches`` lists ``(vertex index, bead address)`` for every junction
    between consecutive pieces; the vertex lies on that bead's boundary.
    """

    stage: int
    polyline: Polyline
    stitches: list[tuple[int, Word]]
    closure_error: float
    pieces: list[Piece]

    @property
    def vertices(self) -> np.ndarray:
        return self.polyline.vertices


def _arc(P: np.ndarray, start: Crossing, end: Crossing) -> np.ndarray:
    n = P.shape[0]
    cnt = (end.segment - start.segment) % n
    if cnt == 0 and end.t <= start.t:
        cnt = n
    idx = [(start.segment + 1 + i) % n for i in range(cnt)]
    pts = [start.point] + [P[i] for i in idx] + [end.point]
    out = [pts[0]]
    for p in pts[1:]:
        if np.any(p != out[-1]):
            out.append(p)
    return np.array(out)


def _thread_structure(neck0: Necklace):
    if neck0.thread is None or neck0.dim != 3:
        raise ValueError("knot approximation needs a thread in R^3 (n = 1)")
    P = neck0.thread.points
    res = neck0.thread.resolution
    enter, leave = {}, {}
    for j, b in enumerate(neck0.base_balls, start=1):
        cr = sphere_crossings(P, b)
        if len(cr) != 2 or cr[0].entering == cr[1].entering:
            raise RefinementRequired(f"thread crosses bead {j} {len(cr)} times; need exactly 2")
        e, x = (cr[0], cr[1]) if cr[0].entering else (cr[1], cr[0])
        if e.segment == x.segment:
            raise RefinementRequired(
                f"both crossings of bead {j} fall on one segment (resolution {res:.3g}); refine the thread")
        enter[j], leave[j] = e, x
    order = sorted(enter, key=lambda j: enter[j].segment + enter[j].t)
    inner = {j: _arc(P, enter[j], leave[j]) for j in order}
    arcs = []
    for i, j in enumerate(order):
        nxt = order[(i + 1) % len(order)]
        arcs.append(_arc(P, leave[j], enter[nxt]))
    return order, inner, arcs


def knot_approx(neck0: Necklace, m: int) -> KnotApprox:
    """Stage-m knot: R and its images under reduced words of length <= m,
    joined by the original thread arcs carried into the stage-m beads."""
    if neck0.stage != 0:
        raise ValueError("knot_approx expects a stage-0 necklace")
    order, inner, arcs = _thread_structure(neck0)
    gens = neck0.generators
    k = len(order)
    pos = {j: i for i, j in enumerate(order)}
    memo: dict[tuple[int, int], list[Piece]] = {}

    def content(level: int, j: int) -> list[Piece]:
        """Pieces filling bead j at this level, from its entry to its exit point."""
        key = (level, j)
        if key in memo:
            return memo[key]
        if level == 0:
            out = [Piece("inner", (j,), inner[j])]
        else:
            back: list[Piece] = []
            p = pos[j]
            for s in range(1, k + 1):
                a = order[(p - s) % k]
                back.append(Piece("R", (), arcs[(p - s) % k]).reversed())
                if s < k:
                    back.extend(pc.reversed() for pc in reversed(content(level - 1, a)))
            S = gens[j - 1]
            out = [Piece(pc.kind, (j,) + pc.label, invert_points(S, pc.points)) for pc in back]
        memo[key] = out
        return out

    pieces: list[Piece] = []
    for i, j in enumerate(order):
        pieces.extend(content(m, j))
        pieces.append(Piece("R", (), arcs[i]))

    verts = [pieces[0].points]
    count = pieces[0].points.shape[0]
    stitches: list[tuple[int, Word]] = []
    for prev, pc in zip(pieces, pieces[1:]):
        stitches.append((count - 1, max(prev.label, pc.label, key=len)))
        verts.append(pc.points[1:])
        count += pc.points.shape[0] - 1
    V = np.concatenate(verts)
    closure = float(np.linalg.norm(V[-1] - V[0]))
    stitches.append((0, max(pieces[-1].label, pieces[0].label, key=len)))
    V = V[:-1]
    return KnotApprox(m, Polyline(V, closed=True), stitches, closure, pieces)


# ---------------------------------------------------------------------------
# dimension


@dataclass
class DimensionEstimate:
    s_hat: float
    per_depth_values: list[tuple[int, float]]
    converged: bool
    length_unit: float = 1.0


def configuration_diameter(neck0: Necklace) -> float:
    """Diameter of the union of the stage-0 beads."""
    balls = neck0.base_balls
    return max(float(np.linalg.norm(a.center - b.center)) + a.radius + b.radius
               for a in balls for b in balls)


def _solve_partition(log_diam: np.ndarray, d: int, tol: float = 1e-12) -> float:
    def f(s):
        m = float(np.max(s * log_diam))
        return m + math.log(float(np.sum(np.exp(s * log_diam - m))))  # log sum (diam^s)

    lo, hi = 0.0, float(d)
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 > fhi):
        raise DimensionEstimateError(
            f"partition sum does not bracket 1 on [0, {d}] (log-sums {flo:.3g}, {fhi:.3g})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dimension_estimate(neck0: Necklace, depths: Sequence[int],
                       length_unit: float | None = None,
                       converge_tol: float = 1e-2) -> DimensionEstimate:
    """Solve sum over depth-m beads of (diameter / unit)^s = 1 for each depth.

    The unit defaults to the diameter of the stage-0 configuration, so the
    estimate does not depend on the overall scale of the picture.
    """
    if neck0.k < 3:
        raise ValueError("k >= 3 required")
    depths = sorted(set(int(m) for m in depths))
    if len(depths) < 2:
        raise ValueError("need at least two depths")
    unit = configuration_diameter(neck0) if length_unit is None else float(length_unit)
    wanted = set(depths)
    values = []
    for st in iter_stage_arrays(neck0, depths[-1]):
        if st.stage in wanted:
            values.append((st.stage, _solve_partition(np.log(2 * st.radii / unit), neck0.dim)))
    s = [v for _, v in values]
    diffs = np.diff(s)
    if np.any(diffs > converge_tol):
        log.warning("dimension sequence not monotone within %.3g: %s", converge_tol, s)
    converged = abs(s[-1] - s[-2]) < converge_tol
    return DimensionEstimate(s[-1], values, bool(converged), unit)


def box_counting_dimension(points: np.ndarray, scales: Sequence[float] | None = None,
                           shifts: int = 8, seed: int = 0) -> float:
    """Least-squares slope of log N(eps) against log(1/eps), averaged over grid shifts."""
    X = np.asarray(points, float)
    if scales is None:
        span = float(np.ptp(X, axis=0).max())
        scales = span * np.logspace(-1, -6, 21)
    rng = np.random.default_rng(seed)
    counts = []
    for eps in scales:
        c = []
        for _ in range(shifts):
            cells = np.floor((X + rng.random(X.shape[1]) * eps) / eps).astype(np.int64)
            c.append(np.unique(cells, axis=0).shape[0])
        counts.append(np.mean(c))
    slope = np.polyfit(np.log(1.0 / np.asarray(scales)), np.log(counts), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# equivalence transport


@dataclass
class EquivalenceCertificate:
    accepted: bool
    sigma: dict[int, int]
    depth: int
    first_failure: Word | None = None
    reason: str = ""

    def map_address(self, w: Sequence[int]) -> Word:
        return tuple(self.sigma[a] for a in w)


def _cyclic_order(neck: Necklace) -> list[int]:
    th = neck.thread
    params = {j: th.nearest_param(s.center) for j, s in enumerate(neck.generators, start=1)}
    return sorted(params, key=params.get)


def transport_equivalence(neckA: Necklace, neckB: Necklace, bead_bijection,
                          depth: int = 4, tol: float | None = None) -> EquivalenceCertificate:
    """Address-level shadow of the homeomorphisms H_m between two necklaces.

    Accepts when the bijection carries the cyclic order of beads along A's
    thread to the cyclic order along B's thread (same direction), and when
    the letterwise relabelling maps A's nesting tree onto B's, with geometric
    nesting verified in both, for every address up to ``depth``.
    """
    if neckA.stage != 0 or neckB.stage != 0:
        raise ValueError("both necklaces must be stage 0")
    k = neckA.k
    if neckB.k != k:
        raise ValueError("necklaces have different bead counts")
    sigma = {int(a): int(b) for a, b in dict(bead_bijection).items()}
    if sorted(sigma) != list(range(1, k + 1)) or sorted(sigma.values()) != list(range(1, k + 1)):
        raise ValueError("bead_bijection must be a permutation of 1..k")
    tol = max(neckA.tol, neckB.tol) if tol is None else tol

    if neckA.thread is not None and neckB.thread is not None:
        oa = _cyclic_order(neckA)
        ob = _cyclic_order(neckB)
        image = [sigma[a] for a in oa]
        r = ob.index(image[0])
        if image != ob[r:] + ob[:r]:
            return EquivalenceCertificate(False, sigma, depth, (oa[0],),
                                          f"cyclic order {oa} maps to {image}, B has {ob}")

    ballsA = {b.address: b.ball for b in enumerate_beads(neckA, depth)}
    ballsB = {b.address: b.ball for b in enumerate_beads(neckB, depth)}
    for w in sorted(ballsA, key=lambda w: (len(w), w)):
        v = tuple(sigma[a] for a in w)
        if v not in ballsB:
            return EquivalenceCertificate(False, sigma, depth, w, "image address missing in B")
        if len(w) > 1:
            if ballsA[w[:-1]].containment_margin(ballsA[w]) <= tol:
                return EquivalenceCertificate(False, sigma, depth, w, "nesting fails in A")
            if ballsB[v[:-1]].containment_margin(ballsB[v]) <= tol:
                return EquivalenceCertificate(False, sigma, depth, w, "nesting fails in B")
    if len(ballsA) != len(ballsB):
        return EquivalenceCertificate(False, sigma, depth, None, "tree sizes differ")
    return EquivalenceCertificate(True, sigma, depth)
