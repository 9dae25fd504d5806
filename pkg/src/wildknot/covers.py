"""q-fold cyclic branched cover over the trivial model, navigational form.

A point of the cover is a base point plus a sheet number mod q.  Sheets are
glued along the page ``theta = theta_cut``: crossing it in the positive
direction moves to the next sheet.  Crossings are found from unwrapped
fiber-value increments, so paths must be sampled finely enough that each
increment stays below pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .conformal import GEOM_TOL
from .fibration import TWO_PI, TrivialModel, angle_diff, fiber_values
from .necklace import RefinementRequired, address_str, stage_arrays
from .polyline import Polyline


class PathRejected(ValueError):
    """Path enters the knot neighbourhood or the limit set's numerical reach."""


@dataclass(frozen=True, eq=False)
class CoverConfig:
    q: int
    model: TrivialModel
    depth: int = 0
    theta_cut: float = 0.0
    eps: float = 1e-6
    max_iter: int = 200

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q!r}")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")


@dataclass(frozen=True, eq=False)
class SheetPoint:
    base: np.ndarray
    sheet: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, float))
        object.__setattr__(self, "sheet", int(self.sheet) % self.q)

    def same(self, other: "SheetPoint", tol: float = 0.0) -> bool:
        return (self.sheet == other.sheet and self.q == other.q
                and bool(np.all(np.abs(self.base - other.base) <= tol)))


@dataclass(frozen=True, eq=False)
class LiftedPath:
    vertices: list[SheetPoint]
    crossings: list[tuple[int, int]]
    winding: int          # signed count of cut crossings

    @property
    def start_sheet(self) -> int:
        return self.vertices[0].sheet

    @property
    def end_sheet(self) -> int:
        return self.vertices[-1].sheet

    @property
    def sheets(self) -> np.ndarray:
        return np.array([v.sheet for v in self.vertices], dtype=np.int64)


def deck(p: SheetPoint, g: int) -> SheetPoint:
    return SheetPoint(p.base, p.sheet + g, p.q)


def _path_array(path) -> np.ndarray:
    if isinstance(path, Polyline):
        V = path.vertices
        return np.vstack([V, V[:1]]) if path.closed else V
    return np.atleast_2d(np.asarray(path, float))


def lift_path(cfg: CoverConfig, path, start_sheet: int = 0,
              max_step: float = math.pi) -> LiftedPath:
    """Lift a sampled path (array or Polyline; a closed Polyline is traversed back to its start)."""
    X = _path_array(path)
    if X.shape[1] != cfg.model.dim:
        raise ValueError(f"path dimension {X.shape[1]} does not match model dimension {cfg.model.dim}")
    near = cfg.model.distance_to_thread(X) <= cfg.eps
    if near.any():
        raise PathRejected(f"vertex {int(np.flatnonzero(near)[0])} within {cfg.eps} of the knot")
    th, _, ok = fiber_values(cfg.model, X, cfg.max_iter)
    if not ok.all():
        raise PathRejected(f"vertex {int(np.flatnonzero(~ok)[0])} could not be reduced (limit set)")
    dth = angle_diff(th[1:], th[:-1])
    big = np.abs(dth) >= max_step
    if big.any():
        i = int(np.flatnonzero(big)[0])
        raise RefinementRequired(f"segment {i} has angle increment {dth[i]:.3f}; refine the path")
    unwrapped = np.concatenate([[th[0]], th[0] + np.cumsum(dth)])
    r = (unwrapped - cfg.theta_cut) / TWO_PI
    # a vertex on the cut page (up to rounding) counts as lying on it
    near = np.abs(r - np.round(r)) < GEOM_TOL
    r[near] = np.round(r[near])
    lap = np.floor(r).astype(np.int64)
    lap -= lap[0]
    steps = np.diff(lap)
    crossings = [(int(i), int(steps[i])) for i in np.flatnonzero(steps)]
    verts = [SheetPoint(x, start_sheet + int(c), cfg.q) for x, c in zip(X, lap)]
    return LiftedPath(verts, crossings, int(lap[-1]))


def circle_loop(center, u, v, radius: float, n: int = 64, turns: int = 1) -> np.ndarray:
    """Closed sampled circle in the plane spanned by orthonormal u, v (first point repeated)."""
    t = np.linspace(0.0, TWO_PI * turns, n * turns + 1)
    return np.asarray(center, float) + radius * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * v)


@dataclass
class BranchReport:
    point: np.ndarray
    q: int
    rho: float
    winding: int
    closes_after: int | None
    retries: int
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.closes_after == self.q


def _normal_frame(t, knot: Polyline | None, model: TrivialModel):
    d = model.dim
    if knot is not None and d == 3:
        V = knot.vertices
        i = int(np.argmin(np.linalg.norm(V - t, axis=1)))
        n = len(V)
        tang = V[(i + 1) % n] - V[(i - 1) % n]
    else:
        # analytic tangent plane complement: radial direction in the hyperplane plus e_d
        tang = None
    if tang is not None:
        tang = tang / np.linalg.norm(tang)
        basis = []
        for e in np.eye(d):
            w = e - (e @ tang) * tang
            for b in basis:
                w = w - (w @ b) * b
            if np.linalg.norm(w) > 1e-6:
                basis.append(w / np.linalg.norm(w))
            if len(basis) == 2:
                break
        return basis[0], basis[1]
    radial = np.zeros(d)
    radial[:-1] = t[:-1] / np.linalg.norm(t[:-1])
    ed = np.zeros(d)
    ed[-1] = 1.0
    return radial, ed


def local_bead_gap(cfg: CoverConfig, t) -> float:
    """Distance from t to the nearest stage-``depth`` bead sphere (negative inside a bead)."""
    if not cfg.model.generators:
        return float(cfg.model.distance_to_thread(t)[0] + 1.0)
    sa = stage_arrays(cfg.model.necklace(), cfg.depth)
    return float((np.linalg.norm(sa.centers - t, axis=1) - sa.radii).min())


def verify_branch(cfg: CoverConfig, t, knot: Polyline | None = None,
                  samples: int = 64, max_retries: int = 6, rho0: float | None = None) -> BranchReport:
    """Lift a small meridian around the knot point ``t`` and count traversals until it closes."""
    t = np.asarray(t, float)
    if cfg.model.distance_to_thread(t)[0] > 1e-6:
        raise ValueError("t is not on the model's knot")
    gap = local_bead_gap(cfg, t)
    if gap <= GEOM_TOL:
        raise ValueError(f"t lies in a stage-{cfg.depth} bead closure (gap {gap:.3g})")
    rho = 0.5 * gap if rho0 is None else rho0
    rho = min(rho, 0.25)
    u, v = _normal_frame(t, knot, cfg.model)
    notes = []
    for attempt in range(max_retries + 1):
        loop = circle_loop(t, u, v, rho, samples)
        try:
            w = lift_path(cfg, loop).winding
        except (RefinementRequired, PathRejected) as exc:
            notes.append(f"rho={rho:.3g}: {exc}")
            w = 0
        if abs(w) == 1:
            closes = None
            for n in range(1, cfg.q + 1):
                lp = lift_path(cfg, circle_loop(t, u, v, rho, samples, turns=n))
                if lp.end_sheet == lp.start_sheet:
                    closes = n
                    break
            return BranchReport(t, cfg.q, rho, w, closes, attempt, notes)
        notes.append(f"rho={rho:.3g}: winding {w}, halving")
        rho *= 0.5
    return BranchReport(t, cfg.q, rho, 0, None, max_retries, notes)


@dataclass(frozen=True)
class EndsRow:
    address: str
    components: int | None      # None means undecided

    @property
    def undecided(self) -> bool:
        return self.components is None


def _components(q: int, connected: bool) -> int:
    # sheet-transition graph: an edge s -- s+1 for every s when the cut page is crossed
    # inside the bead, no edges otherwise
    parent = list(range(q))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if connected:
        for s in range(q):
            ra, rb = find(s), find((s + 1) % q)
            if ra != rb:
                parent[ra] = rb
    return len({find(s) for s in range(q)})


def ends_census(cfg: CoverConfig, depth: int | None = None, samples_per_bead: int = 64,
                seed: int = 0, window: float = math.pi / 2) -> list[EndsRow]:
    """Components of the preimage of each stage-``depth`` bead, in address order."""
    m = cfg.depth if depth is None else depth
    model = cfg.model
    if not model.generators:
        return []
    sa = stage_arrays(model.necklace(), m)
    rng = np.random.default_rng(seed)
    d = model.dim
    rows = []
    order = np.lexsort(sa.addresses.T[::-1])
    for i in order:
        c, r = sa.centers[i], sa.radii[i]
        g = rng.standard_normal((samples_per_bead, d))
        g /= np.linalg.norm(g, axis=1)[:, None]
        rad = r * rng.random(samples_per_bead) ** (1.0 / d)
        X = c + rad[:, None] * g
        keep = model.distance_to_thread(X) > cfg.eps
        th, _, ok = fiber_values(model, X[keep], cfg.max_iter)
        th = th[ok]
        addr = address_str(sa.addresses[i])
        if th.size == 0:
            rows.append(EndsRow(addr, None))
            continue
        dd = angle_diff(th, cfg.theta_cut)
        crosses = bool(np.any((dd > 0) & (dd < window)) and np.any((dd < 0) & (dd > -window)))
        rows.append(EndsRow(addr, _components(cfg.q, crosses)))
    return rows
