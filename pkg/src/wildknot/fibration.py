"""Fibration of the complement for the trivial (Fuchsian) model.

The thread is the unit (d-2)-sphere ``{|x| = 1, x_d = 0}``.  The pencil of
round spheres through it gives the angle map

    theta(p) = atan2(2 p_d, |p|^2 - 1)

whose level sets are half-spheres (pages) bounded by the thread.  Every bead
sphere of the model is orthogonal to the thread sphere with center in the
hyperplane ``x_d = 0``; such a sphere is orthogonal to every pencil sphere,
so each inversion preserves every page.  The stage-wise maps P_m are
evaluated by pulling a point back to the fundamental domain and reading the
angle there.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .algebra import AbelianDescriptor
from .conformal import (
    GEOM_TOL,
    Ball,
    ExtPoint,
    Sphere,
    reduce_many,
    reduce_to_domain,
)
from .necklace import Necklace, unit_circle_thread
from .polyline import Polyline, distance_to_polyline

TWO_PI = 2.0 * math.pi


class OnThread(ValueError):
    """The angle map is undefined on the thread (the binding)."""


@dataclass(frozen=True, eq=False)
class TrivialModel:
    """Round unknotted thread with k equal beads orthogonal to it.

    Bead j is centered at ``sqrt(1 + r^2) * (cos a_j, sin a_j, 0, ..., 0)``
    with ``a_j = 2 pi (j - 1) / k``.  ``k = 0`` gives the bare pencil.
    """

    dim: int = 3
    k: int = 3
    radius: float = 0.5
    generators: tuple[Sphere, ...] = field(init=False)

    def __post_init__(self):
        if self.dim < 3:
            raise ValueError("ambient dimension must be at least 3")
        if self.k < 0 or self.k in (1, 2):
            raise ValueError("k must be 0 (pencil only) or at least 3")
        rho = math.sqrt(1.0 + self.radius ** 2)
        gens = []
        for j in range(self.k):
            c = np.zeros(self.dim)
            c[0] = rho * math.cos(TWO_PI * j / self.k)
            c[1] = rho * math.sin(TWO_PI * j / self.k)
            gens.append(Sphere(c, self.radius))
        if self.k >= 3:
            gap = 2 * rho * math.sin(math.pi / self.k) - 2 * self.radius
            if gap <= GEOM_TOL:
                raise ValueError(f"beads of radius {self.radius} overlap for k = {self.k}")
        object.__setattr__(self, "generators", tuple(gens))

    def orthogonality_defect(self) -> float:
        """max | |c|^2 - 1 - r^2 | over generators (zero for an exact model)."""
        if not self.generators:
            return 0.0
        return max(abs(float(s.center @ s.center) - 1.0 - s.radius ** 2) for s in self.generators)

    def necklace(self, n_points: int = 360) -> Necklace:
        """The model as a stage-0 necklace (unit-circle thread when d = 3)."""
        thread = unit_circle_thread(n_points, self.dim) if self.dim == 3 else None
        return Necklace.from_balls(thread, [Ball(s.center, s.radius) for s in self.generators])

    def distance_to_thread(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, float))
        rho = np.linalg.norm(X[:, :-1], axis=1)
        return np.hypot(rho - 1.0, X[:, -1])


@dataclass(frozen=True)
class FiberValue:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    def __float__(self):
        return self.angle


def angle_diff(a, b):
    """Signed difference a - b wrapped into (-pi, pi]."""
    d = (np.asarray(a, float) - np.asarray(b, float) + math.pi) % TWO_PI - math.pi
    return np.where(d == -math.pi, math.pi, d)


def theta_trivial(p, d: int | None = None, tol: float = GEOM_TOL) -> FiberValue:
    if not isinstance(p, ExtPoint):
        p = ExtPoint(p)
    if d is not None and p.dim != d:
        raise ValueError(f"point has dimension {p.dim}, expected {d}")
    if p.at_infinity:
        return FiberValue(0.0)
    x = p.coords
    rho = float(np.linalg.norm(x[:-1]))
    if math.hypot(rho - 1.0, x[-1]) <= tol:
        raise OnThread(f"point {x.tolist()} lies on the thread")
    return FiberValue(math.atan2(2.0 * x[-1], float(x @ x) - 1.0))


def theta_many(X: np.ndarray, tol: float = GEOM_TOL) -> np.ndarray:
    """Vectorised angle map on finite points; NaN on the thread."""
    X = np.atleast_2d(np.asarray(X, float))
    th = np.arctan2(2.0 * X[:, -1], np.einsum("ij,ij->i", X, X) - 1.0) % TWO_PI
    on = np.hypot(np.linalg.norm(X[:, :-1], axis=1) - 1.0, X[:, -1]) <= tol
    th[on] = np.nan
    return th


def fiber_value(model: TrivialModel, x, max_iter: int = 200, tol: float = GEOM_TOL) -> FiberValue:
    """Stage-independent fibration value: angle of the fundamental-domain representative.

    Raises :class:`LimitProximity` near the limit set and :class:`OnThread`
    when the representative lies on the thread.
    """
    _, y = reduce_to_domain(model.generators, x, max_iter, tol)
    return theta_trivial(y, model.dim, tol)


def fiber_values(model: TrivialModel, X, max_iter: int = 200, tol: float = GEOM_TOL):
    """Vectorised :func:`fiber_value`.

    Returns ``(theta, depth, ok)``; ``theta`` is NaN where reduction failed or
    the representative is on the thread.
    """
    X = np.atleast_2d(np.asarray(X, float))
    Y, depth, ok = reduce_many(model.generators, X, max_iter, tol)
    th = theta_many(Y, tol)
    th[~ok] = np.nan
    return th, depth, ok & np.isfinite(th)


def _grid_axis(bound, n):
    return np.linspace(-bound, bound, n)


def fiber_sample(model: TrivialModel, theta0: float, depth: int, bound: float = 2.0,
                 resolution: int = 41, delta: float = 1e-2, eps: float = 1e-6,
                 knot: Polyline | None = None, max_iter: int = 200, lanes: int = 1) -> np.ndarray:
    """Grid points of the box ``[-bound, bound]^d`` on the page ``theta0``.

    Kept points lie outside the stage-``depth`` beads (where P_depth is
    defined), have ``|fiber_value - theta0| < delta`` and are farther than
    ``eps`` from the stage knot (``knot`` polyline if given, else the model's
    thread).  The grid is split into ``lanes`` tiles along the first axis;
    tiles are concatenated in order so the output does not depend on lanes.
    """
    axis = _grid_axis(bound, resolution)
    d = model.dim

    def tile(first):
        mesh = np.meshgrid(first, *([axis] * (d - 1)), indexing="ij")
        X = np.stack([m.reshape(-1) for m in mesh], axis=1)
        th, dep, ok = fiber_values(model, X, max_iter)
        keep = ok & (dep <= depth)
        keep &= np.abs(angle_diff(np.nan_to_num(th), theta0)) < delta
        X = X[keep]
        if X.shape[0]:
            dist = distance_to_polyline(X, knot) if knot is not None else model.distance_to_thread(X)
            X = X[dist > eps]
        return X

    chunks = np.array_split(axis, max(1, min(lanes, resolution)))
    if lanes > 1:
        with ThreadPoolExecutor(lanes) as ex:
            parts = list(ex.map(tile, chunks))
    else:
        parts = [tile(c) for c in chunks]
    parts = [p for p in parts if p.shape[0]]
    return np.concatenate(parts) if parts else np.zeros((0, d))


@dataclass(frozen=True)
class MonodromyDescriptor:
    statement: str
    infinitely_generated: dict[int, bool]
    stage_multipliers: tuple[int, ...]

    @property
    def any_infinite(self) -> bool:
        return any(self.infinitely_generated.values())


def monodromy_descriptor(fiber: AbelianDescriptor, k: int, stages: int = 5) -> MonodromyDescriptor:
    """Symbolic summary of the fiber homology under the inverting process.

    No return map is computed; the record only states that the stage-m fiber
    is the (l_m + 1)-fold sum and which dimensions grow without bound.
    """
    dims = sorted(set(fiber.betti) | set(fiber.torsion))
    inf = {dim: fiber.betti.get(dim, 0) > 0 or bool(fiber.torsion.get(dim)) for dim in dims}
    mult = tuple(k * (k - 1) ** m + 1 for m in range(stages))
    if inf:
        parts = [f"infinitely generated in dimension {dim}: {'yes' if v else 'no'}"
                 for dim, v in inf.items()]
    else:
        parts = ["infinitely generated: no"]
    text = ("stage-m fiber homology is the (l_m + 1)-fold direct sum of the knot fiber's; "
            + "; ".join(parts))
    return MonodromyDescriptor(text, inf, mult)
