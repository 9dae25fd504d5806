"""Conformal geometry of extended Euclidean space.

Points live in R^d plus a single point at infinity.  The group we care about
is generated by inversions in k round spheres, each an involution, so group
elements are reduced words in the letters 1..k.

Composition convention: a word ``(a1, a2, ..., am)`` acts as the map
``I_a1 o I_a2 o ... o I_am``; the last letter is applied first.  With this
reading the bead with address ``(a1, ..., am, b)`` is ``apply_word((a1..am), B_b)``
and sits inside the bead with address ``(a1, ..., am)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

GEOM_TOL = 1e-9
MIN_RADIUS = 1e-12

Word = tuple[int, ...]


class GeometryError(ValueError):
    """A geometric precondition failed (degenerate sphere, unbounded image...)."""


class LimitProximity(RuntimeError):
    """Reduction to the fundamental domain did not terminate.

    The point is within numerical reach of the limit set; ``word`` is the
    prefix of its address collected before giving up.
    """

    def __init__(self, word: Word, point):
        super().__init__(f"no fundamental-domain point after {len(word)} inversions")
        self.word = word
        self.point = point


def _vec(x) -> np.ndarray:
    a = np.asarray(x, dtype=float).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ExtPoint:
    coords: np.ndarray
    at_infinity: bool = False

    def __post_init__(self):
        c = _vec(self.coords)
        if c.size < 3:
            raise GeometryError("ambient dimension must be at least 3")
        if not self.at_infinity and not np.all(np.isfinite(c)):
            raise GeometryError("finite point with non-finite coordinates")
        object.__setattr__(self, "coords", c)

    @classmethod
    def infinity(cls, d: int) -> "ExtPoint":
        return cls(np.zeros(d), True)

    @property
    def dim(self) -> int:
        return self.coords.size

    def close_to(self, other: "ExtPoint", tol: float = GEOM_TOL) -> bool:
        if self.at_infinity or other.at_infinity:
            return self.at_infinity and other.at_infinity
        return bool(np.linalg.norm(self.coords - other.coords) <= tol)

    def __repr__(self):
        if self.at_infinity:
            return f"ExtPoint(inf, d={self.dim})"
        return f"ExtPoint({self.coords.tolist()})"


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        r = float(self.radius)
        if not np.isfinite(r) or r < MIN_RADIUS:
            raise GeometryError(f"sphere radius {r!r} below {MIN_RADIUS}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    def ball(self) -> "Ball":
        return Ball(self.center, self.radius)

    def contains(self, x, tol: float = GEOM_TOL) -> bool:
        """True when ``x`` lies strictly inside the open ball (by more than tol)."""
        x = x.coords if isinstance(x, ExtPoint) else np.asarray(x, float)
        return bool(np.linalg.norm(x - self.center) < self.radius - tol)


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0:
            raise GeometryError(f"ball radius must be positive and finite, got {r!r}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def sphere(self) -> Sphere:
        return Sphere(self.center, self.radius)

    def contains_ball(self, other: "Ball", margin: float = 0.0) -> bool:
        return self.containment_margin(other) > margin

    def containment_margin(self, other: "Ball") -> float:
        """Distance by which ``other`` sits inside this ball (negative if it sticks out)."""
        return self.radius - (float(np.linalg.norm(other.center - self.center)) + other.radius)

    def gap(self, other: "Ball") -> float:
        return float(np.linalg.norm(other.center - self.center)) - self.radius - other.radius

    def isclose(self, other: "Ball", tol: float = GEOM_TOL) -> bool:
        return (np.linalg.norm(self.center - other.center) <= tol
                and abs(self.radius - other.radius) <= tol)

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius!r})"


def invert_point(s: Sphere, x: Union[ExtPoint, Sequence[float], np.ndarray]) -> ExtPoint:
    if not isinstance(x, ExtPoint):
        x = ExtPoint(x)
    if x.at_infinity:
        return ExtPoint(s.center)
    v = x.coords - s.center
    n2 = float(v @ v)
    if n2 == 0.0:
        return ExtPoint.infinity(s.dim)
    return ExtPoint(s.center + (s.radius * s.radius / n2) * v)


def invert_points(s: Sphere, X: np.ndarray) -> np.ndarray:
    """Vectorised inversion of an (N, d) array of finite points.

    Rows equal to the center come back as ``inf``.
    """
    X = np.asarray(X, dtype=float)
    v = X - s.center
    n2 = np.einsum("...i,...i->...", v, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = (s.radius * s.radius) / n2
        out = s.center + scale[..., None] * v
    out[n2 == 0.0] = np.inf
    return out


def invert_ball(s: Sphere, b: Ball) -> Ball:
    a = b.center - s.center
    delta = float(a @ a) - b.radius * b.radius
    if delta <= 0.0:
        raise GeometryError("inversion center lies inside or on the ball; image is unbounded")
    r2 = s.radius * s.radius
    return Ball(s.center + (r2 / delta) * a, r2 * b.radius / delta)


def invert_balls(s: Sphere, centers: np.ndarray, radii: np.ndarray):
    """Vectorised :func:`invert_ball` over arrays of centers (N, d) and radii (N,)."""
    a = np.asarray(centers, float) - s.center
    radii = np.asarray(radii, float)
    delta = np.einsum("ij,ij->i", a, a) - radii * radii
    if np.any(delta <= 0.0):
        raise GeometryError("inversion center lies inside or on a ball; image is unbounded")
    r2 = s.radius * s.radius
    return s.center + (r2 / delta)[:, None] * a, r2 * radii / delta


def reduce_word(letters: Iterable[int], k: int | None = None) -> Word:
    """Cancel adjacent equal letters (every generator is an involution)."""
    out: list[int] = []
    for raw in letters:
        a = int(raw)
        if a < 1 or (k is not None and a > k):
            raise ValueError(f"letter {a} outside 1..{k if k is not None else 'k'}")
        if out and out[-1] == a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def is_reduced(w: Sequence[int]) -> bool:
    return all(a != b for a, b in zip(w, w[1:]))


def apply_word(w: Sequence[int], gens: Sequence[Sphere], x):
    """Apply the group element named by ``w`` to a point or a ball.

    Letter ``i`` means inversion in ``gens[i - 1]``; the last letter acts
    first (see module docstring).  The empty word is the identity.
    """
    w = reduce_word(w, len(gens))
    if isinstance(x, Ball):
        for a in reversed(w):
            x = invert_ball(gens[a - 1], x)
        return x
    if not isinstance(x, ExtPoint):
        x = ExtPoint(x)
    for a in reversed(w):
        x = invert_point(gens[a - 1], x)
    return x


def reduce_to_domain(gens: Sequence[Sphere], x, max_iter: int = 200,
                     tol: float = GEOM_TOL) -> tuple[Word, ExtPoint]:
    """Pull ``x`` back into the fundamental domain (outside every open ball).

    Returns ``(w, y)`` with ``x == apply_word(w, gens, y)``; ``w`` is the
    address prefix of ``x``.  Raises :class:`LimitProximity` when ``max_iter``
    inversions do not suffice.
    """
    if not isinstance(x, ExtPoint):
        x = ExtPoint(x)
    word: list[int] = []
    if x.at_infinity:
        return (), x
    y = x.coords
    for _ in range(max_iter + 1):
        hit = 0
        for j, s in enumerate(gens, start=1):
            v = y - s.center
            if float(np.sqrt(v @ v)) < s.radius - tol:
                hit = j
                break
        if not hit:
            return tuple(word), ExtPoint(y)
        if len(word) == max_iter:
            break
        s = gens[hit - 1]
        v = y - s.center
        y = s.center + (s.radius * s.radius / float(v @ v)) * v
        word.append(hit)
    raise LimitProximity(tuple(word), x)


def reduce_many(gens: Sequence[Sphere], X: np.ndarray, max_iter: int = 200,
                tol: float = GEOM_TOL):
    """Vectorised reduction of finite points to the fundamental domain.

    Returns ``(Y, depth, ok)``: reduced points, number of inversions used and
    a mask of points that reached the domain within ``max_iter`` steps.
    Points that did not converge keep their last iterate in ``Y``.
    """
    Y = np.array(X, dtype=float, copy=True)
    n = Y.shape[0]
    depth = np.zeros(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    if not gens:
        return Y, depth, active
    C = np.stack([s.center for s in gens])
    R = np.array([s.radius for s in gens])
    ok = np.zeros(n, dtype=bool)
    for it in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        P = Y[idx]
        dist = np.sqrt(((P[:, None, :] - C[None, :, :]) ** 2).sum(-1))
        inside = dist < (R - tol)[None, :]
        hit = inside.any(1)
        done = idx[~hit]
        ok[done] = True
        active[done] = False
        idx = idx[hit]
        if idx.size == 0 or it == max_iter:
            break
        j = np.argmax(inside[hit], axis=1)
        v = Y[idx] - C[j]
        n2 = np.einsum("ij,ij->i", v, v)
        Y[idx] = C[j] + (R[j] ** 2 / n2)[:, None] * v
        depth[idx] += 1
    return Y, depth, ok
