"""Polyline helpers: segment distances, simplicity, Hausdorff distance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True, eq=False)
class Polyline:
    vertices: np.ndarray
    closed: bool = True

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise ValueError("polyline needs at least two vertices in an (N, d) array")
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return self.vertices.shape[0]

    def segments(self):
        """Return ``(A, B)`` endpoint arrays, including the closing segment if closed."""
        v = self.vertices
        if self.closed:
            return v, np.roll(v, -1, axis=0)
        return v[:-1], v[1:]

    @property
    def resolution(self) -> float:
        a, b = self.segments()
        return float(np.linalg.norm(b - a, axis=1).max())


def segment_distance(p0, p1, q0, q1) -> np.ndarray:
    """Minimum distance between segment pairs, vectorised over the leading axis.

    Clamped closest-point parameters, with the degenerate (point) cases
    handled separately.
    """
    p0, p1, q0, q1 = (np.atleast_2d(np.asarray(a, float)) for a in (p0, p1, q0, q1))
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    f = np.einsum("ij,ij->i", d2, r)
    c = np.einsum("ij,ij->i", d1, r)
    b = np.einsum("ij,ij->i", d1, d2)
    tiny = 1e-300
    pa, pe = a <= tiny, e <= tiny
    safe_a = np.where(pa, 1.0, a)
    safe_e = np.where(pe, 1.0, e)
    denom = a * e - b * b
    safe_d = np.where(denom > 0, denom, 1.0)
    # general case: s from the unconstrained minimum (0 for parallel), t from s
    s = np.where(denom > 0, np.clip((b * f - c * e) / safe_d, 0.0, 1.0), 0.0)
    t = (b * s + f) / safe_e
    lo, hi = t < 0.0, t > 1.0
    t = np.clip(t, 0.0, 1.0)
    s = np.where(lo, np.clip(-c / safe_a, 0.0, 1.0), np.where(hi, np.clip((b - c) / safe_a, 0.0, 1.0), s))
    # second segment is a point
    s = np.where(pe, np.clip(-c / safe_a, 0.0, 1.0), s)
    t = np.where(pe, 0.0, t)
    # first segment is a point
    t = np.where(pa, np.clip(f / safe_e, 0.0, 1.0), t)
    s = np.where(pa, 0.0, s)
    t = np.where(pa & pe, 0.0, t)
    cp = p0 + s[:, None] * d1
    cq = q0 + t[:, None] * d2
    return np.linalg.norm(cp - cq, axis=1)


def point_segment_distance(X, a, b) -> np.ndarray:
    X, a, b = (np.atleast_2d(np.asarray(v, float)) for v in (X, a, b))
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(L2 > 0, np.einsum("ij,ij->i", X - a, ab) / L2, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(X - (a + t[:, None] * ab), axis=1)


def distance_to_polyline(X, poly: Polyline) -> np.ndarray:
    """Exact Euclidean distance from each row of ``X`` to the polyline."""
    X = np.atleast_2d(np.asarray(X, float))
    A, B = poly.segments()
    mids = 0.5 * (A + B)
    half = 0.5 * np.linalg.norm(B - A, axis=1)
    hmax = float(half.max())
    tree = cKDTree(mids)
    d0, _ = tree.query(X)
    out = np.empty(X.shape[0])
    for i, (x, r) in enumerate(zip(X, d0 + hmax + 1e-15)):
        cand = np.asarray(tree.query_ball_point(x, r), dtype=np.int64)
        out[i] = point_segment_distance(np.broadcast_to(x, (cand.size, x.size)), A[cand], B[cand]).min()
    return out


@dataclass
class SimplicityReport:
    simple: bool
    min_distance: float
    closest_pair: tuple[int, int] | None = None
    checked_pairs: int = 0
    notes: list[str] = field(default_factory=list)


def check_simple(poly: Polyline, tol: float = 1e-12) -> SimplicityReport:
    """Check that no two non-adjacent segments come within ``tol`` of each other.

    Candidate pairs come from a KD-tree on segment midpoints: a pair can only
    be closer than tol when the midpoint distance is below the sum of half
    lengths plus tol, so querying each segment with radius
    ``2 * half_i + tol`` against segments no longer than itself is exhaustive.
    """
    A, B = poly.segments()
    nseg = A.shape[0]
    lengths = np.linalg.norm(B - A, axis=1)
    if np.any(lengths == 0.0):
        i = int(np.flatnonzero(lengths == 0.0)[0])
        return SimplicityReport(False, 0.0, (i, i), 0, ["zero-length segment"])
    mids = 0.5 * (A + B)
    tree = cKDTree(mids)
    cand = tree.query_ball_point(mids, lengths + tol)
    counts = np.fromiter((len(js) for js in cand), dtype=np.int64, count=nseg)
    I = np.repeat(np.arange(nseg), counts)
    J = np.fromiter((j for js in cand for j in js), dtype=np.int64, count=int(counts.sum()))
    lo, hi = np.minimum(I, J), np.maximum(I, J)
    keep = lo < hi
    pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0) if keep.any() \
        else np.zeros((0, 2), dtype=np.int64)
    I, J = pairs[:, 0], pairs[:, 1]
    adjacent = (J - I == 1)
    if poly.closed:
        adjacent |= (I == 0) & (J == nseg - 1)
    I, J = I[~adjacent], J[~adjacent]
    if I.size == 0:
        return SimplicityReport(True, float("inf"), None, 0)
    dist = segment_distance(A[I], B[I], A[J], B[J])
    k = int(np.argmin(dist))
    md = float(dist[k])
    return SimplicityReport(md > tol, md, (int(I[k]), int(J[k])), int(I.size))


def hausdorff_vertices(P: np.ndarray, Q: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite vertex sets."""
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    d_pq = cKDTree(Q).query(P)[0].max()
    d_qp = cKDTree(P).query(Q)[0].max()
    return float(max(d_pq, d_qp))
