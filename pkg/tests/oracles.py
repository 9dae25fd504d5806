"""Independent reference computations used by the tests.

Nothing here imports the package's algorithms; only plain numpy and exact
integer arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


# ---- exact integer linear algebra --------------------------------------------


def bareiss_det(M) -> int:
    """Exact determinant of a square integer matrix by fraction-free elimination."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def rational_rank(M) -> int:
    A = [[Fraction(v) for v in row] for row in M]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        r += 1
    return r


def rank_mod_p(M, p: int) -> int:
    A = [[v % p for v in row] for row in M]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [(v * inv) % p for v in A[r]]
        for i in range(rows):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[r])]
        r += 1
    return r


def abelian_is_infinite_cyclic(M, n_gens: int) -> bool:
    """Z^n / rowspace(M) is Z iff rank = n - 1 and the gcd of maximal minors is 1.

    With one free column left, the maximal minors are the (n-1)-minors; we
    take every choice of n - 1 rows (when there are more) and n - 1 columns.
    """
    if rational_rank(M) != n_gens - 1:
        return False
    if n_gens == 1:
        return True
    from itertools import combinations

    g = 0
    rows = list(range(len(M)))
    for rsel in combinations(rows, n_gens - 1):
        for drop in range(n_gens):
            sub = [[M[i][j] for j in range(n_gens) if j != drop] for i in rsel]
            g = math.gcd(g, abs(bareiss_det(sub)))
            if g == 1:
                return True
    return g == 1


def exponent_sums(relators, n_gens):
    M = []
    for r in relators:
        row = [0] * n_gens
        for a in r:
            row[abs(a) - 1] += 1 if a > 0 else -1
        M.append(row)
    return M


# ---- census by symbolic rewriting --------------------------------------------


def census_by_rewriting(k: int, m: int):
    """Rewrite the stage knot as a token list and count summands.

    Tokens: ("B", w) an unfilled bead, ("R", w) the copy w(R) of the thread
    part outside the beads.  Filling bead w puts in the copy labelled w and
    the k - 1 sub-beads w + (b,), b != last letter.  Copies with odd-length
    labels are orientation reversed (an odd number of inversions).
    Returns (bead tokens, summands, oriented, mirrored).
    """
    tokens = [("R", ())] + [("B", (j,)) for j in range(1, k + 1)]
    for _ in range(m):
        new = []
        for kind, w in tokens:
            if kind == "B":
                new.append(("R", w))
                new.extend(("B", w + (b,)) for b in range(1, k + 1) if b != w[-1])
            else:
                new.append((kind, w))
        tokens = new
    labels = {w for kind, w in tokens if kind == "R"}
    mirrored = sum(1 for w in labels if len(w) % 2)
    beads = sum(1 for kind, _ in tokens if kind == "B")
    return beads, len(labels), len(labels) - mirrored, mirrored


# ---- geometry ----------------------------------------------------------------


def sphere_through_samples(P: np.ndarray):
    """Least-squares sphere |x - c|^2 = r^2 through points (linear in c and r^2 - |c|^2)."""
    A = np.hstack([2 * P, np.ones((P.shape[0], 1))])
    b = np.einsum("ij,ij->i", P, P)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    c = sol[:-1]
    r = math.sqrt(sol[-1] + c @ c)
    return c, r


def fibonacci_sphere(n: int, d: int = 3, seed: int = 0) -> np.ndarray:
    if d == 3:
        i = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * i / n)
        th = np.pi * (1 + 5 ** 0.5) * i
        return np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=1)
    g = np.random.default_rng(seed).standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1)[:, None]


def gauss_linking(A: np.ndarray, B: np.ndarray) -> float:
    """Discrete Gauss linking integral of two closed polylines (midpoint rule)."""
    dA = np.roll(A, -1, axis=0) - A
    dB = np.roll(B, -1, axis=0) - B
    mA = A + 0.5 * dA
    mB = B + 0.5 * dB
    r = mA[:, None, :] - mB[None, :, :]
    cr = np.cross(dA[:, None, :], dB[None, :, :])
    num = np.einsum("ijk,ijk->ij", r, cr)
    den = np.linalg.norm(r, axis=2) ** 3
    return float((num / den).sum() / (4 * math.pi))


def winding_by_increments(theta: np.ndarray) -> float:
    """Total angle change of a sampled closed loop divided by 2 pi."""
    d = np.diff(np.concatenate([theta, theta[:1]]))
    d = (d + math.pi) % (2 * math.pi) - math.pi
    return float(d.sum() / (2 * math.pi))
