"""Group presentations, amalgamated sums over meridians, abelianization and
the summand / fiber-homology bookkeeping of the inverting process.

Words are tuples of nonzero ints: ``+i`` is generator ``i`` (1-based) and
``-i`` its inverse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

SignedWord = tuple[int, ...]


class HypothesisViolation(ValueError):
    """Input group does not satisfy the 'bigger than Z' hypothesis."""


def free_reduce(w: Sequence[int]) -> SignedWord:
    out: list[int] = []
    for a in w:
        if a == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(int(a))
    return tuple(out)


def cyclic_reduce(w: Sequence[int]) -> SignedWord:
    w = list(free_reduce(w))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def invert_word(w: Sequence[int]) -> SignedWord:
    return tuple(-a for a in reversed(w))


@dataclass(frozen=True)
class Presentation:
    generator_names: tuple[str, ...]
    relators: tuple[SignedWord, ...]
    meridian: SignedWord

    def __post_init__(self):
        names = tuple(self.generator_names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        n = len(names)
        rels = tuple(r for r in (cyclic_reduce(r) for r in self.relators) if r)
        mer = free_reduce(self.meridian)
        for w in rels + (mer,):
            if any(abs(a) > n for a in w):
                raise ValueError("word uses an undeclared generator")
        object.__setattr__(self, "generator_names", names)
        object.__setattr__(self, "relators", rels)
        object.__setattr__(self, "meridian", mer)

    @property
    def n_generators(self) -> int:
        return len(self.generator_names)

    @property
    def n_relators(self) -> int:
        return len(self.relators)

    def word_str(self, w: Sequence[int]) -> str:
        return format_word(w, self.generator_names)


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^\{?(-?\d+)\}?)?$")


def parse_word(text: str, names: Sequence[str]) -> SignedWord:
    """Parse letter-exponent notation such as ``a b a b^-1 a^-1 b^-1``."""
    index = {s: i for i, s in enumerate(names, start=1)}
    out: list[int] = []
    for tok in text.split():
        if tok == "1":
            continue
        m = _TOKEN.match(tok)
        if not m or m.group(1) not in index:
            raise ValueError(f"bad token {tok!r}")
        e = int(m.group(2)) if m.group(2) is not None else 1
        g = index[m.group(1)]
        out.extend([g if e > 0 else -g] * abs(e))
    return free_reduce(out)


def format_word(w: Sequence[int], names: Sequence[str]) -> str:
    if not w:
        return "1"
    toks = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        e = (j - i) * (1 if w[i] > 0 else -1)
        name = names[abs(w[i]) - 1]
        toks.append(name if e == 1 else f"{name}^{e}")
        i = j
    return " ".join(toks)


def format_presentation(P: Presentation) -> str:
    """Text format: generator line, one relator per line, meridian line last."""
    lines = [
        f"# presentation: {P.n_generators} generators, {P.n_relators} relators",
        "# line 1 generators; following lines relators; last line meridian",
        " ".join(P.generator_names),
    ]
    lines += [P.word_str(r) for r in P.relators]
    lines.append(P.word_str(P.meridian))
    return "\n".join(lines) + "\n"


def parse_presentation(text: str) -> Presentation:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 2:
        raise ValueError("presentation text needs a generator line and a meridian line")
    names = tuple(lines[0].split())
    rels = tuple(parse_word(ln, names) for ln in lines[1:-1])
    mer = parse_word(lines[-1], names)
    return Presentation(names, rels, mer)


def _pres(names: str, rels: Sequence[str], mer: str) -> Presentation:
    ns = tuple(names.split())
    return Presentation(ns, tuple(parse_word(r, ns) for r in rels), parse_word(mer, ns))


KNOT_GROUPS = {
    "trefoil": _pres("a b", ["a b a b^-1 a^-1 b^-1"], "a"),
    "figure-eight": _pres("x y", ["y x y^-1 x y x^-1 y^-1 x y^-1 x^-1"], "x"),
    "unknot": _pres("m", [], "m"),
}


def knot_group(name: str) -> Presentation:
    try:
        return KNOT_GROUPS[name]
    except KeyError:
        raise KeyError(f"unknown knot {name!r}; choose from {sorted(KNOT_GROUPS)}") from None


def amalgamated_sum(G: Presentation, copies: int) -> Presentation:
    """``copies`` disjoint copies of G with consecutive meridians identified.

    Copy ``i`` renames generator ``g`` to ``g_i``; relators ``mu_i mu_{i+1}^-1``
    glue the copies.  The result's meridian is ``mu_1``.
    """
    r = int(copies)
    if r < 1:
        raise ValueError("copies must be >= 1")
    if not G.meridian:
        raise ValueError("meridian must be nonempty")
    n = G.n_generators

    def shift(w, i):
        return tuple((abs(a) + i * n) * (1 if a > 0 else -1) for a in w)

    names = tuple(f"{g}_{i + 1}" for i in range(r) for g in G.generator_names)
    rels = [shift(w, i) for i in range(r) for w in G.relators]
    for i in range(r - 1):
        rels.append(shift(G.meridian, i) + invert_word(shift(G.meridian, i + 1)))
    return Presentation(names, tuple(rels), shift(G.meridian, 0))


# ---------------------------------------------------------------------------
# abelian groups


@dataclass(frozen=True)
class AbelianDescriptor:
    """Betti numbers and invariant factors, keyed by homological dimension."""

    betti: dict[int, int] = field(default_factory=dict)
    torsion: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        betti = {int(d): int(b) for d, b in self.betti.items() if b}
        torsion = {int(d): tuple(int(t) for t in ts) for d, ts in self.torsion.items() if ts}
        for b in betti.values():
            if b < 0:
                raise ValueError("betti numbers are nonnegative")
        for ts in torsion.values():
            if any(t <= 1 for t in ts):
                raise ValueError("invariant factors must exceed 1")
            if any(b % a for a, b in zip(ts, ts[1:])):
                raise ValueError("each invariant factor must divide the next")
        object.__setattr__(self, "betti", betti)
        object.__setattr__(self, "torsion", torsion)

    def is_zero(self) -> bool:
        return not self.betti and not self.torsion

    def describe(self, dim: int = 1) -> str:
        parts = ["Z"] * self.betti.get(dim, 0) + [f"Z/{t}" for t in self.torsion.get(dim, ())]
        return " + ".join(parts) if parts else "0"


def relation_matrix(P: Presentation) -> list[list[int]]:
    """Exponent-sum matrix: one row per relator, one column per generator."""
    M = []
    for r in P.relators:
        row = [0] * P.n_generators
        for a in r:
            row[abs(a) - 1] += 1 if a > 0 else -1
        M.append(row)
    return M


def smith_normal_form(M: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero diagonal of the Smith normal form (positive, each divides the next)."""
    A = [list(map(int, row)) for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        piv = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, rows):
                q = A[i][t] // p
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    dirty = True
            for j in range(t + 1, cols):
                q = A[t][j] // p
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j]:
                    dirty = True
            if dirty:
                # move the smallest nonzero remainder in row/column t to the pivot
                best = (abs(p), t, t)
                for i in range(t + 1, rows):
                    if A[i][t] and abs(A[i][t]) < best[0]:
                        best = (abs(A[i][t]), i, t)
                for j in range(t + 1, cols):
                    if A[t][j] and abs(A[t][j]) < best[0]:
                        best = (abs(A[t][j]), t, j)
                _, i, j = best
                A[t], A[i] = A[i], A[t]
                for row in A:
                    row[t], row[j] = row[j], row[t]
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if A[i][j] % p), None)
            if bad is None:
                break
            A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def abelianization(P: Presentation) -> AbelianDescriptor:
    M = relation_matrix(P)
    diag = smith_normal_form(M) if M else []
    betti = P.n_generators - len(diag)
    return AbelianDescriptor({1: betti}, {1: tuple(d for d in diag if d > 1)})


# ---------------------------------------------------------------------------
# census and fibers


@dataclass(frozen=True)
class StageCensus:
    k: int
    stage: int
    bead_count: int
    summand_total: int
    oriented_count: int
    mirrored_count: int
    closed_form_alt: int | None = None

    def __post_init__(self):
        if self.oriented_count + self.mirrored_count != self.summand_total:
            raise ValueError("oriented + mirrored must equal the summand total")


def summand_census(k: int, m: int) -> StageCensus:
    """Prime summands of the stage-m knot, split by orientation.

    The summands added at stage s come from words of length s, one per
    stage-(s-1) bead; they are mirror images when s is odd.

    ``closed_form_alt`` is the alternative closed form k^(m-1) + 1 for the
    summand count; it disagrees with the recursion and is kept only
    for comparison.
    """
    if k < 3 or m < 0:
        raise ValueError("need k >= 3 and m >= 0")
    r1, r2 = 1, 0
    for s in range(1, m + 1):
        added = k * (k - 1) ** (s - 1)
        if s % 2:
            r2 += added
        else:
            r1 += added
    stated = k ** (m - 1) + 1 if m >= 1 else None
    return StageCensus(k, m, k * (k - 1) ** m, r1 + r2, r1, r2, stated)


def fiber_betti(fiber: AbelianDescriptor, k: int, m: int) -> AbelianDescriptor:
    """Homology of the stage-m fiber: the (l_m + 1)-fold sum of the knot's fiber."""
    if m < 0:
        raise ValueError("m >= 0")
    mult = k * (k - 1) ** m + 1
    return AbelianDescriptor({d: b * mult for d, b in fiber.betti.items()},
                             {d: tuple(sorted(ts * mult)) for d, ts in fiber.torsion.items()})


FIBERS = {
    "trefoil": AbelianDescriptor({1: 2}),          # punctured torus
    "figure-eight": AbelianDescriptor({1: 2}),     # punctured torus
    "unknot": AbelianDescriptor(),                 # disk
    "cappell-shaneson": AbelianDescriptor({1: 3, 2: 3}),  # T^3 minus a point
}


def brieskorn_fiber(n: int = 5) -> AbelianDescriptor:
    """Fiber of z1^3 + z2^2 + ... + zn^2: a wedge of two (n-1)-spheres."""
    return AbelianDescriptor({n - 1: 2})


@dataclass(frozen=True)
class LocalGroupReport:
    presentation: Presentation
    generator_lower_bound: int
    bound_sequence: tuple[int, ...]
    note: str = "lower bound reported from the summand count, not verified"


def wild_local_group(G: Presentation, census: StageCensus) -> LocalGroupReport:
    """Group of a small bead minus the stage knot, as an amalgamated sum.

    Refuses groups on fewer than two generators (infinite cyclic, not bigger
    than Z).
    """
    if G.n_generators < 2:
        raise HypothesisViolation("knot group must be bigger than Z (at least two generators)")
    copies = census.summand_total
    seq = tuple(summand_census(census.k, s).summand_total for s in range(census.stage + 1))
    return LocalGroupReport(amalgamated_sum(G, copies), copies, seq)
