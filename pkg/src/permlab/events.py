"""Witness events for nonzero permanent minors, the pair-minor matrix and its
graph, triangle finding/packing, and the hollow-3x3 rank certificate.

The central event: after deleting the last s rows of a square matrix, do
there exist ell pairwise-disjoint column sets of size s whose complementary
square minors all have nonzero permanent?  detect_witnesses answers exactly
when the search space is small and falls back to a greedy first-fit scan
(one-sided: a greedy "holds" is always correct) when it is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import NamedTuple, Optional

import numpy as np

from .errors import BadConfig, NotHollowSymmetric, SizeCap
from .fields import FieldElem
from .matrices import MatrixFq, NotSquare, minor_permanent

EXACT_SCAN_CAP = 10**6
EXACT_PACK_CAP = 10**5
PAIR_MINOR_CAP = 16


@dataclass(frozen=True)
class EventReport:
    """Outcome of a witness search.

    witnesses are 1-based column sets, pairwise disjoint, each of size s and
    each with nonzero complementary-minor permanent.  exhaustive marks
    whether the search was exact; a greedy (non-exhaustive) report can only
    err by holds=False."""

    s: int
    ell: int
    holds: bool
    witnesses: tuple[tuple[int, ...], ...]
    exhaustive: bool

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "ell": self.ell,
            "holds": self.holds,
            "witnesses": [list(w) for w in self.witnesses],
            "exhaustive": self.exhaustive,
        }


def detect_witnesses(a: MatrixFq, s: int, ell: int = 1, *,
                     allow_greedy: bool = True) -> EventReport:
    """Search for ell disjoint size-s column sets with nonzero minors.

    Exact for ell = 1 (capped at C(n, s) <= 1e6 candidates) and for small
    packings (s*ell <= n and C(n, s) <= 1e5, by backtracking in lexicographic
    order); greedy first-fit otherwise."""
    n = a.n
    if a.m != a.n:
        raise NotSquare(f"witness detection needs a square matrix, got {a.shape}")
    if not 0 <= s <= n:
        raise BadConfig(f"deletion depth s={s} outside 0..{n}")
    if ell < 1:
        raise BadConfig(f"witness count ell={ell} must be >= 1")

    if s == 0:
        # the only size-0 column set is empty; it certifies per(A) != 0
        holds = minor_permanent(a, ()).value != 0
        return EventReport(s, ell, holds, ((),) * ell if holds else (), True)

    if s * ell > n:
        return EventReport(s, ell, False, (), True)

    ncand = comb(n, s)
    if ell == 1:
        if ncand > EXACT_SCAN_CAP:
            raise SizeCap(f"C({n},{s}) = {ncand} exceeds exact scan cap")
        for cols in combinations(range(1, n + 1), s):
            if minor_permanent(a, cols).value != 0:
                return EventReport(s, ell, True, (cols,), True)
        return EventReport(s, ell, False, (), True)

    if ncand <= EXACT_PACK_CAP:
        witnesses = [cols for cols in combinations(range(1, n + 1), s)
                     if minor_permanent(a, cols).value != 0]
        packing = _pack_disjoint_sets(witnesses, ell)
        if packing is not None:
            return EventReport(s, ell, True, tuple(packing), True)
        return EventReport(s, ell, False, (), True)

    if not allow_greedy:
        raise SizeCap(f"C({n},{s}) = {ncand} exceeds exact packing cap and greedy is disabled")
    chosen: list[tuple[int, ...]] = []
    used: set[int] = set()
    for cols in combinations(range(1, n + 1), s):
        if used.isdisjoint(cols) and minor_permanent(a, cols).value != 0:
            chosen.append(cols)
            used.update(cols)
            if len(chosen) == ell:
                return EventReport(s, ell, True, tuple(chosen), False)
    return EventReport(s, ell, False, tuple(chosen), False)


def _pack_disjoint_sets(cands: list[tuple[int, ...]], ell: int):
    """Backtracking search for ell pairwise-disjoint sets, preferring the
    lexicographically least witness family."""
    chosen: list[tuple[int, ...]] = []

    def dfs(start: int, used: frozenset) -> bool:
        if len(chosen) == ell:
            return True
        if len(cands) - start < ell - len(chosen):
            return False
        for idx in range(start, len(cands)):
            cols = cands[idx]
            if used.isdisjoint(cols):
                chosen.append(cols)
                if dfs(idx + 1, used | frozenset(cols)):
                    return True
                chosen.pop()
        return False

    return list(chosen) if dfs(0, frozenset()) else None


# -- pair-minor matrix and its graph ----------------------------------------


def pair_minor_matrix(a: MatrixFq) -> MatrixFq:
    """The symmetric hollow n x n matrix whose (i, j) entry, i != j, is the
    permanent of the minor deleting the last two rows and columns i, j."""
    n = a.n
    if a.m != n:
        raise NotSquare(f"pair-minor matrix needs a square matrix, got {a.shape}")
    if n < 2:
        raise BadConfig("pair-minor matrix needs n >= 2")
    if n > PAIR_MINOR_CAP:
        raise SizeCap(f"pair-minor matrix capped at n <= {PAIR_MINOR_CAP}, got {n}")
    h = np.zeros((n, n), dtype=np.int64)
    for i, j in combinations(range(1, n + 1), 2):
        v = minor_permanent(a, (i, j)).value
        h[i - 1, j - 1] = v
        h[j - 1, i - 1] = v
    return MatrixFq(a.field, h)


def mat_vec(a: MatrixFq, vec) -> np.ndarray:
    """Matrix-vector product over the field, on canonical indices."""
    x = np.asarray(vec, dtype=np.int64)
    if x.shape != (a.n,):
        raise BadConfig(f"vector length {x.shape} does not match {a.n} columns")
    f = a.field
    out = np.zeros(a.m, dtype=np.int64)
    for j in range(a.n):
        out = f.add(out, f.mul(a.array[:, j], int(x[j])))
    return out


class Hollow3Certificate(NamedTuple):
    rank3: bool
    det: FieldElem


def hollow3_certificate(b: MatrixFq) -> Hollow3Certificate:
    """Closed-form rank certificate for a symmetric 3x3 with zero diagonal:
    det = 2 * b12 * b13 * b23, and the matrix has rank 3 iff det != 0 (so
    always, in odd characteristic, when all off-diagonals are nonzero)."""
    if b.shape != (3, 3):
        raise NotHollowSymmetric(f"need a 3x3 matrix, got {b.shape}")
    arr = b.array
    if any(arr[i, i] != 0 for i in range(3)):
        raise NotHollowSymmetric("diagonal entries must all be zero")
    if not np.array_equal(arr, arr.T):
        raise NotHollowSymmetric("matrix must be symmetric")
    f = b.field
    two = f.add(1, 1)
    det = f.mul(f.mul(two, int(arr[0, 1])), f.mul(int(arr[0, 2]), int(arr[1, 2])))
    return Hollow3Certificate(rank3=det != 0, det=FieldElem(int(det), f))


class PermGraph:
    """Simple loop-free graph on vertices 1..n; when built from a pair-minor
    matrix, edges sit exactly at its nonzero off-diagonal positions."""

    __slots__ = ("n", "edges", "h", "_adj")

    def __init__(self, n: int, edges, h: Optional[MatrixFq] = None):
        self.n = n
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise BadConfig(f"loop edge ({u},{v})")
            if not (1 <= u <= n and 1 <= v <= n):
                raise BadConfig(f"edge ({u},{v}) outside 1..{n}")
            norm.add((min(u, v), max(u, v)))
        self.edges = frozenset(norm)
        self.h = h
        adj: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        self._adj = adj

    @classmethod
    def from_pair_minors(cls, h: MatrixFq) -> "PermGraph":
        arr = h.array
        if arr.shape[0] != arr.shape[1]:
            raise NotSquare(f"pair-minor matrix must be square, got {h.shape}")
        if not np.array_equal(arr, arr.T) or np.any(np.diagonal(arr) != 0):
            raise NotHollowSymmetric("pair-minor matrix must be symmetric with zero diagonal")
        n = arr.shape[0]
        edges = [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n)
                 if arr[i, j] != 0]
        return cls(n, edges, h=h)

    def neighbors(self, v: int) -> set[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def without_vertices(self, vs) -> "PermGraph":
        dead = set(vs)
        kept = [(u, v) for u, v in self.edges if u not in dead and v not in dead]
        return PermGraph(self.n, kept)

    def __repr__(self):
        return f"PermGraph(n={self.n}, edges={self.edge_count})"


def find_triangle(g: PermGraph) -> Optional[tuple[int, int, int]]:
    """A triangle of g, or None only if g is triangle-free.

    Vertices are scanned in ascending degree order (ties by index); whenever
    the graph has more than n^2/4 edges a triangle exists and is found."""
    order = sorted(range(1, g.n + 1), key=lambda v: (g.degree(v), v))
    pos = {v: i for i, v in enumerate(order)}
    later: dict[int, set[int]] = {
        v: {u for u in g.neighbors(v) if pos[u] > pos[v]} for v in order
    }
    for v in order:
        nb = later[v]
        for u in sorted(nb, key=lambda w: pos[w]):
            common = nb & later[u]
            if common:
                w = min(common, key=lambda x: pos[x])
                return tuple(sorted((v, u, w)))
    return None


def pack_disjoint_triangles(g: PermGraph, d: int) -> list[tuple[int, int, int]]:
    """Up to d vertex-disjoint triangles, found greedily: after each triangle
    all edges incident to its vertices are removed before the next search."""
    if d < 1:
        raise BadConfig(f"triangle budget d={d} must be >= 1")
    found: list[tuple[int, int, int]] = []
    cur = g
    while len(found) < d:
        tri = find_triangle(cur)
        if tri is None:
            break
        found.append(tri)
        cur = cur.without_vertices(tri)
    return found


def minor_dependence_matrix(a: MatrixFq, cols) -> MatrixFq:
    """The s x n matrix recording how the minors adjacent to the witness set
    `cols` (1-based, size s) depend on row n-s+1 of A.

    Row i (for i in cols, ascending), column h:
      per(A; cols - i + h) if h not in cols; per(A; cols) if h = i; else 0.
    Multiplying by row n-s+1 of A yields per(A; cols \\ {i}) in position i,
    and the restriction to cols x cols is diagonal with value per(A; cols)."""
    if a.m != a.n:
        raise NotSquare(f"dependence matrix needs a square matrix, got {a.shape}")
    witness = tuple(sorted(int(c) for c in cols))
    s = len(witness)
    if len(set(witness)) != s or not all(1 <= c <= a.n for c in witness):
        raise BadConfig(f"bad witness column set {cols}")
    base = minor_permanent(a, witness).value
    out = np.zeros((s, a.n), dtype=np.int64)
    in_witness = set(witness)
    for r, i in enumerate(witness):
        for h in range(1, a.n + 1):
            if h == i:
                out[r, h - 1] = base
            elif h not in in_witness:
                swapped = tuple(sorted((set(witness) - {i}) | {h}))
                out[r, h - 1] = minor_permanent(a, swapped).value
    return MatrixFq(a.field, out)
