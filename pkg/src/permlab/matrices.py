"""Dense matrices over F_q: determinant, rank, permanents, submatrix calculus.

Index-set arguments (row/column sets) are 1-based in every public signature,
matching the usual mathematical convention; positions are converted to
0-based numpy indexing internally and nowhere else.

Two independent permanent kernels are provided: a memoized minor-expansion
kernel (n <= 12) and a Gray-code inclusion-exclusion kernel (n <= 30) that
maintains running column sums in F_q.  They cross-validate each other; the
Gray-code kernel is the default above n = 4.  All arithmetic stays in the
field, so no integer-overflow path exists.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import (
    DuplicateIndex,
    FieldMismatch,
    NotSquare,
    OutOfRange,
    SizeCap,
)
from .fields import FieldElem, FieldSpec, make_field

EXPANSION_CAP = 12
RYSER_CAP = 30
_CHUNK_ELEMS = 1 << 22  # target int64 elements per Gray-code chunk


class MatrixFq:
    """An immutable m x n matrix over F_q.

    Entries are stored as canonical indices in an int64 array; entry(i, j)
    wraps a single position (0-based) as a FieldElem.
    """

    __slots__ = ("field", "array")

    def __init__(self, field: FieldSpec, entries):
        arr = np.asarray(entries, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError(f"need a 2-D entry array, got ndim={arr.ndim}")
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise ValueError(f"entries must be canonical indices in [0, {field.q})")
        arr = arr.copy()
        arr.setflags(write=False)
        self.field = field
        self.array = arr

    @property
    def m(self) -> int:
        return self.array.shape[0]

    @property
    def n(self) -> int:
        return self.array.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.array.shape

    def entry(self, i: int, j: int) -> FieldElem:
        return FieldElem(int(self.array[i, j]), self.field)

    def transpose(self) -> "MatrixFq":
        return MatrixFq(self.field, self.array.T)

    def __eq__(self, other):
        if not isinstance(other, MatrixFq):
            return NotImplemented
        return (self.field.q == other.field.q
                and self.shape == other.shape
                and bool(np.array_equal(self.array, other.array)))

    def __repr__(self):
        return f"MatrixFq(q={self.field.q}, shape={self.shape})"

    def to_json(self) -> dict:
        return {"q": self.field.q, "rows": self.array.tolist()}

    @classmethod
    def from_json(cls, obj) -> "MatrixFq":
        if isinstance(obj, str):
            obj = json.loads(obj)
        field = make_field(obj["q"])
        return cls(field, obj["rows"])


def _require_same_field(a: MatrixFq, b: MatrixFq) -> FieldSpec:
    if a.field is not b.field:
        raise FieldMismatch(f"mixed fields F_{a.field.q} and F_{b.field.q}")
    return a.field


def _index_set(indices, bound: int, what: str) -> np.ndarray:
    """Validate a 1-based index set; return sorted 0-based positions."""
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise DuplicateIndex(f"repeated {what} index in {indices}")
    for i in idx:
        if not 1 <= i <= bound:
            raise OutOfRange(f"{what} index {i} outside 1..{bound}")
    return np.array(sorted(i - 1 for i in idx), dtype=np.int64)


def delete_last_rows(a: MatrixFq, s: int) -> MatrixFq:
    """The matrix with its last s rows removed (s = 0 returns a itself)."""
    if not 0 <= s <= a.m:
        raise OutOfRange(f"cannot delete {s} rows from a {a.m}-row matrix")
    if s == 0:
        return a
    return MatrixFq(a.field, a.array[: a.m - s])


def submatrix(m: MatrixFq, rows, cols) -> MatrixFq:
    """The |rows| x |cols| submatrix keeping the 1-based rows and cols given,
    in their original matrix order.  Empty index sets give zero dimensions."""
    ri = _index_set(rows, m.m, "row")
    ci = _index_set(cols, m.n, "column")
    return MatrixFq(m.field, m.array[np.ix_(ri, ci)])


def complement_columns(m: MatrixFq, cols) -> MatrixFq:
    """Drop the 1-based columns in cols, keeping the rest in order."""
    ci = _index_set(cols, m.n, "column")
    keep = np.setdiff1d(np.arange(m.n, dtype=np.int64), ci)
    return MatrixFq(m.field, m.array[:, keep])


# -- determinant and rank ----------------------------------------------------


def determinant(a: MatrixFq) -> FieldElem:
    """Determinant by Gaussian elimination with partial pivoting over F_q.

    det(empty) = 1; agrees with the signed permutation sum."""
    if a.m != a.n:
        raise NotSquare(f"determinant needs a square matrix, got {a.shape}")
    f = a.field
    n = a.n
    if n == 0:
        return f.one
    m = a.array.copy()
    det = 1
    for c in range(n):
        nz = np.flatnonzero(m[c:, c])
        if nz.size == 0:
            return f.zero
        pivot = c + int(nz[0])
        if pivot != c:
            m[[c, pivot]] = m[[pivot, c]]
            det = f.neg(det)
        pv = int(m[c, c])
        det = f.mul(det, pv)
        if c + 1 < n:
            inv = f.inv(pv)
            factors = f.mul(m[c + 1:, c], inv)
            m[c + 1:, c:] = f.sub(m[c + 1:, c:], f.mul(factors[:, None], m[c, c:][None, :]))
    return FieldElem(int(det), f)


def rank(a: MatrixFq) -> int:
    """Row rank by elimination; zero-dimension matrices have rank 0."""
    f = a.field
    m = a.array.copy()
    nrows, ncols = m.shape
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        pivot = r + int(nz[0])
        if pivot != r:
            m[[r, pivot]] = m[[pivot, r]]
        inv = f.inv(int(m[r, c]))
        if r + 1 < nrows:
            factors = f.mul(m[r + 1:, c], inv)
            m[r + 1:, c:] = f.sub(m[r + 1:, c:], f.mul(factors[:, None], m[r, c:][None, :]))
        r += 1
    return r


# -- permanents --------------------------------------------------------------


def permanent_expansion(a: MatrixFq) -> FieldElem:
    """Permanent by last-row minor expansion, memoized on column subsets.

    per(A) = sum_i per(A'_i) * x_i with A'_i the last-row/i-th-column minor;
    per(empty) = 1.  Capped at n <= 12."""
    if a.m != a.n:
        raise NotSquare(f"permanent needs a square matrix, got {a.shape}")
    n = a.n
    if n > EXPANSION_CAP:
        raise SizeCap(f"expansion kernel capped at n <= {EXPANSION_CAP}, got {n}")
    f = a.field
    if n == 0:
        return f.one
    arr = a.array
    vals = [0] * (1 << n)
    vals[0] = 1
    for mask in range(1, 1 << n):
        r = mask.bit_count() - 1
        acc = 0
        rest = mask
        while rest:
            low = rest & -rest
            j = low.bit_length() - 1
            acc = f.add(acc, f.mul(vals[mask ^ low], int(arr[r, j])))
            rest ^= low
        vals[mask] = acc
    return FieldElem(int(vals[(1 << n) - 1]), f)


def _gray_chunk(t0: int, t1: int, m: int):
    """Gray-code bookkeeping for subset steps t in [t0, t1).

    Returns (flip_col, delta_sign, term_sign): the column toggled at each
    step, whether it was turned on (+1) or off (-1), and the Ryser sign
    (-1)^(m - |S|) of the subset after the step."""
    t = np.arange(t0, t1, dtype=np.uint64)
    g = t ^ (t >> np.uint64(1))
    low = t & (~t + np.uint64(1))
    flip = np.bitwise_count(low - np.uint64(1)).astype(np.int64)
    on = (g & low) != 0
    delta = np.where(on, np.int64(1), np.int64(-1))
    popc = np.bitwise_count(g).astype(np.int64)
    term = 1 - 2 * ((m - popc) & 1)
    return flip, delta, term.astype(np.int64)


def _gray_start_sums(arr: np.ndarray, t0: int, p: int) -> np.ndarray:
    """Row sums of the columns in the Gray subset reached after step t0."""
    g = t0 ^ (t0 >> 1)
    cols = [j for j in range(arr.shape[2]) if (g >> j) & 1]
    if not cols:
        return np.zeros(arr.shape[:2], dtype=np.int64)
    return arr[:, :, cols].sum(axis=2) % p


def _ryser_cumsum(entries: np.ndarray, p: int) -> np.ndarray:
    """Gray-code Ryser for small batches: the whole subset walk is laid out
    as one cumulative sum per matrix."""
    b, m, _ = entries.shape
    total = (1 << m) - 1
    chunk = max(1, _CHUNK_ELEMS // max(1, b * m))
    acc = np.zeros(b, dtype=np.int64)
    base = np.zeros((b, m), dtype=np.int64)
    t0 = 1
    while t0 <= total:
        t1 = min(total + 1, t0 + chunk)
        flip, delta, term = _gray_chunk(t0, t1, m)
        if t0 > 1:
            base = _gray_start_sums(entries, t0 - 1, p)
        cols = entries[:, :, flip].transpose(0, 2, 1) * delta[None, :, None]
        sums = base[:, None, :] + np.cumsum(cols, axis=1)
        sums %= p
        prod = np.ones((b, t1 - t0), dtype=np.int64)
        for i in range(m):
            prod *= sums[:, :, i]
            prod %= p
        acc = (acc + (prod * term[None, :]).sum(axis=1)) % p
        t0 = t1
    return acc % p


def _ryser_sample_major(entries: np.ndarray, p: int) -> np.ndarray:
    """Gray-code Ryser for large batches: one python-level pass over the
    2^m - 1 subset steps, with running column sums updated across the whole
    batch at once.

    Reductions mod p are deferred while every intermediate stays inside
    int64: the running sums are integer representatives of the true residues
    and reducing only the per-step product is exact."""
    b, m, _ = entries.shape
    out = np.empty(b, dtype=np.int64)
    block = max(1, _CHUNK_ELEMS // (1 << m))
    # largest deferral K with (p*(K+1))^m < 2^62; K = 0 forces per-step mods
    bound = 2.0 ** (62.0 / m)
    defer = max(0, int(bound / p) - 1)
    for s0 in range(0, b, block):
        s1 = min(b, s0 + block)
        cols = np.ascontiguousarray(entries[s0:s1].transpose(2, 1, 0))  # (m, m, nb)
        nb = s1 - s0
        sums = np.zeros((m, nb), dtype=np.int64)
        acc = np.zeros(nb, dtype=np.int64)
        prod = np.empty(nb, dtype=np.int64)
        since_mod = 0
        for t in range(1, (1 << m)):
            low = t & -t
            j = low.bit_length() - 1
            g = t ^ (t >> 1)
            if g & low:
                sums += cols[j]
            else:
                sums -= cols[j]
            since_mod += 1
            if since_mod > defer:
                np.remainder(sums, p, out=sums)
                since_mod = 0
            np.copyto(prod, sums[0])
            if defer:
                for i in range(1, m):
                    np.multiply(prod, sums[i], out=prod)
                np.remainder(prod, p, out=prod)
            else:
                for i in range(1, m):
                    np.multiply(prod, sums[i], out=prod)
                    np.remainder(prod, p, out=prod)
            if (m - g.bit_count()) & 1:
                acc -= prod
            else:
                acc += prod
        out[s0:s1] = acc % p
    return out


def ryser_batch_prime(entries: np.ndarray, p: int) -> np.ndarray:
    """Permanents of a (B, m, m) batch over a prime field, by Gray-code
    subset iteration maintaining running column sums in F_p."""
    b, m, m2 = entries.shape
    if m != m2:
        raise NotSquare(f"batch of shape {entries.shape} is not square")
    if m == 0:
        return np.ones(b, dtype=np.int64)
    if b >= 128 and m >= 6:
        return _ryser_sample_major(entries, p)
    return _ryser_cumsum(entries, p)


def det_batch_prime(entries: np.ndarray, p: int) -> np.ndarray:
    """Determinants of a (B, n, n) batch over a prime field with p < 2^15,
    by vectorized Gaussian elimination with per-sample pivoting."""
    b, n, n2 = entries.shape
    if n != n2:
        raise NotSquare(f"batch of shape {entries.shape} is not square")
    if p >= 1 << 15:
        raise SizeCap("batched determinant needs p < 2^15")
    if n == 0:
        return np.ones(b, dtype=np.int64)
    m = entries.copy().astype(np.int64)
    det = np.ones(b, dtype=np.int64)
    inv_table = np.zeros(p, dtype=np.int64)
    inv_table[1:] = [pow(v, p - 2, p) for v in range(1, p)]
    bidx = np.arange(b)
    for c in range(n):
        nz = m[:, c:, c] != 0
        has = nz.any(axis=1)
        det[~has] = 0
        piv = c + nz.argmax(axis=1)
        rowc = m[bidx, c, :].copy()
        rowp = m[bidx, piv, :].copy()
        m[bidx, c, :] = rowp
        m[bidx, piv, :] = rowc
        det = np.where(piv > c, (p - det) % p, det)
        pv = m[:, c, c]
        det = det * pv % p
        if c + 1 < n:
            factors = m[:, c + 1:, c] * inv_table[pv][:, None] % p
            m[:, c + 1:, c:] = (m[:, c + 1:, c:]
                                - factors[:, :, None] * m[:, None, c, c:]) % p
    return det


def _ryser_extension(arr: np.ndarray, field: FieldSpec) -> int:
    """Gray-code Ryser over an extension field via exp/log tables."""
    m = arr.shape[0]
    if m == 0:
        return 1
    log = field.log_table
    exp = field.exp_table
    sums = np.zeros(m, dtype=np.int64)
    acc = 0
    for t in range(1, 1 << m):
        low = t & -t
        j = low.bit_length() - 1
        g = t ^ (t >> 1)
        if g & low:
            sums = field.add(sums, arr[:, j])
        else:
            sums = field.sub(sums, arr[:, j])
        if np.all(sums != 0):
            term = int(exp[int(log[sums].sum()) % (field.q - 1)])
            if (m - int(g).bit_count()) & 1:
                term = field.neg(term)
            acc = field.add(acc, term)
    return int(acc)


def permanent_ryser(a: MatrixFq) -> FieldElem:
    """Permanent by Gray-code inclusion-exclusion (running column sums in
    F_q); exactly equals permanent_expansion on any input.  Cap n <= 30."""
    if a.m != a.n:
        raise NotSquare(f"permanent needs a square matrix, got {a.shape}")
    n = a.n
    if n > RYSER_CAP:
        raise SizeCap(f"Ryser kernel capped at n <= {RYSER_CAP}, got {n}")
    f = a.field
    if n == 0:
        return f.one
    if f.k == 1:
        val = ryser_batch_prime(a.array[None, :, :], f.p)[0]
        return FieldElem(int(val), f)
    return FieldElem(_ryser_extension(a.array, f), f)


def permanent(a: MatrixFq) -> FieldElem:
    """Default permanent: expansion kernel for n <= 4, Gray-code above."""
    if a.n <= 4 and a.m == a.n:
        return permanent_expansion(a)
    return permanent_ryser(a)


def minor_permanent(a: MatrixFq, cols) -> FieldElem:
    """per(A; I): drop the last len(I) rows of the square matrix A and the
    1-based columns I, then take the permanent of the square minor.

    len(I) = n gives the empty matrix, whose permanent is 1; I = () gives
    per(A)."""
    if a.m != a.n:
        raise NotSquare(f"minor_permanent needs a square matrix, got {a.shape}")
    ci = _index_set(cols, a.n, "column")
    s = len(ci)
    keep = np.setdiff1d(np.arange(a.n, dtype=np.int64), ci)
    sub = a.array[: a.n - s][:, keep]
    return permanent(MatrixFq(a.field, sub))
