"""Exact enumeration oracles, closed-form singularity laws, Monte Carlo
estimation with Wilson intervals, conditional estimators, brute-force
anticoncentration certificates, and the distribution bound-checker.

Monte Carlo sample i always draws from the split stream (seed, path + (i,)),
so tallies are bit-identical no matter how the index space is partitioned
over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import permutations

import numpy as np

from .errors import (
    BadConfig,
    BadN,
    CharacteristicTwo,
    ConditioningTooRare,
    SizeCap,
)
from .events import detect_witnesses, pair_minor_matrix
from .fields import FieldSpec, make_field, _factor_prime_power
from .matrices import (
    MatrixFq,
    det_batch_prime,
    determinant,
    permanent_ryser,
    rank,
    ryser_batch_prime,
    _ryser_extension,
)
from .randomness import EntryDistribution, RandomStream, sample_matrix_batch

WILSON_Z99 = 2.5758293035489004
ENUMERATION_CAP = 50_000_000
LINEAR_MAP_CAP = 10_000_000
_EXACT_MAP_CAP = 100_000
_MC_BATCH = 4096
WINDOW_CONSTANT = 11  # numerator of the C/q^3 window half-width


# -- closed forms -------------------------------------------------------------


def limiting_singular_probability(q: int, tol: float = 1e-12) -> float:
    """alpha_q = 1 - prod_{i>=1} (1 - q^-i), truncated once the remaining
    tail sum_{i>m} q^-i drops below tol."""
    _factor_prime_power(q)  # raises NotAPrimePower for invalid orders
    if not tol > 0:
        raise BadConfig("tol must be positive")
    prod = 1.0
    i = 1
    while True:
        prod *= 1.0 - q ** (-i)
        if q ** (-i) / (q - 1) < tol:
            break
        i += 1
    return 1.0 - prod


def det_singular_probability(n: int, q: int) -> Fraction:
    """Exact Pr[det = 0] for a uniform n x n matrix: 1 - prod_{j<=n}(1-q^-j)."""
    _factor_prime_power(q)
    if n < 0:
        raise BadConfig("n must be non-negative")
    prod = Fraction(1)
    for j in range(1, n + 1):
        prod *= 1 - Fraction(1, q**j)
    return 1 - prod


def delta_separation(p: int) -> float:
    """The explicit separation margin (1 - 2*alpha_p) * p^-2 / 10 used by the
    general-distribution upper bound."""
    return (1.0 - 2.0 * limiting_singular_probability(p)) / (10.0 * p * p)


# -- exact enumeration --------------------------------------------------------


@dataclass(frozen=True)
class ExactDistribution:
    """Exact value counts of a statistic over all q^(n^2) matrices."""

    q: int
    n: int
    statistic: str
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.q ** (self.n * self.n)

    def probability(self, z: int) -> Fraction:
        return Fraction(self.counts[z], self.total)

    def to_json(self) -> dict:
        return {"q": self.q, "n": self.n, "statistic": self.statistic,
                "counts": [str(c) for c in self.counts]}


def _permutation_values(digits: np.ndarray, keep: list[int], field: FieldSpec,
                        statistic: str) -> np.ndarray:
    """Vectorized permutation-sum of the (n-1)x(n-1) minors given by `keep`,
    across a chunk of top blocks of shape (C, n-1, n)."""
    m = len(keep)
    out = np.zeros(digits.shape[0], dtype=np.int64)
    if m == 0:
        return out + 1
    for perm in permutations(range(m)):
        term = np.ones(digits.shape[0], dtype=np.int64)
        for r in range(m):
            term = field.mul(term, digits[:, r, keep[perm[r]]])
        if statistic == "det":
            inv = sum(1 for i in range(m) for j in range(i + 1, m)
                      if perm[i] > perm[j])
            if inv % 2:
                term = field.neg(term)
        out = field.add(out, term)
    return out


def enumerate_exact(n: int, q: int, statistic: str = "per") -> ExactDistribution:
    """Exact distribution of per or det over all q^(n^2) matrices.

    Matrices are grouped by their top (n-1) x n block, enumerated in odometer
    order; for each block the n cofactors of the last row are evaluated, and
    the q^n last rows are tallied in closed form (a nonzero cofactor vector
    spreads the statistic uniformly, q^(n-1) rows per value; an all-zero one
    pins it to 0 for all q^n rows).  Counts are exact integers."""
    if statistic not in ("per", "det"):
        raise BadConfig(f"statistic must be 'per' or 'det', got {statistic!r}")
    field = make_field(q)
    if n < 0:
        raise BadConfig("n must be non-negative")
    total = q ** (n * n)
    if total > ENUMERATION_CAP:
        raise SizeCap(f"q^(n^2) = {total} exceeds enumeration cap {ENUMERATION_CAP}")
    counts = [0] * q
    if n == 0:
        counts[1 % q] += 1  # the empty matrix has per = det = 1
        return ExactDistribution(q, n, statistic, tuple(counts))

    n_blocks = q ** ((n - 1) * n)
    width = (n - 1) * n
    place = [q ** (width - 1 - j) for j in range(width)]
    zero_blocks = 0
    chunk = 1 << 18
    start = 0
    while start < n_blocks:
        stop = min(n_blocks, start + chunk)
        idx = np.arange(start, stop, dtype=np.int64)
        digits = np.empty((stop - start, width), dtype=np.int64)
        for j in range(width):
            digits[:, j] = (idx // place[j]) % q
        digits = digits.reshape(stop - start, n - 1, n)
        any_nonzero = np.zeros(stop - start, dtype=bool)
        for i in range(n):
            keep = [j for j in range(n) if j != i]
            cof = _permutation_values(digits, keep, field, statistic)
            any_nonzero |= cof != 0
        zero_blocks += int((~any_nonzero).sum())
        start = stop
    nonzero_blocks = n_blocks - zero_blocks
    counts[0] = zero_blocks * q**n + nonzero_blocks * q ** (n - 1)
    for z in range(1, q):
        counts[z] = nonzero_blocks * q ** (n - 1)
    return ExactDistribution(q, n, statistic, tuple(counts))


# -- events for Monte Carlo ---------------------------------------------------


class MatrixEvent:
    """A boolean predicate on square random matrices."""

    def evaluate(self, a: MatrixFq) -> bool:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def batch_evaluate(self, entries: np.ndarray, field: FieldSpec) -> np.ndarray:
        return np.array(
            [self.evaluate(MatrixFq(field, e)) for e in entries], dtype=bool
        )


class StatEquals(MatrixEvent):
    """per(A) = value or det(A) = value."""

    def __init__(self, stat: str, value: int = 0):
        if stat not in ("per", "det"):
            raise BadConfig(f"stat must be 'per' or 'det', got {stat!r}")
        self.stat = stat
        self.value = int(value)

    def evaluate(self, a: MatrixFq) -> bool:
        v = permanent_ryser(a) if self.stat == "per" else determinant(a)
        return v.value == self.value

    def batch_evaluate(self, entries, field):
        return _stat_values_batch(entries, field, self.stat) == self.value

    def describe(self):
        return {"kind": "stat", "stat": self.stat, "value": self.value}


class WitnessEvent(MatrixEvent):
    """ell disjoint size-s column sets with nonzero complementary minors."""

    def __init__(self, s: int, ell: int = 1):
        self.s = int(s)
        self.ell = int(ell)

    def evaluate(self, a: MatrixFq) -> bool:
        return detect_witnesses(a, self.s, self.ell).holds

    def describe(self):
        return {"kind": "witness", "s": self.s, "ell": self.ell}


class PairMinorRankAtLeast(MatrixEvent):
    """rank of the pair-minor permanent matrix >= r."""

    def __init__(self, r: int):
        self.r = int(r)

    def evaluate(self, a: MatrixFq) -> bool:
        return rank(pair_minor_matrix(a)) >= self.r

    def describe(self):
        return {"kind": "pair-minor-rank", "r": self.r}


class AlwaysTrue(MatrixEvent):
    def evaluate(self, a: MatrixFq) -> bool:
        return True

    def batch_evaluate(self, entries, field):
        return np.ones(entries.shape[0], dtype=bool)

    def describe(self):
        return {"kind": "true"}


class AllOf(MatrixEvent):
    """Conjunction of events."""

    def __init__(self, *events: MatrixEvent):
        if not events:
            raise BadConfig("AllOf needs at least one event")
        self.events = events

    def evaluate(self, a: MatrixFq) -> bool:
        return all(e.evaluate(a) for e in self.events)

    def batch_evaluate(self, entries, field):
        out = self.events[0].batch_evaluate(entries, field)
        for e in self.events[1:]:
            if not out.any():
                break
            sub = e.batch_evaluate(entries[out], field)
            nxt = np.zeros_like(out)
            nxt[np.flatnonzero(out)[sub]] = True
            out = nxt
        return out

    def describe(self):
        return {"kind": "all", "of": [e.describe() for e in self.events]}


def build_event(desc: dict) -> MatrixEvent:
    kind = desc.get("kind")
    if kind == "stat":
        return StatEquals(desc["stat"], desc.get("value", 0))
    if kind == "witness":
        return WitnessEvent(desc["s"], desc.get("ell", 1))
    if kind == "pair-minor-rank":
        return PairMinorRankAtLeast(desc["r"])
    if kind == "true":
        return AlwaysTrue()
    if kind == "all":
        return AllOf(*(build_event(d) for d in desc["of"]))
    raise BadConfig(f"unknown event kind {kind!r}")


def _stat_values_batch(entries: np.ndarray, field: FieldSpec, stat: str) -> np.ndarray:
    if stat == "per":
        if field.k == 1:
            return ryser_batch_prime(entries, field.p)
        return np.array([_ryser_extension(e, field) for e in entries], dtype=np.int64)
    if field.k == 1 and field.p < (1 << 15):
        return det_batch_prime(entries, field.p)
    return np.array(
        [determinant(MatrixFq(field, e)).value for e in entries], dtype=np.int64
    )


# -- estimates ----------------------------------------------------------------


def wilson_interval(successes: int, n: int, z: float = WILSON_Z99) -> tuple[float, float]:
    if n <= 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo point estimate with its Wilson 99% interval.

    n_samples is the denominator of the estimate; for conditional estimates
    it is the accepted count and total_drawn records the raw draw count."""

    point: float
    n_samples: int
    successes: int
    lo: float
    hi: float
    seed: int
    workers: int
    total_drawn: int | None = None

    def to_json(self) -> dict:
        out = {
            "point": self.point, "n_samples": self.n_samples,
            "successes": self.successes, "lo": self.lo, "hi": self.hi,
            "seed": self.seed, "workers": self.workers,
        }
        if self.total_drawn is not None:
            out["total_drawn"] = self.total_drawn
        return out

    @classmethod
    def from_counts(cls, successes: int, n: int, seed: int, workers: int,
                    total_drawn: int | None = None) -> "Estimate":
        lo, hi = wilson_interval(successes, n)
        point = successes / n if n else float("nan")
        return cls(point, n, successes, lo, hi, seed, workers, total_drawn)


def _worker_ranges(n_samples: int, workers: int) -> list[tuple[int, int]]:
    if workers < 1:
        raise BadConfig("workers must be >= 1")
    base = n_samples // workers
    rem = n_samples % workers
    ranges = []
    start = 0
    for w in range(workers):
        size = base + (1 if w < rem else 0)
        ranges.append((start, start + size))
        start += size
    return ranges


def _map_ranges(fn, ranges, workers):
    if workers == 1 or len(ranges) <= 1:
        return [fn(r) for r in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ranges))


def mc_probability(event: MatrixEvent, n: int, dist: EntryDistribution,
                   n_samples: int, seed: int, workers: int = 1) -> Estimate:
    """Pr[event] for an n x n matrix with i.i.d. mu entries.  Sample i uses
    split stream (seed, (i,)), so counts do not depend on `workers`."""
    if n_samples < 1:
        raise BadConfig("n_samples must be >= 1")
    master = RandomStream(seed)

    def run(rng: tuple[int, int]) -> int:
        lo, hi = rng
        hits = 0
        for b0 in range(lo, hi, _MC_BATCH):
            b1 = min(hi, b0 + _MC_BATCH)
            bases = master.child_bases(np.arange(b0, b1, dtype=np.int64))
            entries = sample_matrix_batch(n, dist, bases)
            hits += int(event.batch_evaluate(entries, dist.field).sum())
        return hits

    successes = sum(_map_ranges(run, _worker_ranges(n_samples, workers), workers))
    return Estimate.from_counts(successes, n_samples, seed, workers)


def conditional_probability(cond: MatrixEvent, target: MatrixEvent, n: int,
                            dist: EntryDistribution, n_samples: int, seed: int,
                            workers: int = 1,
                            min_accepted: int = 100) -> Estimate:
    """Pr[target | cond] by rejection sampling on cond over n_samples draws.

    Raises ConditioningTooRare when fewer than min_accepted samples pass the
    conditioning event."""
    if n_samples < 1:
        raise BadConfig("n_samples must be >= 1")
    master = RandomStream(seed)

    def run(rng: tuple[int, int]) -> tuple[int, int]:
        lo, hi = rng
        acc = hit = 0
        for b0 in range(lo, hi, _MC_BATCH):
            b1 = min(hi, b0 + _MC_BATCH)
            bases = master.child_bases(np.arange(b0, b1, dtype=np.int64))
            entries = sample_matrix_batch(n, dist, bases)
            mask = cond.batch_evaluate(entries, dist.field)
            acc += int(mask.sum())
            if mask.any():
                hit += int(target.batch_evaluate(entries[mask], dist.field).sum())
        return acc, hit

    parts = _map_ranges(run, _worker_ranges(n_samples, workers), workers)
    accepted = sum(p[0] for p in parts)
    successes = sum(p[1] for p in parts)
    if accepted < min_accepted:
        raise ConditioningTooRare(
            f"only {accepted} of {n_samples} samples satisfied the conditioning event")
    return Estimate.from_counts(successes, accepted, seed, workers,
                                total_drawn=n_samples)


def mc_value_counts(stat: str, n: int, dist: EntryDistribution, n_samples: int,
                    seed: int, workers: int = 1) -> np.ndarray:
    """Per-value tallies of a statistic over n_samples sampled matrices."""
    if n_samples < 1:
        raise BadConfig("n_samples must be >= 1")
    q = dist.field.q
    master = RandomStream(seed)

    def run(rng: tuple[int, int]) -> np.ndarray:
        lo, hi = rng
        counts = np.zeros(q, dtype=np.int64)
        for b0 in range(lo, hi, _MC_BATCH):
            b1 = min(hi, b0 + _MC_BATCH)
            bases = master.child_bases(np.arange(b0, b1, dtype=np.int64))
            entries = sample_matrix_batch(n, dist, bases)
            vals = _stat_values_batch(entries, dist.field, stat)
            counts += np.bincount(vals, minlength=q)
        return counts

    parts = _map_ranges(run, _worker_ranges(n_samples, workers), workers)
    return np.sum(parts, axis=0)


# -- brute-force anticoncentration certificates -------------------------------


def brute_force_image_distribution(m: MatrixFq, dist: EntryDistribution) -> dict:
    """Exact distribution of Mx over all p^ncols inputs x with i.i.d. mu
    entries, as a dict mapping image tuples to probabilities.

    Probabilities are Fractions when mu carries exact weights and the input
    space is small, floats otherwise."""
    field = m.field
    if field.k != 1:
        raise BadConfig("linear-map enumeration is defined over prime fields")
    if dist.field is not field:
        raise BadConfig("matrix and distribution fields differ")
    p = field.q
    ncols = m.n
    space = p**ncols
    if space > LINEAR_MAP_CAP:
        raise SizeCap(f"p^ncols = {space} exceeds cap {LINEAR_MAP_CAP}")

    exact = dist.weights_exact is not None and space <= _EXACT_MAP_CAP
    out: dict[tuple[int, ...], object] = {}
    if exact:
        arr = m.array
        for code in range(space):
            x = code
            w = Fraction(1)
            digits = np.zeros(ncols, dtype=np.int64)
            for j in range(ncols - 1, -1, -1):
                digits[j] = x % p
                x //= p
                w *= dist.weights_exact[digits[j]]
            if w == 0:
                continue
            key = tuple(int(v) for v in (arr @ digits) % p)
            out[key] = out.get(key, Fraction(0)) + w
        return out

    idx = np.arange(space, dtype=np.int64)
    digits = np.empty((space, ncols), dtype=np.int64)
    for j in range(ncols):
        digits[:, j] = (idx // p ** (ncols - 1 - j)) % p
    image = np.zeros((space, m.m), dtype=np.int64)
    for j in range(ncols):
        image = (image + m.array[None, :, j] * digits[:, j, None]) % p
    w = np.prod(np.take(np.array(dist.weights), digits), axis=1)
    for row, wi in zip(image, w):
        if wi:
            key = tuple(int(v) for v in row)
            out[key] = out.get(key, 0.0) + float(wi)
    return out


def brute_force_linear_map(m: MatrixFq, dist: EntryDistribution, z):
    """Exact Pr[Mx = z] for x with i.i.d. mu entries, by full enumeration of
    the p^ncols input vectors.  Returns a Fraction when mu carries exact
    weights and the space is small, a float otherwise.  To query many targets
    on one matrix, use brute_force_image_distribution."""
    zvec = tuple(int(v) for v in np.asarray(z, dtype=np.int64).reshape(-1))
    if len(zvec) != m.m:
        raise BadConfig(f"target vector needs length {m.m}")
    table = brute_force_image_distribution(m, dist)
    zero = Fraction(0) if (dist.weights_exact is not None
                           and m.field.q ** m.n <= _EXACT_MAP_CAP) else 0.0
    return table.get(zvec, zero)


# -- bound checker ------------------------------------------------------------

UNIFORM_CLAIMS = ("uniform-lower", "uniform-separation", "uniform-window")
GENERAL_CLAIMS = ("general-separation", "general-window")
_FINITE_CLAIMS = {"uniform-lower", "uniform-window"}


@dataclass(frozen=True)
class BoundVerdict:
    """Verdict for one distribution claim at finite n.

    SUPPORTED/VIOLATED/INCONCLUSIVE semantics depend on the claim class:
    finite-n theorem claims are VIOLATED only when the measured interval (or
    exact value) lies strictly outside the claimed region and SUPPORTED
    otherwise; asymptotic claims are SUPPORTED only when the interval lies
    strictly inside and INCONCLUSIVE otherwise, never VIOLATED."""

    claim: str
    n: int
    q: int
    weights: tuple[float, ...] | None
    verdict: str
    margin: float
    method: str                     # "exact" or "mc"
    details: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "claim": self.claim, "n": self.n, "q": self.q,
            "weights": list(self.weights) if self.weights is not None else None,
            "verdict": self.verdict, "margin": self.margin,
            "method": self.method, "details": self.details,
        }


def _claim_verdict(claim: str, q: int, n: int, lo_hi_by_z) -> tuple[str, float, dict]:
    """lo_hi_by_z: list over z of (lo, hi) bounds (equal when exact)."""
    alpha = limiting_singular_probability(q)
    inv_q = 1.0 / q
    if claim == "uniform-lower":
        lo, hi = lo_hi_by_z[0]
        margin = lo - inv_q
        verdict = "VIOLATED" if hi < inv_q else "SUPPORTED"
        return verdict, margin, {"bound": inv_q}
    if claim == "uniform-separation":
        lo, hi = lo_hi_by_z[0]
        margin = alpha - hi
        verdict = "SUPPORTED" if hi < alpha else "INCONCLUSIVE"
        return verdict, margin, {"bound": alpha}
    if claim in ("uniform-window", "general-window"):
        halfwidth = WINDOW_CONSTANT / q**3
        worst = max(max(abs(lo - inv_q), abs(hi - inv_q)) for lo, hi in lo_hi_by_z)
        best = max(min(abs(lo - inv_q), abs(hi - inv_q)) if (lo - inv_q) * (hi - inv_q) > 0
                   else 0.0
                   for lo, hi in lo_hi_by_z)
        margin = halfwidth - worst
        if claim == "uniform-window":
            verdict = "VIOLATED" if best > halfwidth else "SUPPORTED"
        else:
            verdict = "SUPPORTED" if worst <= halfwidth else "INCONCLUSIVE"
        return verdict, margin, {"halfwidth": halfwidth, "constant": WINDOW_CONSTANT}
    if claim == "general-separation":
        bound = alpha - delta_separation(q)
        worst = max(hi for _, hi in lo_hi_by_z)
        margin = bound - worst
        verdict = "SUPPORTED" if worst <= bound else "INCONCLUSIVE"
        return verdict, margin, {"bound": bound, "delta": delta_separation(q)}
    raise BadConfig(f"unknown claim {claim!r}")


def check_bounds(claims, n: int, dist: EntryDistribution, n_samples: int,
                 seed: int, workers: int = 1) -> list[BoundVerdict]:
    """Evaluate permanent-distribution claims at finite n.

    Uses exact enumeration when the uniform matrix space fits under the cap,
    Monte Carlo tallies with per-value Wilson intervals otherwise.  Claims
    about the permanent are refused in characteristic 2 (per = det there) and
    the window claim at n < 3."""
    field = dist.field
    q = field.q
    if field.p == 2:
        raise CharacteristicTwo("permanent-distribution claims need odd characteristic")
    if n < 1:
        raise BadN("claims need n >= 1")
    claims = list(claims)
    for claim in claims:
        if claim not in UNIFORM_CLAIMS and claim not in GENERAL_CLAIMS:
            raise BadConfig(f"unknown claim {claim!r}")
        if claim in UNIFORM_CLAIMS and not dist.is_uniform:
            raise BadConfig(f"claim {claim} applies to uniform entries only")
        if claim in GENERAL_CLAIMS and field.k != 1:
            raise BadConfig(f"claim {claim} applies to prime fields only")
        if claim in GENERAL_CLAIMS and dist.degenerate:
            raise BadConfig(f"claim {claim} needs support on more than one value")
        if claim == "uniform-window" and n < 3:
            raise BadN("the window claim is stated for n >= 3 only")

    exact = dist.is_uniform and q ** (n * n) <= ENUMERATION_CAP
    details_common: dict = {"n_samples": None, "seed": seed, "workers": workers}
    if exact:
        ed = enumerate_exact(n, q, "per")
        lo_hi = [(float(ed.probability(z)), float(ed.probability(z))) for z in range(q)]
        method = "exact"
        details_common["counts"] = [str(c) for c in ed.counts]
    else:
        counts = mc_value_counts("per", n, dist, n_samples, seed, workers)
        lo_hi = [wilson_interval(int(c), n_samples) for c in counts]
        method = "mc"
        details_common["n_samples"] = n_samples
        details_common["counts"] = [int(c) for c in counts]

    out = []
    weights = None if dist.is_uniform else tuple(dist.weights)
    for claim in claims:
        verdict, margin, extra = _claim_verdict(claim, q, n, lo_hi)
        details = dict(details_common)
        details.update(extra)
        out.append(BoundVerdict(claim, n, q, weights, verdict, margin, method, details))
    return out
