"""Entry distributions and reproducible splittable random streams.

The generator is counter-based: output i of a stream is a pure function
mix64(base + (i+1)*GAMMA) of the stream's derived base, where mix64 is the
SplitMix64 finalizer (Steele, Lea & Flood 2014; Vigna's public-domain C
reference).  Because values are addressed by counter, any partition of the
sample index space over workers produces bit-identical results, and child
streams (split by path hashing) are reproducible from (seed, path) alone.
Frozen test vectors live in tests/data/stream_vectors.json.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import BadWeights, NonPrimeField
from .fields import FieldSpec
from .matrices import MatrixFq

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SPLIT_GAMMA = np.uint64(0xD6E8FEB86659FD93)
_ROOT_SALT = np.uint64(0x5851F42D4C957F2D)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _M1
    z ^= z >> np.uint64(27)
    z *= _M2
    z ^= z >> np.uint64(31)
    return z


def _derive_base(seed: int, path: tuple[int, ...]) -> np.uint64:
    acc = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    acc ^= _ROOT_SALT
    acc = _mix64(acc)
    for index in path:
        step = np.array([(index + 1) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        acc = _mix64(acc ^ (step * _SPLIT_GAMMA))
    return acc[0]


def _outputs(base: np.uint64, start: int, count: int) -> np.ndarray:
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return _mix64(base + idx * _GAMMA)


def _outputs_from_bases(bases: np.ndarray, count: int, start: int = 0) -> np.ndarray:
    """(B, count) outputs for several stream bases at once."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return _mix64(bases[:, None] + idx[None, :] * _GAMMA)


class RandomStream:
    """Splittable counter-based random stream.

    Two streams with the same (seed, path) produce identical output; siblings
    split at different indices are statistically independent.  Drawing
    advances the counter in place; use clone() for an independent re-read.
    """

    __slots__ = ("seed", "path", "counter", "_base")

    def __init__(self, seed: int, path: tuple[int, ...] = (), counter: int = 0):
        self.seed = int(seed)
        self.path = tuple(int(i) for i in path)
        self.counter = int(counter)
        self._base = _derive_base(self.seed, self.path)

    def split(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (int(index),))

    def clone(self) -> "RandomStream":
        return RandomStream(self.seed, self.path, self.counter)

    @property
    def state(self) -> tuple[int, tuple[int, ...], int]:
        return (self.seed, self.path, self.counter)

    def next_uint64(self, count: int) -> np.ndarray:
        out = _outputs(self._base, self.counter, count)
        self.counter += count
        return out

    def uniform_ints(self, bound: int, count: int) -> np.ndarray:
        """i.i.d. integers in [0, bound).  Uses draw % bound; the bias is
        (2^64 mod bound)/2^64 <= bound/2^64, invisible at any desk scale."""
        return (self.next_uint64(count) % np.uint64(bound)).astype(np.int64)

    def child_bases(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized bases of split(i) for an array of child indices."""
        idx = (np.asarray(indices, dtype=np.uint64) + np.uint64(1)) * _SPLIT_GAMMA
        return _mix64(self._base ^ idx)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, path={self.path}, counter={self.counter})"


def _as_exact(weights) -> tuple[Fraction, ...] | None:
    vals = []
    for w in weights:
        if isinstance(w, (int, Fraction)) and not isinstance(w, bool):
            vals.append(Fraction(w))
        else:
            return None
    return tuple(vals)


class EntryDistribution:
    """Probability vector mu over the elements of a field.

    rho is the maximum point mass.  When all weights are given as ints or
    Fractions the exact vector is kept alongside the float one, so exhaustive
    estimators can report exact rational probabilities.
    """

    def __init__(self, field: FieldSpec, weights, *, _uniform: bool = False):
        self.field = field
        self.weights_exact = _as_exact(weights)
        self.weights = tuple(float(w) for w in weights)
        if len(self.weights) != field.q:
            raise BadWeights(f"need {field.q} weights for F_{field.q}, got {len(self.weights)}")
        if any(w < 0 for w in self.weights):
            raise BadWeights("negative weight")
        if self.weights_exact is not None:
            if sum(self.weights_exact) != 1:
                raise BadWeights("exact weights do not sum to 1")
        elif abs(sum(self.weights) - 1.0) > 1e-12:
            raise BadWeights(f"weights sum to {sum(self.weights)!r}, not 1")
        self.rho = max(self.weights)
        self.rho_exact = max(self.weights_exact) if self.weights_exact else None
        self.support_size = sum(1 for w in self.weights if w > 0)
        self.degenerate = self.support_size <= 1
        self.is_uniform = _uniform or all(
            abs(w - 1.0 / field.q) <= 1e-15 for w in self.weights
        )
        self._alias = None

    # one uint64 per entry for uniform sampling, two for the alias method
    @property
    def draws_per_entry(self) -> int:
        return 1 if self.is_uniform else 2

    def _alias_tables(self):
        """Vose alias tables, built once, deterministic in the weights."""
        if self._alias is None:
            k = self.field.q
            prob = np.zeros(k, dtype=np.float64)
            alias = np.zeros(k, dtype=np.int64)
            scaled = [w * k for w in self.weights]
            small = [i for i in range(k) if scaled[i] < 1.0]
            large = [i for i in range(k) if scaled[i] >= 1.0]
            while small and large:
                s = small.pop()
                l = large.pop()
                prob[s] = scaled[s]
                alias[s] = l
                scaled[l] = (scaled[l] + scaled[s]) - 1.0
                (small if scaled[l] < 1.0 else large).append(l)
            for i in large:
                prob[i] = 1.0
                alias[i] = i
            for i in small:  # numerical leftovers
                prob[i] = 1.0
                alias[i] = i
            self._alias = (prob, alias)
        return self._alias

    def map_draws(self, raw: np.ndarray) -> np.ndarray:
        """Map raw uint64 draws (flat, len = draws_per_entry * n) to entries."""
        q = self.field.q
        if self.is_uniform:
            return (raw % np.uint64(q)).astype(np.int64)
        prob, alias = self._alias_tables()
        idx = (raw[0::2] % np.uint64(q)).astype(np.int64)
        u = (raw[1::2] >> np.uint64(11)).astype(np.float64) * (2.0**-53)
        take_alias = u >= prob[idx]
        out = idx.copy()
        out[take_alias] = alias[idx[take_alias]]
        return out

    def sample_entries(self, count: int, stream: RandomStream) -> np.ndarray:
        raw = stream.next_uint64(count * self.draws_per_entry)
        return self.map_draws(raw)

    def descriptor(self) -> dict:
        return {"q": self.field.q, "weights": list(self.weights),
                "uniform": self.is_uniform}

    def __repr__(self):
        if self.is_uniform:
            return f"EntryDistribution(uniform over F_{self.field.q})"
        return f"EntryDistribution(F_{self.field.q}, weights={self.weights})"


def uniform_distribution(field: FieldSpec) -> EntryDistribution:
    """The uniform distribution on F_q; rho = 1/q.  Allowed for any field."""
    w = [Fraction(1, field.q)] * field.q
    return EntryDistribution(field, w, _uniform=True)


def make_distribution(field: FieldSpec, weights) -> EntryDistribution:
    """A general mu over a prime field.  Degenerate (single-support) vectors
    are constructed but flagged; extension fields are refused."""
    if field.k != 1:
        raise NonPrimeField(
            "non-uniform entry distributions are only supported over prime fields"
        )
    return EntryDistribution(field, weights)


def sample_matrix(n: int, dist: EntryDistribution, stream: RandomStream) -> MatrixFq:
    """An n x n matrix with i.i.d. mu-distributed entries, consuming
    n^2 * draws_per_entry values from the stream."""
    if n < 0:
        raise ValueError("n must be non-negative")
    entries = dist.sample_entries(n * n, stream).reshape(n, n)
    return MatrixFq(dist.field, entries)


def sample_matrix_batch(n: int, dist: EntryDistribution, bases: np.ndarray) -> np.ndarray:
    """(B, n, n) entries for one matrix per stream base, each matrix drawn
    exactly as sample_matrix would draw it from the corresponding stream."""
    b = len(bases)
    raw = _outputs_from_bases(bases, n * n * dist.draws_per_entry)
    flat = dist.map_draws(raw.reshape(-1))
    return flat.reshape(b, n, n)
