"""The nested-set growth process and exact convolution analysis of weighted
sums mod p.

The growth process reveals rows of a fresh random matrix one at a time and
shrinks a column set I_0 = {1..n} down to a set of size `final_size`,
keeping the permanent of the revealed square minor nonzero at every step and
steering the survivors into a designated target set.  Traces are replayable:
the rows consumed are regenerated from the recorded stream coordinates
rather than stored.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadConfig, DegenerateDistribution, ReplayMismatch
from .matrices import MatrixFq, ryser_batch_prime, _ryser_extension
from .randomness import (
    EntryDistribution,
    RandomStream,
    make_distribution,
    uniform_distribution,
)
from .fields import make_field

DELTA_GRID = [round(0.05 * k, 2) for k in range(1, 20)]


class GrowthOutcome(enum.Enum):
    SUCCESS_IN_TARGET = "SUCCESS_IN_J"
    SUCCESS_NOT_IN_TARGET = "SUCCESS_NOT_IN_J"
    TERMINATED = "TERMINATED"


@dataclass(frozen=True)
class GrowthStep:
    step: int      # t, counting from 1
    phase: int     # 1 or 2
    removed: int   # 1-based column index removed from the survivor set
    bad: bool      # phase-2 step that removed a target column while
                   # non-target survivors remained


@dataclass(frozen=True)
class GrowthTrace:
    n: int
    final_size: int          # size of the survivor set the process aims for
    delta: float
    padded_size: int         # 2*final_size + floor(delta*final_size)
    target_cols: tuple[int, ...]
    dist: dict               # entry-distribution descriptor
    seed: int
    path: tuple[int, ...]
    steps: tuple[GrowthStep, ...]
    outcome: GrowthOutcome
    terminated_at: int | None
    final_set: tuple[int, ...] | None

    @property
    def bad_count(self) -> int:
        return sum(1 for s in self.steps if s.bad)

    def to_json(self) -> dict:
        return {
            "config": {
                "n": self.n,
                "final_size": self.final_size,
                "delta": self.delta,
                "padded_size": self.padded_size,
                "target_cols": list(self.target_cols),
                "dist": self.dist,
                "seed": self.seed,
                "path": list(self.path),
            },
            "steps": [
                {"step": s.step, "phase": s.phase, "removed": s.removed, "bad": s.bad}
                for s in self.steps
            ],
            "outcome": self.outcome.value,
            "terminated_at": self.terminated_at,
            "final_set": list(self.final_set) if self.final_set is not None else None,
        }

    @classmethod
    def from_json(cls, obj) -> "GrowthTrace":
        if isinstance(obj, str):
            obj = json.loads(obj)
        cfg = obj["config"]
        return cls(
            n=cfg["n"],
            final_size=cfg["final_size"],
            delta=cfg["delta"],
            padded_size=cfg["padded_size"],
            target_cols=tuple(cfg["target_cols"]),
            dist=dict(cfg["dist"]),
            seed=cfg["seed"],
            path=tuple(cfg["path"]),
            steps=tuple(GrowthStep(s["step"], s["phase"], s["removed"], s["bad"])
                        for s in obj["steps"]),
            outcome=GrowthOutcome(obj["outcome"]),
            terminated_at=obj["terminated_at"],
            final_set=tuple(obj["final_set"]) if obj["final_set"] is not None else None,
        )


def _dist_from_descriptor(desc: dict) -> EntryDistribution:
    field = make_field(desc["q"])
    if desc.get("uniform"):
        return uniform_distribution(field)
    return make_distribution(field, desc["weights"])


def _minor_is_nonzero(rows: np.ndarray, col_positions: list[int], field) -> bool:
    """Permanent-nonzero test for rows[:t] restricted to the given columns."""
    sub = rows[:, col_positions]
    if field.k == 1:
        return int(ryser_batch_prime(sub[None, :, :], field.p)[0]) != 0
    return _ryser_extension(sub, field) != 0


def run_growth_process(dist: EntryDistribution, n: int, target_cols,
                       final_size: int, delta: float,
                       stream: RandomStream) -> GrowthTrace:
    """Run one growth process on a fresh random matrix drawn from `stream`.

    target_cols must have exactly 2*final_size distinct 1-based columns and
    n must be at least padded_size = 2*final_size + floor(delta*final_size).
    Phase 1 (steps 1..n-padded_size) removes only non-target columns; phase 2
    still prefers non-target columns but may remove a target column, which is
    flagged bad whenever non-target survivors remained."""
    t_final = int(final_size)
    if t_final < 1:
        raise BadConfig(f"final_size={final_size} must be >= 1")
    if not 0.0 < delta < 1.0:
        raise BadConfig(f"delta={delta} must be in (0, 1)")
    padded = 2 * t_final + math.floor(delta * t_final)
    target = tuple(sorted(int(c) for c in target_cols))
    if len(target) != 2 * t_final or len(set(target)) != len(target):
        raise BadConfig(f"target set needs 2*final_size = {2*t_final} distinct columns")
    if any(not 1 <= c <= n for c in target):
        raise BadConfig(f"target columns outside 1..{n}")
    if n < padded:
        raise BadConfig(f"n={n} is below padded size {padded} = 2T + floor(delta*T)")

    field = dist.field
    target_set = set(target)
    survivors = list(range(1, n + 1))        # I_t, ascending
    selected: list[int] = []                  # 0-based complement, ascending
    revealed = np.zeros((n - t_final, n), dtype=np.int64)
    steps: list[GrowthStep] = []
    outcome = None
    terminated_at = None
    phase1_end = n - padded

    for t in range(1, n - t_final + 1):
        revealed[t - 1] = dist.sample_entries(n, stream)
        rows = revealed[:t]
        phase = 1 if t <= phase1_end else 2
        outside = [i for i in survivors if i not in target_set]
        removed = None
        for i in outside:
            if _minor_is_nonzero(rows, sorted(selected + [i - 1]), field):
                removed = i
                break
        bad = False
        if removed is None and phase == 2:
            for i in survivors:
                if i not in target_set:
                    continue
                if _minor_is_nonzero(rows, sorted(selected + [i - 1]), field):
                    removed = i
                    bad = len(outside) > 0
                    break
        if removed is None:
            outcome = GrowthOutcome.TERMINATED
            terminated_at = t
            break
        survivors.remove(removed)
        selected.append(removed - 1)
        steps.append(GrowthStep(step=t, phase=phase, removed=removed, bad=bad))

    final_set = None
    if outcome is None:
        final_set = tuple(survivors)
        outcome = (GrowthOutcome.SUCCESS_IN_TARGET
                   if set(final_set) <= target_set
                   else GrowthOutcome.SUCCESS_NOT_IN_TARGET)

    return GrowthTrace(
        n=n, final_size=t_final, delta=float(delta), padded_size=padded,
        target_cols=target, dist=dist.descriptor(),
        seed=stream.seed, path=stream.path,
        steps=tuple(steps), outcome=outcome,
        terminated_at=terminated_at, final_set=final_set,
    )


def replay_growth_trace(trace: GrowthTrace) -> GrowthTrace:
    """Re-derive a trace from its recorded stream coordinates and assert
    every step, the outcome, and the final set; raises ReplayMismatch."""
    dist = _dist_from_descriptor(trace.dist)
    stream = RandomStream(trace.seed, trace.path)
    fresh = run_growth_process(dist, trace.n, trace.target_cols,
                               trace.final_size, trace.delta, stream)
    if fresh.steps != trace.steps:
        raise ReplayMismatch("recorded steps disagree with re-derivation")
    if (fresh.outcome, fresh.terminated_at, fresh.final_set) != (
            trace.outcome, trace.terminated_at, trace.final_set):
        raise ReplayMismatch("recorded outcome disagrees with re-derivation")
    return fresh


def pick_growth_params(dist: EntryDistribution, epsilon: float) -> tuple[int, float]:
    """Choose (final_size, delta) for a failure budget epsilon.

    delta is the smallest grid value {0.05, 0.10, ...} with
    1 - rho(1+delta) > delta; final_size is the smallest integer exceeding
    2(1+delta)/(epsilon*delta^2) and large enough that
    rho^(delta*T)/(1-rho) < epsilon/4.  Both inequalities are re-verified
    numerically before returning."""
    if not 0.0 < epsilon < 1.0:
        raise BadConfig(f"epsilon={epsilon} must be in (0, 1)")
    rho = dist.rho
    if dist.degenerate or rho >= 1.0:
        raise DegenerateDistribution("entry distribution is a point mass")
    delta = next((d for d in DELTA_GRID if 1.0 - rho * (1.0 + d) > d), None)
    if delta is None:
        raise DegenerateDistribution(
            f"no grid delta satisfies 1 - rho(1+delta) > delta for rho={rho}")
    t1 = math.floor(2.0 * (1.0 + delta) / (epsilon * delta * delta)) + 1
    t2 = 1
    while rho ** (delta * t2) / (1.0 - rho) >= epsilon / 4.0:
        t2 += 1
    t = max(t1, t2)
    if not (t > 2.0 * (1.0 + delta) / (epsilon * delta * delta)
            and rho ** (delta * t) / (1.0 - rho) < epsilon / 4.0):
        raise AssertionError("selected growth parameters fail re-verification")
    return t, delta


# -- exact convolution analysis ----------------------------------------------
#
# When the entry distribution carries exact rational weights the convolution
# runs in Fraction arithmetic, so epsilon values stay exact at any depth
# (float64 cannot resolve deviations below ~1e-17 of 1/p).


def _mu_terms(dist: EntryDistribution):
    if dist.weights_exact is not None:
        return [(v, w) for v, w in enumerate(dist.weights_exact) if w != 0]
    return [(v, w) for v, w in enumerate(dist.weights) if w != 0.0]


def _convolve_step(probs: list, mu_terms, c: int, p: int) -> list:
    zero = probs[0] * 0
    nxt = [zero] * p
    for v, w in mu_terms:
        shift = (c * v) % p
        for z in range(p):
            nxt[(z + shift) % p] += w * probs[z]
    return nxt


@dataclass(frozen=True)
class SumDistribution:
    """Distribution of a weighted sum of mu-entries over F_p, with
    epsilon = max_z |P(z) - 1/p|.  Entries are Fractions when the input
    weights were exact rationals, floats otherwise."""

    q: int
    probs: tuple
    epsilon: object

    @classmethod
    def from_probs(cls, q: int, probs: list) -> "SumDistribution":
        if probs and isinstance(probs[0], Fraction):
            target = Fraction(1, q)
        else:
            target = 1.0 / q
        eps = max(abs(x - target) for x in probs)
        return cls(q=q, probs=tuple(probs), epsilon=eps)

    @property
    def probs_float(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.probs)


def _initial_probs(dist: EntryDistribution) -> list:
    p = dist.field.q
    if dist.weights_exact is not None:
        probs = [Fraction(0)] * p
        probs[0] = Fraction(1)
    else:
        probs = [0.0] * p
        probs[0] = 1.0
    return probs


def exact_sum_distribution(dist: EntryDistribution, coeffs) -> SumDistribution:
    """Distribution of sum_i coeffs[i] * x_i with x_i i.i.d. mu, by dynamic-
    programming convolution over F_p; zero coefficients are skipped."""
    if dist.field.k != 1:
        raise BadConfig("convolution analysis is defined over prime fields")
    p = dist.field.q
    mu_terms = _mu_terms(dist)
    probs = _initial_probs(dist)
    for c in coeffs:
        c = int(c) % p
        if c == 0:
            continue
        probs = _convolve_step(probs, mu_terms, c, p)
    return SumDistribution.from_probs(p, probs)


def epsilon_curve(dist: EntryDistribution, kmax: int, coeff: int = 1) -> list:
    """epsilon of the k-fold same-coefficient convolution for k = 1..kmax."""
    if dist.field.k != 1:
        raise BadConfig("convolution analysis is defined over prime fields")
    p = dist.field.q
    c = int(coeff) % p
    if c == 0:
        raise BadConfig("coefficient must be nonzero")
    mu_terms = _mu_terms(dist)
    probs = _initial_probs(dist)
    if probs and isinstance(probs[0], Fraction):
        target = Fraction(1, p)
    else:
        target = 1.0 / p
    out = []
    for _ in range(kmax):
        probs = _convolve_step(probs, mu_terms, c, p)
        out.append(max(abs(x - target) for x in probs))
    return out


def packing_size(q_nonzero: int, p: int) -> int:
    """Worst-case same-coefficient packing among q_nonzero nonzero entries:
    floor(q_nonzero / (p-1)) by pigeonhole over the p-1 coefficient classes."""
    return q_nonzero // (p - 1)


def uniformity_criterion(dist: EntryDistribution, q_nonzero: int, epsilon) -> bool:
    """True when the floor(Q/(p-1))-fold convolution is epsilon-almost-uniform
    for every nonzero coefficient class."""
    p = dist.field.q
    k = packing_size(q_nonzero, p)
    if k < 1:
        return False
    worst = max(
        exact_sum_distribution(dist, [c] * k).epsilon for c in range(1, p)
    )
    return worst <= epsilon


def uniformity_threshold(dist: EntryDistribution, epsilon) -> int:
    """The smallest count of nonzero coefficients whose guaranteed packing
    makes every weighted sum epsilon-almost-uniform (exact convolutions,
    maximized over coefficient classes)."""
    if not epsilon > 0.0:
        raise BadConfig(f"epsilon={epsilon} must be positive")
    if dist.degenerate or dist.rho >= 1.0:
        raise DegenerateDistribution("entry distribution is a point mass")
    p = dist.field.q
    mu_terms = _mu_terms(dist)
    kmax = 100_000
    running = {c: _initial_probs(dist) for c in range(1, p)}
    if isinstance(running[1][0], Fraction):
        target = Fraction(1, p)
    else:
        target = 1.0 / p
    for k in range(1, kmax + 1):
        worst = None
        for c in range(1, p):
            running[c] = _convolve_step(running[c], mu_terms, c, p)
            dev = max(abs(x - target) for x in running[c])
            worst = dev if worst is None else max(worst, dev)
        if worst <= epsilon:
            return (p - 1) * k
    raise BadConfig(f"no threshold found below k={kmax}")
