"""Monte Carlo harness utilities shared by the verification suites.

The main piece is a vectorized replay of ``consistent_sample`` for
paired-tape experiments. The scalar sampler consumes one 16-byte record
per rejection round (a 64-bit index field, then a 64-bit unit field), so
the replay pulls whole 64-byte blocks for every still-running trial,
decides accepts for both distributions of a pair with numpy, and falls
back to the scalar loop for any trial that outlives the block budget.
Byte positions are pure functions of the round index, which is what
makes the replay bit-identical to running the scalar sampler twice.

Trial fan-out across threads is bounded by the STABILITY_KIT_THREADS
environment variable. Results are reduced in trial order either way, so
the thread count never changes a report.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
from scipy.stats import chisquare

from .distributions import FiniteDistribution
from .sampling import consistent_sample
from .tape import RandomTape, derive_stream

__all__ = [
    "threads_from_env",
    "map_trials",
    "replay_consistent_pairs",
    "chi2_pvalue",
    "tv_empirical",
    "worst_excess_delta",
]

_WAVE_BLOCKS = 8  # 64-byte blocks fetched per still-active trial per wave
_MAX_WAVES = 4096


def threads_from_env() -> int:
    raw = os.environ.get("STABILITY_KIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"STABILITY_KIT_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"STABILITY_KIT_THREADS must be >= 1, got {n}")
    return n


def map_trials(fn, n: int, threads: int | None = None) -> list:
    """[fn(0), ..., fn(n-1)], optionally across a thread pool, order kept."""
    if threads is None:
        threads = threads_from_env()
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def replay_consistent_pairs(p: FiniteDistribution, q: FiniteDistribution,
                            pair_tape: RandomTape, trials: int):
    """Outcome indices of consistent_sample(p, t) and consistent_sample(q, t)
    for t = derive_stream(pair_tape, i), i < trials, tapes shared per trial.

    Requires p and q aligned on one outcome tuple; returns two int arrays
    of indices into that tuple. Bit-identical to the scalar sampler.
    """
    if p.outcomes != q.outcomes:
        raise ValueError("paired replay needs aligned outcome tuples")
    n = len(p.outcomes)
    pa = np.array([float(x) for x in p.probs])
    qa = np.array([float(x) for x in q.probs])
    tapes = [derive_stream(pair_tape, i) for i in range(trials)]
    res_p = np.full(trials, -1, dtype=np.int64)
    res_q = np.full(trials, -1, dtype=np.int64)
    active = np.arange(trials)
    rounds_per_wave = _WAVE_BLOCKS * 4
    wave = 0
    while active.size and wave < _MAX_WAVES:
        lo = wave * _WAVE_BLOCKS
        buf = b"".join(
            tapes[i].block(w) for i in active for w in range(lo, lo + _WAVE_BLOCKS)
        )
        fields = np.frombuffer(buf, dtype=">u8").reshape(active.size, rounds_per_wave, 2)
        y = (((fields[:, :, 0] >> np.uint64(11)) * np.uint64(n)) >> np.uint64(53)).astype(np.int64)
        h = (fields[:, :, 1] >> np.uint64(11)) * 2.0**-53
        for res, probs in ((res_p, pa), (res_q, qa)):
            acc = h < probs[y]
            hit = acc.any(axis=1)
            first = acc.argmax(axis=1)
            fresh = hit & (res[active] < 0)
            rows = np.nonzero(fresh)[0]
            res[active[rows]] = y[rows, first[rows]]
        active = active[(res_p[active] < 0) | (res_q[active] < 0)]
        wave += 1
    # stragglers: hand the tape back to the scalar loop at the exact byte
    index_of = {o: i for i, o in enumerate(p.outcomes)}
    offset = wave * rounds_per_wave * 16
    for i in active:
        if res_p[i] < 0:
            res_p[i] = index_of[consistent_sample(p, tapes[i].clone().seek_bytes(offset))]
        if res_q[i] < 0:
            res_q[i] = index_of[consistent_sample(q, tapes[i].clone().seek_bytes(offset))]
    return res_p, res_q


def chi2_pvalue(counts, probs) -> float:
    """Goodness-of-fit p-value with small-expectation cells pooled.

    Cells whose expected count falls below 8 are merged into one tail
    cell before the test, keeping the chi-square approximation honest at
    suite sample sizes.
    """
    counts = np.asarray(counts, dtype=np.float64)
    expected = np.asarray([float(x) for x in probs]) * counts.sum()
    big = expected >= 8.0
    obs = list(counts[big])
    exp = list(expected[big])
    small_exp = float(expected[~big].sum())
    if small_exp > 0.0:
        obs.append(float(counts[~big].sum()))
        exp.append(small_exp)
    if len(obs) < 2:
        return 1.0
    # chisquare insists the sums match exactly; rescale away float fuzz
    exp = np.asarray(exp) * (np.sum(obs) / np.sum(exp))
    return float(chisquare(obs, exp).pvalue)


def tv_empirical(counts, dist: FiniteDistribution) -> float:
    """TV distance between a count vector over dist.outcomes and dist."""
    counts = np.asarray(counts, dtype=np.float64)
    emp = counts / counts.sum()
    target = np.asarray([float(x) for x in dist.probs])
    return float(np.abs(emp - target).sum() / 2.0)


def worst_excess_delta(p: FiniteDistribution, q: FiniteDistribution, eps: float) -> float:
    """Smallest delta making the pair (eps, delta)-indistinguishable.

    Exact worst-event reduction: for each direction the binding event is
    the set of outcomes whose likelihood ratio exceeds e^eps.
    """
    ratio = math.exp(float(eps))
    pd, qd = p.as_dict(), q.as_dict()
    support = set(pd) | set(qd)
    zero = Fraction(0)
    worst = 0.0
    for a_map, b_map in ((pd, qd), (qd, pd)):
        gain = 0.0
        for o in support:
            a = float(a_map.get(o, zero))
            b = float(b_map.get(o, zero))
            if a > ratio * b:
                gain += a - ratio * b
        worst = max(worst, gain)
    return worst
