"""Transformations between replicable, private, and generalizing algorithms.

Directions covered: replicable to differentially private (stability-based
selection over many runs), replicable to perfectly generalizing (exponential
mechanism over per-coin-string plurality counts), differentially private to
replicable (correlated sampling of the output distribution), plus secrecy-of-
the-sample amplification and a small DP learner used as a transform source.

Noise here is discrete on purpose. The selection mechanism adds truncated
two-sided geometric noise, so its exact output distribution is a finite
enumeration and the privacy checks in the test suite are computed, not
sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .distributions import BOT, FiniteDistribution
from .learning import FiniteClass, LabeledSample, class_risks
from .sampling import consistent_sample
from .tape import RandomTape, derive_stream

__all__ = [
    "StatAlgorithm",
    "DPParams",
    "exp_mech",
    "exp_mech_distribution",
    "dp_selection",
    "dp_selection_distribution",
    "selection_threshold",
    "rep_to_dp",
    "rep_to_pg",
    "pg_score_sensitivity",
    "dp_to_rep",
    "subsample_amplify",
    "subsample_privacy",
    "dp_exp_mech_learner",
    "dp_exp_mech_distribution",
    "dp_exp_mech_algorithm",
]


@dataclass(frozen=True)
class StatAlgorithm:
    """A statistical algorithm: run(sample, tape) plus metadata.

    exact_output_distribution, when present, maps a fixed sample to the
    algorithm's full output law; transforms that need the law exactly
    (dp_to_rep) require it or an explicit Monte Carlo opt-in.
    """

    run: Callable
    sample_size: int
    output_space: tuple
    exact_output_distribution: Optional[Callable] = None


@dataclass(frozen=True)
class DPParams:
    eps: float
    delta: float

    def __post_init__(self):
        if not 0 < self.eps <= 4:
            raise ValueError("eps must be in (0, 4]")
        if not 0 < self.delta < 0.5:
            raise ValueError("delta must be in (0, 0.5)")


# ---------------------------------------------------------------------------
# exponential mechanism


def _softmax(scores, sensitivity: float, eps: float) -> np.ndarray:
    w = np.array([eps * float(s) / (2.0 * sensitivity) for s in scores], dtype=np.float64)
    w -= w.max()
    p = np.exp(w)
    return p / p.sum()


def exp_mech(candidates: list, scores: list, sensitivity: float, eps: float,
             tape: RandomTape):
    """Pick candidate i with probability proportional to exp(eps*score_i/2s).

    Weights live in log space until the final normalized draw, so huge
    score gaps cannot overflow; adding a constant to every score leaves
    the draw untouched.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if len(candidates) != len(scores):
        raise ValueError("candidates and scores must align")
    if sensitivity <= 0:
        raise ValueError("sensitivity must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _softmax(scores, sensitivity, eps)
    u = tape.u53()
    cum = np.cumsum(p)
    idx = int(np.searchsorted(cum, u, side="right"))
    return candidates[min(idx, len(candidates) - 1)]


def exp_mech_distribution(candidates: list, scores: list, sensitivity: float,
                          eps: float) -> FiniteDistribution:
    """Closed-form softmax law of exp_mech over distinct candidates."""
    p = _softmax(scores, sensitivity, eps)
    merged: dict = {}
    for c, w in zip(candidates, p):
        merged[c] = merged.get(c, 0.0) + float(w)
    return FiniteDistribution(list(merged.keys()), list(merged.values()))


# ---------------------------------------------------------------------------
# stability-based DP selection


def selection_threshold(eps: float, delta: float) -> float:
    return 2.0 * math.log(2.0 / delta) / eps


def _noise_support(eps: float, delta: float):
    # truncated two-sided geometric, ratio exp(-eps/2) per unit; the
    # truncation point keeps the clipped tail far below delta
    q = math.exp(-eps / 2.0)
    radius = math.ceil((2.0 / eps) * math.log(8.0 / delta)) + 1
    zs = np.arange(-radius, radius + 1)
    w = q ** np.abs(zs).astype(np.float64)
    return zs, w / w.sum()


def _draw_noise(eps: float, delta: float, tape: RandomTape) -> int:
    zs, w = _noise_support(eps, delta)
    cum = np.cumsum(w)
    idx = int(np.searchsorted(cum, tape.u53(), side="right"))
    return int(zs[min(idx, len(zs) - 1)])


def dp_selection(items: list, eps: float, delta: float, tape: RandomTape):
    """Noisy argmax over the observed items, or BOT below the threshold.

    Each distinct item's count gets independent truncated-geometric noise;
    the highest noisy count wins (ties to the smaller item under sorted
    order) and is released only when it clears 2*ln(2/delta)/eps.
    """
    if not items:
        raise ValueError("items must be non-empty")
    DPParams(eps, delta)
    counts: dict = {}
    for it in items:
        counts[it] = counts.get(it, 0) + 1
    keys = sorted(counts.keys())
    best, best_noisy = None, None
    for k in keys:
        noisy = counts[k] + _draw_noise(eps, delta, tape)
        if best_noisy is None or noisy > best_noisy:
            best, best_noisy = k, noisy
    if best_noisy >= selection_threshold(eps, delta):
        return best
    return BOT


def dp_selection_distribution(counts: dict, eps: float, delta: float) -> FiniteDistribution:
    """Exact output law of dp_selection for given counts, by enumerating
    the joint noise. Feasible for a handful of distinct items."""
    DPParams(eps, delta)
    keys = sorted(counts.keys())
    zs, w = _noise_support(eps, delta)
    thresh = selection_threshold(eps, delta)
    d = len(keys)
    if d > 4:
        raise ValueError("exact selection enumeration supports at most 4 distinct items")
    # joint grids of noisy counts, one axis per item
    grids = np.meshgrid(*[counts[k] + zs for k in keys], indexing="ij")
    weights = np.meshgrid(*[w] * d, indexing="ij")
    joint = np.ones_like(grids[0], dtype=np.float64)
    for wt in weights:
        joint = joint * wt
    stacked = np.stack(grids)  # (d, ...) noisy counts
    # winner = first maximal index under the sorted key order
    winner = np.argmax(stacked, axis=0)
    top = np.max(stacked, axis=0)
    out = {k: 0.0 for k in keys}
    out[BOT] = 0.0
    for i, k in enumerate(keys):
        mask = (winner == i) & (top >= thresh)
        out[k] = float(joint[mask].sum())
    out[BOT] = float(joint[np.max(stacked, axis=0) < thresh].sum())
    total = sum(out.values())
    return FiniteDistribution(list(out.keys()), [v / total for v in out.values()])


# ---------------------------------------------------------------------------
# replicable -> differentially private


def rep_to_dp(alg: StatAlgorithm, eps: float, delta: float, beta: float,
              data, tape: RandomTape, k1: int | None = None, k2: int | None = None,
              stats: dict | None = None):
    """Run alg on k1 coin strings times k2 disjoint samples per string and
    privately select from the pooled outputs.

    Replicability concentrates each string's outputs on one value, so the
    mode's count dwarfs the selection noise; privacy rides entirely on
    dp_selection since one pooled record touches exactly one run.
    """
    if k1 is None:
        k1 = max(2, math.ceil(math.log2(1.0 / beta)))
    if k2 is None:
        k2 = 8
    coins = [derive_stream(tape, 1 + j) for j in range(k1)]
    outputs = []
    for j in range(k1):
        for _ in range(k2):
            s = data.draw(alg.sample_size)
            outputs.append(alg.run(s, coins[j].clone()))
    if stats is not None:
        stats.update({"k1": k1, "k2": k2, "outputs": list(outputs),
                      "threshold": selection_threshold(eps, delta)})
    return dp_selection(outputs, eps, delta, derive_stream(tape, 0))


# ---------------------------------------------------------------------------
# replicable -> perfectly generalizing


def pg_score_sensitivity(t: int, k: int, beta: float) -> float:
    return 4.0 * math.sqrt(t * math.log(8.0 * k * t / beta))


def rep_to_pg(alg: StatAlgorithm, eps: float, delta: float, beta: float,
              data, tape: RandomTape, k: int | None = None, t: int = 64,
              stats: dict | None = None):
    """Per coin string, the plurality output of t fresh runs scores that
    string; the exponential mechanism picks a string and its plurality
    value is returned.

    Ties inside a string break to the lexicographically least outcome so
    the plurality step is order-independent.
    """
    if k is None:
        k = max(2, math.ceil(math.log2(1.0 / delta)))
    sens = pg_score_sensitivity(t, k, beta)
    candidates, scores = [], []
    for j in range(k):
        coin = derive_stream(tape, 1 + j)
        tally: dict = {}
        for _ in range(t):
            y = alg.run(data.draw(alg.sample_size), coin.clone())
            tally[y] = tally.get(y, 0) + 1
        top_count = max(tally.values())
        winner = min(y for y, c in tally.items() if c == top_count)
        candidates.append((j, winner))
        scores.append(top_count)
    if stats is not None:
        stats.update({"k": k, "t": t, "sensitivity": sens,
                      "candidates": list(candidates), "scores": list(scores)})
    j_star, value = exp_mech(candidates, scores, sens, eps, derive_stream(tape, 0))
    return value


# ---------------------------------------------------------------------------
# differentially private -> replicable


def dp_to_rep(alg: StatAlgorithm, sample, tape: RandomTape,
              mc_fallback: bool = False, mc_runs: int = 10_000,
              stats: dict | None = None):
    """Correlated-sample the algorithm's output law on this fixed sample.

    The marginal equals the law exactly when the law is exact; two runs
    sharing the tape on nearby samples collide with probability governed
    by the laws' TV distance, which is where privacy or generalization
    buys replicability.
    """
    if alg.exact_output_distribution is not None:
        dist = alg.exact_output_distribution(sample)
        approx = False
    elif mc_fallback:
        est = derive_stream(tape, 1)
        tally: dict = {}
        for i in range(mc_runs):
            y = alg.run(sample, derive_stream(est, i))
            tally[y] = tally.get(y, 0) + 1
        # canonical outcome order: sorted by encoded key, so paired runs
        # with near-equal estimates still align their rejection grids
        keys = sorted(tally.keys(), key=repr)
        dist = FiniteDistribution(keys, [Fraction(tally[k], mc_runs) for k in keys])
        approx = True
    else:
        raise ValueError("alg lacks exact_output_distribution; pass mc_fallback=True to estimate")
    if stats is not None:
        stats.update({"approximate": approx, "support": len(dist.outcomes)})
    return consistent_sample(dist, derive_stream(tape, 0))


# ---------------------------------------------------------------------------
# secrecy of the sample


def subsample_privacy(eps: float, delta: float, n: int, m: int) -> tuple:
    if m < n:
        raise ValueError("m must be at least the algorithm's sample size")
    return ((n / m) * (math.exp(eps) - 1.0), (n / m) * delta)


def _take(sample, idx):
    if isinstance(sample, LabeledSample):
        sel = np.array(idx, dtype=np.int64)
        return LabeledSample(xs=sample.xs[sel], ys=sample.ys[sel])
    return [sample[i] for i in idx]


def subsample_amplify(alg: StatAlgorithm, m: int) -> StatAlgorithm:
    """Wrapper feeding alg a uniform without-replacement n-subset of m records."""
    n = alg.sample_size
    if m < n:
        raise ValueError("m must be at least the algorithm's sample size")
    if m == n:
        return alg

    def run(sample, tape: RandomTape):
        if len(sample) != m:
            raise ValueError(f"sample must hold exactly {m} records")
        pool = list(range(m))
        for i in range(n):
            j = i + tape.randint_below(m - i)
            pool[i], pool[j] = pool[j], pool[i]
        return alg.run(_take(sample, pool[:n]), tape)

    return StatAlgorithm(run=run, sample_size=m, output_space=alg.output_space)


# ---------------------------------------------------------------------------
# a DP learner as a transform source


def _risk_counts(cls: FiniteClass, sample: LabeledSample) -> np.ndarray:
    return np.count_nonzero(cls.matrix[:, sample.xs] != sample.ys[None, :], axis=1)


def dp_exp_mech_learner(cls: FiniteClass, eps: float, sample: LabeledSample,
                        tape: RandomTape) -> tuple:
    """(eps, 0)-DP hypothesis pick: score = minus the mistake count."""
    if len(sample) == 0:
        raise ValueError("sample must be non-empty")
    mistakes = _risk_counts(cls, sample)
    cands = [cls.hypothesis(i) for i in range(len(cls))]
    return exp_mech(cands, [-int(m) for m in mistakes], 1.0, eps, tape)


def dp_exp_mech_distribution(cls: FiniteClass, eps: float,
                             sample: LabeledSample) -> FiniteDistribution:
    """Closed-form softmax law of dp_exp_mech_learner, outcomes in class order."""
    mistakes = _risk_counts(cls, sample)
    cands = [cls.hypothesis(i) for i in range(len(cls))]
    return exp_mech_distribution(cands, [-int(m) for m in mistakes], 1.0, eps)


def dp_exp_mech_algorithm(cls: FiniteClass, eps: float, sample_size: int) -> StatAlgorithm:
    """dp_exp_mech_learner packaged with its exact law, ready for dp_to_rep."""
    return StatAlgorithm(
        run=lambda s, tape: dp_exp_mech_learner(cls, eps, s, tape),
        sample_size=sample_size,
        output_space=tuple(cls.hypothesis(i) for i in range(len(cls))),
        exact_output_distribution=lambda s: dp_exp_mech_distribution(cls, eps, s),
    )
