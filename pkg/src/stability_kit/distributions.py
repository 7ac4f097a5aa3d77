"""Finite distributions, statistical distances, and Monte Carlo estimators.

Probabilities are kept exactly as given. Distance and indistinguishability
computations run in exact rational arithmetic whenever every probability is
rational and the support is small (below 2^16 outcomes); otherwise they fall
back to floats with a 2^-40 absolute tolerance, chosen so pass/fail checks
built on them do not flap at representation boundaries.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

from .tape import RandomTape, derive_stream

__all__ = [
    "BOT",
    "FiniteDistribution",
    "EmpiricalDistribution",
    "MCEstimate",
    "tv_distance",
    "indistinguishable",
    "estimate_replicability",
    "empirical",
    "normalize",
    "wald_halfwidth",
]

_TOL = 2.0**-40
_EXACT_SUPPORT_CAP = 1 << 16


class _Bot:
    """Distinguished 'no output' symbol; a value, not an error."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"

    def __reduce__(self):
        return (_Bot, ())


BOT = _Bot()


def _outcome_to_hex(outcome) -> str:
    if outcome is BOT:
        return (b"\x00BOT\x00").hex()
    if isinstance(outcome, bytes):
        return outcome.hex()
    if isinstance(outcome, str):
        return outcome.encode("utf-8").hex()
    if isinstance(outcome, bool):
        return (b"\x00B" + bytes([outcome])).hex()
    if isinstance(outcome, int):
        return (b"\x00I" + outcome.to_bytes(8, "big", signed=True)).hex()
    raise TypeError(f"outcome {outcome!r} has no canonical byte encoding")


def _outcome_from_hex(text: str):
    raw = bytes.fromhex(text)
    if raw == b"\x00BOT\x00":
        return BOT
    if len(raw) == 3 and raw[:2] == b"\x00B":
        return bool(raw[2])
    if len(raw) == 10 and raw[:2] == b"\x00I":
        return int.from_bytes(raw[2:], "big", signed=True)
    return raw


@dataclass(frozen=True)
class FiniteDistribution:
    """Outcomes paired with non-negative probabilities summing to one."""

    outcomes: tuple
    probs: tuple

    def __init__(self, outcomes: Sequence, probs: Sequence):
        outcomes = tuple(outcomes)
        probs = tuple(probs)
        if len(outcomes) != len(probs):
            raise ValueError("outcomes and probs must align")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("duplicate outcome")
        for p in probs:
            if p < 0:
                raise ValueError("negative probability")
        if any(isinstance(p, Fraction) for p in probs):
            total = float(sum(Fraction(p) for p in probs))
        else:
            total = math.fsum(probs)
        if abs(total - 1.0) > _TOL:
            raise ValueError("probabilities must sum to 1 within 2^-40")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_pairs(cls, pairs: dict) -> "FiniteDistribution":
        items = list(pairs.items())
        return cls([o for o, _ in items], [p for _, p in items])

    @classmethod
    def uniform(cls, outcomes: Sequence) -> "FiniteDistribution":
        outcomes = list(outcomes)
        w = Fraction(1, len(outcomes))
        return cls(outcomes, [w] * len(outcomes))

    @classmethod
    def point_mass(cls, outcome) -> "FiniteDistribution":
        return cls([outcome], [Fraction(1)])

    def prob(self, outcome):
        try:
            return self.probs[self.outcomes.index(outcome)]
        except ValueError:
            return Fraction(0)

    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs))

    def is_rational(self) -> bool:
        return all(isinstance(p, (int, Fraction)) for p in self.probs)

    def sample(self, tape: RandomTape):
        """One outcome drawn by inverse CDF on a 53-bit uniform."""
        cum = getattr(self, "_cum", None)
        if cum is None:
            acc, cum = 0.0, []
            for p in self.probs:
                acc += float(p)
                cum.append(acc)
            cum[-1] = max(cum[-1], 1.0)
            object.__setattr__(self, "_cum", cum)
        return self.outcomes[min(bisect_right(cum, tape.u53()), len(cum) - 1)]

    def sample_many(self, tape: RandomTape, n: int) -> list:
        return [self.sample(tape) for _ in range(n)]

    def to_json(self) -> str:
        return json.dumps([[_outcome_to_hex(o), float(p)] for o, p in zip(self.outcomes, self.probs)])

    @classmethod
    def from_json(cls, text: str) -> "FiniteDistribution":
        pairs = json.loads(text)
        return cls([_outcome_from_hex(h) for h, _ in pairs], [p for _, p in pairs])


@dataclass
class EmpiricalDistribution:
    counts: dict = field(default_factory=dict)
    total: int = 0

    def add(self, outcome, weight: int = 1):
        self.counts[outcome] = self.counts.get(outcome, 0) + weight
        self.total += weight

    def freq(self, outcome) -> float:
        return self.counts.get(outcome, 0) / self.total if self.total else 0.0


def empirical(samples: Sequence) -> EmpiricalDistribution:
    e = EmpiricalDistribution()
    for s in samples:
        e.add(s)
    return e


def normalize(e: EmpiricalDistribution) -> FiniteDistribution:
    if e.total == 0:
        raise ValueError("empty empirical distribution")
    items = list(e.counts.items())
    return FiniteDistribution([o for o, _ in items], [Fraction(c, e.total) for _, c in items])


def _aligned(p: FiniteDistribution, q: FiniteDistribution):
    support = list(p.outcomes)
    seen = set(support)
    support += [o for o in q.outcomes if o not in seen]
    pd, qd = p.as_dict(), q.as_dict()
    zero = Fraction(0)
    return [(pd.get(o, zero), qd.get(o, zero)) for o in support]


def tv_distance(p: FiniteDistribution, q: FiniteDistribution):
    """Half the L1 gap over the unioned support; exact when both are rational."""
    pairs = _aligned(p, q)
    exact = (
        len(pairs) <= _EXACT_SUPPORT_CAP and p.is_rational() and q.is_rational()
    )
    if exact:
        return sum(abs(a - b) for a, b in pairs) / 2
    return sum(abs(float(a) - float(b)) for a, b in pairs) / 2.0


def indistinguishable(p: FiniteDistribution, q: FiniteDistribution, eps: float, delta) -> bool:
    """Two-sided (eps, delta) closeness via the exact worst-event reduction.

    For finite spaces the worst event for each direction is the per-point
    likelihood-ratio set {y : p(y) > e^eps * q(y)} (and symmetrically), so
    checking the definition's two inequalities on those two sets decides
    every event at once.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if not 0 <= float(delta) <= 1:
        raise ValueError("delta must be in [0, 1]")
    pairs = _aligned(p, q)
    if eps == 0 and p.is_rational() and q.is_rational() and len(pairs) <= _EXACT_SUPPORT_CAP:
        d = Fraction(delta) if not isinstance(delta, Fraction) else delta
        gain_p = sum(a - b for a, b in pairs if a > b)
        gain_q = sum(b - a for a, b in pairs if b > a)
        return gain_p <= d and gain_q <= d
    ratio = math.exp(float(eps))
    d = float(delta)
    mass_p_at_worst_p = mass_q_at_worst_p = 0.0
    mass_p_at_worst_q = mass_q_at_worst_q = 0.0
    for a, b in pairs:
        fa, fb = float(a), float(b)
        if fa > ratio * fb + _TOL:
            mass_p_at_worst_p += fa
            mass_q_at_worst_p += fb
        if fb > ratio * fa + _TOL:
            mass_p_at_worst_q += fa
            mass_q_at_worst_q += fb
    ok_p = mass_p_at_worst_p <= ratio * mass_q_at_worst_p + d + _TOL
    ok_q = mass_q_at_worst_q <= ratio * mass_p_at_worst_q + d + _TOL
    return ok_p and ok_q


class MCEstimate(NamedTuple):
    value: float
    half_width: float
    trials: int

    def interval(self):
        return (self.value - self.half_width, self.value + self.half_width)


def wald_halfwidth(successes: int, trials: int) -> float:
    """95% normal-approximation half-width for a binomial proportion."""
    rate = successes / trials
    return 1.96 * math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)


def estimate_replicability(
    alg: Callable,
    data_dist: FiniteDistribution,
    n: int,
    trials: int,
    tape: RandomTape,
) -> MCEstimate:
    """Fraction of trials where one coin stream gives equal outputs on two samples.

    Each trial derives a fresh coin stream and two independent n-element
    samples; the algorithm is run on (sample, coins) twice with clones of
    the same coin tape.
    """
    if trials < 100:
        raise ValueError("trials must be at least 100")
    agree = 0
    for i in range(trials):
        t = derive_stream(tape, i)
        coins = derive_stream(t, 0)
        s1 = data_dist.sample_many(derive_stream(t, 1), n)
        s2 = data_dist.sample_many(derive_stream(t, 2), n)
        if alg(s1, coins.clone()) == alg(s2, coins.clone()):
            agree += 1
    return MCEstimate(agree / trials, wald_halfwidth(agree, trials), trials)
