"""Replicable learning over finite hypothesis classes.

The learner family here shares one stability recipe: estimate something,
snap it to a randomly shifted grid so two estimates land on the same cell,
then break the remaining ties with a shared random ordering. Risk
comparisons are exact rationals throughout, so a threshold test never
flips on float noise.

Sample randomness and coin randomness are deliberately separate streams.
A ``DataSource`` carries its own tape; the tape passed to a learner holds
only the coins (grid shift, threshold, ordering). A paired-replicability
harness reuses the coin tape across two runs while giving each its own
data stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .distributions import BOT
from .tape import RandomTape, derive_stream

__all__ = [
    "FiniteClass",
    "LabeledSample",
    "LearnerParams",
    "SubsetSampler",
    "DataSource",
    "empirical_risk",
    "class_risks",
    "estimate_opt",
    "r_finite_learn",
    "learn_from_sample",
    "amplify_replicability",
    "list_heavy_hitter",
    "list_distribution_generator",
    "agnostic_learn",
]


def _as_fraction(x) -> Fraction:
    # str() round-trip so 0.2 means 1/5, not the float's binary expansion
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def random_order(n: int, tape: RandomTape) -> list:
    """Uniform permutation of range(n): Fisher-Yates off the tape."""
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = tape.randint_below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


class FiniteClass:
    """Hypotheses as 0/1 vectors over a domain of indices 0..D-1.

    Duplicate vectors collapse at construction (first occurrence kept);
    counts elsewhere refer to distinct functions.
    """

    def __init__(self, domain_size: int, hypotheses):
        if domain_size < 1:
            raise ValueError("domain_size must be positive")
        seen = set()
        rows = []
        for h in hypotheses:
            vec = tuple(int(b) for b in h)
            if len(vec) != domain_size:
                raise ValueError("hypothesis length must equal domain_size")
            if any(b not in (0, 1) for b in vec):
                raise ValueError("hypothesis entries must be 0 or 1")
            if vec not in seen:
                seen.add(vec)
                rows.append(vec)
        if not rows:
            raise ValueError("class must contain at least one hypothesis")
        self.domain_size = domain_size
        self.matrix = np.array(rows, dtype=np.uint8)

    def __len__(self):
        return self.matrix.shape[0]

    def hypothesis(self, i: int) -> tuple:
        return tuple(int(b) for b in self.matrix[i])

    @classmethod
    def random(cls, domain_size: int, count: int, tape: RandomTape) -> "FiniteClass":
        rows = []
        for _ in range(count):
            bits = tape.draw_bits(domain_size)
            rows.append(tuple(int(b) for b in bits))
        return cls(domain_size, rows)


class LabeledSample:
    """Indexed points with binary labels; exposes arrays for bulk risk math."""

    def __init__(self, points=None, xs=None, ys=None):
        if points is not None:
            xs = np.array([p[0] for p in points], dtype=np.int64)
            ys = np.array([p[1] for p in points], dtype=np.int64)
        else:
            xs = np.asarray(xs, dtype=np.int64)
            ys = np.asarray(ys, dtype=np.int64)
        if xs.shape != ys.shape:
            raise ValueError("points and labels must align")
        if len(xs) and (ys.min() < 0 or ys.max() > 1):
            raise ValueError("labels must be 0 or 1")
        if len(xs) and xs.min() < 0:
            raise ValueError("domain indices must be non-negative")
        self.xs = xs
        self.ys = ys

    def __len__(self):
        return len(self.xs)

    @property
    def points(self) -> list:
        return [(int(x), int(y)) for x, y in zip(self.xs, self.ys)]

    def relabeled(self, h) -> "LabeledSample":
        """Same points, labels replaced by h's predictions."""
        hv = np.asarray(h, dtype=np.int64)
        return LabeledSample(xs=self.xs, ys=hv[self.xs])


class DataSource:
    """Joint distribution over (index, label) bound to its own tape.

    Each point consumes two 8-byte fields from the stream: one picks the
    index through the marginal's cumulative table, one decides the label
    against P[y=1 | x]. The layout is fixed-width, so bulk draws parse a
    single read with numpy.
    """

    def __init__(self, marginal, label_prob, tape: RandomTape):
        px = np.asarray(marginal, dtype=np.float64)
        p1 = np.asarray(label_prob, dtype=np.float64)
        if px.ndim != 1 or px.shape != p1.shape:
            raise ValueError("marginal and label_prob must be equal-length vectors")
        if px.min() < 0 or abs(float(px.sum()) - 1.0) > 2.0**-40:
            raise ValueError("marginal must be a probability vector")
        if p1.min() < 0 or p1.max() > 1:
            raise ValueError("label_prob entries must be in [0, 1]")
        self.px = px
        self.p1 = p1
        self._cum = np.cumsum(px)
        self._tape = tape

    @property
    def domain_size(self) -> int:
        return len(self.px)

    def draw(self, n: int) -> LabeledSample:
        if n < 1:
            raise ValueError("sample size must be positive")
        buf = self._tape.read_bytes(16 * n)
        a = np.frombuffer(buf, dtype=">u8").reshape(n, 2)
        ux = (a[:, 0] >> np.uint64(11)) * 2.0**-53
        uy = (a[:, 1] >> np.uint64(11)) * 2.0**-53
        xs = np.searchsorted(self._cum, ux, side="right")
        xs = np.minimum(xs, len(self.px) - 1)
        ys = (uy < self.p1[xs]).astype(np.int64)
        return LabeledSample(xs=xs.astype(np.int64), ys=ys)

    def spawn(self, index: int) -> "DataSource":
        """Same distribution on a child stream; for disjoint sub-draws."""
        return DataSource(self.px, self.p1, derive_stream(self._tape, index))

    def true_risk(self, h) -> float:
        hv = np.asarray(h, dtype=np.float64)
        return float(np.sum(self.px * np.where(hv == 1, 1.0 - self.p1, self.p1)))

    def opt(self, cls: FiniteClass) -> float:
        return min(self.true_risk(cls.matrix[i]) for i in range(len(cls)))

    @classmethod
    def realizable(cls, target, marginal, tape: RandomTape) -> "DataSource":
        hv = np.asarray(target, dtype=np.float64)
        return cls(marginal, hv, tape)


@dataclass(frozen=True)
class LearnerParams:
    """Knobs of the threshold learner.

    The constructor checks only structural facts (ranges; tau divides
    alpha/4 exactly). ``validate_theory`` additionally enforces the
    guarantee-carrying sample-size and grid-resolution bounds for a given
    class size; desk-scale runs skip it deliberately.
    """

    rho: float
    alpha: Fraction
    beta: float
    tau: Fraction
    m: int
    realizable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_fraction(self.alpha))
        object.__setattr__(self, "tau", _as_fraction(self.tau))
        for name in ("rho", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1)")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        quarter = self.alpha / 4
        if (quarter / self.tau).denominator != 1:
            raise ValueError("tau must divide alpha/4 exactly")
        if quarter / self.tau < 2:
            raise ValueError("threshold grid needs at least one point: alpha/(4 tau) >= 2")
        if self.m < 1:
            raise ValueError("m must be positive")

    def validate_theory(self, n_hypotheses: int, c_tau: float = 1.0, c_m: float = 1.0):
        if n_hypotheses > 1:
            tau_ceiling = c_tau * float(self.alpha) * self.rho**2 / math.log(n_hypotheses)
            if float(self.tau) > tau_ceiling:
                raise ValueError(f"tau above theory bound: {float(self.tau)} > {tau_ceiling}")
        log_h = max(math.log(max(n_hypotheses, 2)), 1.0)
        a = float(self.alpha)
        if self.realizable:
            floor = c_m * (log_h**2 * math.log(1 / self.rho)
                           + self.rho**4 * math.log(1 / self.beta)) / (a * self.rho**4)
        else:
            floor = c_m * (log_h**2 * math.log(1 / self.rho)
                           + self.rho**2 * math.log(1 / self.beta)) / (a**2 * self.rho**4)
        if self.m < floor:
            raise ValueError(f"m below theory bound: {self.m} < {math.ceil(floor)}")


# ---------------------------------------------------------------------------
# risks


def empirical_risk(h, s: LabeledSample) -> Fraction:
    """Exact misclassification fraction of h on s."""
    if len(s) == 0:
        raise ValueError("sample must be non-empty")
    hv = np.asarray(h, dtype=np.int64)
    mistakes = int(np.count_nonzero(hv[s.xs] != s.ys))
    return Fraction(mistakes, len(s))


def class_risks(cls: FiniteClass, s: LabeledSample) -> list:
    """Empirical risk of every hypothesis, one matrix pass."""
    if len(s) == 0:
        raise ValueError("sample must be non-empty")
    mistakes = np.count_nonzero(cls.matrix[:, s.xs] != s.ys[None, :], axis=1)
    return [Fraction(int(k), len(s)) for k in mistakes]


# ---------------------------------------------------------------------------
# OPT estimation


def estimate_opt(cls: FiniteClass, s: LabeledSample, alpha, tape: RandomTape,
                 *, shift: Fraction | None = None) -> Fraction:
    """Grid-rounded estimate of the best achievable empirical risk.

    Buckets of width alpha/8 are shifted by a random offset in
    [0, alpha/16]; OPT_S + alpha/4 is snapped down to its bucket edge.
    Two samples whose OPT_S land in one shifted bucket produce identical
    outputs, which is the whole point. ``shift`` pins the offset for
    equivariance tests; inside the fraction arithmetic everything is
    exact.
    """
    a = _as_fraction(alpha)
    if not 0 < a < 1:
        raise ValueError("alpha must be in (0, 1)")
    opt_s = min(class_risks(cls, s))
    if shift is None:
        # offset on a 2^20 grid: exact rational, fresh per call
        shift = Fraction(tape.randint_below(1 << 20), 1 << 20) * (a / 16)
    else:
        shift = _as_fraction(shift)
        if not 0 <= shift <= a / 16:
            raise ValueError("shift must lie in [0, alpha/16]")
    width = a / 8
    j = (opt_s + a / 4 - shift) // width
    value = j * width + shift
    return max(Fraction(0), min(Fraction(1), value))


# ---------------------------------------------------------------------------
# the threshold learner


def learn_from_sample(cls: FiniteClass, s: LabeledSample, params: LearnerParams,
                      tape: RandomTape, opt_sample: LabeledSample | None = None) -> tuple:
    """Threshold-then-order learner on a provided sample.

    Coins come off the tape in a fixed order: grid shift (agnostic only),
    threshold index, ordering. Returns the chosen hypothesis vector.
    """
    risks = class_risks(cls, s)
    if params.realizable:
        v_init = Fraction(0)
    else:
        v_init = estimate_opt(cls, opt_sample if opt_sample is not None else s,
                              params.alpha, derive_stream(tape, 0))
    # grid v_init + 3tau/2, v_init + 5tau/2, ..., v_init + alpha/4 - tau/2
    grid_size = int((params.alpha / 4) / params.tau) - 1
    pick = tape.randint_below(grid_size)
    v = v_init + params.tau * Fraction(3 + 2 * pick, 2)
    order = random_order(len(cls), tape)
    below = [i for i in order if risks[i] <= v]
    if below:
        return cls.hypothesis(below[0])
    # unreachable when v >= OPT_S; kept for the failure branch
    best = min(risks)
    for i in order:
        if risks[i] == best:
            return cls.hypothesis(i)
    raise AssertionError("unreachable")


def r_finite_learn(cls: FiniteClass, data: DataSource, params: LearnerParams,
                   tape: RandomTape) -> tuple:
    """Draw a sample from data and run the threshold learner.

    rho-replicable across paired runs that share the tape but not the
    data stream; in the agnostic case the grid initializer gets its own
    fresh sample.
    """
    opt_sample = None if params.realizable else data.draw(params.m)
    s = data.draw(params.m)
    return learn_from_sample(cls, s, params, tape, opt_sample=opt_sample)


# ---------------------------------------------------------------------------
# replicability amplification


class AmplifiedLearner:
    """Wrapper produced by amplify_replicability; call with a DataSource."""

    def __init__(self, base, strings: list, runs_per_string: int, hh_threshold: float):
        self.base = base
        self.strings = strings
        self.runs_per_string = runs_per_string
        self.hh_threshold = hh_threshold

    def __call__(self, data: DataSource):
        t = self.runs_per_string
        for j, rj in enumerate(self.strings[:-1]):
            counts: dict = {}
            for i in range(t):
                y = self.base(data.spawn(j * t + i), rj.clone())
                counts[y] = counts.get(y, 0) + 1
            top = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
            if top[1] >= self.hh_threshold * t:
                return top[0]
        # no string exposed a heavy hitter: one fresh run on the spare string
        return self.base(data.spawn(len(self.strings) * t), self.strings[-1].clone())


def amplify_replicability(base, rho_target: float, beta: float, tape: RandomTape,
                          runs_per_string: int = 32, hh_threshold: float = 0.75) -> AmplifiedLearner:
    """Boost a constant-replicable learner to rho_target.

    Coin strings are drawn from the tape at wrap time, so two wrappers
    built from clones of one tape share them; per call, each string's
    output distribution is probed on fresh samples and the first string
    showing a heavy hitter answers. base is called as base(data, tape).
    """
    if not 0.0 < rho_target < 1.0:
        raise ValueError("rho_target must be in (0, 1)")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must be in (0, 1)")
    k = max(2, math.ceil(2 * math.log2(1.0 / rho_target)))
    strings = [derive_stream(tape, j) for j in range(k + 1)]
    return AmplifiedLearner(base, strings, runs_per_string, hh_threshold)


# ---------------------------------------------------------------------------
# list heavy hitters


@dataclass(frozen=True)
class SubsetSampler:
    """Distribution over subsets of a finite universe, drawn via a tape."""

    universe: tuple
    generator: object  # callable(tape) -> iterable of universe elements
    max_size: int

    def draw(self, tape: RandomTape) -> frozenset:
        got = frozenset(self.generator(tape))
        if len(got) > self.max_size:
            raise ValueError("sampler produced a subset above its declared maximum")
        if not got <= set(self.universe):
            raise ValueError("sampler produced elements outside the universe")
        return got


def list_heavy_hitter(sampler: SubsetSampler, eta, rho: float, beta: float,
                      tape: RandomTape, t1: int = 64, t2: int = 400,
                      tau=None, sample_tape: RandomTape | None = None):
    """First element, in a shared random order, whose subset frequency
    clears a shared random threshold; BOT when nothing clears.

    Candidate discovery uses t1 draws, frequency estimation t2 more.
    Coins (threshold, order) come from `tape`; subset draws come from
    `sample_tape` when given, else from a child of `tape`; a paired
    harness shares `tape` and splits `sample_tape`.
    """
    eta_f = _as_fraction(eta)
    if not 0 < eta_f <= 1:
        raise ValueError("eta must be in (0, 1]")
    if tau is None:
        tau = eta_f / 80
    tau = _as_fraction(tau)
    grid_size = eta_f / (8 * tau)
    if grid_size.denominator != 1 or grid_size < 1:
        raise ValueError("tau must divide eta/8 exactly")
    if sample_tape is None:
        sample_tape = derive_stream(tape, 1)
    coins = derive_stream(tape, 0)
    union: set = set()
    for i in range(t1):
        union |= sampler.draw(derive_stream(sample_tape, i))
    counts = {t: 0 for t in union}
    for i in range(t2):
        got = sampler.draw(derive_stream(sample_tape, t1 + i))
        for t in got:
            if t in counts:
                counts[t] += 1
    # threshold grid eta/4 + 2 tau, eta/4 + 6 tau, ..., 3 eta/4 - 2 tau
    pick = coins.randint_below(int(grid_size))
    v = eta_f / 4 + tau * (2 + 4 * pick)
    order = random_order(len(sampler.universe), coins)
    for idx in order:
        t = sampler.universe[idx]
        if t in counts and Fraction(counts[t], t2) >= v:
            return t
    return BOT


# ---------------------------------------------------------------------------
# agnostic learning through lists


def list_distribution_generator(learner, strings: list, cls: FiniteClass,
                                data: DataSource, alpha, t_prune: int = 256,
                                n_unlabeled: int | None = None) -> frozenset:
    """Candidate hypotheses from all (class labeling, coin string) pairs,
    pruned to within alpha/2 of the best on a fresh labeled sample.

    learner is called as learner(sample, tape). The best candidate
    survives its own pruning bar, so the result is never empty.
    """
    a = _as_fraction(alpha)
    if n_unlabeled is None:
        n_unlabeled = t_prune
    s_u = data.draw(n_unlabeled)
    candidates: set = set()
    for h_idx in range(len(cls)):
        labeled = s_u.relabeled(cls.matrix[h_idx])
        for r in strings:
            candidates.add(learner(labeled, r.clone()))
    s_l = data.draw(t_prune)
    scored = {h: empirical_risk(h, s_l) for h in candidates}
    bar = min(scored.values()) + a / 2
    return frozenset(h for h, r in scored.items() if r <= bar)


def agnostic_learn(cls: FiniteClass, data: DataSource, rho: float, alpha,
                   beta: float, tape: RandomTape, inner: LearnerParams | None = None,
                   t1: int = 24, t2: int = 120):
    """Agnostic learner: list generator composed with list_heavy_hitter at
    eta = 1/2. BOT propagates from the heavy-hitter stage."""
    a = _as_fraction(alpha)
    if inner is None:
        inner = LearnerParams(rho=0.25, alpha=a / 4, beta=beta / 4, tau=a / 64,
                              m=512, realizable=True)
    k = max(2, math.ceil(math.log2(4.0 / beta)))
    strings = [derive_stream(tape, 100 + j) for j in range(k)]

    def gen(sample_tape: RandomTape):
        src = DataSource(data.px, data.p1, sample_tape)
        return list_distribution_generator(
            lambda s, r: learn_from_sample(cls, s, inner, r),
            strings, cls, src, a, t_prune=inner.m, n_unlabeled=inner.m)

    universe = tuple(cls.hypothesis(i) for i in range(len(cls)))
    sampler = SubsetSampler(universe, gen, max_size=len(cls))
    return list_heavy_hitter(sampler, Fraction(1, 2), rho, beta, tape,
                             t1=t1, t2=t2, sample_tape=derive_stream(data._tape, 1))
