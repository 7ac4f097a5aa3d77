"""Verification suites: one deterministic experiment per module group.

Each suite turns a config into a Report whose metrics mirror the
package's reference checks. Exact facts (hash family counts, enumerated
output laws, unit-group enumerations) carry tolerance 0; Monte Carlo
facts carry a Wald half-width and a bound with three half-widths of
slack. All randomness descends from the config seed through a path
that starts with the suite's position in SUITES, so rerunning any suite,
alone or under verify-all, reproduces its numbers bit for bit.

Workload notes. Where a reference check states a total tape budget over
several pairs (the explicit-sampler and circuit-correlation checks), the
budget is split evenly across pairs and the per-pair half-width reflects
the split. ``trials`` rescales the main loop of every suite; enumerative
checks ignore it.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import Counter
from fractions import Fraction

import numpy as np

from .circuits import InverterOracle, TruthTableCircuit, induced_distribution, parse_circuit, random_circuit
from .config import RESOLVED_CONSTANTS, SUITES, ExperimentConfig, config_from_mapping
from .crypto import (
    GMCiphertext,
    GMKeys,
    adversary,
    dec,
    enc,
    keygen,
    make_cheat_solver,
    rand_enc_failure_probability,
    rand_enc_output_distribution,
    rerandomize_distribution,
    selection_ratio_bound,
)
from .distributions import BOT, FiniteDistribution, indistinguishable, tv_distance, wald_halfwidth
from .harness import chi2_pvalue, replay_consistent_pairs, tv_empirical, worst_excess_delta
from .hashing import pairwise_joint_counts
from .learning import DataSource, FiniteClass, LearnerParams, SubsetSampler, list_heavy_hitter, r_finite_learn
from .reports import Metric, Report
from .sampling import SamplerBudget, sample_implicit_int
from .tape import RandomTape, derive_stream
from .transforms import (
    StatAlgorithm,
    dp_exp_mech_algorithm,
    dp_selection_distribution,
    dp_to_rep,
    rep_to_dp,
    rep_to_pg,
    selection_threshold,
)

__all__ = ["run_suite"]


def _suite_tape(cfg: ExperimentConfig, name: str) -> RandomTape:
    return RandomTape(cfg.root_seed(), (SUITES.index(name),))


def _desk_budget(nu: float) -> SamplerBudget:
    return SamplerBudget(
        nu,
        RESOLVED_CONSTANTS["desk_slack_bits"],
        RESOLVED_CONSTANTS["desk_outer_rounds"],
        RESOLVED_CONSTANTS["desk_inner_trials"],
    )


class _Replay:
    """Fixed record pool presented through the DataSource draw protocol."""

    def __init__(self, records):
        self._records = records
        self._at = 0

    def draw(self, n: int):
        if self._at + n > len(self._records):
            raise ValueError("replay pool exhausted")
        got = self._records[self._at : self._at + n]
        self._at += n
        return got


# ---------------------------------------------------------------------------
# cs-explicit: hash family exactness + explicit-sampler coupling


def _random_aligned_pair(gen: RandomTape):
    # floored integer weights keep every cell's expected count healthy
    # for the marginal chi-square; the mixture weight steers d_TV
    for _ in range(64):
        n = 8 + gen.randint_below(57)
        pw = [(1 << 52) + gen.u53_int() for _ in range(n)]
        rw = [(1 << 50) + gen.u53_int() for _ in range(n)]
        lam = 2 + gen.randint_below(8)
        tp = sum(pw)
        tr = sum(rw)
        pp = [Fraction(w, tp) for w in pw]
        qq = [
            Fraction(10 - lam, 10) * a + Fraction(lam, 10) * Fraction(w, tr)
            for a, w in zip(pp, rw)
        ]
        outs = tuple(range(n))
        p = FiniteDistribution(outs, pp)
        q = FiniteDistribution(outs, qq)
        d = tv_distance(p, q)
        if Fraction(1, 20) <= d <= Fraction(1, 2):
            return p, q, d
    raise RuntimeError("aligned pair generation exhausted")


def _suite_cs_explicit(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "cs-explicit")
    dev = 0
    for in_bits in (2, 3, 4):
        for out_bits in (1, 2, 3):
            joint = pairwise_joint_counts(in_bits, out_bits)
            want = 1 << (in_bits * out_bits - out_bits)
            off_diag = ~np.eye(1 << in_bits, dtype=bool)
            dev = max(dev, int(np.abs(joint[off_diag] - want).max()))

    pairs = 20
    total = cfg.trials if cfg.trials is not None else 100_000
    per_pair = max(2, total // pairs)
    gen = derive_stream(tape, 0)
    worst_gap = -1.0
    worst_hw = 0.0
    min_chi2 = 1.0
    detail = []
    for i in range(pairs):
        p, q, d = _random_aligned_pair(gen)
        idx_p, idx_q = replay_consistent_pairs(p, q, derive_stream(tape, 1 + i), per_pair)
        disagrees = int((idx_p != idx_q).sum())
        rate = disagrees / per_pair
        hw = wald_halfwidth(disagrees, per_pair)
        bound = float(2 * d / (1 + d)) + 3.0 * hw
        gap = rate - bound
        if gap > worst_gap:
            worst_gap, worst_hw = gap, hw
        n = len(p.outcomes)
        chi_p = chi2_pvalue(np.bincount(idx_p, minlength=n), p.probs)
        chi_q = chi2_pvalue(np.bincount(idx_q, minlength=n), q.probs)
        min_chi2 = min(min_chi2, chi_p, chi_q)
        detail.append(
            {
                "support": n,
                "tv": float(d),
                "disagreement": rate,
                "bound": bound,
                "chi2_p": chi_p,
                "chi2_q": chi_q,
            }
        )
    metrics = (
        Metric("pairwise_joint_dev_max", float(dev), "==", 0.0),
        Metric("disagreement_gap_max", worst_gap, "<=", 0.0, half_width=worst_hw),
        Metric("marginal_chi2_p_min", min_chi2, ">=", 1e-3),
    )
    return metrics, {"pairs": detail, "tapes_per_pair": per_pair}


# ---------------------------------------------------------------------------
# corrsamp: implicit sampler accuracy and coupling


def _flip_entries(c: TruthTableCircuit, flips: int, gen: RandomTape) -> TruthTableCircuit:
    table = [int(v) for v in c.table]
    for _ in range(flips):
        table[gen.randint_below(len(table))] = gen.randint_below(1 << c.out_bits)
    return TruthTableCircuit(c.in_bits, c.out_bits, tuple(table))


def _suite_corrsamp(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "corrsamp")
    budget = _desk_budget(cfg.nu)
    oracle = InverterOracle()
    if cfg.circuit_file is not None:
        with open(cfg.circuit_file, "r", encoding="utf-8") as f:
            circuit = parse_circuit(f.read())
    else:
        circuit = random_circuit(6, 4, derive_stream(tape, 0))
    runs = cfg.trials if cfg.trials is not None else 100_000

    run_tape = derive_stream(tape, 1)
    counts = Counter()
    rounds_used = []
    for i in range(runs):
        stats: dict = {}
        y = sample_implicit_int(circuit, cfg.nu, oracle, derive_stream(run_tape, i),
                                budget=budget, stats=stats)
        counts[y] += 1
        if stats["returned_round"] is not None:
            rounds_used.append(stats["returned_round"])
    bots = counts.get(BOT, 0)
    target = induced_distribution(circuit)
    vec = np.array([counts.get(o, 0) for o in target.outcomes], dtype=np.float64)
    tv = tv_empirical(vec, target) if vec.sum() else 1.0
    bot_rate = bots / runs

    pair_count = 10
    per_pair = max(1, runs // (10 * pair_count))
    pair_gen = derive_stream(tape, 2)
    worst_gap = -1.0
    worst_hw = 0.0
    pair_detail = []
    for i in range(pair_count):
        c1 = random_circuit(6, 4, derive_stream(pair_gen, 2 * i))
        c2 = _flip_entries(c1, i % 7, derive_stream(pair_gen, 2 * i + 1))
        d = tv_distance(induced_distribution(c1), induced_distribution(c2))
        shared = derive_stream(tape, 3 + i)
        disagrees = 0
        for j in range(per_pair):
            t = derive_stream(shared, j)
            y1 = sample_implicit_int(c1, cfg.nu, oracle, t.clone(), budget=budget)
            y2 = sample_implicit_int(c2, cfg.nu, oracle, t.clone(), budget=budget)
            disagrees += y1 != y2
        rate = disagrees / per_pair
        hw = wald_halfwidth(disagrees, per_pair)
        bound = 8.0 * (float(d) + cfg.nu) + 3.0 * hw
        gap = rate - bound
        if gap > worst_gap:
            worst_gap, worst_hw = gap, hw
        pair_detail.append({"tv": float(d), "disagreement": rate, "bound": bound})
    metrics = (
        Metric("tv_to_target", tv, "<=", 5.0 * cfg.nu),
        Metric("bot_rate", bot_rate, "<=", 5.0 * cfg.nu),
        Metric("correlation_gap_max", worst_gap, "<=", 0.0, half_width=worst_hw),
    )
    extras = {
        "histogram": {
            ("bot" if o is BOT else format(o, f"0{circuit.out_bits}b")): c
            for o, c in sorted(counts.items(), key=lambda kv: repr(kv[0]))
        },
        "rounds_used": {
            "mean": float(np.mean(rounds_used)) if rounds_used else None,
            "max": int(max(rounds_used)) if rounds_used else None,
        },
        "pairs": pair_detail,
        "runs": runs,
        "tapes_per_pair": per_pair,
    }
    return metrics, extras


# ---------------------------------------------------------------------------
# learn-finite: threshold learner replicability + the ordering identity


def _ordering_identity_dev() -> Fraction:
    universe = (1, 2, 3, 4, 5)
    perms = list(itertools.permutations(universe))
    masks = list(range(1, 1 << len(universe)))
    firsts = []
    for perm in perms:
        by_mask = {}
        for mask in masks:
            for x in perm:
                if mask >> (x - 1) & 1:
                    by_mask[mask] = x
                    break
        firsts.append(by_mask)
    dev = Fraction(0)
    for m1 in masks:
        for m2 in masks:
            diff = sum(f[m1] != f[m2] for f in firsts)
            sym = (m1 ^ m2).bit_count()
            union = (m1 | m2).bit_count()
            dev = max(dev, abs(Fraction(diff, len(perms)) - Fraction(sym, union)))
    # one empty set: the occupied side always has a first element, the
    # empty side never does, matching |sym|/|union| = 1 by convention
    return dev


def _suite_learn_finite(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "learn-finite")
    dev = _ordering_identity_dev()

    cls = FiniteClass.random(64, 32, derive_stream(tape, 0))
    target = cls.hypothesis(0)
    px = np.full(64, 1 / 64)
    alpha = Fraction(str(cfg.alpha))
    params = LearnerParams(
        rho=cfg.rho,
        alpha=alpha,
        beta=cfg.beta,
        tau=alpha / (4 * RESOLVED_CONSTANTS["learner_grid_cells"]),
        m=RESOLVED_CONSTANTS["learner_desk_m"],
        realizable=True,
    )
    trials = cfg.trials if cfg.trials is not None else 200
    coin_tape = derive_stream(tape, 1)
    data_tape = derive_stream(tape, 2)
    agree = err_ok = 0
    for i in range(trials):
        coin = derive_stream(coin_tape, i)
        d1 = DataSource.realizable(target, px, derive_stream(derive_stream(data_tape, i), 0))
        d2 = DataSource.realizable(target, px, derive_stream(derive_stream(data_tape, i), 1))
        h1 = r_finite_learn(cls, d1, params, coin.clone())
        h2 = r_finite_learn(cls, d2, params, coin.clone())
        agree += h1 == h2
        err_ok += (d1.true_risk(h1) <= cfg.alpha) + (d1.true_risk(h2) <= cfg.alpha)
    hw = wald_halfwidth(agree, trials)
    metrics = (
        Metric("ordering_identity_dev_max", float(dev), "==", 0.0),
        Metric("replicability", agree / trials, ">=", (1.0 - cfg.rho) - 3.0 * hw, half_width=hw),
        Metric(
            "within_alpha_fraction",
            err_ok / (2 * trials),
            ">=",
            0.9,
            half_width=wald_halfwidth(err_ok, 2 * trials),
        ),
    )
    return metrics, {"class_size": len(cls), "domain": 64, "trials": trials}


# ---------------------------------------------------------------------------
# list-hh: heavy-hitter correctness and replicability


def _suite_list_hh(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "list-hh")
    universe = tuple(range(32))

    def draw_subset(t: RandomTape):
        s = set()
        if t.u53() < 0.9:
            s.add(0)
        for _ in range(3):
            s.add(1 + t.randint_below(31))
        return s

    sampler = SubsetSampler(universe, draw_subset, 8)
    eta = Fraction(4, 5)
    # true inclusion frequencies: element 0 at 0.9, the light elements at
    # 1 - (30/31)^3, far below eta/2
    light = 1.0 - (30 / 31) ** 3
    heavy_set = {0}
    trials = cfg.trials if cfg.trials is not None else 200

    ctape = derive_stream(tape, 0)
    correct = 0
    for i in range(trials):
        t = derive_stream(ctape, i)
        out = list_heavy_hitter(sampler, eta, cfg.rho, cfg.beta, derive_stream(t, 0),
                                sample_tape=derive_stream(t, 1))
        correct += out in heavy_set
    c_hw = wald_halfwidth(correct, trials)

    rtape = derive_stream(tape, 1)
    agree = 0
    for i in range(trials):
        t = derive_stream(rtape, i)
        coin = derive_stream(t, 0)
        o1 = list_heavy_hitter(sampler, eta, cfg.rho, cfg.beta, coin.clone(),
                               sample_tape=derive_stream(t, 1))
        o2 = list_heavy_hitter(sampler, eta, cfg.rho, cfg.beta, coin.clone(),
                               sample_tape=derive_stream(t, 2))
        agree += o1 == o2
    r_hw = wald_halfwidth(agree, trials)
    metrics = (
        Metric("heavy_output_fraction", correct / trials, ">=", 1.0 - cfg.beta, half_width=c_hw),
        Metric("replicability", agree / trials, ">=", (1.0 - cfg.rho) - 3.0 * r_hw, half_width=r_hw),
    )
    return metrics, {"universe": 32, "light_frequency": light, "trials": trials}


# ---------------------------------------------------------------------------
# rep2dp: exact neighbor laws of the pooled selection


def _suite_rep2dp(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "rep2dp")
    eps, delta = cfg.eps, cfg.delta
    k1, k2 = 2, 4
    pooled = k1 * k2  # one record per run, so pooled samples have 8 records

    def law(vec):
        counts = {y: c for y, c in zip((0, 1, 2), vec) if c}
        return dp_selection_distribution(counts, eps, delta)

    vecs = [v for v in itertools.product(range(pooled + 1), repeat=3) if sum(v) == pooled]
    laws = {v: law(v) for v in vecs}
    worst_excess = 0.0
    all_ok = True
    checked = 0
    for v in vecs:
        for i in range(3):
            for j in range(3):
                if i == j or v[i] == 0:
                    continue
                w = list(v)
                w[i] -= 1
                w[j] += 1
                w = tuple(w)
                checked += 1
                worst_excess = max(worst_excess, worst_excess_delta(laws[v], laws[w], eps))
                all_ok = all_ok and indistinguishable(laws[v], laws[w], eps, delta)

    # tie the enumerated law to the transform's sampling path
    alg = StatAlgorithm(run=lambda s, coin: s[0], sample_size=1, output_space=(0, 1, 2))
    base_vec = (5, 2, 1)
    records = [0] * 5 + [1] * 2 + [2] * 1
    mc_runs = 4000
    tally = Counter()
    mc_tape = derive_stream(tape, 0)
    for i in range(mc_runs):
        y = rep_to_dp(alg, eps, delta, cfg.beta, _Replay(records), derive_stream(mc_tape, i),
                      k1=k1, k2=k2)
        tally[y] += 1
    ref = laws[base_vec]
    vec_counts = np.array([tally.get(o, 0) for o in ref.outcomes], dtype=np.float64)
    stray = mc_runs - int(vec_counts.sum())  # outcomes outside the law's support
    mc_tv = tv_empirical(vec_counts, ref) + stray / mc_runs if vec_counts.sum() else 1.0

    metrics = (
        Metric("neighbor_excess_delta_max", worst_excess, "<=", delta),
        Metric("neighbor_pairs_indistinguishable", float(all_ok), "==", 1.0),
        Metric("transform_mc_tv", mc_tv, "<=", 0.05),
    )
    extras = {
        "pooled_size": pooled,
        "neighbor_pairs": checked,
        "release_threshold": selection_threshold(eps, delta),
        "k1": k1,
        "k2": k2,
    }
    return metrics, extras


# ---------------------------------------------------------------------------
# rep2pg: empirical sample-level generalization


def _suite_rep2pg(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "rep2pg")
    eps, delta, beta = cfg.eps, cfg.delta, cfg.beta
    k = max(2, math.ceil(math.log2(1.0 / delta)))
    t_reruns = RESOLVED_CONSTANTS["rep2pg_reruns"]
    n = 16
    pool_len = k * t_reruns * n

    alg = StatAlgorithm(
        run=lambda s, coin: int(float(np.mean(s)) >= 0.4 + 0.2 * coin.u53()),
        sample_size=n,
        output_space=(0, 1),
    )

    def empirical_law(records, run_tape, runs):
        tally = Counter()
        for r in range(runs):
            y = rep_to_pg(alg, eps, delta, beta, _Replay(records), derive_stream(run_tape, r))
            tally[y] += 1
        outs = (0, 1)
        return FiniteDistribution(outs, [Fraction(tally.get(o, 0), runs) for o in outs])

    pairs = cfg.trials if cfg.trials is not None else 200
    runs_per_dataset = 50
    budget = 2.0 * delta + 0.05
    violations = 0
    ptape = derive_stream(tape, 0)
    for i in range(pairs):
        t = derive_stream(ptape, i)
        s1 = np.frombuffer(derive_stream(t, 1).read_bytes(pool_len), dtype=np.uint8) & 1
        s2 = np.frombuffer(derive_stream(t, 2).read_bytes(pool_len), dtype=np.uint8) & 1
        law1 = empirical_law(s1, derive_stream(t, 3), runs_per_dataset)
        law2 = empirical_law(s2, derive_stream(t, 4), runs_per_dataset)
        violations += not indistinguishable(law1, law2, eps, budget)
    hw = wald_halfwidth(violations, pairs)
    metrics = (
        Metric("pg_violation_fraction", violations / pairs, "<=", budget, half_width=hw),
    )
    extras = {"k": k, "t": t_reruns, "pairs": pairs, "runs_per_dataset": runs_per_dataset}
    return metrics, extras


# ---------------------------------------------------------------------------
# dp2rep: correlated sampling of a DP learner


def _suite_dp2rep(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "dp2rep")
    rho = cfg.rho
    m = 64
    eps = rho / math.sqrt(8.0 * m * math.log(1.0 / rho))
    cls = FiniteClass.random(16, 8, derive_stream(tape, 0))
    target = cls.hypothesis(0)
    px = np.full(16, 1 / 16)
    alg = dp_exp_mech_algorithm(cls, eps, m)

    sample = DataSource.realizable(target, px, derive_stream(tape, 1)).draw(m)
    law = alg.exact_output_distribution(sample)
    runs = cfg.trials if cfg.trials is not None else 100_000
    run_tape = derive_stream(tape, 2)
    tally = Counter()
    for i in range(runs):
        tally[dp_to_rep(alg, sample, derive_stream(run_tape, i))] += 1
    vec = np.array([tally.get(o, 0) for o in law.outcomes], dtype=np.float64)
    tv = tv_empirical(vec, law)

    paired = 200
    ptape = derive_stream(tape, 3)
    agree = 0
    for i in range(paired):
        t = derive_stream(ptape, i)
        s1 = DataSource.realizable(target, px, derive_stream(t, 1)).draw(m)
        s2 = DataSource.realizable(target, px, derive_stream(t, 2)).draw(m)
        shared = derive_stream(t, 0)
        agree += dp_to_rep(alg, s1, shared.clone()) == dp_to_rep(alg, s2, shared.clone())
    hw = wald_halfwidth(agree, paired)
    metrics = (
        Metric("marginal_tv", tv, "<=", 0.01),
        Metric("replicability", agree / paired, ">=", (1.0 - 8.0 * rho) - 3.0 * hw, half_width=hw),
    )
    extras = {"dp_eps": eps, "class_size": len(cls), "sample_size": m, "runs": runs}
    return metrics, extras


# ---------------------------------------------------------------------------
# crypto-sep: randomized-response encryption and the separation adversary


def _suite_crypto_sep(cfg: ExperimentConfig):
    tape = _suite_tape(cfg, "crypto-sep")
    keys77 = GMKeys(7, 11, 6)
    pk77 = keys77.pk
    eps = cfg.eps
    m = 6
    reps = (1, 6, 7)  # a square, x times a square, gcd-sharing junk

    def law(vec):
        sample = []
        for rep, c in zip(reps, vec):
            sample.extend([GMCiphertext(rep, 77)] * c)
        return rand_enc_output_distribution(pk77, sample, eps)

    vecs = [v for v in itertools.product(range(m + 1), repeat=3) if sum(v) == m]
    laws = {v: law(v).as_dict() for v in vecs}
    ratio_max = Fraction(0)
    for v in vecs:
        for i in range(3):
            for j in range(3):
                if i == j or v[i] == 0:
                    continue
                w = list(v)
                w[i] -= 1
                w[j] += 1
                lw = laws[tuple(w)]
                lv = laws[v]
                for o in set(lv) | set(lw):
                    a = lv.get(o, Fraction(0))
                    b = lw.get(o, Fraction(0))
                    if a == 0 and b == 0:
                        continue
                    if b == 0 or a == 0:
                        raise RuntimeError("one-sided event mass inside the ciphertext space")
                    ratio_max = max(ratio_max, a / b, b / a)

    # failure = the wrong bit coming out of a clean all-zeros sample;
    # the enumerated law mass must equal the closed form k/(m+2k)
    clean = [GMCiphertext(v * v % 77, 77) for v in range(1, m + 1)]
    clean_law = rand_enc_output_distribution(pk77, clean, eps)
    wrong = sum(p for o, p in zip(clean_law.outcomes, clean_law.probs) if dec(keys77, o) == 1)
    formula = rand_enc_failure_probability(m, eps)
    rr_tv = tv_distance(
        rerandomize_distribution(pk77, GMCiphertext(1, 77)),
        rerandomize_distribution(pk77, GMCiphertext(71, 77)),
    )

    trials = cfg.trials if cfg.trials is not None else 1000
    keys = keygen(cfg.prime_bits, derive_stream(tape, 0))
    solver = make_cheat_solver(keys)
    ctape = derive_stream(tape, 1)
    correct = 0
    for i in range(trials):
        t = derive_stream(ctape, i)
        b = int(t.draw_bits(1))
        challenge = enc(keys.pk, b, derive_stream(t, 1))
        guess = adversary(keys.pk, challenge, solver, m, derive_stream(t, 2))
        correct += guess == b
    hw = wald_halfwidth(correct, trials)
    metrics = (
        Metric("dp_ratio_max", float(ratio_max), "<=", float(selection_ratio_bound(eps))),
        Metric("failure_rate", float(wrong), "==", float(formula)),
        Metric("rerandomization_tv", float(rr_tv), "==", 0.0),
        Metric("adversary_advantage", correct / trials, ">=", 0.99, half_width=hw),
    )
    extras = {
        "modulus": 77,
        "per_plaintext_pads": math.ceil(1.0 / eps),
        "prime_bits": cfg.prime_bits,
        "challenges": trials,
    }
    return metrics, extras


# ---------------------------------------------------------------------------
# dispatch

_SUITE_FNS = {
    "corrsamp": _suite_corrsamp,
    "cs-explicit": _suite_cs_explicit,
    "learn-finite": _suite_learn_finite,
    "list-hh": _suite_list_hh,
    "rep2dp": _suite_rep2dp,
    "rep2pg": _suite_rep2pg,
    "dp2rep": _suite_dp2rep,
    "crypto-sep": _suite_crypto_sep,
}


def run_suite(config: ExperimentConfig) -> Report:
    """Execute the named suite; deterministic given (config, code)."""
    if not isinstance(config, ExperimentConfig):
        raise TypeError("run_suite expects an ExperimentConfig")
    started = time.perf_counter()
    if config.suite == "verify-all":
        metrics = []
        extras = {}
        for name in SUITES[:-1]:
            sub_map = {"suite": name, "seed": config.seed}
            if config.trials is not None:
                sub_map["trials"] = config.trials
            sub = run_suite(config_from_mapping(sub_map))
            metrics.extend(
                Metric(f"{name}/{m.name}", m.value, m.op, m.tolerance, m.half_width)
                for m in sub.metrics
            )
            extras[name] = sub.extras
    else:
        metrics, extras = _SUITE_FNS[config.suite](config)
    return Report(
        suite=config.suite,
        seed=config.seed,
        metrics=tuple(metrics),
        constants=dict(RESOLVED_CONSTANTS),
        extras=extras,
        wall_clock_s=time.perf_counter() - started,
    )
