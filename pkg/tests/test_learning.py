"""Finite-class learners: risks, grid rounding, threshold learning, lists."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from stability_kit.distributions import BOT
from stability_kit.learning import (
    AmplifiedLearner,
    DataSource,
    FiniteClass,
    LabeledSample,
    LearnerParams,
    SubsetSampler,
    agnostic_learn,
    amplify_replicability,
    class_risks,
    empirical_risk,
    estimate_opt,
    learn_from_sample,
    list_distribution_generator,
    list_heavy_hitter,
    r_finite_learn,
    random_order,
)
from stability_kit.tape import RandomTape, derive_stream


def tape_at(label: int, seed: int = 7) -> RandomTape:
    return RandomTape(seed.to_bytes(16, "big"), (label,))


def mc_halfwidth(p_hat: float, n: int) -> float:
    return math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n)


UNIFORM4 = np.full(4, 0.25)


# ---------------------------------------------------------------------------
# types


class TestFiniteClass:
    def test_duplicates_collapse_first_kept(self):
        cls = FiniteClass(3, [(1, 0, 1), (0, 0, 0), (1, 0, 1), (0, 0, 0)])
        assert len(cls) == 2
        assert cls.hypothesis(0) == (1, 0, 1)
        assert cls.hypothesis(1) == (0, 0, 0)

    def test_rejects_empty_and_malformed(self):
        with pytest.raises(ValueError, match="at least one"):
            FiniteClass(3, [])
        with pytest.raises(ValueError, match="length"):
            FiniteClass(3, [(1, 0)])
        with pytest.raises(ValueError, match="0 or 1"):
            FiniteClass(2, [(2, 0)])

    def test_random_class_is_deterministic(self):
        a = FiniteClass.random(16, 8, tape_at(1))
        b = FiniteClass.random(16, 8, tape_at(1))
        assert [a.hypothesis(i) for i in range(len(a))] == [b.hypothesis(i) for i in range(len(b))]


class TestLabeledSample:
    def test_points_round_trip(self):
        pts = [(0, 1), (3, 0), (2, 1)]
        s = LabeledSample(pts)
        assert s.points == pts
        assert len(s) == 3

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError, match="0 or 1"):
            LabeledSample([(0, 2)])

    def test_relabeled_uses_hypothesis_predictions(self):
        s = LabeledSample([(0, 1), (2, 1)])
        r = s.relabeled((0, 1, 1, 0))
        assert r.points == [(0, 0), (2, 1)]


class TestDataSource:
    def test_draw_replays_on_clone(self):
        src = DataSource(UNIFORM4, np.array([0.0, 1.0, 0.5, 0.25]), tape_at(2))
        a = src.draw(64).points
        src2 = DataSource(UNIFORM4, np.array([0.0, 1.0, 0.5, 0.25]), tape_at(2))
        assert src2.draw(64).points == a

    def test_atom_marginal_pins_index(self):
        src = DataSource(np.array([0.0, 1.0, 0.0]), np.array([0.0, 1.0, 0.0]), tape_at(3))
        s = src.draw(32)
        assert set(s.xs.tolist()) == {1}
        assert set(s.ys.tolist()) == {1}

    def test_label_frequency_tracks_conditional(self):
        src = DataSource(np.array([1.0]), np.array([0.3]), tape_at(4))
        s = src.draw(4000)
        freq = s.ys.mean()
        assert abs(freq - 0.3) <= 5 * mc_halfwidth(0.3, 4000)

    def test_true_risk_and_opt_by_hand(self):
        # p1 = 1/4 everywhere: all-zeros risks 1/4, all-ones 3/4
        src = DataSource(UNIFORM4, np.full(4, 0.25), tape_at(5))
        assert abs(src.true_risk((0, 0, 0, 0)) - 0.25) < 1e-12
        assert abs(src.true_risk((1, 1, 1, 1)) - 0.75) < 1e-12
        cls = FiniteClass(4, [(0, 0, 0, 0), (1, 1, 1, 1)])
        assert abs(src.opt(cls) - 0.25) < 1e-12

    def test_rejects_non_probability_marginal(self):
        with pytest.raises(ValueError, match="probability"):
            DataSource(np.array([0.5, 0.4]), np.array([0.0, 0.0]), tape_at(6))


class TestLearnerParams:
    def test_tau_must_divide_quarter_alpha(self):
        LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440), m=64)
        with pytest.raises(ValueError, match="divide alpha/4"):
            LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 441), m=64)

    def test_grid_needs_two_cells(self):
        with pytest.raises(ValueError, match="grid"):
            LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 20), m=64)

    def test_range_errors_name_fields(self):
        with pytest.raises(ValueError, match="rho"):
            LearnerParams(rho=1.5, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440), m=64)
        with pytest.raises(ValueError, match="m must be"):
            LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440), m=0)

    def test_theory_bounds_reject_desk_scale(self):
        p = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440), m=2048,
                          realizable=True)
        with pytest.raises(ValueError, match="m below theory bound"):
            p.validate_theory(32)
        loose = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 80), m=2048)
        with pytest.raises(ValueError, match="tau above theory bound"):
            loose.validate_theory(32)


# ---------------------------------------------------------------------------
# risks


class TestEmpiricalRisk:
    def test_all_correct_is_zero(self):
        s = LabeledSample([(0, 1), (1, 0), (2, 1)])
        assert empirical_risk((1, 0, 1), s) == 0

    def test_all_wrong_is_one(self):
        s = LabeledSample([(0, 1), (1, 0), (2, 1)])
        assert empirical_risk((0, 1, 0), s) == 1

    def test_one_of_three(self):
        s = LabeledSample([(0, 1), (1, 1), (2, 1)])
        assert empirical_risk((1, 0, 1), s) == Fraction(1, 3)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            empirical_risk((0, 1), LabeledSample([]))

    def test_class_risks_match_scalar(self):
        cls = FiniteClass.random(8, 6, tape_at(10))
        src = DataSource(np.full(8, 0.125), np.linspace(0, 1, 8), tape_at(11))
        s = src.draw(50)
        risks = class_risks(cls, s)
        for i in range(len(cls)):
            assert risks[i] == empirical_risk(cls.hypothesis(i), s)


# ---------------------------------------------------------------------------
# OPT estimation


class TestEstimateOpt:
    def test_hand_trace(self):
        # alpha=1/8, OPT_S=0, shift 0: floor((1/32)/(1/64)) = 2 buckets -> 1/32
        cls = FiniteClass(2, [(0, 0)])
        s = LabeledSample([(0, 0), (1, 0)])
        v = estimate_opt(cls, s, Fraction(1, 8), tape_at(12), shift=Fraction(0))
        assert v == Fraction(1, 32)

    def test_realizable_output_within_half_alpha(self):
        cls = FiniteClass.random(16, 8, tape_at(13))
        target = cls.matrix[0]
        src = DataSource.realizable(target, np.full(16, 1 / 16), tape_at(14))
        for i in range(20):
            v = estimate_opt(cls, src.draw(64), Fraction(1, 5), tape_at(15).derive(i))
            assert 0 <= v <= Fraction(1, 10)

    def test_identical_tape_and_opt_give_identical_output(self):
        cls = FiniteClass(4, [(0, 0, 0, 0), (1, 1, 1, 1)])
        s1 = LabeledSample([(0, 0), (1, 0), (2, 0), (3, 0)])
        s2 = LabeledSample([(3, 0), (2, 0), (1, 0), (0, 0)])  # same OPT_S, other sample
        assert estimate_opt(cls, s1, Fraction(1, 5), tape_at(16)) == \
            estimate_opt(cls, s2, Fraction(1, 5), tape_at(16))

    def test_output_lands_in_rounding_window(self):
        # value always in (OPT_S + alpha/8, OPT_S + alpha/4]
        cls = FiniteClass(4, [(1, 0, 1, 0)])
        alpha = Fraction(1, 4)
        for i in range(40):
            src = DataSource(UNIFORM4, np.full(4, 0.5), tape_at(17).derive(i))
            s = src.draw(16)
            opt_s = min(class_risks(cls, s))
            v = estimate_opt(cls, s, alpha, tape_at(18).derive(i))
            assert opt_s + alpha / 8 < v <= opt_s + alpha / 4

    def test_shift_equivariance_of_bucket_rule(self):
        # adding alpha/8 to every risk moves the fixed-shift output by alpha/8
        cls = FiniteClass(8, [(0,) * 8])
        alpha = Fraction(1, 2)
        shift = Fraction(1, 100)
        outs = []
        for mistakes in (0, 1, 2, 3):
            pts = [(i, 1 if i < mistakes else 0) for i in range(8)]
            s = LabeledSample(pts)
            outs.append(estimate_opt(cls, s, alpha, tape_at(19), shift=shift))
        # OPT_S steps of 1/8 = alpha/4: output steps by the same amount
        for a, b in zip(outs, outs[1:]):
            assert b - a == Fraction(1, 8)

    def test_clamped_to_unit_interval(self):
        cls = FiniteClass(2, [(0, 0)])
        s = LabeledSample([(0, 1), (1, 1)])  # OPT_S = 1
        v = estimate_opt(cls, s, Fraction(4, 5), tape_at(20))
        assert v == 1


# ---------------------------------------------------------------------------
# the threshold learner


def separated_class(seed_label: int, domain: int, count: int) -> FiniteClass:
    return FiniteClass.random(domain, count, tape_at(seed_label))


DESK = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440),
                     m=2048, realizable=True)


class TestFiniteLearner:
    def test_singleton_class_always_returned(self):
        cls = FiniteClass(4, [(1, 0, 1, 0)])
        src = DataSource(UNIFORM4, np.full(4, 0.5), tape_at(21))
        p = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440),
                          m=32, realizable=False)
        assert r_finite_learn(cls, src, p, tape_at(22)) == (1, 0, 1, 0)

    def test_replay_is_byte_identical(self):
        cls = separated_class(23, 32, 16)
        target = cls.hypothesis(0)
        outs = []
        for _ in range(2):
            src = DataSource.realizable(target, np.full(32, 1 / 32), tape_at(24))
            outs.append(r_finite_learn(cls, src, DESK, tape_at(25)))
        assert outs[0] == outs[1]

    def test_permutation_breaks_tie_below_threshold(self):
        # both hypotheses at risk 0 on the sample: winner is the order's first
        cls = FiniteClass(4, [(0, 0, 0, 0), (0, 0, 1, 1)])
        s = LabeledSample([(0, 0), (1, 0)])
        p = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440),
                          m=2, realizable=True)
        for i in range(12):
            coin = tape_at(26).derive(i)
            got = learn_from_sample(cls, s, p, coin.clone())
            # replay the learner's coin schedule by hand: threshold then order
            replay = coin.clone()
            replay.randint_below(int((p.alpha / 4) / p.tau) - 1)
            order = random_order(2, replay)
            assert got == cls.hypothesis(order[0])

    def test_fallback_returns_best_first_in_order(self):
        # labels disagree with every hypothesis on most points: nothing clears v
        cls = FiniteClass(2, [(0, 0), (1, 1)])
        s = LabeledSample([(0, 1), (1, 0)] * 8)  # both risks = 1/2
        p = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440),
                          m=16, realizable=True)
        for i in range(8):
            coin = tape_at(27).derive(i)
            got = learn_from_sample(cls, s, p, coin.clone())
            replay = coin.clone()
            replay.randint_below(int((p.alpha / 4) / p.tau) - 1)
            order = random_order(2, replay)
            assert got == cls.hypothesis(order[0])

    def test_realizable_replicability_and_error(self):
        cls = separated_class(28, 64, 32)
        target = cls.hypothesis(3)
        px = np.full(64, 1 / 64)
        agree = err_ok = 0
        n_pairs = 60
        for i in range(n_pairs):
            coin = tape_at(29).derive(i)
            d1 = DataSource.realizable(target, px, tape_at(30).derive(i).derive(0))
            d2 = DataSource.realizable(target, px, tape_at(30).derive(i).derive(1))
            h1 = r_finite_learn(cls, d1, DESK, coin.clone())
            h2 = r_finite_learn(cls, d2, DESK, coin.clone())
            agree += h1 == h2
            err_ok += (d1.true_risk(h1) <= 0.2) + (d1.true_risk(h2) <= 0.2)
        hw = mc_halfwidth(agree / n_pairs, n_pairs)
        assert agree / n_pairs >= 0.8 - 3 * hw
        assert err_ok / (2 * n_pairs) >= 0.9

    def test_agnostic_run_beats_opt_plus_alpha(self):
        cls = separated_class(31, 32, 8)
        target = np.array(cls.hypothesis(2), dtype=float)
        src = DataSource(np.full(32, 1 / 32), target * 0.9 + 0.05, tape_at(32))
        p = LearnerParams(rho=0.2, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 440),
                          m=2048, realizable=False)
        opt = src.opt(cls)
        hits = 0
        for i in range(20):
            src_i = src.spawn(i)
            h = r_finite_learn(cls, src_i, p, tape_at(33).derive(i))
            hits += src.true_risk(h) <= opt + 0.2
        assert hits >= 18


# ---------------------------------------------------------------------------
# ordering identity and threshold lemma


class TestOrderingIdentity:
    def test_disagreement_equals_symmetric_difference_ratio(self):
        # exact over all 24 permutations of a 4-element universe
        universe = (0, 1, 2, 3)
        subsets = [frozenset(c) for r in range(1, 5)
                   for c in itertools.combinations(universe, r)]
        perms = list(itertools.permutations(universe))
        for h1 in subsets:
            for h2 in subsets:
                differ = sum(1 for p in perms
                             if next(x for x in p if x in h1) != next(x for x in p if x in h2))
                expect = Fraction(len(h1 ^ h2), len(h1 | h2))
                assert Fraction(differ, len(perms)) == expect

    def test_random_order_is_uniform(self):
        counts = {}
        for i in range(3000):
            o = tuple(random_order(3, tape_at(34).derive(i)))
            counts[o] = counts.get(o, 0) + 1
        assert len(counts) == 6
        for v in counts.values():
            assert abs(v - 500) < 5 * math.sqrt(500)


class TestGoodThresholds:
    def test_threshold_symmetric_difference_is_rare(self):
        # |H|=64: target plus nearby variants; two fresh samples per trial,
        # one random grid threshold; the below-threshold sets rarely differ
        # by more than rho/4 of their union.
        rng_cls = tape_at(35)
        D, m, rho = 128, 16384, 0.2
        alpha, tau = Fraction(1, 5), Fraction(1, 80)
        target = np.array([int(b) for b in rng_cls.draw_bits(D)], dtype=np.uint8)
        rows = [tuple(target)]
        for d in (1, 2, 3):  # risks d/128 sit between grid points
            v = target.copy()
            v[:d] ^= 1
            rows.append(tuple(v))
        filler = FiniteClass.random(D, 70, tape_at(36))
        for i in range(len(filler)):
            rows.append(filler.hypothesis(i))
        cls = FiniteClass(D, rows[:64])
        assert len(cls) == 64
        px = np.full(D, 1 / D)
        grid = int((alpha / 4) / tau) - 1
        bad = 0
        trials = 120
        for i in range(trials):
            d1 = DataSource.realizable(target, px, tape_at(37).derive(i).derive(0))
            d2 = DataSource.realizable(target, px, tape_at(37).derive(i).derive(1))
            r1 = class_risks(cls, d1.draw(m))
            r2 = class_risks(cls, d2.draw(m))
            pick = tape_at(38).derive(i).randint_below(grid)
            v = tau * Fraction(3 + 2 * pick, 2)
            h1 = {j for j in range(64) if r1[j] <= v}
            h2 = {j for j in range(64) if r2[j] <= v}
            union = h1 | h2
            ratio = len(h1 ^ h2) / len(union) if union else 0.0
            bad += ratio > rho / 4
        frac = bad / trials
        assert frac <= rho / 4 + 3 * mc_halfwidth(max(frac, rho / 4), trials)


# ---------------------------------------------------------------------------
# amplification


class TestAmplify:
    def test_deterministic_base_passes_through(self):
        const = (1, 0, 1, 0)
        amp = amplify_replicability(lambda data, tape: const, 0.1, 0.1, tape_at(39),
                                    runs_per_string=4)
        src = DataSource(UNIFORM4, np.full(4, 0.5), tape_at(40))
        assert amp(src) == const

    def test_no_heavy_hitter_falls_back_to_fresh_run(self):
        outs = []

        def fresh(data, tape):
            outs.append(len(outs))
            return outs[-1]

        amp = amplify_replicability(fresh, 0.25, 0.1, tape_at(41), runs_per_string=4)
        src = DataSource(UNIFORM4, np.full(4, 0.5), tape_at(42))
        got = amp(src)
        # every probed run returned a distinct value; the answer is the one
        # extra fresh run after all strings failed
        assert got == outs[-1]
        assert len(outs) == len(amp.strings[:-1]) * 4 + 1

    def test_amplified_replicability(self):
        cls = separated_class(43, 32, 8)
        target = cls.hypothesis(1)
        px = np.full(32, 1 / 32)
        p = LearnerParams(rho=0.1, alpha=Fraction(1, 5), beta=0.1, tau=Fraction(1, 880),
                          m=1024, realizable=True)
        base = lambda data, tape: r_finite_learn(cls, data, p, tape)
        agree = 0
        n_pairs = 30
        for i in range(n_pairs):
            wrap = tape_at(44).derive(i)
            a1 = amplify_replicability(base, 0.1, 0.1, wrap.clone(), runs_per_string=16)
            a2 = amplify_replicability(base, 0.1, 0.1, wrap.clone(), runs_per_string=16)
            d1 = DataSource.realizable(target, px, tape_at(45).derive(i).derive(0))
            d2 = DataSource.realizable(target, px, tape_at(45).derive(i).derive(1))
            agree += a1(d1) == a2(d2)
        hw = mc_halfwidth(agree / n_pairs, n_pairs)
        assert agree / n_pairs >= 0.9 - 3 * hw


# ---------------------------------------------------------------------------
# list heavy hitters


class TestListHeavyHitter:
    def test_constant_sampler_returns_its_element(self):
        sampler = SubsetSampler((0, 1, 2), lambda t: {1}, max_size=1)
        assert list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, tape_at(46),
                                 t1=8, t2=40) == 1

    def test_ninety_ten_mixture_returns_heavy_element(self):
        def gen(t):
            return {0} if t.u53() < 0.9 else {1}
        sampler = SubsetSampler((0, 1), gen, max_size=1)
        wins = 0
        runs = 1000
        for i in range(runs):
            y = list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, tape_at(47).derive(i),
                                  t1=16, t2=100)
            wins += y == 0
        assert wins / runs >= 0.9

    def test_nothing_clears_threshold_reports_bot(self):
        sampler = SubsetSampler((0, 1), lambda t: set(), max_size=1)
        assert list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, tape_at(48),
                                 t1=8, t2=20) is BOT

    def test_tau_must_divide_eighth_eta(self):
        sampler = SubsetSampler((0,), lambda t: {0}, max_size=1)
        with pytest.raises(ValueError, match="divide eta/8"):
            list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, tape_at(49),
                              tau=Fraction(1, 33))

    def test_oversize_subset_rejected(self):
        sampler = SubsetSampler((0, 1, 2), lambda t: {0, 1, 2}, max_size=2)
        with pytest.raises(ValueError, match="maximum"):
            list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, tape_at(50), t1=1, t2=1)

    def test_alien_element_rejected(self):
        sampler = SubsetSampler((0, 1), lambda t: {5}, max_size=3)
        with pytest.raises(ValueError, match="universe"):
            list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, tape_at(51), t1=1, t2=1)

    def test_paired_streams_mostly_agree(self):
        def gen(t):
            out = set()
            if t.u53() < 0.9:
                out.add(0)
            out.add(1 + t.randint_below(7))
            return out
        sampler = SubsetSampler(tuple(range(8)), gen, max_size=2)
        agree = 0
        n_pairs = 50
        for i in range(n_pairs):
            coin = tape_at(52).derive(i)
            y1 = list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, coin.clone(),
                                   t1=16, t2=100, sample_tape=tape_at(53).derive(i).derive(0))
            y2 = list_heavy_hitter(sampler, Fraction(4, 5), 0.2, 0.1, coin.clone(),
                                   t1=16, t2=100, sample_tape=tape_at(53).derive(i).derive(1))
            agree += y1 == y2
        hw = mc_halfwidth(agree / n_pairs, n_pairs)
        assert agree / n_pairs >= 0.8 - 3 * hw


# ---------------------------------------------------------------------------
# list generation and agnostic learning


INNER = LearnerParams(rho=0.25, alpha=Fraction(1, 20), beta=0.025, tau=Fraction(1, 160),
                      m=512, realizable=True)


class TestListGenerator:
    def test_singleton_class_gives_singleton_list(self):
        cls = FiniteClass(4, [(1, 1, 0, 0)])
        src = DataSource(UNIFORM4, np.array([1.0, 1.0, 0.0, 0.0]), tape_at(54))
        got = list_distribution_generator(
            lambda s, r: learn_from_sample(cls, s, INNER, r),
            [tape_at(55)], cls, src, Fraction(1, 5), t_prune=64, n_unlabeled=64)
        assert got == frozenset({(1, 1, 0, 0)})

    def test_realizable_target_survives_pruning(self):
        cls = separated_class(56, 32, 8)
        target = cls.hypothesis(2)
        src = DataSource.realizable(target, np.full(32, 1 / 32), tape_at(57))
        strings = [tape_at(58).derive(j) for j in range(3)]
        got = list_distribution_generator(
            lambda s, r: learn_from_sample(cls, s, INNER, r),
            strings, cls, src, Fraction(1, 5), t_prune=512, n_unlabeled=512)
        assert len(got) >= 1
        assert target in got
        assert len(got) <= len(cls) * len(strings)

    def test_candidates_come_from_class_labelings(self):
        cls = separated_class(59, 16, 4)
        src = DataSource(np.full(16, 1 / 16), np.full(16, 0.5), tape_at(60))
        got = list_distribution_generator(
            lambda s, r: learn_from_sample(cls, s, INNER, r),
            [tape_at(61)], cls, src, Fraction(1, 2), t_prune=128, n_unlabeled=128)
        hyps = {cls.hypothesis(i) for i in range(len(cls))}
        assert got <= hyps


class TestAgnosticLearn:
    def test_realizable_error_within_alpha(self):
        cls = separated_class(62, 32, 16)
        target = cls.hypothesis(5)
        ok = 0
        runs = 10
        for i in range(runs):
            src = DataSource.realizable(target, np.full(32, 1 / 32),
                                        tape_at(63).derive(i))
            h = agnostic_learn(cls, src, rho=0.25, alpha=Fraction(1, 5), beta=0.1,
                               tape=tape_at(64).derive(i), t1=8, t2=40)
            ok += h is not BOT and src.true_risk(h) <= 0.2
        assert ok >= 9

    def test_known_opt_quarter_stays_within_alpha(self):
        cls = FiniteClass(4, [(0, 0, 0, 0), (1, 1, 1, 1)])
        src = DataSource(UNIFORM4, np.full(4, 0.25), tape_at(65))
        assert abs(src.opt(cls) - 0.25) < 1e-12
        h = agnostic_learn(cls, src, rho=0.25, alpha=Fraction(1, 5), beta=0.1,
                           tape=tape_at(66), t1=8, t2=40)
        assert h is not BOT
        assert src.true_risk(h) <= 0.25 + 0.2 + 1e-12

    def test_paired_replicability(self):
        cls = separated_class(67, 16, 8)
        target = cls.hypothesis(0)
        agree = 0
        n_pairs = 12
        for i in range(n_pairs):
            coin = tape_at(68).derive(i)
            d1 = DataSource.realizable(target, np.full(16, 1 / 16),
                                       tape_at(69).derive(i).derive(0))
            d2 = DataSource.realizable(target, np.full(16, 1 / 16),
                                       tape_at(69).derive(i).derive(1))
            h1 = agnostic_learn(cls, d1, rho=0.25, alpha=Fraction(1, 5), beta=0.1,
                                tape=coin.clone(), t1=8, t2=40)
            h2 = agnostic_learn(cls, d2, rho=0.25, alpha=Fraction(1, 5), beta=0.1,
                                tape=coin.clone(), t1=8, t2=40)
            agree += h1 == h2
        assert agree / n_pairs >= 0.75
