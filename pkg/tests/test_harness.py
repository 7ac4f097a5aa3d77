"""Vectorized replay, pooled chi-square, and the excess-delta reduction."""

import math
from fractions import Fraction

import numpy as np
import pytest

import stability_kit.harness as harness
from stability_kit.distributions import FiniteDistribution, indistinguishable
from stability_kit.harness import (
    chi2_pvalue,
    map_trials,
    replay_consistent_pairs,
    threads_from_env,
    tv_empirical,
    worst_excess_delta,
)
from stability_kit.sampling import consistent_sample
from stability_kit.tape import RandomTape, Seed, derive_stream


def _pair(n, seed):
    # two aligned distributions, q with one zeroed outcome
    gen = RandomTape(Seed.from_hex(seed))
    pw = [1 + gen.randint_below(100) for _ in range(n)]
    qw = [1 + gen.randint_below(100) for _ in range(n)]
    qw[n // 2] = 0
    outs = tuple(range(n))
    p = FiniteDistribution(outs, [Fraction(w, sum(pw)) for w in pw])
    q = FiniteDistribution(outs, [Fraction(w, sum(qw)) for w in qw])
    return p, q


class TestReplay:
    def test_matches_scalar_sampler_bit_for_bit(self):
        p, q = _pair(6, "0a")
        tape = RandomTape(Seed.from_hex("0b"))
        trials = 300
        idx_p, idx_q = replay_consistent_pairs(p, q, tape, trials)
        for i in range(trials):
            t = derive_stream(tape, i)
            assert p.outcomes[idx_p[i]] == consistent_sample(p, t.clone())
            assert q.outcomes[idx_q[i]] == consistent_sample(q, t.clone())

    def test_straggler_path_matches_scalar(self, monkeypatch):
        # one wave only, so most trials fall through to the scalar sampler
        monkeypatch.setattr(harness, "_MAX_WAVES", 1)
        p, q = _pair(64, "0c")
        tape = RandomTape(Seed.from_hex("0d"))
        idx_p, idx_q = replay_consistent_pairs(p, q, tape, 120)
        for i in range(120):
            t = derive_stream(tape, i)
            assert p.outcomes[idx_p[i]] == consistent_sample(p, t.clone())
            assert q.outcomes[idx_q[i]] == consistent_sample(q, t.clone())

    def test_identical_inputs_always_agree(self):
        p, _ = _pair(12, "0e")
        idx_p, idx_q = replay_consistent_pairs(p, p, RandomTape(Seed.from_hex("0f")), 500)
        assert (idx_p == idx_q).all()

    def test_zero_trials(self):
        p, q = _pair(4, "10")
        idx_p, idx_q = replay_consistent_pairs(p, q, RandomTape(Seed.from_hex("11")), 0)
        assert idx_p.size == 0 and idx_q.size == 0

    def test_rejects_misaligned_outcomes(self):
        p = FiniteDistribution((0, 1), [Fraction(1, 2), Fraction(1, 2)])
        q = FiniteDistribution((1, 2), [Fraction(1, 2), Fraction(1, 2)])
        with pytest.raises(ValueError):
            replay_consistent_pairs(p, q, RandomTape(Seed.from_hex("12")), 10)


class TestChi2:
    def test_exact_fit_gives_p_one(self):
        assert chi2_pvalue([25, 25, 25, 25], [0.25] * 4) == pytest.approx(1.0)

    def test_gross_misfit_gives_tiny_p(self):
        assert chi2_pvalue([90, 10], [0.5, 0.5]) < 1e-6

    def test_small_cells_pool_into_tail(self):
        # expected counts 80, 16, 2, 2: the two light cells merge
        probs = [0.8, 0.16, 0.02, 0.02]
        p = chi2_pvalue([80, 16, 2, 2], probs)
        assert 0.0 <= p <= 1.0

    def test_degenerate_single_cell(self):
        assert chi2_pvalue([100], [1.0]) == 1.0

    def test_tv_empirical(self):
        d = FiniteDistribution((0, 1), [Fraction(1, 2), Fraction(1, 2)])
        assert tv_empirical([50, 50], d) == 0.0
        assert tv_empirical([100, 0], d) == pytest.approx(0.5)


class TestThreads:
    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("STABILITY_KIT_THREADS", raising=False)
        assert threads_from_env() == 1

    def test_env_sets_count(self, monkeypatch):
        monkeypatch.setenv("STABILITY_KIT_THREADS", "4")
        assert threads_from_env() == 4

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_bad_values_name_the_variable(self, monkeypatch, raw):
        monkeypatch.setenv("STABILITY_KIT_THREADS", raw)
        with pytest.raises(ValueError, match="STABILITY_KIT_THREADS"):
            threads_from_env()

    def test_map_trials_keeps_order(self):
        serial = map_trials(lambda i: i * i, 40, threads=1)
        pooled = map_trials(lambda i: i * i, 40, threads=3)
        assert serial == pooled == [i * i for i in range(40)]


class TestWorstExcessDelta:
    def test_eps_zero_is_tv(self):
        p = FiniteDistribution((0, 1), [Fraction(1, 2), Fraction(1, 2)])
        q = FiniteDistribution((0, 1), [Fraction(1, 4), Fraction(3, 4)])
        assert worst_excess_delta(p, q, 0.0) == pytest.approx(0.25)

    def test_one_sided_support(self):
        p = FiniteDistribution((0, 1), [Fraction(1), Fraction(0)])
        q = FiniteDistribution((0, 1), [Fraction(1, 2), Fraction(1, 2)])
        assert worst_excess_delta(p, q, math.log(2.0)) == pytest.approx(0.5)

    def test_agrees_with_indistinguishable(self):
        p = FiniteDistribution((0, 1, 2), [Fraction(6, 10), Fraction(3, 10), Fraction(1, 10)])
        q = FiniteDistribution((0, 1, 2), [Fraction(3, 10), Fraction(5, 10), Fraction(2, 10)])
        d = worst_excess_delta(p, q, 0.5)
        assert indistinguishable(p, q, 0.5, d + 1e-9)
        assert not indistinguishable(p, q, 0.5, d - 1e-6)
