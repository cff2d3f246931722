import numpy as np
import pytest

from threshold_arena import (
    CdfEstimate,
    StochasticCdf,
    ValidationError,
    boosted_quantile,
    noisy_binary_search,
    search_budget,
    stitch_quantile_anchors,
    stochastic_cdf,
)
from threshold_arena.estimators import ANCHOR_TAUS


def step_oracle(k):
    return lambda i, rng: 1 if i >= k else 0


def pmf_oracle(pmf):
    cum = np.cumsum(pmf)
    cum[-1] = 1.0

    def oracle(q, rng):
        x = int(np.searchsorted(cum, rng.random(), side="right")) + 1
        return 1 if x <= q else 0

    return oracle


def good_anchors(cdf_values, tau, slack=0.125):
    # cdf_values is F(0..n+1); anchors w with dist([F(w-1), F(w)], tau) <= 1/8
    n = len(cdf_values) - 2
    return {
        w
        for w in range(1, n + 1)
        if max(0.0, cdf_values[w - 1] - tau, tau - cdf_values[w]) <= slack + 1e-12
    }


class TestNoisyBinarySearch:
    def test_all_zero_coins(self):
        res = noisy_binary_search(lambda i, rng: 0, 64, 0.5)
        assert res.index == 64 and not res.capped

    def test_single_coin(self):
        res = noisy_binary_search(lambda i, rng: 0, 1, 0.5)
        assert res.index == 1

    def test_step_oracle_every_run(self):
        # deterministic feedback makes the whole search path deterministic
        for k in (1, 17, 33, 64):
            indices = {noisy_binary_search(step_oracle(k), 64, 0.5).index for _ in range(100)}
            assert indices == {k - 1}

    def test_budget_cap_flag(self):
        res = noisy_binary_search(lambda i, rng: 0, 64, 0.5, budget=3)
        assert res.capped and res.queries == 3

    def test_query_count_within_budget(self):
        res = noisy_binary_search(pmf_oracle(np.r_[np.full(16, 1 / 16), 0.0]), 16, 0.5,
                                  rng=np.random.default_rng(0))
        assert res.queries <= search_budget(16)

    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            noisy_binary_search(step_oracle(1), 0, 0.5)
        with pytest.raises(ValidationError):
            noisy_binary_search(step_oracle(1), 4, 1.5)


class TestBoostedQuantile:
    def test_point_mass_anchor_exact(self):
        n = 8
        for j in (1, 4, 8):
            pmf = np.zeros(n + 1)
            pmf[j - 1] = 1.0
            for seed in range(3):
                res = boosted_quantile(pmf_oracle(pmf), n, 0.5, rng=np.random.default_rng(seed))
                assert res.index == j

    def test_single_support_point(self):
        res = boosted_quantile(step_oracle(1), 1, 0.5)
        assert res.index == 1

    def test_uniform_within_eighth_of_target(self):
        n = 64
        pmf = np.r_[np.full(n, 1 / n), 0.0]
        cdf = np.r_[0.0, np.cumsum(pmf)]
        cdf[-1] = 1.0
        g = np.random.default_rng(12)
        hits = sum(
            abs(cdf[boosted_quantile(pmf_oracle(pmf), n, 0.5, rng=g).index] - 0.5)
            <= 1 / 8 + 1 / n
            for _ in range(100)
        )
        assert hits >= 99

    def test_trials_must_be_odd(self):
        with pytest.raises(ValidationError):
            boosted_quantile(step_oracle(1), 4, 0.5, trials=4)

    def test_capped_propagates_only_when_all_trials_cap(self):
        res = boosted_quantile(step_oracle(3), 8, 0.5, budget=2)
        assert res.capped
        res = boosted_quantile(step_oracle(3), 8, 0.5)
        assert not res.capped


class TestStitching:
    def test_constant_anchors(self):
        est = stitch_quantile_anchors({tau: 2 for tau in ANCHOR_TAUS}, n=5)
        assert est.values.tolist() == [0, 0, 1, 1, 1, 1, 1]

    def test_mixed_anchors(self):
        anchors = {1 / 8: 1, 2 / 8: 3, 3 / 8: 5, 4 / 8: 5, 5 / 8: 5, 6 / 8: 5, 7 / 8: 5, 1.0: 5}
        est = stitch_quantile_anchors(anchors, n=5)
        assert est.values.tolist() == [0, 1 / 8, 1 / 8, 2 / 8, 2 / 8, 1, 1]

    def test_anchor_out_of_range(self):
        with pytest.raises(ValidationError):
            stitch_quantile_anchors({0.5: 6}, n=5)


class TestStochasticCdf:
    def test_point_mass_at_one_is_exact(self):
        n = 8
        pmf = np.zeros(n + 1)
        pmf[0] = 1.0
        res = stochastic_cdf(pmf_oracle(pmf), n, rng=np.random.default_rng(3))
        assert all(q.index == 1 for q in res.anchors.values())
        assert res.estimate.values.tolist() == [0.0] + [1.0] * (n + 1)

    def test_uniform_all_anchors_good(self):
        n = 32
        pmf = np.r_[np.full(n, 1 / n), 0.0]
        cdf = np.r_[0.0, np.cumsum(pmf)]
        cdf[-1] = 1.0
        res = stochastic_cdf(pmf_oracle(pmf), n, rng=np.random.default_rng(5))
        for tau, anchor in res.anchors.items():
            assert anchor.index in good_anchors(cdf, tau)
        assert np.max(np.abs(res.estimate.values[1:] - cdf[1:])) <= 0.25

    def test_query_budget_and_anchor_keys(self):
        n = 16
        pmf = np.r_[np.full(n, 1 / n), 0.0]
        res = stochastic_cdf(pmf_oracle(pmf), n, rng=np.random.default_rng(8))
        assert set(res.anchors) == set(ANCHOR_TAUS)
        assert res.queries <= 8 * 5 * search_budget(n)


class TestStochasticCdfOnline:
    def test_matches_functional_form_on_same_bits(self):
        # drive the online adapter with the same feedback the functional form
        # consumes: identical anchors, identical stitched estimate
        n = 16
        pmf = np.r_[np.full(n, 1 / n), 0.0]
        functional = stochastic_cdf(pmf_oracle(pmf), n, rng=np.random.default_rng(21))

        cum = np.cumsum(pmf)
        cum[-1] = 1.0
        g = np.random.default_rng(21)
        alg = StochasticCdf(n)
        dummy = np.random.default_rng(0)
        while not alg.done:
            q = alg.next_query(dummy)
            x = int(np.searchsorted(cum, g.random(), side="right")) + 1
            alg.observe(int(x <= q))
        assert {t: a.index for t, a in alg._anchors.items()} == {
            t: a.index for t, a in functional.anchors.items()
        }
        assert np.array_equal(alg.snapshot().values, functional.estimate.values)

    def test_idles_after_completion(self):
        n = 4
        alg = StochasticCdf(n, budget=4)
        g = np.random.default_rng(0)
        for _ in range(8 * 5 * 4 + 50):
            q = alg.next_query(g)
            assert 1 <= q <= n
            alg.observe(1)
        assert alg.done
        snap = alg.snapshot()
        assert isinstance(snap, CdfEstimate)
