import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranlab.stochastics import (Model, ParameterError, UrnState, beta_binomial_mixture,
                                derive_seed, estimate_moment, make_rng, mean_ci,
                                polya_urn_hits, polya_urn_hits_batch, sample_beta_power,
                                sample_dirichlet, sample_upsilon, two_sample_chi2,
                                upsilon_dary, upsilon_ran)


class TestSeeding:
    def test_same_seed_same_stream(self):
        assert np.array_equal(make_rng(5).random(10), make_rng(5).random(10))

    def test_derived_seeds_distinct(self):
        seeds = {derive_seed(0, t, rep) for t in range(50) for rep in range(50)}
        assert len(seeds) == 2500

    def test_derive_seed_deterministic(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert 0 <= derive_seed(1, 2, 3) < 2**64


class TestBetaPower:
    def test_d2_uniform_mean(self, rng):
        x = sample_beta_power(2, rng, 1_000_000)
        assert abs(x.mean() - 0.5) < 0.002

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_support(self, d, rng):
        x = sample_beta_power(d, rng, 100_000)
        assert np.all(x > 0) and np.all(x <= 1)

    @pytest.mark.parametrize("d", [3, 4])
    def test_cdf(self, d, rng):
        # P(B <= s) = s**(1/(d-1))
        x = sample_beta_power(d, rng, 200_000)
        for s in (0.01, 0.2, 0.7):
            p = s ** (1 / (d - 1))
            assert abs((x <= s).mean() - p) < 4 * math.sqrt(p * (1 - p) / x.size)

    @pytest.mark.parametrize("d", [1, 0, 2.5])
    def test_bad_d(self, d, rng):
        with pytest.raises(ParameterError):
            sample_beta_power(d, rng)


class TestDirichlet:
    def test_d2_anticorrelated(self, rng):
        x = sample_dirichlet(2, rng, 10_000)
        assert np.corrcoef(x[:, 0], x[:, 1])[0, 1] == pytest.approx(-1.0, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 8])
    def test_on_simplex(self, d, rng):
        x = sample_dirichlet(d, rng, 20_000)
        assert x.shape == (20_000, d)
        assert np.all(x > 0)
        assert np.allclose(x.sum(axis=1), 1.0, atol=1e-12)

    @pytest.mark.parametrize("d", [3, 4])
    def test_marginal_is_beta_power(self, d, rng):
        # a coordinate of Dirichlet(a,...,a) with a = 1/(d-1) is Beta(a, 1)
        x = sample_dirichlet(d, rng, 100_000)[:, 0]
        y = sample_beta_power(d, rng, 100_000)
        _, p = two_sample_chi2(np.floor(x * 20), np.floor(y * 20))
        assert p > 1e-3

    def test_single_vector_shape(self, rng):
        assert sample_dirichlet(3, rng).shape == (3,)


class TestUpsilon:
    @pytest.mark.parametrize("x,r,expected", [
        ((0.5, 0.3, 0.2), 2, 0.2),
        ((0.25, 0.25, 0.25, 0.25), 2, 0.5),
        ((0.5, 0.3, 0.2), 1, 0.5),
    ])
    def test_dary_examples(self, x, r, expected):
        assert upsilon_dary(np.array(x), r) == pytest.approx(expected)

    def test_ran_examples(self):
        b = np.full(9, 0.5)
        b[4] = 0.1
        assert upsilon_ran(np.array([0.5, 0.3, 0.2]), b) == pytest.approx(0.02)
        assert upsilon_ran(np.full(3, 1 / 3), np.full(9, 1 / 3)) == pytest.approx(1 / 9)

    def test_ran_length_checks(self):
        with pytest.raises(ParameterError):
            upsilon_ran(np.ones(2), np.ones(9))
        with pytest.raises(ParameterError):
            upsilon_ran(np.ones(3), np.ones(8))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 7), st.data())
    def test_dary_is_sum_of_smallest(self, d, data):
        r = data.draw(st.integers(1, d - 1))
        w = data.draw(st.lists(st.floats(0.01, 1.0), min_size=d, max_size=d))
        x = np.array(w) / sum(w)
        expected = sum(sorted(x)[: d - r])
        assert upsilon_dary(x, r) == pytest.approx(expected)
        # it is the least mass left when r of the children are kept
        assert 0 < upsilon_dary(x, r) < 1

    @pytest.mark.parametrize("d", [3, 5, 8])
    def test_dary_non_increasing_in_r(self, d, rng):
        x = sample_dirichlet(d, rng, 1000)
        u = np.stack([upsilon_dary(x, r) for r in range(1, d)])
        assert np.all(np.diff(u, axis=0) <= 0)

    def test_ran_equals_pairwise_minimum(self, rng):
        v = sample_dirichlet(3, rng, (2000, 4))
        a, b = v[:, 0, :], v[:, 1:, :].reshape(2000, 9)
        pairs = (a[:, :, None] * b[:, None, :]).reshape(2000, 27).min(axis=1)
        assert np.array_equal(upsilon_ran(a, b), pairs)

    def test_vectorized_rows(self, rng):
        x = sample_dirichlet(4, rng, 50)
        u = upsilon_dary(x, 2)
        assert np.allclose(u, [upsilon_dary(row, 2) for row in x])

    @pytest.mark.parametrize("model", [Model.dary(3, 2), Model.dary(5, 1), Model.ran()])
    def test_samples_in_unit_interval(self, model, rng):
        u = sample_upsilon(model, 10_000, rng)
        assert np.all((u > 0) & (u < 1))


class TestUrn:
    def test_t0(self, rng):
        assert polya_urn_hits(3, 0, rng) == 0

    def test_d2_t1_fair(self, rng):
        hits = polya_urn_hits_batch(2, 1, 1_000_000, rng)
        assert abs(hits.mean() - 0.5) < 0.002

    def test_state_counts(self, rng):
        s = UrnState(1, 2, 2)
        for _ in range(10):
            s = s.draw(rng)
        assert s.draws == 10
        assert s.count_a + s.count_b == 3 + 2 * 10

    def test_scalar_and_batch_agree(self):
        scalar = [polya_urn_hits(3, 8, make_rng(derive_seed(9, i))) for i in range(4000)]
        batch = polya_urn_hits_batch(3, 8, 4000, make_rng(1))
        _, p = two_sample_chi2(scalar, batch)
        assert p > 1e-3

    @pytest.mark.parametrize("d,t", [(2, 10), (3, 30)])
    def test_matches_mixture(self, d, t):
        urn = polya_urn_hits_batch(d, t, 30_000, make_rng(1))
        mix = beta_binomial_mixture(d, t, 30_000, make_rng(2))
        _, p = two_sample_chi2(urn, mix)
        assert p > 1e-3

    def test_mixture_mean(self, rng):
        # E[Bin(t, B)] = t / d for B ~ Beta(1/(d-1), 1)
        x = beta_binomial_mixture(3, 60, 200_000, rng)
        assert abs(x.mean() - 20) < 0.2


class TestChi2:
    def test_identical_samples(self):
        x = np.repeat(np.arange(10), 100)
        stat, p = two_sample_chi2(x, x)
        assert stat == pytest.approx(0) and p == pytest.approx(1)

    def test_detects_shift(self, rng):
        _, p = two_sample_chi2(rng.poisson(5, 5000), rng.poisson(6, 5000))
        assert p < 1e-6


class TestMoments:
    def test_lambda_zero_exact(self, rng):
        est = estimate_moment(Model.ran(), 0.0, 1000, rng)
        assert est.mean == 1 and est.half_width_95 == 0

    def test_dary_2_1_lambda_1(self, rng):
        est = estimate_moment(Model.dary(2, 1), 1.0, 400_000, rng)
        assert abs(est.mean - 0.75) < 3 * est.half_width_95 + 1e-4

    def test_too_few_samples(self, rng):
        with pytest.raises(ParameterError):
            estimate_moment(Model.ran(), 1.0, 10, rng)

    def test_negative_lambda(self, rng):
        with pytest.raises(ParameterError):
            estimate_moment(Model.ran(), -1.0, 1000, rng)

    def test_huge_lambda_degenerate(self, rng):
        est = estimate_moment(Model.dary(3, 1), 1e6, 1000, rng)
        assert est.degenerate

    def test_mean_ci(self):
        est = mean_ci(np.array([1.0, 2.0, 3.0]))
        assert est.mean == 2 and est.half_width_95 == pytest.approx(1.96 / math.sqrt(3))


class TestModel:
    def test_params(self):
        assert Model.dary(3, 2).params == "d=3;r=2"
        assert Model.ran().params == ""
        assert str(Model.dary(3, 2)) == "dary(3,2)"

    @pytest.mark.parametrize("d,r", [(3, 3), (3, 0), (1, 1)])
    def test_invalid(self, d, r):
        with pytest.raises(ParameterError):
            Model.dary(d, r)
