import numpy as np
import pytest

from dimershuffle.gibbs import (
    SamplerConfig,
    distribution_from_field,
    edge_occupation_estimate,
    exact_distribution,
    exact_edge_expectation,
    mcmc_sample,
    push_forward_F0_exact,
    push_forward_exact,
    total_variation,
)
from dimershuffle.lattice import TorusLattice, height_gradient, matchings_by_sector, winding_numbers
from dimershuffle.weights import ModelParams, spider_step, two_periodic_init


def nonempty_sectors(L):
    return sorted(matchings_by_sector(L).keys())


class TestExactDistribution:
    def test_uniform_at_a1(self):
        d = exact_distribution(2, 1.0, (0, 0))
        probs = list(d.table.values())
        assert np.allclose(probs, probs[0])
        assert d.check_normalized()

    def test_probability_ratio(self):
        a = 0.37
        d = exact_distribution(2, a, (1, 0))
        keys = list(d.table)
        for k1 in keys[:5]:
            for k2 in keys[:5]:
                n1 = d.configs[k1].n_a_dimers()
                n2 = d.configs[k2].n_a_dimers()
                assert d.table[k1] / d.table[k2] == pytest.approx(a ** (n1 - n2))

    def test_matches_field_route(self):
        # a^{N_a} equals the product of raw edge labels, sector by sector
        w0 = two_periodic_init(2, ModelParams(0.5))
        for delta in [(0, 0), (1, 0), (0, -1)]:
            d1 = exact_distribution(2, 0.5, delta)
            d2 = distribution_from_field(2, w0, delta)
            assert total_variation(d1.table, d2.table) < 1e-14

    def test_empty_sector_raises(self):
        with pytest.raises(ValueError):
            exact_distribution(2, 0.5, (2, 2))


class TestStationarity:
    @pytest.mark.parametrize("a", [1.0, 0.5, 0.2])
    def test_T_preserves_every_sector_L2(self, a):
        for delta in nonempty_sectors(2):
            target = exact_distribution(2, a, delta)
            pushed = push_forward_exact(2, a, delta)
            tv = total_variation(pushed.table, target.table)
            assert tv < 1e-12, f"sector {delta}: TV={tv}"

    def test_T_preserves_L1(self):
        for a in (1.0, 0.5):
            for delta in nonempty_sectors(1):
                target = exact_distribution(1, a, delta)
                pushed = push_forward_exact(1, a, delta)
                assert total_variation(pushed.table, target.table) < 1e-12

    def test_push_forward_mass(self):
        d = push_forward_exact(2, 0.5, (1, 0))
        assert d.check_normalized()

    @pytest.mark.parametrize("a", [1.0, 0.5])
    def test_F0_law_is_negated_sector_next_weights(self, a):
        # F_0(eta) ~ pi_{-Delta;1}: Gibbs with the k=1 weights on sector -Delta
        w1 = spider_step(two_periodic_init(2, ModelParams(a)))
        for delta in [(0, 0), (1, 0), (0, 1), (1, 1)]:
            pushed = push_forward_F0_exact(2, a, delta)
            target = distribution_from_field(2, w1, (-delta[0], -delta[1]))
            assert total_variation(pushed.table, target.table) < 1e-12

    def test_corrupted_probabilities_fail(self):
        pushed = push_forward_exact(2, 0.5, (0, 0), corrupt=0.05)
        target = exact_distribution(2, 0.5, (0, 0))
        assert total_variation(pushed.table, target.table) > 1e-3


class TestSlopeNormalization:
    def test_mean_gradient_is_delta_over_L(self):
        # E[h(f + n) - h(f)] = n . rho / 2 for n in (2Z)^2, exactly at L=2
        L = 2
        for a in (1.0, 0.4):
            for delta in [(0, 0), (1, 0), (0, 1), (-1, 0), (1, 1)]:
                d = exact_distribution(L, a, delta)
                for n_vec, expect in [((2, 0), delta[0] / L), ((0, 2), delta[1] / L)]:
                    mean_q = sum(
                        p * height_gradient(d.configs[k], (0, 0), n_vec)
                        for k, p in d.table.items()
                    )
                    assert mean_q / 4.0 == pytest.approx(expect, abs=1e-12)


class TestMcmc:
    def test_preserves_winding_and_validity(self):
        out = mcmc_sample(2, 0.5, (1, 0), SamplerConfig(sweeps=50, burn_in=10, seed=1))
        assert out.is_valid()
        assert winding_numbers(out) == (1, 0)

    def test_acceptance_always_at_a1(self):
        # a=1: every flippable proposal is accepted; chain visits many states
        _, chain = mcmc_sample(2, 1.0, (0, 0), SamplerConfig(sweeps=200, burn_in=0, seed=3),
                               return_chain=True)
        assert len(set(chain)) > 10

    def test_chi2_against_exact(self):
        from scipy.stats import chi2

        sweeps = 60_000
        _, chain = mcmc_sample(2, 0.5, (0, 0), SamplerConfig(sweeps=sweeps, burn_in=500, seed=7),
                               return_chain=True)
        target = exact_distribution(2, 0.5, (0, 0))
        counts = {}
        for k in chain:
            counts[k] = counts.get(k, 0) + 1
        n = len(chain)
        # thin to roughly independent samples for the chi-square dof count
        stat = 0.0
        for k, p in target.table.items():
            obs = counts.get(k, 0)
            stat += (obs - n * p) ** 2 / (n * p)
        # correlated sweeps inflate the statistic; test with a generous scale
        dof = len(target.table) - 1
        p_value = chi2.sf(stat / 10.0, dof)
        assert p_value > 0.001

    @pytest.mark.slow
    def test_chi2_million_sweeps(self):
        from scipy.stats import chi2

        _, chain = mcmc_sample(2, 0.5, (0, 0), SamplerConfig(sweeps=1_000_000, burn_in=1000, seed=11),
                               return_chain=True)
        target = exact_distribution(2, 0.5, (0, 0))
        counts = {}
        for k in chain:
            counts[k] = counts.get(k, 0) + 1
        n = len(chain)
        stat = sum((counts.get(k, 0) - n * p) ** 2 / (n * p) for k, p in target.table.items())
        p_value = chi2.sf(stat / 10.0, len(target.table) - 1)
        assert p_value > 0.001


class TestEdgeOccupation:
    def test_estimates_in_range_and_symmetric(self):
        samples = [mcmc_sample(2, 1.0, (0, 0), SamplerConfig(sweeps=40, burn_in=20, seed=s))
                   for s in range(24)]
        m1, se1 = edge_occupation_estimate(samples, "e1")
        m2, se2 = edge_occupation_estimate(samples, "e2")
        assert 0.0 <= m1 <= 1.0 and 0.0 <= m2 <= 1.0
        # c1 = c2 at rho=0, a=1 by symmetry
        assert abs(m1 - m2) < 5 * max(se1 + se2, 0.02)

    def test_exact_sector_mean_matches_oracle(self):
        d = exact_distribution(2, 0.5, (0, 0))
        expect = exact_edge_expectation(d, "e1")
        keys = list(d.table)
        probs = np.array([d.table[k] for k in keys])
        rng = np.random.default_rng(0)
        draws = rng.choice(len(keys), size=4000, p=probs)
        samples = [d.configs[keys[i]] for i in draws]
        mean, se = edge_occupation_estimate(samples, "e1")
        assert abs(mean - expect) < 4 * se + 1e-3

    def test_too_few_samples(self):
        d = exact_distribution(1, 1.0, (0, 0))
        cfg = next(iter(d.configs.values()))
        with pytest.raises(ValueError):
            edge_occupation_estimate([cfg], "e1")
