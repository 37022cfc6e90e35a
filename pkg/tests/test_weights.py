import numpy as np
import pytest

from dimershuffle.weights import (
    ModelParams,
    WeightField,
    creation_probabilities,
    face_delta,
    spider_step,
    two_periodic_init,
)

A_, B_, C_, D_ = 0, 1, 2, 3


class TestModelParams:
    def test_c_value(self):
        assert ModelParams(1.0).c == pytest.approx(0.5)
        a = 0.5
        assert ModelParams(a).c == pytest.approx(a / (1 + a * a))

    def test_c_below_half(self):
        for a in (0.1, 0.33, 0.99):
            assert ModelParams(a).c < 0.5

    def test_rejects_bad_a(self):
        for a in (0.0, -0.3, 1.5):
            with pytest.raises(ValueError):
                ModelParams(a)


class TestTwoPeriodicInit:
    def test_a_face_tuple(self):
        w = two_periodic_init(2, ModelParams(0.7))
        assert np.allclose(w.w[0, 0], [0.7] * 4)
        assert np.allclose(w.w[2, 2], [0.7] * 4)

    def test_one_face_tuple(self):
        w = two_periodic_init(2, ModelParams(0.7))
        assert np.allclose(w.w[1, 1], [1.0] * 4)
        assert np.allclose(w.w[3, 1], [1.0] * 4)

    def test_odd_face_alternates(self):
        w = two_periodic_init(2, ModelParams(0.7))
        # odd face (1,0): top edge from '1' face (1,1), right from 'a' (2,0),
        # bottom from '1' (1,-1), left from 'a' (0,0)
        assert np.allclose(w.w[1, 0], [1.0, 0.7, 1.0, 0.7])

    def test_all_ones_at_a1(self):
        w = two_periodic_init(3, ModelParams(1.0))
        assert np.allclose(w.w, 1.0)

    def test_consistency(self):
        w = two_periodic_init(3, ModelParams(0.4))
        assert w.consistency_defect() < 1e-15


class TestFaceDelta:
    def test_values(self):
        w = two_periodic_init(2, ModelParams(1.0))
        assert face_delta(w, 0, 0) == pytest.approx(2.0)
        a = 0.6
        w = two_periodic_init(2, ModelParams(a))
        assert face_delta(w, 0, 0) == pytest.approx(2 * a * a)
        assert face_delta(w, 1, 1) == pytest.approx(2.0)

    def test_direct_arithmetic(self):
        w = two_periodic_init(1, ModelParams(1.0))
        w.w[0, 0] = [2.0, 3.0, 4.0, 5.0]
        assert face_delta(w, 0, 0) == pytest.approx(23.0)


class TestSpiderStep:
    def test_uniform_field(self):
        w = two_periodic_init(2, ModelParams(1.0))
        w1 = spider_step(w)
        assert np.allclose(w1.w, 0.5)

    def test_w1_display(self):
        a = 0.37
        w0 = two_periodic_init(2, ModelParams(a))
        w1 = spider_step(w0)
        # (i,j) = (0,0) mod 2 -> (1/(2a))(1,1,1,1); (1,1) mod 2 -> (1/2)(1,1,1,1)
        assert np.allclose(w1.w[0, 0], 1 / (2 * a))
        assert np.allclose(w1.w[2, 0], 1 / (2 * a))
        assert np.allclose(w1.w[1, 1], 0.5)
        # equivalently (1,0) faces carry (1/2)(1, 1/a, 1, 1/a)
        assert np.allclose(w1.w[1, 0], [0.5, 0.5 / a, 0.5, 0.5 / a])
        assert np.allclose(w1.w[0, 1], [0.5 / a, 0.5, 0.5 / a, 0.5])
        assert w1.consistency_defect() < 1e-14

    def test_w1_is_role_swapped_w0(self):
        # up to one constant, w_1 equals w_0 with 'a' and '1' faces interchanged
        a = 0.6
        w0 = two_periodic_init(2, ModelParams(a))
        w1 = spider_step(w0)
        swapped = np.roll(w0.w, (1, 1), axis=(0, 1))
        ratio = w1.w / swapped
        assert np.allclose(ratio, ratio.flat[0], rtol=1e-14)

    def test_two_step_projective_periodicity(self):
        for a in (1.0, 0.5, 0.23):
            p = ModelParams(a)
            w0 = two_periodic_init(2, p)
            w2 = spider_step(spider_step(w0))
            shifted = np.roll(w0.w, (1, 1), axis=(0, 1))  # w0 translated by (1,1)
            assert np.allclose(w2.w, 2 * p.c * shifted, rtol=1e-14)

    def test_positivity_preserved(self):
        rng = np.random.default_rng(0)
        w = two_periodic_init(2, ModelParams(0.8))
        w = WeightField(w.L, 0, np.exp(rng.normal(size=w.w.shape)))
        # make the random field edge-consistent before stepping
        w.w[:, :, A_] = np.roll(w.w[:, :, C_], -1, axis=1)
        w.w[:, :, B_] = np.roll(w.w[:, :, D_], -1, axis=0)
        for _ in range(6):
            w = spider_step(w)
            assert np.all(w.w > 0)
            assert w.consistency_defect() < 1e-12


class TestCreationProbabilities:
    def test_uniform(self):
        w = two_periodic_init(2, ModelParams(1.0))
        ph, pv = creation_probabilities(w, 0, 0)
        assert ph == pytest.approx(0.5)
        assert pv == pytest.approx(0.5)

    def test_substitution(self):
        w = two_periodic_init(1, ModelParams(1.0))
        a = 0.42
        w.w[0, 0] = [a, 1.0, a, 1.0]
        ph, pv = creation_probabilities(w, 0, 0)
        assert ph == pytest.approx(a * a / (1 + a * a))
        assert pv == pytest.approx(1 / (1 + a * a))

    def test_sum_to_one(self):
        rng = np.random.default_rng(1)
        w = two_periodic_init(2, ModelParams(0.9))
        w.w[:] = np.exp(rng.normal(size=w.w.shape))
        ph, pv = creation_probabilities(w)
        assert np.allclose(ph + pv, 1.0, rtol=0, atol=1e-15)

    def test_k0_is_fair_coin_and_k1_table(self):
        # at k=0 every even face creates 50/50; at k=1 odd faces split by type
        a = 0.6
        w0 = two_periodic_init(2, ModelParams(a))
        ph0, _ = creation_probabilities(w0)
        assert ph0[0, 0] == pytest.approx(0.5)
        assert ph0[1, 1] == pytest.approx(0.5)
        w1 = spider_step(w0)
        ph1, _ = creation_probabilities(w1)
        assert ph1[1, 0] == pytest.approx(a * a / (1 + a * a))
        assert ph1[0, 1] == pytest.approx(1 / (1 + a * a))
