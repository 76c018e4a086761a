import math

import numpy as np
import pytest

import fieldpf as fp


class TestVerifyMixing:
    def test_uniform_binary(self, cycle8):
        m = fp.noisy_voter_model(cycle8, eps_mix=1.0, obs_flip=0.5)
        eps, kappa = fp.verify_mixing(m)
        assert eps == pytest.approx(0.5, abs=1e-15)
        assert kappa == pytest.approx(0.5, abs=1e-15)

    def test_two_level_entries(self, cycle8):
        # eps_mix = 0.4 puts every transition entry at 0.2 or 0.8
        m = fp.noisy_voter_model(cycle8, eps_mix=0.4, obs_flip=0.2)
        eps, kappa = fp.verify_mixing(m)
        assert eps == pytest.approx(min(0.2, 1 / 0.8), abs=1e-15)
        assert kappa == pytest.approx(0.2, abs=1e-15)

    def test_entries_strictly_bounded(self, voter8):
        eps, kappa = fp.verify_mixing(voter8)
        for t in voter8.trans:
            assert t.min() >= eps and t.max() <= 1 / eps
        for o in voter8.obs:
            assert o.min() >= kappa and o.max() <= 1 / kappa

    def test_zero_entry_rejected_at_construction(self):
        g = fp.make_path(1)
        with pytest.raises(ValueError):
            fp.LocalModel(g, 1, [np.array([[1.0, 0.0], [0.5, 0.5]])],
                          [np.array([[0.5, 0.5], [0.5, 0.5]])])


class TestMixtureKernel:
    def test_full_mixing_is_uniform(self):
        table = fp.mixture_kernel(np.array([0, 1, 1]), 2, 1.0)
        assert np.allclose(table, 0.5)

    def test_majority_rule_entries(self):
        table = fp.mixture_kernel(np.array([0, 1]), 2, 0.2)
        assert sorted(np.unique(np.round(table, 12)).tolist()) == [0.1, 0.9]

    def test_lower_bound(self):
        table = fp.mixture_kernel(np.arange(4) % 3, 3, 0.3)
        assert table.min() >= 0.3 / 3 - 1e-15

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            fp.mixture_kernel(np.array([0]), 2, 0.0)
        with pytest.raises(ValueError):
            fp.mixture_kernel(np.array([0]), 2, 1.5)


class TestTables:
    def test_rows_sum_to_one(self, voter8):
        for t in voter8.trans:
            assert np.abs(t.sum(axis=1) - 1).max() < 1e-12
        for o in voter8.obs:
            assert np.abs(o.sum(axis=1) - 1).max() < 1e-12

    def test_autoregressive_rows_sum_to_one(self, cycle8):
        m = fp.autoregressive_model(cycle8, levels=4)
        for t in m.trans:
            assert np.abs(t.sum(axis=1) - 1).max() < 1e-12

    def test_locality_by_perturbation(self, voter8):
        # changing a site outside N(v) must leave the conditional row untouched
        rng = np.random.default_rng(0)
        for v in range(voter8.num_vertices):
            nbr = set(voter8.neighborhoods[v].tolist())
            x = rng.integers(0, 2, size=(1, 8))
            row = voter8.trans_rows(x, v)[0]
            for w in range(8):
                if w in nbr:
                    continue
                x2 = x.copy()
                x2[0, w] = 1 - x2[0, w]
                assert voter8.trans_rows(x2, v)[0] == row


class TestSampling:
    def test_single_site_matches_categorical(self):
        g = fp.make_path(1)
        m = fp.LocalModel(g, 1, [np.array([[0.3, 0.7], [0.6, 0.4]])],
                          [np.array([[0.9, 0.1], [0.2, 0.8]])])
        x = np.zeros((100000, 1), dtype=np.int64)
        out = fp.sample_transition(m, x, np.random.default_rng(0))
        freq = out.mean()
        se = math.sqrt(0.7 * 0.3 / 100000)
        assert abs(freq - 0.7) < 3 * se

    def test_uniform_kernel_sites_uniform(self, cycle8):
        m = fp.noisy_voter_model(cycle8, eps_mix=1.0, obs_flip=0.5)
        x = np.zeros((100000, 8), dtype=np.int64)
        out = fp.sample_transition(m, x, np.random.default_rng(1))
        se = math.sqrt(0.25 / 100000)
        assert np.abs(out.mean(axis=0) - 0.5).max() < 3 * se

    def test_near_deterministic_rule_followed(self, cycle8):
        eps_mix = 0.1
        m = fp.noisy_voter_model(cycle8, eps_mix=eps_mix, obs_flip=0.2)
        x = np.ones((100000, 8), dtype=np.int64)   # all-ones: majority says stay 1
        out = fp.sample_transition(m, x, np.random.default_rng(2))
        p_follow = 1 - eps_mix / 2
        se = math.sqrt(p_follow * (1 - p_follow) / 100000)
        assert abs(out[:, 3].mean() - p_follow) < 3 * se

    def test_transition_frequencies_match_table(self, voter4):
        # one-step frequencies against the conditional row, batched draws
        x = np.tile(np.array([0, 1, 1, 0]), (100000, 1))
        out = fp.sample_transition(voter4, x, np.random.default_rng(3))
        for v in range(4):
            row = voter4.trans[v][voter4.trans_rows(x[:1], v)[0]]
            freq = out[:, v].mean()
            se = math.sqrt(row[1] * row[0] / 100000)
            assert abs(freq - row[1]) < 3 * se

    def test_determinism(self, voter8):
        x = np.random.default_rng(4).integers(0, 2, size=(50, 8))
        a = fp.sample_transition(voter8, x, np.random.default_rng(9))
        b = fp.sample_transition(voter8, x, np.random.default_rng(9))
        assert (a == b).all()


class TestObservations:
    def test_empty_set_logweight(self, voter8):
        x = np.zeros(8, dtype=np.int64)
        y = np.zeros(8, dtype=np.int64)
        assert fp.obs_logweight(voter8, x, y, J=[]) == 0.0

    def test_single_site(self):
        g = fp.make_path(1)
        m = fp.LocalModel(g, 1, [np.array([[0.5, 0.5], [0.5, 0.5]])],
                          [np.array([[0.9, 0.1], [0.1, 0.9]])])
        assert fp.obs_logweight(m, np.array([0]), np.array([0])) == pytest.approx(math.log(0.9))

    def test_two_site_product(self):
        g = fp.make_path(2)
        obs = [np.array([[0.9, 0.1], [0.1, 0.9]]), np.array([[0.2, 0.8], [0.8, 0.2]])]
        trans = [np.array([[0.5, 0.5]] * 4)] * 2
        m = fp.LocalModel(g, 1, trans, obs)
        lw = fp.obs_logweight(m, np.array([0, 0]), np.array([0, 0]), J=[0, 1])
        assert lw == pytest.approx(math.log(0.18))

    def test_sample_observation_range(self, voter8):
        x = np.zeros(8, dtype=np.int64)
        y = fp.sample_observation(voter8, x, np.random.default_rng(0))
        assert y.shape == (8,) and ((y == 0) | (y == 1)).all()


class TestSimulate:
    def test_zero_steps(self, voter8):
        states, obs = fp.simulate_trajectory(voter8, None, 0, np.random.default_rng(0))
        assert states.shape == (1, 8) and obs.shape == (0, 8)

    def test_seed_determinism(self, voter8):
        a = fp.simulate_trajectory(voter8, None, 10, np.random.default_rng(42))
        b = fp.simulate_trajectory(voter8, None, 10, np.random.default_rng(42))
        assert (a[0] == b[0]).all() and (a[1] == b[1]).all()

    def test_point_init(self, voter8):
        x0 = np.ones(8, dtype=np.int64)
        states, _ = fp.simulate_trajectory(voter8, x0, 3, np.random.default_rng(0))
        assert (states[0] == x0).all()

    def test_negative_horizon(self, voter8):
        with pytest.raises(ValueError):
            fp.simulate_trajectory(voter8, None, -1, np.random.default_rng(0))
