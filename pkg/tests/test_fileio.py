import numpy as np
import pytest

import fieldpf as fp
from fieldpf import fileio


class TestGraphRoundTrip:
    def test_explicit_edges(self, cycle8):
        d = fileio.graph_to_dict(cycle8)
        g2 = fileio.graph_from_dict(d)
        assert (g2.dist == cycle8.dist).all()

    def test_lattice_shorthands(self):
        assert fileio.graph_from_dict({"kind": "cycle", "n": 6}).num_vertices == 6
        assert fileio.graph_from_dict({"kind": "path", "n": 4}).dist[0, 3] == 3
        assert fileio.graph_from_dict({"kind": "grid", "dims": [2, 3]}).num_vertices == 6

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            fileio.graph_from_dict({"kind": "torus", "n": 4})


class TestPartitionRoundTrip:
    def test_blocks(self, cycle8):
        ep = fp.enlarge_partition(cycle8, fp.regular_partition(cycle8, 2), 1)
        d = fileio.partition_to_dict(ep)
        ep2 = fileio.partition_from_dict(cycle8, d)
        assert ep2.b == 1
        for a, b in zip(ep.enlarged_blocks, ep2.enlarged_blocks):
            assert (a == b).all()

    def test_block_size_with_offset(self, cycle8):
        ep = fileio.partition_from_dict(cycle8, {"block_size": 4, "offset": 2, "b": 0})
        assert sorted(tuple(sorted(K)) for K in ep.blocks) == [(0, 1, 6, 7), (2, 3, 4, 5)]

    def test_b_override(self, cycle8):
        ep = fileio.partition_from_dict(cycle8, {"block_size": 2, "b": 0}, b_override=2)
        assert ep.b == 2

    def test_missing_spec(self, cycle8):
        with pytest.raises(ValueError):
            fileio.partition_from_dict(cycle8, {"b": 1})


class TestModelRoundTrip:
    def test_family(self):
        d = {"graph": {"kind": "cycle", "n": 8}, "r": 1,
             "family": "noisy_voter", "params": {"eps_mix": 0.4, "obs_flip": 0.2}}
        m = fileio.model_from_dict(d)
        eps, kappa = fp.verify_mixing(m)
        assert eps == pytest.approx(0.2)

    def test_explicit_tables(self, voter4):
        d = fileio.model_to_dict(voter4)
        m2 = fileio.model_from_dict(d)
        for a, b in zip(voter4.trans, m2.trans):
            assert np.abs(a - b).max() == 0

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            fileio.model_from_dict({"graph": {"kind": "path", "n": 2}, "family": "nope"})


class TestStepRecords:
    def test_round_trip(self, tmp_path, voter8):
        states, obs = fp.simulate_trajectory(voter8, None, 6, np.random.default_rng(0))
        p = tmp_path / "states.csv"
        fileio.save_steps_csv(p, states)
        assert (fileio.load_steps_csv(p) == states).all()

    def test_bad_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValueError):
            fileio.load_steps_csv(p)


class TestEnsembleRecords:
    def test_round_trip(self, tmp_path, voter8):
        particles = np.random.default_rng(1).integers(0, 2, (20, 8))
        e = fp.Ensemble(particles, voter8.state_sizes)
        p = tmp_path / "ens.txt"
        fileio.save_ensemble(p, e)
        e2 = fileio.load_ensemble(p, voter8.state_sizes)
        assert (e2.particles == particles).all()
