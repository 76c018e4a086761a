import json

import pytest

from fieldpf import cli


def base_config(**overrides):
    cfg = {
        "model": {"family": "noisy_voter", "graph": {"kind": "cycle", "n": 8},
                  "r": 1, "params": {"eps_mix": 0.3, "obs_flip": 0.2}},
        "partition": {"block_size": 2, "b": 1},
        "variants": ["bootstrap", "blocked", "enlarged"],
        "T": 3, "N": 200, "R": 2, "seed": 7,
    }
    cfg.update(overrides)
    return cfg


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


class TestSimulate:
    def test_record_counts(self, tmp_path):
        cfg = base_config(T=50)
        assert cli.cmd_simulate(cfg, tmp_path) == 0
        states = (tmp_path / "states.csv").read_text().strip().splitlines()
        obs = (tmp_path / "observations.csv").read_text().strip().splitlines()
        assert len(states) == 52 and len(obs) == 51     # header + records

    def test_zero_horizon(self, tmp_path):
        cfg = base_config(T=0)
        cli.cmd_simulate(cfg, tmp_path)
        assert len((tmp_path / "states.csv").read_text().strip().splitlines()) == 2

    def test_rerun_byte_identical(self, tmp_path):
        cfg = base_config(T=10)
        cli.cmd_simulate(cfg, tmp_path / "a")
        cli.cmd_simulate(cfg, tmp_path / "b")
        for name in ("states.csv", "observations.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_manifest_has_hashes(self, tmp_path):
        cli.cmd_simulate(base_config(T=2), tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert "config_hash" in manifest and "model_hash" in manifest


class TestRun:
    def test_schema_and_exit_code(self, tmp_path):
        cfg = base_config()
        cli.cmd_simulate(cfg, tmp_path)
        assert cli.cmd_run(cfg, tmp_path, workers=1) == 0
        lines = (tmp_path / "metrics.csv").read_text().splitlines()
        assert lines[0] == "# fieldpf-metrics v1"
        assert lines[1] == cli.CSV_SCHEMA
        # 3 variants x 3 steps x 8 sites x (2 reps + 1 agg)
        assert len(lines) == 2 + 3 * 3 * 8 * 3

    def test_missing_observations(self, tmp_path):
        with pytest.raises(cli.ConfigError):
            cli.cmd_run(base_config(), tmp_path / "empty")

    def test_worker_counts_byte_identical(self, tmp_path):
        cfg = base_config()
        for d in ("w1", "w8"):
            cli.cmd_simulate(cfg, tmp_path / d)
        cli.cmd_run(cfg, tmp_path / "w1", workers=1)
        cli.cmd_run(cfg, tmp_path / "w8", workers=8)
        assert (tmp_path / "w1" / "metrics.csv").read_bytes() == \
               (tmp_path / "w8" / "metrics.csv").read_bytes()

    def test_cap_exceeded_rows_skipped(self, tmp_path):
        cfg = base_config(cap=16)
        cli.cmd_simulate(cfg, tmp_path)
        assert cli.cmd_run(cfg, tmp_path) == 3
        body = (tmp_path / "metrics.csv").read_text()
        assert "skipped:cap" in body

    def test_bound_columns_empty_under_hypothesis_gate(self, tmp_path):
        # discrete kernels can never exceed eps0, so bound cells stay empty
        cfg = base_config()
        cli.cmd_simulate(cfg, tmp_path)
        cli.cmd_run(cfg, tmp_path)
        for line in (tmp_path / "metrics.csv").read_text().splitlines()[2:]:
            cells = line.split(",")
            assert cells[9] == "" and cells[10] == ""
            assert cells[11].startswith(("ok", "rep:"))

    def test_replicate_rows_present(self, tmp_path):
        cfg = base_config()
        cli.cmd_simulate(cfg, tmp_path)
        cli.cmd_run(cfg, tmp_path)
        body = (tmp_path / "metrics.csv").read_text()
        assert "rep:0" in body and "rep:1" in body

    def test_main_entrypoint(self, tmp_path):
        cfg_path = write_cfg(tmp_path, base_config())
        assert cli.main(["simulate", str(cfg_path), "--out", str(tmp_path)]) == 0
        assert cli.main(["run", str(cfg_path), "--out", str(tmp_path)]) == 0

    def test_main_bad_config(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert cli.main(["run", str(p), "--out", str(tmp_path)]) == 2

    def test_seed_required(self, tmp_path):
        cfg = base_config()
        del cfg["seed"]
        cli.cmd_simulate(base_config(), tmp_path)
        with pytest.raises(cli.ConfigError):
            cli.cmd_run(cfg, tmp_path)

    def test_ensemble_snapshots(self, tmp_path):
        from fieldpf.fileio import load_ensemble
        cfg = base_config(save_ensembles=True, variants=["blocked", "enlarged"])
        cli.cmd_simulate(cfg, tmp_path)
        cli.cmd_run(cfg, tmp_path)
        e = load_ensemble(tmp_path / "ensemble_blocked_b0.txt", [2] * 8)
        assert e.particles.shape == (cfg["N"], 8)
        assert (tmp_path / "ensemble_enlarged_b1.txt").exists()


class TestSweep:
    def test_single_point_equals_run(self, tmp_path):
        cfg = base_config(variants=["enlarged"])
        cli.cmd_simulate(cfg, tmp_path / "run")
        cli.cmd_simulate(cfg, tmp_path / "sweep")
        cli.cmd_run(cfg, tmp_path / "run")
        cfg_sweep = dict(cfg, sweep={})
        cli.cmd_sweep(cfg_sweep, tmp_path / "sweep")
        a = (tmp_path / "run" / "metrics.csv").read_bytes()
        b = (tmp_path / "sweep" / "metrics.csv").read_bytes()
        assert a == b

    def test_iso_budget_within_ten_percent(self, tmp_path):
        cfg = base_config(variants=["enlarged"],
                          sweep={"b": [0, 1], "block_size": [2, 1], "budget": 8000})
        cli.cmd_simulate(cfg, tmp_path)
        cli.cmd_sweep(cfg, tmp_path, workers=2)
        lines = (tmp_path / "metrics.csv").read_text().splitlines()[2:]
        seen = set()
        for line in lines:
            c = line.split(",")
            seen.add((int(c[3]), int(c[4]), int(c[5])))
        for b, n, nblocks in seen:
            block = 8 // nblocks
            kbar = min(8, block + 2 * b)
            assert abs(n * kbar * nblocks - 8000) <= 0.1 * 8000

    def test_bad_point_recorded_not_fatal(self, tmp_path):
        cfg = base_config(variants=["enlarged"], sweep={"m": [1, 2]})
        del cfg["partition"]["block_size"]
        cfg["partition"] = {"blocks": [[0, 1], [2, 3], [4, 5], [6, 7]], "b": 0}
        cli.cmd_simulate(cfg, tmp_path)
        rc = cli.cmd_sweep(cfg, tmp_path)
        body = (tmp_path / "metrics.csv").read_text()
        assert rc == 3 and "skipped:" in body


class TestBounds:
    def test_hand_values_through_cli(self, tmp_path):
        cfg = {"rows": [
            {"eps": 0.99, "kappa": 0.9, "r": 1, "delta": 1, "set_size": 1,
             "d_boundary": 0, "b": 2, "delta_k": 1, "delta_kbar": 1,
             "kbar_inf": 1, "n_particles": 10000},
            {"eps": 0.5, "r": 1, "delta": 3, "set_size": 1, "d_boundary": 0},
            {"eps": 0.99, "r": 1, "delta": 1, "set_size": 1, "d_boundary": "inf"},
        ]}
        assert cli.cmd_bounds(cfg, tmp_path) == 0
        lines = (tmp_path / "bounds.csv").read_text().splitlines()
        row1 = lines[1].split(",")
        assert float(row1[-4]) == pytest.approx(0.237311219618899620, abs=1e-12)
        assert float(row1[-3]) == pytest.approx(1.153162408939594058, abs=1e-12)
        assert float(row1[-2]) == pytest.approx(0.142030318867489844, abs=1e-12)
        assert "hypothesis-not-satisfied" in lines[2]
        assert float(lines[3].split(",")[-4]) == 0.0
