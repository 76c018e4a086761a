"""Experiment harness: deterministic simulation, filter runs, sweeps, bounds.

Subcommands (each takes one JSON config path plus overrides):

  fieldpf simulate CONFIG --out DIR [--seed S] [--cap C]
  fieldpf run      CONFIG --out DIR [--seed S] [--workers W] [--cap C] [--timing]
  fieldpf sweep    CONFIG --out DIR [--seed S] [--workers W] [--cap C] [--timing]
  fieldpf bounds   CONFIG --out DIR

Run/sweep config keys: model, partition (or schedule), variants, T, N, R,
seed, sites, observations (path; defaults to <out>/observations.csv), sweep
(axes: b, N, block_size, m; optional budget = N * sum of enlarged block
sizes held roughly constant across points).

Metrics CSV schema (pinned; first line is a comment carrying the version):

  step,site_set,variant,b,N,c,bias,variance,total,bias_bound,variance_bound,status,seed,wall_ms

Every (step, site_set) gets one row per replicate (status rep:<i>) plus one
aggregate row (status ok / ok-no-bounds); skipped sweep points appear as rows
with status skipped:<reason>, never silently.  Identical config+seed produce
byte-identical CSVs at any worker count: wall-clock timings go to the
manifest (the only file with a timestamp) unless --timing forces the wall_ms
column, which breaks byte-reproducibility by design.

Exit codes: 0 success, 2 config error, 3 partial failure (skipped rows).
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .exact import CapExceeded, DEFAULT_JOINT_CAP, exact_filter_run, joint_from_init
from .fileio import (canonical_json, model_from_dict, partition_from_dict,
                     save_steps_csv, load_steps_csv, sha256_hex)
from .metrics import (BoundParams, HypothesisNotSatisfied, bias_bound,
                      bias_variance_report, bound_params_from_instance,
                      corollary_bound, variance_bound)
from .models import simulate_trajectory
from .particles import FilterSpec

CSV_SCHEMA = ("step,site_set,variant,b,N,c,bias,variance,total,"
              "bias_bound,variance_bound,status,seed,wall_ms")
SCHEMA_VERSION = "fieldpf-metrics v1"


class ConfigError(ValueError):
    pass


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _site_label(site_set) -> str:
    return "|".join(str(v) for v in site_set)


def write_metrics_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {SCHEMA_VERSION}\n")
        fh.write(CSV_SCHEMA + "\n")
        for r in rows:
            fh.write(",".join(_fmt(r.get(k, "")) for k in CSV_SCHEMA.split(",")) + "\n")


def _write_manifest(out_dir: Path, command: str, cfg: dict, seed, outputs, extra=None):
    manifest = {
        "schema": "fieldpf-manifest v1",
        "command": command,
        "config_hash": sha256_hex(canonical_json(cfg)),
        "seed": seed,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest.update(extra)
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _require(cfg: dict, *keys):
    for k in keys:
        if k not in cfg:
            raise ConfigError(f"config missing required key {k!r}")


def _seed_of(cfg, override) -> int:
    if override is not None:
        return int(override)
    if "seed" not in cfg:
        raise ConfigError("config must carry an explicit seed (no wall-clock seeding)")
    return int(cfg["seed"])


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: dict, out_dir, seed=None, cap=None) -> int:
    _require(cfg, "model", "T")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _seed_of(cfg, seed)
    model = model_from_dict(cfg["model"])
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    states, obs = simulate_trajectory(model, cfg.get("init"), int(cfg["T"]), rng)
    save_steps_csv(out_dir / "states.csv", states, first_step=0)
    save_steps_csv(out_dir / "observations.csv", obs, first_step=1)
    _write_manifest(out_dir, "simulate", cfg, seed,
                    [out_dir / "states.csv", out_dir / "observations.csv"],
                    {"model_hash": sha256_hex(canonical_json(cfg["model"]))})
    return 0


# ---------------------------------------------------------------------------
# run / sweep
# ---------------------------------------------------------------------------

def _build_schedule(g, cfg, b_override=None, block_size=None, m=None):
    """Partition schedule from a config; sweep overrides replace b / block size /
    schedule length (m offset partitions on 1-d lattices)."""
    if m is not None and m > 1:
        if g.lattice_dims is None or len(g.lattice_dims) != 1:
            raise ConfigError("schedule length m > 1 needs a 1-d lattice graph")
        size = block_size or cfg.get("partition", {}).get("block_size")
        if not size:
            raise ConfigError("m > 1 sweep needs a block_size partition spec")
        return [partition_from_dict(
                    g, {"block_size": size, "offset": round(i * size / m)},
                    b_override=b_override if b_override is not None
                    else cfg.get("partition", {}).get("b", 0))
                for i in range(m)]
    if "schedule" in cfg:
        return [partition_from_dict(g, d, b_override=b_override) for d in cfg["schedule"]]
    _require(cfg, "partition")
    pcfg = dict(cfg["partition"])
    if block_size is not None:
        pcfg = {"block_size": block_size, "b": pcfg.get("b", 0)}
    return [partition_from_dict(g, pcfg, b_override=b_override)]


def _tasks_for(cfg, model, sweep_point=None) -> list:
    """One task per (variant, sweep point): everything a worker needs."""
    sp = sweep_point or {}
    n_particles = int(sp.get("N", cfg.get("N", 1000)))
    tasks = []
    for variant in cfg.get("variants", ["blocked"]):
        task = {"variant": variant, "N": n_particles, "sweep": dict(sp)}
        if variant == "bootstrap":
            task.update(b="", c=1, schedule=None)
            tasks.append(task)
            continue
        b = sp.get("b", None)
        if variant == "blocked":
            b = 0
        schedule = _build_schedule(model.graph, cfg, b_override=b,
                                   block_size=sp.get("block_size"), m=sp.get("m"))
        if "budget" in sp:
            work = sum(len(Kb) for Kb in schedule[0].enlarged_blocks)
            task["N"] = max(2, round(sp["budget"] / work))
        task.update(b=schedule[0].b, c=schedule[0].num_blocks, schedule=schedule)
        tasks.append(task)
    return tasks


def _bound_columns(model, schedule, sites, n_particles):
    """(bias_bound, variance_bound) per site set, or empty strings when the
    hypothesis fails or the set spans blocks."""
    out = {}
    p = schedule[0]
    for I in sites:
        params = bound_params_from_instance(model, p, I, n_particles)
        bb = vb = ""
        try:
            if params.d_boundary is not None:
                bb = bias_bound(params)
        except HypothesisNotSatisfied:
            pass
        try:
            vb = variance_bound(params)
        except HypothesisNotSatisfied:
            pass
        out[tuple(I)] = (bb, vb)
    return out


def _run_task(task, cfg, model, observations, exact_filters, seed, cap) -> tuple:
    t0 = time.perf_counter()
    sites = cfg.get("sites")
    if sites in (None, "singletons"):
        sites = [[v] for v in range(model.num_vertices)]
    n_rep = int(cfg.get("R", 2))
    spec = FilterSpec(
        variant=task["variant"] if task["variant"] != "blocked" else "enlarged",
        n_particles=task["N"], seed=seed, schedule=task["schedule"])
    report = bias_variance_report(model, spec, observations, exact_filters,
                                  n_rep, sites=sites, cap=cap)
    if task.get("snapshot_path"):
        from .fileio import save_ensemble
        from .particles import run_filter
        final = run_filter(model, spec, cfg.get("init"), observations,
                           keep_history=False)
        save_ensemble(task["snapshot_path"], final)
    bounds = (_bound_columns(model, task["schedule"], sites, task["N"])
              if task["schedule"] else {})
    rows = []
    for r in report:
        key = tuple(r["site_set"])
        bb, vb = bounds.get(key, ("", ""))
        if r["replicate"] is not None:
            status = f"rep:{r['replicate']}"
            bb = vb = ""
        else:
            status = "ok" if (bb != "" or vb != "") else "ok-no-bounds"
        rows.append({
            "step": r["step"], "site_set": _site_label(r["site_set"]),
            "variant": task["variant"], "b": task["b"], "N": task["N"],
            "c": task["c"], "bias": r["bias"], "variance": r["variance"],
            "total": r["total"], "bias_bound": bb, "variance_bound": vb,
            "status": status, "seed": seed, "wall_ms": None,
        })
    return rows, (time.perf_counter() - t0) * 1000.0


def _skip_rows(task, seed, reason) -> list:
    reason = str(reason).replace(",", ";")      # keep the status cell CSV-safe
    return [{"step": "", "site_set": "", "variant": task["variant"], "b": task["b"],
             "N": task["N"], "c": task["c"], "bias": "", "variance": "", "total": "",
             "bias_bound": "", "variance_bound": "", "status": f"skipped:{reason}",
             "seed": seed, "wall_ms": None}]


def _execute_tasks(tasks, cfg, model, observations, seed, cap, workers, timing):
    try:
        mu = joint_from_init(model, cfg.get("init"), cap=cap)
        exact_filters = exact_filter_run(model, mu, observations, cap=cap)
        oracle_error = None
    except CapExceeded as exc:
        exact_filters, oracle_error = None, str(exc)

    def worker(task):
        if oracle_error is not None:
            return _skip_rows(task, seed, f"cap:{oracle_error}"), 0.0
        try:
            return _run_task(task, cfg, model, observations, exact_filters, seed, cap)
        except CapExceeded as exc:
            return _skip_rows(task, seed, f"cap:{exc}"), 0.0
        except ConfigError as exc:
            return _skip_rows(task, seed, str(exc)), 0.0

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, tasks))
    else:
        results = [worker(t) for t in tasks]

    rows, timings = [], []
    for task, (task_rows, ms) in zip(tasks, results):
        if timing:
            for r in task_rows:
                if not str(r["status"]).startswith("rep:"):
                    r["wall_ms"] = ms
        timings.append({"variant": task["variant"], "b": task["b"], "N": task["N"],
                        "wall_ms": ms,
                        "work_per_step": task["N"] * (
                            sum(len(Kb) for Kb in task["schedule"][0].enlarged_blocks)
                            if task["schedule"] else model.num_vertices)})
        rows.extend(task_rows)
    return rows, timings


def _load_observations(cfg, out_dir) -> np.ndarray:
    path = Path(cfg.get("observations", Path(out_dir) / "observations.csv"))
    if not path.exists():
        raise ConfigError(f"observations file not found: {path} (run `simulate` first)")
    obs = load_steps_csv(path)
    if "T" in cfg:
        obs = obs[: int(cfg["T"])]
    return obs


def cmd_run(cfg: dict, out_dir, seed=None, workers: int = 1, cap=None,
            timing: bool = False) -> int:
    _require(cfg, "model")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _seed_of(cfg, seed)
    cap = int(cfg.get("cap", DEFAULT_JOINT_CAP)) if cap is None else int(cap)
    model = model_from_dict(cfg["model"])
    observations = _load_observations(cfg, out_dir)
    tasks = _tasks_for(cfg, model)
    if cfg.get("save_ensembles"):
        for task in tasks:
            task["snapshot_path"] = out_dir / f"ensemble_{task['variant']}_b{task['b']}.txt"
    rows, timings = _execute_tasks(tasks, cfg, model, observations, seed, cap,
                                   workers, timing)
    write_metrics_csv(out_dir / "metrics.csv", rows)
    _write_manifest(out_dir, "run", cfg, seed, [out_dir / "metrics.csv"],
                    {"timings": timings})
    return 3 if any(str(r["status"]).startswith("skipped") for r in rows) else 0


def _sweep_points(cfg) -> list:
    sweep = cfg.get("sweep", {})
    axes = {k: sweep[k] for k in ("b", "N", "block_size", "m") if k in sweep}
    if not axes:
        return [{}]
    keys = sorted(axes)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]
    if "budget" in sweep:
        for p in points:
            p["budget"] = sweep["budget"]
    return points


def cmd_sweep(cfg: dict, out_dir, seed=None, workers: int = 1, cap=None,
              timing: bool = False) -> int:
    _require(cfg, "model")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _seed_of(cfg, seed)
    cap = int(cfg.get("cap", DEFAULT_JOINT_CAP)) if cap is None else int(cap)
    model = model_from_dict(cfg["model"])
    observations = _load_observations(cfg, out_dir)
    tasks = []
    for point in _sweep_points(cfg):
        try:
            tasks.extend(_tasks_for(cfg, model, sweep_point=point))
        except ConfigError as exc:
            tasks.append({"variant": "?", "N": point.get("N", ""), "b": point.get("b", ""),
                          "c": "", "schedule": None, "_bad": str(exc), "sweep": point})
    good = [t for t in tasks if "_bad" not in t]
    rows, timings = _execute_tasks(good, cfg, model, observations, seed, cap,
                                   workers, timing)
    for t in tasks:
        if "_bad" in t:
            rows.extend(_skip_rows(t, seed, t["_bad"]))
    write_metrics_csv(out_dir / "metrics.csv", rows)
    _write_manifest(out_dir, "sweep", cfg, seed, [out_dir / "metrics.csv"],
                    {"timings": timings})
    return 3 if any(str(r["status"]).startswith("skipped") for r in rows) else 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

_BOUND_FIELDS = ("eps", "kappa", "r", "delta", "delta_k", "delta_kbar", "k_inf",
                 "kbar_inf", "n_particles", "set_size", "d_boundary", "b")


def cmd_bounds(cfg: dict, out_dir) -> int:
    _require(cfg, "rows")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for raw in cfg["rows"]:
        d = dict(raw)
        if str(d.get("d_boundary")) in ("inf", "Infinity"):
            d["d_boundary"] = float("inf")
        params = BoundParams(**{k: d[k] for k in _BOUND_FIELDS if k in d})
        cells, notes = {}, []
        for name, fn in (("bias_bound", bias_bound),
                         ("variance_bound", variance_bound),
                         ("corollary_bound", corollary_bound)):
            try:
                cells[name] = fn(params)
            except HypothesisNotSatisfied:
                cells[name] = ""
                notes.append(f"{name}:hypothesis-not-satisfied")
            except ValueError:
                cells[name] = ""          # fields missing for this calculator
        status = "ok" if not notes else ";".join(notes)
        lines.append([d.get(k, "") for k in _BOUND_FIELDS]
                     + [cells["bias_bound"], cells["variance_bound"],
                        cells["corollary_bound"], status])
    path = out_dir / "bounds.csv"
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_BOUND_FIELDS) + ",bias_bound,variance_bound,corollary_bound,status\n")
        for line in lines:
            fh.write(",".join(_fmt(x) for x in line) + "\n")
    _write_manifest(out_dir, "bounds", cfg, cfg.get("seed", 0), [path])
    return 0


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fieldpf", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "run", "sweep", "bounds"):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--cap", type=int, default=None)
        p.add_argument("--timing", action="store_true",
                       help="write wall_ms into the CSV (breaks byte-reproducibility)")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, args.seed, args.cap)
        if args.command == "run":
            return cmd_run(cfg, args.out, args.seed, args.workers, args.cap, args.timing)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out, args.seed, args.workers, args.cap, args.timing)
        return cmd_bounds(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
