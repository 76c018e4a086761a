"""Serialization of graphs, partitions, models, trajectories, and ensembles.

Structured-text documents are JSON.  Schemas:

  graph:      {"vertices": n, "edges": [[u, v], ...]}
              or a lattice shorthand {"kind": "path"|"cycle"|"grid", "n": int}
              (grid takes "dims": [d0, d1, ...])
  partition:  {"blocks": [[...], ...], "b": int}
              or {"block_size": s, "b": int, "offset": o} tiled on a lattice
  model:      {"graph": <graph>, "r": int, "family": name, "params": {...}}
              or {"graph": <graph>, "r": int, "trans": [[...]], "obs": [[...]]}
  states / observations: CSV "step,v0,v1,..." one row per step
  ensemble:   first line "N V", then N rows of V ints (row-major states)
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .graphs import (EnlargedPartition, Partition, SpatialGraph, build_graph,
                     enlarge_partition, make_cycle, make_grid, make_path,
                     offset_partition, regular_partition)
from .models import LocalModel, autoregressive_model, noisy_voter_model
from .particles import Ensemble

MODEL_FAMILIES = {
    "noisy_voter": noisy_voter_model,
    "autoregressive": autoregressive_model,
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# -- graphs -----------------------------------------------------------------

def graph_to_dict(g: SpatialGraph) -> dict:
    return {"vertices": g.num_vertices, "edges": [[int(u), int(v)] for u, v in g.edges()]}


def graph_from_dict(d: dict) -> SpatialGraph:
    if "kind" in d:
        kind = d["kind"]
        if kind == "path":
            return make_path(int(d["n"]))
        if kind == "cycle":
            return make_cycle(int(d["n"]))
        if kind == "grid":
            return make_grid(d["dims"])
        raise ValueError(f"unknown graph kind {kind!r}")
    return build_graph(int(d["vertices"]), d.get("edges", []))


# -- partitions ---------------------------------------------------------------

def partition_to_dict(p: EnlargedPartition) -> dict:
    return {"blocks": [[int(v) for v in K] for K in p.blocks], "b": p.b}


def partition_from_dict(g: SpatialGraph, d: dict, b_override=None) -> EnlargedPartition:
    b = int(d.get("b", 0)) if b_override is None else int(b_override)
    if "blocks" in d:
        base = Partition([np.asarray(K) for K in d["blocks"]])
    elif "block_size" in d:
        if d.get("offset"):
            base = offset_partition(g, int(d["block_size"]), int(d["offset"]))
        else:
            base = regular_partition(g, int(d["block_size"]))
    else:
        raise ValueError("partition needs 'blocks' or 'block_size'")
    return enlarge_partition(g, base, b)


# -- models -------------------------------------------------------------------

def model_from_dict(d: dict) -> LocalModel:
    g = graph_from_dict(d["graph"])
    r = int(d.get("r", 1))
    if "family" in d:
        family = d["family"]
        if family not in MODEL_FAMILIES:
            raise ValueError(f"unknown model family {family!r}")
        return MODEL_FAMILIES[family](g, r=r, **d.get("params", {}))
    if "trans" in d and "obs" in d:
        trans = [np.asarray(t, dtype=float) for t in d["trans"]]
        obs = [np.asarray(o, dtype=float) for o in d["obs"]]
        return LocalModel(g, r, trans, obs)
    raise ValueError("model needs a 'family' or explicit 'trans'/'obs' tables")


def model_to_dict(model: LocalModel) -> dict:
    return {
        "graph": graph_to_dict(model.graph),
        "r": model.r,
        "trans": [t.tolist() for t in model.trans],
        "obs": [o.tolist() for o in model.obs],
    }


# -- flat per-step records ------------------------------------------------------

def save_steps_csv(path, records: np.ndarray, first_step: int = 0):
    """states (T+1, V) with first_step=0, or observations (T, V) with first_step=1."""
    records = np.asarray(records, dtype=np.int64)
    with open(path, "w", newline="") as fh:
        fh.write("step," + ",".join(f"v{v}" for v in range(records.shape[1])) + "\n")
        for i, row in enumerate(records):
            fh.write(f"{first_step + i}," + ",".join(str(int(x)) for x in row) + "\n")


def load_steps_csv(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("step,"):
            raise ValueError(f"{path}: not a per-step record file")
        rows = [[int(x) for x in line.strip().split(",")[1:]]
                for line in fh if line.strip()]
    return np.asarray(rows, dtype=np.int64)


def save_ensemble(path, e: Ensemble):
    with open(path, "w", newline="") as fh:
        fh.write(f"{e.n} {e.num_vertices}\n")
        for row in e.particles:
            fh.write(" ".join(str(int(x)) for x in row) + "\n")


def load_ensemble(path, sizes) -> Ensemble:
    with open(path) as fh:
        n, v = (int(x) for x in fh.readline().split())
        particles = np.array([[int(x) for x in fh.readline().split()] for _ in range(n)])
    if particles.shape != (n, v):
        raise ValueError(f"{path}: truncated ensemble file")
    return Ensemble(particles, np.asarray(sizes))
