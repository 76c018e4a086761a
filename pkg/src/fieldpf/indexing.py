"""Mixed-radix index arithmetic shared by the exact and particle engines.

Index contract used everywhere a configuration over a sorted vertex tuple is
flattened: the LOWEST vertex id varies fastest.  For sorted vertices
(v_0 < v_1 < ...) with alphabet sizes (S_0, S_1, ...),

    flat = sum_j x[v_j] * stride_j,   stride_0 = 1,  stride_{j+1} = stride_j * S_j

Serialized pmfs follow the same contract (row-major over the vertex-sorted
product, lowest vertex fastest).
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def strides_for(sizes) -> np.ndarray:
    """Mixed-radix strides for per-position alphabet sizes (lowest position fastest)."""
    sizes = np.asarray(sizes, dtype=np.int64)
    out = np.ones(len(sizes), dtype=np.int64)
    if len(sizes) > 1:
        out[1:] = np.cumprod(sizes[:-1])
    return out


def num_states(sizes) -> int:
    return int(np.prod(np.asarray(sizes, dtype=np.int64), initial=1))


@lru_cache(maxsize=32)
def _configs_cached(sizes: tuple) -> np.ndarray:
    m = num_states(sizes)
    strides = strides_for(sizes)
    flat = np.arange(m, dtype=np.int64)
    cfg = np.empty((m, len(sizes)), dtype=np.int64)
    for j, s in enumerate(sizes):
        cfg[:, j] = (flat // strides[j]) % s
    cfg.setflags(write=False)
    return cfg


def enumerate_configs(sizes) -> np.ndarray:
    """All configurations over the given sizes, shape (prod(sizes), len(sizes)), read-only."""
    return _configs_cached(tuple(int(s) for s in sizes))


def flatten_configs(configs: np.ndarray, sizes) -> np.ndarray:
    """Inverse of enumerate_configs row lookup: configs (..., n) -> flat indices."""
    strides = strides_for(sizes)
    return np.asarray(configs, dtype=np.int64) @ strides


def restriction_rows(configs: np.ndarray, positions, sub_sizes) -> np.ndarray:
    """Flat indices of the restriction of full configs to the given column positions.

    `positions` must be in increasing vertex order so the restricted flat index
    follows the same lowest-vertex-fastest contract.
    """
    strides = strides_for(sub_sizes)
    positions = np.asarray(positions, dtype=np.int64)
    return np.asarray(configs, dtype=np.int64)[..., positions] @ strides
