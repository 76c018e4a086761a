"""Local transition and observation kernels of the dynamic random field.

A model holds, for every site v, a conditional transition table over the
site's next value given the current configuration restricted to the r-hop
neighborhood N(v), and an observation table over the site's observation given
its current value.  Reference measures are counting measures on finite
per-site alphabets, so all kernels are conditional pmfs.

Configurations are int arrays of shape (V,); observation sequences are int
arrays of shape (T, V).  Models are immutable after construction; every
sampling operation takes an explicit numpy Generator so callers control
stream separation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import SpatialGraph, neighborhood
from .indexing import enumerate_configs, num_states, restriction_rows

_ROW_SUM_TOL = 1e-12


@dataclass(eq=False)
class LocalModel:
    """Per-site transition kernels p^v and observation kernels g^v.

    trans[v] has shape (prod of alphabet sizes over N(v), S_v); rows are
    indexed by the N(v)-restriction of the previous configuration under the
    lowest-vertex-fastest contract, which makes the locality assumption
    structural: the table cannot depend on sites outside N(v).
    """
    graph: SpatialGraph
    r: int
    trans: list                 # per-site (rows_v, S_v) arrays
    obs: list                   # per-site (S_v, Y_v) arrays
    neighborhoods: list = field(init=False)
    state_sizes: np.ndarray = field(init=False)
    obs_sizes: np.ndarray = field(init=False)
    log_trans: list = field(init=False)
    log_obs: list = field(init=False)

    def __post_init__(self):
        V = self.graph.num_vertices
        if len(self.trans) != V or len(self.obs) != V:
            raise ValueError("need one transition and one observation table per site")
        self.trans = [np.ascontiguousarray(t, dtype=float) for t in self.trans]
        self.obs = [np.ascontiguousarray(o, dtype=float) for o in self.obs]
        self.neighborhoods = [neighborhood(self.graph, v, self.r) for v in range(V)]
        self.state_sizes = np.array([t.shape[1] for t in self.trans], dtype=np.int64)
        self.obs_sizes = np.array([o.shape[1] for o in self.obs], dtype=np.int64)
        for v in range(V):
            rows_expected = num_states(self.state_sizes[self.neighborhoods[v]])
            if self.trans[v].shape[0] != rows_expected:
                raise ValueError(
                    f"site {v}: transition table has {self.trans[v].shape[0]} rows, "
                    f"neighborhood needs {rows_expected}"
                )
            if self.obs[v].shape[0] != self.state_sizes[v]:
                raise ValueError(f"site {v}: observation table rows != alphabet size")
            for name, tab in (("transition", self.trans[v]), ("observation", self.obs[v])):
                if (tab <= 0).any():
                    raise ValueError(f"site {v}: {name} table has a non-positive entry")
                if np.abs(tab.sum(axis=1) - 1.0).max() > _ROW_SUM_TOL:
                    raise ValueError(f"site {v}: {name} rows do not sum to 1")
        self.log_trans = [np.log(t) for t in self.trans]
        self.log_obs = [np.log(o) for o in self.obs]

    @property
    def num_vertices(self) -> int:
        return self.graph.num_vertices

    def trans_rows(self, configs: np.ndarray, v: int) -> np.ndarray:
        """Row indices into trans[v] for configurations of shape (..., V)."""
        nbr = self.neighborhoods[v]
        return restriction_rows(configs, nbr, self.state_sizes[nbr])


def verify_mixing(model: LocalModel) -> tuple:
    """Largest (eps, kappa) with every transition entry in (eps, 1/eps) and
    every observation entry in (kappa, 1/kappa):

        eps = min(min entry, 1 / max entry)   (likewise kappa)

    Positivity is already enforced at construction; this recomputes the scan
    so the bound is reported for the tables actually stored.
    """
    tmin = min(float(t.min()) for t in model.trans)
    tmax = max(float(t.max()) for t in model.trans)
    omin = min(float(o.min()) for o in model.obs)
    omax = max(float(o.max()) for o in model.obs)
    if tmin <= 0 or omin <= 0:
        raise ValueError("kernel entries must be strictly positive")
    return min(tmin, 1.0 / tmax), min(omin, 1.0 / omax)


def mixture_kernel(rule: np.ndarray, n_outcomes: int, eps_mix: float) -> np.ndarray:
    """Mix a deterministic per-row rule with the uniform distribution.

    rule[i] is the outcome the rule picks for row i; every entry of the
    returned table is >= eps_mix / n_outcomes, which guarantees the strict
    positivity the mixing bounds need.
    """
    if not (0 < eps_mix <= 1):
        raise ValueError("eps_mix must be in (0, 1]")
    rule = np.asarray(rule, dtype=np.int64)
    table = np.full((len(rule), n_outcomes), eps_mix / n_outcomes)
    table[np.arange(len(rule)), rule] += 1.0 - eps_mix
    return table


def binary_channel(flip: float) -> np.ndarray:
    """Symmetric binary observation table; flip is the error probability."""
    if not (0 < flip < 1):
        raise ValueError("flip probability must be in (0, 1)")
    return np.array([[1 - flip, flip], [flip, 1 - flip]])


def noisy_voter_model(g: SpatialGraph, r: int = 1, eps_mix: float = 0.3,
                      obs_flip: float = 0.2) -> LocalModel:
    """Binary field: each site flips toward the majority value of its r-hop
    neighborhood (own value breaks ties), mixed with uniform at rate eps_mix;
    observed through a symmetric binary channel."""
    trans = []
    for v in range(g.num_vertices):
        nbr = neighborhood(g, v, r)
        own = int(np.searchsorted(nbr, v))
        cfgs = enumerate_configs([2] * len(nbr))
        ones = cfgs.sum(axis=1)
        rule = np.where(2 * ones > len(nbr), 1,
                        np.where(2 * ones < len(nbr), 0, cfgs[:, own]))
        trans.append(mixture_kernel(rule, 2, eps_mix))
    obs = [binary_channel(obs_flip)] * g.num_vertices
    return LocalModel(g, r, trans, obs)


def autoregressive_model(g: SpatialGraph, r: int = 1, levels: int = 4,
                         coupling: float = 0.7, noise: float = 0.5,
                         eps_mix: float = 0.05, obs_noise: float = 0.5,
                         obs_mix: float = 0.05) -> LocalModel:
    """Discretized scalar autoregression with nearest-neighbor coupling.

    Site values live on a uniform grid in [-1, 1]; the next value is centered
    on `coupling` times the neighborhood mean with Gaussian-shaped weights of
    width `noise`, then mixed with uniform at rate eps_mix.  Observations are
    a discretized Gaussian channel of width obs_noise around the true level.
    """
    grid = np.linspace(-1.0, 1.0, levels)
    trans = []
    for v in range(g.num_vertices):
        nbr = neighborhood(g, v, r)
        cfgs = enumerate_configs([levels] * len(nbr))
        mean = coupling * grid[cfgs].mean(axis=1)
        raw = np.exp(-((grid[None, :] - mean[:, None]) ** 2) / (2 * noise ** 2))
        raw /= raw.sum(axis=1, keepdims=True)
        trans.append((1 - eps_mix) * raw + eps_mix / levels)
    raw_obs = np.exp(-((grid[None, :] - grid[:, None]) ** 2) / (2 * obs_noise ** 2))
    raw_obs /= raw_obs.sum(axis=1, keepdims=True)
    obs_table = (1 - obs_mix) * raw_obs + obs_mix / levels
    obs = [obs_table] * g.num_vertices
    return LocalModel(g, r, trans, obs)


def _sample_rows(prob_rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One categorical draw per row of a (n, S) probability matrix."""
    cdf = np.cumsum(prob_rows, axis=1)
    u = rng.random(prob_rows.shape[0]) * cdf[:, -1]
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, prob_rows.shape[1] - 1)


def sample_transition(model: LocalModel, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw of the product transition kernel from configuration(s) x.

    Accepts a single (V,) configuration or a batch (N, V); each site is
    sampled independently from p^v conditioned on the OLD configuration.
    """
    x = np.asarray(x, dtype=np.int64)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    out = np.empty_like(batch)
    for v in range(model.num_vertices):
        rows = model.trans_rows(batch, v)
        out[:, v] = _sample_rows(model.trans[v][rows], rng)
    return out[0] if single else out


def sample_observation(model: LocalModel, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One observation draw y ~ g(x, .) for a single configuration."""
    x = np.asarray(x, dtype=np.int64)
    y = np.empty(model.num_vertices, dtype=np.int64)
    for v in range(model.num_vertices):
        y[v] = _sample_rows(model.obs[v][x[v]][None, :], rng)[0]
    return y


def obs_logweight(model: LocalModel, x: np.ndarray, y: np.ndarray, J=None) -> np.ndarray:
    """sum_{v in J} log g^v(x^v, y^v) for configuration(s) x; J defaults to V.

    Vectorized over a batch (N, V); returns a scalar for a single config.
    """
    x = np.asarray(x, dtype=np.int64)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    verts = range(model.num_vertices) if J is None else np.asarray(J, dtype=np.int64)
    logw = np.zeros(batch.shape[0])
    for v in verts:
        logw += model.log_obs[v][batch[:, v], y[v]]
    return float(logw[0]) if single else logw


def product_init(model: LocalModel, site_pmfs=None) -> list:
    """Per-site initial pmfs; defaults to uniform on each site alphabet."""
    if site_pmfs is None:
        return [np.full(s, 1.0 / s) for s in model.state_sizes]
    out = []
    for v, p in enumerate(site_pmfs):
        p = np.asarray(p, dtype=float)
        if p.shape != (model.state_sizes[v],) or abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
            raise ValueError(f"site {v}: invalid initial pmf")
        out.append(p / p.sum())
    return out


def point_init(model: LocalModel, config) -> list:
    """Point-mass initial distribution at a fixed configuration."""
    config = np.asarray(config, dtype=np.int64)
    out = []
    for v, s in enumerate(model.state_sizes):
        p = np.zeros(s)
        p[config[v]] = 1.0
        out.append(p)
    return out


def as_initial_pmfs(model: LocalModel, init) -> list:
    """Normalize an initial-distribution spec to a list of per-site pmfs.

    Accepts None (uniform), a fixed integer configuration (point mass), or a
    list/array of per-site pmfs.
    """
    if init is None:
        return product_init(model)
    if isinstance(init, (list, tuple)) and len(init) and not np.isscalar(init[0]):
        return product_init(model, init)
    arr = np.asarray(init)
    if arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer):
        return point_init(model, arr)
    if arr.ndim == 2:
        return product_init(model, list(arr))
    raise ValueError("init must be a configuration or per-site pmfs")


def sample_initial(init: list, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. configurations from a product-of-sites initial distribution."""
    out = np.empty((n, len(init)), dtype=np.int64)
    for v, p in enumerate(init):
        out[:, v] = _sample_rows(np.broadcast_to(p, (n, len(p))), rng)
    return out


def simulate_trajectory(model: LocalModel, init, T: int, rng: np.random.Generator):
    """Ground-truth states (T+1, V) and observations (T, V); deterministic given rng state.

    `init` is anything as_initial_pmfs accepts.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    x = sample_initial(as_initial_pmfs(model, init), 1, rng)[0]
    states = np.empty((T + 1, model.num_vertices), dtype=np.int64)
    obs = np.empty((T, model.num_vertices), dtype=np.int64)
    states[0] = x
    for n in range(T):
        states[n + 1] = sample_transition(model, states[n], rng)
        obs[n] = sample_observation(model, states[n + 1], rng)
    return states, obs
