"""Marginal-norm estimation, bias/variance decomposition, and bound calculators.

Total variation convention: the distance reported everywhere is
sup_{|f|<=1} |p(f) - q(f)| = sum_x |p(x) - q(x)|, which ranges over [0, 2]
(point masses on distinct atoms are at distance 2).  Norm estimates and
bound values share this scale.  Beware: many texts halve this quantity.

The bound calculators evaluate the explicit bias/variance/corollary formulas.
Each one first checks its mixing-rate hypothesis eps > eps0 and raises
HypothesisNotSatisfied instead of returning a silent number when it fails.
Note that a row-stochastic kernel over S outcomes always has an entry at most
1/S, so fitted models never satisfy eps > eps0 (~0.97 at best): the
calculators are for user-supplied parameter studies, and the envelope helpers
carry the non-explicit constants as free fitting parameters only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exact import JointPmf, marginal_of_blocks, marginal_on
from .graphs import SpatialGraph, boundary_distance, boundary_interior, partition_stats, set_distance
from .models import LocalModel, verify_mixing
from .particles import FilterSpec, empirical_marginal, run_filter

_SIGN_ENUM_CAP = 2 ** 20


class HypothesisNotSatisfied(ValueError):
    """The mixing rate does not exceed the bound's validity threshold."""


def _probs(p) -> np.ndarray:
    return p.probs if isinstance(p, JointPmf) else np.asarray(p, dtype=float)


def tv_distance(p, q) -> float:
    """sum_x |p(x) - q(x)|  (in [0, 2]; see module docstring for the convention)."""
    pa, qa = _probs(p), _probs(q)
    if pa.shape != qa.shape:
        raise ValueError("distributions have mismatched lengths")
    return float(np.abs(pa - qa).sum())


@dataclass
class NormEstimate:
    """Replicate-based estimate of the marginal distance on a vertex subset."""
    subset: tuple
    mode: str
    n_replicates: int
    value: float
    std_error: float


def _sign_max(deltas: np.ndarray) -> float:
    """sqrt(max_{f in {-1,1}^d} f' M f) with M the replicate second-moment matrix."""
    n_rep, d = deltas.shape
    if d > 20 or 2 ** max(d - 1, 0) > _SIGN_ENUM_CAP:
        raise ValueError("state space too large for sign enumeration; use mode='rms_tv'")
    second = deltas.T @ deltas / n_rep
    if d == 0:
        return 0.0
    best = 0.0
    n_vec = 2 ** (d - 1)          # f and -f are equivalent: pin f[0] = +1
    chunk = 1 << 16
    for lo in range(0, n_vec, chunk):
        codes = np.arange(lo, min(lo + chunk, n_vec), dtype=np.int64)
        f = np.ones((len(codes), d))
        for j in range(1, d):
            f[:, j] = 2.0 * ((codes >> (j - 1)) & 1) - 1.0
        vals = np.einsum("ij,jk,ik->i", f, second, f)
        best = max(best, float(vals.max()))
    return math.sqrt(max(best, 0.0))


def norm_estimate(reference, replicate_marginals, mode: str = "rms_tv") -> NormEstimate:
    """Estimate the replicate-averaged marginal distance to a reference.

    rms_tv: sqrt(mean over replicates of tv^2); the total variation is taken
    inside the replicate mean (an upper surrogate of the sign_max value).
    sign_max: enumerate test functions f in {-1,+1}^d against the replicate
    second-moment matrix of deviations (exact maximization of the
    root-mean-square of f-averages; feasible for small state spaces only).

    Standard errors come from a leave-one-replicate-out jackknife.
    """
    ref = _probs(reference)
    deltas = np.stack([_probs(r) - ref for r in replicate_marginals])
    n_rep = deltas.shape[0]
    if n_rep < 2:
        raise ValueError("need at least two replicates")
    if mode == "rms_tv":
        def estimator(d):
            return float(np.sqrt((np.abs(d).sum(axis=1) ** 2).mean()))
    elif mode == "sign_max":
        estimator = _sign_max
    else:
        raise ValueError(f"unknown mode {mode!r}")
    value = estimator(deltas)
    loo = np.array([estimator(np.delete(deltas, i, axis=0)) for i in range(n_rep)])
    se = math.sqrt((n_rep - 1) / n_rep * ((loo - loo.mean()) ** 2).sum())
    subset = tuple(reference.vertices) if isinstance(reference, JointPmf) else ()
    return NormEstimate(subset, mode, n_rep, value, se)


# ---------------------------------------------------------------------------
# Explicit bound calculators
# ---------------------------------------------------------------------------

@dataclass
class BoundParams:
    """Every constant the bound statements consume.

    Only the fields a given calculator needs must be set; d_boundary may be
    math.inf (block with empty boundary), which sends the bias bound to 0.
    """
    eps: float | None = None            # transition mixing bound
    kappa: float | None = None          # observation mixing bound
    r: int | None = None                # interaction radius
    delta: int | None = None            # max neighborhood size
    delta_k: int | None = None          # blocks within r of a block
    delta_kbar: int | None = None       # blocks within r of an enlarged block
    k_inf: int | None = None            # max block size
    kbar_inf: int | None = None         # max enlarged block size
    n_particles: int | None = None
    set_size: int | None = None         # |I|
    d_boundary: float | None = None     # d(I, boundary of the enlarged block)
    b: int | None = None                # enlargement radius
    m: int | None = None                # schedule length
    theta_m: float | None = None        # mean border distance of a site
    phi_m: float | None = None          # mean exp(-beta * border distance)
    max_border_dist: float | None = None
    min_border_dist: float | None = None


def _require(params: BoundParams, *names):
    missing = [n for n in names if getattr(params, n) is None]
    if missing:
        raise ValueError(f"BoundParams missing {', '.join(missing)}")


def bias_mixing_threshold(delta: int) -> float:
    return (1.0 - 1.0 / (18.0 * delta ** 2)) ** (1.0 / (2.0 * delta))


def variance_mixing_threshold(delta: int, delta_kbar: int) -> float:
    return (1.0 - 1.0 / (6.0 * delta_kbar * delta ** 2)) ** (1.0 / (2.0 * delta))


def bias_decay_rate(eps: float, r: int, delta: int) -> float:
    """Spatial decay rate of the bias bound; positive iff eps > eps0.

    Also the natural default for the rate inside the exponential-average
    border statistic when the hypothesis holds (it never does for fitted
    finite models, so balance_stats takes the rate explicitly).
    """
    if not eps > bias_mixing_threshold(delta):
        raise HypothesisNotSatisfied(
            f"decay rate needs eps > {bias_mixing_threshold(delta):.6g}, got {eps:.6g}")
    return -math.log(18.0 * delta ** 2 * (1.0 - eps ** (2 * delta))) / (2.0 * r)


def bias_bound(params: BoundParams) -> float:
    """Deterministic blocking-error bound for a set I inside a block.

    beta = -(2r)^{-1} log(18 Delta^2 (1 - eps^{2 Delta})), requires
    eps > (1 - 1/(18 Delta^2))^{1/(2 Delta)}; the bound decays exponentially
    in the distance from I to the enlarged block's boundary.
    """
    _require(params, "eps", "r", "delta", "set_size", "d_boundary")
    eps0 = bias_mixing_threshold(params.delta)
    if not params.eps > eps0:
        raise HypothesisNotSatisfied(f"bias bound needs eps > {eps0:.6g}, got {params.eps:.6g}")
    tail = 1.0 - params.eps ** (2 * params.delta)
    beta = bias_decay_rate(params.eps, params.r, params.delta)
    lead = 8.0 * math.exp(-beta) / (1.0 - math.exp(-beta))
    return lead * tail * params.set_size * math.exp(-beta * params.d_boundary)


def variance_bound(params: BoundParams) -> float:
    """Sampling-error bound: exponential in the enlarged block size, 1/sqrt(N)."""
    _require(params, "eps", "kappa", "delta", "delta_k", "delta_kbar",
             "kbar_inf", "n_particles", "set_size")
    eps0 = variance_mixing_threshold(params.delta, params.delta_kbar)
    if not params.eps > eps0:
        raise HypothesisNotSatisfied(f"variance bound needs eps > {eps0:.6g}, got {params.eps:.6g}")
    tail = 1.0 - params.eps ** (2 * params.delta)
    beta = -math.log(6.0 * params.delta_kbar * params.delta ** 2 * tail)
    lead = 64.0 * params.delta_k / (1.0 - math.exp(-beta))
    blowup = params.eps ** (-4 * params.kbar_inf) \
        * params.kappa ** (-4 * params.kbar_inf * params.delta_k)
    return params.set_size * lead * blowup / math.sqrt(params.n_particles)


def corollary_bound(params: BoundParams) -> float:
    """Site-uniform bias bound for the singleton partition with b > r."""
    _require(params, "eps", "r", "delta", "b")
    if not params.b > params.r:
        raise ValueError("corollary bound needs b > r")
    eps0 = bias_mixing_threshold(params.delta)
    if not params.eps > eps0:
        raise HypothesisNotSatisfied(f"corollary bound needs eps > {eps0:.6g}, got {params.eps:.6g}")
    tail = 1.0 - params.eps ** (2 * params.delta)
    beta = bias_decay_rate(params.eps, params.r, params.delta)
    lead = 8.0 * math.exp(-beta) / (1.0 - math.exp(-beta))
    return lead * tail * math.exp(-beta * (params.b - params.r))


def blocked_error_envelope(params: BoundParams, alpha: float = 1.0,
                      beta1: float = 1.0, beta2: float = 1.0) -> tuple:
    """Structural shape (boundary term, sampling term) of the blocked-filter bound.

    alpha, beta1, beta2 have no closed form; they are free parameters for
    curve fitting and must never be reported as theory constants.
    """
    _require(params, "d_boundary", "k_inf", "n_particles")
    return (alpha * math.exp(-beta1 * params.d_boundary),
            alpha * math.exp(beta2 * params.k_inf) / math.sqrt(params.n_particles))


def cycled_error_envelope(params: BoundParams, alpha: float = 1.0, beta: float = 1.0) -> dict:
    """Structural terms of the cycled-partition bound, in both displayed forms.

    bound-form-A uses the exponential-average border distance phi_m directly;
    bound-form-B uses exp(-beta * exp(-beta*(max_d - min_d)) * theta_m / m).
    No claim is made about which is tighter.
    """
    _require(params, "phi_m", "theta_m", "max_border_dist", "min_border_dist",
             "m", "k_inf", "n_particles")
    sampling = alpha * params.k_inf * math.exp(beta * params.k_inf) / math.sqrt(params.n_particles)
    spread = params.max_border_dist - params.min_border_dist
    form_b = alpha * math.exp(-beta * math.exp(-beta * spread) * params.theta_m / params.m)
    return {
        "bound_form_a": alpha * params.phi_m + sampling,
        "bound_form_b": form_b + sampling,
        "spatial_a": alpha * params.phi_m,
        "spatial_b": form_b,
        "sampling": sampling,
    }


@dataclass
class BalanceStats:
    """How well a partition schedule keeps one site away from block borders."""
    theta_m: float              # mean border distance over the schedule
    phi_m: float                # mean exp(-beta * border distance)
    max_border_dist: float
    min_border_dist: float


def balance_stats(g: SpatialGraph, schedule, v: int, beta: float, r: int) -> BalanceStats:
    """Border-distance statistics of site v across a partition schedule."""
    if len(schedule) < 1:
        raise ValueError("schedule must contain at least one partition")
    dists = []
    for p in schedule:
        base = getattr(p, "base", p)
        K = base.blocks[base.block_of[v]]
        border, _ = boundary_interior(g, K, r)
        dists.append(math.inf if len(border) == 0 else float(set_distance(g, [v], border)))
    dists = np.asarray(dists, dtype=float)
    return BalanceStats(float(dists.mean()), float(np.exp(-beta * dists).mean()),
                        float(dists.max()), float(dists.min()))


def bound_params_from_instance(model: LocalModel, p, I, n_particles: int | None = None) -> BoundParams:
    """Fill BoundParams from a concrete model, enlarged partition, and site set."""
    eps, kappa = verify_mixing(model)
    stats = partition_stats(model.graph, p, model.r)
    I = sorted(int(v) for v in I)
    owner = p.base.block_of[I[0]]
    if any(p.base.block_of[v] != owner for v in I):
        d_bound = None      # the bounds only cover sets inside a single block
    else:
        d_bound = boundary_distance(model.graph, I, p.enlarged_blocks[owner], model.r)
    return BoundParams(
        eps=eps, kappa=kappa, r=model.r, delta=stats.delta,
        delta_k=stats.delta_k, delta_kbar=stats.delta_kbar,
        k_inf=stats.k_inf, kbar_inf=stats.kbar_inf,
        n_particles=n_particles, set_size=len(I), d_boundary=d_bound, b=p.b,
    )


# ---------------------------------------------------------------------------
# Empirical bias / variance decomposition
# ---------------------------------------------------------------------------

def bias_variance_report(model: LocalModel, spec: FilterSpec, observations,
                         exact_filters, n_replicates: int, ideal_filters=None,
                         sites=None, mode: str = "rms_tv", cap=None) -> list:
    """Per-site, per-time decomposition of the filter error.

    bias:      tv(exact pi_n, ideal blocked filter) on each site set;
               deterministic, computed from the exact engine only.
    variance:  norm_estimate of replicate empirical marginals against the
               ideal filter's marginal.
    total:     same against the exact filter's marginal.

    Returns a flat list of row dicts.  Each (step, site set) yields
    `n_replicates` rows with replicate=index carrying that replicate's own
    deviations, plus one aggregate row with replicate=None carrying the
    deterministic bias and the replicate-RMS variance/total with jackknife
    standard errors.  Nothing is averaged silently.

    `ideal_filters` (from ideal_filter_run) may be passed to avoid
    recomputation; for the bootstrap variant the ideal filter IS the exact
    filter and the bias is identically zero.
    """
    from .exact import DEFAULT_JOINT_CAP, ideal_filter_run
    cap = DEFAULT_JOINT_CAP if cap is None else cap
    observations = np.asarray(observations, dtype=np.int64).reshape(-1, model.num_vertices)
    T = observations.shape[0]
    if len(exact_filters) != T + 1:
        raise ValueError("exact_filters must be [pi_0 .. pi_T]")
    if sites is None:
        sites = [(v,) for v in range(model.num_vertices)]
    sites = [tuple(sorted(int(v) for v in I)) for I in sites]

    blocked = spec.variant != "bootstrap"
    if blocked and ideal_filters is None:
        ideal_filters = ideal_filter_run(model, spec.schedule, exact_filters[0],
                                         observations, cap)

    exact_margs = [[marginal_on(exact_filters[n], I) for I in sites] for n in range(T + 1)]
    if blocked:
        ideal_margs = [[marginal_of_blocks(ideal_filters[n], I, cap) for I in sites]
                       for n in range(T + 1)]
    else:
        ideal_margs = exact_margs

    # replicate empirical marginals, collected streaming per step
    emp = [[[None] * n_replicates for _ in sites] for _ in range(T + 1)]
    for rep in range(n_replicates):
        rep_spec = replace(spec, seed=_entropy_pair(spec.seed, rep))

        def collect(step, ens, rep=rep):
            for i, I in enumerate(sites):
                emp[step][i][rep] = empirical_marginal(ens, I, cap)

        run_filter(model, rep_spec, None, observations, callback=collect,
                   keep_history=False)

    rows = []
    for n in range(1, T + 1):
        for i, I in enumerate(sites):
            bias = tv_distance(exact_margs[n][i], ideal_margs[n][i]) if blocked else 0.0
            reps = emp[n][i]
            for rep in range(n_replicates):
                rows.append({
                    "step": n, "site_set": I, "replicate": rep, "bias": bias,
                    "variance": tv_distance(ideal_margs[n][i], reps[rep]),
                    "total": tv_distance(exact_margs[n][i], reps[rep]),
                    "variance_se": None, "total_se": None,
                })
            var_est = norm_estimate(ideal_margs[n][i], reps, mode)
            tot_est = norm_estimate(exact_margs[n][i], reps, mode)
            rows.append({
                "step": n, "site_set": I, "replicate": None, "bias": bias,
                "variance": var_est.value, "total": tot_est.value,
                "variance_se": var_est.std_error, "total_se": tot_est.std_error,
            })
    return rows


def _entropy_pair(seed, rep: int) -> tuple:
    base = (int(seed),) if isinstance(seed, (int, np.integer)) else tuple(int(s) for s in seed)
    return base + (int(rep),)


def write_report_csv(rows, path, params_hash: str = "", bound_cols=None):
    """Emit aggregate report rows: time, site_or_set, bias, variance, total,
    bias_bound, variance_bound, params-hash."""
    bound_cols = bound_cols or {}
    with open(path, "w", newline="") as fh:
        fh.write("time,site_or_set,bias,variance,total,bias_bound,variance_bound,params_hash\n")
        for row in rows:
            if row["replicate"] is not None:
                continue
            key = (row["step"], row["site_set"])
            bb, vb = bound_cols.get(key, ("", ""))
            site = "|".join(str(v) for v in row["site_set"])
            fh.write(f"{row['step']},{site},{row['bias']:.12g},{row['variance']:.12g},"
                     f"{row['total']:.12g},{bb},{vb},{params_hash}\n")
