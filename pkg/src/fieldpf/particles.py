"""Sampled filters: bootstrap, blocked, enlarged blocked, and partition cycling.

Every random draw comes from a numpy Generator derived deterministically from
the master seed and a (step, block) spawn key, so identical
(model, spec, observations, seed) always produce bit-identical ensembles, no
matter how per-block work is scheduled.  Within one update the blocks are
independent: block j reweights all particles by the observations on its
enlarged block, resamples N indices from its own stream, and contributes the
restriction to the base block; the new global particles are the gather of
those restrictions, which realizes the product-across-blocks measure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import DEFAULT_JOINT_CAP, JointPmf, _check_cap
from .graphs import EnlargedPartition
from .indexing import num_states, restriction_rows
from .models import LocalModel, as_initial_pmfs, obs_logweight, sample_initial, sample_transition

_VARIANTS = ("bootstrap", "blocked", "enlarged")
_RESAMPLERS = ("multinomial", "systematic")


@dataclass(eq=False)
class Ensemble:
    """N unweighted field configurations plus provenance of the last update."""
    particles: np.ndarray          # (N, V) int
    sizes: np.ndarray              # per-site alphabet sizes
    step: int = 0
    partition_index: int | None = None

    def __post_init__(self):
        self.particles = np.asarray(self.particles, dtype=np.int64)
        self.sizes = np.asarray(self.sizes, dtype=np.int64)
        if self.particles.ndim != 2 or self.particles.shape[0] < 1:
            raise ValueError("ensemble needs at least one particle")
        if self.particles.shape[1] != len(self.sizes):
            raise ValueError("particle width does not match the site count")
        if (self.particles < 0).any() or (self.particles >= self.sizes[None, :]).any():
            raise ValueError("particle values outside the site alphabets")

    @property
    def n(self) -> int:
        return self.particles.shape[0]

    @property
    def num_vertices(self) -> int:
        return self.particles.shape[1]


@dataclass
class FilterSpec:
    """Which filter to run: variant, partition schedule, resampler, and seed."""
    variant: str
    n_particles: int
    seed: int | tuple
    schedule: list | None = None       # EnlargedPartition list, cycled per step
    resampling: str = "multinomial"

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.resampling not in _RESAMPLERS:
            raise ValueError(f"unknown resampler {self.resampling!r}")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.variant != "bootstrap":
            if not self.schedule:
                raise ValueError(f"{self.variant} filter needs a partition schedule")
            for p in self.schedule:
                if not isinstance(p, EnlargedPartition):
                    raise ValueError("schedule entries must be EnlargedPartition")
                if self.variant == "blocked" and p.b != 0:
                    raise ValueError("blocked variant requires b = 0 partitions")


def _entropy(seed) -> tuple:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def stream(seed, step: int, block: int) -> np.random.Generator:
    """The dedicated RNG stream for a (step, block) pair of a run.

    Step 0 / block 0 is the initial-sampling stream; within step n >= 1,
    block 0 is the prediction stream and block j >= 1 drives the update of
    partition block j-1 (a bootstrap update is block 1, the single-block
    layout).
    """
    ss = np.random.SeedSequence(entropy=_entropy(seed), spawn_key=(step, block))
    return np.random.default_rng(ss)


def resample_indices(weights: np.ndarray, n: int, rng: np.random.Generator,
                     method: str = "multinomial") -> np.ndarray:
    """Draw n ancestor indices from (unnormalized, nonnegative) weights."""
    c = np.cumsum(weights)
    if not np.isfinite(c[-1]) or c[-1] <= 0:
        raise FloatingPointError("resampling weights degenerate (sum not positive/finite)")
    c /= c[-1]
    if method == "multinomial":
        u = rng.random(n)
    elif method == "systematic":
        u = (rng.random() + np.arange(n)) / n
    else:
        raise ValueError(f"unknown resampler {method!r}")
    return np.minimum(np.searchsorted(c, u, side="right"), len(weights) - 1)


def _resample_from_logw(logw: np.ndarray, n: int, rng, method: str) -> np.ndarray:
    if not np.isfinite(logw).all():
        raise FloatingPointError("non-finite log-weights (kernel positivity broken?)")
    w = np.exp(logw - logw.max())
    return resample_indices(w, n, rng, method)


def predict_sample(model: LocalModel, e: Ensemble, rng: np.random.Generator) -> Ensemble:
    """Propagate every particle one step through the product transition kernel."""
    moved = sample_transition(model, e.particles, rng)
    return Ensemble(moved, e.sizes, e.step, e.partition_index)


def bootstrap_update(model: LocalModel, e: Ensemble, y: np.ndarray,
                     rng: np.random.Generator, method: str = "multinomial") -> Ensemble:
    """Weight by the full product likelihood, then resample N particles."""
    logw = obs_logweight(model, e.particles, y)
    idx = _resample_from_logw(logw, e.n, rng, method)
    return Ensemble(e.particles[idx], e.sizes, e.step, e.partition_index)


def enlarged_blocked_update(model: LocalModel, p: EnlargedPartition, e: Ensemble,
                            y: np.ndarray, rngs, method: str = "multinomial") -> Ensemble:
    """Per-block reweight/resample on enlarged blocks, keep base-block restrictions.

    `rngs` is one Generator per block (a single Generator is accepted and
    reused sequentially, which still gives a deterministic but different
    layout).  With b = 0 this is the blocked filter update; with one
    whole-field block and the same stream it coincides with bootstrap_update.
    """
    if isinstance(rngs, np.random.Generator):
        rngs = [rngs] * p.num_blocks
    if len(rngs) != p.num_blocks:
        raise ValueError("need one RNG stream per block")
    new = np.empty_like(e.particles)
    for j, (K, Kbar) in enumerate(zip(p.blocks, p.enlarged_blocks)):
        logw = obs_logweight(model, e.particles, y, J=Kbar)
        idx = _resample_from_logw(logw, e.n, rngs[j], method)
        new[:, K] = e.particles[np.ix_(idx, K)]
    return Ensemble(new, e.sizes, e.step, e.partition_index)


def run_filter(model: LocalModel, spec: FilterSpec, init, observations,
               callback=None, keep_history: bool = True):
    """Run a particle filter over an observation sequence.

    Parameters
    ----------
    model : LocalModel
    spec : FilterSpec
        Variant, particle count, partition schedule, resampler, master seed.
    init : initial distribution (anything as_initial_pmfs accepts)
    observations : (T, V) int array
    callback : optional fn(step, Ensemble), called after every update
    keep_history : return [e_0, ..., e_T] when True, else only the final one

    Step n (0-based observation index) uses the partition schedule[n % m] and
    the RNG streams stream(seed, n+1, .); rerunning with the same inputs is
    bit-identical.
    """
    observations = np.asarray(observations, dtype=np.int64).reshape(-1, model.num_vertices)
    rng0 = stream(spec.seed, 0, 0)
    particles = sample_initial(as_initial_pmfs(model, init), spec.n_particles, rng0)
    ens = Ensemble(particles, model.state_sizes.copy(), step=0)
    history = [ens]
    for n, y in enumerate(observations):
        pred = predict_sample(model, ens, stream(spec.seed, n + 1, 0))
        if spec.variant == "bootstrap":
            ens = bootstrap_update(model, pred, y, stream(spec.seed, n + 1, 1), spec.resampling)
            ens.partition_index = None
        else:
            k = n % len(spec.schedule)
            p = spec.schedule[k]
            rngs = [stream(spec.seed, n + 1, 1 + j) for j in range(p.num_blocks)]
            ens = enlarged_blocked_update(model, p, pred, y, rngs, spec.resampling)
            ens.partition_index = k
        ens.step = n + 1
        if callback is not None:
            callback(n + 1, ens)
        if keep_history:
            history.append(ens)
    return history if keep_history else ens


def empirical_marginal(e: Ensemble, I, cap: int = DEFAULT_JOINT_CAP) -> JointPmf:
    """Frequency table of the ensemble restricted to vertex set I."""
    I = tuple(sorted(int(v) for v in I))
    sizes = tuple(int(e.sizes[v]) for v in I)
    m = num_states(sizes)
    _check_cap(m, cap)
    if not I:
        return JointPmf((), (), np.ones(1))
    rows = restriction_rows(e.particles, I, sizes)
    counts = np.bincount(rows, minlength=m)
    return JointPmf(I, sizes, counts / e.n)
