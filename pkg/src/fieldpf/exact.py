"""Exact filtering on small finite fields.

Dense joint pmfs over the product state space give the true filter, the ideal
blocked filter, and the ideal enlarged blocked filter without any sampling;
these are the oracles against which empirical bias is measured.  Everything
here is a pure function of its inputs.

Tables follow the package-wide index contract (lowest vertex id varies
fastest).  Any operation that would allocate a joint table larger than the
cap refuses to run: the exact engine exists for desk-scale verification only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import EnlargedPartition
from .indexing import enumerate_configs, num_states, restriction_rows
from .models import LocalModel, as_initial_pmfs

DEFAULT_JOINT_CAP = 2 ** 24
_CHUNK_ELEMS = 1 << 22
_NORM_TOL = 1e-9


class CapExceeded(RuntimeError):
    """A joint table over the requested vertex set would exceed the state cap."""


def _check_cap(n_states: int, cap: int):
    if n_states > cap:
        raise CapExceeded(f"joint table needs {n_states} states, cap is {cap}")


@dataclass(eq=False)
class JointPmf:
    """Dense pmf over the product space of `vertices` (a sorted tuple)."""
    vertices: tuple
    sizes: tuple
    probs: np.ndarray

    def __post_init__(self):
        self.vertices = tuple(int(v) for v in self.vertices)
        self.sizes = tuple(int(s) for s in self.sizes)
        if any(self.vertices[i] >= self.vertices[i + 1] for i in range(len(self.vertices) - 1)):
            raise ValueError("vertices must be strictly increasing")
        self.probs = np.ascontiguousarray(self.probs, dtype=float)
        if self.probs.shape != (num_states(self.sizes),):
            raise ValueError("pmf length does not match the product of sizes")
        if (self.probs < 0).any():
            raise ValueError("pmf has negative entries")
        total = self.probs.sum()
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"pmf sums to {total}, not 1")
        self.probs = self.probs / total

    def restricted_index(self, configs: np.ndarray) -> np.ndarray:
        """Flat indices for full-field configs (..., V) restricted to this pmf's vertices."""
        return restriction_rows(configs, self.vertices, self.sizes)


@dataclass(eq=False)
class BlockMarginals:
    """A product-of-blocks measure: one dense table per block of a partition."""
    partition: EnlargedPartition
    tables: list    # JointPmf per block, vertices = the (non-enlarged) block

    def __post_init__(self):
        if len(self.tables) != self.partition.num_blocks:
            raise ValueError("one table per block required")
        for K, t in zip(self.partition.blocks, self.tables):
            if tuple(int(v) for v in K) != t.vertices:
                raise ValueError("table vertices do not match the partition block")


def joint_from_init(model: LocalModel, init=None, cap: int = DEFAULT_JOINT_CAP) -> JointPmf:
    """Dense joint pmf of a product-of-sites initial distribution."""
    pmfs = as_initial_pmfs(model, init)
    tables = [JointPmf((v,), (len(p),), p) for v, p in enumerate(pmfs)]
    return product_pmf(tables, cap=cap)


def product_pmf(tables, cap: int = DEFAULT_JOINT_CAP) -> JointPmf:
    """Tensor product of pmfs over pairwise disjoint vertex sets."""
    verts = []
    for t in tables:
        verts.extend(t.vertices)
    if len(set(verts)) != len(verts):
        raise ValueError("product requires disjoint vertex sets")
    order = tuple(sorted(verts))
    size_of = {}
    for t in tables:
        for v, s in zip(t.vertices, t.sizes):
            size_of[v] = s
    sizes = tuple(size_of[v] for v in order)
    m = num_states(sizes)
    _check_cap(m, cap)
    cfgs = enumerate_configs(sizes)
    pos_of = {v: j for j, v in enumerate(order)}
    out = np.ones(m)
    for t in tables:
        pos = [pos_of[v] for v in t.vertices]
        out *= t.probs[restriction_rows(cfgs, pos, t.sizes)]
    return JointPmf(order, sizes, out)


def marginal_on(pmf: JointPmf, I) -> JointPmf:
    """Marginal of a dense pmf onto a subset of its vertices."""
    I = tuple(sorted(int(v) for v in I))
    pos_of = {v: j for j, v in enumerate(pmf.vertices)}
    if any(v not in pos_of for v in I):
        raise ValueError("marginal subset is not contained in the pmf's vertices")
    if I == pmf.vertices:
        return JointPmf(pmf.vertices, pmf.sizes, pmf.probs.copy())
    n = len(pmf.vertices)
    keep = set(I)
    tensor = pmf.probs.reshape(tuple(reversed(pmf.sizes)))
    drop = tuple(n - 1 - pos_of[v] for v in pmf.vertices if v not in keep)
    out = tensor.sum(axis=drop)
    sizes = tuple(pmf.sizes[pos_of[v]] for v in I)
    return JointPmf(I, sizes, np.ravel(out))


def exact_predict(model: LocalModel, prior: JointPmf,
                  cap: int = DEFAULT_JOINT_CAP) -> JointPmf:
    """One exact prediction step: push the prior through the product kernel.

    posterior(z) = sum_x0 prior(x0) * prod_v p^v(x0^{N(v)}, z^v).

    Given the source configuration the sites are conditionally independent,
    so the target table is assembled as a sum of per-source tensor products;
    splitting the vertex set into a low and a high half turns that sum into
    one matrix product per source chunk.
    """
    V = model.num_vertices
    sizes = tuple(int(s) for s in model.state_sizes)
    if prior.vertices != tuple(range(V)):
        raise ValueError("prior must cover the whole vertex set")
    m = num_states(sizes)
    _check_cap(m, cap)
    cfgs = enumerate_configs(sizes)
    cond = [model.trans[v][model.trans_rows(cfgs, v)] for v in range(V)]  # (m, S_v) each

    split = V
    acc = 1
    for k in range(V):
        acc *= sizes[k]
        if acc * acc >= m:
            split = k + 1
            break
    size_lo = num_states(sizes[:split])
    size_hi = num_states(sizes[split:])

    out = np.zeros((size_lo, size_hi))
    chunk = max(1, min(m, _CHUNK_ELEMS // max(size_lo, size_hi)))
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        u_lo = np.ones((hi - lo, 1))
        for v in range(split):
            u_lo = (cond[v][lo:hi, :, None] * u_lo[:, None, :]).reshape(hi - lo, -1)
        u_hi = np.ones((hi - lo, 1))
        for v in range(split, V):
            u_hi = (cond[v][lo:hi, :, None] * u_hi[:, None, :]).reshape(hi - lo, -1)
        out += u_lo.T @ (prior.probs[lo:hi, None] * u_hi)
    probs = out.T.ravel()
    return JointPmf(prior.vertices, sizes, probs / probs.sum())


def _likelihood_vector(model: LocalModel, vertices, sizes, y: np.ndarray) -> np.ndarray:
    cfgs = enumerate_configs(sizes)
    like = np.ones(cfgs.shape[0])
    for j, v in enumerate(vertices):
        like *= model.obs[v][cfgs[:, j], y[v]]
    return like


def exact_correct(model: LocalModel, predicted: JointPmf, y: np.ndarray) -> JointPmf:
    """One exact Bayes correction with the full product likelihood."""
    like = _likelihood_vector(model, predicted.vertices, predicted.sizes, y)
    post = predicted.probs * like
    z = post.sum()
    if z <= 0:
        raise ValueError("zero normalizer in correction step (broken model?)")
    return JointPmf(predicted.vertices, predicted.sizes, post / z)


def exact_filter_run(model: LocalModel, mu: JointPmf, observations,
                     cap: int = DEFAULT_JOINT_CAP) -> list:
    """Exact filter distributions [pi_0, pi_1, ..., pi_T] for a run of observations."""
    out = [mu]
    current = mu
    for y in np.asarray(observations, dtype=np.int64).reshape(-1, model.num_vertices):
        current = exact_correct(model, exact_predict(model, current, cap), y)
        out.append(current)
    return out


def blocked_marginals(pmf: JointPmf, p: EnlargedPartition) -> BlockMarginals:
    """Marginalize a joint pmf onto every block (the blocking operator)."""
    return BlockMarginals(p, [marginal_on(pmf, K) for K in p.blocks])


def product_of_blocks(m: BlockMarginals, cap: int = DEFAULT_JOINT_CAP) -> JointPmf:
    """Re-expand a product-of-blocks measure into a dense joint pmf."""
    return product_pmf(m.tables, cap=cap)


def marginal_of_blocks(m: BlockMarginals, I, cap: int = DEFAULT_JOINT_CAP) -> JointPmf:
    """Marginal of the product-of-blocks measure on I (factorizes across blocks)."""
    I = set(int(v) for v in I)
    parts = []
    for K, t in zip(m.partition.blocks, m.tables):
        J = sorted(I.intersection(int(v) for v in K))
        if J:
            parts.append(marginal_on(t, J))
    if not parts:
        return JointPmf((), (), np.ones(1))
    return product_pmf(parts, cap=cap)


def ideal_enlarged_blocked_step(model: LocalModel, p: EnlargedPartition, current,
                                y: np.ndarray, cap: int = DEFAULT_JOINT_CAP) -> BlockMarginals:
    """One exact step of the ideal enlarged blocked filter.

    (1) expand the current product-of-blocks measure to a joint table,
    (2) exact prediction, (3) marginalize onto each enlarged block, (4)
    reweight each enlarged-block table by its own observations and
    renormalize per block, (5) marginalize each corrected table back onto the
    base block.  With b = 0 this is the ideal blocked filter; with a single
    whole-field block it reduces to the exact filter step.

    `current` may be a BlockMarginals (possibly under a different partition)
    or a JointPmf (used for the initial condition).
    """
    joint = current if isinstance(current, JointPmf) else product_of_blocks(current, cap)
    predicted = exact_predict(model, joint, cap)
    tables = []
    for K, Kbar in zip(p.blocks, p.enlarged_blocks):
        marg = marginal_on(predicted, Kbar)
        like = _likelihood_vector(model, marg.vertices, marg.sizes, y)
        post = marg.probs * like
        z = post.sum()
        if z <= 0:
            raise ValueError("zero normalizer in enlarged-block correction")
        corrected = JointPmf(marg.vertices, marg.sizes, post / z)
        tables.append(marginal_on(corrected, K))
    return BlockMarginals(p, tables)


def ideal_filter_run(model: LocalModel, schedule, mu: JointPmf, observations,
                     cap: int = DEFAULT_JOINT_CAP) -> list:
    """Ideal (enlarged) blocked filter trajectory for a partition schedule.

    Returns [B mu, pi~_1, ..., pi~_T]; entry 0 is the blocked view of the
    initial condition under schedule[0] (identical to mu when mu is a product
    measure).  Step n uses schedule[n % m].
    """
    schedule = list(schedule)
    out = [blocked_marginals(mu, schedule[0])]
    current = mu
    for n, y in enumerate(np.asarray(observations, dtype=np.int64).reshape(-1, model.num_vertices)):
        current = ideal_enlarged_blocked_step(model, schedule[n % len(schedule)], current, y, cap)
        out.append(current)
    return out
