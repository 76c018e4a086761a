"""Graph geometry of the random field.

Hop distances, r-neighborhoods, block partitions, block enlargement, and the
partition-derived combinatorial quantities that enter the error bounds.
Graphs and partitions are immutable after construction and safe to share
across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


@dataclass(eq=False)
class SpatialGraph:
    """Undirected graph with a precomputed all-pairs hop-distance table.

    `lattice_dims` is set by the lattice constructors (path/cycle/grid) and is
    what regular_partition tiles against.
    """
    num_vertices: int
    adjacency: list            # per-vertex sorted ndarray of neighbor ids
    dist: np.ndarray           # (V, V) int hop distances
    lattice_dims: tuple | None = None

    @property
    def vertices(self) -> np.ndarray:
        return np.arange(self.num_vertices)

    @property
    def diameter(self) -> int:
        return int(self.dist.max())

    def edges(self) -> list:
        out = []
        for v, nbrs in enumerate(self.adjacency):
            out.extend((v, int(w)) for w in nbrs if w > v)
        return out


def build_graph(num_vertices: int, edges) -> SpatialGraph:
    """Build a SpatialGraph from an edge list.

    Duplicate edges are deduplicated; self-loops and out-of-range vertex ids
    are rejected, as are disconnected graphs (the field model assumes a
    connected interaction graph).
    """
    if num_vertices < 1:
        raise ValueError("graph needs at least one vertex")
    seen = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < num_vertices and 0 <= v < num_vertices):
            raise ValueError(f"vertex id out of range in edge ({u}, {v})")
        seen.add((min(u, v), max(u, v)))
    nbrs = [set() for _ in range(num_vertices)]
    for u, v in seen:
        nbrs[u].add(v)
        nbrs[v].add(u)
    adjacency = [np.array(sorted(s), dtype=np.int64) for s in nbrs]

    rows = np.fromiter((u for u, v in seen), dtype=np.int64, count=len(seen))
    cols = np.fromiter((v for u, v in seen), dtype=np.int64, count=len(seen))
    data = np.ones(len(seen), dtype=np.int8)
    adj = csr_matrix(
        (np.concatenate([data, data]),
         (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(num_vertices, num_vertices),
    )
    d = shortest_path(adj, method="D", unweighted=True)
    if np.isinf(d).any():
        raise ValueError("graph is disconnected")
    return SpatialGraph(num_vertices, adjacency, d.astype(np.int64))


def make_path(n: int) -> SpatialGraph:
    g = build_graph(n, [(i, i + 1) for i in range(n - 1)]) if n > 1 else build_graph(1, [])
    g.lattice_dims = (n,)
    return g


def make_cycle(n: int) -> SpatialGraph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    g = build_graph(n, [(i, (i + 1) % n) for i in range(n)])
    g.lattice_dims = (n,)
    g._cyclic = True
    return g


def make_grid(dims) -> SpatialGraph:
    """Rectangular lattice with nearest-neighbor edges; vertex id = row-major coordinate."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError("grid dims must be positive")
    n = int(np.prod(dims))
    coords = np.stack(np.unravel_index(np.arange(n), dims), axis=1)
    edges = []
    for axis in range(len(dims)):
        step = coords.copy()
        step[:, axis] += 1
        ok = step[:, axis] < dims[axis]
        tgt = np.ravel_multi_index(tuple(step[ok].T), dims)
        edges.extend(zip(np.arange(n)[ok].tolist(), tgt.tolist()))
    g = build_graph(n, edges)
    g.lattice_dims = dims
    return g


def neighborhood(g: SpatialGraph, v: int, r: int) -> np.ndarray:
    """N(v) = all vertices within r hops of v (always contains v)."""
    if not (0 <= v < g.num_vertices):
        raise ValueError(f"invalid vertex {v}")
    if r < 0:
        raise ValueError("radius must be >= 0")
    return np.flatnonzero(g.dist[v] <= r)


def boundary_interior(g: SpatialGraph, I, r: int):
    """Split I into (boundary, interior): boundary = {v in I : N(v) not within I}."""
    I = _as_vertex_array(g, I)
    mask = np.zeros(g.num_vertices, dtype=bool)
    mask[I] = True
    # v is interior iff every vertex within r hops stays inside I
    inside = np.array([bool(mask[g.dist[v] <= r].all()) for v in I])
    return I[~inside], I[inside]


def enlarge_block(g: SpatialGraph, K, b: int) -> np.ndarray:
    """Enlarged block: all vertices within b hops of K."""
    K = _as_vertex_array(g, K)
    if len(K) == 0:
        raise ValueError("cannot enlarge an empty block")
    if b < 0:
        raise ValueError("enlargement radius must be >= 0")
    return np.flatnonzero(g.dist[:, K].min(axis=1) <= b)


def set_distance(g: SpatialGraph, I, J) -> int:
    """min-over-pairs hop distance between two non-empty vertex sets."""
    I = _as_vertex_array(g, I)
    J = _as_vertex_array(g, J)
    if len(I) == 0 or len(J) == 0:
        raise ValueError("set distance undefined for empty sets")
    return int(g.dist[np.ix_(I, J)].min())


def boundary_distance(g: SpatialGraph, I, K, r: int) -> float:
    """d(I, boundary(K)); +inf when K has no boundary (e.g. K = V).

    The +inf convention makes exp(-beta*d) vanish, matching the limit of the
    bias bound as blocks exhaust the field.
    """
    border, _ = boundary_interior(g, K, r)
    if len(border) == 0:
        return math.inf
    return float(set_distance(g, I, border))


def _as_vertex_array(g: SpatialGraph, I) -> np.ndarray:
    I = np.unique(np.asarray(list(I) if not isinstance(I, np.ndarray) else I, dtype=np.int64))
    if len(I) and (I[0] < 0 or I[-1] >= g.num_vertices):
        raise ValueError("vertex id out of range")
    return I


@dataclass(eq=False)
class Partition:
    """Disjoint blocks covering every vertex exactly once."""
    blocks: list                      # sorted ndarray per block
    block_of: np.ndarray = field(init=False)

    def __post_init__(self):
        self.blocks = [np.unique(np.asarray(K, dtype=np.int64)) for K in self.blocks]
        sizes = [len(K) for K in self.blocks]
        if any(s == 0 for s in sizes):
            raise ValueError("empty block in partition")
        n = sum(sizes)
        self.block_of = np.full(n, -1, dtype=np.int64)
        for i, K in enumerate(self.blocks):
            if K[0] < 0 or K[-1] >= n:
                raise ValueError("partition blocks must cover 0..V-1 exactly")
            if (self.block_of[K] != -1).any():
                raise ValueError("partition blocks overlap")
            self.block_of[K] = i

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)


def regular_partition(g: SpatialGraph, block_shape) -> Partition:
    """Tile a lattice graph into congruent blocks; the last block along each
    axis absorbs any remainder."""
    if g.lattice_dims is None:
        raise ValueError("regular_partition needs a lattice graph (path/cycle/grid)")
    dims = g.lattice_dims
    if isinstance(block_shape, int):
        block_shape = (block_shape,) * len(dims)
    block_shape = tuple(int(s) for s in block_shape)
    if len(block_shape) != len(dims):
        raise ValueError("block_shape rank does not match the lattice")
    if any(s < 1 or s > d for s, d in zip(block_shape, dims)):
        raise ValueError("block_shape larger than lattice")
    runs_per_axis = []
    for s, d in zip(block_shape, dims):
        cuts = list(range(0, d - d % s, s)) + [d]
        if len(cuts) >= 3 and cuts[-1] - cuts[-2] < s:
            cuts.pop(-2)  # absorb the remainder into the last full tile
        runs_per_axis.append([np.arange(a, b) for a, b in zip(cuts[:-1], cuts[1:])])
    blocks = []
    idx = [0] * len(dims)
    while True:
        mesh = np.meshgrid(*(runs_per_axis[a][idx[a]] for a in range(len(dims))), indexing="ij")
        blocks.append(np.ravel_multi_index(tuple(m.ravel() for m in mesh), dims))
        for a in reversed(range(len(dims))):
            idx[a] += 1
            if idx[a] < len(runs_per_axis[a]):
                break
            idx[a] = 0
        else:
            break
    return Partition(blocks)


def offset_partition(g: SpatialGraph, block_size: int, offset: int) -> Partition:
    """Contiguous size-`block_size` blocks on a path/cycle, rotated by `offset` hops.

    On a cycle the blocks wrap around; used to build cycling schedules where
    no site is always near a border.
    """
    if g.lattice_dims is None or len(g.lattice_dims) != 1:
        raise ValueError("offset_partition needs a 1-d lattice")
    n = g.lattice_dims[0]
    if not getattr(g, "_cyclic", False) and offset % block_size != 0 and offset != 0:
        raise ValueError("on a path, offset must be a multiple of the block size")
    blocks = []
    for start in range(0, n, block_size):
        blocks.append((np.arange(start, min(start + block_size, n)) + offset) % n)
    if len(blocks) >= 2 and len(blocks[-1]) < block_size:
        blocks[-2] = np.concatenate([blocks[-2], blocks[-1]])
        blocks.pop()
    return Partition(blocks)


@dataclass(eq=False)
class EnlargedPartition:
    """A partition plus its b-hop enlarged blocks K_bar = {v : d(v,K) <= b}."""
    base: Partition
    b: int
    enlarged_blocks: list = field(init=False)
    ext_of: list = field(init=False)

    def __init__(self, g: SpatialGraph, base: Partition, b: int):
        if b < 0:
            raise ValueError("enlargement radius must be >= 0")
        if len(base.block_of) != g.num_vertices:
            raise ValueError("partition does not cover this graph's vertex set")
        self.base = base
        self.b = int(b)
        self.enlarged_blocks = [enlarge_block(g, K, b) for K in base.blocks]
        self.ext_of = [np.setdiff1d(Kb, K) for Kb, K in zip(self.enlarged_blocks, base.blocks)]

    @property
    def blocks(self) -> list:
        return self.base.blocks

    @property
    def num_blocks(self) -> int:
        return self.base.num_blocks


def enlarge_partition(g: SpatialGraph, p: Partition, b: int) -> EnlargedPartition:
    return EnlargedPartition(g, p, b)


@dataclass
class PartitionStats:
    delta: int        # max neighborhood size
    k_inf: int        # max block size
    kbar_inf: int     # max enlarged block size
    delta_k: int      # max number of blocks within r of a block
    delta_kbar: int   # max number of blocks within r of an enlarged block


def partition_stats(g: SpatialGraph, p: EnlargedPartition, r: int) -> PartitionStats:
    """All partition-derived bound quantities, by exhaustive enumeration."""
    delta = max(len(neighborhood(g, v, r)) for v in range(g.num_vertices))
    k_inf = max(len(K) for K in p.blocks)
    kbar_inf = max(len(Kb) for Kb in p.enlarged_blocks)
    delta_k = max(
        sum(1 for K2 in p.blocks if set_distance(g, K1, K2) <= r) for K1 in p.blocks
    )
    delta_kbar = max(
        sum(1 for K in p.blocks if set_distance(g, K, Kb) <= r) for Kb in p.enlarged_blocks
    )
    return PartitionStats(delta, k_inf, kbar_inf, delta_k, delta_kbar)


def schedule_k_inf(schedule) -> int:
    """Schedule-wide max block size across a list of (enlarged) partitions."""
    return max(max(len(K) for K in p.blocks) for p in schedule)
