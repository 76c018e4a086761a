"""Field geometry: distances, neighborhoods, blocks, and enlargement.

Builds the 8-cycle testbed, partitions it into blocks of two, enlarges the
blocks by one hop, and prints every combinatorial quantity the error bounds
consume.
"""
import fieldpf as fp

g = fp.make_cycle(8)
print(f"8-cycle: {len(g.edges())} edges, diameter {g.diameter}")
print("d(0, 5) =", g.dist[0, 5], " (three hops the short way round)")
print("N(0) at radius 2:", sorted(fp.neighborhood(g, 0, 2).tolist()))

p = fp.regular_partition(g, 2)
print("\nblocks of two:", [K.tolist() for K in p.blocks])

for b in (0, 1, 2):
    ep = fp.enlarge_partition(g, p, b)
    print(f"b={b}: enlarged block of K={ep.blocks[0].tolist()} ->",
          ep.enlarged_blocks[0].tolist())

ep1 = fp.enlarge_partition(g, p, 1)
border, interior = fp.boundary_interior(g, ep1.enlarged_blocks[0], 1)
print("\nboundary of the first enlarged block:", border.tolist(),
      "interior:", interior.tolist())

stats = fp.partition_stats(g, ep1, r=1)
print("\nbound quantities:", stats)
print("site 0 distance to the enlarged block's boundary:",
      fp.boundary_distance(g, [0], ep1.enlarged_blocks[0], 1))
