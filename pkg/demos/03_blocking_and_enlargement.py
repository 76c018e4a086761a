"""The bias/variance decomposition and what enlargement buys.

The blocked filter forces independence across blocks every step, which adds a
deterministic bias on top of the sampling error.  This demo measures both
terms exactly: the bias from the ideal (infinite-particle) blocked filter,
the variance from replicate particle runs, and shows the bias dropping as the
blocks are enlarged during the update.
"""
import numpy as np

import fieldpf as fp

g = fp.make_cycle(8)
model = fp.noisy_voter_model(g, eps_mix=0.3, obs_flip=0.2)
rng = np.random.default_rng(5)
_, obs = fp.simulate_trajectory(model, None, 15, rng)
mu = fp.joint_from_init(model)
exact = fp.exact_filter_run(model, mu, obs)
p = fp.regular_partition(g, 2)

print("deterministic bias (exact vs ideal filter), mean over sites and time:")
for b in (0, 1, 2):
    ep = fp.enlarge_partition(g, p, b)
    ideal = fp.ideal_filter_run(model, [ep], mu, obs)
    bias = np.mean([fp.tv_distance(fp.marginal_on(exact[n], [v]),
                                   fp.marginal_of_blocks(ideal[n], [v]))
                    for n in range(1, len(obs) + 1) for v in range(8)])
    kbar = max(len(K) for K in ep.enlarged_blocks)
    print(f"  b={b}: bias {bias:.5f}   (largest enlarged block: {kbar} sites)")

print("\nfull decomposition at b in {0, 1}, N=2000, 8 replicates:")
for b in (0, 1):
    ep = fp.enlarge_partition(g, p, b)
    spec = fp.FilterSpec("enlarged", 2000, 11, [ep])
    rows = fp.bias_variance_report(model, spec, obs, exact, n_replicates=8)
    agg = [r for r in rows if r["replicate"] is None]
    bias = np.mean([r["bias"] for r in agg])
    var = np.mean([r["variance"] for r in agg])
    tot = np.mean([r["total"] for r in agg])
    print(f"  b={b}: bias {bias:.5f}  variance {var:.5f}  total {tot:.5f}")

print("\nenlargement trades a smaller bias for per-block updates over more "
      "sites;\nthe variance column barely moves while the bias column drops.")
