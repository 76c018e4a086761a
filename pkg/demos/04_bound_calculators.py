"""The explicit error-bound calculators.

Evaluates the bias bound, the variance bound, and the site-uniform corollary
bound over parameter grids, showing their monotonicities.  Note the mixing
thresholds: the hypotheses need eps within a whisker of 1, which no finite
counting-measure kernel can reach (a row-stochastic kernel over S outcomes
always has an entry <= 1/S), so these calculators serve parameter studies
rather than fitted models.
"""
import fieldpf as fp

print("hypothesis thresholds eps0 (bias bound):")
for delta in (1, 2, 3, 5):
    print(f"  Delta={delta}: eps0 = {fp.bias_mixing_threshold(delta):.6f}")

print("\nbias bound vs boundary distance (eps=0.99, r=1, Delta=1, |I|=1):")
for d in range(0, 6):
    params = fp.BoundParams(eps=0.99, r=1, delta=1, set_size=1, d_boundary=d)
    print(f"  d={d}: {fp.bias_bound(params):.6f}")

print("\nvariance bound vs enlarged block size (N=10^4):")
for kbar in (1, 2, 3, 4):
    params = fp.BoundParams(eps=0.99, kappa=0.9, delta=1, delta_k=1, delta_kbar=1,
                            kbar_inf=kbar, n_particles=10000, set_size=1)
    print(f"  |Kbar|={kbar}: {fp.variance_bound(params):.4f}")

print("\nsite-uniform corollary bound vs enlargement b (r=1):")
for b in range(2, 7):
    params = fp.BoundParams(eps=0.99, r=1, delta=1, b=b)
    print(f"  b={b}: {fp.corollary_bound(params):.6f}")

print("\nhypothesis gate in action:")
try:
    fp.bias_bound(fp.BoundParams(eps=0.5, r=1, delta=3, set_size=1, d_boundary=0))
except fp.HypothesisNotSatisfied as exc:
    print(f"  eps=0.5, Delta=3 -> {exc}")
