"""
Domain-independent interpolation constants
==========================================

Sample Gaussian-bump sums, evaluate the ratio of the two sides of each
inequality with C = 1 and look at how the worst ratio moves with eps. A
constant that does not depend on the domain shows up as a flat column.
"""

# %%
from nutaxis.gn import BumpSumSampler, estimate_gn_ratio, gn1_case, gn2_case

sampler = BumpSumSampler()
cases = [gn1_case(4, 2, 2, 2, sampler=sampler), gn1_case(3, 1, 1, 1, sampler=sampler), gn2_case(2, 2, sampler=sampler)]

# %%
for case in cases:
    res = estimate_gn_ratio(case, n_samples=200)
    print(case.label, f"theta={case.theta:.4f}")
    for eps, m in zip(res.epsilons, res.max_ratio):
        print(f"   eps={eps:<6g} max ratio {m:.5f}")
    print(f"   variation {res.variation:.3f}, scaling identities to {res.scaling_errors.max():.1e}")

# %%
# The same study through the CSV writer used by the command line.
print(estimate_gn_ratio(cases[0], 100).to_csv())
