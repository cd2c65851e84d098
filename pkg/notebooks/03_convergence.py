"""
How many samples does RankMe need
=================================

RankMe is estimated from a row subsample. For a matrix whose true rank is
well below the sample size, a few thousand rows already recover most of the
full-matrix value.
"""

from rankgauge import convergence_curve
from rankgauge.analysis import planted_rank_matrix

z = planted_rank_matrix(20_000, 512, 120, noise=0.01, seed=3)

# %%
curve = convergence_curve(z, [128, 256, 512, 1024, 2048, 4096, 8192, 20_000], seed=0)
for n, v, frac in zip(curve.sample_sizes, curve.rankme_values, curve.fractions()):
    print(f"{n:6d}  {v:8.2f}  {frac:6.1%}")

# %%
# The same curve as CSV, as written by ``rankgauge converge --out``.
print(curve.to_csv())
