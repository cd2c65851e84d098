"""
Smooth rank of an embedding matrix
==================================

RankMe turns the singular values of an embedding matrix into a single
number between 1 and min(N, K). A flat spectrum scores the full dimension,
a collapsed one scores close to 1.
"""

import numpy as np

from rankgauge import MetricConfig, classical_rank, rankme, singular_values
from rankgauge.analysis import planted_rank_matrix

# %%
# Flat and point-mass spectra give the two extremes.
print("flat 256:", rankme(np.ones(256)))
print("point mass:", rankme(np.r_[1.0, np.zeros(255)], MetricConfig(entropy_epsilon=0)))

# %%
# Embeddings that only use a 40-dimensional subspace of a 256-dimensional space.
# The classical rank counts the subspace exactly; RankMe is a little lower
# because the 40 directions do not carry equal energy.
z = planted_rank_matrix(5000, 256, 40, seed=1)
s = singular_values(z)
print("path:", s.path)
print("classical rank:", classical_rank(s))
print("RankMe:", round(rankme(s), 2))

# %%
# A little isotropic noise fills every direction. The classical rank jumps to
# the full dimension; RankMe rises far less, since the noise directions carry
# little energy.
noisy = singular_values(planted_rank_matrix(5000, 256, 40, noise=0.05, seed=1))
print("noisy classical rank:", classical_rank(noisy))
print("noisy RankMe:", round(rankme(noisy), 2))
