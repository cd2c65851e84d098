"""
Power-law decay of the eigenspectrum
====================================

The alpha-ReQ baseline fits ``lambda_i ~ i**-alpha`` to the covariance
eigenvalues and prefers runs with alpha close to 1. Unlike the rank it can
be fooled when the spectrum is not a clean power law.
"""

import numpy as np

from rankgauge import MetricConfig, covariance_eigenvalues, power_law_fit

rng = np.random.default_rng(5)

# %%
# Embeddings with per-direction variance i**-alpha.
for alpha in (0.5, 1.0, 2.0):
    scales = np.arange(1, 129) ** (-alpha / 2)
    z = rng.standard_normal((20_000, 128)) * scales
    fit = power_law_fit(covariance_eigenvalues(z))
    print(f"alpha*={alpha}: fitted {fit.alpha:.3f}, R^2 {fit.r_squared:.4f}")

# %%
# Restricting the fit to the head of the spectrum.
fit = power_law_fit(covariance_eigenvalues(z), MetricConfig(fit_range=(1, 32)))
print("head only:", round(fit.alpha, 3), "over", fit.n_points, "points")
