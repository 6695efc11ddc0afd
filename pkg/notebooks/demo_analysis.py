"""
Comparing luminance distributions
=================================

Per-image mean luminance across two small corpora, summarised by a
Gaussian KDE and compared with the 1-D Wasserstein distance.
"""

# %%
import numpy as np

from irle import LuminanceSampleSet, kde, pairwise_wasserstein, wasserstein_1d

rng = np.random.default_rng(4)
enhanced = LuminanceSampleSet(np.clip(rng.normal(0.45, 0.08, 60), 0, 1), "enhanced")
reference = LuminanceSampleSet(np.clip(rng.normal(0.50, 0.10, 60), 0, 1), "reference")

# %%
print("W1", wasserstein_1d(enhanced.samples, reference.samples))
print(pairwise_wasserstein([enhanced, reference]))

# %%
curve = kde(reference.samples, 256)
print("bandwidth", round(curve.bandwidth, 4), "mass", round(curve.integral(), 5))
print("mode near", round(float(curve.grid[np.argmax(curve.density)]), 3))
