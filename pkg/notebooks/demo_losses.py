"""
Assembling the first-stage objective
====================================

Neighbor sub-sampling gives two half-resolution views of one prediction.
The spectral term compares them. The spatial terms score the full prediction
against the pseudo reference and an illumination map.
"""

# %%
import numpy as np

from irle import LossWeights, generate_pseudo_gt, iap_loss, neighbor_subsample, recombine, stage1_loss

rng = np.random.default_rng(2)
i_low = np.clip(0.1 * rng.random((32, 32, 3)) + 0.05, 0, 1)
r_hat = np.clip(5 * i_low + rng.normal(0, 0.02, i_low.shape), 0, 1)
l_map = np.clip(i_low.mean(axis=2) / (r_hat.mean(axis=2) + 1e-8), 0, 1)

# %%
pair = neighbor_subsample(r_hat, seed=7)
print(pair.metadata())

# %% [markdown]
# The structure term fits the best global scale first, so brightness alone
# is not penalised.

# %%
print("iap(r)     ", iap_loss(r_hat, i_low))
print("iap(3 * r) ", iap_loss(3 * r_hat, i_low))

# %%
weights = LossWeights()
report = stage1_loss(pair.sub1, pair.sub2, l_map, i_low, generate_pseudo_gt(i_low), weights, r_full=r_hat)
print(report.to_json())
print("recombined total", recombine(report, weights))
