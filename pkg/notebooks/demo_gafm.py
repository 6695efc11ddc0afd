"""
Gain-conditioned feature modulation
===================================

An illumination estimate becomes a log-domain gain map, which a tiny
adapter turns into per-pixel scale and shift parameters.
"""

# %%
import numpy as np

from irle import ConvParams, GafmParams, affine_params, gain_aware_block, gain_prior, log_gain, pixel_unshuffle

rng = np.random.default_rng(3)
features = rng.normal(size=(3, 16, 16))
l_hat = np.linspace(0.05, 1.0, 16)[None, :].repeat(16, axis=0)
g_log = log_gain(gain_prior(l_hat))

# %% [markdown]
# Zero parameters give an exact identity, which is how a freshly initialised
# block behaves.

# %%
zero = gain_aware_block(features, g_log, GafmParams.zeros(3), ConvParams.zeros(3))
print("identity:", np.array_equal(zero, features))

# %%
params = GafmParams.random(3, hidden=8, seed=5)
gamma, delta = affine_params(g_log, params)
print("gamma range", gamma.min().round(3), gamma.max().round(3))
out = gain_aware_block(features, g_log, params, ConvParams.random(3, seed=6))
print("mean |change| dark half ", np.abs(out - features)[:, :, :8].mean().round(4))
print("mean |change| bright half", np.abs(out - features)[:, :, 8:].mean().round(4))

# %%
print("unshuffled shape", pixel_unshuffle(features, 2).shape)
