"""
Synthesizing a pseudo reference from a dark image
=================================================

A dark, color-cast scene is white balanced on its brightest pixels,
brightened with a smooth spatial gain and desaturated in the shadows.
"""

# %%
import numpy as np

from irle import generate_pseudo_gt
from irle.image import luminance

rng = np.random.default_rng(0)
yy, xx = np.mgrid[0:96, 0:128]
blob = np.exp(-((yy - 30) ** 2 + (xx - 90) ** 2) / (2 * 20.0**2))
scene = (0.15 + 0.85 * blob)[:, :, None] * np.array([0.9, 0.7, 0.5])
dark = np.clip(0.12 * scene + rng.normal(0, 0.005, scene.shape), 0, 1)

# %% [markdown]
# The white-balance gains pull the masked channel means toward their average.

# %%
bundle = generate_pseudo_gt(dark)
print("gains        ", np.round(bundle.gains, 4))
print("mask fraction", bundle.mask.mean())

# %% [markdown]
# The gain map is large in the dark corners and close to one near the light.

# %%
print("target gain range", bundle.target_gain.min().round(2), bundle.target_gain.max().round(2))
for name, img in [("input", dark), ("bright", bundle.bright_image), ("pseudo", bundle.pseudo_gt)]:
    print(f"{name:7s} mean luminance {luminance(img).mean():.4f}")

# %% [markdown]
# Shadows lose chroma. On a reddish ramp through the shadow band, the channel
# spread falls to zero below the lower threshold.

# %%
from irle.image import saturation
from irle.pseudo_gt import chroma_weight, desaturate_blend

ramp = np.linspace(0.0, 0.4, 9)[:, None, None] * np.array([1.4, 0.9, 0.6])[None, None, :]
w_c = chroma_weight(luminance(ramp), 0.05, 0.25)
blended = desaturate_blend(ramp, w_c)
for y, w, s in zip(luminance(ramp)[:, 0], w_c[:, 0], saturation(blended)[:, 0]):
    print(f"Y={y:.3f}  W_c={w:.2f}  saturation={s:.3f}")
