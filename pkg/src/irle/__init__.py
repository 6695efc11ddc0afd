"""Deterministic numerical core for internally referenced low-light enhancement."""

__version__ = "0.1.0"

from .analysis import DensityCurve, LuminanceSampleSet, export_csv, kde, mean_luminance_set, pairwise_wasserstein, wasserstein_1d
from .gafm import (
    ConvParams,
    GafmParams,
    affine_params,
    denoise_loss,
    gafm_modulate,
    gain_aware_block,
    gain_prior,
    log_gain,
    pixel_shuffle,
    pixel_unshuffle,
    smoother_adapter,
)
from .image import gaussian_filter, load_image, luminance, patch_max, quantile, saturation, save_image
from .losses import (
    GradientPyramid,
    LossWeights,
    Stage1LossReport,
    color_loss,
    guide_loss,
    iap_loss,
    iap_scale_k,
    rec_loss,
    recombine,
    stage1_loss,
)
from .pseudo_gt import PseudoGtBundle, PseudoGtConfig, generate_pseudo_gt
from .spectral import SiscConfig, amplitude_spectrum, band_log_energy, cfc_matrix, freq_mask, image_cfc, radial_bands, sisc_loss
from .subsample import SubsamplePair, neighbor_subsample
