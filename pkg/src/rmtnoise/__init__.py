"""Gaussian noise variance estimation from sample-covariance eigenvalue spectra."""

__version__ = "0.1.0"

from .errors import RMTNoiseError
from .estimator import (
    EstimatorConfig,
    NoiseEstimate,
    Thresholds,
    compute_thresholds,
    corrected_bound,
    estimate_noise,
    median_baseline,
    ml_noise_variance,
    split_spectrum,
    threshold_t1,
    threshold_t2,
)
from .rmt_core import ShapeParams, mp_cdf, mp_edges, mp_median, shape_params, tw1_cdf, tw1_quantile
from .spectrum import Spectrum, eigen_spectrum, jacobi_eigh, rescale, sample_covariance, spectrum_of

__all__ = [
    "EstimatorConfig",
    "NoiseEstimate",
    "RMTNoiseError",
    "ShapeParams",
    "Spectrum",
    "Thresholds",
    "compute_thresholds",
    "corrected_bound",
    "eigen_spectrum",
    "estimate_noise",
    "jacobi_eigh",
    "median_baseline",
    "ml_noise_variance",
    "mp_cdf",
    "mp_edges",
    "mp_median",
    "rescale",
    "sample_covariance",
    "shape_params",
    "spectrum_of",
    "split_spectrum",
    "threshold_t1",
    "threshold_t2",
    "tw1_cdf",
    "tw1_quantile",
]
