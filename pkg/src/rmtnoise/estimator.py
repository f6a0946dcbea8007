"""Threshold-based noise variance estimation from a covariance spectrum.

Pipeline (``estimate_noise``):

1. shape constants (mu, xi, xi') for the spectrum's (N, s);
2. ratio threshold T1 at level alpha1 and overestimation threshold T2 at
   level alpha2;
3. split index m: the first eigenvalue from lambda_2 downward with
   lambda_i <= T1 * lambda_N starts the noise set;
4. initial estimate: mean of lambda_{m+1} .. lambda_N;
5. corrected bound: mu * T2 * lambda_{m+1} / (1 + sqrt(N/s)) (or the squared
   edge, see ``NormalizationMode``);
6. final estimate: the smaller of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    DegenerateAspectError,
    DegenerateFloorError,
    DegenerateSpectrumError,
    DegenerateSpikeError,
    EmptyNoiseSetError,
    InvalidArgumentError,
    InvalidLevelError,
    NoNoiseSubspaceError,
    UnsupportedRegimeError,
)
from .rmt_core import ShapeParams, mp_median, shape_params, tw1_quantile
from .spectrum import Spectrum, rescale

NormalizationMode = Literal["paper-literal", "squared-edge"]
MODES: tuple[str, ...] = ("paper-literal", "squared-edge")

DEFAULT_ALPHA = 0.97
MIN_LEVEL = 0.5
MAX_LEVEL = 0.999
MIN_NONZERO_EIGENVALUES = 3


def _check_level(alpha: float, name: str, upper: float = 1.0) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and MIN_LEVEL <= alpha < upper):
        raise InvalidArgumentError(f"{name} must lie in [{MIN_LEVEL}, {upper}), got {alpha!r}")
    return alpha


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise InvalidArgumentError(f"normalization mode must be one of {MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True)
class Thresholds:
    t1: float
    t2: float
    alpha1: float
    alpha2: float
    shape: ShapeParams


@dataclass(frozen=True)
class Diagnostics:
    no_split_found: bool = False
    rank_truncated: bool = False
    degenerate_floor: bool = False


@dataclass(frozen=True)
class EstimatorConfig:
    mode: NormalizationMode = "paper-literal"
    allow_fallback: bool = False

    def __post_init__(self) -> None:
        _check_mode(self.mode)


@dataclass(frozen=True)
class NoiseEstimate:
    """Outcome of :func:`estimate_noise`. Variances are on the covariance scale."""

    split_index_m: int
    sigma_sq_initial: float
    sigma_sq_bound: float
    sigma_sq_final: float
    bound_active: bool
    thresholds: Thresholds
    spike_eigenvalue: float
    n_dim: int
    n_samples: int
    mode: str
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    @property
    def sigma_initial(self) -> float:
        return math.sqrt(self.sigma_sq_initial)

    @property
    def sigma_final(self) -> float:
        return math.sqrt(self.sigma_sq_final)


def threshold_t1(shape: ShapeParams, alpha1: float) -> float:
    """Ratio threshold T1 = s (xi q + mu) / (sqrt(s) - sqrt(N))^2, q = F_TW1^-1(alpha1).

    The comparison ``lambda_{m+1} <= T1 * lambda_N`` is scale-free, so T1 can
    be applied to either eigenvalue scale.
    """
    alpha1 = _check_level(alpha1, "alpha1")
    n, s = shape.n_dim, shape.n_samples
    if n == s:
        raise DegenerateAspectError(f"T1 is undefined for N == s == {n}")
    t1 = s * (shape.xi * tw1_quantile(alpha1) + shape.mu) / (math.sqrt(s) - math.sqrt(n)) ** 2
    if not t1 > 0.0:
        raise InvalidLevelError(f"T1 = {t1!r} is not positive at alpha1 = {alpha1}")
    return t1


def threshold_t2(shape: ShapeParams, alpha2: float) -> float:
    """Overestimation threshold T2 = 1 / (xi' F_TW1^-1(1 - alpha2) + mu)."""
    alpha2 = _check_level(alpha2, "alpha2")
    xi_c = shape.require_xi_corrected()
    denom = xi_c * tw1_quantile(1.0 - alpha2) + shape.mu
    if not denom > 0.0:
        raise InvalidLevelError(f"T2 denominator {denom!r} is not positive at alpha2 = {alpha2}")
    return 1.0 / denom


def compute_thresholds(shape: ShapeParams, alpha1: float = DEFAULT_ALPHA, alpha2: float = DEFAULT_ALPHA) -> Thresholds:
    return Thresholds(
        t1=threshold_t1(shape, alpha1),
        t2=threshold_t2(shape, alpha2),
        alpha1=float(alpha1),
        alpha2=float(alpha2),
        shape=shape,
    )


def split_spectrum(spec: Spectrum, t1: float) -> int:
    """Number of signal eigenvalues m.

    Scans lambda_2, lambda_3, ... and stops at the first lambda_i with
    ``lambda_i <= t1 * lambda_N`` (ties count as noise); returns i - 1.
    lambda_1 is never treated as noise, so m >= 1.
    """
    values = spec.values
    floor = float(values[-1])
    if values.size < 2:
        raise NoNoiseSubspaceError("a split needs at least two eigenvalues")
    if floor <= spec.rank_tolerance or floor <= 0.0:
        raise DegenerateFloorError(f"smallest eigenvalue {floor!r} is below the rank tolerance")
    bound = t1 * floor
    hits = np.flatnonzero(values[1:] <= bound)
    if hits.size == 0:
        raise NoNoiseSubspaceError(f"no eigenvalue below T1 * lambda_N = {bound!r}")
    return int(hits[0]) + 1


def ml_noise_variance(spec: Spectrum, m: int) -> float:
    """Mean of the noise eigenvalues lambda_{m+1} .. lambda_N (covariance scale)."""
    values = rescale(spec, "covariance").values
    m = int(m)
    if m < 0:
        raise InvalidArgumentError(f"split index must be >= 0, got {m}")
    if m >= values.size:
        raise EmptyNoiseSetError(f"split index {m} leaves no noise eigenvalues out of {values.size}")
    return float(np.mean(values[m:]))


def corrected_bound(
    spec: Spectrum,
    m: int,
    t2: float,
    shape: ShapeParams,
    mode: NormalizationMode = "paper-literal",
) -> float:
    """mu * T2 * lambda_{m+1} divided by the edge factor of ``mode``.

    ``paper-literal`` divides by 1 + sqrt(N/s); ``squared-edge`` divides by
    (1 + sqrt(N/s))^2, the Marchenko-Pastur upper edge.
    """
    _check_mode(mode)
    values = rescale(spec, "covariance").values
    if not 0 <= m < values.size:
        raise EmptyNoiseSetError(f"split index {m} out of range for {values.size} eigenvalues")
    spike = float(values[m])
    if not spike > 0.0:
        raise DegenerateSpikeError(f"lambda_(m+1) = {spike!r} is not positive")
    edge = 1.0 + math.sqrt(shape.gamma)
    if mode == "squared-edge":
        edge *= edge
    return shape.mu * t2 * spike / edge


def _prepare(spec: Spectrum) -> tuple[Spectrum, Diagnostics]:
    spec = rescale(spec, "covariance")
    if not spec.values[0] > 0.0 or spec.numerical_rank < MIN_NONZERO_EIGENVALUES:
        raise DegenerateSpectrumError(
            f"need at least {MIN_NONZERO_EIGENVALUES} eigenvalues above the rank tolerance, "
            f"got {spec.numerical_rank if spec.values[0] > 0 else 0}"
        )
    degenerate_floor = bool(spec.numerically_zero[-1])
    keep = min(spec.n_dim, spec.n_samples - 1)
    truncated = keep < spec.n_dim
    if truncated:
        spec = Spectrum(values=spec.values[:keep], n_dim=keep, n_samples=spec.n_samples)
    return spec, Diagnostics(rank_truncated=truncated, degenerate_floor=degenerate_floor)


def estimate_noise(
    spec: Spectrum,
    alpha1: float = DEFAULT_ALPHA,
    alpha2: float = DEFAULT_ALPHA,
    config: EstimatorConfig | None = None,
) -> NoiseEstimate:
    """Run the full estimator on a spectrum.

    Rank-deficient covariances (s <= N) are truncated to their top s - 1
    eigenvalues and N is reinterpreted as s - 1; ``diagnostics.rank_truncated``
    records this. If no eigenvalue passes the T1 test a
    :class:`NoNoiseSubspaceError` is raised unless ``config.allow_fallback``
    is set, in which case m = N - 1 is used and flagged.
    """
    config = config or EstimatorConfig()
    _check_level(alpha1, "alpha1", MAX_LEVEL + 1e-12)
    _check_level(alpha2, "alpha2", MAX_LEVEL + 1e-12)
    spec, diag = _prepare(spec)

    shape = shape_params(spec.n_dim, spec.n_samples)
    thresholds = compute_thresholds(shape, alpha1, alpha2)

    try:
        m = split_spectrum(spec, thresholds.t1)
    except NoNoiseSubspaceError:
        if not config.allow_fallback:
            raise
        m = spec.n_dim - 1
        diag = Diagnostics(no_split_found=True, rank_truncated=diag.rank_truncated, degenerate_floor=diag.degenerate_floor)

    initial = ml_noise_variance(spec, m)
    bound = corrected_bound(spec, m, thresholds.t2, shape, config.mode)
    final = min(initial, bound)
    return NoiseEstimate(
        split_index_m=m,
        sigma_sq_initial=initial,
        sigma_sq_bound=bound,
        sigma_sq_final=final,
        bound_active=bound < initial,
        thresholds=thresholds,
        spike_eigenvalue=float(spec.values[m]),
        n_dim=spec.n_dim,
        n_samples=spec.n_samples,
        mode=config.mode,
        diagnostics=diag,
    )


def median_baseline(spec: Spectrum) -> float:
    """Median eigenvalue rescaled by the Marchenko-Pastur median at gamma = N/s."""
    spec = rescale(spec, "covariance")
    gamma = spec.n_dim / spec.n_samples
    if not 0.0 < gamma <= 1.0:
        raise UnsupportedRegimeError(f"median baseline needs 0 < N/s <= 1, got {gamma!r}")
    return float(np.median(spec.values)) / mp_median(gamma)
