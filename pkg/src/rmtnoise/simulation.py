"""Monte Carlo harness with known ground truth.

Randomness is counter-based: every (seed, trial_index, stream) triple keys an
independent Philox4x64 stream, so any trial can be regenerated on its own and
results never depend on scheduling. Gaussian variates come from Box-Muller
over consecutive uniform pairs, so entry k of a trial's noise matrix is a
function of (seed, trial_index, k) only.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgumentError, RMTNoiseError
from .estimator import (
    DEFAULT_ALPHA,
    MODES,
    EstimatorConfig,
    estimate_noise,
    median_baseline,
    split_spectrum,
    threshold_t1,
    compute_thresholds,
)
from .rmt_core import shape_params
from .spectrum import Spectrum, eigen_spectrum, sample_covariance

MASK64 = (1 << 64) - 1

STREAM_NOISE = 0
STREAM_SCORES = 1
STREAM_DIRECTIONS = 2
STREAM_PATCH_CORNERS = 3
STREAM_PATCH_NOISE = 4


def counter_generator(seed: int, trial_index: int, stream: int = STREAM_NOISE) -> np.random.Generator:
    """Philox generator keyed by (seed, trial_index); ``stream`` selects the counter block."""
    key = (int(seed) & MASK64) | ((int(trial_index) & MASK64) << 64)
    counter = (int(stream) & MASK64) << 192
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def box_muller(gen: np.random.Generator, size: int) -> np.ndarray:
    """``size`` standard normals; pair j of uniforms yields normals 2j and 2j+1."""
    pairs = (int(size) + 1) // 2
    u = gen.random(2 * pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    angle = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:size]


def standard_normals(seed: int, trial_index: int, shape, stream: int = STREAM_NOISE) -> np.ndarray:
    size = int(np.prod(shape))
    return box_muller(counter_generator(seed, trial_index, stream), size).reshape(shape)


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo experiment.

    ``spikes`` are population variance increments in units of sigma^2: a
    spike of strength c adds c * sigma^2 along a fixed unit direction.
    """

    n_dim: int
    n_samples: int
    sigma: float = 1.0
    trials: int = 1000
    seed: int = 0
    spikes: tuple[float, ...] = ()
    alpha1: float = DEFAULT_ALPHA
    alpha2: float = DEFAULT_ALPHA
    normalization_mode: str = "paper-literal"

    def __post_init__(self) -> None:
        object.__setattr__(self, "spikes", tuple(float(c) for c in self.spikes))
        if self.n_dim < 1:
            raise InvalidArgumentError(f"n_dim must be >= 1, got {self.n_dim}")
        if self.n_samples < 2:
            raise InvalidArgumentError(f"n_samples must be >= 2, got {self.n_samples}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidArgumentError(f"sigma must be > 0, got {self.sigma!r}")
        if self.trials < 1:
            raise InvalidArgumentError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed <= MASK64:
            raise InvalidArgumentError("seed must be an unsigned 64-bit integer")
        if any(not (math.isfinite(c) and c > 0) for c in self.spikes):
            raise InvalidArgumentError("spike strengths must be positive")
        if len(self.spikes) > self.n_dim:
            raise InvalidArgumentError("more spikes than dimensions")
        if self.normalization_mode not in MODES:
            raise InvalidArgumentError(f"normalization_mode must be one of {MODES}")
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise InvalidArgumentError(f"{name} must lie in (0, 1), got {value!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spikes"] = list(self.spikes)
        return d


def spike_directions(seed: int, n_dim: int, count: int) -> np.ndarray:
    """Orthonormal ``(n_dim, count)`` directions from a seeded Gaussian QR."""
    if count == 0:
        return np.zeros((n_dim, 0))
    g = standard_normals(seed, 0, (n_dim, count), STREAM_DIRECTIONS)
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def gaussian_sample_matrix(config: SimConfig, trial_index: int, sigma: float | None = None) -> np.ndarray:
    """``(n_samples, n_dim)`` observations: N(0, sigma^2) noise plus planted spikes."""
    sigma = config.sigma if sigma is None else float(sigma)
    x = sigma * standard_normals(config.seed, trial_index, (config.n_samples, config.n_dim))
    if config.spikes:
        directions = spike_directions(config.seed, config.n_dim, len(config.spikes))
        scores = standard_normals(config.seed, trial_index, (config.n_samples, len(config.spikes)), STREAM_SCORES)
        amplitudes = sigma * np.sqrt(np.asarray(config.spikes))
        x = x + (scores * amplitudes) @ directions.T
    return x


def simulate_spectrum(config: SimConfig, trial_index: int, sigma: float | None = None, method: str = "lapack") -> Spectrum:
    x = gaussian_sample_matrix(config, trial_index, sigma)
    return eigen_spectrum(sample_covariance(x), n_samples=config.n_samples, method=method)


def _map_trials(fn, args: list, workers: int) -> list:
    # Results are collected in submission (trial) order regardless of completion order.
    if workers <= 1 or len(args) < 2:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*args), chunksize=max(1, len(args) // (4 * workers))))


def _unit_spectrum_values(config: SimConfig, trial_index: int) -> np.ndarray:
    return simulate_spectrum(config, trial_index, sigma=1.0).values


def _wishart_extremes(n_dim: int, n_samples: int, seed: int, trial_index: int) -> tuple[float, float]:
    h = standard_normals(seed, trial_index, (n_samples, n_dim))
    values = np.linalg.eigvalsh(h.T @ h)
    return float(values[-1]), float(values[0])


def wishart_extremes(n_dim: int, n_samples: int, trials: int, seed: int = 0, workers: int = 1):
    """Largest and smallest eigenvalues of uncentred M = H^T H, H ``(s, N)`` standard Gaussian.

    Values are on the Wishart scale with sigma = 1 (divide by ``n_samples`` for
    the Marchenko-Pastur scale).
    """
    args = [(n_dim, n_samples, seed, t) for t in range(trials)]
    out = np.array(_map_trials(_wishart_extremes, args, workers))
    return out[:, 0], out[:, 1]


@dataclass(frozen=True)
class CoverageRow:
    alpha: float
    t1: float
    trials: int
    successes: int
    rate: float
    stderr: float


@dataclass(frozen=True)
class CoverageResult:
    config: SimConfig
    rows: list[CoverageRow]
    target_split: int


def coverage_experiment(config: SimConfig, alphas=None, workers: int = 1) -> CoverageResult:
    """Fraction of trials where the T1 test yields exactly the planted split.

    With k planted spikes the target is m = max(k, 1): the noise eigenvalues
    are admitted and every spike eigenvalue is excluded (lambda_1 is always
    excluded by rule, so a pure-noise trial succeeds when m = 1). All levels
    are evaluated on the same spectra.
    """
    alphas = (config.alpha1,) if alphas is None else tuple(float(a) for a in alphas)
    shape = shape_params(config.n_dim, config.n_samples)
    t1s = [threshold_t1(shape, a) for a in alphas]
    target = max(len(config.spikes), 1)

    args = [(config, t) for t in range(config.trials)]
    spectra = _map_trials(_unit_spectrum_values, args, workers)
    successes = [0] * len(alphas)
    for values in spectra:
        spec = Spectrum(values=values * config.sigma**2, n_dim=config.n_dim, n_samples=config.n_samples)
        for k, t1 in enumerate(t1s):
            try:
                m = split_spectrum(spec, t1)
            except RMTNoiseError:
                continue
            successes[k] += m == target

    n = config.trials
    rows = []
    for a, t1, hit in zip(alphas, t1s, successes):
        rate = hit / n
        rows.append(CoverageRow(alpha=a, t1=t1, trials=n, successes=hit, rate=rate, stderr=math.sqrt(rate * (1 - rate) / n)))
    return CoverageResult(config=config, rows=rows, target_split=target)


ESTIMATORS = ("median", "ml", "min_rule_paper_literal", "min_rule_squared_edge")


@dataclass(frozen=True)
class ComparisonRow:
    """Mean standard-deviation estimates at one true noise level."""

    sigma_true: float
    means: dict[str, float]
    bound_active_rate: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ComparisonResult:
    config: SimConfig
    sigmas: tuple[float, ...]
    rows: list[ComparisonRow]
    mad: dict[str, float]
    mse: dict[str, float]

    @property
    def primary(self) -> str:
        """Column holding the min-rule estimator under the configured mode."""
        return "min_rule_" + self.config.normalization_mode.replace("-", "_")


def _trial_estimates(values: np.ndarray, config: SimConfig, sigma: float) -> dict[str, float]:
    spec = Spectrum(values=values * sigma**2, n_dim=config.n_dim, n_samples=config.n_samples)
    out = {}
    gamma = config.n_dim / config.n_samples
    out["median"] = math.sqrt(median_baseline(spec)) if 0 < gamma <= 1 else math.nan
    literal = estimate_noise(spec, config.alpha1, config.alpha2, EstimatorConfig(mode="paper-literal"))
    squared = estimate_noise(spec, config.alpha1, config.alpha2, EstimatorConfig(mode="squared-edge"))
    out["ml"] = literal.sigma_initial
    out["min_rule_paper_literal"] = literal.sigma_final
    out["min_rule_squared_edge"] = squared.sigma_final
    out["_active_paper_literal"] = float(literal.bound_active)
    out["_active_squared_edge"] = float(squared.bound_active)
    return out


def comparison_experiment(sigmas, config: SimConfig, workers: int = 1) -> ComparisonResult:
    """Table of mean estimates (standard-deviation scale) across noise levels.

    Every level reuses the same trial seeds; since spikes are relative to
    sigma^2, each trial's unit-variance spectrum is computed once and scaled.
    MAD and MSE are taken across levels of |mean estimate - sigma|.
    """
    sigmas = tuple(float(s) for s in sigmas)
    if not sigmas or any(not (math.isfinite(s) and s > 0) for s in sigmas):
        raise InvalidArgumentError("sigmas must be a non-empty list of positive values")
    compute_thresholds(shape_params(config.n_dim, config.n_samples), config.alpha1, config.alpha2)

    args = [(config, t) for t in range(config.trials)]
    spectra = _map_trials(_unit_spectrum_values, args, workers)

    rows = []
    for sigma in sigmas:
        acc: dict[str, float] = {}
        for values in spectra:
            for key, val in _trial_estimates(values, config, sigma).items():
                acc[key] = acc.get(key, 0.0) + val
        n = len(spectra)
        means = {k: acc[k] / n for k in ESTIMATORS}
        active = {mode: acc["_active_" + mode.replace("-", "_")] / n for mode in MODES}
        rows.append(ComparisonRow(sigma_true=sigma, means=means, bound_active_rate=active))

    mad = {k: float(np.mean([abs(r.means[k] - r.sigma_true) for r in rows])) for k in ESTIMATORS}
    mse = {k: float(np.mean([(r.means[k] - r.sigma_true) ** 2 for r in rows])) for k in ESTIMATORS}
    return ComparisonResult(config=config, sigmas=sigmas, rows=rows, mad=mad, mse=mse)


@dataclass(frozen=True)
class BoundModeResult:
    sigma_sq: float
    trials: int
    mean_bound: dict[str, float]
    mean_initial: float

    @property
    def recommended(self) -> str:
        return min(MODES, key=lambda mode: abs(self.mean_bound[mode] - self.sigma_sq))


def bound_mode_experiment(config: SimConfig, workers: int = 1) -> BoundModeResult:
    """Mean corrected bound under each normalization mode on simulated spectra."""
    args = [(config, t) for t in range(config.trials)]
    spectra = _map_trials(_unit_spectrum_values, args, workers)
    sigma_sq = config.sigma**2
    sums = {mode: 0.0 for mode in MODES}
    initial = 0.0
    for values in spectra:
        spec = Spectrum(values=values * sigma_sq, n_dim=config.n_dim, n_samples=config.n_samples)
        for mode in MODES:
            est = estimate_noise(spec, config.alpha1, config.alpha2, EstimatorConfig(mode=mode))
            sums[mode] += est.sigma_sq_bound
        initial += est.sigma_sq_initial
    n = len(spectra)
    return BoundModeResult(
        sigma_sq=sigma_sq,
        trials=n,
        mean_bound={mode: sums[mode] / n for mode in MODES},
        mean_initial=initial / n,
    )
