"""Tracy-Widom (beta=1) and Marchenko-Pastur quantities.

``tw1_cdf`` and ``tw1_quantile`` read a precomputed table of F_TW1 (see
``data/tw1_table.txt`` and ``scripts/generate_tw1_table.py``) and interpolate
it with a monotone cubic. Nothing here solves Painleve II at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect, brentq

from .errors import DegenerateShapeError, InvalidArgumentError

SIMPSON_TOL = 1e-9


@dataclass(frozen=True)
class TWTable:
    """Monotone grid of (z, F_TW1(z)) samples."""

    z: np.ndarray
    p: np.ndarray
    resolution: str

    def __post_init__(self) -> None:
        if self.z.shape != self.p.shape or self.z.ndim != 1 or self.z.size < 4:
            raise InvalidArgumentError("TW table needs matching 1-d columns with at least 4 rows")
        if np.any(np.diff(self.z) <= 0) or np.any(np.diff(self.p) <= 0):
            raise InvalidArgumentError("TW table must be strictly increasing in z and p")
        if self.p[0] < 0.0 or self.p[-1] > 1.0:
            raise InvalidArgumentError("TW table probabilities must lie in [0, 1]")

    @classmethod
    def from_text(cls, text: str) -> "TWTable":
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            z, p = line.split()
            rows.append((float(z), float(p)))
        arr = np.array(rows, dtype=np.float64)
        step = float(np.median(np.diff(arr[:, 0])))
        return cls(z=arr[:, 0].copy(), p=arr[:, 1].copy(), resolution=f"uniform step {step:g}")

    def to_text(self) -> str:
        return "".join(f"{z:.17g} {p:.17e}\n" for z, p in zip(self.z, self.p))


@lru_cache(maxsize=1)
def tw1_table() -> TWTable:
    text = resources.files("rmtnoise").joinpath("data/tw1_table.txt").read_text()
    return TWTable.from_text(text)


@lru_cache(maxsize=1)
def _interpolant() -> PchipInterpolator:
    table = tw1_table()
    return PchipInterpolator(table.z, table.p, extrapolate=False)


def _tw1_cdf_array(z: np.ndarray) -> np.ndarray:
    table = tw1_table()
    z_lo, z_hi = table.z[0], table.z[-1]
    p_lo, p_hi = table.p[0], table.p[-1]
    out = np.empty_like(z)
    inside = (z >= z_lo) & (z <= z_hi)
    out[inside] = _interpolant()(z[inside])
    # Tail shapes: log F ~ -|z|^3/24 on the left, log(1-F) ~ -(2/3) z^(3/2) on the right.
    left = z < z_lo
    out[left] = p_lo * np.exp(-(np.abs(z[left]) ** 3 - abs(z_lo) ** 3) / 24.0)
    right = z > z_hi
    out[right] = 1.0 - (1.0 - p_hi) * np.exp(-(2.0 / 3.0) * (z[right] ** 1.5 - z_hi**1.5))
    return np.clip(out, 0.0, 1.0)


def tw1_cdf(z):
    """F_TW1(z). Accepts a scalar or an array; scalars come back as float."""
    arr = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("tw1_cdf requires finite input")
    out = _tw1_cdf_array(np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@lru_cache(maxsize=4096)
def tw1_quantile(p: float) -> float:
    """Inverse of :func:`tw1_cdf` for ``p`` in (0, 1)."""
    p = float(p)
    if not (0.0 < p < 1.0):
        raise InvalidArgumentError(f"tw1_quantile requires p in (0, 1), got {p!r}")
    lo, hi = -10.0, 10.0
    while tw1_cdf(lo) > p:
        lo *= 2.0
    while tw1_cdf(hi) < p:
        hi *= 2.0
    return float(brentq(lambda z: tw1_cdf(z) - p, lo, hi, xtol=1e-13, rtol=1e-14, maxiter=500))


@dataclass(frozen=True)
class ShapeParams:
    """Centering and scaling constants for an (N, s) = (n_dim, n_samples) shape.

    ``xi_corrected`` is None when the finite-sample correction is undefined,
    i.e. when xi**2 <= 2 mu**2 / (N s). That happens for small shapes such as
    (256, 3); anything that needs the corrected scale raises there.
    """

    n_dim: int
    n_samples: int
    gamma: float
    mu: float
    xi: float
    xi_corrected: float | None

    def require_xi_corrected(self) -> float:
        if self.xi_corrected is None:
            raise DegenerateShapeError(
                f"corrected Tracy-Widom scale is undefined for N={self.n_dim}, s={self.n_samples}: "
                "xi^2 - 2 mu^2 / (N s) <= 0"
            )
        return self.xi_corrected


@lru_cache(maxsize=1024)
def shape_params(n_dim: int, n_samples: int) -> ShapeParams:
    if isinstance(n_dim, bool) or isinstance(n_samples, bool):
        raise InvalidArgumentError("dimensions must be integers")
    if int(n_dim) != n_dim or int(n_samples) != n_samples:
        raise InvalidArgumentError("dimensions must be integers")
    n, s = int(n_dim), int(n_samples)
    if n < 1:
        raise InvalidArgumentError(f"n_dim must be >= 1, got {n}")
    if s < 2:
        raise InvalidArgumentError(f"n_samples must be >= 2, got {s}")

    root_s = math.sqrt(s - 0.5)
    root_n = math.sqrt(n - 0.5)
    mu = (root_s + root_n) ** 2
    xi = (root_s + root_n) * (1.0 / root_s + 1.0 / root_n) ** (1.0 / 3.0)

    ns = float(n) * float(s)
    spread = xi * xi - (2.0 / ns) * mu * mu
    xi_corrected = math.sqrt(ns / (2.0 + ns) * spread) if spread > 0.0 else None
    return ShapeParams(n_dim=n, n_samples=s, gamma=n / s, mu=mu, xi=xi, xi_corrected=xi_corrected)


def mp_edges(gamma: float, sigma_sq: float = 1.0) -> tuple[float, float]:
    """Support ((1 - sqrt(gamma))^2 sigma^2, (1 + sqrt(gamma))^2 sigma^2)."""
    gamma = float(gamma)
    sigma_sq = float(sigma_sq)
    if not math.isfinite(gamma) or gamma < 0.0:
        raise InvalidArgumentError(f"gamma must be finite and >= 0, got {gamma!r}")
    if not math.isfinite(sigma_sq) or sigma_sq <= 0.0:
        raise InvalidArgumentError(f"sigma_sq must be finite and > 0, got {sigma_sq!r}")
    root = math.sqrt(gamma)
    return (1.0 - root) ** 2 * sigma_sq, (1.0 + root) ** 2 * sigma_sq


def mp_density(x, gamma: float):
    """Unit-variance Marchenko-Pastur density for 0 < gamma <= 1."""
    _check_mp_gamma(gamma)
    lower, upper = mp_edges(gamma)
    x = np.asarray(x, dtype=np.float64)
    inside = (x > lower) & (x < upper)
    safe = np.where(inside, x, 1.0)
    val = np.sqrt(np.clip((upper - safe) * (safe - lower), 0.0, None)) / (2.0 * math.pi * gamma * safe)
    return np.where(inside, val, 0.0)


def _check_mp_gamma(gamma: float) -> None:
    if not (math.isfinite(gamma) and 0.0 < gamma <= 1.0):
        raise InvalidArgumentError(f"gamma must lie in (0, 1], got {gamma!r}")


def adaptive_simpson(f, a: float, b: float, tol: float = SIMPSON_TOL, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth - 1
        )

    if b == a:
        return 0.0
    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def _mp_theta_integrand(gamma: float):
    # x = c - r cos(theta) maps [0, pi] onto the support and cancels the
    # square-root edge behaviour: dx * sqrt((b - x)(x - a)) = r^2 sin^2(theta).
    c = 1.0 + gamma
    r = 2.0 * math.sqrt(gamma)
    norm = 2.0 * math.pi * gamma

    def f(theta: float) -> float:
        cos_t = math.cos(theta)
        x = c - r * cos_t
        if x <= 0.0:
            # gamma == 1 at theta == 0; sin^2 / (1 - cos) -> 1 + cos.
            return r * r * (1.0 + cos_t) / (norm * c)
        return r * r * (1.0 - cos_t * cos_t) / (norm * x)

    return f, c, r


def mp_cdf(x: float, gamma: float) -> float:
    """CDF of the unit-variance Marchenko-Pastur law for 0 < gamma <= 1."""
    _check_mp_gamma(gamma)
    lower, upper = mp_edges(gamma)
    if x <= lower:
        return 0.0
    if x >= upper:
        x = upper
    f, c, r = _mp_theta_integrand(gamma)
    theta = math.acos(min(1.0, max(-1.0, (c - x) / r)))
    return adaptive_simpson(f, 0.0, theta)


@lru_cache(maxsize=256)
def mp_median(gamma: float) -> float:
    """Median of the unit-variance Marchenko-Pastur law, 0 < gamma <= 1."""
    gamma = float(gamma)
    _check_mp_gamma(gamma)
    lower, upper = mp_edges(gamma)
    if upper - lower < 1e-12:
        return 0.5 * (lower + upper)
    return float(bisect(lambda x: mp_cdf(x, gamma) - 0.5, lower, upper, xtol=1e-14, rtol=1e-15, maxiter=200))
