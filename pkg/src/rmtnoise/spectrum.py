"""Sample covariance construction and descending eigenvalue spectra.

Observation layout is fixed everywhere: rows are observations, columns are
coordinates. A sample matrix of shape ``(s, N)`` yields an ``N x N``
covariance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import InsufficientSamplesError, InvalidArgumentError, InvalidMatrixError

Scale = Literal["covariance", "wishart"]
Method = Literal["lapack", "jacobi"]

RANK_TOL = 1e-12
SYMMETRY_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def as_sample_matrix(data) -> np.ndarray:
    """Validate observations and return them as a float64 ``(s, N)`` array."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidMatrixError(f"sample matrix must be 2-d, got shape {arr.shape}")
    if arr.shape[1] < 1:
        raise InvalidMatrixError("sample matrix needs at least one column")
    if arr.shape[0] < 2:
        raise InsufficientSamplesError(f"need at least 2 observations, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrixError("sample matrix contains non-finite entries")
    return arr


def sample_covariance(data) -> np.ndarray:
    """Centered covariance with the 1/(s-1) normalisation."""
    x = as_sample_matrix(data)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    return 0.5 * (cov + cov.T)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending, plus the (N, s) shape they came from.

    ``scale`` records whether ``values`` are eigenvalues of the covariance
    (1/(s-1) normalisation) or of the Wishart matrix (s-1) * covariance.
    """

    values: np.ndarray
    n_dim: int
    n_samples: int
    scale: Scale = "covariance"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise InvalidArgumentError("spectrum values must be a non-empty 1-d array")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("spectrum values must be finite")
        if np.any(np.diff(values) > 0):
            raise InvalidArgumentError("spectrum values must be sorted in descending order")
        if self.scale not in ("covariance", "wishart"):
            raise InvalidArgumentError(f"unknown scale {self.scale!r}")
        if self.n_samples < 2:
            raise InsufficientSamplesError(f"need at least 2 samples, got {self.n_samples}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, n_samples: int, scale: Scale = "covariance") -> "Spectrum":
        """Build from eigenvalues in any order; ``n_dim`` is their count."""
        vals = np.sort(np.asarray(values, dtype=np.float64))[::-1]
        return cls(values=vals, n_dim=vals.size, n_samples=int(n_samples), scale=scale)

    @property
    def rank_tolerance(self) -> float:
        return RANK_TOL * max(float(self.values[0]), 0.0)

    @property
    def numerically_zero(self) -> np.ndarray:
        """Mask of eigenvalues at or below the rank tolerance."""
        return self.values <= self.rank_tolerance

    @property
    def numerical_rank(self) -> int:
        return int(np.count_nonzero(~self.numerically_zero))


def rescale(spec: Spectrum, target: Scale) -> Spectrum:
    if target not in ("covariance", "wishart"):
        raise InvalidArgumentError(f"unknown scale {target!r}")
    if spec.scale == target:
        return spec
    factor = float(spec.n_samples - 1)
    values = spec.values * factor if target == "wishart" else spec.values / factor
    return replace(spec, values=values, scale=target)


def _check_symmetric(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrixError(f"matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrixError("matrix contains non-finite entries")
    norm = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * max(norm, np.finfo(float).tiny):
        raise InvalidMatrixError("matrix is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep: every (p, q) exactly once, disjoint within a round."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p >= 0 and q >= 0]
        if pairs:
            p, q = np.array(pairs).T
            rounds.append((p, q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(m, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Each sweep visits every off-diagonal pair once in round-robin order, so
    the rotations inside a round act on disjoint index pairs and are applied
    together. Stops when the off-diagonal Frobenius mass drops below
    ``tol * ||m||_F`` or after ``max_sweeps`` sweeps.

    Returns
    -------
    values : ndarray
        Eigenvalues, descending.
    vectors : ndarray
        Orthogonal matrix whose columns are the matching eigenvectors.
    sweeps : int
        Number of sweeps performed.
    """
    a = _check_symmetric(m).copy()
    n = a.shape[0]
    v = np.eye(n)
    total = np.linalg.norm(a)
    rounds = _round_robin(n)
    sweeps = 0

    def off_mass(a):
        # measured directly: ||a||^2 - ||diag||^2 cancels catastrophically near convergence
        off = a.copy()
        np.fill_diagonal(off, 0.0)
        return np.linalg.norm(off)

    while n > 1 and total > 0 and off_mass(a) > tol * total and sweeps < max_sweeps:
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            with np.errstate(over="ignore"):
                theta = np.where(active, (a[q, q] - a[p, p]) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            t = np.where(active, np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            t = np.where(active & (theta == 0.0), 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            cols_p, cols_q = a[:, p], a[:, q]
            a[:, p] = cols_p * c - cols_q * s
            a[:, q] = cols_p * s + cols_q * c
            rows_p, rows_q = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp, vq = v[:, p], v[:, q]
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
        sweeps += 1

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")[::-1]
    return values[order], v[:, order], sweeps


def eigen_spectrum(m, n_samples: int, scale: Scale = "covariance", method: Method = "lapack") -> Spectrum:
    """All eigenvalues of symmetric ``m``, descending, wrapped as a Spectrum.

    ``method="lapack"`` calls ``numpy.linalg.eigvalsh``; ``method="jacobi"``
    uses :func:`jacobi_eigh`.
    """
    a = _check_symmetric(m)
    if method == "lapack":
        values = np.linalg.eigvalsh(a)[::-1].copy()
    elif method == "jacobi":
        values = jacobi_eigh(a)[0]
    else:
        raise InvalidArgumentError(f"unknown eigensolver {method!r}")
    return Spectrum(values=values, n_dim=a.shape[0], n_samples=int(n_samples), scale=scale)


def spectrum_of(data, method: Method = "lapack") -> Spectrum:
    """Covariance-scale spectrum of an observation matrix."""
    x = as_sample_matrix(data)
    return eigen_spectrum(sample_covariance(x), n_samples=x.shape[0], method=method)
