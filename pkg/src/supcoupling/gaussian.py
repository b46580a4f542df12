"""Discretised limit process: covariance model of (G_P f_j) and draws of its drifted maximum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .population import Population, covariance_matrix
from .process import SupSample, _chunks

JITTER_LEVELS = (0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4)


def _symmetric(cov):
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape[0] != cov.shape[1]:
        raise InputError("covariance must be square")
    scale = max(1.0, float(np.abs(cov).max(initial=0.0)))
    if not np.allclose(cov, cov.T, atol=1e-10 * scale, rtol=0.0):
        raise InputError("covariance must be symmetric")
    return 0.5 * (cov + cov.T)


def _factorize(cov):
    N = cov.shape[0]
    trace = float(np.trace(cov))
    if not np.any(cov):
        return cov.copy(), np.zeros_like(cov), 0.0
    unit = trace / N if trace > 0 else float(np.abs(cov).max())
    for level in JITTER_LEVELS:
        jitter = level * unit
        shifted = cov + jitter * np.eye(N) if jitter else cov
        try:
            return shifted, np.linalg.cholesky(shifted), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        "covariance could not be factorised at the largest jitter",
        {
            "min_eigenvalue": float(np.linalg.eigvalsh(cov)[0]),
            "trace": trace,
            "max_jitter": JITTER_LEVELS[-1] * unit,
        },
    )


def psd_repair(cov):
    """Add the smallest diagonal jitter from the ladder that makes Cholesky succeed.

    Returns ``(cov + jitter * I, jitter)``; jitter levels are multiples of
    ``trace(cov) / N``.
    """
    shifted, _, jitter = _factorize(_symmetric(cov))
    return shifted, jitter


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    mean: np.ndarray
    cov: np.ndarray
    factor: np.ndarray
    jitter_applied: float = 0.0

    @classmethod
    def from_cov(cls, mean, cov) -> "CovarianceModel":
        cov = _symmetric(cov)
        mean = np.asarray(mean, dtype=float).ravel()
        if mean.shape[0] != cov.shape[0]:
            raise InputError("mean and covariance sizes differ")
        _, L, jitter = _factorize(cov)
        return cls(mean, cov, L, jitter)

    @property
    def size(self) -> int:
        return self.mean.shape[0]

    def permuted(self, perm) -> "CovarianceModel":
        perm = np.asarray(perm, dtype=int)
        return CovarianceModel.from_cov(self.mean[perm], self.cov[np.ix_(perm, perm)])

    def draw(self, reps: int, rng) -> np.ndarray:
        """``reps`` draws of the drifted Gaussian vector, shape ``(reps, N)``."""
        w = rng.standard_normal((reps, self.size))
        return self.mean + w @ self.factor.T


def estimate_covariance(net, population: Population) -> CovarianceModel:
    """Covariance model of (B(f_j) + G_P f_j)_j with E[G_P f G_P g] = Cov(f(X), g(X))."""
    return CovarianceModel.from_cov(net.drift, covariance_matrix(net, population))


def sample_gaussian_sup(model: CovarianceModel, seed) -> SupSample:
    rng = np.random.default_rng(seed)
    value = float(np.max(model.draw(1, rng)[0]))
    return SupSample(value, "Ztilde", weight_seed=seed)


def gaussian_sups(model: CovarianceModel, reps: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty(reps)
    step = max(1, 4_000_000 // max(1, model.size))
    for a, b in _chunks(reps, step):
        out[a:b] = model.draw(b - a, rng).max(axis=1)
    return out
