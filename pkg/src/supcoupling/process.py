"""Suprema of the empirical, multiplier-bootstrap and empirical-bootstrap processes over a net.

All three statistics depend on the data only through the function-value
matrix ``V[i, j] = f_j(X_i)``.  The single-draw functions return a
:class:`SupSample`; the ``*_sups`` functions draw many replications at once
and are what the experiment layer uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .population import Population, first_moments

SUP_KINDS = ("Z", "Ze", "Zstar", "Ztilde")


@dataclass(frozen=True)
class SupSample:
    value: float
    kind: str
    conditioning_seed: Optional[int] = None
    weight_seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SUP_KINDS:
            raise InputError(f"unknown sup kind {self.kind!r}")
        if not math.isfinite(self.value):
            raise InputError("sup value must be finite")


@dataclass(eq=False)
class DataSample:
    points: np.ndarray
    distribution: str
    seed: Optional[int] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        if self.points.shape[0] < 1:
            raise InputError("a data sample needs n >= 1 points")

    @property
    def n(self) -> int:
        return self.points.shape[0]


def draw_data(population: Population, n: int, seed: int) -> DataSample:
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return DataSample(population.sample(n, rng), population.distribution, seed)


def mean_vector(net, population: Population) -> np.ndarray:
    """Pf_j for every net member (closed form where known, else a reference sample)."""
    return first_moments(net, population)


def _sup(drift, process_values):
    return np.max(drift + process_values, axis=-1)


def empirical_sup_from_values(values, drift, means) -> float:
    V = np.asarray(values, dtype=float)
    n = V.shape[0]
    G = (V.sum(axis=0) - n * np.asarray(means)) / math.sqrt(n)
    return float(_sup(drift, G))


def empirical_sup(data: DataSample, net, means) -> SupSample:
    """Z = max_j (B(f_j) + n^{-1/2} sum_i (f_j(X_i) - Pf_j))."""
    means = np.asarray(means, dtype=float)
    if means.shape != (len(net),):
        raise InputError("means must have one entry per net member")
    value = empirical_sup_from_values(net.values(data.points), net.drift, means)
    return SupSample(value, "Z", conditioning_seed=data.seed)


def multiplier_bootstrap_sup(data: DataSample, net, multiplier_seed, multipliers=None) -> SupSample:
    """Z^e given the data; ``multipliers`` overrides the Gaussian draws."""
    V = net.values(data.points)
    n = V.shape[0]
    if multipliers is None:
        e = np.random.default_rng(multiplier_seed).standard_normal(n)
    else:
        e = np.asarray(multipliers, dtype=float)
        if e.shape != (n,):
            raise InputError("need one multiplier per observation")
    Vc = V - V.mean(axis=0)
    value = float(_sup(net.drift, e @ Vc / math.sqrt(n)))
    return SupSample(value, "Ze", conditioning_seed=data.seed, weight_seed=multiplier_seed)


def multinomial_weights(n: int, seed) -> np.ndarray:
    """Multinomial(n; 1/n, ..., 1/n) counts via n uniform cell assignments."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return np.bincount(rng.integers(0, n, size=n), minlength=n)


def _multinomial_batch(n, reps, rng):
    cells = rng.integers(0, n, size=(reps, n))
    offsets = (np.arange(reps) * n)[:, None]
    return np.bincount((cells + offsets).ravel(), minlength=reps * n).reshape(reps, n)


def empirical_bootstrap_sup(data: DataSample, net, weight_seed, weights=None) -> SupSample:
    """Z^* given the data; ``weights`` overrides the multinomial draw."""
    V = net.values(data.points)
    n = V.shape[0]
    w = multinomial_weights(n, weight_seed) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise InputError("need one weight per observation")
    value = float(_sup(net.drift, (w - 1.0) @ V / math.sqrt(n)))
    return SupSample(value, "Zstar", conditioning_seed=data.seed, weight_seed=weight_seed)


def _chunks(total, size):
    start = 0
    while start < total:
        stop = min(total, start + size)
        yield start, stop
        start = stop


def _chunk_rows(n, N, budget=2_000_000):
    return max(1, budget // max(1, n * N))


def multiplier_bootstrap_sups(values, drift, reps: int, seed) -> np.ndarray:
    """``reps`` conditional draws of Z^e for one fixed function-value matrix."""
    V = np.asarray(values, dtype=float)
    n = V.shape[0]
    Vc = (V - V.mean(axis=0)) / math.sqrt(n)
    rng = np.random.default_rng(seed)
    out = np.empty(reps)
    for a, b in _chunks(reps, _chunk_rows(n, 1, 4_000_000)):
        out[a:b] = _sup(drift, rng.standard_normal((b - a, n)) @ Vc)
    return out


def empirical_bootstrap_sups(values, drift, reps: int, seed) -> np.ndarray:
    """``reps`` conditional draws of Z^* for one fixed function-value matrix."""
    V = np.asarray(values, dtype=float)
    n = V.shape[0]
    Vs = V / math.sqrt(n)
    rng = np.random.default_rng(seed)
    out = np.empty(reps)
    for a, b in _chunks(reps, _chunk_rows(n, 1, 4_000_000)):
        w = _multinomial_batch(n, b - a, rng) - 1.0
        out[a:b] = _sup(drift, w @ Vs)
    return out


def empirical_sups(net, population: Population, means, n: int, reps: int, seed) -> np.ndarray:
    """``reps`` independent draws of Z, each from a fresh sample of size n."""
    means = np.asarray(means, dtype=float)
    N = len(net)
    rng = np.random.default_rng(seed)
    out = np.empty(reps)
    root_n = math.sqrt(n)
    for a, b in _chunks(reps, _chunk_rows(n, N)):
        m = b - a
        X = population.sample(m * n, rng)
        sums = net.values(X).reshape(m, n, N).sum(axis=1)
        out[a:b] = _sup(net.drift, (sums - n * means) / root_n)
    return out
