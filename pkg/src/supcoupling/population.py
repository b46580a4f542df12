"""Data-generating distributions and population moments of net members."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, stats

from .errors import ConfigurationError

DISTRIBUTIONS = ("uniform_cube", "standard_gaussian", "custom_tabulated")

# x-grid resolution for two-dimensional disk/square overlap integrals
_GRID_2D = 1 << 14


@dataclass(eq=False)
class Population:
    """Law P of one observation.

    ``uniform_cube`` is uniform on [0, 1]^dim, ``standard_gaussian`` is
    N(0, I_dim), and ``custom_tabulated`` puts mass ``probs[k]`` on label k
    (dim must be 1).  Quantities without a closed form are averaged over a
    one-time reference sample of ``reference_size`` draws.
    """

    distribution: str
    dim: int
    probs: Optional[np.ndarray] = None
    reference_size: int = 10**6
    reference_seed: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigurationError(f"unknown distribution {self.distribution!r}")
        self.dim = int(self.dim)
        if self.distribution == "custom_tabulated":
            if self.probs is None or self.dim != 1:
                raise ConfigurationError("custom_tabulated needs probs and dim=1")
            p = np.asarray(self.probs, dtype=float).ravel()
            if np.any(p < 0) or not math.isclose(p.sum(), 1.0, rel_tol=1e-12):
                raise ConfigurationError("probs must be a probability vector")
            self.probs = p

    def sample(self, n: int, rng) -> np.ndarray:
        if self.distribution == "uniform_cube":
            return rng.random((n, self.dim))
        if self.distribution == "standard_gaussian":
            return rng.standard_normal((n, self.dim))
        return rng.choice(len(self.probs), size=n, p=self.probs).astype(float)[:, None]

    def mean(self) -> np.ndarray:
        if self.distribution == "uniform_cube":
            return np.full(self.dim, 0.5)
        if self.distribution == "standard_gaussian":
            return np.zeros(self.dim)
        return np.array([float(np.arange(len(self.probs)) @ self.probs)])

    def second_moment(self) -> np.ndarray:
        """E[X X^T]."""
        if self.distribution == "uniform_cube":
            return np.eye(self.dim) / 12.0 + 0.25
        if self.distribution == "standard_gaussian":
            return np.eye(self.dim)
        k = np.arange(len(self.probs), dtype=float)
        return np.array([[float(k * k @ self.probs)]])

    def covariance(self) -> np.ndarray:
        m = self.mean()
        return self.second_moment() - np.outer(m, m)


def _disk_square_slice(cx, cy, r, x):
    h = np.sqrt(np.clip(r * r - (x - cx) ** 2, 0.0, None))
    lo = np.maximum(0.0, cy - h)
    hi = np.minimum(1.0, cy + h)
    inside = (np.abs(x - cx) <= r)
    return np.where(inside, lo, 0.0), np.where(inside, hi, 0.0)


def disk_square_area(cx: float, cy: float, r: float) -> float:
    """Area of the closed disk B((cx, cy), r) intersected with [0, 1]^2."""
    a, b = max(0.0, cx - r), min(1.0, cx + r)
    if a >= b:
        return 0.0

    def length(x):
        lo, hi = _disk_square_slice(cx, cy, r, x)
        return max(0.0, float(hi - lo))

    kinks = []
    for level in (cy, 1.0 - cy):
        if 0.0 <= level < r:
            w = math.sqrt(r * r - level * level)
            kinks += [cx - w, cx + w]
    kinks = sorted(k for k in kinks if a < k < b)
    val, _ = integrate.quad(length, a, b, points=kinks or None, epsabs=1e-13, epsrel=1e-12, limit=400)
    return float(val)


def _ball_volume(d, r):
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * r**d


def _reference_moments(net, pop: Population, second: bool):
    rng = np.random.default_rng(pop.reference_seed)
    N = len(net)
    s1 = np.zeros(N)
    s2 = np.zeros((N, N)) if second else None
    chunk = max(1000, min(pop.reference_size, 4_000_000 // max(N, 1)))
    done = 0
    while done < pop.reference_size:
        m = min(chunk, pop.reference_size - done)
        V = net.values(pop.sample(m, rng))
        s1 += V.sum(axis=0)
        if second:
            s2 += V.T @ V
        done += m
    s1 /= pop.reference_size
    if second:
        s2 /= pop.reference_size
    return s1, s2


def _check_population(net, pop):
    cls = net.class_ref
    if pop.dim != cls.dim:
        raise ConfigurationError(f"population dimension {pop.dim} != class dimension {cls.dim}")
    if cls.kind == "tabulated" and pop.distribution != "custom_tabulated":
        raise ConfigurationError("tabulated classes need a custom_tabulated population")


def first_moments(net, pop: Population) -> np.ndarray:
    """Pf_j for each net member, in closed form where one is known."""
    _check_population(net, pop)
    cls, P = net.class_ref, net.members
    d = cls.dim
    dist = pop.distribution
    if cls.kind == "linear_sphere" and dist != "custom_tabulated":
        return P @ pop.mean()
    if cls.kind == "tabulated":
        return cls.table[P[:, 0].astype(int)] @ pop.probs
    if cls.kind == "ball" and dist == "standard_gaussian":
        nc = np.einsum("ij,ij->i", P[:, :d], P[:, :d])
        central = stats.chi2.cdf(P[:, d] ** 2, d)
        shifted = stats.ncx2.cdf(P[:, d] ** 2, d, np.where(nc > 0, nc, 1.0))
        return np.where(nc > 0, shifted, central)
    if cls.kind == "halfspace" and dist == "standard_gaussian":
        return stats.norm.cdf(P[:, d])
    if cls.kind == "ball" and dist == "uniform_cube":
        if d == 2:
            return np.array([disk_square_area(c0, c1, r) for c0, c1, r in P])
        c, r = P[:, :d], P[:, d]
        inside = np.all((c - r[:, None] >= 0.0) & (c + r[:, None] <= 1.0), axis=1)
        if inside.all():
            return np.array([_ball_volume(d, ri) for ri in r])
    return _reference_moments(net, pop, second=False)[0]


def _disk_overlap_moments(net):
    """Means and second moments of 2-d disk indicators under U[0,1]^2 on an x-grid."""
    P = net.members
    x = (np.arange(_GRID_2D) + 0.5) / _GRID_2D
    lo, hi = _disk_square_slice(P[:, 0:1], P[:, 1:2], P[:, 2:3], x[None, :])
    length = np.clip(hi - lo, 0.0, None)
    N = P.shape[0]
    S = np.empty((N, N))
    for j in range(N):
        ov = np.minimum(hi[j], hi) - np.maximum(lo[j], lo)
        S[j] = np.clip(ov, 0.0, None).mean(axis=1)
    S = 0.5 * (S + S.T)
    return length.mean(axis=1), S


def covariance_matrix(net, pop: Population) -> np.ndarray:
    """Cov(f_j(X), f_k(X)) over the net, exactly symmetric."""
    _check_population(net, pop)
    cls, P = net.class_ref, net.members
    dist = pop.distribution
    if cls.kind == "linear_sphere" and dist != "custom_tabulated":
        C = P @ pop.covariance() @ P.T
    elif cls.kind == "tabulated":
        T = cls.table[P[:, 0].astype(int)]
        m = T @ pop.probs
        C = (T * pop.probs) @ T.T - np.outer(m, m)
    elif cls.kind == "ball" and dist == "uniform_cube" and cls.dim == 2:
        m, S = _disk_overlap_moments(net)
        C = S - np.outer(m, m)
    else:
        m, S = _reference_moments(net, pop, second=True)
        if cls.is_indicator:
            # f^2 = f, and the diagonal can use the exact means
            m_exact = first_moments(net, pop)
            np.fill_diagonal(S, m_exact)
            off = S - np.outer(m, m)
            np.fill_diagonal(off, m_exact * (1.0 - m_exact))
            C = off
        else:
            C = S - np.outer(m, m)
    return 0.5 * (C + C.T)
