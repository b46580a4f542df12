"""Smooth surrogates used in the coupling arguments.

``softmax`` is the log-sum-exp smooth maximum; :class:`MollifiedIndicator`
smooths the indicator of a finite union of closed intervals by convolving a
Lipschitz ramp with a compactly supported bump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InputError


def softmax(x, beta: float, mu_bar=None) -> float:
    """beta^{-1} log sum_j exp(beta (x_j + mu_bar_j)), evaluated max-shifted.

    Lies between max_j (x_j + mu_bar_j) and that maximum plus log(p) / beta.
    """
    if not beta > 0:
        raise InputError("beta must be positive")
    y = np.asarray(x, dtype=float).ravel()
    if y.size < 1:
        raise InputError("x must have at least one coordinate")
    if mu_bar is not None:
        y = y + np.asarray(mu_bar, dtype=float).ravel()
    top = float(y.max())
    return top + math.log(float(np.exp(beta * (y - top)).sum())) / beta


def bump(z):
    """Unnormalised bump exp(1 / (z^2 - 1)) on (-1, 1), zero elsewhere."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(1.0 / (z[inside] ** 2 - 1.0))
    return out


@lru_cache(maxsize=None)
def _gauss_legendre(nodes: int):
    return np.polynomial.legendre.leggauss(nodes)


@lru_cache(maxsize=None)
def bump_normaliser(nodes: int = 201) -> float:
    """Constant C with C * integral of the bump over [-1, 1] equal to one."""
    z, w = _gauss_legendre(nodes)
    return 1.0 / float(w @ bump(z))


def _merge(intervals):
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    merged = []
    for a, b in ivs:
        if b < a:
            raise InputError(f"interval [{a}, {b}] is empty")
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(iv) for iv in merged]


def distance_to_union(t, intervals):
    """Euclidean distance from each t to a union of closed intervals."""
    t = np.asarray(t, dtype=float)
    d = np.full(t.shape, np.inf)
    for a, b in intervals:
        d = np.minimum(d, np.maximum(np.maximum(a - t, t - b), 0.0))
    return d


@dataclass(eq=False)
class MollifiedIndicator:
    """Smooth g with 1_A <= g <= 1_{A^{3 delta}} and |g'| <= 1 / delta.

    g(t) = integral of h(t + delta z) phi(z) dz, with
    h(t) = (1 - dist(t, A^delta) / delta)_+ and phi the normalised bump.
    The integral is Gauss-Legendre on the pieces of [-1, 1] between the kinks
    of h, so the rule is exact up to the bump's smoothness.
    """

    intervals: list
    delta: float
    quadrature_nodes: int = 201
    _grown: list = field(init=False, repr=False)
    _kinks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise InputError("delta must be positive")
        if not self.intervals:
            raise InputError("the set needs at least one interval")
        self.intervals = _merge(self.intervals)
        dl = self.delta
        self._grown = _merge([(a - dl, b + dl) for a, b in self.intervals])
        kinks = []
        for a, b in self._grown:
            kinks += [a - dl, a, b, b + dl]
        # distance to a union has kinks halfway across each gap
        for (a0, b0), (a1, b1) in zip(self._grown, self._grown[1:]):
            kinks.append(0.5 * (b0 + a1))
        self._kinks = np.unique(kinks)

    def ramp(self, t):
        return np.clip(1.0 - distance_to_union(t, self._grown) / self.delta, 0.0, None)

    def indicator(self, t, enlargement: float = 0.0):
        t = np.asarray(t, dtype=float)
        return (distance_to_union(t, self.intervals) <= enlargement).astype(float)

    def _eval_one(self, t: float) -> float:
        z, w = _gauss_legendre(self.quadrature_nodes)
        C = bump_normaliser(self.quadrature_nodes)
        breaks = (self._kinks - t) / self.delta
        breaks = breaks[(breaks > -1.0) & (breaks < 1.0)]
        edges = np.concatenate([[-1.0], breaks, [1.0]])
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = 0.5 * (hi - lo)
            zz = lo + half * (z + 1.0)
            total += half * float(w @ (self.ramp(t + self.delta * zz) * bump(zz)))
        return C * total

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.array([self._eval_one(float(s)) for s in t_arr.ravel()]).reshape(t_arr.shape)
        return float(out) if out.ndim == 0 else out


def mollified_indicator_eval(g: MollifiedIndicator, t):
    return g(t)


def derivative_bound_check(g: MollifiedIndicator, grid, fd_step: float) -> dict:
    """Central finite-difference estimates of delta^k * max|g^(k)| for k = 1, 2, 3.

    ``fd_step`` must be at most delta / 100.  The first-order bound
    max|g'| * delta <= 1.05 is checked and reported as ``first_ok``.
    """
    dl = g.delta
    h = float(fd_step)
    if not 0 < h <= dl / 100.0 * (1 + 1e-12):
        raise InputError("fd_step must lie in (0, delta / 100]")
    t = np.asarray(grid, dtype=float).ravel()
    stencil = g(np.concatenate([t - 2 * h, t - h, t, t + h, t + 2 * h])).reshape(5, -1)
    m2, m1, c, p1, p2 = stencil
    d1 = (p1 - m1) / (2 * h)
    d2 = (p1 - 2 * c + m1) / (h * h)
    d3 = (p2 - 2 * p1 + 2 * m1 - m2) / (2 * h**3)
    report = {
        "first": float(np.max(np.abs(d1))) * dl,
        "second": float(np.max(np.abs(d2))) * dl**2,
        "third": float(np.max(np.abs(d3))) * dl**3,
        "d1": d1,
        "d2": d2,
        "d3": d3,
    }
    report["first_ok"] = report["first"] <= 1.05
    return report
