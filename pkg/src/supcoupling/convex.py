"""Probability that a normalised sum lands in a closed convex set, via support functions.

S_n = n^{-1/2} sum_i X_i lies in A iff sup_v (v . S_n - V_A(v)) <= 0 over unit v.
Over a sphere net this is the sup of the linear empirical process with drift
B(v) = sqrt(n) v . E[X] - V_A(v).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ._seeding import derive_seed
from .errors import ConfigurationError, InputError
from .function_class import sphere_net
from .gaussian import CovarianceModel, gaussian_sups
from .population import Population
from .process import _chunks, multiplier_bootstrap_sups

SET_KINDS = ("ball", "box", "halfspace", "polytope")
METHODS = ("direct_mc", "gaussian", "multiplier_bootstrap")


@dataclass(eq=False)
class ConvexSetSpec:
    """Closed convex set in R^dim.

    ``ball``: center, radius.  ``box``: lo, hi.  ``halfspace``: {x : normal . x <= offset}.
    ``polytope``: {x : normals @ x <= offsets}.
    """

    kind: str
    dim: int
    center: Optional[np.ndarray] = None
    radius: float = 1.0
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None
    normal: Optional[np.ndarray] = None
    offset: float = 0.0
    normals: Optional[np.ndarray] = None
    offsets: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise InputError(f"unknown set kind {self.kind!r}")
        d = self.dim = int(self.dim)
        if self.kind == "ball":
            self.center = np.zeros(d) if self.center is None else np.asarray(self.center, dtype=float)
            if not self.radius > 0:
                raise InputError("radius must be positive")
        elif self.kind == "box":
            self.lo = np.asarray(self.lo, dtype=float)
            self.hi = np.asarray(self.hi, dtype=float)
            if np.any(self.lo > self.hi):
                raise InputError("box needs lo <= hi componentwise")
        elif self.kind == "halfspace":
            a = np.asarray(self.normal, dtype=float)
            norm = np.linalg.norm(a)
            if norm == 0:
                raise InputError("halfspace normal must be nonzero")
            self.normal, self.offset = a / norm, float(self.offset) / norm
        else:
            self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
            self.offsets = np.asarray(self.offsets, dtype=float).ravel()
            if self.normals.shape != (self.offsets.size, d):
                raise InputError("polytope normals must be (m, dim) with m offsets")

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "ball":
            return np.linalg.norm(x - self.center, axis=1) <= self.radius
        if self.kind == "box":
            return np.all((x >= self.lo) & (x <= self.hi), axis=1)
        if self.kind == "halfspace":
            return x @ self.normal <= self.offset
        return np.all(x @ self.normals.T <= self.offsets, axis=1)


def support_function(A: ConvexSetSpec, v, check_unit: bool = True) -> float:
    """V_A(v) = sup_{x in A} v . x; ``math.inf`` flags an unbounded direction."""
    v = np.asarray(v, dtype=float).ravel()
    if v.shape[0] != A.dim:
        raise InputError("direction has the wrong dimension")
    if check_unit and abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise InputError("direction must be a unit vector")
    if A.kind == "ball":
        return float(v @ A.center + A.radius * np.linalg.norm(v))
    if A.kind == "box":
        return float(np.sum(np.maximum(v * A.lo, v * A.hi)))
    if A.kind == "halfspace":
        c = float(v @ A.normal)
        if c > 0 and np.allclose(v, c * A.normal, atol=1e-12, rtol=0.0):
            return c * A.offset
        return math.inf
    res = linprog(-v, A_ub=A.normals, b_ub=A.offsets, bounds=[(None, None)] * A.dim, method="highs")
    if res.status == 3:
        return math.inf
    if res.status != 0:
        raise ConfigurationError(f"polytope support LP failed: {res.message}")
    return float(-res.fun)


def _directions(A: ConvexSetSpec, eps: float, seed) -> np.ndarray:
    if A.kind == "halfspace":
        return A.normal[None, :]
    return sphere_net(A.dim, eps, seed)


def _drift(A, dirs, population: Population, n: int):
    support = np.array([support_function(A, v) for v in dirs])
    if not np.all(np.isfinite(support)):
        raise ConfigurationError("support function is unbounded along a net direction")
    return math.sqrt(n) * dirs @ population.mean() - support


def _prob_leq_zero(sups):
    p = float(np.mean(sups <= 0.0))
    return p, math.sqrt(p * (1.0 - p) / sups.size)


def _direct_sups(dirs, drift, population, n, reps, seed):
    rng = np.random.default_rng(seed)
    mu = population.mean()
    out = np.empty(reps)
    step = max(1, 2_000_000 // (n * population.dim))
    for a, b in _chunks(reps, step):
        X = population.sample((b - a) * n, rng).reshape(b - a, n, population.dim)
        G = (X.sum(axis=1) - n * mu) / math.sqrt(n)
        out[a:b] = (drift + G @ dirs.T).max(axis=1)
    return out


def _sups(A, population, n, eps, method, reps, seed):
    dirs = _directions(A, eps, derive_seed(seed, 0))
    drift = _drift(A, dirs, population, n)
    if method == "direct_mc":
        return _direct_sups(dirs, drift, population, n, reps, derive_seed(seed, 1)), len(dirs)
    if method == "gaussian":
        model = CovarianceModel.from_cov(drift, dirs @ population.covariance() @ dirs.T)
        return gaussian_sups(model, reps, derive_seed(seed, 2)), len(dirs)
    X = population.sample(n, np.random.default_rng(derive_seed(seed, 3)))
    return multiplier_bootstrap_sups(X @ dirs.T, drift, reps, derive_seed(seed, 4)), len(dirs)


def convex_probability(
    A: ConvexSetSpec,
    population: Population,
    n: int,
    sphere_net_eps: float,
    method: str = "gaussian",
    reps: int = 10_000,
    seed=0,
) -> dict:
    """Estimate P(n^{-1/2} sum_i X_i in A) through the sup over a sphere net.

    The net-bias column is the spread between the estimate at ``sphere_net_eps``
    and at twice that mesh (same seeds).  Halfspaces use their single normal.
    """
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}")
    if population.dim != A.dim:
        raise ConfigurationError("population and set dimensions differ")
    if not sphere_net_eps > 0:
        raise InputError("sphere_net_eps must be positive")
    sups, size = _sups(A, population, n, sphere_net_eps, method, reps, seed)
    prob, se = _prob_leq_zero(sups)
    if A.kind == "halfspace":
        bias = 0.0
    else:
        coarse, _ = _sups(A, population, n, 2.0 * sphere_net_eps, method, reps, seed)
        bias = abs(prob - _prob_leq_zero(coarse)[0])
    return {"prob": prob, "se": se, "net_bias": bias, "net_size": size}

