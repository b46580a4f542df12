"""Explicit rate expressions and anti-concentration bounds.

Universal constants are never included: every function returns the
constant-free expression, and any constant is fitted downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ClassParams:
    v: float
    A_const: float
    b: float
    sigma: float
    q: float
    n: int
    N_B_eta: float = 1.0
    eta: float = 1.0
    gamma: float = 0.5

    def __post_init__(self):
        errors = []
        if not self.v >= 1:
            errors.append("v must be at least 1")
        if not self.A_const >= math.e:
            errors.append("A_const must be at least e")
        if not (self.sigma > 0 and self.b >= self.sigma):
            errors.append("need b >= sigma > 0")
        if not self.q >= 4:
            errors.append("q must lie in [4, inf)")
        if not self.n >= 1:
            errors.append("n must be a positive integer")
        if not self.N_B_eta >= 1:
            errors.append("N_B_eta must be at least 1")
        if not self.eta > 0:
            errors.append("eta must be positive")
        if not 0 < self.gamma < 1:
            errors.append("gamma must lie in (0,1)")
        if errors:
            raise InputError("; ".join(errors))


class Rate(NamedTuple):
    value: float
    side_condition_ok: bool


def kn_value(N_B_eta, v, n, A_const, b, sigma) -> float:
    return math.log(N_B_eta) + v * max(math.log(n), math.log(A_const * b / sigma))


def compute_Kn(p: ClassParams) -> float:
    """K_n = log N_B(eta) + v max(log n, log(A b / sigma))."""
    return kn_value(p.N_B_eta, p.v, p.n, p.A_const, p.b, p.sigma)


def delta1(b, sigma, kn, n, q, gamma) -> float:
    return b * kn / (gamma ** (1 / q) * n ** (0.5 - 1 / q)) + (b * sigma**2 * kn**2) ** (1 / 3) / (
        gamma ** (1 / 3) * n ** (1 / 6)
    )


def delta2(b, sigma, kn, n, q, gamma) -> float:
    g = gamma ** (1 + 1 / q)
    return b * kn / (g * n ** (0.5 - 1 / q)) + (b * sigma * kn**1.5) ** 0.5 / (g * n**0.25)


def delta3(b, sigma, kn, n, q, gamma) -> float:
    g = gamma ** (1 + 1 / q)
    return (
        b * kn / (g * n ** (0.5 - 1 / q))
        + (b * sigma**2 * kn**2) ** (1 / 3) / (gamma ** (1 / 3) * n ** (1 / 6))
        + (b * sigma * kn**1.5) ** 0.5 / (g * n**0.25)
    )


_DELTAS = {"d1": delta1, "d2": delta2, "d3": delta3}


def delta_rate(p: ClassParams, which: str) -> Rate:
    """Coupling rate for the empirical (d1), multiplier (d2) or empirical-bootstrap (d3) sup.

    The side condition is K_n^3 <= n for d1 and d3, K_n <= n for d2; a
    violation is reported, not raised.
    """
    if which not in _DELTAS:
        raise InputError(f"which must be one of {tuple(_DELTAS)}")
    kn = compute_Kn(p)
    value = _DELTAS[which](p.b, p.sigma, kn, p.n, p.q, p.gamma)
    ok = kn <= p.n if which == "d2" else kn**3 <= p.n
    return Rate(value, ok)


def third_moment_terms(values, delta: float, threshold: float | None = None) -> dict:
    """Plug-in L_n and M_{n,X}(delta) for a centred n x p matrix.

    The truncation level is delta * sqrt(n) / log p unless ``threshold`` is
    given directly.
    """
    X = np.atleast_2d(np.asarray(values, dtype=float))
    n, p = X.shape
    if p < 2 and threshold is None:
        raise InputError("need p >= 2 columns (log p must be positive)")
    if not delta > 0:
        raise InputError("delta must be positive")
    if threshold is None:
        threshold = delta * math.sqrt(n) / math.log(p)
    absx = np.abs(X)
    L_n = float(np.max(np.mean(absx**3, axis=0)))
    row_max = absx.max(axis=1)
    M = float(np.mean(row_max**3 * (row_max > threshold)))
    return {"L_n": L_n, "M_nX": M, "threshold": threshold}


def gaussian_tail_term(model, delta: float, n: int, mc_draws: int = 10**4, seed=0, threshold=None) -> dict:
    """Monte Carlo M_{n,Y}(delta) = E[max_j |Y_j|^3 1{max_j |Y_j| > delta sqrt(n) / log p}].

    Y is the centred Gaussian vector with the model's covariance.
    """
    if mc_draws < 10**4:
        raise InputError("mc_draws must be at least 10^4")
    p = model.size
    if threshold is None:
        threshold = math.inf if p < 2 else delta * math.sqrt(n) / math.log(p)
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((mc_draws, p)) @ model.factor.T
    row_max = np.abs(Y).max(axis=1)
    terms = row_max**3 * (row_max > threshold)
    return {
        "M_nY": float(terms.mean()),
        "se": float(terms.std(ddof=1) / math.sqrt(mc_draws)),
        "threshold": threshold,
    }


def cov_discrepancy(covX, covY) -> float:
    """Delta = max_{j,k} |covX_jk - covY_jk|."""
    a = np.asarray(covX, dtype=float)
    b = np.asarray(covY, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def nazarov_density_bound(p: int, underline_sigma: float, epsilon: float) -> float:
    """(2 eps / sigma_min) (sqrt(2 log p) + 2): bound on sup_t P(|max_j X_j - t| <= eps)."""
    if p < 1 or not underline_sigma > 0 or not epsilon > 0:
        raise InputError("need p >= 1, underline_sigma > 0, epsilon > 0")
    return 2.0 * epsilon / underline_sigma * (math.sqrt(2.0 * math.log(p)) + 2.0)


def anticoncentration_bound(underline_sigma, epsilon, phi_delta, cover_N, delta, r_grid) -> float:
    """min over r of 2 (eps + phi(delta) + r delta)(sqrt(2 log N) + 2) / sigma_min + exp(-r^2 / 2).

    Evaluated at one delta; callers minimise over their own delta grid.
    """
    r = np.asarray(r_grid, dtype=float).ravel()
    if r.size == 0:
        raise InputError("r_grid must be nonempty")
    if not underline_sigma > 0 or epsilon < 0 or phi_delta < 0 or delta < 0 or cover_N < 1:
        raise InputError("invalid anti-concentration inputs")
    width = math.sqrt(2.0 * math.log(cover_N)) + 2.0
    vals = 2.0 / underline_sigma * (epsilon + phi_delta + r * delta) * width + np.exp(-(r**2) / 2.0)
    return float(vals.min())


def levy_concentration_mc(mean, cov, epsilon: float, draws: int = 10**5, t_points: int = 200, seed=0) -> dict:
    """Monte Carlo sup_t P(|max_j X_j - t| <= eps) for X ~ N(mean, cov) over a t-grid.

    The grid spans the 0.1%-99.9% quantile range of the sampled maximum.
    Returns the largest window probability with its binomial standard error.
    """
    mean = np.asarray(mean, dtype=float).ravel()
    cov = np.asarray(cov, dtype=float)
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(cov)
    M = np.sort((mean + rng.standard_normal((draws, mean.size)) @ L.T).max(axis=1))
    ts = np.linspace(*np.quantile(M, [0.001, 0.999]), t_points)
    counts = np.searchsorted(M, ts + epsilon, side="right") - np.searchsorted(M, ts - epsilon, side="left")
    k = int(np.argmax(counts))
    prob = counts[k] / draws
    return {"prob": float(prob), "se": float(math.sqrt(prob * (1 - prob) / draws)), "t": float(ts[k])}
