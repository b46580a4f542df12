"""Monte Carlo experiments comparing the laws of Z, Z^e | X, Z^* | X with the Gaussian sup.

Marginal runs draw one Z per independent data sample.  Conditional runs fix
a data sample and replicate only the bootstrap weights, then summarise the
per-sample Kolmogorov distances across data samples.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special, stats

from . import bounds
from ._seeding import derive_seed
from .errors import InputError
from .function_class import DriftSpec, FunctionClassSpec, Net, build_net, drift_count
from .gaussian import CovarianceModel, estimate_covariance, gaussian_sups
from .population import Population
from .process import empirical_bootstrap_sups, empirical_sups, mean_vector, multiplier_bootstrap_sups

KS_BAND_COEF = 1.36
# outer replications are split into fixed blocks so results do not depend on thread count
_BLOCK = 250


def kolmogorov_distance(sample1, sample2) -> float:
    """sup_t |F1(t) - F2(t)| for the right-continuous empirical CDFs of two samples.

    Both step functions only jump at sample points, so the supremum is attained
    on the merged set of jump points.
    """
    a = np.sort(np.asarray(sample1, dtype=float).ravel())
    b = np.sort(np.asarray(sample2, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise InputError("both samples must be nonempty")
    jumps = np.concatenate([a, b])
    Fa = np.searchsorted(a, jumps, side="right") / a.size
    Fb = np.searchsorted(b, jumps, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))


def ks_band(m: int, m2: int) -> float:
    """Two-sample KS noise scale 1.36 sqrt(1/m + 1/m')."""
    return KS_BAND_COEF * math.sqrt(1.0 / m + 1.0 / m2)


def coupling_to_kolmogorov(r1: float, r2: float, levy_concentration: float) -> float:
    """Kolmogorov bound sup_t P(|W - t| <= r1) + r2 given P(|V - W| > r1) <= r2."""
    if r1 < 0 or not 0 <= r2 <= 1 or not 0 <= levy_concentration:
        raise InputError("need r1 >= 0, r2 in [0, 1], levy_concentration >= 0")
    return levy_concentration + r2


def rate_regression(ns, ks) -> dict:
    """Least-squares fit of log KS against log n."""
    ns = np.asarray(ns, dtype=float)
    ks = np.asarray(ks, dtype=float)
    if ns.size < 3 or ks.size != ns.size:
        raise InputError("need at least 3 (n, KS) points")
    if np.any(ks <= 0):
        raise InputError("KS values must be positive for a log-log fit")
    x, y = np.log(ns), np.log(ks)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r_squared": r2}


@dataclass
class RateParams:
    v: float = 4.0
    A_const: float = math.e
    b: float = 1.0
    sigma: float = 1.0
    q: float = 4.0
    gamma: float = 0.5


@dataclass
class ExperimentConfig:
    function_class: FunctionClassSpec
    population: Population
    net_epsilon: float
    n_grid: list
    reps_outer: int
    reps_inner: int
    seed: int = 0
    name: str = "experiment"
    drift: DriftSpec = field(default_factory=DriftSpec)
    pool_size: int = 1000
    probe_size: int = 10_000
    max_members: Optional[int] = None
    rates: RateParams = field(default_factory=RateParams)
    threads: Optional[int] = None

    def __post_init__(self):
        self.n_grid = [int(n) for n in self.n_grid]
        if not self.n_grid:
            raise InputError("n_grid must be nonempty")
        if any(n < 1 for n in self.n_grid) or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise InputError("n_grid must be strictly increasing positive integers")
        if self.reps_outer < 1 or self.reps_inner < 1:
            raise InputError("replication counts must be at least 1")


@dataclass
class DistanceRow:
    n: int
    kind: str
    ks: float
    se: float
    ks_median: float
    ks_p90: float
    reps_outer: int
    reps_inner: int
    K_n: float
    delta1: float
    delta2: float
    delta3: float
    side_ok: bool


@dataclass
class DistanceReport:
    name: str
    rows: list
    samples: dict
    reference: np.ndarray
    net_size: int
    probe_size: int
    seed: int

    def regression(self, kind: str) -> Optional[dict]:
        sel = [r for r in self.rows if r.kind == kind and r.ks > 0]
        if len(sel) < 3:
            return None
        return rate_regression([r.n for r in sel], [r.ks for r in sel])

    def ks(self, n: int, kind: str) -> float:
        for r in self.rows:
            if r.n == n and r.kind == kind:
                return r.ks
        raise KeyError((n, kind))


@dataclass(eq=False)
class ExperimentSetup:
    net: Net
    means: np.ndarray
    model: CovarianceModel
    reference: np.ndarray
    N_B: int


def prepare(cfg: ExperimentConfig) -> ExperimentSetup:
    """Net, population means, Gaussian model and the sorted Z-tilde reference sample."""
    probe = cfg.population.sample(cfg.probe_size, np.random.default_rng(derive_seed(cfg.seed, 1)))
    net = build_net(
        cfg.function_class,
        cfg.net_epsilon,
        probe,
        cfg.drift,
        rng_seed=derive_seed(cfg.seed, 2),
        pool_size=cfg.pool_size,
        max_members=cfg.max_members,
    )
    means = mean_vector(net, cfg.population)
    model = estimate_covariance(net, cfg.population)
    reference = np.sort(gaussian_sups(model, cfg.reps_inner, derive_seed(cfg.seed, 3)))
    return ExperimentSetup(net, means, model, reference, drift_count(cfg.drift, net.members))


def _rates(cfg: ExperimentConfig, n: int, N_B: int):
    r = cfg.rates
    kn = bounds.kn_value(N_B, r.v, n, r.A_const, r.b, r.sigma)
    args = (r.b, r.sigma, kn, n, r.q, r.gamma)
    return kn, bounds.delta1(*args), bounds.delta2(*args), bounds.delta3(*args)


def _pool(cfg):
    return ThreadPoolExecutor(max_workers=cfg.threads or os.cpu_count() or 1)


def run_marginal_experiment(cfg: ExperimentConfig, setup: Optional[ExperimentSetup] = None) -> DistanceReport:
    """KS(Z, Z-tilde) for every n in the grid, one Z per independent data sample."""
    setup = setup or prepare(cfg)
    rows, samples = [], {}
    ref = setup.reference
    blocks = [(a, min(cfg.reps_outer, a + _BLOCK)) for a in range(0, cfg.reps_outer, _BLOCK)]
    with _pool(cfg) as pool:
        for k, n in enumerate(cfg.n_grid):
            jobs = [
                pool.submit(
                    empirical_sups, setup.net, cfg.population, setup.means, n, b - a, derive_seed(cfg.seed, 4, k, i)
                )
                for i, (a, b) in enumerate(blocks)
            ]
            Z = np.sort(np.concatenate([j.result() for j in jobs]))
            ks = kolmogorov_distance(Z, ref)
            kn, d1, d2, d3 = _rates(cfg, n, setup.N_B)
            rows.append(
                DistanceRow(n, "Z", ks, ks_band(Z.size, ref.size), ks, ks, cfg.reps_outer, cfg.reps_inner,
                            kn, d1, d2, d3, kn**3 <= n)
            )
            samples[(n, "Z")] = Z
    return DistanceReport(cfg.name, rows, samples, ref, len(setup.net), cfg.probe_size, cfg.seed)


_CONDITIONAL = {"multiplier": ("Ze", multiplier_bootstrap_sups), "empirical": ("Zstar", empirical_bootstrap_sups)}


def run_conditional_experiment(
    cfg: ExperimentConfig, kind: str, setup: Optional[ExperimentSetup] = None
) -> DistanceReport:
    """Per-data-sample KS between the bootstrap sup given X and Z-tilde.

    ``ks`` in each row is the median over the ``reps_outer`` data samples;
    the 90th percentile is reported alongside.
    """
    if kind not in _CONDITIONAL:
        raise InputError(f"kind must be one of {tuple(_CONDITIONAL)}")
    label, sampler = _CONDITIONAL[kind]
    setup = setup or prepare(cfg)
    net, ref = setup.net, setup.reference
    salt = 5 if kind == "multiplier" else 6

    def one(k, n, o):
        data_rng = np.random.default_rng(derive_seed(cfg.seed, salt, k, o, 0))
        V = net.values(cfg.population.sample(n, data_rng))
        boot = np.sort(sampler(V, net.drift, cfg.reps_inner, derive_seed(cfg.seed, salt, k, o, 1)))
        return kolmogorov_distance(boot, ref), boot

    rows, samples = [], {}
    with _pool(cfg) as pool:
        for k, n in enumerate(cfg.n_grid):
            results = list(pool.map(lambda o: one(k, n, o), range(cfg.reps_outer)))
            per_sample = np.array([r[0] for r in results])
            med = float(np.median(per_sample))
            kn, d1, d2, d3 = _rates(cfg, n, setup.N_B)
            side = kn <= n if kind == "multiplier" else kn**3 <= n
            rows.append(
                DistanceRow(n, label, med, ks_band(cfg.reps_inner, ref.size), med,
                            float(np.quantile(per_sample, 0.9)), cfg.reps_outer, cfg.reps_inner,
                            kn, d1, d2, d3, side)
            )
            samples[(n, label)] = results[0][1]
            samples[(n, label + "_ks")] = per_sample
    return DistanceReport(cfg.name, rows, samples, ref, len(net), cfg.probe_size, cfg.seed)


def run_comparison_experiment(covX, covY, mean, reps: int, seed=0) -> dict:
    """KS between max_j X_j and max_j Y_j for X ~ N(mean, covX), Y ~ N(mean, covY).

    Also returns Delta and the diagnostic KS / sqrt(Delta log p).
    """
    covX = np.asarray(covX, dtype=float)
    covY = np.asarray(covY, dtype=float)
    if covX.shape != covY.shape:
        raise InputError("covariances must have the same shape")
    mX = CovarianceModel.from_cov(mean, covX)
    mY = CovarianceModel.from_cov(mean, covY)
    zx = gaussian_sups(mX, reps, derive_seed(seed, 1))
    zy = gaussian_sups(mY, reps, derive_seed(seed, 2))
    ks = kolmogorov_distance(zx, zy)
    delta = bounds.cov_discrepancy(covX, covY)
    p = covX.shape[0]
    scale = math.sqrt(delta * math.log(p)) if p >= 2 else 0.0
    return {
        "KS": ks,
        "Delta": delta,
        "scaled_ratio": ks / scale if scale > 0 else math.nan,
        "band": ks_band(reps, reps),
    }


def _gamma_sum_to_normal(G, n):
    # quantile transform of a Gamma(n, 1) variable to N(0, 1), computed from the nearer tail
    lower = special.gammainc(n, G)
    upper = special.gammaincc(n, G)
    return np.where(lower < 0.5, special.ndtri(lower), -special.ndtri(upper))


def shared_randomness_pairs(net: Net, n: int, reps: int, seed=0, marginal: str = "exponential"):
    """Coupled draws (Z, Z-tilde) for a linear class, both built from the same randomness.

    ``"exponential"``: observations have i.i.d. coordinates E - 1 with E ~ Exp(1),
    so each coordinate of sum_i X_i is exactly Gamma(n, 1) - n; the Gaussian
    partner is its quantile transform, which is exactly N(0, 1).  The gap
    |Z - Z-tilde| then shrinks like n^{-1/2}.

    ``"uniform"``: X_i = T(W_i) with W_i ~ N(0, I) and
    T(w) = sqrt(3)(2 Phi(w) - 1) coordinatewise, paired with the sup built from
    sum_i W_i.  The gap does not shrink with n.

    ``"gaussian"``: T = identity, the pair coincides.

    In every case Cov(X) = I, so Z-tilde has exactly the law of the limit sup.
    """
    if net.class_ref.kind != "linear_sphere":
        raise InputError("shared-randomness pairs need a linear_sphere net")
    if marginal not in ("exponential", "uniform", "gaussian"):
        raise InputError("marginal must be 'exponential', 'uniform' or 'gaussian'")
    d = net.class_ref.dim
    rng = np.random.default_rng(seed)
    V = net.members.T
    Z = np.empty(reps)
    Zt = np.empty(reps)
    step = max(1, 2_000_000 // (n * d)) if marginal != "exponential" else 500_000
    for a in range(0, reps, step):
        b = min(reps, a + step)
        if marginal == "exponential":
            G = rng.gamma(float(n), 1.0, size=(b - a, d))
            SX = (G - n) / math.sqrt(n)
            SW = _gamma_sum_to_normal(G, float(n))
        else:
            W = rng.standard_normal((b - a, n, d))
            X = W if marginal == "gaussian" else math.sqrt(3.0) * (2.0 * stats.norm.cdf(W) - 1.0)
            SX = X.sum(axis=1) / math.sqrt(n)
            SW = W.sum(axis=1) / math.sqrt(n)
        Z[a:b] = (net.drift + SX @ V).max(axis=1)
        Zt[a:b] = (net.drift + SW @ V).max(axis=1)
    return Z, Zt


def coupling_kolmogorov_bound(Z, Z_tilde, model: CovarianceModel, r2: float = 0.05, r_grid=None) -> dict:
    """Compose an observed coupling with the anti-concentration bound for a finite net.

    r1 is the (1 - r2) quantile of |Z - Z-tilde|.  For a finite index set
    and delta below the smallest nonzero intrinsic distance, phi(delta) = 0
    and the covering number is the net size.
    """
    diffs = np.abs(np.asarray(Z) - np.asarray(Z_tilde))
    r1 = float(np.quantile(diffs, 1.0 - r2))
    sd = np.sqrt(np.clip(np.diag(model.cov), 0.0, None))
    sigma_min = float(sd.min())
    C = model.cov
    d2 = np.diag(C)[:, None] + np.diag(C)[None, :] - 2.0 * C
    nonzero = np.sqrt(np.clip(d2[d2 > 1e-24], 0.0, None))
    delta = 0.5 * float(nonzero.min()) if nonzero.size else 1.0
    delta = min(delta, 1e-6)
    r_grid = np.linspace(0.1, 10.0, 100) if r_grid is None else r_grid
    levy = bounds.anticoncentration_bound(sigma_min, r1, 0.0, model.size, delta, r_grid)
    return {
        "r1": r1,
        "r2": r2,
        "levy": levy,
        "bound": coupling_to_kolmogorov(r1, r2, levy),
        "ks": kolmogorov_distance(Z, Z_tilde),
        "observed_r2": float(np.mean(diffs > r1)),
    }
