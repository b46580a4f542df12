"""VC-type function classes, drift functionals and finite nets.

Every class is parametrised by a flat parameter vector per member:

``ball``           ``(c_1, ..., c_d, r)``   f(x) = 1{||x - c|| <= r}
``halfspace``      ``(u_1, ..., u_d, t)``   f(x) = 1{u . x <= t}, ||u|| = 1
``linear_sphere``  ``(v_1, ..., v_d)``      f(x) = v . x, ||v|| = 1
``tabulated``      ``(j,)``                 f(x) = table[j, x] on labels 0..m-1

The function-value matrix ``values(params, X)`` has shape ``(n, N)`` and is the
only object the process engine needs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, InputError

KINDS = ("ball", "halfspace", "linear_sphere", "tabulated")
INDICATOR_KINDS = ("ball", "halfspace")


@dataclass(eq=False)
class FunctionClassSpec:
    kind: str
    dim: int
    center_range: tuple = (0.0, 1.0)
    radius_range: Optional[tuple] = None
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown class kind {self.kind!r}; expected one of {KINDS}")
        if int(self.dim) < 1:
            raise InputError("dim must be a positive integer")
        self.dim = int(self.dim)
        lo, hi = map(float, self.center_range)
        if not hi > lo:
            raise InputError("center_range must satisfy lo < hi")
        self.center_range = (lo, hi)
        if self.radius_range is None:
            self.radius_range = (0.0, self.diameter)
        r_lo, r_hi = map(float, self.radius_range)
        if r_lo < 0 or not r_hi > r_lo:
            raise InputError("radius_range must satisfy 0 <= lo < hi")
        self.radius_range = (r_lo, r_hi)
        if self.kind == "tabulated":
            if self.table is None:
                raise InputError("tabulated class needs a table")
            self.table = np.atleast_2d(np.asarray(self.table, dtype=float))
            if self.dim != 1:
                raise InputError("tabulated classes live on integer labels (dim=1)")

    @property
    def diameter(self) -> float:
        lo, hi = self.center_range
        return (hi - lo) * math.sqrt(self.dim)

    @property
    def n_params(self) -> int:
        if self.kind in INDICATOR_KINDS:
            return self.dim + 1
        if self.kind == "linear_sphere":
            return self.dim
        return 1

    @property
    def is_indicator(self) -> bool:
        return self.kind in INDICATOR_KINDS

    def _check_points(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[-1] != self.dim:
            raise InputError(f"point dimension {X.shape[-1]} does not match class dimension {self.dim}")
        return X

    def _check_params(self, params):
        params = np.atleast_2d(np.asarray(params, dtype=float))
        if params.shape[-1] != self.n_params:
            raise InputError(f"{self.kind} members take {self.n_params} parameters, got {params.shape[-1]}")
        return params

    def envelope(self, X) -> np.ndarray:
        """Envelope F evaluated at each row of ``X``."""
        X = self._check_points(X)
        if self.is_indicator:
            return np.ones(X.shape[0])
        if self.kind == "linear_sphere":
            return np.linalg.norm(X, axis=1)
        labels = X[:, 0].astype(int)
        return np.abs(self.table).max(axis=0)[labels]

    def values(self, params, X) -> np.ndarray:
        """Function-value matrix with entry ``(i, j) = f_j(X_i)``."""
        X = self._check_points(X)
        params = self._check_params(params)
        d = self.dim
        if self.kind == "ball":
            centers, radii = params[:, :d], params[:, d]
            sq = (
                np.einsum("ij,ij->i", X, X)[:, None]
                - 2.0 * X @ centers.T
                + np.einsum("ij,ij->i", centers, centers)[None, :]
            )
            return (sq <= radii[None, :] ** 2).astype(float)
        if self.kind == "halfspace":
            return (X @ params[:, :d].T <= params[:, d][None, :]).astype(float)
        if self.kind == "linear_sphere":
            return X @ params.T
        labels = X[:, 0].astype(int)
        if labels.min() < 0 or labels.max() >= self.table.shape[1]:
            raise InputError("tabulated point label out of range")
        return self.table[params[:, 0].astype(int)][:, labels].T

    def evaluate(self, member_params, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise InputError(f"point must be a vector of length {self.dim}")
        return float(self.values(member_params, x[None, :])[0, 0])

    def candidate_pool(self, size: int, seed) -> np.ndarray:
        """Random members of the class: centers in the domain box, radii in the radius range."""
        rng = np.random.default_rng(seed)
        d = self.dim
        lo, hi = self.center_range
        if self.kind == "tabulated":
            return np.arange(self.table.shape[0], dtype=float)[:, None]
        if self.kind == "ball":
            centers = rng.uniform(lo, hi, size=(size, d))
            r_lo, r_hi = self.radius_range
            # right-closed radius interval (r_lo, r_hi]
            radii = r_hi - rng.uniform(0.0, r_hi - r_lo, size=size)
            return np.column_stack([centers, radii])
        units = random_unit_vectors(size, d, rng)
        if self.kind == "linear_sphere":
            return units
        corner_lo = np.minimum(units * lo, units * hi).sum(axis=1)
        corner_hi = np.maximum(units * lo, units * hi).sum(axis=1)
        offsets = rng.uniform(corner_lo, corner_hi)
        return np.column_stack([units, offsets])


def random_unit_vectors(size, dim, rng) -> np.ndarray:
    g = rng.standard_normal((size, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def circle_grid_size(epsilon: float) -> int:
    """Fewest equally spaced unit vectors on the circle with covering chord <= epsilon."""
    if epsilon >= 2.0:
        return 1
    return max(1, math.ceil(math.pi / (2.0 * math.asin(epsilon / 2.0)) - 1e-12))


def circle_grid(m: int) -> np.ndarray:
    angles = 2.0 * math.pi * np.arange(m) / m
    return np.column_stack([np.cos(angles), np.sin(angles)])


def fibonacci_sphere(m: int) -> np.ndarray:
    i = np.arange(m) + 0.5
    z = 1.0 - 2.0 * i / m
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    theta = golden * i
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])


@dataclass
class DriftSpec:
    """Deterministic drift B over class members.

    ``tabulated`` values are aligned with the member list they are evaluated on
    (the table rows for a tabulated class); ``parametric`` wraps a callable
    mapping an ``(N, k)`` parameter array to ``N`` drift values.
    """

    kind: str = "zero"
    eta: float = 1.0
    values: Optional[np.ndarray] = None
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("zero", "tabulated", "parametric"):
            raise InputError(f"unknown drift kind {self.kind!r}")
        if not self.eta > 0:
            raise InputError("eta must be positive")
        if self.kind == "tabulated":
            if self.values is None:
                raise InputError("tabulated drift needs values")
            self.values = np.asarray(self.values, dtype=float).ravel()
        if self.kind == "parametric" and self.func is None:
            raise InputError("parametric drift needs a callable")

    def evaluate(self, members) -> np.ndarray:
        members = np.atleast_2d(np.asarray(members, dtype=float))
        if self.kind == "zero":
            return np.zeros(members.shape[0])
        if self.kind == "tabulated":
            if len(self.values) != members.shape[0]:
                raise ConfigurationError(
                    f"tabulated drift has {len(self.values)} values for {members.shape[0]} members"
                )
            return self.values.copy()
        return np.asarray(self.func(members), dtype=float).ravel()


@dataclass(eq=False)
class Net:
    members: np.ndarray
    drift: np.ndarray
    epsilon: float
    class_ref: FunctionClassSpec
    probe_size: int = 0
    radii: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.members = np.atleast_2d(np.asarray(self.members, dtype=float))
        self.drift = np.asarray(self.drift, dtype=float).ravel()
        if self.members.shape[0] < 1:
            raise InputError("a net needs at least one member")
        if self.drift.shape[0] != self.members.shape[0]:
            raise InputError("drift length must equal the number of members")

    def __len__(self):
        return self.members.shape[0]

    def values(self, X) -> np.ndarray:
        return self.class_ref.values(self.members, X)

    def subset(self, idx) -> "Net":
        idx = np.asarray(idx, dtype=int)
        return Net(self.members[idx], self.drift[idx], self.epsilon, self.class_ref, self.probe_size)


def _probe_features(cls: FunctionClassSpec, pool, probe) -> np.ndarray:
    # rows f_j(probe) / sqrt(m): Euclidean distance between rows equals e_Q
    V = cls.values(pool, probe)
    return V.T / math.sqrt(V.shape[0])


def farthest_point_order(features, threshold, max_members=None):
    """Greedy farthest-point traversal until every row is within ``threshold``.

    Returns the selected row indices and, for each step, the covering radius
    of the selection made so far.  Each selected row lies strictly farther
    than ``threshold`` from all earlier ones.
    """
    F = np.asarray(features, dtype=float)
    sq = np.einsum("ij,ij->i", F, F)

    def dist_to(j):
        d2 = sq + sq[j] - 2.0 * (F @ F[j])
        return np.sqrt(np.clip(d2, 0.0, None))

    order = [0]
    mind = dist_to(0)
    mind[0] = 0.0
    radii = []
    while True:
        j = int(np.argmax(mind))
        r = float(mind[j])
        radii.append(r)
        if r <= threshold:
            break
        if max_members is not None and len(order) >= max_members:
            break
        order.append(j)
        mind = np.minimum(mind, dist_to(j))
        mind[j] = 0.0
    return np.asarray(order, dtype=int), np.asarray(radii)


def _sphere_candidates(dim, pool_size, seed):
    if dim == 3:
        return fibonacci_sphere(pool_size)
    return random_unit_vectors(pool_size, dim, np.random.default_rng(seed))


def sphere_net(dim: int, epsilon: float, seed=0, pool_size: int = 4000) -> np.ndarray:
    """Unit vectors covering the sphere in chord distance.

    Exact equi-angular grid on the circle; greedy thinning of a Fibonacci
    lattice (``dim == 3``) or of a seeded random pool (``dim > 3``) otherwise.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    if dim == 1:
        return np.array([[1.0], [-1.0]]) if epsilon < 2.0 else np.array([[1.0]])
    if dim == 2:
        return circle_grid(circle_grid_size(epsilon))
    pool = _sphere_candidates(dim, pool_size, seed)
    order, _ = farthest_point_order(pool, epsilon)
    return pool[order]


def build_net(
    cls: FunctionClassSpec,
    epsilon: float,
    metric_probe,
    drift: Optional[DriftSpec] = None,
    rng_seed=0,
    pool_size: int = 1000,
    max_members: Optional[int] = None,
) -> Net:
    """Greedy epsilon-net of a class under the probe-estimated e_P metric.

    For ``linear_sphere`` the net is the deterministic sphere net of
    :func:`sphere_net` (chord distance, which is e_P under isotropic data).
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    drift = drift or DriftSpec()
    probe = np.asarray(metric_probe, dtype=float)
    if cls.kind == "linear_sphere":
        members = sphere_net(cls.dim, epsilon, rng_seed)
        if max_members is not None:
            members = members[:max_members]
        return Net(members, drift.evaluate(members), epsilon, cls, probe_size=0)
    if probe.size == 0:
        raise InputError("metric_probe must be nonempty")
    pool = cls.candidate_pool(pool_size, rng_seed)
    pool_drift = drift.evaluate(pool)
    order, radii = farthest_point_order(_probe_features(cls, pool, probe), epsilon, max_members)
    if len(order) == pool.shape[0] and pool.shape[0] > 1:
        warnings.warn("candidate pool exhausted before covering; the net is the whole pool", RuntimeWarning)
    return Net(pool[order], pool_drift[order], epsilon, cls, probe_size=len(probe), radii=radii)


def covering_number_estimate(
    cls: FunctionClassSpec, epsilon: float, metric_probe, rng_seed=0, pool_size: int = 1000
) -> int:
    """Size of a greedy (epsilon * ||F||_{Q,2})-net, Q the probe's empirical measure.

    The traversal order does not depend on epsilon, so the count is
    nonincreasing in epsilon for a fixed pool and probe.
    """
    if not 0 < epsilon <= 1:
        raise InputError("epsilon must lie in (0, 1]")
    probe = np.asarray(metric_probe, dtype=float)
    if probe.size == 0:
        raise InputError("metric_probe must be nonempty")
    pool = cls.candidate_pool(pool_size, rng_seed)
    env_norm = math.sqrt(float(np.mean(cls.envelope(probe) ** 2)))
    order, _ = farthest_point_order(_probe_features(cls, pool, probe), epsilon * env_norm)
    return len(order)


def fit_vc_constants(epsilons, counts):
    """Fit ``N(eps) <= (A / eps) ** v`` to greedy cover counts.

    ``v`` is the least-squares slope of log N against log(1/eps) (at least
    1e-12); ``A`` is then the smallest constant making the envelope hold at
    every supplied point.
    """
    eps = np.asarray(epsilons, dtype=float)
    cnt = np.asarray(counts, dtype=float)
    if eps.size < 2:
        raise InputError("need at least two covering counts")
    slope = np.polyfit(np.log(1.0 / eps), np.log(cnt), 1)[0]
    v = max(float(slope), 1e-12)
    A = float(np.max(eps * cnt ** (1.0 / v)))
    return A, v


def drift_count(drift: DriftSpec, members) -> int:
    """Minimal number of members whose drift values eta-cover all drift values.

    One-dimensional covering with centres restricted to the values themselves
    is solved exactly by the left-to-right sweep, so this is N_B(eta) over
    ``members``.
    """
    if drift.kind == "zero":
        return 1
    vals = np.sort(drift.evaluate(members))
    eta = drift.eta
    count = 0
    i = 0
    n = len(vals)
    while i < n:
        left = vals[i]
        # centre: largest value strictly within eta of the leftmost uncovered point
        k = int(np.searchsorted(vals, left + eta, side="left")) - 1
        centre = vals[k]
        count += 1
        i = int(np.searchsorted(vals, centre + eta, side="left"))
    return count
