"""Experiment configuration: YAML parsing, defaults, validation and presets.

A parsed configuration is a plain nested dict with every default filled in,
so ``normalize(yaml.safe_load(dump(cfg)))`` reproduces ``cfg`` exactly.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field

import yaml

from . import bounds
from .function_class import KINDS as CLASS_KINDS
from .population import DISTRIBUTIONS

EXPERIMENT_TYPES = ("marginal", "conditional", "comparison", "convex", "tools")

_CLASS_DEFAULTS = {"kind": "ball", "dim": 2, "center_range": [0.0, 1.0], "radius_range": None, "table": None}
_NET_DEFAULTS = {"epsilon": 0.3, "pool_size": 1000, "probe_size": 10000, "max_members": None}
_DRIFT_DEFAULTS = {"kind": "zero", "eta": 1.0, "values": None}
_DATA_DEFAULTS = {"distribution": "uniform_cube", "probs": None, "reference_size": 1000000}
_SET_FIELDS = {"kind", "dim", "center", "radius", "lo", "hi", "normal", "offset", "normals", "offsets"}
_RATE_DEFAULTS = {"v": 1.0, "A_const": math.e, "b": 1.0, "sigma": 1.0, "q": 4.0, "gamma": 0.5}

_DEFAULTS = {
    "marginal": {"n_grid": [128, 2048], "reps_outer": 4000, "reps_inner": 4000},
    "conditional": {"process": "multiplier", "n_grid": [2048], "reps_outer": 10, "reps_inner": 4000},
    "comparison": {"p": 10, "rho": 0.3, "t_grid": [0.0, 0.01, 0.04, 0.16], "reps": 20000},
    "convex": {
        "set": {"kind": "halfspace", "dim": 2, "normal": [1.0, 0.0], "offset": 0.5},
        "data": {"distribution": "standard_gaussian"},
        "n": 1024,
        "sphere_net_eps": 0.1,
        "methods": ["gaussian"],
        "reps": 100000,
    },
    "tools": {
        "softmax_trials": 10000,
        "mollifier_deltas": [0.05, 0.1],
        "mollifier_grid": 1000,
        "nazarov_configs": 20,
        "nazarov_draws": 100000,
    },
}


@dataclass
class Diagnostics:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def error(self, where, msg):
        self.errors.append({"field": where, "message": msg})

    def warn(self, where, msg):
        self.warnings.append({"field": where, "message": msg})

    @property
    def ok(self):
        return not self.errors

    def as_list(self):
        return [dict(level="error", **e) for e in self.errors] + [dict(level="warning", **w) for w in self.warnings]


def _merge(defaults, given, where, diag):
    out = copy.deepcopy(defaults)
    if given is None:
        return out
    if not isinstance(given, dict):
        diag.error(where, "must be a mapping")
        return out
    for k, v in given.items():
        if k not in defaults:
            diag.error(f"{where}.{k}", "unknown field")
        else:
            out[k] = v
    return out


def _num(d, key, where, diag, kind=float, lo=None, hi=None, lo_open=False, hi_open=False):
    v = d.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not float(v).is_integer()):
        diag.error(f"{where}.{key}", f"must be {'an integer' if kind is int else 'a number'}")
        return
    v = kind(v)
    d[key] = v
    if lo is not None and (v <= lo if lo_open else v < lo):
        diag.error(f"{where}.{key}", f"must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and (v >= hi if hi_open else v > hi):
        diag.error(f"{where}.{key}", f"must be {'<' if hi_open else '<='} {hi}")


def _num_list(d, key, where, diag, kind=float, increasing=False, positive=False):
    v = d.get(key)
    if not isinstance(v, list) or not v or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        diag.error(f"{where}.{key}", "must be a nonempty list of numbers")
        return
    if kind is int and not all(float(x).is_integer() for x in v):
        diag.error(f"{where}.{key}", "must contain integers")
        return
    d[key] = [kind(x) for x in v]
    if positive and any(x <= 0 for x in d[key]):
        diag.error(f"{where}.{key}", "entries must be positive")
    if increasing and any(b <= a for a, b in zip(d[key], d[key][1:])):
        diag.error(f"{where}.{key}", "must be strictly increasing")


def _check_rates(r, where, diag, n_grid=(), side="cube"):
    before = len(diag.errors)
    _num(r, "v", where, diag, lo=1)
    _num(r, "A_const", where, diag, lo=math.e)
    _num(r, "b", where, diag, lo=0, lo_open=True)
    _num(r, "sigma", where, diag, lo=0, lo_open=True)
    _num(r, "q", where, diag, lo=4)
    g = r.get("gamma")
    if isinstance(g, (int, float)) and not isinstance(g, bool):
        r["gamma"] = float(g)
        if not 0 < g < 1:
            diag.error(f"{where}.gamma", "gamma must lie in (0,1)")
    else:
        diag.error(f"{where}.gamma", "must be a number")
    if len(diag.errors) > before:
        return
    if r["b"] < r["sigma"]:
        diag.error(f"{where}.b", "need b >= sigma")
        return
    for n in n_grid:
        kn = bounds.kn_value(1.0, r["v"], n, r["A_const"], r["b"], r["sigma"])
        if side == "cube" and kn**3 > n:
            diag.warn(f"{where}", f"side condition K_n^3 <= n fails at n={n} (K_n={kn:.4g})")
        if side == "linear" and kn > n:
            diag.warn(f"{where}", f"side condition K_n <= n fails at n={n} (K_n={kn:.4g})")


def _normalize_process_experiment(e, where, diag):
    e["class"] = _merge(_CLASS_DEFAULTS, e.get("class"), f"{where}.class", diag)
    e["net"] = _merge(_NET_DEFAULTS, e.get("net"), f"{where}.net", diag)
    e["drift"] = _merge(_DRIFT_DEFAULTS, e.get("drift"), f"{where}.drift", diag)
    e["data"] = _merge(_DATA_DEFAULTS, e.get("data"), f"{where}.data", diag)
    e["rates"] = _merge(_RATE_DEFAULTS, e.get("rates"), f"{where}.rates", diag)
    c = e["class"]
    if c["kind"] not in CLASS_KINDS:
        diag.error(f"{where}.class.kind", f"must be one of {list(CLASS_KINDS)}")
    _num(c, "dim", f"{where}.class", diag, kind=int, lo=1)
    _num(e["net"], "epsilon", f"{where}.net", diag, lo=0, lo_open=True)
    _num(e["net"], "pool_size", f"{where}.net", diag, kind=int, lo=1)
    _num(e["net"], "probe_size", f"{where}.net", diag, kind=int, lo=1)
    if e["net"]["max_members"] is not None:
        _num(e["net"], "max_members", f"{where}.net", diag, kind=int, lo=1)
    if e["drift"]["kind"] not in ("zero", "tabulated"):
        diag.error(f"{where}.drift.kind", "must be 'zero' or 'tabulated' in a config file")
    _num(e["drift"], "eta", f"{where}.drift", diag, lo=0, lo_open=True)
    if e["data"]["distribution"] not in DISTRIBUTIONS:
        diag.error(f"{where}.data.distribution", f"must be one of {list(DISTRIBUTIONS)}")
    _num(e["data"], "reference_size", f"{where}.data", diag, kind=int, lo=1)
    _num_list(e, "n_grid", where, diag, kind=int, increasing=True, positive=True)
    _num(e, "reps_outer", where, diag, kind=int, lo=1)
    _num(e, "reps_inner", where, diag, kind=int, lo=1)
    if e["type"] == "conditional" and e.get("process") not in ("multiplier", "empirical"):
        diag.error(f"{where}.process", "must be 'multiplier' or 'empirical'")
    side = "linear" if e.get("process") == "multiplier" else "cube"
    _check_rates(e["rates"], f"{where}.rates", diag, e["n_grid"] if isinstance(e.get("n_grid"), list) else (), side)


def _normalize_experiment(raw, index, diag):
    where = f"experiments[{index}]"
    if not isinstance(raw, dict):
        diag.error(where, "must be a mapping")
        return None
    etype = raw.get("type")
    if etype not in EXPERIMENT_TYPES:
        diag.error(f"{where}.type", f"must be one of {list(EXPERIMENT_TYPES)}")
        return None
    allowed = {"name", "type", "seed"} | set(_DEFAULTS[etype])
    if etype in ("marginal", "conditional"):
        allowed |= {"class", "net", "drift", "data", "rates"}
    e = {"name": raw.get("name", f"experiment{index}"), "type": etype, "seed": raw.get("seed")}
    e.update(copy.deepcopy(_DEFAULTS[etype]))
    for k, v in raw.items():
        if k not in allowed:
            diag.error(f"{where}.{k}", "unknown field")
        elif k not in ("name", "type", "seed"):
            e[k] = copy.deepcopy(v)
    if not isinstance(e["name"], str) or not e["name"] or "/" in e["name"]:
        diag.error(f"{where}.name", "must be a nonempty string without '/'")
    if e["seed"] is not None:
        _num(e, "seed", where, diag, kind=int, lo=0)
    if etype in ("marginal", "conditional"):
        if etype == "marginal":
            e.pop("process", None)
        _normalize_process_experiment(e, where, diag)
    elif etype == "comparison":
        _num(e, "p", where, diag, kind=int, lo=2)
        _num(e, "rho", where, diag, lo=0, hi=1, hi_open=True)
        _num_list(e, "t_grid", where, diag, increasing=True)
        _num(e, "reps", where, diag, kind=int, lo=1)
        if isinstance(e["rho"], float) and isinstance(e["t_grid"], list) and e["rho"] + max(e["t_grid"]) > 1:
            diag.error(f"{where}.t_grid", "rho + t must stay <= 1 for a valid covariance")
    elif etype == "convex":
        s = e["set"]
        if not isinstance(s, dict) or "kind" not in s or "dim" not in s:
            diag.error(f"{where}.set", "needs kind and dim")
        else:
            for k in set(s) - _SET_FIELDS:
                diag.error(f"{where}.set.{k}", "unknown field")
        e["data"] = _merge({"distribution": "standard_gaussian"}, e["data"], f"{where}.data", diag)
        if e["data"]["distribution"] not in ("uniform_cube", "standard_gaussian"):
            diag.error(f"{where}.data.distribution", "must be uniform_cube or standard_gaussian")
        _num(e, "n", where, diag, kind=int, lo=1)
        _num(e, "sphere_net_eps", where, diag, lo=0, lo_open=True)
        _num(e, "reps", where, diag, kind=int, lo=1)
        if not isinstance(e["methods"], list) or not set(e["methods"]) <= {"direct_mc", "gaussian", "multiplier_bootstrap"}:
            diag.error(f"{where}.methods", "must list methods among direct_mc, gaussian, multiplier_bootstrap")
    else:
        for k in ("softmax_trials", "mollifier_grid", "nazarov_configs", "nazarov_draws"):
            _num(e, k, where, diag, kind=int, lo=1)
        _num_list(e, "mollifier_deltas", where, diag, positive=True)
    return e


def normalize(raw) -> tuple:
    """Validate a raw config mapping; returns ``(config, diagnostics)``."""
    diag = Diagnostics()
    if not isinstance(raw, dict):
        diag.error("<root>", "config must be a mapping")
        return None, diag
    cfg = {"seed": raw.get("seed", 0), "threads": raw.get("threads"), "experiments": []}
    for k in raw:
        if k not in cfg:
            diag.error(k, "unknown field")
    _num(cfg, "seed", "<root>", diag, kind=int, lo=0)
    if cfg["threads"] is not None:
        _num(cfg, "threads", "<root>", diag, kind=int, lo=1)
    exps = raw.get("experiments", [])
    if not isinstance(exps, list):
        diag.error("experiments", "must be a list")
        exps = []
    names = set()
    for i, ex in enumerate(exps):
        e = _normalize_experiment(ex, i, diag)
        if e is None:
            continue
        if e["name"] in names:
            diag.error(f"experiments[{i}].name", f"duplicate experiment name {e['name']!r}")
        names.add(e["name"])
        cfg["experiments"].append(e)
    return cfg, diag


def load(path) -> tuple:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return normalize(raw if raw is not None else {})


def dump(cfg) -> str:
    return yaml.safe_dump(cfg, sort_keys=False, default_flow_style=None)


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _ball_experiment(name, etype, **extra):
    e = {
        "name": name,
        "type": etype,
        "class": {"kind": "ball", "dim": 2, "center_range": [0.0, 1.0]},
        "net": {"epsilon": 0.31, "pool_size": 1000, "probe_size": 10000},
        "drift": {"kind": "zero"},
        "data": {"distribution": "uniform_cube"},
    }
    e.update(extra)
    return e


PRESETS = {
    "remark1": {
        "seed": 20240611,
        "experiments": [
            _ball_experiment("ball_marginal", "marginal", n_grid=[128, 512, 2048], reps_outer=4000, reps_inner=4000),
            _ball_experiment("ball_multiplier", "conditional", process="multiplier", n_grid=[2048],
                     reps_outer=10, reps_inner=4000),
            _ball_experiment("ball_empirical", "conditional", process="empirical", n_grid=[2048],
                     reps_outer=10, reps_inner=4000),
        ],
    },
    "convex-halfspace": {
        "seed": 20240612,
        "experiments": [
            {
                "name": "halfspace",
                "type": "convex",
                "set": {"kind": "halfspace", "dim": 2, "normal": [1.0, 0.0], "offset": 0.5},
                "data": {"distribution": "standard_gaussian"},
                "n": 1024,
                "methods": ["gaussian", "direct_mc", "multiplier_bootstrap"],
                "reps": 100000,
            },
            {
                "name": "disk",
                "type": "convex",
                "set": {"kind": "ball", "dim": 2, "center": [0.0, 0.0], "radius": 1.5},
                "data": {"distribution": "standard_gaussian"},
                "n": 1024,
                "sphere_net_eps": 0.05,
                "methods": ["gaussian"],
                "reps": 100000,
            },
        ],
    },
    "comparison": {
        "seed": 20240613,
        "experiments": [
            {"name": "comparison", "type": "comparison", "p": 10, "rho": 0.3,
             "t_grid": [0.0, 0.01, 0.04, 0.16], "reps": 20000},
            {"name": "tools", "type": "tools"},
        ],
    },
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])
