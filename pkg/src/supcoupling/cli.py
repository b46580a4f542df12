"""Command line entry point: ``supcoupling run|validate|preset``."""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from importlib import metadata

import numpy as np
import scipy
import yaml

from . import config as cfgmod
from ._seeding import derive_seed
from .bounds import levy_concentration_mc, nazarov_density_bound
from .convex import ConvexSetSpec, convex_probability
from .coupling import (
    ExperimentConfig,
    RateParams,
    prepare,
    run_comparison_experiment,
    run_conditional_experiment,
    run_marginal_experiment,
)
from .errors import ConfigurationError, InputError, NumericalError
from .function_class import DriftSpec, FunctionClassSpec
from .population import Population
from .smoothing import MollifiedIndicator, derivative_bound_check, softmax

OUT_ENV = "SUPCOUPLING_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return f"{x:.12g}"
    return str(x)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _process_config(e, seed, threads) -> ExperimentConfig:
    c, d, net = e["class"], e["data"], e["net"]
    cls = FunctionClassSpec(c["kind"], c["dim"], tuple(c["center_range"]),
                            None if c["radius_range"] is None else tuple(c["radius_range"]), c["table"])
    pop = Population(d["distribution"], c["dim"], d["probs"], d["reference_size"], derive_seed(seed, 99))
    drift = DriftSpec(e["drift"]["kind"], e["drift"]["eta"], e["drift"]["values"])
    return ExperimentConfig(
        cls, pop, net["epsilon"], e["n_grid"], e["reps_outer"], e["reps_inner"], seed=seed, name=e["name"],
        drift=drift, pool_size=net["pool_size"], probe_size=net["probe_size"], max_members=net["max_members"],
        rates=RateParams(**e["rates"]), threads=threads,
    )


_DISTANCE_COLS = ["seed", "config_hash", "experiment", "n", "kind", "KS", "se", "ks_median", "ks_p90",
                  "reps_outer", "reps_inner", "K_n", "delta1", "delta2", "delta3", "side_ok",
                  "net_size", "probe_size", "slope"]


def _distance_rows(report, kind, seed, h):
    reg = report.regression(kind)
    slope = reg["slope"] if reg else math.nan
    out = []
    for r in report.rows:
        row = dict(vars(r))
        row["KS"] = row.pop("ks")
        row.update(seed=seed, config_hash=h, experiment=report.name, net_size=report.net_size,
                   probe_size=report.probe_size, slope=slope)
        out.append(row)
    return _DISTANCE_COLS, out


def _run_process(e, seed, threads, h):
    cfg = _process_config(e, seed, threads)
    setup = prepare(cfg)
    if e["type"] == "marginal":
        return _distance_rows(run_marginal_experiment(cfg, setup), "Z", seed, h)
    rep = run_conditional_experiment(cfg, e["process"], setup)
    return _distance_rows(rep, rep.rows[0].kind, seed, h)


def _run_comparison(e, seed, threads, h):
    p, rho = e["p"], e["rho"]
    base = (1 - rho) * np.eye(p) + rho * np.ones((p, p))
    direction = np.ones((p, p)) - np.eye(p)
    rows = []
    for i, t in enumerate(e["t_grid"]):
        res = run_comparison_experiment(base, base + t * direction, np.zeros(p), e["reps"], derive_seed(seed, i))
        rows.append(dict(seed=seed, config_hash=h, experiment=e["name"], t=t, p=p, **res))
    return ["seed", "config_hash", "experiment", "t", "p", "KS", "Delta", "scaled_ratio", "band"], rows


def _run_convex(e, seed, threads, h):
    s = dict(e["set"])
    A = ConvexSetSpec(**s)
    pop = Population(e["data"]["distribution"], A.dim)
    rows = []
    for m in e["methods"]:
        res = convex_probability(A, pop, e["n"], e["sphere_net_eps"], m, e["reps"], seed)
        rows.append(dict(seed=seed, config_hash=h, experiment=e["name"], method=m, n=e["n"], **res))
    return ["seed", "config_hash", "experiment", "method", "n", "prob", "se", "net_bias", "net_size"], rows


def _run_tools(e, seed, threads, h):
    rng = np.random.default_rng(derive_seed(seed, 0))
    rows = []

    def add(check, statistic, bound, passed):
        rows.append(dict(seed=seed, config_hash=h, experiment=e["name"], check=check,
                         statistic=statistic, bound=bound, passed=bool(passed)))

    worst = 0.0
    for _ in range(e["softmax_trials"]):
        p = int(rng.integers(1, 65))
        beta = float(np.exp(rng.uniform(-2, 5)))
        x, mu = rng.normal(0, 3, p), rng.normal(0, 3, p)
        val, top = softmax(x - mu, beta, mu), float(np.max(x))
        scale = max(1.0, abs(top))
        worst = max(worst, (top - val) / scale, (val - top - math.log(p) / beta) / scale)
    add("softmax_sandwich_max_violation", worst, 1e-9, worst <= 1e-9)

    for dl in e["mollifier_deltas"]:
        g = MollifiedIndicator([(0.0, 1.0)], dl)
        grid = np.linspace(-3 * dl - 0.1, 1 + 3 * dl + 0.1, e["mollifier_grid"])
        gv = g(grid)
        lower = float(np.max(g.indicator(grid) - gv))
        upper = float(np.max(gv - g.indicator(grid, 3 * dl)))
        add(f"mollifier_sandwich_delta={dl:g}", max(lower, upper), 1e-8, max(lower, upper) <= 1e-8)
        rep = derivative_bound_check(g, grid, dl / 100)
        add(f"mollifier_first_derivative_delta={dl:g}", rep["first"], 1.05, rep["first_ok"])

    violations = 0
    for k in range(e["nazarov_configs"]):
        crng = np.random.default_rng(derive_seed(seed, 1, k))
        p = int(crng.integers(1, 51))
        M = crng.normal(size=(p, p))
        cov = M @ M.T / p + np.diag(crng.uniform(0.25, 2.0, p))
        mean = crng.normal(0, 1, p)
        sig = float(np.sqrt(np.diag(cov)).min())
        bound = nazarov_density_bound(p, sig, 0.05)
        mc = levy_concentration_mc(mean, cov, 0.05, e["nazarov_draws"], 200, derive_seed(seed, 2, k))
        violations += mc["prob"] > bound + 3 * mc["se"]
    add("nazarov_violations", float(violations), 0.0, violations == 0)
    return ["seed", "config_hash", "experiment", "check", "statistic", "bound", "passed"], rows


_RUNNERS = {
    "marginal": _run_process,
    "conditional": _run_process,
    "comparison": _run_comparison,
    "convex": _run_convex,
    "tools": _run_tools,
}


def _versions():
    try:
        own = metadata.version("supcoupling")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"supcoupling": own, "numpy": np.__version__, "scipy": scipy.__version__, "pyyaml": yaml.__version__}


def _error(kind, message, details=None, code=EXIT_CONFIG):
    record = {"error": kind, "message": message, "details": details or []}
    print(json.dumps(record, indent=2), file=sys.stderr)
    return code


def cmd_run(args) -> int:
    try:
        cfg, diag = cfgmod.load(args.config)
    except (OSError, yaml.YAMLError) as exc:
        return _error("config", f"cannot read {args.config}: {exc}")
    if not diag.ok:
        return _error("config", "invalid configuration", diag.as_list())
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    for w in diag.warnings:
        print(f"warning: {w['field']}: {w['message']}", file=sys.stderr)
    out = args.out or os.environ.get(OUT_ENV) or "out"
    os.makedirs(out, exist_ok=True)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    outputs = []
    for i, e in enumerate(cfg["experiments"]):
        seed = e["seed"] if e["seed"] is not None else derive_seed(cfg["seed"], i)
        h = cfgmod.config_hash({"experiment": e, "seed": seed})
        try:
            header, rows = _RUNNERS[e["type"]](e, seed, cfg["threads"], h)
        except NumericalError as exc:
            return _error("numerical", str(exc), [exc.diagnostics], EXIT_NUMERIC)
        except (InputError, ConfigurationError) as exc:
            return _error("config", str(exc), [{"field": f"experiments[{i}]", "message": str(exc)}])
        path = os.path.join(out, f"{e['name']}.csv")
        _write_csv(path, header, rows)
        outputs.append({"experiment": e["name"], "path": path, "config_hash": h, "seed": seed})
        print(f"wrote {path}", file=sys.stderr)
    manifest = {
        "config_hash": cfgmod.config_hash(cfg),
        "seed": cfg["seed"],
        "started": started,
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "versions": _versions(),
        "config_path": os.path.abspath(args.config),
        "outputs": outputs,
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        _, diag = cfgmod.load(args.config)
    except (OSError, yaml.YAMLError) as exc:
        return _error("config", f"cannot read {args.config}: {exc}")
    print(json.dumps(diag.as_list(), indent=2))
    return EXIT_OK if diag.ok else EXIT_CONFIG


def cmd_preset(args) -> int:
    text = cfgmod.dump(cfgmod.preset(args.name))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="supcoupling", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiments declared in a config file")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./out)")
    run.add_argument("--threads", type=int)
    run.set_defaults(func=cmd_run)
    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    pre = sub.add_parser("preset", help="print a ready-made config")
    pre.add_argument("name", choices=sorted(cfgmod.PRESETS))
    pre.add_argument("--out")
    pre.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
