"""Command-line entry point.

Subcommands:

    run          one optimization run, trace CSV plus config snapshot
    compare      paired acquisition-function comparison, comparison.csv
    sensitivity  four-axis prior sensitivity experiment, AD summary CSVs
    functions    list the built-in test functions
    inspect      report on a tabulated CSV target

Configuration comes from JSON files merged with --override key=value pairs
(dotted keys reach into nested objects); unknown keys are rejected.  Exit
codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .acquisition import AcquisitionSpec, parse_acquisition
from .bench import (
    default_sensitivity_plans,
    run_acquisition_comparison,
    run_sensitivity_experiment,
    write_ad_summary_csv,
    write_comparison_csv,
    write_mop_csv,
    write_relative_ad_sums_csv,
    write_traces,
)
from .engine import RunConfig, TargetFunction, run, save_trace_csv
from .errors import ConfigError, ProboError
from .functions import load_tabulated_target, registry_lookup, registry_names
from .gp import MeanSpec
from .kernels import KernelSpec
from .optimizer import FocusSearchConfig

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._fail(message))

    def _fail(self, message):
        print(f"error: {message}", file=sys.stderr)
        return EXIT_CONFIG


# ------------------------------------------------------------- config I/O

_RUN_KEYS = {"target", "kernel", "mean", "acquisition", "infill", "n_init",
             "budget", "seed", "hyperparameter_fit", "hyperparameter_budget"}
_COMPARE_KEYS = {"functions", "acquisitions", "reps", "budget", "n_init", "seed",
                 "kernel", "mean", "infill"}
_SENSITIVITY_KEYS = {"functions", "reps", "iterations", "n_init", "seed",
                     "acquisition", "infill"}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _apply_overrides(config: dict, overrides: list[str]) -> dict:
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = value
    return config


def _check_keys(config: dict, allowed: set[str], where: str) -> None:
    unknown = set(config) - allowed
    if unknown:
        raise ConfigError(
            f"unknown {where} config keys: {', '.join(sorted(unknown))}; "
            f"allowed: {', '.join(sorted(allowed))}"
        )


def _target_from_config(spec) -> TargetFunction:
    if isinstance(spec, str):
        return registry_lookup(spec)
    if isinstance(spec, dict):
        if "function" in spec:
            return registry_lookup(spec["function"])
        if "csv" in spec:
            return load_tabulated_target(spec["csv"], negate=spec.get("negate", False))
    raise ConfigError(
        "target must be a registry name, {\"function\": name}, or "
        "{\"csv\": path, \"negate\": bool}"
    )


def _acquisition_from_config(spec) -> AcquisitionSpec:
    if isinstance(spec, str):
        return parse_acquisition(spec)
    if isinstance(spec, dict):
        return AcquisitionSpec.from_dict(spec)
    raise ConfigError("acquisition must be a string form or an object")


def _kernel_from_config(spec: dict, dim: int) -> KernelSpec:
    spec = dict(spec or {})
    family = spec.pop("family", "squared-exponential")
    ls = spec.pop("lengthscales", spec.pop("lengthscale", 1.0))
    ls = np.atleast_1d(np.asarray(ls, dtype=float))
    if ls.size == 1:
        ls = np.full(dim, ls[0])
    sv = spec.pop("signal_variance", 1.0)
    power = spec.pop("power", None)
    if spec:
        raise ConfigError(f"unknown kernel config keys: {', '.join(sorted(spec))}")
    return KernelSpec(family=family, lengthscales=tuple(ls),
                      signal_variance=sv, power=power)


def _run_config_from(config: dict, target: TargetFunction, seed_flag) -> RunConfig:
    _check_keys(config, _RUN_KEYS, "run")
    kernel = _kernel_from_config(config.get("kernel", {}), target.dimension)
    mean = MeanSpec.from_dict(config.get("mean", {}))
    acquisition = _acquisition_from_config(config.get("acquisition", "lcb:tau=1"))
    infill = FocusSearchConfig.from_dict(config.get("infill", {}))
    seed = seed_flag if seed_flag is not None else config.get("seed", 0)
    return RunConfig(
        kernel=kernel, mean=mean, acquisition=acquisition, infill=infill,
        n_init=config.get("n_init", 10), budget=config.get("budget", 90),
        seed=int(seed),
        hyperparameter_fit=config.get("hyperparameter_fit", False),
        hyperparameter_budget=config.get("hyperparameter_budget", 50),
    )


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------ subcommands

def cmd_run(args) -> int:
    config = _apply_overrides(_load_config(args.config), args.override)
    _check_keys(config, _RUN_KEYS, "run")
    if "target" not in config:
        raise ConfigError("run needs a target (config key \"target\")")
    target = _target_from_config(config["target"])
    run_config = _run_config_from(config, target, args.seed)

    trace = run(run_config, target)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_trace_csv(trace, out / "trace.csv")
    snapshot = {"target": config["target"], "config": run_config.to_dict()}
    _write_json(out / "config.json", snapshot)

    best = trace.best_point()
    print(f"argmin: {np.array2string(best, separator=', ')}")
    print(f"value:  {trace.best_value()!r}")
    print(f"trace:  {out / 'trace.csv'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _apply_overrides(_load_config(args.config), args.override)
    _check_keys(config, _COMPARE_KEYS, "compare")
    acq_strings = list(args.acq or []) + list(config.get("acquisitions", []))
    if len(acq_strings) < 2:
        raise ConfigError("compare needs at least two --acq settings")
    acquisitions = [parse_acquisition(a) for a in acq_strings]
    names = list(args.functions or []) or list(config.get("functions", []))
    if not names:
        raise ConfigError("compare needs at least one --functions name")
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    kernel_cfg = config.get("kernel", {})

    result = run_acquisition_comparison(
        functions=names,
        acquisitions=acquisitions,
        repetitions=config.get("reps", 60),
        budget=config.get("budget", 90),
        n_init=config.get("n_init", 10),
        master_seed=int(seed),
        jobs=args.jobs,
        kernel_lengthscale=kernel_cfg.get("lengthscale", 1.0),
        kernel_signal_variance=kernel_cfg.get("signal_variance", 1.0),
        kernel_family=kernel_cfg.get("family", "squared-exponential"),
        mean=MeanSpec.from_dict(config.get("mean", {})),
        infill=FocusSearchConfig.from_dict(config.get("infill", {})),
    )

    out = Path(args.out)
    write_comparison_csv(result, out / "comparison.csv")
    for fname, mop in result.mops.items():
        write_mop_csv(mop, out / fname / "mop.csv")
    write_traces(result.traces, out / "traces")
    snapshot = {
        "functions": names, "acquisitions": [a.to_dict() for a in acquisitions],
        "reps": result.repetitions, "budget": config.get("budget", 90),
        "n_init": result.n_init, "seed": int(seed),
    }
    _write_json(out / "config.json", snapshot)
    for fname, mop in result.mops.items():
        finals = ", ".join(f"{lab}={val!r}" for lab, val in
                           zip(mop.labels, mop.values[-1]))
        print(f"{fname}: final MOP {finals}")
    print(f"wrote {out / 'comparison.csv'}")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    config = _apply_overrides(_load_config(args.config), args.override)
    _check_keys(config, _SENSITIVITY_KEYS, "sensitivity")
    names = list(args.functions or []) or list(config.get("functions", []))
    if not names:
        raise ConfigError("sensitivity needs at least one --functions name")
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    plans = default_sensitivity_plans(
        functions=names,
        repetitions=config.get("reps", 40),
        iterations=config.get("iterations", 20),
        n_init=config.get("n_init", 10),
        acquisition=_acquisition_from_config(config.get("acquisition", "ei")),
        infill=FocusSearchConfig.from_dict(config.get("infill", {})),
    )

    result = run_sensitivity_experiment(plans, master_seed=int(seed), jobs=args.jobs)

    out = Path(args.out)
    write_ad_summary_csv(result, out / "ad_summary.csv")
    write_relative_ad_sums_csv(result, out / "relative_ad_sums.csv")
    for (fname, axis), mop in result.mops.items():
        write_mop_csv(mop, out / fname / axis / "mop.csv")
    write_traces(result.traces, out / "traces")
    snapshot = {
        "functions": names, "reps": config.get("reps", 40),
        "iterations": config.get("iterations", 20),
        "n_init": config.get("n_init", 10), "seed": int(seed),
        "acquisition": _acquisition_from_config(config.get("acquisition", "ei")).to_dict(),
    }
    _write_json(out / "config.json", snapshot)

    print("sum of relative ADs per prior component:")
    for axis, total in result.axis_sums.items():
        print(f"  {axis}: {total:.4f}")
    if result.excluded:
        print(f"excluded (all-zero ADs): {', '.join(result.excluded)}")
    print(f"wrote {out / 'ad_summary.csv'}")
    return EXIT_OK


def cmd_functions(args) -> int:
    for name in registry_names():
        tf = registry_lookup(name)
        lo, hi = tf.bounds.lower, tf.bounds.upper
        opt = "n/a" if tf.known_optimum is None else f"{tf.known_optimum:g}"
        print(f"{name:15s} dim={tf.dimension}  bounds=[{lo[0]:g}, {hi[0]:g}]"
              f"  optimum={opt}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    target = load_tabulated_target(args.csv, negate=args.negate)
    xs = target.evaluate.xs
    ys = target.evaluate.ys
    print(f"rows:    {xs.size}")
    print(f"domain:  [{xs[0]!r}, {xs[-1]!r}]")
    print(f"y range: [{ys.min()!r}, {ys.max()!r}]")
    print(f"negated: {target.evaluate.negate}")
    return EXIT_OK


# ------------------------------------------------------------- arg parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="probo",
                     description="Bayesian optimization with prior-mean-robust "
                                 "acquisition and a benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="config override, dotted keys allowed (repeatable)")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes (default: available cores)")
        if with_out:
            p.add_argument("--out", default="probo-out", help="output directory")

    p_run = sub.add_parser("run", help="one optimization run")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="paired acquisition comparison")
    common(p_cmp)
    p_cmp.add_argument("--acq", action="append", metavar="SPEC",
                       help="acquisition, e.g. ei, lcb:tau=1, "
                            "glcb:tau=1,rho=1,c=100, glcb-1-100 (repeatable)")
    p_cmp.add_argument("--functions", action="append", metavar="NAME",
                       help="registry function (repeatable)")
    p_cmp.set_defaults(func=cmd_compare)

    p_sen = sub.add_parser("sensitivity", help="prior sensitivity experiment")
    common(p_sen)
    p_sen.add_argument("--functions", action="append", metavar="NAME",
                       help="registry function (repeatable)")
    p_sen.set_defaults(func=cmd_sensitivity)

    p_fun = sub.add_parser("functions", help="list built-in test functions")
    p_fun.set_defaults(func=cmd_functions)

    p_ins = sub.add_parser("inspect", help="inspect a tabulated CSV target")
    p_ins.add_argument("--csv", required=True, help="CSV file with x,y columns")
    p_ins.add_argument("--negate", action="store_true",
                       help="treat the target as to-be-maximized")
    p_ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProboError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
