"""Command-line entry point: run experiments, sweep ablations, solve payoff
matrices, and render plots.

The log level comes from the GAMEPOP_LOG_LEVEL environment variable; all
other behavior is controlled by config files and flags.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import meta_solvers
from .config import ConfigError, config_to_dict, load_config, parse_config
from .engine import run_psro
from .svgplot import RENDER_KINDS, PlotError, render_svg

log = logging.getLogger("gamepop")

SWEEP_PARAMS = ("fusion_start_c", "top_k", "mss", "init")


def _seed_dir(base: str, seed: int) -> str:
    return os.path.join(base, f"seed_{seed}")


def run_from_config(path: str, output_dir: str | None = None) -> int:
    """Execute every seed of a config; returns a process exit status."""
    config = load_config(path)
    out = output_dir or config.output_dir
    if out is None:
        raise ConfigError("output_dir: required to run an experiment")
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.json"), "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for seed in config.seeds:
        log.info("running seed %d", seed)
        history = run_psro(config, seed, out_dir=_seed_dir(out, seed))
        final = history.records[-1]
        log.info("seed %d done: exploitability=%s approx=%s", seed,
                 final.exploitability, final.approx_exploitability)
    return 0


def _apply_override(data: dict, param: str, value: str) -> dict:
    data = json.loads(json.dumps(data))  # deep copy
    if param == "mss":
        data["mss"] = {"kind": value}
        return data
    if param == "init":
        data["init"] = {"method": value}
        return data
    init = data["init"]
    targets = [init] if "method" in init else [init["p0"], init["p1"]]
    for target in targets:
        if target.get("method") != "nash_fusion":
            raise ConfigError(
                f"sweep over {param} needs a nash_fusion init method")
        if param == "fusion_start_c":
            target["c"] = int(value)
        else:
            target["top_k"] = "all" if value == "all" else int(value)
    return data


def _final_exploitability(history) -> float | None:
    rec = history.records[-1]
    if rec.exploitability is not None:
        return rec.exploitability
    return rec.approx_exploitability


def sweep(path: str, param: str, values: list[str],
          output_dir: str | None = None) -> int:
    """One run set per parameter value; writes a mean/min/max summary."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep param {param!r}; "
                          f"valid: {SWEEP_PARAMS}")
    with open(path) as fh:
        base = json.load(fh)
    out = output_dir or base.get("output_dir")
    if out is None:
        raise ConfigError("output_dir: required to run a sweep")
    os.makedirs(out, exist_ok=True)
    summary = []
    for value in values:
        data = _apply_override(base, param, value)
        arm_dir = os.path.join(out, f"{param}_{value}")
        data["output_dir"] = arm_dir
        config = parse_config(data)
        finals = []
        for seed in config.seeds:
            history = run_psro(config, seed, out_dir=_seed_dir(arm_dir, seed))
            final = _final_exploitability(history)
            if final is not None:
                finals.append(final)
        if not finals:
            raise ConfigError("sweep runs produced no exploitability values; "
                              "enable exact or approximate evaluation")
        summary.append((value, float(np.mean(finals)), float(min(finals)),
                        float(max(finals))))
        log.info("%s=%s: mean=%.6f min=%.6f max=%.6f", param, value,
                 *summary[-1][1:])
    summary_path = os.path.join(out, "sweep_summary.csv")
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param", "value", "exploitability_mean",
                    "exploitability_min", "exploitability_max"])
        for value, mean, lo, hi in summary:
            w.writerow([param, value, repr(mean), repr(lo), repr(hi)])
    print(summary_path)
    return 0


def evaluate_run(run_dir: str) -> int:
    """Re-evaluate a finished seed directory: rebuild the population from
    its checkpoints, re-solve the meta-strategy from the last payoff matrix,
    and report the profile's exploitability."""
    from .engine import _build_arena, _derive_seed, ntmg_exploitability
    from .games import exploitability
    from .policies import PolicyMixture, checkpoint_loads

    config_path = os.path.join(os.path.dirname(os.path.abspath(run_dir)),
                               "config.json")
    if not os.path.exists(config_path):
        raise ConfigError(f"{config_path}: config echo not found next to "
                          "the run directory")
    config = load_config(config_path)
    try:
        seed = int(os.path.basename(os.path.normpath(run_dir)).split("_")[-1])
    except ValueError as exc:
        raise ConfigError(f"{run_dir}: expected a seed_<n> directory") from exc
    game, ops, is_ntmg = _build_arena(config)

    ckpt_dir = os.path.join(run_dir, "checkpoints")
    names = sorted(os.listdir(ckpt_dir)) if os.path.isdir(ckpt_dir) else []
    if not names:
        raise ConfigError(f"{run_dir}: no checkpoints to evaluate")
    pops = ([ops.scratch(_derive_seed(seed, 0, 0, 6), "normal")],
            [ops.scratch(_derive_seed(seed, 0, 1, 6), "normal")])
    last_iteration = 0
    for name in names:
        stem = name.rsplit(".", 1)[0]  # iter_0001_p0
        _, iteration, player = stem.split("_")
        last_iteration = max(last_iteration, int(iteration))
        with open(os.path.join(ckpt_dir, name)) as fh:
            pops[int(player[1])].append(checkpoint_loads(fh.read()))

    matrix_path = os.path.join(run_dir, f"payoff_matrix_{last_iteration}.txt")
    with open(matrix_path) as fh:
        lines = fh.read().strip().splitlines()
    matrix = np.array([[float(v) for v in line.split()]
                       for line in lines[3:]])
    sigma_row, sigma_col = meta_solvers.solve(matrix, config.mss)
    if is_ntmg:
        value = ntmg_exploitability(pops, (sigma_row, sigma_col), ops.cfg)
    else:
        value = exploitability(game, (PolicyMixture(pops[0], sigma_row),
                                      PolicyMixture(pops[1], sigma_col)))
    print(f"iterations {last_iteration}")
    print(f"population {len(pops[0])} {len(pops[1])}")
    print(f"exploitability {float(value)!r}")
    return 0


_MSS_BY_NAME = {
    "nash": meta_solvers.Nash(),
    "uniform": meta_solvers.Uniform(),
    "prd": meta_solvers.Prd(),
    "fp": meta_solvers.FictitiousPlay(),
}


def solve_matrix(path: str, mss: str) -> int:
    """Solve a payoff matrix from a JSON or whitespace-separated text file."""
    with open(path) as fh:
        text = fh.read()
    try:
        matrix = np.array(json.loads(text), dtype=float)
    except (json.JSONDecodeError, ValueError):
        matrix = np.loadtxt(path, ndmin=2)
    kind = _MSS_BY_NAME.get(mss)
    if kind is None:
        raise ConfigError(f"unknown mss {mss!r}; valid: "
                          f"{sorted(_MSS_BY_NAME)}")
    sigma_row, sigma_col = meta_solvers.solve(matrix, kind)
    value = float(sigma_row @ matrix @ sigma_col)
    print("sigma_row " + " ".join(repr(float(p)) for p in sigma_row))
    print("sigma_col " + " ".join(repr(float(p)) for p in sigma_col))
    print(f"value {value!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamepop",
        description="Population-based solving of two-player zero-sum games")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config for every seed")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output-dir", default=None)

    p_sweep = sub.add_parser("sweep", help="run a parameter ablation grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--output-dir", default=None)

    p_eval = sub.add_parser("eval",
                            help="re-evaluate a finished seed directory")
    p_eval.add_argument("--run-dir", required=True)

    p_solve = sub.add_parser("solve-matrix",
                             help="solve a zero-sum payoff matrix")
    p_solve.add_argument("--matrix", required=True)
    p_solve.add_argument("--mss", default="nash",
                         choices=sorted(_MSS_BY_NAME))

    p_plot = sub.add_parser("plot", help="render an SVG from run CSVs")
    p_plot.add_argument("--kind", required=True, choices=RENDER_KINDS)
    p_plot.add_argument("--in", dest="inputs", nargs="+", required=True)
    p_plot.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GAMEPOP_LOG_LEVEL", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run_from_config(args.config, args.output_dir)
        if args.command == "sweep":
            values = [v for v in args.values.split(",") if v]
            return sweep(args.config, args.param, values, args.output_dir)
        if args.command == "eval":
            return evaluate_run(args.run_dir)
        if args.command == "solve-matrix":
            return solve_matrix(args.matrix, args.mss)
        render_svg(args.kind, args.inputs, args.out)
        print(args.out)
        return 0
    except (ConfigError, PlotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
