"""Command-line entry point.

Reads a TOML config, applies flag overrides, then either runs one seeded
experiment (per-iteration CSV) or, when the config carries a [sweep] table, a
grid sweep (aggregated CSV). Exit code 0 on success, 1 with a diagnostic on
any error.
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .harness import (
    DatasetSpec,
    ExperimentConfig,
    run_experiment,
    sweep,
    sweep_csv,
    write_sweep,
)

_EXPERIMENT_KEYS = {
    "model": "model_kind",
    "strategy": "strategy",
    "training_rate": "training_rate",
    "budget": "budget",
    "batch": "batch",
    "alpha": "alpha",
    "theta": "theta",
    "gamma": "gamma",
    "influence_k": "influence_k",
    "cand_k": "cand_k",
    "trunc_eps": "trunc_eps",
    "noise_ratio": "edge_noise_ratio",
    "seeds": "seeds",
    "output": "output_path",
}

_SWEEP_KEYS = {
    "training_rate": "training_rate",
    "budget": "budget",
    "alpha": "alpha",
    "noise_ratio": "edge_noise_ratio",
    "strategy": "strategy",
}


def load_config(path):
    """Parse the TOML config into (ExperimentConfig, sweep grid or None)."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    kwargs = {}
    for key, value in raw.get("experiment", {}).items():
        if key not in _EXPERIMENT_KEYS:
            raise ValueError(f"unknown [experiment] key {key!r}")
        kwargs[_EXPERIMENT_KEYS[key]] = tuple(value) if key == "seeds" else value
    if "dataset" in raw:
        kwargs["dataset"] = DatasetSpec(**raw["dataset"])
    cfg = ExperimentConfig(**kwargs)

    grid = None
    if "sweep" in raw:
        grid = {}
        for key, values in raw["sweep"].items():
            if key not in _SWEEP_KEYS:
                raise ValueError(f"unknown [sweep] key {key!r}")
            grid[_SWEEP_KEYS[key]] = list(values)
    return cfg, grid


def build_parser():
    parser = argparse.ArgumentParser(
        prog="noisyalign",
        description="Active-learning network alignment experiments under noise.",
    )
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--budget", type=int, help="total oracle-query budget")
    parser.add_argument("--alpha", type=float, help="oracle labeling accuracy")
    parser.add_argument("--theta", type=float, help="activation threshold")
    parser.add_argument("--gamma", type=float, help="minimum acceptable model confidence")
    parser.add_argument("--seed", type=int, help="run seed (replaces configured seeds)")
    parser.add_argument("--strategy", help="rana, random, entropy, margin or least_confident")
    parser.add_argument("--model", help="base aligner: isorank or final_lite")
    parser.add_argument("--training-rate", type=float, dest="training_rate")
    parser.add_argument("--noise-ratio", type=float, dest="noise_ratio")
    parser.add_argument("--output", help="output CSV path")
    parser.add_argument(
        "--gnuplot",
        action="store_true",
        help="also write a gnuplot-ready whitespace .dat next to the CSV",
    )
    return parser


def apply_overrides(cfg, args):
    from dataclasses import replace

    overrides = {}
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.theta is not None:
        overrides["theta"] = args.theta
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    if args.seed is not None:
        overrides["seeds"] = (args.seed,)
    if args.strategy is not None:
        overrides["strategy"] = args.strategy
    if args.model is not None:
        overrides["model_kind"] = args.model
    if args.training_rate is not None:
        overrides["training_rate"] = args.training_rate
    if args.noise_ratio is not None:
        overrides["edge_noise_ratio"] = args.noise_ratio
    if args.output is not None:
        overrides["output_path"] = args.output
    return replace(cfg, **overrides) if overrides else cfg


def _write_gnuplot(csv_text, csv_path):
    dat_path = csv_path.rsplit(".", 1)[0] + ".dat"
    lines = csv_text.strip().split("\n")
    out = ["# " + lines[0].replace(",", " ")]
    out.extend(line.replace(",", " ") for line in lines[1:])
    with open(dat_path, "w", newline="") as fh:
        fh.write("\n".join(out) + "\n")
    return dat_path


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg, grid = load_config(args.config)
        else:
            cfg, grid = ExperimentConfig(), None
        cfg = apply_overrides(cfg, args)

        if grid is not None:
            cells = sweep(cfg, grid, seeds=cfg.seeds)
            write_sweep(cells, cfg.output_path)
            csv_text = sweep_csv(cells)
            print(f"sweep: {len(cells)} cells x {len(cfg.seeds)} seeds -> {cfg.output_path}")
        else:
            log = run_experiment(cfg, cfg.seeds[0])
            log.write(cfg.output_path)
            csv_text = log.to_csv()
            final = log.final
            print(
                f"run: seed {cfg.seeds[0]}, {final.iteration} iterations, "
                f"{final.oracle_queries}/{cfg.budget} queries, "
                f"acc@1 {final.acc1:.4f} -> {cfg.output_path}"
            )
        if args.gnuplot:
            dat = _write_gnuplot(csv_text, cfg.output_path)
            print(f"gnuplot data -> {dat}")
    except Exception as exc:
        print(f"noisyalign: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
