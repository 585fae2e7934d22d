"""Command-line entry point: ``pbts run`` and ``pbts validate``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import _kernels
from .experiment import ConfigError, check_config, load_config, run_experiment

log = logging.getLogger("pbts")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbts", description="Pose-based tactile servo simulations")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--out", default=None, help="output directory (default: config output.dir)")
    run.add_argument("--seed", type=int, default=None, help="override perception seed")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.add_argument("--noiseless", action="store_true", help="zero perception noise")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2

    if args.command == "validate":
        problems = check_config(cfg)
        for p in problems:
            log.error("%s", p)
        if not problems:
            print(f"{args.config}: ok ({len(cfg.runs())} run(s), {cfg.feature} on {cfg.world['kind']})")
        return 1 if problems else 0

    if args.jobs < 1:
        log.error("--jobs must be at least 1")
        return 2
    log.debug("kernel backend: %s", _kernels.BACKEND)
    result = run_experiment(cfg, args.out, seed=args.seed, jobs=args.jobs, noiseless=args.noiseless)
    for r in result.summary["runs"]:
        dev = r["deviations"] or {}
        means = " ".join(f"{c}={v['mean']:+.3f}" for c, v in dev.items())
        closure = "n/a" if r["closure_mm"] is None else f"{r['closure_mm']:.2f}mm"
        print(f"run {r['id']:3d}: {r['stop_reason']:<14} steps={r['steps']:<4d} closure={closure} {means}")
    for f in result.summary["fits"]:
        print(f"fit {f['component']}: slope={f['slope']:.4f} intercept={f['intercept']:.4f} r2={f['r2']:.5f}")
    print(f"wrote {len(result.csv_paths)} trajectories and summary.json to {result.out_dir}")
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
