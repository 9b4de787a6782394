"""Command-line interface.

Subcommands: train, eval, bounds, invariants, all.  A run is reproducible
from (--config, --seed); artifacts land in --out.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import backend
from .harness import (ExperimentConfig, load_config, run_all, run_bounds,
                      run_eval, run_train)
from .invariants import concentration_suite, random_softmax_policy, sensitivity_suite
from .policy import UniformPolicy
from .rng import derive_rng


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmfc",
        description="Constrained mean-field control: train, simulate, and "
                    "check approximation gaps.")
    parser.add_argument("command",
                        choices=["train", "eval", "bounds", "invariants", "all"])
    parser.add_argument("--config", type=Path, default=None,
                        help="sectioned key-value config file (defaults used if omitted)")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (default: config [output] dir)")
    parser.add_argument("--fast", action="store_true",
                        help="trim the evaluation to 5 seeds")
    parser.add_argument("--timings", action="store_true",
                        help="record wall-clock columns (makes artifacts non-reproducible)")
    parser.add_argument("--workers", type=int, default=None,
                        help="evaluation worker processes (overrides config)")
    parser.add_argument("--checkpoint", type=Path, default=None,
                        help="policy checkpoint for `eval` (default: OUT/checkpoint.npy)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.fast:
        cfg = cfg.fast()
    if args.workers is not None:
        cfg.workers = args.workers
    out_dir = args.out if args.out else Path(cfg.out_dir)

    if args.command == "train":
        checkpoint = run_train(cfg, args.seed, out_dir, args.timings)
        print(f"checkpoint: {checkpoint}")
    elif args.command == "eval":
        checkpoint = args.checkpoint or out_dir / "checkpoint.npy"
        if not checkpoint.exists():
            print(f"error: checkpoint not found: {checkpoint}", file=sys.stderr)
            return 2
        path = run_eval(cfg, checkpoint, args.seed, out_dir, args.timings)
        print(f"results: {path}")
    elif args.command == "bounds":
        path = run_bounds(cfg, out_dir)
        print(path.read_text(), end="")
    elif args.command == "invariants":
        return _run_invariants(cfg, args.seed)
    else:
        run_all(cfg, args.seed, out_dir, args.timings)
        print(f"artifacts in {out_dir} (backend: "
              f"{'compiled' if backend.COMPILED else 'numpy'})")
    return 0


def _run_invariants(cfg: ExperimentConfig, seed: int) -> int:
    from .harness import build_env

    env = build_env(cfg)
    rng = derive_rng(seed, "invariants")
    policies = [UniformPolicy(env.n_states, env.n_actions)] + [
        random_softmax_policy(env, rng, scale=0.5) for _ in range(4)]
    checks = sensitivity_suite(env, policies, n_pairs=10_000, rng=rng)
    checks += concentration_suite(env, policies[1], n_values=(10, 100, 1000),
                                  n_steps=200, rng=rng)
    failed = 0
    for check in checks:
        status = "ok" if check.ok else "VIOLATED"
        failed += not check.ok
        extra = f" N={check.n_agents}" if hasattr(check, "n_agents") else ""
        observed = getattr(check, "max_ratio", getattr(check, "mean_deviation", None))
        print(f"{check.name:16s}{extra:8s} observed={observed:.6f} "
              f"bound={check.bound:.6f} {status}")
    print(json.dumps({"checks": len(checks), "violations": failed}))
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
