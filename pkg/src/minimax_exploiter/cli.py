"""Command-line entry point.

Verbs:
  train       run a config-driven experiment (metrics CSVs + checkpoints)
  tournament  round-robin a set of checkpoints
  curves      aggregate per-seed metric CSVs into a plot-ready band file
  verify      run the fast invariant/oracle self-checks

All outputs are CSV with documented headers; failures exit nonzero after a
single machine-readable JSON error line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .dqn import load_frozen
from .errors import MinimaxExploiterError
from .harness import emit_curves, parse_config, run_experiment
from .tournament import results_to_csv_rows, run_tournament


def _cmd_train(args) -> int:
    cfg = parse_config(args.config)
    results = run_experiment(cfg)
    for result in results:
        last = result.rows[-1] if result.rows else None
        score = f"{last.eval_score:.3f}" if last else "n/a"
        print(f"seed {result.seed}: episodes={last.episodes if last else 0} "
              f"final_score={score} checkpoint={result.checkpoint_path}")
    print(f"metrics written under {cfg.output_dir}")
    return 0


def _cmd_tournament(args) -> int:
    checkpoints = [(path, load_frozen(path)) for path in args.checkpoints]
    rng = np.random.default_rng(args.seed)
    results = run_tournament(args.environment, checkpoints, args.games, rng)
    rows = results_to_csv_rows(results)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    for r in results:
        print(f"{r.first_id} vs {r.second_id}: "
              f"{r.wins_first}-{r.wins_second}-{r.draws} "
              f"(score_rate {r.score_rate:.3f})")
    print(f"results written to {args.output}")
    return 0


def _cmd_curves(args) -> int:
    emit_curves(args.metrics, args.output)
    print(f"curves written to {args.output}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_all
    return 0 if run_all() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minimax-exploiter",
        description="Competitive self-play toolkit with the minimax-shaped "
                    "exploiter reward")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a config-driven experiment")
    p_train.add_argument("config", help="INI experiment config path")
    p_train.set_defaults(fn=_cmd_train)

    p_tour = sub.add_parser("tournament", help="round-robin checkpoints")
    p_tour.add_argument("checkpoints", nargs="+", help="checkpoint paths")
    p_tour.add_argument("--environment", required=True)
    p_tour.add_argument("--games", type=int, default=1000)
    p_tour.add_argument("--seed", type=int, default=0)
    p_tour.add_argument("--output", required=True, help="output CSV path")
    p_tour.set_defaults(fn=_cmd_tournament)

    p_curves = sub.add_parser("curves", help="aggregate metric CSVs")
    p_curves.add_argument("metrics", nargs="+", help="per-seed metric CSVs")
    p_curves.add_argument("--output", required=True, help="output CSV path")
    p_curves.set_defaults(fn=_cmd_curves)

    p_verify = sub.add_parser("verify", help="run fast self-checks")
    p_verify.set_defaults(fn=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except MinimaxExploiterError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
