"""Command line driver.

Subcommands: generate (SBM data files), embed, evaluate, project, and run
(the full pipeline plus manifest). Exit codes: 0 success, 1 runtime
failure, 2 configuration failure.
"""

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, apply_overrides, from_dict
from .pipeline import run_experiment
from .sbm import SbmParams, diminish_series, save_labels, save_migrations
from .graphs import save_snapshots


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynembed",
                                     description="Dynamic graph embedding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write dynamic SBM snapshot/label/migration files")
    gen.add_argument("--nodes", type=int, required=True, help="number of nodes")
    gen.add_argument("--communities", type=int, required=True, help="number of communities")
    gen.add_argument("--length", type=int, required=True, help="number of snapshots")
    gen.add_argument("--migrate", type=int, required=True,
                     help="nodes leaving the diminishing community per step")
    gen.add_argument("--diminish", type=int, default=1,
                     help="index of the diminishing community (default 1)")
    gen.add_argument("--p-in", type=float, default=0.1, help="within-community edge probability")
    gen.add_argument("--p-out", type=float, default=0.01, help="between-community edge probability")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--outdir", default=".")
    gen.set_defaults(func=cmd_generate)

    for name, help_text in (
        ("embed", "generate/load data and write embeddings"),
        ("evaluate", "embed plus evaluation reports"),
        ("project", "embed plus 2-D projection exports"),
        ("run", "full pipeline plus manifest"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="JSON experiment config")
        cmd.add_argument("--seed", type=int, default=None, help="override config seed")
        cmd.add_argument("--outdir", default=None, help="override config outdir")
        cmd.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="dotted config override, e.g. method.d=64")
        cmd.set_defaults(func=cmd_pipeline, stage=name)
    return parser


def cmd_generate(args) -> int:
    try:
        params = SbmParams(
            node_num=args.nodes, community_num=args.communities, length=args.length,
            diminish_community=args.diminish, node_change_num=args.migrate,
            p_in=args.p_in, p_out=args.p_out, seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: invalid SBM parameters: {exc}", file=sys.stderr)
        return 2
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    series = diminish_series(params)
    save_snapshots(series.sequence, outdir / "snapshots.txt")
    save_labels(series, outdir / "labels.txt")
    save_migrations(series, outdir / "migrations.txt")
    for name in ("snapshots.txt", "labels.txt", "migrations.txt"):
        print(outdir / name)
    return 0


def cmd_pipeline(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON in {args.config}: {exc}", file=sys.stderr)
        return 2
    if not isinstance(raw, dict):
        print("error: config field '<root>': top-level JSON value must be an object",
              file=sys.stderr)
        return 2
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.outdir is not None:
        raw["outdir"] = args.outdir
    raw = apply_overrides(raw, args.set)
    cfg = from_dict(raw)
    result = run_experiment(cfg, stage=args.stage)
    for name in sorted(result["files"]):
        print(Path(result["outdir"]) / name)
    if args.stage == "run":
        print(Path(result["outdir"]) / "manifest.json")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
