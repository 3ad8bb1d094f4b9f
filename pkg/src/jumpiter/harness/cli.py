"""Command line entry point: ``jumpiter run`` and ``jumpiter presets``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from ..errors import ConfigError
from .config import build_config, describe_presets, parse_assignments
from .runner import dump_replicate, run_experiment


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jumpiter", description="Discretisation error experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a Monte Carlo experiment")
    run.add_argument("--preset", help="named preset (see `presets`)")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--replicates", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any configuration key (repeatable)")
    run.add_argument("--dump-path", type=int, metavar="REP",
                     help="also write path and curve CSVs for this replicate")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("presets", help="list the built-in presets")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "presets":
        print(describe_presets())
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        text = None
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        pairs = []
        for item in args.set:
            if "=" not in item:
                raise ConfigError("expected KEY=VALUE", field=item)
            pairs.append(tuple(item.split("=", 1)))
        overrides = parse_assignments(pairs)
        overrides.update({k: v for k, v in (("master_seed", args.seed), ("replicates", args.replicates),
                                            ("workers", args.workers), ("out_dir", args.out_dir))
                          if v is not None})
        cfg = build_config(args.preset, text, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(cfg)
    if args.dump_path is not None:
        dump_replicate(cfg, args.dump_path, cfg.out_dir)
    print(json.dumps({"out_dir": cfg.out_dir, "rates": result.summary["rates"],
                      "limit_ks": result.summary.get("limit_ks")}, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
