"""Command-line entry point ``qtraj-witness``."""

from __future__ import annotations

import argparse
import json
import sys

from .config import DEFAULTS, SCENARIOS, ConfigError, parse_config
from .scenarios import run_scenario


def _defaults_epilog() -> str:
    lines = ["scenario parameter defaults (null = derived):"]
    for name in SCENARIOS:
        lines.append(f"  {name}: {json.dumps(DEFAULTS[name])}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtraj-witness",
        description="Regenerate trajectory and witness statistics as CSV/JSON tables.",
        epilog=_defaults_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", help="JSON config file (or inline JSON text)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trajectories", type=int, dest="n_traj")
    parser.add_argument("--out", dest="output_dir")
    parser.add_argument("--threads", type=int, default=0, help="worker cap, 0 = auto")
    parser.add_argument("--format", choices=("csv", "json"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        source = args.config if args.config else {"scenario": args.scenario}
        cfg = parse_config(source, seed=args.seed, n_traj=args.n_traj,
                           output_dir=args.output_dir, format=args.format)
        if cfg.scenario != args.scenario:
            raise ConfigError(
                f"config file is for scenario {cfg.scenario!r}, not {args.scenario!r}", "scenario")
    except ConfigError as exc:
        print(f"qtraj-witness: invalid config ({exc.key or 'document'}): {exc}", file=sys.stderr)
        return 2
    try:
        summary = run_scenario(cfg, threads=args.threads)
    except (ValueError, RuntimeError) as exc:
        print(f"qtraj-witness: {cfg.scenario} failed: {exc}", file=sys.stderr)
        return 1
    stats = " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items())
    print(f"{cfg.scenario}: {stats}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
