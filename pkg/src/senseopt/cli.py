"""Batch command-line front end.

One experiment per invocation; artifacts land in --out.  Exit codes:
0 success, 2 configuration error, 3 numerical failure (blind protocol or
degenerate Fisher information).
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .adadelta import CallbackFailure
from .config import ConfigError, load_config
from .contdrive import DegenerateFisherError
from .experiments import run_experiment
from .pipulse import BlindProtocolError

SUBCOMMANDS = {
    "optimize-pi": "optimize_pi",
    "optimize-continuous": "optimize_continuous",
    "optimize-pump": "optimize_pump",
    "glass-analyze": "glass_analyze",
    "noise-check": "noise_check",
}

BUNDLED = ("fig1_pi", "fig1_continuous", "fig2_glass", "fig4_pump", "appendixA_psd_check")


def bundled_config_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".toml") else name
    if stem not in BUNDLED:
        raise ConfigError(
            f"no bundled config {name!r}; available: {', '.join(BUNDLED)}"
        )
    return Path(resources.files("senseopt").joinpath(f"configs/{stem}.toml"))


def resolve_config_arg(arg: str) -> Path:
    p = Path(arg)
    if p.is_file():
        return p
    return bundled_config_path(arg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="senseopt",
        description="Sensing-protocol optimization and landscape diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run a {SUBCOMMANDS[name]} experiment")
        sp.add_argument(
            "--config",
            required=True,
            help="path to a TOML config (or manifest.json), or a bundled config name",
        )
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--out", default=None, help="output directory (default runs/<config-stem>)")
        sp.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker threads for ensemble members (default $SENSEOPT_THREADS or 1); "
            "results are independent of this setting",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg_path = resolve_config_arg(args.config)
        cfg = load_config(cfg_path)
        expected = SUBCOMMANDS[args.command]
        if cfg.get("experiment") != expected:
            raise ConfigError(
                f"config declares experiment '{cfg.get('experiment')}' but the "
                f"subcommand expects '{expected}'"
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out) if args.out else Path("runs") / cfg_path.stem
    try:
        report = run_experiment(cfg, out_dir, seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CallbackFailure as exc:
        cause = exc.__cause__
        if isinstance(cause, (BlindProtocolError, DegenerateFisherError)):
            print(f"numerical failure: {cause}", file=sys.stderr)
            return 3
        raise
    except (BlindProtocolError, DegenerateFisherError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for key, val in sorted(report.items()):
        print(f"{key}: {val}")
    print(f"artifacts written to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
