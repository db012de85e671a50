"""Command line entry point: ``lsmimo {ber-sweep,video-sweep,throughput-sweep,validate}``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

import argparse
import logging
import sys
import warnings

import yaml

from .config import ConfigWarning, from_mapping, validate_config
from .errors import ConfigError
from .harness import run_ber_sweep, run_throughput_sweep, run_video_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

SWEEPS = {
    "ber-sweep": run_ber_sweep,
    "video-sweep": run_video_sweep,
    "throughput-sweep": run_throughput_sweep,
}

log = logging.getLogger("lsmimo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsmimo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*SWEEPS, "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML key-value config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
        p.add_argument("--out", help="CSV output path (stdout when omitted)")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load(args):
    if args.config:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConfigWarning)
            cfg, warns = validate_config(args.config)
    else:
        cfg, warns = from_mapping({})
    overrides = {k: v for k, v in (("seed", args.seed), ("workers", args.workers), ("output", args.out))
                 if v is not None}
    if overrides:
        data = cfg.as_dict()
        data.update(overrides)
        cfg, warns = from_mapping(data)
    return cfg, warns


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, warns = load(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for w in warns:
        print(f"warning: {w}", file=sys.stderr)

    if args.command == "validate":
        text = yaml.safe_dump(cfg.as_dict(), sort_keys=False)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    try:
        result = SWEEPS[args.command](cfg)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any simulation failure maps to exit code 3
        log.exception("simulation failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in result.points:
        log.info("Eb/N0 %+.1f dB: %d trials, %.2f s", p.snr_db, p.trials, p.wall_clock_s)
    if cfg.output:
        result.write_csv(cfg.output)
    else:
        sys.stdout.write(result.to_csv())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
