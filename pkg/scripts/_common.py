import argparse
import logging
import os
import sys

from lsmimo.config import from_mapping, validate_config
from lsmimo.errors import ConfigError


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", help="YAML overrides applied to every curve")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--outdir", default="results")
    p.add_argument("--quick", action="store_true", help="small trial counts for a smoke run")
    return p


def base_mapping(args) -> dict:
    data = {}
    if args.config:
        cfg, _ = validate_config(args.config)
        data = cfg.as_dict()
    data.update(seed=args.seed, workers=args.workers)
    return data


def build(data: dict):
    try:
        return from_mapping(data)[0]
    except ConfigError as exc:
        sys.exit("\n".join(exc.errors))


def setup(args) -> None:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    os.makedirs(args.outdir, exist_ok=True)
