"""Effective throughput C_raw * (1 - BER_PPR) versus Eb/N0 for both systems."""

import logging
import os

from _common import base_mapping, build, parser, setup

from lsmimo.config import BENCHMARK_SYSTEM, LS_SYSTEM
from lsmimo.harness import run_throughput_sweep
from lsmimo.throughput import raw_throughput

GRID = [-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0]


def main():
    args = parser(__doc__).parse_args()
    setup(args)
    size = dict(width=32, height=32, frames=16, bitrate_bps=60_000, max_payload_bits=4000, repetitions=5) \
        if args.quick else dict(repetitions=200)
    systems = {"throughput_ls_40x4": dict(system=LS_SYSTEM, N_r=40, N_t=4, R_c="1"),
               "throughput_benchmark_4x4": dict(system=BENCHMARK_SYSTEM, N_r=4, N_t=4, R_c="1/3")}
    for name, overrides in systems.items():
        data = base_mapping(args)
        data.update(snr_db=GRID, **size, **overrides)
        cfg = build(data)
        path = os.path.join(args.outdir, f"{name}.csv")
        run_throughput_sweep(cfg).write_csv(path)
        logging.info("%s: C_raw %.4g b/s -> %s", name, raw_throughput(cfg.lte()), path)


if __name__ == "__main__":
    main()
