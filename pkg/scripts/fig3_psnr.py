"""Mean luma PSNR versus Eb/N0 for both systems over the packetized link."""

import logging
import os

from _common import base_mapping, build, parser, setup

from lsmimo.config import BENCHMARK_SYSTEM, LS_SYSTEM
from lsmimo.harness import build_scenario, padding_overhead, run_video_sweep

GRID = [-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]


def main():
    p = parser(__doc__)
    p.add_argument("--video", help="raw 8-bit planar luma file; the synthetic source is used when omitted")
    args = p.parse_args()
    setup(args)
    size = dict(width=32, height=32, frames=16, bitrate_bps=60_000, max_payload_bits=4000, repetitions=5) \
        if args.quick else {}
    systems = {"psnr_ls_40x4": dict(system=LS_SYSTEM, N_r=40, N_t=4, R_c="1"),
               "psnr_benchmark_4x4": dict(system=BENCHMARK_SYSTEM, N_r=4, N_t=4, R_c="1/3")}
    for name, overrides in systems.items():
        data = base_mapping(args)
        data.update(snr_db=GRID, **size, **overrides)
        if args.video:
            data["video_path"] = args.video
        cfg = build(data)
        logging.info("%s: mean padding %.1f bits per packet", name, padding_overhead(build_scenario(cfg)))
        path = os.path.join(args.outdir, f"{name}.csv")
        run_video_sweep(cfg).write_csv(path)
        logging.info("%s -> %s", name, path)


if __name__ == "__main__":
    main()
