"""BER versus Eb/N0: 40x{2,4,6} uncoded ZF against the 4x4 coded ML benchmark.

Writes one CSV per curve into --outdir.
"""

import logging
import os

from _common import base_mapping, build, parser, setup

from lsmimo.config import BENCHMARK_SYSTEM, LS_SYSTEM
from lsmimo.harness import run_ber_sweep

GRID = [-12.0, -10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]


def main():
    args = parser(__doc__.splitlines()[0]).parse_args()
    setup(args)
    trials = dict(max_trials=20_000, target_errors=50) if args.quick else dict(max_trials=1_000_000, target_errors=200)
    curves = {f"ber_ls_40x{nt}": dict(system=LS_SYSTEM, N_r=40, N_t=nt, R_c="1", batch_uses=5000) for nt in (2, 4, 6)}
    curves["ber_benchmark_4x4"] = dict(system=BENCHMARK_SYSTEM, N_r=4, N_t=4, R_c="1/3")
    for name, overrides in curves.items():
        data = base_mapping(args)
        data.update(snr_db=GRID, **trials, **overrides)
        result = run_ber_sweep(build(data))
        path = os.path.join(args.outdir, f"{name}.csv")
        result.write_csv(path)
        logging.info("%s -> %s", name, path)


if __name__ == "__main__":
    main()
