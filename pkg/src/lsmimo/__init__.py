"""Link-level simulator comparing an uncoded large-scale MIMO uplink (ZF) with a
rate-1/3 convolutionally coded 4x4 MIMO uplink (ML), from bits to video PSNR
and effective throughput."""

from .config import SystemConfig, benchmark_config, ls_config, validate_config
from .harness import SweepResult, run_ber_sweep, run_throughput_sweep, run_video_sweep

__all__ = [
    "SystemConfig",
    "SweepResult",
    "benchmark_config",
    "ls_config",
    "run_ber_sweep",
    "run_throughput_sweep",
    "run_video_sweep",
    "validate_config",
]
