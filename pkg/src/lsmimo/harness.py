"""Monte Carlo sweeps: BER, packetized video PSNR and effective throughput.

Every unit of work (a BER batch or a video repetition) draws from its own
stream ``stream(seed, snr_index, unit_index)``.  Units are reduced strictly
in index order, so results do not depend on how many workers computed them.
Both systems see the same streams for the same (seed, SNR index, unit).
"""

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .channel import stream
from .config import SystemConfig
from .packets import Packet, TransmissionBlock, build_blocks, recover, segment
from .system import Link
from .throughput import effective_throughput, raw_throughput
from .video import FrameSequence, LossToFrameMap, ReferenceStructure, conceal, load_frames, moving_gradient, psnr_y
from .errors import ConfigError

CSV_COLUMNS = ["snr_db", "ber", "ber_ci_low", "ber_ci_high", "ber_ppr", "psnr_mean_db", "c_eff_bps", "trials", "seed"]
BITSTREAM_KEY = 0x5EED  # stream key for the fixed per-user bitstreams and sources


def binomial_ci(errors: int, total: int, level: float = 0.95) -> tuple[float, float]:
    """Exact (Clopper-Pearson) interval for an error probability."""
    if total <= 0:
        return (math.nan, math.nan)
    ci = binomtest(int(errors), int(total)).proportion_ci(level, method="exact")
    return float(ci.low), float(ci.high)


@dataclass
class PointResult:
    snr_db: float
    trials: int = 0
    bit_errors: int = 0
    bits: int = 0
    ber_ppr: float | None = None
    psnr_mean_db: float | None = None
    c_eff_bps: float | None = None
    ppr_errors: int = 0
    ppr_bits: int = 0
    dropped_packets: int = 0
    packets: int = 0
    wall_clock_s: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else math.nan

    @property
    def ci(self) -> tuple[float, float]:
        return binomial_ci(self.bit_errors, self.bits)


@dataclass
class SweepResult:
    cfg: SystemConfig
    points: list[PointResult] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        fmt = lambda v: "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.12g}"
        for p in self.points:
            lo, hi = p.ci
            writer.writerow([fmt(p.snr_db), fmt(p.ber), fmt(lo), fmt(hi), fmt(p.ber_ppr), fmt(p.psnr_mean_db),
                             fmt(p.c_eff_bps), p.trials, self.cfg.seed])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _map_units(pool, fn, args_list):
    if pool is None:
        return [fn(*a) for a in args_list]
    return list(pool.map(fn, *zip(*args_list)))


def _pool(cfg: SystemConfig):
    return ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None


# --- BER -------------------------------------------------------------------

def ber_batch(cfg: SystemConfig, snr_index: int, batch_index: int, ebn0_db: float):
    """One Monte Carlo batch: (information-bit errors, information bits, channel uses)."""
    rng = stream(cfg.seed, snr_index, batch_index)
    link = Link(cfg)
    k = link.constellation.bits_per_symbol
    if link.code is not None:
        uses_per_block = link.channel_uses(cfg.block_bits)
        n_blocks = max(1, cfg.batch_uses // uses_per_block)
        rows = [rng.integers(0, 2, (cfg.N_t, cfg.block_bits), dtype=np.uint8) for _ in range(n_blocks)]
        uses = n_blocks * uses_per_block
    else:
        rows = [rng.integers(0, 2, (cfg.N_t, cfg.batch_uses * k), dtype=np.uint8)]
        uses = cfg.batch_uses
    rx = link.transmit(rows, ebn0_db, rng)
    errors = sum(int(np.count_nonzero(a != b)) for a, b in zip(rows, rx))
    return errors, sum(r.size for r in rows), uses


def _ber_point(cfg, snr_index, ebn0_db, pool) -> PointResult:
    point = PointResult(ebn0_db)
    wave = max(1, cfg.workers)
    batch = 0
    start = time.perf_counter()
    while True:
        results = _map_units(pool, ber_batch, [(cfg, snr_index, batch + i, ebn0_db) for i in range(wave)])
        batch += wave
        for errors, bits, uses in results:
            point.bit_errors += errors
            point.bits += bits
            point.trials += uses
            if point.trials >= cfg.max_trials or (point.bit_errors >= cfg.target_errors
                                                 and point.trials >= cfg.min_trials):
                point.wall_clock_s = time.perf_counter() - start
                return point


def run_ber_sweep(cfg: SystemConfig) -> SweepResult:
    """BER of information bits per Eb/N0 point; stops on max trials or target error count."""
    result = SweepResult(cfg)
    pool = _pool(cfg)
    try:
        for j, ebn0 in enumerate(cfg.snr_db):
            result.points.append(_ber_point(cfg, j, ebn0, pool))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


# --- packetized video ----------------------------------------------------------

@dataclass
class VideoScenario:
    """Per-user sources, their NALU bitstreams already packetized, and the block layout."""

    sources: list[FrameSequence]
    refs: ReferenceStructure
    packets: list[list[Packet]]
    frame_map: LossToFrameMap
    blocks: list[TransmissionBlock]


def reference_structure(cfg: SystemConfig) -> ReferenceStructure:
    if cfg.reference == "low_delay":
        return ReferenceStructure.low_delay(cfg.frames, cfg.intra_period, cfg.dpb_capacity)
    return ReferenceStructure.hierarchical(cfg.frames, cfg.gop, cfg.intra_period, cfg.dpb_capacity)


def nalu_sizes(cfg: SystemConfig, refs: ReferenceStructure, rng: np.random.Generator) -> np.ndarray:
    """Picture sizes in bits whose mean matches ``bitrate / frame_rate``."""
    weight = np.array([cfg.intra_ratio if r is None else 1.0 for r in refs.refs])
    mean_bits = cfg.bitrate_bps / cfg.frame_rate
    sizes = weight / weight.mean() * mean_bits
    sizes *= 1.0 + cfg.size_jitter * rng.uniform(-1.0, 1.0, sizes.size)
    return np.maximum(8, np.round(sizes / 8) * 8).astype(int)  # whole bytes, never empty


def build_scenario(cfg: SystemConfig) -> VideoScenario:
    refs = reference_structure(cfg)
    sources, per_user = [], []
    frame_map = LossToFrameMap()
    for u in range(cfg.N_t):
        rng = stream(cfg.seed, BITSTREAM_KEY, u)
        if cfg.video_path:
            sources.append(load_frames(cfg.video_path, cfg.width, cfg.height, cfg.frames, frame_rate=cfg.frame_rate))
        else:
            sources.append(moving_gradient(cfg.width, cfg.height, cfg.frames, step=1 + u, phase=37 * u,
                                           frame_rate=cfg.frame_rate))
        packets = []
        for f, size in enumerate(nalu_sizes(cfg, refs, rng)):
            nalu = rng.integers(0, 2, size, dtype=np.uint8)
            for p in segment(nalu, cfg.max_payload_bits, user_id=u, first_seq=len(packets)):
                frame_map.mapping[(u, p.seq_no)] = f
                packets.append(p)
        per_user.append(packets)
    return VideoScenario(sources, refs, per_user, frame_map, build_blocks(per_user))


@dataclass
class RepetitionOutcome:
    bit_errors: int
    bits: int
    uses: int
    ppr_errors: int
    ppr_bits: int
    dropped: int
    packets: int
    psnr_sum: float = 0.0  # sum over users of each user's mean PSNR
    loss_map: frozenset = frozenset()


def transport_repetition(cfg: SystemConfig, scenario: VideoScenario, snr_index: int, rep: int,
                         ebn0_db: float, with_video: bool = True, force_drop=frozenset()) -> RepetitionOutcome:
    """Send every block of the scenario once; optionally reconstruct and score the video.

    An infinite ``ebn0_db`` sends the blocks over the fading channel without
    noise.  ``force_drop`` lists (user_id, seq_no) packets whose CRC field is
    corrupted after detection, for fault-injection experiments.
    """
    rng = stream(cfg.seed, snr_index, rep)
    link = Link(cfg)
    tx = [b.bits() for b in scenario.blocks]
    rx = link.transmit(tx, ebn0_db, rng)
    for block, bits in zip(scenario.blocks, rx):
        for row, p in enumerate(block.packets):
            if (p.user_id, p.seq_no) in force_drop and not p.filler:
                bits[row, p.payload_len_bits] ^= 1
    bit_errors = bits_total = 0
    for block, sent, got in zip(scenario.blocks, tx, rx):
        for row, p in enumerate(block.packets):
            if not p.filler:
                n = p.payload_len_bits
                bit_errors += int(np.count_nonzero(sent[row, :n] != got[row, :n]))
                bits_total += n
    report, _ = recover(scenario.blocks, rx, cfg.N_t)
    uses = sum(link.channel_uses(b.frame_bits) for b in scenario.blocks)
    out = RepetitionOutcome(bit_errors, bits_total, uses, report.n_err_bits, report.n_total_bits,
                            len(report.loss_map), len(report.records), loss_map=frozenset(report.loss_map))
    if with_video:
        for u, src in enumerate(scenario.sources):
            lost = scenario.frame_map.lost_frames(report.loss_map, u)
            rec = conceal(src, lost, scenario.refs) if lost and len(lost) < len(src) else src
            if len(lost) == len(src):
                rec = FrameSequence(np.zeros_like(src.luma), src.frame_rate)  # nothing decodable
            out.psnr_sum += psnr_y(src, rec, cfg.psnr_cap_db)[1]
    return out


def _transport_worker(cfg, snr_index, rep, ebn0_db, with_video):
    return transport_repetition(cfg, build_scenario(cfg), snr_index, rep, ebn0_db, with_video)


def _transport_point(cfg, scenario, snr_index, ebn0_db, with_video, pool) -> PointResult:
    point = PointResult(ebn0_db)
    start = time.perf_counter()
    if pool is None:
        outcomes = [transport_repetition(cfg, scenario, snr_index, r, ebn0_db, with_video)
                    for r in range(cfg.repetitions)]
    else:
        outcomes = list(pool.map(_transport_worker, *zip(*[(cfg, snr_index, r, ebn0_db, with_video)
                                                           for r in range(cfg.repetitions)]),
                                 chunksize=max(1, cfg.repetitions // (4 * cfg.workers))))
    psnr_total = 0.0
    for o in outcomes:
        point.bit_errors += o.bit_errors
        point.bits += o.bits
        point.trials += o.uses
        point.ppr_errors += o.ppr_errors
        point.ppr_bits += o.ppr_bits
        point.dropped_packets += o.dropped
        point.packets += o.packets
        psnr_total += o.psnr_sum
    point.ber_ppr = point.ppr_errors / point.ppr_bits
    point.c_eff_bps = effective_throughput(raw_throughput(cfg.lte()), point.ber_ppr)
    if with_video:
        point.psnr_mean_db = psnr_total / (cfg.repetitions * cfg.N_t)
    point.wall_clock_s = time.perf_counter() - start
    return point


def _transport_sweep(cfg: SystemConfig, with_video: bool) -> SweepResult:
    if cfg.video_path is not None and not os.path.exists(cfg.video_path):
        raise ConfigError(f"video_path: no such file {cfg.video_path}")
    scenario = build_scenario(cfg)
    result = SweepResult(cfg)
    pool = _pool(cfg)
    try:
        for j, ebn0 in enumerate(cfg.snr_db):
            result.points.append(_transport_point(cfg, scenario, j, ebn0, with_video, pool))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def run_video_sweep(cfg: SystemConfig) -> SweepResult:
    """Mean luma PSNR and BER_PPR per Eb/N0 over ``cfg.repetitions`` transmissions."""
    return _transport_sweep(cfg, with_video=True)


def run_throughput_sweep(cfg: SystemConfig) -> SweepResult:
    """Effective throughput C_raw * (1 - BER_PPR) per Eb/N0 from the packetized chain."""
    return _transport_sweep(cfg, with_video=False)


def padding_overhead(scenario: VideoScenario) -> float:
    """Mean zero-padding bits per (non-filler) packet."""
    pads = [p.pad_bits for b in scenario.blocks for p in b.packets if not p.filler]
    return float(np.mean(pads)) if pads else 0.0
