"""NALU-like packetization: segmentation, CRC-32, zero-padding alignment, recovery.

A transmitted packet frame is ``payload | crc32 | zero padding``.  The CRC
covers a 32-bit little-endian length field (payload length in bits) followed
by the payload; padding is never covered and is stripped before checking.

Bytes become bits least-significant bit first throughout, which is the bit
order the reflected CRC-32 consumes.
"""

import csv
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FramingError, UndefinedRateError

CRC_BITS = 32
CRC_POLY_REFLECTED = 0xEDB88320  # 0x04C11DB7 bit-reversed
CRC_INIT = 0xFFFFFFFF
CRC_XOROUT = 0xFFFFFFFF


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8), bitorder="little")


def bits_to_bytes(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def crc32_bits(bits) -> int:
    """CRC-32 (IEEE 802.3, reflected) of an arbitrary-length bit sequence."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    whole = bits.size - bits.size % 8
    crc = zlib.crc32(bits_to_bytes(bits[:whole])) ^ CRC_XOROUT  # back to the raw register
    for b in bits[whole:]:
        lsb = (crc ^ int(b)) & 1
        crc >>= 1
        if lsb:
            crc ^= CRC_POLY_REFLECTED
    return crc ^ CRC_XOROUT


def int_to_bits(value: int, width: int = CRC_BITS) -> np.ndarray:
    return ((value >> np.arange(width)) & 1).astype(np.uint8)


def bits_to_int(bits) -> int:
    bits = np.asarray(bits, dtype=np.int64)
    return int(np.sum(bits << np.arange(bits.size)))


@dataclass
class Packet:
    user_id: int
    seq_no: int
    payload: np.ndarray = field(repr=False)
    crc: int | None = None
    pad_bits: int = 0
    filler: bool = False  # placeholder keeping a block full; not part of any stream

    @property
    def payload_len_bits(self) -> int:
        return int(self.payload.size)

    @property
    def frame_len_bits(self) -> int:
        """Length of payload plus CRC, i.e. before padding."""
        return self.payload_len_bits + (CRC_BITS if self.crc is not None else 0)

    def frame(self) -> np.ndarray:
        """Bits put on the air: payload, CRC, then ``pad_bits`` zeros."""
        parts = [self.payload]
        if self.crc is not None:
            parts.append(int_to_bits(self.crc))
        parts.append(np.zeros(self.pad_bits, dtype=np.uint8))
        return np.concatenate(parts)


def packet_crc(payload, include_length: bool = True) -> int:
    payload = np.asarray(payload, dtype=np.uint8)
    if include_length:
        payload = np.concatenate([int_to_bits(payload.size), payload])
    return crc32_bits(payload)


def crc_attach(p: Packet, include_length: bool = True) -> Packet:
    return replace(p, crc=packet_crc(p.payload, include_length))


def segment(stream, max_payload_bits: int, user_id: int = 0, first_seq: int = 0) -> list[Packet]:
    """Split a bit stream into consecutive packets of at most ``max_payload_bits``."""
    if max_payload_bits <= 0:
        raise FramingError(f"max_payload_bits must be positive, got {max_payload_bits}")
    stream = np.asarray(stream, dtype=np.uint8).ravel()
    return [
        Packet(user_id, first_seq + i, stream[start:start + max_payload_bits].copy())
        for i, start in enumerate(range(0, stream.size, max_payload_bits))
    ]


@dataclass
class TransmissionBlock:
    """One packet per user, all zero-padded to the same frame length."""

    packets: list[Packet]

    @property
    def nt(self) -> int:
        return len(self.packets)

    @property
    def frame_bits(self) -> int:
        return self.packets[0].frame_len_bits + self.packets[0].pad_bits

    def bits(self) -> np.ndarray:
        """(nt, frame_bits) array of transmitted frames, row = user."""
        return np.stack([p.frame() for p in self.packets])


def align_block(packets: list[Packet], nt: int | None = None) -> TransmissionBlock:
    """Zero-pad every packet to the longest payload+CRC length in the block."""
    if not packets or (nt is not None and len(packets) != nt):
        raise FramingError(f"a block needs exactly {nt} packets, got {len(packets)}")
    target = max(p.frame_len_bits for p in packets)
    return TransmissionBlock([replace(p, pad_bits=target - p.frame_len_bits) for p in packets])


def filler_packet(user_id: int, seq_no: int) -> Packet:
    return crc_attach(Packet(user_id, seq_no, np.zeros(0, dtype=np.uint8), filler=True))


def build_blocks(per_user: list[list[Packet]]) -> list[TransmissionBlock]:
    """Group the k-th packet of every user into block k.

    Users that have run out of packets contribute a filler packet so every
    block carries exactly one packet per user.  CRCs are attached here if
    missing.
    """
    nt = len(per_user)
    n_blocks = max((len(q) for q in per_user), default=0)
    blocks = []
    for k in range(n_blocks):
        row = []
        for u in range(nt):
            if k < len(per_user[u]):
                p = per_user[u][k]
                row.append(p if p.crc is not None else crc_attach(p))
            else:
                row.append(filler_packet(u, k))
        blocks.append(align_block(row, nt))
    return blocks


@dataclass
class PacketRecord:
    user_id: int
    seq_no: int
    payload_len_bits: int
    pad_bits: int
    crc_pass: bool
    residual_errors: int = 0


@dataclass
class RecoveryReport:
    records: list[PacketRecord] = field(default_factory=list)
    n_err_bits: int = 0  # erroneous information bits after recovery (N_b,PPR)
    n_total_bits: int = 0  # transmitted information bits (N_b,t)

    @property
    def loss_map(self) -> set[tuple[int, int]]:
        return {(r.user_id, r.seq_no) for r in self.records if not r.crc_pass}

    @property
    def dropped_bits(self) -> int:
        return sum(r.payload_len_bits for r in self.records if not r.crc_pass)

    def merge(self, other: "RecoveryReport") -> "RecoveryReport":
        return RecoveryReport(self.records + other.records, self.n_err_bits + other.n_err_bits,
                              self.n_total_bits + other.n_total_bits)


def recover(blocks: list[TransmissionBlock], received: list[np.ndarray], nt: int | None = None):
    """CRC-gated packet combining.

    ``received[k]`` holds the detected (nt, frame_bits) bits of ``blocks[k]``.
    Failing packets are dropped and all their payload bits count as errors;
    residual errors in passing packets (undetected by the CRC) are counted
    against the originals.  Returns the report and one reassembled bit
    stream per user.
    """
    if len(blocks) != len(received):
        raise FramingError(f"{len(received)} received blocks for {len(blocks)} transmitted")
    nt = nt if nt is not None else (blocks[0].nt if blocks else 0)
    report = RecoveryReport()
    streams: list[list[np.ndarray]] = [[] for _ in range(nt)]
    for block, rx in zip(blocks, received):
        rx = np.asarray(rx, dtype=np.uint8)
        if rx.shape != (block.nt, block.frame_bits) or block.nt != nt:
            raise FramingError(f"received shape {rx.shape} != transmitted ({block.nt}, {block.frame_bits})")
        for p, bits in zip(block.packets, rx):
            if p.filler:
                continue
            n = p.payload_len_bits
            payload = bits[:n]
            rx_crc = bits_to_int(bits[n:n + CRC_BITS])
            ok = rx_crc == packet_crc(payload)
            residual = int(np.count_nonzero(payload != p.payload)) if ok else 0
            report.records.append(PacketRecord(p.user_id, p.seq_no, n, p.pad_bits, ok, residual))
            report.n_total_bits += n
            report.n_err_bits += residual if ok else n
            if ok:
                streams[p.user_id].append(payload)
    joined = [np.concatenate(s) if s else np.zeros(0, dtype=np.uint8) for s in streams]
    return report, joined


def ber_ppr(report: RecoveryReport) -> float:
    """Post-packet-recovery bit error rate N_b,PPR / N_b,t."""
    if report.n_total_bits <= 0:
        raise UndefinedRateError("no information bits were transmitted")
    return report.n_err_bits / report.n_total_bits


def write_packet_trace(report: RecoveryReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "seq_no", "payload_len_bits", "pad_bits", "crc_pass"])
        for r in report.records:
            writer.writerow([r.user_id, r.seq_no, r.payload_len_bits, r.pad_bits, int(r.crc_pass)])


def read_packet_trace(path) -> list[PacketRecord]:
    with open(path, newline="") as fh:
        return [
            PacketRecord(int(row["user_id"]), int(row["seq_no"]), int(row["payload_len_bits"]),
                         int(row["pad_bits"]), row["crc_pass"] == "1")
            for row in csv.DictReader(fh)
        ]
