import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsmimo.channel import stream
from lsmimo.errors import FramingError, UndefinedRateError
from lsmimo.packets import (
    CRC_BITS, Packet, RecoveryReport, align_block, ber_ppr, build_blocks, bytes_to_bits, crc32_bits, crc_attach,
    packet_crc, read_packet_trace, recover, segment, write_packet_trace,
)

from oracles import crc32_long_division

EMPTY_CRC = 0x00000000  # long-division oracle value for the empty message
EMPTY_PAYLOAD_PACKET_CRC = 0x2144DF1C  # oracle value over the 32-bit zero length field


def test_crc_check_value():
    bits = bytes_to_bits(b"123456789")
    assert crc32_long_division(bits) == 0xCBF43926
    assert crc32_bits(bits) == 0xCBF43926
    assert packet_crc(bits, include_length=False) == 0xCBF43926


def test_crc_empty_inputs():
    assert crc32_long_division([]) == EMPTY_CRC
    assert crc32_bits([]) == EMPTY_CRC
    assert crc32_long_division(np.zeros(32, dtype=np.uint8)) == EMPTY_PAYLOAD_PACKET_CRC
    assert crc_attach(Packet(0, 0, np.zeros(0, dtype=np.uint8))).crc == EMPTY_PAYLOAD_PACKET_CRC


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=200))
def test_crc_matches_long_division(bits):
    assert crc32_bits(bits) == crc32_long_division(bits)


def test_crc_deterministic():
    p = Packet(1, 2, stream(0).integers(0, 2, 500, dtype=np.uint8))
    assert crc_attach(p).crc == crc_attach(p).crc


def _bits(n_bytes, seed=0):
    return stream(seed).integers(0, 2, 8 * n_bytes, dtype=np.uint8)


def test_segment_examples():
    packets = segment(_bits(10_000), 1500 * 8)
    assert [p.payload_len_bits // 8 for p in packets] == [1500] * 6 + [1000]
    assert [p.seq_no for p in packets] == list(range(7))
    assert [p.payload_len_bits for p in segment(np.ones(1, dtype=np.uint8), 8000)] == [1]
    assert segment(np.zeros(0, dtype=np.uint8), 100) == []
    with pytest.raises(FramingError):
        segment(_bits(1), 0)


def test_align_block_examples():
    packets = [crc_attach(Packet(u, 0, _bits(n, u))) for u, n in enumerate([100, 130, 90, 130])]
    block = align_block(packets, nt=4)
    assert [p.pad_bits for p in block.packets] == [240, 0, 320, 0]
    assert block.bits().shape == (4, 130 * 8 + CRC_BITS)
    same = align_block([crc_attach(Packet(u, 0, _bits(50, u))) for u in range(4)])
    assert [p.pad_bits for p in same.packets] == [0, 0, 0, 0]
    with pytest.raises(FramingError):
        align_block(packets[:3], nt=4)


def test_typical_padding_is_tens_of_bits():
    from lsmimo.config import ls_config
    from lsmimo.harness import build_scenario, padding_overhead

    scenario = build_scenario(ls_config(frames=32))
    assert 10 <= padding_overhead(scenario) < 100  # on the order of tens of bits


def _pipeline(streams, max_bits):
    per_user = [[crc_attach(p) for p in segment(s, max_bits, user_id=u)] for u, s in enumerate(streams)]
    return build_blocks(per_user)


def test_error_free_recovery():
    streams = [_bits(300, u) for u in range(4)]
    blocks = _pipeline(streams, 1000)
    report, out = recover(blocks, [b.bits() for b in blocks])
    assert report.loss_map == set() and report.n_err_bits == 0
    for a, b in zip(streams, out):
        np.testing.assert_array_equal(a, b)
    assert ber_ppr(report) == 0.0


def test_single_flip_drops_packet():
    streams = [_bits(40, u) for u in range(2)]
    blocks = _pipeline(streams, 10_000)
    rx = [b.bits() for b in blocks]
    rx[0][1, 17] ^= 1
    report, out = recover(blocks, rx)
    assert report.loss_map == {(1, 0)}
    assert report.n_err_bits == 320
    assert out[1].size == 0


def test_errors_in_padding_are_ignored():
    blocks = _pipeline([_bits(10, 0), _bits(30, 1)], 10_000)
    rx = [b.bits() for b in blocks]
    assert blocks[0].packets[0].pad_bits == 160
    rx[0][0, -5:] ^= 1
    report, _ = recover(blocks, rx)
    assert report.loss_map == set()


def test_recover_shape_mismatch():
    blocks = _pipeline([_bits(10, 0), _bits(10, 1)], 10_000)
    with pytest.raises(FramingError):
        recover(blocks, [np.zeros((2, 5), dtype=np.uint8)])
    with pytest.raises(FramingError):
        recover(blocks, [])


def test_ber_ppr_examples():
    assert ber_ppr(RecoveryReport(n_err_bits=0, n_total_bits=10**6)) == 0.0
    assert ber_ppr(RecoveryReport(n_err_bits=150, n_total_bits=1000)) == 0.15
    assert ber_ppr(RecoveryReport(n_err_bits=1000, n_total_bits=1000)) == 1.0
    with pytest.raises(UndefinedRateError):
        ber_ppr(RecoveryReport())


def test_crc_detects_every_single_flip_128():
    payload = _bits(16, 9)
    p = crc_attach(Packet(0, 0, payload))
    frame = p.frame()
    for i in range(frame.size):
        bad = frame.copy()
        bad[i] ^= 1
        assert int(np.sum(bad[128:] << np.arange(32))) != packet_crc(bad[:128])


def test_crc_detects_single_flips_2048():
    payload = stream(10).integers(0, 2, 2048, dtype=np.uint8)
    frame = crc_attach(Packet(0, 0, payload)).frame()
    for i in range(frame.size):
        bad = frame.copy()
        bad[i] ^= 1
        assert int(np.sum(bad[2048:].astype(np.int64) << np.arange(32))) != packet_crc(bad[:2048])


def test_crc_detects_random_double_flips():
    rng = stream(11)
    for n in (8, 100, 1000, 2048):
        payload = rng.integers(0, 2, n, dtype=np.uint8)
        frame = crc_attach(Packet(0, 0, payload)).frame()
        for _ in range(25_000):
            i, j = rng.choice(frame.size, 2, replace=False)
            bad = frame.copy()
            bad[[i, j]] ^= 1
            assert int(np.sum(bad[n:].astype(np.int64) << np.arange(32))) != packet_crc(bad[:n])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 600), st.floats(0, 0.01))
def test_conservation_and_loss_map(seed, nt, max_bits, flip_p):
    rng = stream(seed)
    streams = [rng.integers(0, 2, int(rng.integers(0, 3000)), dtype=np.uint8) for _ in range(nt)]
    blocks = _pipeline(streams, max_bits)
    rx = [b.bits() ^ (rng.random(b.bits().shape) < flip_p).astype(np.uint8) for b in blocks]
    report, out = recover(blocks, rx, nt)
    passed = sum(r.payload_len_bits for r in report.records if r.crc_pass)
    assert report.dropped_bits + passed == report.n_total_bits == sum(s.size for s in streams)
    assert 0 <= report.n_err_bits <= report.n_total_bits
    # loss map is exactly the set of packets whose payload+CRC region was damaged
    damaged = set()
    for b, r in zip(blocks, rx):
        for row, p in enumerate(b.packets):
            if not p.filler and np.any(r[row, :p.frame_len_bits] != b.bits()[row, :p.frame_len_bits]):
                damaged.add((p.user_id, p.seq_no))
    assert report.loss_map == damaged
    assert sum(o.size for o in out) == passed


def test_packet_trace_round_trip(tmp_path):
    blocks = _pipeline([_bits(100, 0), _bits(70, 1)], 300)
    rx = [b.bits() for b in blocks]
    rx[1][0, 3] ^= 1
    report, _ = recover(blocks, rx)
    path = tmp_path / "trace.csv"
    write_packet_trace(report, path)
    with open(path) as fh:
        assert next(csv.reader(fh)) == ["user_id", "seq_no", "payload_len_bits", "pad_bits", "crc_pass"]
    rows = read_packet_trace(path)
    assert [(r.user_id, r.seq_no, r.crc_pass) for r in rows] == [
        (r.user_id, r.seq_no, r.crc_pass) for r in report.records
    ]
    assert {(r.user_id, r.seq_no) for r in rows if not r.crc_pass} == {(0, 1)}
