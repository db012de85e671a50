import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsmimo.channel import apply_channel, ebn0_to_sigma2, sample_channel, sample_channels, sample_noise, stream
from lsmimo.detectors import DetectorConfig, detect, ml_detect, zf_detect, zf_equalize
from lsmimo.errors import CapacityError, SingularChannelError
from lsmimo.harness import binomial_ci
from lsmimo.modem import QPSK, hard_slice, modulate

from oracles import exhaustive_ml


def _random_use(rng, nr, nt):
    h = sample_channel(nr, nt, rng)
    bits = rng.integers(0, 2, 2 * nt, dtype=np.uint8)
    return h, bits, modulate(bits, QPSK, nt)[0]


def test_zf_identity():
    rng = stream(0)
    bits = rng.integers(0, 2, 8, dtype=np.uint8)
    s = modulate(bits, QPSK, 4)[0]
    det = zf_detect(np.eye(4), s, QPSK)
    np.testing.assert_array_equal(det.bits, bits)
    np.testing.assert_allclose(det.symbols, s)


def test_zf_diagonal():
    s = modulate([0, 1, 1, 0], QPSK, 2)[0]
    h = np.diag([2.0, 4.0])
    det = zf_detect(h, h @ s, QPSK)
    np.testing.assert_allclose(det.symbols, s)


def test_zf_hand_inverse():
    rng = stream(3)
    h = np.array([[1.0, 1.0], [0.0, 1.0]])
    inv = np.array([[1.0, -1.0], [0.0, 1.0]])
    for _ in range(50):
        s = modulate(rng.integers(0, 2, 4, dtype=np.uint8), QPSK, 2)[0]
        y = h @ s + 0.05 * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
        _, expected = hard_slice(inv @ y, QPSK, 2)
        np.testing.assert_array_equal(zf_detect(h, y, QPSK).bits, expected.ravel())


def test_zf_square_solve_residual():
    rng = stream(4)
    h = sample_channels(500, 4, 4, rng)
    y = rng.standard_normal((500, 4)) + 1j * rng.standard_normal((500, 4))
    z, failed = zf_equalize(h, y)
    assert not failed.any()
    resid = np.linalg.norm(np.einsum("bij,bj->bi", h, z) - y, axis=1) / np.linalg.norm(y, axis=1)
    assert resid.max() < 1e-10


def test_zf_singular_flagged():
    h = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
    det = zf_detect(h, np.ones(3), QPSK)
    assert det.failed
    with pytest.raises(SingularChannelError):
        zf_detect(h, np.ones(3), QPSK, strict=True)


def test_ml_noiseless_recovers():
    rng = stream(5)
    for _ in range(20):
        h, bits, s = _random_use(rng, 4, 4)
        det = ml_detect(h, apply_channel(h, s), QPSK)
        np.testing.assert_array_equal(det.bits, bits)


def test_ml_counts_hypotheses():
    assert ml_detect(np.eye(4), np.zeros(4), QPSK).hypotheses_evaluated == 256
    with pytest.raises(CapacityError):
        ml_detect(np.eye(4), np.zeros(4), QPSK, cap=200)
    with pytest.raises(CapacityError):
        DetectorConfig("ML", enumeration_cap=100).check(QPSK, 4)


def test_ml_tie_goes_to_smallest_label():
    det = ml_detect(np.zeros((2, 2)), np.zeros(2), QPSK)
    assert det.bits.tolist() == [0, 0, 0, 0]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ml_matches_oracle_and_beats_zf(seed):
    rng = stream(seed)
    h, _, s = _random_use(rng, 3, 2)
    y = apply_channel(h, s, sample_noise(3, 0.2, rng))
    ml = ml_detect(h, y, QPSK)
    _, ref_bits = exhaustive_ml(h, y, QPSK.scaled(2), QPSK.labels.tolist())
    np.testing.assert_array_equal(ml.bits, ref_bits)
    zf = zf_detect(h, y, QPSK)
    metric = lambda x: np.sum(np.abs(y - h @ x) ** 2)
    assert metric(ml.symbols) <= metric(zf.symbols) + 1e-12


def test_determinism():
    rng = stream(6)
    h = sample_channels(100, 4, 4, rng)
    y = rng.standard_normal((100, 4)) + 1j * rng.standard_normal((100, 4))
    for kind in ("ZF", "ML"):
        a = detect(DetectorConfig(kind), h, y, QPSK)
        b = detect(DetectorConfig(kind), h, y, QPSK)
        np.testing.assert_array_equal(a.bits, b.bits)


def _ber(kind, nr, nt, ebn0, uses, seed):
    rng = stream(seed)
    bits = rng.integers(0, 2, uses * nt * 2, dtype=np.uint8)
    h = sample_channels(uses, nr, nt, rng)
    y = apply_channel(h, modulate(bits, QPSK, nt), sample_noise((uses, nr), ebn0_to_sigma2(ebn0, nt, 2), rng))
    det = detect(DetectorConfig(kind), h, y, QPSK)
    return int(np.count_nonzero(det.bits.ravel() != bits)), bits.size


@pytest.mark.slow
def test_ml_dominates_zf_monte_carlo():
    for ebn0 in (0.0, 4.0):
        e_ml, n = _ber("ML", 4, 4, ebn0, 40_000, seed=8)
        e_zf, _ = _ber("ZF", 4, 4, ebn0, 40_000, seed=8)  # same realizations
        assert binomial_ci(e_ml, n)[1] < binomial_ci(e_zf, n)[0]


@pytest.mark.slow
def test_zf_improves_with_array_size():
    e8, n = _ber("ZF", 8, 4, 0.0, 100_000, seed=9)
    e40, _ = _ber("ZF", 40, 4, 0.0, 100_000, seed=9)
    assert e40 < e8
    assert binomial_ci(e40, n)[1] < binomial_ci(e8, n)[0]
