"""Square Gray-labelled QAM, slicing and exhaustive-enumeration bit metrics.

Bit arrays are numpy uint8 vectors of 0/1.  A label is read MSB first; the
first half of a label selects the quadrature level and the second half the
in-phase level, so 4-QAM maps

    00 -> (+1+j)/sqrt2   01 -> (-1+j)/sqrt2
    11 -> (-1-j)/sqrt2   10 -> (+1-j)/sqrt2

Symbols of a channel use are laid out user by user: the ``nt * Mb`` bits of
one channel use are split into ``nt`` consecutive labels, label ``i`` going to
antenna ``i``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DimensionError, FramingError, ParameterError

DEFAULT_ENUMERATION_CAP = 1 << 16


def _gray_pam(bits: int) -> np.ndarray:
    """Amplitude levels indexed by Gray label; label 0 is the most positive level."""
    n = 1 << bits
    levels = np.arange(n - 1, -n, -2, dtype=float)  # n-1, n-3, ..., -(n-1)
    out = np.empty(n)
    for position in range(n):
        out[position ^ (position >> 1)] = levels[position]
    return out


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy square QAM alphabet indexed by bit label."""

    order: int = 4
    points: np.ndarray = field(init=False, repr=False, compare=False)
    labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = int(round(np.log2(self.order))) if self.order > 1 else 0
        if self.order < 4 or (1 << k) != self.order or k % 2:
            raise ParameterError(f"QAM order must be a power of 4, got {self.order}")
        half = k // 2
        pam = _gray_pam(half)
        idx = np.arange(self.order)
        pts = pam[idx & ((1 << half) - 1)] + 1j * pam[idx >> half]
        pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
        labels = ((idx[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    def scaled(self, nt: int) -> np.ndarray:
        """Points with the per-user 1/sqrt(nt) power scaling applied."""
        return self.points / np.sqrt(nt)


QPSK = Constellation(4)


def bits_to_indices(bits: np.ndarray, k: int) -> np.ndarray:
    groups = np.asarray(bits, dtype=np.int64).reshape(-1, k)
    return groups @ (1 << np.arange(k - 1, -1, -1))


def modulate(bits, c: Constellation, nt: int) -> np.ndarray:
    """Map a bit stream to symbol vectors, shape (channel_uses, nt)."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    k = c.bits_per_symbol
    if nt < 1:
        raise DimensionError(f"nt must be >= 1, got {nt}")
    if bits.size % (nt * k):
        raise FramingError(f"{bits.size} bits is not a multiple of nt*log2(M) = {nt * k}")
    idx = bits_to_indices(bits, k)
    return c.scaled(nt)[idx].reshape(-1, nt)


def hard_slice(z, c: Constellation, nt: int):
    """Nearest scaled point to each entry of ``z`` and its label bits.

    Returns ``(points, bits)`` with ``bits`` of shape ``z.shape + (log2 M,)``.
    Exact ties go to the smallest label.
    """
    z = np.asarray(z, dtype=complex)
    pts = c.scaled(nt)
    idx = np.argmin(np.abs(z[..., None] - pts) ** 2, axis=-1)
    return pts[idx], c.labels[idx]


@lru_cache(maxsize=16)
def _hypotheses(order: int, nt: int):
    c = Constellation(order)
    k = c.bits_per_symbol
    count = order**nt
    idx = np.arange(count)
    # user 0 holds the most significant digit, so index order = lexicographic label order
    digits = (idx[:, None] // order ** np.arange(nt - 1, -1, -1)) % order
    symbols = c.scaled(nt)[digits]
    bits = c.labels[digits].reshape(count, nt * k)
    symbols.setflags(write=False)
    bits.setflags(write=False)
    return symbols, bits


def hypotheses(c: Constellation, nt: int, cap: int = DEFAULT_ENUMERATION_CAP):
    """All M**nt candidate symbol vectors in lexicographic label order.

    Returns ``(symbols, bits)`` of shapes (M**nt, nt) and (M**nt, nt*log2 M).
    """
    if c.order**nt > cap:
        raise CapacityError(f"{c.order}**{nt} = {c.order**nt} hypotheses exceeds cap {cap}")
    return _hypotheses(c.order, nt)


def hypothesis_distances(y: np.ndarray, h: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    """||y - H s||^2 for every candidate s; y (B, nr), h (B, nr, nt) -> (B, K)."""
    diff = y[:, :, None] - h @ symbols.T
    return (diff.real**2 + diff.imag**2).sum(axis=1)


def _as_batch(y, h):
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    single = y.ndim == 1
    if single:
        y, h = y[None], h[None]
    if h.ndim != 3 or y.shape != h.shape[:2]:
        raise DimensionError(f"received {y.shape} incompatible with channel {h.shape}")
    return y, h, single


def max_log_llrs(dist: np.ndarray, bits: np.ndarray, sigma2: float) -> np.ndarray:
    """Max-log LLRs from candidate distances; positive means bit 0 is more likely."""
    out = np.empty((dist.shape[0], bits.shape[1]))
    for j in range(bits.shape[1]):
        ones = bits[:, j].astype(bool)
        out[:, j] = dist[:, ones].min(axis=1) - dist[:, ~ones].min(axis=1)
    return out / (2.0 * sigma2)


def soft_bit_metrics(y, h, c: Constellation, sigma2: float, cap: int = DEFAULT_ENUMERATION_CAP,
                     chunk: int = 4096) -> np.ndarray:
    """Max-log LLR of every coded bit of each channel use by exhaustive enumeration.

    ``y`` is (nr,) or (B, nr); ``h`` is (nr, nt) or (B, nr, nt).  Output is
    (nt*log2 M,) or (B, nt*log2 M) in the bit layout used by :func:`modulate`.
    """
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    y, h, single = _as_batch(y, h)
    symbols, bits = hypotheses(c, h.shape[2], cap)
    out = np.empty((y.shape[0], bits.shape[1]))
    for start in range(0, y.shape[0], chunk):
        sl = slice(start, start + chunk)
        out[sl] = max_log_llrs(hypothesis_distances(y[sl], h[sl], symbols), bits, sigma2)
    return out[0] if single else out
