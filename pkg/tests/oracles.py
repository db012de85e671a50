"""Slow, independently written reference implementations used only by tests."""

import itertools

import numpy as np

CRC32_GENERATOR = (1 << 32) | 0x04C11DB7


def crc32_long_division(bits) -> int:
    """CRC-32 by polynomial long division over GF(2).

    The input bits are the message coefficients, highest power first.  The
    all-ones initial register is the same as complementing the first 32
    coefficients of the augmented message; the reflected output reads the
    remainder from x^31 down into bit 0 upwards.
    """
    msg = [int(b) for b in bits] + [0] * 32
    for i in range(32):
        msg[i] ^= 1
    gen = [(CRC32_GENERATOR >> (32 - i)) & 1 for i in range(33)]
    for i in range(len(msg) - 32):
        if msg[i]:
            for j in range(33):
                msg[i + j] ^= gen[j]
    remainder = msg[-32:]
    value = sum(bit << i for i, bit in enumerate(remainder))
    return value ^ 0xFFFFFFFF


def shift_register_encode(message, generators=(0o133, 0o165, 0o171), k=7):
    """Feedforward convolutional encoder written as an explicit tap list."""
    taps = [[(g >> (k - 1 - i)) & 1 for i in range(k)] for g in generators]
    register = [0] * k  # register[0] is the newest bit
    out = []
    for bit in list(message) + [0] * (k - 1):
        register = [int(bit)] + register[:-1]
        for t in taps:
            out.append(sum(a * b for a, b in zip(t, register)) % 2)
    return out


def exhaustive_ml(h, y, points, labels):
    """Brute-force argmin over every symbol combination, ties to the smallest label."""
    nt = h.shape[1]
    best = None
    for combo in itertools.product(range(len(points)), repeat=nt):
        s = np.array([points[i] for i in combo])
        metric = float(np.sum(np.abs(y - h @ s) ** 2))
        label = tuple(b for i in combo for b in labels[i])
        key = (metric, label)
        if best is None or key < best[0]:
            best = (key, s, label)
    return best[1], np.array(best[2], dtype=np.uint8)


def exhaustive_llrs(h, y, points, labels, sigma2):
    nt = h.shape[1]
    k = len(labels[0])
    d0 = [np.inf] * (nt * k)
    d1 = [np.inf] * (nt * k)
    for combo in itertools.product(range(len(points)), repeat=nt):
        s = np.array([points[i] for i in combo])
        metric = float(np.sum(np.abs(y - h @ s) ** 2))
        label = [b for i in combo for b in labels[i]]
        for j, b in enumerate(label):
            if b:
                d1[j] = min(d1[j], metric)
            else:
                d0[j] = min(d0[j], metric)
    return (np.array(d1) - np.array(d0)) / (2 * sigma2)
