"""Flat Rayleigh MIMO channel: y = H s + n.

Channel entries are CN(0, 1); noise entries are CN(0, 2*sigma2), i.e. each
real dimension has variance ``sigma2``.  Everything is complex128.
"""

from fractions import Fraction

import numpy as np

from .errors import DimensionError, ParameterError


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent, reproducible generator for the sub-stream ``key`` of ``seed``.

    Distinct keys give statistically independent streams, so Monte Carlo
    batches can be farmed out to workers in any order.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _check_dims(nr: int, nt: int) -> None:
    if nt < 1 or nr < nt:
        raise DimensionError(f"need nr >= nt >= 1, got nr={nr}, nt={nt}")


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """CN(0, variance) samples: real and imaginary parts each N(0, variance/2)."""
    scale = np.sqrt(variance / 2.0)
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    z = rng.standard_normal((*shape, 2))
    return scale * (z[..., 0] + 1j * z[..., 1])


def sample_channel(nr: int, nt: int, rng: np.random.Generator) -> np.ndarray:
    """One Nr x Nt channel realization with i.i.d. CN(0, 1) entries."""
    _check_dims(nr, nt)
    return complex_gaussian(rng, (nr, nt))


def sample_channels(count: int, nr: int, nt: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent realizations, shape (count, nr, nt)."""
    _check_dims(nr, nt)
    return complex_gaussian(rng, (count, nr, nt))


def sample_noise(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")
    return complex_gaussian(rng, shape, 2.0 * sigma2)


def apply_channel(h: np.ndarray, s: np.ndarray, noise: np.ndarray | None = None) -> np.ndarray:
    """Received vector(s) y = H s + n.

    Accepts a single (nr, nt) matrix with an (nt,) vector, or stacks
    (..., nr, nt) and (..., nt) for batched channel uses.
    """
    h = np.asarray(h)
    s = np.asarray(s)
    if h.ndim < 2 or s.shape[-1] != h.shape[-1] or s.shape[:-1] != h.shape[:-2]:
        raise DimensionError(f"channel {h.shape} incompatible with symbols {s.shape}")
    y = np.einsum("...ij,...j->...i", h, s)
    if noise is not None:
        noise = np.asarray(noise)
        if noise.shape != y.shape:
            raise DimensionError(f"noise shape {noise.shape} != received shape {y.shape}")
        y = y + noise
    return y


def ebn0_to_sigma2(ebn0_db: float, nt: int, bits_per_symbol: int, code_rate=1) -> float:
    """Per-dimension noise variance for a given Eb/N0.

    Total transmit energy per channel use is 1 and carries
    ``nt * bits_per_symbol * code_rate`` information bits, so
    Eb = 1 / (nt * Mb * Rc); with N0 = 2 sigma2 this gives
    sigma2 = 1 / (2 nt Mb Rc 10^(Eb/N0 / 10)).
    """
    rate = Fraction(code_rate).limit_denominator(1000) if not isinstance(code_rate, Fraction) else code_rate
    if rate <= 0 or rate > 1:
        raise ParameterError(f"code rate must be in (0, 1], got {code_rate}")
    if nt < 1 or bits_per_symbol < 1:
        raise ParameterError(f"nt and bits_per_symbol must be >= 1, got {nt}, {bits_per_symbol}")
    if not np.isfinite(ebn0_db):
        raise ParameterError(f"Eb/N0 must be finite, got {ebn0_db}")
    info_bits = nt * bits_per_symbol * float(rate)
    return 1.0 / (2.0 * info_bits * 10.0 ** (ebn0_db / 10.0))
