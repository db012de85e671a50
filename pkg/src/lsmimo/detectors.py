"""Zero-forcing and exhaustive maximum-likelihood MIMO detection.

Both detectors work on a batch of independent channel uses: ``y`` has shape
(B, nr) and ``h`` (B, nr, nt); a single use may be passed unbatched.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import CapacityError, SingularChannelError
from .modem import DEFAULT_ENUMERATION_CAP, Constellation, _as_batch, hard_slice, hypotheses, hypothesis_distances

SINGULAR_CONDITION = 1e12


@dataclass
class DetectorConfig:
    kind: Literal["ZF", "ML"] = "ZF"
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def check(self, c: Constellation, nt: int) -> None:
        if self.kind not in ("ZF", "ML"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if self.kind == "ML" and c.order**nt > self.enumeration_cap:
            raise CapacityError(f"ML needs {c.order**nt} hypotheses, cap is {self.enumeration_cap}")


@dataclass
class Detection:
    """Detected symbols (B, nt), their label bits (B, nt*log2 M) and a failure mask (B,).

    Rows flagged in ``failed`` hold meaningless symbols; callers count every
    bit of such a row as erroneous.
    """

    symbols: np.ndarray
    bits: np.ndarray
    failed: np.ndarray
    hypotheses_evaluated: int = 0

    def squeeze(self) -> "Detection":
        return Detection(self.symbols[0], self.bits[0], self.failed[0], self.hypotheses_evaluated)


def zf_equalize(h: np.ndarray, y: np.ndarray):
    """W y for each channel use plus a mask of numerically singular channels.

    Solves (H^H H) x = H^H y (or H x = y when square) instead of forming the
    pseudo-inverse.  cond(H) is taken from the Gram matrix eigenvalues.
    """
    nr, nt = h.shape[1:]
    hh = np.conj(np.swapaxes(h, 1, 2))
    gram = hh @ h
    eig = np.linalg.eigvalsh(gram)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.sqrt(eig[:, -1] / eig[:, 0])
    failed = ~((eig[:, 0] > 0) & (cond < SINGULAR_CONDITION))
    eye = np.eye(nt)
    if nr == nt:
        z = np.linalg.solve(np.where(failed[:, None, None], eye, h), y[..., None])[..., 0]
    else:
        z = np.linalg.solve(np.where(failed[:, None, None], eye, gram), hh @ y[..., None])[..., 0]
    return z, failed


def zf_detect(h, y, c: Constellation, strict: bool = False) -> Detection:
    y, h, single = _as_batch(y, h)
    nt = h.shape[2]
    z, failed = zf_equalize(h, y)
    if strict and failed.any():
        raise SingularChannelError(f"{int(failed.sum())} channel realization(s) are rank deficient")
    symbols, bits = hard_slice(z, c, nt)
    det = Detection(symbols, bits.reshape(len(y), -1), failed)
    return det.squeeze() if single else det


def ml_detect(h, y, c: Constellation, cap: int = DEFAULT_ENUMERATION_CAP, chunk: int = 4096) -> Detection:
    """argmin over A^nt of ||y - H s||^2; ties go to the smallest bit label."""
    y, h, single = _as_batch(y, h)
    symbols, bits = hypotheses(c, h.shape[2], cap)
    best = np.empty(len(y), dtype=np.int64)
    for start in range(0, len(y), chunk):
        sl = slice(start, start + chunk)
        best[sl] = np.argmin(hypothesis_distances(y[sl], h[sl], symbols), axis=1)
    det = Detection(symbols[best], bits[best].copy(), np.zeros(len(y), dtype=bool), len(symbols))
    return det.squeeze() if single else det


def detect(cfg: DetectorConfig, h, y, c: Constellation) -> Detection:
    if cfg.kind == "ZF":
        return zf_detect(h, y, c)
    return ml_detect(h, y, c, cfg.enumeration_cap)
