"""Bit-level link chain of the two uplink systems.

Each of the ``N_t`` users owns one row of bits.  Coded systems first encode
every row separately.  Rows are zero-filled to a whole number of symbols,
user ``i``'s k-th symbol goes out on antenna ``i`` in channel use k, and every
channel use sees a fresh channel matrix and noise vector.
"""

from dataclasses import dataclass

import numpy as np

from .channel import apply_channel, ebn0_to_sigma2, sample_channels, sample_noise
from .config import SystemConfig
from .detectors import ml_detect, zf_detect
from .modem import Constellation, modulate, soft_bit_metrics
from .rsc import TrellisCode, encode, viterbi_decode_batch


@dataclass
class Link:
    cfg: SystemConfig

    def __post_init__(self):
        self.constellation = Constellation(self.cfg.M)
        self.code = TrellisCode(mode=self.cfg.code_mode) if self.cfg.coded else None

    @property
    def nt(self) -> int:
        return self.cfg.N_t

    def sigma2(self, ebn0_db: float) -> float:
        """Noise variance per dimension; 0 for an infinite Eb/N0 (noiseless channel)."""
        if ebn0_db == np.inf:
            return 0.0
        return ebn0_to_sigma2(ebn0_db, self.nt, self.constellation.bits_per_symbol, self.cfg.R_c)

    def channel_uses(self, row_bits: int) -> int:
        """Channel uses needed to carry ``row_bits`` information bits per user."""
        coded = self.code.coded_length(row_bits) if self.code else row_bits
        return -(-coded // self.constellation.bits_per_symbol)

    def _air(self, rows: np.ndarray, sigma2: float, rng: np.random.Generator):
        """Send (nt, L) bit rows; return detected bits or LLRs, shape (nt, uses*k)."""
        c, nt, k = self.constellation, self.nt, self.constellation.bits_per_symbol
        uses = -(-rows.shape[1] // k)
        filled = np.zeros((nt, uses * k), dtype=np.uint8)
        filled[:, :rows.shape[1]] = rows
        stream = filled.reshape(nt, uses, k).transpose(1, 0, 2).ravel()
        s = modulate(stream, c, nt)
        h = sample_channels(uses, self.cfg.N_r, nt, rng)
        noise = sample_noise((uses, self.cfg.N_r), sigma2, rng) if sigma2 > 0 else None
        y = apply_channel(h, s, noise)
        soft = self.code is not None and self.cfg.decoder_input == "soft"
        if soft:
            # max-log Viterbi is scale invariant, so any positive scale serves when noiseless
            out = soft_bit_metrics(y, h, c, sigma2 if sigma2 > 0 else 1.0, self.cfg.enumeration_cap)
        else:
            if self.cfg.detector == "ZF":
                det = zf_detect(h, y, c)
            else:
                det = ml_detect(h, y, c, self.cfg.enumeration_cap)
            out = det.bits
            if det.failed.any():
                # singular channel: every bit of that vector counts as wrong
                tx = stream.reshape(uses, nt * k)
                out = np.where(det.failed[:, None], 1 - tx, out)
            if self.code is not None:
                out = 1.0 - 2.0 * out
        return out.reshape(uses, nt, k).transpose(1, 0, 2).reshape(nt, uses * k)

    def transmit(self, rows: list[np.ndarray] | np.ndarray, ebn0_db: float, rng: np.random.Generator):
        """Carry a list of (nt, L_b) bit blocks over the channel; returns detected blocks.

        All blocks share one batched channel/detector call.  Coded blocks are
        encoded per user row and decoded back to information bits.
        """
        blocks = [np.asarray(b, dtype=np.uint8) for b in (rows if isinstance(rows, list) else [rows])]
        sigma2 = self.sigma2(ebn0_db)
        if self.code is not None:
            sent = [np.stack([encode(r, self.code) for r in b]) for b in blocks]
        else:
            sent = blocks
        k = self.constellation.bits_per_symbol
        widths = [-(-b.shape[1] // k) * k for b in sent]
        joined = np.zeros((self.nt, sum(widths)), dtype=np.uint8)
        offsets = np.concatenate([[0], np.cumsum(widths)])
        for b, start in zip(sent, offsets):
            joined[:, start:start + b.shape[1]] = b
        rx = self._air(joined, sigma2, rng)
        pieces = [rx[:, start:start + b.shape[1]] for b, start in zip(sent, offsets)]
        if self.code is None:
            return [p.astype(np.uint8) for p in pieces]
        lengths = np.array([p.shape[1] for p in pieces for _ in range(self.nt)])
        llr = np.zeros((len(lengths), lengths.max()))
        for i, p in enumerate(pieces):
            llr[i * self.nt:(i + 1) * self.nt, :p.shape[1]] = p
        decoded = viterbi_decode_batch(llr, self.code, lengths=lengths)
        return [decoded[i * self.nt:(i + 1) * self.nt, :b.shape[1]] for i, b in enumerate(blocks)]
