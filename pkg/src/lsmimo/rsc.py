"""Rate-1/3, K=7 convolutional code with generators (133, 165, 171) octal.

Two encoder structures share one trellis layout:

* ``feedforward`` -- the three outputs are the parities of the 7-bit register
  against 133, 165 and 171.
* ``rsc`` -- recursive systematic: 133 is the feedback polynomial, the
  outputs are the systematic bit and the parities against 165 and 171.

Blocks start in state 0 and are flushed back to it with K-1 = 6 tail steps,
so a message of N bits yields 3 (N + 6) coded bits.  The register convention
puts the newest bit at the generator MSB; the state holds the previous six
shifted-in bits with the most recent one in bit 5.

The decoder takes LLRs (positive favours 0) or hard bits and returns the
maximum-likelihood message under the correlation metric.
"""

from dataclasses import dataclass, field
from typing import Literal

import numba
import numpy as np

from .errors import FramingError, ParameterError

GENERATORS = (0o133, 0o165, 0o171)


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class TrellisCode:
    generators: tuple = GENERATORS
    constraint_length: int = 7
    mode: Literal["feedforward", "rsc"] = "feedforward"

    # next_state[s, w], outputs[s, w, 3], inputs[s, w]: trellis indexed by the
    # bit ``w`` shifted into the register (w == message bit for feedforward)
    next_state: np.ndarray = field(init=False, repr=False, compare=False)
    outputs: np.ndarray = field(init=False, repr=False, compare=False)
    inputs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in ("feedforward", "rsc"):
            raise ParameterError(f"unknown code mode {self.mode!r}")
        if len(self.generators) != 3 or self.constraint_length < 2:
            raise ParameterError("need three generators and K >= 2")
        m = self.constraint_length - 1
        n_states = 1 << m
        nxt = np.empty((n_states, 2), dtype=np.int64)
        out = np.empty((n_states, 2, 3), dtype=np.uint8)
        inp = np.empty((n_states, 2), dtype=np.uint8)
        fb = self.generators[0] & (n_states - 1)
        for s in range(n_states):
            for w in (0, 1):
                reg = (w << m) | s
                nxt[s, w] = reg >> 1
                if self.mode == "feedforward":
                    u = w
                    out[s, w] = [_parity(reg & g) for g in self.generators]
                else:
                    u = w ^ _parity(s & fb)
                    out[s, w] = [u, _parity(reg & self.generators[1]), _parity(reg & self.generators[2])]
                inp[s, w] = u
        for name, arr in (("next_state", nxt), ("outputs", out), ("inputs", inp)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    def coded_length(self, message_bits: int) -> int:
        return 3 * (message_bits + self.memory)


DEFAULT_CODE = TrellisCode()


@numba.njit(cache=True)
def _encode(msg, memory, nxt, out, fb_mask, recursive):
    n = msg.size
    coded = np.empty(3 * (n + memory), dtype=np.uint8)
    s = 0
    for t in range(n + memory):
        if t < n:
            u = msg[t]
            w = u
            if recursive:
                x = s & fb_mask
                p = 0
                while x:
                    p ^= x & 1
                    x >>= 1
                w = u ^ p
        else:
            w = 0  # tail: drive zeros into the register
        for g in range(3):
            coded[3 * t + g] = out[s, w, g]
        s = nxt[s, w]
    return coded


def encode(message, code: TrellisCode = DEFAULT_CODE) -> np.ndarray:
    """Tail-flushed codeword, three bits per step in generator order."""
    msg = np.asarray(message, dtype=np.uint8).ravel()
    if msg.size == 0:
        raise ParameterError("cannot encode an empty message")
    fb_mask = code.generators[0] & (code.n_states - 1)
    return _encode(msg, code.memory, code.next_state, code.outputs, fb_mask, code.mode == "rsc")


@numba.njit(cache=True)
def _viterbi(llr, lengths, memory, nxt, out, inp):
    batch = llr.shape[0]
    n_states = nxt.shape[0]
    half = n_states >> 1
    max_steps = llr.shape[1] // 3
    decoded = np.zeros((batch, max_steps - memory), dtype=np.uint8)
    pm = np.empty(n_states)
    new = np.empty(n_states)
    # symbol value of each output bit: 0 -> +1, 1 -> -1
    sign = 1.0 - 2.0 * out.astype(np.float64)
    choice = np.empty((max_steps, n_states), dtype=np.uint8)
    for b in range(batch):
        steps = lengths[b]
        pm[:] = -np.inf
        pm[0] = 0.0
        for t in range(steps):
            l0 = llr[b, 3 * t]
            l1 = llr[b, 3 * t + 1]
            l2 = llr[b, 3 * t + 2]
            tail = t >= steps - memory
            for ns in range(n_states):
                w = ns // half
                if tail and w == 1:
                    new[ns] = -np.inf
                    choice[t, ns] = 0
                    continue
                p0 = (ns % half) << 1
                p1 = p0 | 1
                m0 = pm[p0] + l0 * sign[p0, w, 0] + l1 * sign[p0, w, 1] + l2 * sign[p0, w, 2]
                m1 = pm[p1] + l0 * sign[p1, w, 0] + l1 * sign[p1, w, 1] + l2 * sign[p1, w, 2]
                # ties keep the lower-index predecessor
                if m1 > m0:
                    new[ns] = m1
                    choice[t, ns] = 1
                else:
                    new[ns] = m0
                    choice[t, ns] = 0
            for s in range(n_states):
                pm[s] = new[s]
        s = 0
        for t in range(steps - 1, -1, -1):
            w = s // half
            p = ((s % half) << 1) | choice[t, s]
            if t < steps - memory:
                decoded[b, t] = inp[p, w]
            s = p
    return decoded


def _as_metrics(data, hard: bool) -> np.ndarray:
    arr = np.asarray(data)
    if hard:
        return 1.0 - 2.0 * arr.astype(np.float64)
    return arr.astype(np.float64)


def viterbi_decode(data, code: TrellisCode = DEFAULT_CODE, hard: bool = False) -> np.ndarray:
    """Decode one tail-flushed block given per-coded-bit LLRs (or hard bits)."""
    metrics = _as_metrics(data, hard).ravel()
    if metrics.size % 3:
        raise FramingError(f"decoder input length {metrics.size} is not a multiple of 3")
    steps = metrics.size // 3
    if steps <= code.memory:
        raise FramingError(f"{steps} trellis steps cannot hold a {code.memory}-step tail")
    lengths = np.array([steps], dtype=np.int64)
    return _viterbi(metrics[None], lengths, code.memory, code.next_state, code.outputs, code.inputs)[0]


def viterbi_decode_batch(data, code: TrellisCode = DEFAULT_CODE, hard: bool = False,
                         lengths=None) -> np.ndarray:
    """Decode rows of a (B, 3*steps) array.

    ``lengths`` optionally gives each row's coded length (shorter rows are
    left-aligned and zero-filled); the result then has ``max(lengths)/3 - 6``
    columns and each row's message occupies its first ``length/3 - 6`` entries.
    """
    metrics = np.atleast_2d(_as_metrics(data, hard))
    if metrics.shape[1] % 3:
        raise FramingError(f"decoder input width {metrics.shape[1]} is not a multiple of 3")
    if lengths is None:
        lengths = np.full(metrics.shape[0], metrics.shape[1])
    lengths = np.asarray(lengths, dtype=np.int64)
    if np.any(lengths % 3) or np.any(lengths > metrics.shape[1]) or np.any(lengths // 3 <= code.memory):
        raise FramingError("every coded length must be a multiple of 3 covering more than the tail")
    return _viterbi(metrics, lengths // 3, code.memory, code.next_state, code.outputs, code.inputs)
