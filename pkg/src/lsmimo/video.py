"""Frame-level effects of packet loss: frame-copy concealment and luma PSNR.

Compressed bitstreams are not simulated.  Each picture travels as one NALU
(possibly split over several packets); losing any of its packets loses the
whole picture, which is then concealed by copying another decoded picture.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConcealmentError, FormatError

PSNR_CAP_DB = 100.0


@dataclass
class FrameSequence:
    """Luma planes, shape (frames, height, width), uint8; chroma optional."""

    luma: np.ndarray
    frame_rate: float = 30.0
    chroma: np.ndarray | None = None  # (frames, 2, height/2, width/2) for 4:2:0

    def __post_init__(self):
        self.luma = np.asarray(self.luma)
        if self.luma.ndim != 3 or self.luma.dtype != np.uint8:
            raise FormatError(f"luma must be a uint8 (frames, height, width) array, got {self.luma.dtype} {self.luma.shape}")

    def __len__(self):
        return self.luma.shape[0]

    @property
    def shape(self):
        return self.luma.shape[1:]


@dataclass
class ReferenceStructure:
    """Per-frame reference index (None for intra pictures) and DPB capacity.

    A reference is within the DPB when it lies at most ``dpb_capacity``
    pictures before the frame that uses it.
    """

    refs: list[int | None]
    dpb_capacity: int = 4

    def __post_init__(self):
        if self.dpb_capacity < 1:
            raise ValueError("DPB capacity must be at least 1")
        for i, r in enumerate(self.refs):
            if r is not None and not 0 <= r < i:
                raise ValueError(f"frame {i} references {r}; only past frames may be referenced")

    @classmethod
    def low_delay(cls, n_frames: int, intra_period: int = 0, dpb_capacity: int = 4):
        """IPPP...: every picture references its predecessor, intra every ``intra_period``."""
        refs = [None if i == 0 or (intra_period and i % intra_period == 0) else i - 1 for i in range(n_frames)]
        return cls(refs, dpb_capacity)

    @classmethod
    def hierarchical(cls, n_frames: int, gop: int = 8, intra_period: int = 32, dpb_capacity: int = 4):
        """Random-access-like dyadic GOP restricted to past references.

        Within each GOP starting at picture g, picture g+gop references g and
        every other picture references the nearest earlier picture on the
        next coarser temporal layer.
        """
        refs: list[int | None] = [None] * n_frames
        for i in range(1, n_frames):
            if intra_period and i % intra_period == 0:
                continue
            offset = i % gop
            if offset == 0:
                refs[i] = i - gop
                continue
            step = offset & -offset  # lowest set bit: temporal layer spacing
            refs[i] = i - step
        return cls(refs, dpb_capacity)


def load_frames(path, width: int, height: int, count: int, chroma: bool = False,
                frame_rate: float = 30.0) -> FrameSequence:
    """Read ``count`` frames from a raw planar 8-bit file (Y only, or I420 when ``chroma``)."""
    luma_size = width * height
    chroma_size = 2 * (width // 2) * (height // 2) if chroma else 0
    frame_size = luma_size + chroma_size
    need = frame_size * count
    if os.path.getsize(path) < need:
        raise FormatError(f"{path}: {os.path.getsize(path)} bytes < {need} needed for {count} frames")
    raw = np.fromfile(path, dtype=np.uint8, count=need).reshape(count, frame_size)
    luma = raw[:, :luma_size].reshape(count, height, width)
    planes = None
    if chroma:
        planes = raw[:, luma_size:].reshape(count, 2, height // 2, width // 2)
    return FrameSequence(luma, frame_rate, planes)


def save_frames(seq: FrameSequence, path) -> None:
    with open(path, "wb") as fh:
        for i in range(len(seq)):
            fh.write(seq.luma[i].tobytes())
            if seq.chroma is not None:
                fh.write(seq.chroma[i].tobytes())


def moving_gradient(width: int, height: int, count: int, step: int = 1, phase: int = 0,
                    frame_rate: float = 30.0) -> FrameSequence:
    """Synthetic source: pixel (x, y, t) = (x + y + step*t + phase) mod 256."""
    x = np.arange(width)[None, None, :]
    y = np.arange(height)[None, :, None]
    t = np.arange(count)[:, None, None]
    return FrameSequence(((x + y + step * t + phase) % 256).astype(np.uint8), frame_rate)


def conceal(seq: FrameSequence, lost, refs: ReferenceStructure) -> FrameSequence:
    """Two-stage frame-copy concealment of the pictures listed in ``lost``.

    Stage 1 (decoder, ascending order): a lost picture whose reference was
    received or already stage-1 concealed, and is still in the DPB, becomes a
    copy of that reference.  Stage 2 (ascending order): every remaining lost
    picture copies the temporally closest available picture, the earlier one
    on a distance tie.
    """
    n = len(seq)
    lost = sorted(set(int(i) for i in lost))
    if any(not 0 <= i < n for i in lost):
        raise IndexError(f"lost frame indices must lie in [0, {n})")
    if len(lost) == n:
        raise ConcealmentError("every frame is lost; no donor picture exists")
    if len(refs.refs) != n:
        raise ValueError(f"reference structure covers {len(refs.refs)} frames, sequence has {n}")
    out = seq.luma.copy()
    chroma = None if seq.chroma is None else seq.chroma.copy()
    available = np.ones(n, dtype=bool)
    available[lost] = False

    def copy(dst, src):
        out[dst] = out[src]
        if chroma is not None:
            chroma[dst] = chroma[src]
        available[dst] = True

    pending = []
    for i in lost:
        r = refs.refs[i]
        if r is not None and available[r] and i - r <= refs.dpb_capacity:
            copy(i, r)
        else:
            pending.append(i)
    for i in pending:
        donors = np.flatnonzero(available)
        dist = np.abs(donors - i)
        copy(i, int(donors[np.argmin(dist)]))  # argmin takes the first, i.e. earlier, on ties
    return FrameSequence(out, seq.frame_rate, chroma)


def psnr_y(ref: FrameSequence, rec: FrameSequence, cap: float = PSNR_CAP_DB):
    """Per-frame luma PSNR (capped for identical frames) and their mean."""
    a = ref.luma if isinstance(ref, FrameSequence) else np.asarray(ref)
    b = rec.luma if isinstance(rec, FrameSequence) else np.asarray(rec)
    if a.shape != b.shape:
        raise FormatError(f"sequence shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = np.mean(diff.reshape(len(a), -1) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        per_frame = np.where(mse > 0, 10.0 * np.log10(255.0**2 / np.where(mse > 0, mse, 1.0)), cap)
    per_frame = np.minimum(per_frame, cap)
    return per_frame, float(np.mean(per_frame))


def write_psnr_csv(per_frame, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "psnr_y_db"])
        for i, v in enumerate(per_frame):
            writer.writerow([i, f"{v:.6f}"])


@dataclass
class LossToFrameMap:
    """(user_id, seq_no) of every packet -> index of the picture it carries."""

    mapping: dict[tuple[int, int], int] = field(default_factory=dict)

    def lost_frames(self, loss_map, user_id: int) -> set[int]:
        return {self.mapping[key] for key in loss_map if key[0] == user_id}
