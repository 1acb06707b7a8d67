"""Simulated Pi camera.

Stills are a synthetic test pattern written as PNG: a colour gradient with
a 16x16 grid of blocks in the top-left corner whose pattern encodes the
capture time in milliseconds.  Clips are Annex-B H.264 byte streams from the
fixture encoder in :mod:`motionpi.media.h264`.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import h264
from .annexb import render_annexb

DEFAULT_STILL_NAME = "MotionDetected.png"
DEFAULT_CLIP_NAME = "motiondetection.h264"
DEFAULT_FPS = 30

_BLOCK = 8
_GRID = 16


class CameraError(Exception):
    pass


@dataclass(frozen=True)
class FrameSpec:
    width: int = 1280
    height: int = 720
    vflip: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise CameraError(f"frame dimensions must be positive, got {self.width}x{self.height}")


@dataclass(frozen=True)
class ImageArtifact:
    path: Path
    width: int
    height: int
    data: bytes


@dataclass(frozen=True)
class AnnexBFile:
    path: Path
    n_frames: int
    fps: int
    data: bytes


def render_frame(spec: FrameSpec, t: float) -> np.ndarray:
    """The sensor image at time ``t`` as an H x W x 3 uint8 array, before any flip."""
    w, h = spec.width, spec.height
    xs = np.arange(w, dtype=np.uint32) * 255 // max(w - 1, 1)
    ys = np.arange(h, dtype=np.uint32) * 255 // max(h - 1, 1)
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:, :, 0] = xs[None, :]
    img[:, :, 1] = ys[:, None]
    img[:, :, 2] = 128
    stamp = int(round(t * 1000)) & ((1 << (_GRID * _GRID)) - 1)
    for i in range(_GRID * _GRID):
        r, c = divmod(i, _GRID)
        y0, x0 = r * _BLOCK, c * _BLOCK
        if y0 >= h or x0 >= w:
            continue
        img[y0:y0 + _BLOCK, x0:x0 + _BLOCK] = 255 if (stamp >> i) & 1 else 0
    return img


def flip_rows(img: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(img[::-1])


def _chunk(kind: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + kind + data + struct.pack(">I", zlib.crc32(kind + data))


def encode_png(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    raw = np.zeros((h, 1 + 3 * w), dtype=np.uint8)
    raw[:, 1:] = img.reshape(h, 3 * w)
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(raw.tobytes(), 6))
        + _chunk(b"IEND", b"")
    )


def still_bytes(spec: FrameSpec, t: float) -> bytes:
    img = render_frame(spec, t)
    return encode_png(flip_rows(img) if spec.vflip else img)


def _write(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise CameraError(f"cannot write {path}: {exc.strerror}") from None


def capture_still(spec: FrameSpec, t: float, path: str | Path = DEFAULT_STILL_NAME) -> ImageArtifact:
    path = Path(path)
    data = still_bytes(spec, t)
    _write(path, data)
    return ImageArtifact(path, spec.width, spec.height, data)


def frame_count(duration_s: float, fps: int) -> int:
    if not duration_s > 0:
        raise CameraError(f"recording duration must be positive, got {duration_s}")
    if fps <= 0:
        raise CameraError("fps must be positive")
    return max(1, math.ceil(duration_s * fps - 1e-9))


def record_clip(
    spec: FrameSpec,
    duration_s: float = 5.0,
    path: str | Path = DEFAULT_CLIP_NAME,
    fps: int = DEFAULT_FPS,
) -> AnnexBFile:
    n = frame_count(duration_s, fps)
    try:
        nals = h264.clip_nals(spec.width, spec.height, n, gop=fps)
    except ValueError as exc:
        raise CameraError(str(exc)) from None
    data = render_annexb(nals)
    path = Path(path)
    _write(path, data)
    return AnnexBFile(path, n, fps, data)
