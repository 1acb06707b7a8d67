"""ISO base media file (MP4) muxer for a single H.264 video track.

The layout is the smallest one common players accept for a constant frame
rate stream without B-frames::

    ftyp
    moov
      mvhd
      trak
        tkhd
        mdia
          mdhd
          hdlr 'vide'
          minf
            vmhd
            dinf / dref / 'url '
            stbl
              stsd / avc1 / avcC
              stts stss? stsc stsz stco
    mdat

Every picture NAL unit becomes one sample, stored with a 4-byte big-endian
length prefix.  Parameter sets live only in ``avcC``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable

from .annexb import NalUnit
from .h264 import NAL_IDR, NAL_PPS, NAL_SPS

TIMESCALE_PER_FPS = 1000
PICTURE_TYPES = frozenset(range(1, 6))

CONTAINER_BOXES = frozenset({b"moov", b"trak", b"mdia", b"minf", b"dinf", b"stbl"})


class MuxError(ValueError):
    pass


def box(kind: bytes, *payload: bytes) -> bytes:
    body = b"".join(payload)
    return struct.pack(">I4s", 8 + len(body), kind) + body


def full_box(kind: bytes, version: int, flags: int, *payload: bytes) -> bytes:
    return box(kind, struct.pack(">I", (version << 24) | flags), *payload)


_UNITY_MATRIX = struct.pack(">9I", 0x10000, 0, 0, 0, 0x10000, 0, 0, 0, 0x40000000)


def _mvhd(timescale: int, duration: int) -> bytes:
    return full_box(
        b"mvhd", 0, 0,
        struct.pack(">IIII", 0, 0, timescale, duration),
        struct.pack(">IH", 0x00010000, 0x0100),  # rate 1.0, volume 1.0
        bytes(10),
        _UNITY_MATRIX,
        bytes(24),
        struct.pack(">I", 2),  # next_track_ID
    )


def _tkhd(duration: int, width: int, height: int) -> bytes:
    return full_box(
        b"tkhd", 0, 0x000003,  # enabled, in movie
        struct.pack(">IIIII", 0, 0, 1, 0, duration),
        bytes(8),
        struct.pack(">hhhH", 0, 0, 0, 0),  # layer, alternate group, volume, reserved
        _UNITY_MATRIX,
        struct.pack(">II", width << 16, height << 16),
    )


def _mdhd(timescale: int, duration: int) -> bytes:
    language = 0x55C4  # 'und'
    return full_box(b"mdhd", 0, 0, struct.pack(">IIIIHH", 0, 0, timescale, duration, language, 0))


def _hdlr() -> bytes:
    return full_box(b"hdlr", 0, 0, struct.pack(">I4s", 0, b"vide"), bytes(12), b"VideoHandler\x00")


def avcc(sps: bytes, pps: bytes) -> bytes:
    if len(sps) < 4:
        raise MuxError("SPS too short for an avcC record")
    return box(
        b"avcC",
        bytes([1, sps[1], sps[2], sps[3], 0xFC | 3, 0xE0 | 1]),
        struct.pack(">H", len(sps)), sps,
        bytes([1]),
        struct.pack(">H", len(pps)), pps,
    )


def _avc1(width: int, height: int, sps: bytes, pps: bytes) -> bytes:
    return box(
        b"avc1",
        bytes(6), struct.pack(">H", 1),  # data_reference_index
        bytes(16),
        struct.pack(">HH", width, height),
        struct.pack(">II", 0x00480000, 0x00480000),  # 72 dpi
        bytes(4),
        struct.pack(">H", 1),  # frame_count
        bytes(32),  # compressorname
        struct.pack(">Hh", 0x0018, -1),
        avcc(sps, pps),
    )


def _stbl(width, height, sps, pps, sizes, delta, sync, chunk_offset) -> bytes:
    n = len(sizes)
    parts = [
        full_box(b"stsd", 0, 0, struct.pack(">I", 1), _avc1(width, height, sps, pps)),
        full_box(b"stts", 0, 0, struct.pack(">III", 1, n, delta)),
    ]
    if len(sync) != n:
        parts.append(full_box(b"stss", 0, 0, struct.pack(">I", len(sync)), *(struct.pack(">I", s) for s in sync)))
    parts += [
        full_box(b"stsc", 0, 0, struct.pack(">IIII", 1, 1, n, 1)),
        full_box(b"stsz", 0, 0, struct.pack(">II", 0, n), *(struct.pack(">I", s) for s in sizes)),
        full_box(b"stco", 0, 0, struct.pack(">II", 1, chunk_offset)),
    ]
    return box(b"stbl", *parts)


def _as_nal(n) -> NalUnit:
    return n if isinstance(n, NalUnit) else NalUnit(bytes(n))


def mux_mp4(nals: Iterable[NalUnit | bytes], fps: int = 30, width: int = 1280, height: int = 720) -> bytes:
    nals = [_as_nal(n) for n in nals]
    if fps <= 0:
        raise MuxError("fps must be positive")
    sps = next((n.payload for n in nals if n.nal_type == NAL_SPS), None)
    pps = next((n.payload for n in nals if n.nal_type == NAL_PPS), None)
    if sps is None or pps is None:
        raise MuxError("missing parameter set: need one SPS (type 7) and one PPS (type 8)")
    frames = [n for n in nals if n.nal_type in PICTURE_TYPES]
    if not frames:
        raise MuxError("no picture NAL units to mux")

    timescale = fps * TIMESCALE_PER_FPS
    delta = TIMESCALE_PER_FPS
    duration = delta * len(frames)
    sizes = [4 + len(f.payload) for f in frames]
    sync = [i + 1 for i, f in enumerate(frames) if f.nal_type == NAL_IDR]

    ftyp = box(b"ftyp", b"isom", struct.pack(">I", 0x200), b"isomiso2avc1mp41")

    def moov(chunk_offset: int) -> bytes:
        stbl = _stbl(width, height, sps, pps, sizes, delta, sync, chunk_offset)
        dinf = box(b"dinf", full_box(b"dref", 0, 0, struct.pack(">I", 1), full_box(b"url ", 0, 1)))
        minf = box(b"minf", full_box(b"vmhd", 0, 1, bytes(8)), dinf, stbl)
        mdia = box(b"mdia", _mdhd(timescale, duration), _hdlr(), minf)
        trak = box(b"trak", _tkhd(duration, width, height), mdia)
        return box(b"moov", _mvhd(timescale, duration), trak)

    moov_len = len(moov(0))
    offset = len(ftyp) + moov_len + 8
    mdat = box(b"mdat", *(struct.pack(">I", len(f.payload)) + f.payload for f in frames))
    return ftyp + moov(offset) + mdat


@dataclass
class Box:
    kind: bytes
    offset: int
    size: int
    payload: bytes
    children: list["Box"]

    def find(self, path: str) -> "Box":
        node = self
        for part in path.split("/"):
            node = next(c for c in node.children if c.kind == part.encode())
        return node


def read_boxes(data: bytes, start: int = 0, end: int | None = None) -> list[Box]:
    """Parse a box sequence, descending into the plain container types."""
    end = len(data) if end is None else end
    boxes = []
    pos = start
    while pos < end:
        if end - pos < 8:
            raise MuxError(f"truncated box header at offset {pos}")
        size, kind = struct.unpack_from(">I4s", data, pos)
        if size < 8 or pos + size > end:
            raise MuxError(f"box {kind!r} at offset {pos} declares bad size {size}")
        payload = data[pos + 8:pos + size]
        children = read_boxes(data, pos + 8, pos + size) if kind in CONTAINER_BOXES else []
        boxes.append(Box(kind, pos, size, payload, children))
        pos += size
    return boxes


def extract_samples(data: bytes) -> list[bytes]:
    """Return the NAL payload of every sample of the first track."""
    top = {b.kind: b for b in read_boxes(data)}
    stbl = top[b"moov"].find("trak/mdia/minf/stbl")
    stsz = stbl.find("stsz").payload
    _, fixed, count = struct.unpack_from(">III", stsz)
    sizes = [fixed] * count if fixed else list(struct.unpack_from(f">{count}I", stsz, 12))
    stco = stbl.find("stco").payload
    (n_chunks,) = struct.unpack_from(">I", stco, 4)
    offsets = struct.unpack_from(f">{n_chunks}I", stco, 8)
    stsc = stbl.find("stsc").payload
    (n_entries,) = struct.unpack_from(">I", stsc, 4)
    entries = [struct.unpack_from(">III", stsc, 8 + 12 * i) for i in range(n_entries)]
    per_chunk = []
    for i, (first, spc, _) in enumerate(entries):
        last = entries[i + 1][0] - 1 if i + 1 < len(entries) else n_chunks
        per_chunk += [spc] * (last - first + 1)
    samples = []
    k = 0
    for off, spc in zip(offsets, per_chunk):
        for _ in range(spc):
            sample = data[off:off + sizes[k]]
            (nal_len,) = struct.unpack_from(">I", sample)
            samples.append(sample[4:4 + nal_len])
            off += sizes[k]
            k += 1
    return samples


def avcc_parameter_sets(data: bytes) -> tuple[list[bytes], list[bytes]]:
    """SPS and PPS lists stored in the track's avcC record."""
    top = {b.kind: b for b in read_boxes(data)}
    stsd = top[b"moov"].find("trak/mdia/minf/stbl/stsd").payload
    entry = read_boxes(stsd, 8)[0]
    rec = read_boxes(entry.payload, 78)[0]
    if rec.kind != b"avcC":
        raise MuxError("sample entry has no avcC record")
    p = rec.payload
    pos = 6
    spss = []
    for _ in range(p[5] & 0x1F):
        (n,) = struct.unpack_from(">H", p, pos)
        spss.append(p[pos + 2:pos + 2 + n])
        pos += 2 + n
    ppss = []
    count = p[pos]
    pos += 1
    for _ in range(count):
        (n,) = struct.unpack_from(">H", p, pos)
        ppss.append(p[pos + 2:pos + 2 + n])
        pos += 2 + n
    return spss, ppss

