import io
import struct
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motionpi.media import h264
from motionpi.media.annexb import AnnexBError, NalUnit, parse_annexb, render_annexb
from motionpi.media.camera import (
    CameraError,
    FrameSpec,
    capture_still,
    flip_rows,
    record_clip,
    render_frame,
    still_bytes,
)
from motionpi.media.convert import ConversionError, convert_file, external_command
from motionpi.media.mp4 import MuxError, avcc_parameter_sets, extract_samples, mux_mp4

CONTAINERS = {b"moov", b"trak", b"mdia", b"minf", b"dinf", b"stbl"}


def walk(data, start=0, end=None, depth=0, out=None):
    """Independent box walker: (depth, type, size) for every box; asserts the sizes tile the range."""
    out = [] if out is None else out
    end = len(data) if end is None else end
    pos = start
    while pos < end:
        size, kind = struct.unpack_from(">I4s", data, pos)
        assert size >= 8 and pos + size <= end, (kind, size)
        out.append((depth, kind, size))
        if kind in CONTAINERS:
            walk(data, pos + 8, pos + size, depth + 1, out)
        elif kind == b"stsd":
            walk(data, pos + 16, pos + size, depth + 1, out)
        elif kind == b"avc1":
            walk(data, pos + 8 + 78, pos + size, depth + 1, out)
        elif kind == b"dref":
            walk(data, pos + 16, pos + size, depth + 1, out)
        pos += size
    assert pos == end
    return out


def test_still_dimensions_with_pillow(tmp_path):
    PIL = pytest.importorskip("PIL.Image")
    art = capture_still(FrameSpec(), 0.0, tmp_path / "MotionDetected.png")
    img = PIL.open(io.BytesIO(art.path.read_bytes()))
    assert img.size == (1280, 720)
    assert img.mode == "RGB"
    # the decoder sees exactly the flipped frame
    assert np.array_equal(np.asarray(img), flip_rows(render_frame(FrameSpec(), 0.0)))


def test_still_is_pure_and_time_dependent():
    spec = FrameSpec(64, 48)
    assert still_bytes(spec, 1.25) == still_bytes(spec, 1.25)
    assert still_bytes(spec, 1.25) != still_bytes(spec, 2.5)


def test_vflip_involution():
    img = render_frame(FrameSpec(32, 16), 3.0)
    assert np.array_equal(flip_rows(flip_rows(img)), img)
    spec_flip, spec_plain = FrameSpec(32, 16, vflip=True), FrameSpec(32, 16, vflip=False)
    assert still_bytes(spec_flip, 3.0) != still_bytes(spec_plain, 3.0)


def test_bad_frame_and_path(tmp_path):
    with pytest.raises((CameraError, ValueError)):
        FrameSpec(0, 720)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(CameraError):
        capture_still(FrameSpec(16, 16), 0, blocker / "sub" / "x.png")


@pytest.mark.parametrize("duration,frames", [(5.0, 150), (1 / 30, 1), (0.5, 15)])
def test_clip_nal_counts(tmp_path, duration, frames):
    clip = record_clip(FrameSpec(), duration, tmp_path / "c.h264")
    nals = parse_annexb(clip.path.read_bytes())
    assert [n.nal_type for n in nals[:2]] == [7, 8]
    assert len(nals) == 2 + frames
    assert all(n.nal_type in (1, 5) for n in nals[2:])
    assert nals[2].nal_type == 5


def test_clip_rejects_zero_duration(tmp_path):
    with pytest.raises(CameraError):
        record_clip(FrameSpec(), 0, tmp_path / "c.h264")


def test_sps_dimensions_round_trip():
    for w, h in [(1280, 720), (100, 50), (16, 16), (1920, 1080)]:
        nal = parse_annexb(render_annexb([h264.sps(w, h)]))[0]
        assert h264.sps_dimensions(nal.payload) == (w, h)


def test_emulation_prevention():
    raw = b"\x00\x00\x01\x00\x00\x00\x00\x00\x03"
    escaped = h264.add_emulation_prevention(raw)
    assert b"\x00\x00\x00" not in escaped and b"\x00\x00\x01" not in escaped
    assert h264.strip_emulation_prevention(escaped) == raw


def test_exp_golomb_against_bit_strings():
    w = h264.BitWriter()
    for v in (0, 1, 2, 3, 7):
        w.ue(v)
    w.se(-1)
    w.rbsp_trailing()
    # ue: 1, 010, 011, 00100, 0001000; se(-1) = ue(2) = 011; then stop bit
    bits = "1" + "010" + "011" + "00100" + "0001000" + "011" + "1"
    bits += "0" * (-len(bits) % 8)
    assert w.getvalue() == int(bits, 2).to_bytes(len(bits) // 8, "big")


def test_annexb_parsing():
    assert [n.nal_type for n in parse_annexb(b"\x00\x00\x00\x01\x67\x42")] == [7]
    mixed = b"\x00\x00\x01\x68\xce" + b"\x00\x00\x00\x01\x65\x88\x80"
    assert [n.payload for n in parse_annexb(mixed)] == [b"\x68\xce", b"\x65\x88\x80"]
    for bad in (b"", b"\x01\x02\x03", b"\x00\x00\x01\x00\x00\x01\x67"):
        with pytest.raises(AnnexBError):
            parse_annexb(bad)


nal_payloads = st.binary(min_size=1, max_size=40).map(
    lambda b: bytes([b[0] & 0x7F or 1]) + h264.add_emulation_prevention(b[1:]) if len(b) > 1 else bytes([b[0] & 0x7F or 1])
).filter(lambda p: not p.endswith(b"\x00"))


@given(st.lists(nal_payloads, min_size=1, max_size=8))
def test_annexb_render_parse_identity(payloads):
    assert [n.payload for n in parse_annexb(render_annexb(payloads))] == payloads


def test_mp4_structure(tmp_path):
    clip = record_clip(FrameSpec(), 5.0, tmp_path / "motiondetection.h264")
    out = convert_file(clip.path, tmp_path / "MotionDetectionConverted.mp4")
    data = out.read_bytes()
    boxes = walk(data)
    top = [kind for depth, kind, _ in boxes if depth == 0]
    assert top == [b"ftyp", b"moov", b"mdat"]
    assert sum(size for depth, _, size in boxes if depth == 0) == len(data)
    kinds = {kind for _, kind, _ in boxes}
    for needed in (b"mvhd", b"tkhd", b"mdhd", b"hdlr", b"avc1", b"avcC", b"stts", b"stsc", b"stsz", b"stco"):
        assert needed in kinds
    nals = parse_annexb(clip.path.read_bytes())
    sps, pps = avcc_parameter_sets(data)
    assert sps == [nals[0].payload] and pps == [nals[1].payload]
    assert extract_samples(data) == [n.payload for n in nals[2:]]


def test_mp4_timing():
    nals = h264.clip_nals(32, 32, 10, gop=5)
    data = mux_mp4(nals, fps=25, width=32, height=32)
    i = data.index(b"mdhd")
    _, _, _, timescale, duration = struct.unpack_from(">IIIII", data, i + 4)
    assert timescale == 25_000 and duration == 10 * 1000
    i = data.index(b"stts")
    assert struct.unpack_from(">IIII", data, i + 4) == (0, 1, 10, 1000)


def test_mp4_length_prefix():
    nals = h264.clip_nals(16, 16, 1)
    data = mux_mp4(nals, width=16, height=16)
    mdat = data.index(b"mdat")
    (n,) = struct.unpack_from(">I", data, mdat + 4)
    assert n == len(nals[2]) and data[mdat + 8:mdat + 8 + n] == nals[2]


def test_mux_errors():
    sps, pps, idr = h264.clip_nals(16, 16, 1)
    with pytest.raises(MuxError, match="parameter set"):
        mux_mp4([pps, idr])
    with pytest.raises(MuxError, match="parameter set"):
        mux_mp4([sps, idr])
    with pytest.raises(MuxError):
        mux_mp4([sps, pps])
    assert NalUnit(sps).nal_type == 7


def test_pyav_decodes_fixture(tmp_path):
    av = pytest.importorskip("av")
    clip = record_clip(FrameSpec(), 1.0, tmp_path / "c.h264")
    mp4 = convert_file(clip.path, tmp_path / "c.mp4")
    with av.open(str(mp4)) as container:
        stream = container.streams.video[0]
        assert (stream.codec_context.width, stream.codec_context.height) == (1280, 720)
        frames = list(container.decode(stream))
    assert len(frames) == 30
    with av.open(str(clip.path), format="h264") as raw:
        assert len(list(raw.decode(video=0))) == 30


def test_external_mode(tmp_path):
    clip = record_clip(FrameSpec(16, 16), 0.1, tmp_path / "c.h264")
    assert external_command("MP4Box -add {in} {out}", "a.h264", "b.mp4") == ["MP4Box", "-add", "a.h264", "b.mp4"]
    with pytest.raises(ConversionError, match="definitely-not-a-tool"):
        convert_file(clip.path, tmp_path / "x.mp4", "external", command="definitely-not-a-tool {in} {out}")
    copy = f"{sys.executable} -c \"import shutil,sys; shutil.copy(sys.argv[1], sys.argv[2])\" {{in}} {{out}}"
    out = convert_file(clip.path, tmp_path / "x.mp4", "external", command=copy)
    assert out.read_bytes() == clip.path.read_bytes()
    failing = f"{sys.executable} -c \"raise SystemExit(3)\" {{in}} {{out}}"
    with pytest.raises(ConversionError, match="exit status 3"):
        convert_file(clip.path, tmp_path / "y.mp4", "external", command=failing)


def test_convert_errors(tmp_path):
    bad = tmp_path / "bad.h264"
    bad.write_bytes(b"not a stream")
    with pytest.raises(ConversionError):
        convert_file(bad, tmp_path / "o.mp4")
    with pytest.raises(ConversionError, match="cannot read"):
        convert_file(tmp_path / "missing.h264", tmp_path / "o.mp4")


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 40), st.integers(1, 12), st.integers(1, 4).map(lambda k: 16 * k))
def test_remux_lossless(n_frames, gop, side):
    nals = h264.clip_nals(side, side, n_frames, gop=gop)
    data = mux_mp4(nals, width=side, height=side)
    assert extract_samples(data) == nals[2:]
    assert sum(size for depth, _, size in walk(data) if depth == 0) == len(data)
