"""Raw .h264 to .mp4 conversion, natively or through an external tool."""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from .annexb import AnnexBError, parse_annexb
from .h264 import NAL_SPS, sps_dimensions
from .mp4 import MuxError, mux_mp4

DEFAULT_EXTERNAL_COMMAND = "MP4Box -add {in} {out}"
DEFAULT_MP4_NAME = "MotionDetectionConverted.mp4"


class ConversionError(Exception):
    pass


def external_command(template: str, in_path: str | Path, out_path: str | Path) -> list[str]:
    return [
        part.replace("{in}", str(in_path)).replace("{out}", str(out_path))
        for part in shlex.split(template)
    ]


def convert_file(
    in_path: str | Path,
    out_path: str | Path = DEFAULT_MP4_NAME,
    mode: str = "native",
    *,
    fps: int = 30,
    width: int | None = None,
    height: int | None = None,
    command: str = DEFAULT_EXTERNAL_COMMAND,
) -> Path:
    in_path, out_path = Path(in_path), Path(out_path)
    if mode == "external":
        argv = external_command(command, in_path, out_path)
        line = shlex.join(argv)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except FileNotFoundError:
            raise ConversionError(f"converter not found: {line}") from None
        if proc.returncode != 0:
            raise ConversionError(f"converter failed with exit status {proc.returncode}: {line}\n{proc.stderr}")
        return out_path
    if mode != "native":
        raise ConversionError(f"unknown conversion mode {mode!r}")
    try:
        nals = parse_annexb(in_path.read_bytes())
        if width is None or height is None:
            sps = next((n.payload for n in nals if n.nal_type == NAL_SPS), None)
            if sps is None:
                raise MuxError("missing parameter set: no SPS (type 7) in stream")
            width, height = sps_dimensions(sps)
        data = mux_mp4(nals, fps=fps, width=width, height=height)
    except OSError as exc:
        raise ConversionError(f"cannot read {in_path}: {exc.strerror}") from None
    except (AnnexBError, MuxError, ValueError) as exc:
        raise ConversionError(f"{in_path}: {exc}") from None
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(data)
    except OSError as exc:
        raise ConversionError(f"cannot write {out_path}: {exc.strerror}") from None
    return out_path
