"""H.264 Annex-B byte-stream framing."""

from __future__ import annotations

from dataclasses import dataclass

START_CODE = b"\x00\x00\x00\x01"


class AnnexBError(ValueError):
    pass


@dataclass(frozen=True)
class NalUnit:
    payload: bytes

    def __post_init__(self):
        if not self.payload:
            raise AnnexBError("NAL unit payload is empty")

    @property
    def nal_type(self) -> int:
        return self.payload[0] & 0x1F

    @property
    def nal_ref_idc(self) -> int:
        return (self.payload[0] >> 5) & 0x3


def _start_codes(data: bytes):
    """Yield ``(code_start, payload_start)`` for every start code."""
    i = data.find(b"\x00\x00\x01")
    while i >= 0:
        code_start = i - 1 if i > 0 and data[i - 1] == 0 else i
        yield code_start, i + 3
        i = data.find(b"\x00\x00\x01", i + 3)


def parse_annexb(data: bytes) -> list[NalUnit]:
    """Split an Annex-B stream on 3- and 4-byte start codes.

    Payloads are returned verbatim, emulation-prevention bytes included.
    Bytes before the first start code are ignored.
    """
    marks = list(_start_codes(data))
    if not marks:
        raise AnnexBError("no start code found")
    nals = []
    for n, (_, begin) in enumerate(marks):
        end = marks[n + 1][0] if n + 1 < len(marks) else len(data)
        payload = data[begin:end]
        if not payload:
            raise AnnexBError(f"zero-length NAL unit at byte offset {begin}")
        nals.append(NalUnit(payload))
    return nals


def render_annexb(nals) -> bytes:
    return b"".join(START_CODE + (n.payload if isinstance(n, NalUnit) else n) for n in nals)
