"""multipart/mixed message construction.

Rendering is deterministic for a given boundary seed, so golden tests can
compare bytes.  Every line ends in CRLF, base64 lines are 76 characters and
no line exceeds the 998 character limit.  Parsing back goes through the
standard library's ``email`` package, which keeps the check independent of
the renderer.
"""

from __future__ import annotations

import base64
import binascii
import email
import email.policy
import random
import re
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote

DEFAULT_BODY = "This is an email from the motion detector app."
DEFAULT_SUBJECT = "Motion Detected"
DEFAULT_ATTACHMENT_NAME = "MotionDetected.png"
BASE64_LINE = 76
MAX_LINE = 998

_CONTENT_TYPE = re.compile(r"^[A-Za-z0-9!#$&^_.+-]+/[A-Za-z0-9!#$&^_.+-]+$")


class MimeError(ValueError):
    pass


@dataclass(frozen=True)
class Attachment:
    filename: str
    data: bytes
    content_type: str = "application/octet-stream"


@dataclass(frozen=True)
class EmailMessage:
    sender: str
    to: str
    subject: str
    body: str = DEFAULT_BODY
    attachments: tuple[Attachment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.sender or not self.to:
            raise MimeError("From and To must be non-empty")
        object.__setattr__(self, "attachments", tuple(self.attachments))


@dataclass(frozen=True)
class RenderedMime:
    data: bytes
    sender: str
    recipients: tuple[str, ...]
    boundary: str


def build_message(cfg, subject: str | None = None, attachment: Attachment | tuple | None = None) -> EmailMessage:
    """Message from the configured sender to the configured recipient.

    ``attachment`` is an :class:`Attachment`, a ``(filename, data)`` pair or a
    path to read.
    """
    if isinstance(attachment, (str, Path)):
        path = Path(attachment)
        attachment = Attachment(path.name, path.read_bytes())
    elif isinstance(attachment, tuple):
        attachment = Attachment(*attachment)
    if attachment is None or not attachment.data:
        raise MimeError("attachment data is empty")
    return EmailMessage(
        sender=cfg.email_sender,
        to=cfg.email_recipient,
        subject=DEFAULT_SUBJECT if subject is None else subject,
        body=DEFAULT_BODY,
        attachments=(attachment,),
    )


def base64_encode(data: bytes, line_length: int | None = None) -> str:
    text = base64.b64encode(data).decode("ascii")
    if not line_length:
        return text
    return "\r\n".join(text[i:i + line_length] for i in range(0, len(text), line_length))


def base64_decode(text: str) -> bytes:
    compact = text.replace("\r", "").replace("\n", "")
    try:
        return base64.b64decode(compact, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise MimeError(f"invalid base64: {exc}") from None


def _guard(name: str, value: str) -> None:
    if "\r" in value or "\n" in value:
        raise MimeError(f"header injection rejected: {name} contains CR or LF")


def _ascii(value: str) -> bool:
    return value.isascii()


def _encoded_words(value: str) -> str:
    """RFC 2047 base64 words, folded so no header line exceeds 76 characters."""
    words, chunk = [], ""
    for ch in value:
        if len((chunk + ch).encode("utf-8")) > 39:
            words.append(chunk)
            chunk = ""
        chunk += ch
    if chunk:
        words.append(chunk)
    return "\r\n ".join(f"=?utf-8?b?{base64.b64encode(w.encode('utf-8')).decode('ascii')}?=" for w in words)


def _header(name: str, value: str) -> str:
    _guard(name, value)
    if _ascii(value) and len(name) + 2 + len(value) <= 78 and value == value.strip():
        return f"{name}: {value}"
    return f"{name}: {_encoded_words(value)}"


def _address(name: str, value: str) -> str:
    _guard(name, value)
    if not _ascii(value) or len(value) > MAX_LINE - len(name) - 2:
        raise MimeError(f"{name} address must be ASCII and shorter than a header line")
    return f"{name}: {value}"


def _disposition(filename: str) -> str:
    _guard("filename", filename)
    if _ascii(filename) and len(filename) < 200:
        quoted = filename.replace("\\", "\\\\").replace('"', '\\"')
        return f'Content-Disposition: attachment; filename="{quoted}"'
    return f"Content-Disposition: attachment;\r\n filename*=utf-8''{quote(filename, safe='')}"


def _text_part(body: str) -> tuple[list[str], str]:
    lines = body.split("\n")
    if _ascii(body) and "\r" not in body and all(len(line) <= MAX_LINE for line in lines):
        return ['Content-Type: text/plain; charset="us-ascii"', "Content-Transfer-Encoding: 7bit"], "\r\n".join(lines)
    return (
        ['Content-Type: text/plain; charset="utf-8"', "Content-Transfer-Encoding: base64"],
        base64_encode(body.encode("utf-8"), BASE64_LINE),
    )


def _draw_boundary(rng) -> str:
    return "===============" + "".join(str(rng.randrange(10)) for _ in range(19)) + "=="


def render_mime(msg: EmailMessage, boundary_seed: int | None = 0) -> RenderedMime:
    """Serialize ``msg``; ``boundary_seed=None`` draws a random boundary."""
    head = [
        _address("From", msg.sender),
        _address("To", msg.to),
        _header("Subject", msg.subject),
        "MIME-Version: 1.0",
    ]
    parts = []
    text_headers, text = _text_part(msg.body)
    parts.append((text_headers, text))
    for att in msg.attachments:
        _guard("content type", att.content_type)
        if not _CONTENT_TYPE.match(att.content_type):
            raise MimeError(f"bad content type {att.content_type!r}")
        headers = [
            f"Content-Type: {att.content_type}",
            "Content-Transfer-Encoding: base64",
            _disposition(att.filename),
        ]
        parts.append((headers, base64_encode(att.data, BASE64_LINE)))

    rng = random.Random(boundary_seed) if boundary_seed is not None else secrets.SystemRandom()
    boundary = _draw_boundary(rng)
    while any(boundary in content or boundary in "\r\n".join(h) for h, content in parts):
        boundary = _draw_boundary(rng)

    out = head + [f'Content-Type: multipart/mixed;\r\n boundary="{boundary}"', ""]
    for headers, content in parts:
        out += [f"--{boundary}", *headers, "", content]
    out += [f"--{boundary}--", ""]
    data = "\r\n".join(out).encode("ascii")
    return RenderedMime(data, msg.sender, (msg.to,), boundary)


def parse_mime(data: bytes) -> EmailMessage:
    """Recover an :class:`EmailMessage` from rendered bytes."""
    parsed = email.message_from_bytes(data, policy=email.policy.default)
    if not parsed.is_multipart():
        raise MimeError("not a multipart message")
    body = None
    attachments = []
    for part in parsed.iter_parts():
        if part.get_content_disposition() == "attachment":
            attachments.append(
                Attachment(part.get_filename(), part.get_payload(decode=True), part.get_content_type())
            )
        elif body is None and part.get_content_type() == "text/plain":
            raw = part.get_payload(decode=True)
            body = raw.decode(part.get_content_charset() or "us-ascii")
            if part["Content-Transfer-Encoding"] != "base64":
                body = body.replace("\r\n", "\n")
    return EmailMessage(
        sender=str(parsed["From"]),
        to=str(parsed["To"]),
        subject=str(parsed["Subject"]),
        body=body or "",
        attachments=tuple(attachments),
    )
