"""SMTP submission client.

The dialogue is fixed: EHLO, STARTTLS (optional), EHLO again, AUTH LOGIN,
MAIL FROM, RCPT TO, DATA, QUIT.  Every line sent and received is kept in a
transcript.  Any unexpected reply raises an :class:`SmtpError` naming the
verb that failed.
"""

from __future__ import annotations

import socket
import ssl
from dataclasses import dataclass, field

from .mime import RenderedMime, base64_encode

DEFAULT_HOST = "smtp.gmail.com"
DEFAULT_PORT = 587


class SmtpError(Exception):
    def __init__(self, verb: str, code: int | None, text: str):
        self.verb = verb
        self.code = code
        self.text = text
        where = f"{verb} failed" if code is None else f"{verb} failed with {code}"
        super().__init__(f"{where}: {text}")


class SmtpConnectionError(SmtpError):
    pass


class SmtpAuthError(SmtpError):
    pass


@dataclass(frozen=True)
class SmtpEndpoint:
    """Where and how to submit mail.

    ``wrap_tls=False`` still sends STARTTLS and checks the 220 reply but keeps
    talking in plain text afterwards, which lets tests run against a mock
    server without certificates.
    """

    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    use_starttls: bool = True
    credentials: tuple[str, str] | None = None
    wrap_tls: bool = True
    ssl_context: ssl.SSLContext | None = field(default=None, compare=False)
    timeout: float = 30.0
    helo_name: str = "localhost"

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")


@dataclass
class SmtpTranscript:
    lines: list[tuple[str, str]] = field(default_factory=list)

    def client(self, text: str) -> None:
        self.lines.append(("C", text))

    def server(self, text: str) -> None:
        self.lines.append(("S", text))

    def commands(self) -> list[str]:
        return [t for d, t in self.lines if d == "C"]

    def replies(self) -> list[str]:
        return [t for d, t in self.lines if d == "S"]

    def render(self, redact: bool = False) -> str:
        out = []
        secret_next = 0
        for d, t in self.lines:
            if d == "C" and secret_next:
                t = "********"
                secret_next -= 1
            elif redact and d == "C" and t.upper().startswith("AUTH LOGIN"):
                secret_next = 2
            out.append(f"{d}: {t}")
        return "\n".join(out) + "\n"


def dot_stuff(data: bytes) -> bytes:
    """Normalize line ends to CRLF and double every leading dot."""
    text = data.replace(b"\r\n", b"\n").replace(b"\r", b"\n")
    lines = text.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return b"".join((b"." + ln if ln.startswith(b".") else ln) + b"\r\n" for ln in lines)


class _Session:
    def __init__(self, endpoint: SmtpEndpoint, transcript: SmtpTranscript):
        self.endpoint = endpoint
        self.t = transcript
        try:
            self.sock = socket.create_connection((endpoint.host, endpoint.port), timeout=endpoint.timeout)
        except OSError as exc:
            raise SmtpConnectionError("CONNECT", None, f"{endpoint.host}:{endpoint.port}: {exc}") from None
        self.reader = self.sock.makefile("rb")

    def close(self) -> None:
        try:
            self.reader.close()
            self.sock.close()
        except OSError:
            pass

    def reply(self, verb: str) -> tuple[int, list[str]]:
        lines = []
        while True:
            try:
                raw = self.reader.readline(4096)
            except OSError as exc:
                raise SmtpConnectionError(verb, None, str(exc)) from None
            if not raw:
                raise SmtpConnectionError(verb, None, "connection closed by server")
            line = raw.decode("utf-8", "replace").rstrip("\r\n")
            self.t.server(line)
            if len(line) < 3 or not line[:3].isdigit():
                raise SmtpError(verb, None, f"malformed reply {line!r}")
            lines.append(line[4:])
            if len(line) == 3 or line[3] != "-":
                return int(line[:3]), lines

    def send_line(self, text: str, record: str | None = None) -> None:
        self.t.client(text if record is None else record)
        self._send((text + "\r\n").encode("utf-8"))

    def _send(self, data: bytes) -> None:
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise SmtpConnectionError("SEND", None, str(exc)) from None

    def command(self, verb: str, text: str, expect: tuple[int, ...], error=SmtpError) -> list[str]:
        self.send_line(text)
        code, lines = self.reply(verb)
        if code not in expect:
            raise error(verb, code, " ".join(lines))
        return lines

    def starttls(self) -> None:
        self.command("STARTTLS", "STARTTLS", (220,))
        if not self.endpoint.wrap_tls:
            return
        ctx = self.endpoint.ssl_context or ssl.create_default_context()
        try:
            self.sock = ctx.wrap_socket(self.sock, server_hostname=self.endpoint.host)
        except (ssl.SSLError, OSError) as exc:
            raise SmtpConnectionError("STARTTLS", None, f"TLS handshake failed: {exc}") from None
        self.reader = self.sock.makefile("rb")

    def data(self, payload: bytes) -> None:
        self.command("DATA", "DATA", (354,))
        stuffed = dot_stuff(payload)
        n_lines = stuffed.count(b"\r\n")
        self.t.client(f"<message data, {n_lines} lines>")
        self.t.client(".")
        self._send(stuffed + b".\r\n")
        code, lines = self.reply("DATA")
        if code != 250:
            raise SmtpError("DATA", code, " ".join(lines))


def send(endpoint: SmtpEndpoint, rendered: RenderedMime) -> SmtpTranscript:
    transcript = SmtpTranscript()
    s = _Session(endpoint, transcript)
    try:
        code, lines = s.reply("CONNECT")
        if code != 220:
            raise SmtpConnectionError("CONNECT", code, " ".join(lines))
        s.command("EHLO", f"EHLO {endpoint.helo_name}", (250,))
        if endpoint.use_starttls:
            s.starttls()
            s.command("EHLO", f"EHLO {endpoint.helo_name}", (250,))
        if endpoint.credentials is not None:
            user, password = endpoint.credentials
            s.command("AUTH", "AUTH LOGIN", (334,), SmtpAuthError)
            s.command("AUTH", base64_encode(user.encode("utf-8")), (334,), SmtpAuthError)
            s.command("AUTH", base64_encode(password.encode("utf-8")), (235,), SmtpAuthError)
        s.command("MAIL", f"MAIL FROM:<{rendered.sender}>", (250,))
        for rcpt in rendered.recipients:
            s.command("RCPT", f"RCPT TO:<{rcpt}>", (250, 251))
        s.data(rendered.data)
        s.command("QUIT", "QUIT", (221,))
    finally:
        s.close()
    return transcript
