"""In-process SMTP server for tests and dry runs.

Accepts EHLO/HELO, STARTTLS, AUTH LOGIN, MAIL, RCPT, DATA, RSET, NOOP and
QUIT.  Delivered messages are kept in memory with the dot-stuffing undone.
Any verb can be scripted to fail with a given reply.
"""

from __future__ import annotations

import base64
import binascii
import socketserver
import ssl
import threading
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ReceivedMessage:
    mail_from: str
    rcpt_to: tuple[str, ...]
    data: bytes
    wire: bytes


@dataclass
class MockSmtpServer:
    """Threaded SMTP server on localhost.

    ``tls_context`` is a server-side context used on STARTTLS; without one the
    server answers 220 and carries on in plain text.  ``reject`` maps a verb
    (``"AUTH"``, ``"MAIL"``, ...) to the ``(code, text)`` reply it gets.
    """

    credentials: dict[str, str] | None = None
    tls_context: ssl.SSLContext | None = None
    reject: dict[str, tuple[int, str]] = field(default_factory=dict)
    host: str = "127.0.0.1"
    port: int = 0

    def __post_init__(self):
        self.messages: list[ReceivedMessage] = []
        self.sessions: list[list[str]] = []
        self._lock = threading.Lock()
        self._server: socketserver.ThreadingTCPServer | None = None
        self._thread: threading.Thread | None = None

    def start(self) -> "MockSmtpServer":
        owner = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                _Conversation(owner, self.request).run()

        socketserver.ThreadingTCPServer.allow_reuse_address = True
        self._server = socketserver.ThreadingTCPServer((self.host, self.port), Handler)
        self._server.daemon_threads = True
        self.port = self._server.server_address[1]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self) -> "MockSmtpServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _deliver(self, msg: ReceivedMessage, log: list[str]) -> None:
        with self._lock:
            self.messages.append(msg)
            self.sessions.append(log)


class _Conversation:
    def __init__(self, server: MockSmtpServer, sock):
        self.server = server
        self.sock = sock
        self.reader = sock.makefile("rb")
        self.log: list[str] = []
        self.reset()
        self.authed = server.credentials is None

    def reset(self) -> None:
        self.mail_from: str | None = None
        self.rcpt: list[str] = []

    def say(self, code: int, text: str, more: list[str] = ()) -> None:
        lines = [f"{code}-{m}" for m in more] + [f"{code} {text}"]
        self.log += [f"S: {ln}" for ln in lines]
        self.sock.sendall("".join(ln + "\r\n" for ln in lines).encode())

    def line(self) -> str | None:
        raw = self.reader.readline(65536)
        if not raw:
            return None
        text = raw.decode("utf-8", "replace").rstrip("\r\n")
        self.log.append(f"C: {text}")
        return text

    def scripted(self, verb: str) -> bool:
        if verb in self.server.reject:
            code, text = self.server.reject[verb]
            self.say(code, text)
            return True
        return False

    def run(self) -> None:
        try:
            self._loop()
        except (OSError, ssl.SSLError):
            pass

    def _loop(self) -> None:
        self.say(220, "mock.smtp ESMTP ready")
        while True:
            text = self.line()
            if text is None:
                return
            verb = text.split(" ", 1)[0].upper()
            if verb in ("EHLO", "HELO"):
                if not self.scripted(verb):
                    self.say(250, "AUTH LOGIN", ["mock.smtp", "STARTTLS", "8BITMIME"])
            elif verb == "STARTTLS":
                if self.scripted(verb):
                    continue
                self.say(220, "ready to start TLS")
                if self.server.tls_context is not None:
                    self.sock = self.server.tls_context.wrap_socket(self.sock, server_side=True)
                    self.reader = self.sock.makefile("rb")
            elif verb == "AUTH":
                self._auth(text)
            elif verb == "MAIL":
                if self.scripted(verb):
                    continue
                if not self.authed:
                    self.say(530, "authentication required")
                    continue
                self.reset()
                self.mail_from = _angle(text)
                self.say(250, "sender ok")
            elif verb == "RCPT":
                if self.scripted(verb):
                    continue
                if self.mail_from is None:
                    self.say(503, "need MAIL first")
                    continue
                self.rcpt.append(_angle(text))
                self.say(250, "recipient ok")
            elif verb == "DATA":
                self._data()
            elif verb == "RSET":
                self.reset()
                self.say(250, "reset")
            elif verb == "NOOP":
                self.say(250, "ok")
            elif verb == "QUIT":
                self.say(221, "bye")
                return
            else:
                self.say(502, "command not implemented")

    def _auth(self, text: str) -> None:
        if self.scripted("AUTH"):
            return
        if text.upper() != "AUTH LOGIN":
            self.say(504, "only AUTH LOGIN is supported")
            return
        self.say(334, "VXNlcm5hbWU6")
        user = self.line()
        self.say(334, "UGFzc3dvcmQ6")
        password = self.line()
        try:
            user = base64.b64decode(user or "", validate=True).decode()
            password = base64.b64decode(password or "", validate=True).decode()
        except (binascii.Error, UnicodeDecodeError):
            self.say(501, "cannot decode credentials")
            return
        creds = self.server.credentials
        if creds is not None and creds.get(user) != password:
            self.say(535, "authentication failed")
            return
        self.authed = True
        self.say(235, "authentication succeeded")

    def _data(self) -> None:
        if self.scripted("DATA"):
            return
        if not self.rcpt:
            self.say(503, "need RCPT first")
            return
        self.say(354, "end data with <CR><LF>.<CR><LF>")
        wire = bytearray()
        body = bytearray()
        while True:
            raw = self.reader.readline(65536)
            if not raw:
                return
            wire += raw
            if raw == b".\r\n":
                break
            body += raw[1:] if raw.startswith(b".") else raw
        self.log.append("C: <message data>")
        self.server._deliver(
            ReceivedMessage(self.mail_from, tuple(self.rcpt), bytes(body), bytes(wire)), self.log
        )
        self.say(250, "queued")
        self.reset()


def _angle(text: str) -> str:
    start, end = text.find("<"), text.rfind(">")
    return text[start + 1:end] if 0 <= start < end else text.split(":", 1)[-1].strip()
