"""INI configuration files and the motion-detector settings read from them.

The accepted dialect is deliberately small: ``[section]`` headers,
``key = value`` or ``key : value`` lines and full-line ``#`` / ``;``
comments.  Keys are case-insensitive (stored lower-cased), section names are
case-sensitive, and a repeated key overwrites the earlier value.  There is no
interpolation, no multi-line values and no special DEFAULT section.

Credentials are stored in plain text, outside the program source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

DEFAULT_CONFIG_PATH = "config.ini"
MOTION_SECTION = "Motion"
SENSOR_SECTION = "Sensor"


class ConfigError(Exception):
    """Raised for unreadable or incomplete configuration."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class ConfigDocument:
    sections: dict[str, dict[str, str]] = field(default_factory=dict)

    def get(self, section: str, key: str) -> str:
        try:
            return self.sections[section][key.lower()]
        except KeyError:
            raise ConfigError(f"{section}.{key.lower()} missing") from None

    def has(self, section: str, key: str) -> bool:
        return key.lower() in self.sections.get(section, {})

    def set(self, section: str, key: str, value: str) -> None:
        self.sections.setdefault(section, {})[key.lower()] = value


def parse_ini(text: str | bytes) -> ConfigDocument:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = text.count(b"\n", 0, exc.start) + 1
            raise ConfigError("invalid UTF-8", line) from None
    doc = ConfigDocument()
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line[0] == "[":
            if line[-1] != "]" or len(line) < 3 or not line[1:-1].strip():
                raise ConfigError(f"malformed section header {raw!r}", lineno)
            name = line[1:-1].strip()
            if "[" in name or "]" in name:
                raise ConfigError(f"malformed section header {raw!r}", lineno)
            current = doc.sections.setdefault(name, {})
            continue
        cut = [i for i in (line.find("="), line.find(":")) if i >= 0]
        if not cut:
            raise ConfigError(f"expected 'key = value', got {raw!r}", lineno)
        if current is None:
            raise ConfigError("key/value line before any section header", lineno)
        key, value = line[: min(cut)].strip().lower(), line[min(cut) + 1:].strip()
        if not key:
            raise ConfigError(f"empty key in {raw!r}", lineno)
        current[key] = value
    return doc


_LINE_BREAKS = "\n\r\x0b\x0c\x1c\x1d\x1e\x85\u2028\u2029"


def _breaks_line(text: str) -> bool:
    return any(c in _LINE_BREAKS for c in text)


def _check_renderable(doc: ConfigDocument) -> None:
    for name, items in doc.sections.items():
        if not name or name != name.strip() or "[" in name or "]" in name or _breaks_line(name):
            raise ConfigError(f"section name {name!r} cannot be rendered")
        for key, value in items.items():
            if (
                not key
                or key != key.strip()
                or key != key.lower()
                or "=" in key
                or ":" in key
                or _breaks_line(key)
                or key[0] in "#;["
            ):
                raise ConfigError(f"key {key!r} in [{name}] cannot be rendered")
            if _breaks_line(value):
                raise ConfigError(f"value of {name}.{key} contains a newline")
            if value != value.strip():
                raise ConfigError(f"value of {name}.{key} has surrounding whitespace")


def render_ini(doc: ConfigDocument) -> str:
    _check_renderable(doc)
    blocks = []
    for name, items in doc.sections.items():
        lines = [f"[{name}]"] + [f"{k} = {v}" for k, v in items.items()]
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def read_config(path: str | Path = DEFAULT_CONFIG_PATH) -> ConfigDocument:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_ini(data)


_TRUE = {"1", "yes", "true", "on"}
_FALSE = {"0", "no", "false", "off"}


def _typed(doc: ConfigDocument, section: str, key: str, default, kind):
    if not doc.has(section, key):
        return default
    raw = doc.get(section, key)
    try:
        if kind is bool:
            low = raw.lower()
            if low not in _TRUE | _FALSE:
                raise ValueError(raw)
            return low in _TRUE
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot interpret {raw!r} as {kind.__name__}") from None


@dataclass(frozen=True)
class MotionConfig:
    """Settings of the motion detector.

    Only the three credential keys are required.  Every other key is an
    optional override with the default shown here.
    """

    email_sender: str
    email_recipient: str
    password: str
    subject: str = "Motion Detected"
    poll_interval_s: float = 1.0
    video_duration_s: float = 5.0
    fps: int = 30
    input_pin: str = "board:11"
    led_pin: str = "bcm:18"
    use_case: str = "image"
    output_dir: str = "artifacts"
    smtp_host: str = "smtp.gmail.com"
    smtp_port: int = 587
    smtp_starttls: bool = True
    smtp_live: bool = False
    convert_command: str = "MP4Box -add {in} {out}"
    pir: Mapping[str, str] = field(default_factory=dict)


_OPTIONAL = {
    "subject": str,
    "poll_interval_s": float,
    "video_duration_s": float,
    "fps": int,
    "input_pin": str,
    "led_pin": str,
    "use_case": str,
    "output_dir": str,
    "smtp_host": str,
    "smtp_port": int,
    "smtp_starttls": bool,
    "smtp_live": bool,
    "convert_command": str,
}


def load_motion_config(doc: ConfigDocument) -> MotionConfig:
    if MOTION_SECTION not in doc.sections:
        raise ConfigError(f"section [{MOTION_SECTION}] missing")
    required = {}
    for key in ("email_sender", "email_recipient", "password"):
        if not doc.has(MOTION_SECTION, key) or not doc.get(MOTION_SECTION, key):
            raise ConfigError(f"{key} missing")
        required[key] = doc.get(MOTION_SECTION, key)
    optional = {}
    for key, kind in _OPTIONAL.items():
        if doc.has(MOTION_SECTION, key):
            optional[key] = _typed(doc, MOTION_SECTION, key, None, kind)
    pir = dict(doc.sections.get(SENSOR_SECTION, {}))
    return MotionConfig(**required, **optional, pir=pir)


def motion_config_document(cfg: MotionConfig) -> ConfigDocument:
    """The inverse of ``load_motion_config``, used to write a starter file."""
    doc = ConfigDocument()
    for key in ("email_sender", "email_recipient", "password", *_OPTIONAL):
        value = getattr(cfg, key)
        if isinstance(value, bool):
            value = "true" if value else "false"
        doc.set(MOTION_SECTION, key, str(value))
    for key, value in cfg.pir.items():
        doc.set(SENSOR_SECTION, key, value)
    return doc
