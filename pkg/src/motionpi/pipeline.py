"""The motion-detector control loop over simulated hardware.

Time is virtual: the clock counts integer milliseconds and ``sleep`` only
moves it forward, so a minute of scenario runs in well under a second and
two runs with the same inputs produce the same log and artifact bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .config import MotionConfig
from .hal import Gpio, Led, Level, Mode, NoSuchPinError, NotGpioError, PinIdentity, Pull, parse_pin_ref
from .media.camera import FrameSpec, capture_still, record_clip
from .media.convert import DEFAULT_EXTERNAL_COMMAND, convert_file
from .notify.mime import Attachment, RenderedMime, build_message, render_mime
from .notify.mockserver import MockSmtpServer
from .notify.smtp import SmtpEndpoint, SmtpTranscript, send
from .pir import PirConfig, PirSensor, TriggerMode
from .scenario import Scenario, load_scenario

USE_CASES = ("image", "video", "both")
LED_DEMO_SECONDS = 5.0


class PipelineError(Exception):
    pass


class SimClock:
    """Virtual time in whole milliseconds."""

    def __init__(self, start_ms: int = 0):
        self.ms = start_ms

    def now(self) -> float:
        return self.ms / 1000.0

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative time")
        self.ms += round(seconds * 1000)

    __call__ = now


def pir_config_from(values: dict[str, str]) -> PirConfig:
    """PIR knobs from the ``[Sensor]`` section of the config file."""
    kinds = {
        "delay_time_s": float,
        "sensitivity_range_m": float,
        "view_angle_deg": float,
        "threshold": float,
        "n_zones": int,
        "trigger_mode": TriggerMode,
    }
    kwargs = {}
    for key, raw in values.items():
        if key not in kinds:
            raise PipelineError(f"unknown sensor setting {key!r}")
        try:
            kwargs[key] = kinds[key](raw)
        except ValueError:
            raise PipelineError(f"sensor setting {key}: cannot interpret {raw!r}") from None
    try:
        return PirConfig(**kwargs)
    except ValueError as exc:
        raise PipelineError(f"sensor settings: {exc}") from None


@dataclass(frozen=True)
class PipelineConfig:
    sender: str = "sender@example.com"
    recipient: str = "recipient@example.com"
    password: str = "password"
    subject: str = "Motion Detected"
    poll_interval_s: float = 1.0
    use_case: str = "image"
    video_duration_s: float = 5.0
    fps: int = 30
    input_pin: str = "board:11"
    led_pin: str = "bcm:18"
    output_dir: Path = Path("artifacts")
    frame: FrameSpec = field(default_factory=FrameSpec)
    smtp_host: str = "smtp.gmail.com"
    smtp_port: int = 587
    smtp_starttls: bool = True
    mock_smtp: bool = True
    convert: bool = True
    convert_mode: str = "native"
    convert_command: str = DEFAULT_EXTERNAL_COMMAND
    boundary_seed: int | None = 0
    timestamped_names: bool = True
    pir: PirConfig = field(default_factory=PirConfig)
    pir_dt: float = 0.1
    sensor_id: str = "pir0"

    def __post_init__(self):
        if not self.poll_interval_s > 0:
            raise PipelineError("poll_interval_s must be positive")
        if not self.video_duration_s > 0:
            raise PipelineError("video_duration_s must be positive")
        if self.use_case not in USE_CASES:
            raise PipelineError(f"use case must be one of {', '.join(USE_CASES)}, got {self.use_case!r}")
        if self.convert_mode not in ("native", "external"):
            raise PipelineError(f"unknown conversion mode {self.convert_mode!r}")
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        for attr in ("input_pin", "led_pin"):
            try:
                pin = parse_pin_ref(getattr(self, attr))
            except NoSuchPinError as exc:
                raise PipelineError(f"{attr}: {exc}") from None
            if not pin.is_gpio:
                raise PipelineError(f"{attr}: board pin {pin.board_number} ({pin.name}) is not a GPIO pin")

    @classmethod
    def from_motion_config(cls, mc: MotionConfig, **overrides) -> "PipelineConfig":
        base = cls(
            sender=mc.email_sender,
            recipient=mc.email_recipient,
            password=mc.password,
            subject=mc.subject,
            poll_interval_s=mc.poll_interval_s,
            use_case=mc.use_case,
            video_duration_s=mc.video_duration_s,
            fps=mc.fps,
            input_pin=mc.input_pin,
            led_pin=mc.led_pin,
            output_dir=Path(mc.output_dir),
            smtp_host=mc.smtp_host,
            smtp_port=mc.smtp_port,
            smtp_starttls=mc.smtp_starttls,
            mock_smtp=not mc.smtp_live,
            convert_command=mc.convert_command,
            pir=pir_config_from(dict(mc.pir)),
        )
        return replace(base, **overrides) if overrides else base

    @property
    def input(self) -> PinIdentity:
        return parse_pin_ref(self.input_pin)

    @property
    def led(self) -> PinIdentity:
        return parse_pin_ref(self.led_pin)

    # attribute names expected by notify.mime.build_message
    @property
    def email_sender(self) -> str:
        return self.sender

    @property
    def email_recipient(self) -> str:
        return self.recipient


@dataclass(frozen=True)
class MotionEvent:
    timestamp: float
    sensor_id: str


@dataclass
class Action:
    kind: str
    started: float
    finished: float
    ok: bool = True
    path: Path | None = None
    detail: str = ""
    message: RenderedMime | None = None
    transcript: SmtpTranscript | None = None


@dataclass
class ActionRecord:
    event: MotionEvent
    actions: list[Action] = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def kinds(self) -> list[str]:
        return [a.kind for a in self.actions]

    def paths(self, kind: str) -> list[Path]:
        return [a.path for a in self.actions if a.kind == kind and a.ok and a.path is not None]


Notifier = Callable[[RenderedMime], SmtpTranscript]


class SmtpNotifier:
    def __init__(self, endpoint: SmtpEndpoint):
        self.endpoint = endpoint

    def __call__(self, rendered: RenderedMime) -> SmtpTranscript:
        return send(self.endpoint, rendered)


class MockNotifier(SmtpNotifier):
    """Delivers to an in-process SMTP server that accepts the configured login."""

    def __init__(self, cfg: PipelineConfig, **server_options):
        self.server = MockSmtpServer(credentials={cfg.sender: cfg.password}, **server_options)
        self.cfg = cfg
        super().__init__(None)

    def __enter__(self) -> "MockNotifier":
        self.server.start()
        self.endpoint = SmtpEndpoint(
            "127.0.0.1",
            self.server.port,
            use_starttls=self.cfg.smtp_starttls,
            credentials=(self.cfg.sender, self.cfg.password),
            wrap_tls=False,
            timeout=10.0,
        )
        return self

    def __exit__(self, *exc) -> None:
        self.server.stop()

    @property
    def messages(self):
        return self.server.messages


def live_notifier(cfg: PipelineConfig) -> SmtpNotifier:
    return SmtpNotifier(
        SmtpEndpoint(cfg.smtp_host, cfg.smtp_port, cfg.smtp_starttls, credentials=(cfg.sender, cfg.password))
    )


class Log:
    """Line-oriented log stamped with simulation time."""

    def __init__(self, clock: SimClock, echo: Callable[[str], None] | None = None):
        self.clock = clock
        self.lines: list[str] = []
        self.echo = echo

    def __call__(self, text: str) -> None:
        line = f"[{self.clock.now():9.3f}] {text}"
        self.lines.append(line)
        if self.echo is not None:
            self.echo(line)

    def text(self) -> str:
        return "".join(ln + "\n" for ln in self.lines)


def poll_once(clock: SimClock, gpio: Gpio, cfg: PipelineConfig, log: Callable[[str], None] | None = None):
    """One pass of the detector loop.

    A low input logs "No Motion Detected" and sleeps one poll interval; a
    high input logs "Motion Detected" and returns the event without sleeping.
    """
    log = log or (lambda _s: None)
    level = gpio.read(cfg.input)
    if level is Level.LOW:
        log("No Motion Detected")
        clock.sleep(cfg.poll_interval_s)
        return None
    log("Motion Detected")
    return MotionEvent(clock.now(), cfg.sensor_id)


@dataclass
class Services:
    clock: SimClock
    gpio: Gpio
    led: Led
    notifier: Notifier
    log: Callable[[str], None] = lambda _s: None


def _name(cfg: PipelineConfig, stem: str, suffix: str, t: float) -> Path:
    if cfg.timestamped_names:
        return cfg.output_dir / f"{stem}_{round(t * 1000):08d}ms{suffix}"
    return cfg.output_dir / f"{stem}{suffix}"


def dispatch(event: MotionEvent, cfg: PipelineConfig, services: Services) -> ActionRecord:
    """Handle one event: LED on, the configured use case, LED off."""
    clock, gpio, log = services.clock, services.gpio, services.log
    record = ActionRecord(event)

    def run(kind: str, fn) -> Action:
        t0 = clock.now()
        action = Action(kind, t0, t0)
        try:
            fn(action)
        except Exception as exc:  # a failing step aborts the rest of this event
            action.ok = False
            action.detail = f"{type(exc).__name__}: {exc}"
            record.error = f"{kind}: {exc}"
            log(f"{kind} failed: {exc}")
        action.finished = clock.now()
        record.actions.append(action)
        return action

    def log_step(a: Action) -> None:
        a.detail = "Motion Detected"

    def led(level: Level):
        def step(a: Action) -> None:
            gpio.write(cfg.led, level)
            a.detail = f"{cfg.led_pin} {'high' if level else 'low'}"
        return step

    still: dict[str, Attachment] = {}

    def take_still(a: Action) -> None:
        path = _name(cfg, "MotionDetected", ".png", event.timestamp)
        art = capture_still(cfg.frame, clock.now(), path)
        a.path = art.path
        still["att"] = Attachment(path.name, art.data, "image/png")
        log(f"still saved as {path.name}")

    def email(a: Action) -> None:
        msg = build_message(cfg, cfg.subject, still["att"])
        rendered = render_mime(msg, cfg.boundary_seed)
        a.message = rendered
        a.transcript = services.notifier(rendered)
        a.detail = f"to {cfg.recipient}"
        log(f"email sent to {cfg.recipient}")

    clip: dict[str, Path] = {}

    def take_clip(a: Action) -> None:
        path = _name(cfg, "motiondetection", ".h264", event.timestamp)
        art = record_clip(cfg.frame, cfg.video_duration_s, path, cfg.fps)
        clock.sleep(cfg.video_duration_s)
        a.path = art.path
        a.detail = f"{art.n_frames} frames"
        clip["path"] = art.path
        log(f"video saved as {path.name}")

    def convert(a: Action) -> None:
        out = _name(cfg, "MotionDetectionConverted", ".mp4", event.timestamp)
        a.path = convert_file(
            clip["path"], out, cfg.convert_mode, fps=cfg.fps, command=cfg.convert_command
        )
        log(f"video converted to {out.name}")

    steps = [("log", log_step), ("led_on", led(Level.HIGH))]
    if cfg.use_case in ("image", "both"):
        steps += [("still", take_still), ("email", email)]
    if cfg.use_case in ("video", "both"):
        steps.append(("clip", take_clip))
        if cfg.convert:
            steps.append(("convert", convert))
    for kind, fn in steps:
        if not run(kind, fn).ok:
            break
    # the LED always goes dark again, even after a failed step
    run("led_off", led(Level.LOW))
    return record


def prepare_gpio(cfg: PipelineConfig, clock: SimClock, source=None) -> tuple[Gpio, Led]:
    gpio = Gpio(clock=clock.now)
    gpio.set_mode(cfg.input, Mode.INPUT, Pull.DOWN)
    if source is not None:
        gpio.bind(cfg.input, source)
    gpio.set_mode(cfg.led, Mode.OUTPUT)
    gpio.write(cfg.led, Level.LOW)
    return gpio, Led(gpio, cfg.led)


@dataclass
class RunResult:
    records: list[ActionRecord]
    log: list[str]
    led_trace: list[tuple[float, Level]]
    pulses: list[tuple[float, float | None]]


def run_scenario(
    scenario: Scenario | str | Path,
    cfg: PipelineConfig,
    *,
    notifier: Notifier | None = None,
    echo: Callable[[str], None] | None = None,
) -> RunResult:
    """Drive the detector through a scripted scene until the horizon.

    An event needs the input to have been low since the previous event, so
    one hold period of the sensor produces one record.
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    clock = SimClock()
    log = Log(clock, echo)
    sensor = PirSensor(cfg.pir, scenario.scene, cfg.pir_dt)
    gpio, led = prepare_gpio(cfg, clock, sensor)

    owned = None
    if notifier is None:
        owned = MockNotifier(cfg).__enter__() if cfg.mock_smtp else None
        notifier = owned or live_notifier(cfg)
    services = Services(clock, gpio, led, notifier, log)
    records: list[ActionRecord] = []
    armed = True
    horizon_ms = round(scenario.horizon_s * 1000)
    try:
        while clock.ms < horizon_ms:
            if not armed:
                if gpio.read(cfg.input) is Level.HIGH:
                    log("Motion Detected (already handled)")
                    clock.sleep(cfg.poll_interval_s)
                    continue
                armed = True
            event = poll_once(clock, gpio, cfg, log)
            if event is None:
                continue
            records.append(dispatch(event, cfg, services))
            armed = False
            clock.sleep(cfg.poll_interval_s)
    finally:
        if owned is not None:
            owned.__exit__(None, None, None)
    sensor.advance_to(clock.now())
    return RunResult(records, log.lines, list(led.trace), list(sensor.pulses))


def demo_led(cfg: PipelineConfig | None = None, *, clock: SimClock | None = None, gpio: Gpio | None = None,
             configure: bool = True) -> list[tuple[float, Level]]:
    """Light the LED for five seconds and return its trace.

    With ``configure=False`` the pin is used as the caller left it, so a pin
    set up as an input makes the write fail.
    """
    cfg = cfg or PipelineConfig()
    clock = clock or SimClock()
    gpio = gpio or Gpio(clock=clock.now)
    pin = cfg.led
    if not pin.is_gpio:
        raise NotGpioError(f"board pin {pin.board_number} is not a GPIO pin")
    if configure:
        gpio.set_mode(pin, Mode.OUTPUT)
    led = Led(gpio, pin)
    gpio.write(pin, Level.HIGH)
    clock.sleep(LED_DEMO_SECONDS)
    gpio.write(pin, Level.LOW)
    return led.trace
