"""Command line entry point: ``motionpi <command> ...``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import ConfigError, load_motion_config, read_config, render_ini
from .hal import HalError, render_pinout
from .media.camera import CameraError, still_bytes
from .media.convert import DEFAULT_EXTERNAL_COMMAND, ConversionError, convert_file
from .notify.mime import MimeError, build_message, render_mime
from .notify.smtp import SmtpError
from .pipeline import MockNotifier, PipelineConfig, PipelineError, demo_led, live_notifier, run_scenario
from .scenario import ScenarioError
from .verifier.checker import StateBudgetExceeded, check
from .verifier.model import MOTION_QUERIES, ModelError, build_motion_model
from .verifier.modelfile import read_model
from .verifier.query import QuerySyntaxError, UnknownIdentifierError

EXIT_OK = 0
EXIT_FAILED = 1  # a query is UNSAT or an event handler failed
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_SCENARIO = 4
EXIT_MEDIA = 5
EXIT_SMTP = 6
EXIT_MODEL = 7
EXIT_HARDWARE = 8

_CATEGORIES = [
    ((ConfigError, PipelineError), EXIT_CONFIG, "config error"),
    ((ScenarioError,), EXIT_SCENARIO, "scenario error"),
    ((CameraError, ConversionError, MimeError), EXIT_MEDIA, "media error"),
    ((SmtpError,), EXIT_SMTP, "smtp error"),
    ((ModelError, QuerySyntaxError, UnknownIdentifierError, StateBudgetExceeded), EXIT_MODEL, "model error"),
    ((HalError,), EXIT_HARDWARE, "gpio error"),
]


def _pipeline_config(args) -> PipelineConfig:
    mc = load_motion_config(read_config(args.config))
    overrides = {}
    if getattr(args, "mode", None):
        overrides["use_case"] = args.mode
    if getattr(args, "output_dir", None):
        overrides["output_dir"] = Path(args.output_dir)
    if getattr(args, "seed", None) is not None:
        overrides["boundary_seed"] = args.seed
    if getattr(args, "mock_smtp", False):
        overrides["mock_smtp"] = True
    if getattr(args, "live_smtp", False):
        overrides["mock_smtp"] = False
    if getattr(args, "no_convert", False):
        overrides["convert"] = False
    return PipelineConfig.from_motion_config(mc, **overrides)


def cmd_run(args) -> int:
    cfg = _pipeline_config(args)
    result = run_scenario(Path(args.scenario), cfg, echo=None if args.quiet else print)
    failed = [r for r in result.records if not r.ok]
    print(f"{len(result.records)} motion events, {len(failed)} failed")
    for r in failed:
        print(f"event at {r.event.timestamp:.3f} s: {r.error}")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_verify(args) -> int:
    model = build_motion_model() if args.model == "builtin" else read_model(args.model)
    queries = args.query or list(MOTION_QUERIES)
    width = max(len(q) for q in queries)
    all_sat = True
    start = time.perf_counter()
    for q in queries:
        v = check(model, q, budget=args.budget)
        all_sat &= v.satisfied
        print(f"{q:<{width}}  {v.result.value:<5}  ({v.states} states)")
        if args.witness and v.witness:
            for step in v.witness:
                print(f"    {step}")
    print(f"checked {len(queries)} queries on model {model.name!r} in {time.perf_counter() - start:.3f} s")
    return EXIT_OK if all_sat else EXIT_FAILED


def cmd_pinout(args) -> int:
    sys.stdout.write(render_pinout())
    return EXIT_OK


def cmd_convert(args) -> int:
    out = convert_file(args.input, args.output, args.mode, fps=args.fps, command=args.command)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_send_test(args) -> int:
    cfg = _pipeline_config(args)
    data = Path(args.attachment).read_bytes() if args.attachment else still_bytes(cfg.frame, 0.0)
    name = Path(args.attachment).name if args.attachment else "MotionDetected.png"
    rendered = render_mime(build_message(cfg, cfg.subject, (name, data, "image/png")), cfg.boundary_seed)
    if cfg.mock_smtp:
        with MockNotifier(cfg) as notifier:
            transcript = notifier(rendered)
            stored = len(notifier.messages)
        print(f"mock server stored {stored} message")
    else:
        transcript = live_notifier(cfg)(rendered)
    sys.stdout.write(transcript.render(redact=True) if args.transcript else "")
    print(f"sent {len(rendered.data)} bytes to {cfg.recipient}")
    return EXIT_OK


def cmd_parse_config(args) -> int:
    doc = read_config(args.config)
    sys.stdout.write(render_ini(doc))
    if args.check:
        cfg = PipelineConfig.from_motion_config(load_motion_config(doc))
        print(f"# ok: use case {cfg.use_case}, input {cfg.input_pin}, led {cfg.led_pin}")
    return EXIT_OK


def cmd_led(args) -> int:
    cfg = _pipeline_config(args) if args.config else PipelineConfig()
    for t, level in demo_led(cfg):
        print(f"[{t:9.3f}] LED {cfg.led_pin} {'on' if level else 'off'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="motionpi", description="Simulated Raspberry Pi motion detector.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the detector against a scenario file")
    r.add_argument("--config", default="config.ini")
    r.add_argument("--scenario", required=True)
    r.add_argument("--mode", choices=["image", "video", "both"])
    r.add_argument("--output-dir")
    r.add_argument("--seed", type=int, help="MIME boundary seed")
    smtp = r.add_mutually_exclusive_group()
    smtp.add_argument("--mock-smtp", action="store_true", help="deliver to an in-process server (default)")
    smtp.add_argument("--live-smtp", action="store_true", help="deliver through the configured server")
    r.add_argument("--no-convert", action="store_true")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="model-check the controller automaton")
    v.add_argument("--model", default="builtin", help="'builtin' or a model file")
    v.add_argument("--query", action="append", help="query text; repeatable")
    v.add_argument("--budget", type=int, default=1_000_000)
    v.add_argument("--witness", action="store_true")
    v.set_defaults(func=cmd_verify)

    sub.add_parser("pinout", help="print the 40-pin header").set_defaults(func=cmd_pinout)

    c = sub.add_parser("convert", help="wrap a raw .h264 stream into .mp4")
    c.add_argument("input")
    c.add_argument("output", nargs="?", default="MotionDetectionConverted.mp4")
    c.add_argument("--mode", choices=["native", "external"], default="native")
    c.add_argument("--external", dest="mode", action="store_const", const="external",
                   help="same as --mode external")
    c.add_argument("--fps", type=int, default=30)
    c.add_argument("--command", default=DEFAULT_EXTERNAL_COMMAND)
    c.set_defaults(func=cmd_convert)

    s = sub.add_parser("send-test", help="send one test message")
    s.add_argument("--config", default="config.ini")
    s.add_argument("--attachment")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--mock-smtp", action="store_true")
    g.add_argument("--live-smtp", action="store_true")
    s.add_argument("--transcript", action="store_true", help="print the SMTP dialogue, password redacted")
    s.set_defaults(func=cmd_send_test)

    pc = sub.add_parser("parse-config", help="parse and re-render a config file")
    pc.add_argument("--config", default="config.ini")
    pc.add_argument("--check", action="store_true", help="also validate the motion settings")
    pc.set_defaults(func=cmd_parse_config)

    led = sub.add_parser("led", help="light the LED for five simulated seconds")
    led.add_argument("--config")
    led.set_defaults(func=cmd_led)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"motionpi: io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        for kinds, code, label in _CATEGORIES:
            if isinstance(exc, kinds):
                print(f"motionpi: {label}: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
