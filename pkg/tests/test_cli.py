import json

import pytest

from motionpi.cli import (
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_MEDIA,
    EXIT_MODEL,
    EXIT_OK,
    EXIT_SCENARIO,
    EXIT_USAGE,
    main,
)
from motionpi.media.camera import FrameSpec, record_clip
from motionpi.scenario import Scenario, crossing, render_scenario
from motionpi.pir import Scene


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "config.ini"
    p.write_text(
        "[Motion]\nemail_sender = me@example.com\nemail_recipient = you@example.com\n"
        f"password = hunter2\noutput_dir = {tmp_path / 'out'}\n\n[Sensor]\ndelay_time_s = 5\n"
    )
    return p


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(render_scenario(Scenario(Scene(1.0, (crossing("w", 3.0),)), 12.0)))
    return p


def test_run_image(config, scenario, tmp_path, capsys):
    assert main(["run", "--config", str(config), "--scenario", str(scenario)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "No Motion Detected" in out and "] Motion Detected" in out
    assert "1 motion events, 0 failed" in out
    assert [p.suffix for p in (tmp_path / "out").iterdir()] == [".png"]


def test_run_video_quiet(config, scenario, tmp_path, capsys):
    code = main(["run", "--config", str(config), "--scenario", str(scenario), "--mode", "video", "--quiet"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "1 motion events, 0 failed"
    assert sorted(p.suffix for p in (tmp_path / "out").iterdir()) == [".h264", ".mp4"]


def test_run_errors(config, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"objects": 3}))
    assert main(["run", "--config", str(config), "--scenario", str(bad)]) == EXIT_SCENARIO
    assert capsys.readouterr().err.startswith("motionpi: scenario error:")
    assert main(["run", "--config", str(tmp_path / "nope.ini"), "--scenario", str(bad)]) == EXIT_CONFIG


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == EXIT_USAGE


def test_verify_builtin(capsys):
    assert main(["verify"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("SAT") == 5 and "UNSAT" not in out


def test_verify_unsat_and_witness(tmp_path, capsys):
    p = tmp_path / "m.ta"
    p.write_text("clock x\nlocation A initial invariant x <= 0\n")
    assert main(["verify", "--model", str(p), "--query", "A[](not deadlock)"]) == EXIT_FAILED
    assert main(["verify", "--query", "E<>(operationPicked == 1)", "--witness"]) == EXIT_OK
    assert "Record_Video" in capsys.readouterr().out


def test_verify_errors(tmp_path, capsys):
    assert main(["verify", "--query", "E<>(x == "]) == EXIT_MODEL
    assert "position 9" in capsys.readouterr().err
    assert main(["verify", "--query", "E<>(ghost == 1)"]) == EXIT_MODEL
    p = tmp_path / "m.ta"
    p.write_text("edge A -> B\n")
    assert main(["verify", "--model", str(p)]) == EXIT_MODEL


def test_pinout(capsys):
    assert main(["pinout"]) == EXIT_OK
    assert len(capsys.readouterr().out.strip().splitlines()) >= 40


def test_convert(tmp_path, capsys):
    clip = record_clip(FrameSpec(32, 32), 0.2, tmp_path / "c.h264")
    out = tmp_path / "c.mp4"
    assert main(["convert", str(clip.path), str(out)]) == EXIT_OK
    assert out.read_bytes()[4:8] == b"ftyp"
    bad = tmp_path / "bad.h264"
    bad.write_bytes(b"junk")
    assert main(["convert", str(bad), str(tmp_path / "x.mp4")]) == EXIT_MEDIA
    missing_tool = ["convert", str(clip.path), str(tmp_path / "y.mp4"), "--external", "--command", "no-such-tool {in} {out}"]
    assert main(missing_tool) == EXIT_MEDIA


def test_send_test(config, capsys):
    assert main(["send-test", "--config", str(config), "--transcript"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "mock server stored 1 message" in out and "AUTH LOGIN" in out
    assert "hunter2" not in out


def test_parse_config(config, tmp_path, capsys):
    assert main(["parse-config", "--config", str(config), "--check"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[Motion]" in out and "# ok: use case image" in out
    broken = tmp_path / "broken.ini"
    broken.write_text("[Motion\n")
    assert main(["parse-config", "--config", str(broken)]) == EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err


def test_led(config, tmp_path, capsys):
    assert main(["led"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["[    0.000] LED bcm:18 on", "[    5.000] LED bcm:18 off"]
    bad = tmp_path / "bad.ini"
    bad.write_text(config.read_text().replace("[Sensor]", "led_pin = board:6\n\n[Sensor]"))
    assert main(["led", "--config", str(bad)]) == EXIT_CONFIG
