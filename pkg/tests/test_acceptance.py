"""Acceptance suite: one test per criterion, PASS/FAIL lines printed at the end of the run."""

import base64
import email
import email.policy
import io
import os
import random
import struct
import time
from fractions import Fraction

import pytest

from motionpi.config import ConfigDocument, parse_ini, render_ini
from motionpi.hal import FixedPullError, Gpio, Mode, Pull, build_pin_map, render_pinout, resolve
from motionpi.media.annexb import parse_annexb
from motionpi.media.mp4 import avcc_parameter_sets, extract_samples
from motionpi.notify.mime import Attachment, EmailMessage, base64_decode, base64_encode, parse_mime, render_mime
from motionpi.pipeline import MockNotifier, PipelineConfig, run_scenario
from motionpi.pir import HeatSource, PirConfig, Scene, TriggerMode, pulse_windows
from motionpi.scenario import Scenario, crossing
from motionpi.verifier.checker import Result, check
from motionpi.verifier.dbm import (
    Dbm,
    bound,
    constrain_all,
    dbm_canonical,
    dbm_includes,
    dbm_is_empty,
    dbm_reset,
    dbm_up,
)
from motionpi.verifier.model import MOTION_QUERIES, build_motion_model
from motionpi.verifier.oracle import oracle_check
from random_automata import random_automaton, random_queries

criterion = pytest.mark.criterion

CONTROLLER_QUERIES = (
    "E<>(operationPicked == 0)",
    "E<>(operationPicked == 1)",
    "E[](pictureTakingTimeInterval <= 2)",
    "E[](videoRecordingTimeInterval <= 4)",
    "A[](not deadlock)",
)


@criterion(1, "builtin model: all five queries SAT in under 5 s")
def test_criterion_1_queries():
    assert tuple(MOTION_QUERIES) == CONTROLLER_QUERIES
    model = build_motion_model()
    t0 = time.perf_counter()
    results = [check(model, q).result for q in CONTROLLER_QUERIES]
    elapsed = time.perf_counter() - t0
    assert results == [Result.SAT] * 5
    assert elapsed < 5.0


@criterion(2, "zone checker agrees with the integer-time oracle")
def test_criterion_2_differential():
    model = build_motion_model()
    bad = [q for q in CONTROLLER_QUERIES if check(model, q).result is not oracle_check(model, q)]
    n_models = 0
    for seed in range(150):
        rng = random.Random(seed)
        m = random_automaton(rng)
        assert len(m.clocks) <= 2 and len(m.locations) <= 6 and m.max_constant() <= 5
        n_models += 1
        bad += [(seed, q) for q in random_queries(rng, m) if check(m, q).result is not oracle_check(m, q)]
    assert n_models >= 100
    assert bad == []


# ---- DBM algebra on seeded random zones


def _random_zone(rng, n):
    m = list(Dbm.universe(n).m)
    for _ in range(rng.randint(0, 5)):
        i = rng.randint(0, n)
        j = rng.choice([k for k in range(n + 1) if k != i])
        raw = bound(rng.randint(-6, 6), rng.random() < 0.5)
        m[i * (n + 1) + j] = min(m[i * (n + 1) + j], raw)
    return dbm_canonical(Dbm(n + 1, m))


def _random_point(rng, n):
    return [Fraction(rng.randint(0, 16), 2) for _ in range(n)]


CASES = 1000


@criterion(3, "DBM algebra properties, 1000 generated cases each")
def test_criterion_3_dbm():
    rng = random.Random(2024)
    counts = dict.fromkeys(("idempotent", "order", "up", "reset"), 0)
    quarters = [Fraction(k, 4) for k in range(49)]
    while min(counts.values()) < CASES:
        n = rng.randint(1, 3)
        d = _random_zone(rng, n)
        assert dbm_canonical(d) == d
        counts["idempotent"] += 1

        b = constrain_all(d, [(0, k, bound(-rng.randint(0, 3))) for k in range(1, n + 1) if rng.random() < 0.5])
        c = constrain_all(b, [(k, 0, bound(rng.randint(0, 6))) for k in range(1, n + 1) if rng.random() < 0.5])
        assert dbm_includes(d, d) and dbm_includes(d, b) and dbm_includes(b, c) and dbm_includes(d, c)
        if dbm_includes(b, d):
            assert b == d
        counts["order"] += 1

        if dbm_is_empty(d):
            continue
        assert dbm_includes(dbm_up(d), d)
        counts["up"] += 1

        k = rng.randint(1, n)
        r = dbm_reset(dbm_up(d), k)
        pinned = constrain_all(Dbm.universe(n), [(k, 0, bound(0)), (0, k, bound(0))])
        assert dbm_includes(pinned, r) and not dbm_is_empty(r)
        # exactly: a point is in the reset zone iff x_k = 0 and some value of x_k puts it in up(d)
        v = _random_point(rng, n)
        up = dbm_up(d)
        expected = v[k - 1] == 0 and any(up.contains(v[: k - 1] + [q] + v[k:]) for q in quarters)
        assert r.contains(v) == expected
        counts["reset"] += 1
    assert min(counts.values()) >= CASES


@criterion(4, "GPIO table round trip, 40-pin pinout, fixed pulls")
def test_criterion_4_gpio():
    pins = build_pin_map()
    channels = pins.channels()
    assert len(channels) == 28
    for pin in channels:
        assert resolve("BCM", resolve("BOARD", pin.board_number).bcm_number) == pin
        assert resolve("BOARD", resolve("BCM", pin.bcm_number).board_number) == pin
    rows = render_pinout().splitlines()[2:]
    assert [int(r.split()[0]) for r in rows] == list(range(1, 41))
    for bcm in (2, 3):
        for pull in (Pull.UP, Pull.DOWN):
            with pytest.raises(FixedPullError):
                Gpio().set_mode(resolve("BCM", bcm), Mode.INPUT, pull)


def _blip(ident, t):
    far = 50.0
    return HeatSource(ident, 1.0, ((t, 4.0, far), (t, 4.0, 1.0), (t + 0.05, 4.0, 1.0), (t + 0.05, 4.0, far)))


@criterion(5, "PIR: single pulse of the delay length, range cutoff, L vs H")
def test_criterion_5_pir():
    cfg = PirConfig(delay_time_s=5.0, sensitivity_range_m=7.0)
    ((start, end),) = pulse_windows(cfg, Scene(1.0, (crossing("w", 5.0, x=4.0),)), until=30)
    assert end - start == pytest.approx(5.0, abs=1e-9)
    assert pulse_windows(cfg, Scene(1.0, (crossing("w", 5.0, x=8.0),)), until=30) == []
    double = Scene(1.0, (_blip("a", 10.0), _blip("b", 12.0)))
    low = pulse_windows(PirConfig(trigger_mode=TriggerMode.L_NON_REPEATABLE), double, until=30)
    high = pulse_windows(PirConfig(trigger_mode=TriggerMode.H_REPEATABLE), double, until=30)
    assert low == [pytest.approx((10.0, 15.0))]
    assert high == [pytest.approx((10.0, 17.0))]


def _image_run(out_dir):
    scen = Scenario(Scene(1.0, tuple(crossing(f"w{i}", t) for i, t in enumerate((5.0, 25.0, 45.0)))), 60.0)
    cfg = PipelineConfig(output_dir=out_dir, use_case="image", boundary_seed=7)
    with MockNotifier(cfg) as mock:
        result = run_scenario(scen, cfg, notifier=mock)
        messages = list(mock.messages)
    return result, messages


def _png_size(data):
    assert data[:8] == b"\x89PNG\r\n\x1a\n" and data[12:16] == b"IHDR"
    return struct.unpack(">II", data[16:24])


@criterion(6, "image scenario: 3 images at 1280x720, 3 matching messages")
def test_criterion_6_image(tmp_path):
    result, messages = _image_run(tmp_path)
    images = sorted(p for p in tmp_path.iterdir() if p.suffix == ".png")
    assert len(images) == 3 and len(result.records) == 3
    assert len(messages) == 3
    for img, msg in zip(images, messages):
        assert _png_size(img.read_bytes()) == (1280, 720)
        parsed = email.message_from_bytes(msg.data, policy=email.policy.default)
        (att,) = list(parsed.iter_attachments())
        assert att.get_filename() == img.name
        assert base64.b64decode(att.get_payload()) == img.read_bytes()
    PIL = pytest.importorskip("PIL.Image")
    for img in images:
        assert PIL.open(io.BytesIO(img.read_bytes())).size == (1280, 720)


@criterion(7, "video scenario: .h264 and a valid .mp4 holding the same NALs")
def test_criterion_7_video(tmp_path):
    cfg = PipelineConfig(output_dir=tmp_path, use_case="video")
    result = run_scenario(Scenario(Scene(1.0, (crossing("w", 5.0),)), 20.0), cfg)
    (record,) = result.records
    (h264_path,) = record.paths("clip")
    (mp4_path,) = record.paths("convert")
    assert h264_path.suffix == ".h264" and mp4_path.suffix == ".mp4"
    data = mp4_path.read_bytes()
    pos, kinds = 0, []
    while pos < len(data):
        size, kind = struct.unpack_from(">I4s", data, pos)
        assert size >= 8
        kinds.append(kind)
        pos += size
    assert pos == len(data) and kinds[0] == b"ftyp"
    nals = parse_annexb(h264_path.read_bytes())
    assert avcc_parameter_sets(data) == ([nals[0].payload], [nals[1].payload])
    assert extract_samples(data) == [n.payload for n in nals[2:]]


def _random_document(rng):
    alphabet = "abcdefghij_ 0123456789@.-éλ"
    doc = ConfigDocument()
    for _ in range(rng.randint(0, 4)):
        name = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8))).strip() or "S"
        section = doc.sections.setdefault(name, {})
        for _ in range(rng.randint(0, 5)):
            key = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8))).strip().lower() or "k"
            section[key] = "".join(rng.choice(alphabet + "=:#;[]") for _ in range(rng.randint(0, 12))).strip()
    return doc


@criterion(8, "INI, base64 and MIME round trips")
def test_criterion_8_round_trips():
    rng = random.Random(8)
    for _ in range(1000):
        doc = _random_document(rng)
        assert parse_ini(render_ini(doc)) == doc
    assert base64_encode(b"Man") == "TWFu"
    for size in (0, 1, 2, 3, 57, 1000, 65_537, 1 << 20):
        buf = os.urandom(size)
        assert base64_decode(base64_encode(buf, 76)) == buf
    msg = EmailMessage("pi@example.com", "owner@example.com", "Motion Detected", "see attachment",
                       (Attachment("MotionDetected.png", os.urandom(5000), "image/png"),))
    assert parse_mime(render_mime(msg, 3).data) == msg


@criterion(9, "two identical image runs give identical artifacts and logs")
def test_criterion_9_determinism(tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        result, messages = _image_run(out)
        files = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
        runs.append((result.log, [m.data for m in messages], files))
    assert runs[0] == runs[1]
    assert len(runs[0][2]) == 3
