import configparser

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motionpi.config import (
    ConfigDocument,
    ConfigError,
    load_motion_config,
    motion_config_document,
    parse_ini,
    read_config,
    render_ini,
)

BASIC = """\
# credentials live outside the code
[Motion]
email_sender = a@x.org
Email_Recipient : b@y.org
password = s3cret
password = later
future_key = ignored

; sensor knobs
[Sensor]
delay_time_s = 5
"""


def test_parse_basic():
    doc = parse_ini(BASIC)
    assert doc.get("Motion", "email_sender") == "a@x.org"
    assert doc.get("Motion", "EMAIL_RECIPIENT") == "b@y.org"
    assert doc.get("Motion", "password") == "later"
    assert list(doc.sections) == ["Motion", "Sensor"]
    assert not doc.has("motion", "password")


def test_empty_document():
    assert parse_ini("").sections == {}
    assert render_ini(ConfigDocument()) == ""


@pytest.mark.parametrize(
    "text,line",
    [("key=1\n", 1), ("[A]\nok=1\n[broken\n", 3), ("[A]\n\njust words\n", 3), ("[]\n", 1), ("[A]\n= v\n", 2)],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_ini(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_invalid_utf8_located():
    with pytest.raises(ConfigError) as info:
        parse_ini(b"[A]\nk = v\nbad = \xff\n")
    assert info.value.line == 3


def test_render_two_sections():
    text = render_ini(parse_ini(BASIC))
    assert [ln for ln in text.splitlines() if ln.startswith("[")] == ["[Motion]", "[Sensor]"]
    assert parse_ini(text) == parse_ini(BASIC)


def test_render_rejects_newline_value():
    doc = ConfigDocument()
    doc.set("A", "k", "two\nlines")
    with pytest.raises(ConfigError, match="newline"):
        render_ini(doc)


def test_motion_config():
    cfg = load_motion_config(parse_ini(BASIC))
    assert (cfg.email_sender, cfg.email_recipient, cfg.password) == ("a@x.org", "b@y.org", "later")
    assert cfg.subject == "Motion Detected"
    assert cfg.poll_interval_s == 1.0 and cfg.video_duration_s == 5.0
    assert cfg.input_pin == "board:11" and cfg.led_pin == "bcm:18"
    assert cfg.pir == {"delay_time_s": "5"}
    assert load_motion_config(motion_config_document(cfg)) == cfg


def test_motion_config_errors():
    with pytest.raises(ConfigError, match="Motion"):
        load_motion_config(parse_ini("[Other]\nx = 1\n"))
    with pytest.raises(ConfigError, match="password missing"):
        load_motion_config(parse_ini("[Motion]\nemail_sender = a\nemail_recipient = b\n"))
    with pytest.raises(ConfigError, match="poll_interval_s"):
        load_motion_config(parse_ini("[Motion]\nemail_sender=a\nemail_recipient=b\npassword=c\npoll_interval_s=soon\n"))


def test_read_config(tmp_path):
    p = tmp_path / "config.ini"
    p.write_text(BASIC)
    assert read_config(p) == parse_ini(BASIC)
    with pytest.raises(ConfigError, match="cannot read"):
        read_config(tmp_path / "missing.ini")


# names and values that survive a render/parse cycle
_text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=12)
section_names = _text.map(str.strip).filter(
    lambda s: s and "[" not in s and "]" not in s and s == s.strip() and len(s.splitlines()) == 1
    and s.splitlines()[0] == s
)
keys = _text.map(lambda s: s.strip().lower()).filter(
    lambda k: k and k == k.strip() and k == k.lower() and "=" not in k and ":" not in k
    and k[0] not in "#;[" and k.splitlines() == [k]
)
values = _text.map(str.strip).filter(lambda v: v == v.strip() and (v == "" or v.splitlines() == [v]))


@st.composite
def documents(draw):
    doc = ConfigDocument()
    for name in draw(st.lists(section_names, max_size=4, unique=True)):
        doc.sections[name] = draw(st.dictionaries(keys, values, max_size=5))
    return doc


@settings(max_examples=1000)
@given(documents())
def test_parse_render_identity(doc):
    assert parse_ini(render_ini(doc)) == doc


@settings(max_examples=300)
@given(st.binary(max_size=200))
def test_parse_total_over_bytes(data):
    try:
        doc = parse_ini(data)
    except ConfigError as exc:
        assert exc.line is None or exc.line >= 1
    else:
        assert isinstance(doc, ConfigDocument)


ascii_word = st.text("abcdefghijklmnopqrstuvwxyz_0123456789", min_size=1, max_size=8)


@settings(max_examples=300)
@given(st.dictionaries(ascii_word.map(str.capitalize), st.dictionaries(ascii_word, st.text("abc xyz@.-12", max_size=10).map(str.strip), max_size=4), max_size=3))
def test_agrees_with_configparser(sections):
    sections.pop("Default", None)
    doc = ConfigDocument({k: dict(v) for k, v in sections.items()})
    text = render_ini(doc)
    ref = configparser.ConfigParser(interpolation=None, default_section="\x00none")
    ref.read_string(text)
    assert {s: dict(ref[s]) for s in ref.sections()} == parse_ini(text).sections
