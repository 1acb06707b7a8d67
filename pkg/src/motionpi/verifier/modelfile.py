"""Plain-text model files.

One declaration per line, ``#`` starts a comment::

    clock x, y
    int motion = 0 range 0..1
    location Idle initial
    location Busy invariant x <= 2
    location Done committed
    edge Idle -> Busy guard motion == 1 update x := 0, motion := 0
    edge Busy -> Done guard x >= 1
    edge Done -> Idle

Constraints are joined with ``&&``.  In ``update`` an assignment to a
clock must be ``:= 0`` and is a reset.  ``range`` defaults to ``0..1``.
"""

from __future__ import annotations

import re
from pathlib import Path

from .model import Atom, Edge, IntVar, Location, ModelError, TimedAutomaton

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_ATOM = re.compile(rf"^\s*({_NAME})\s*(==|<=|>=|<|>)\s*(-?\d+)\s*$")
_INT = re.compile(rf"^int\s+({_NAME})\s*=\s*(-?\d+)(?:\s+range\s+(-?\d+)\s*\.\.\s*(-?\d+))?$")
_LOC = re.compile(rf"^location\s+({_NAME})((?:\s+(?:initial|committed))*)(?:\s+invariant\s+(.+))?$")
_EDGE = re.compile(rf"^edge\s+({_NAME})\s*->\s*({_NAME})(?:\s+guard\s+(.+?))?(?:\s+update\s+(.+))?$")
_ASSIGN = re.compile(rf"^\s*({_NAME})\s*:=\s*(-?\d+)\s*$")


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def _conj(text: str, line: int) -> tuple[Atom, ...]:
    atoms = []
    for part in text.split("&&"):
        m = _ATOM.match(part)
        if not m:
            raise ModelSyntaxError(f"bad constraint {part.strip()!r}", line)
        atoms.append(Atom(m.group(1), m.group(2), int(m.group(3))))
    return tuple(atoms)


def parse_model(text: str, name: str = "model") -> TimedAutomaton:
    clocks: list[str] = []
    ints: list[IntVar] = []
    locations: list[Location] = []
    edges: list[Edge] = []
    initial = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword = line.split(None, 1)[0]
        if keyword == "clock":
            names = [c.strip() for c in line[len("clock"):].split(",")]
            if not all(re.fullmatch(_NAME, c) for c in names):
                raise ModelSyntaxError("bad clock list", n)
            clocks += names
        elif keyword == "int":
            m = _INT.match(line)
            if not m:
                raise ModelSyntaxError("expected 'int NAME = VALUE [range LO..HI]'", n)
            lo = int(m.group(3)) if m.group(3) is not None else 0
            hi = int(m.group(4)) if m.group(4) is not None else 1
            try:
                ints.append(IntVar(m.group(1), int(m.group(2)), lo, hi))
            except ModelError as exc:
                raise ModelSyntaxError(str(exc), n) from None
        elif keyword == "location":
            m = _LOC.match(line)
            if not m:
                raise ModelSyntaxError("expected 'location NAME [initial] [committed] [invariant ...]'", n)
            flags = m.group(2).split()
            inv = _conj(m.group(3), n) if m.group(3) else ()
            locations.append(Location(m.group(1), inv, committed="committed" in flags))
            if "initial" in flags:
                if initial is not None:
                    raise ModelSyntaxError("more than one initial location", n)
                initial = m.group(1)
        elif keyword == "edge":
            m = _EDGE.match(line)
            if not m:
                raise ModelSyntaxError("expected 'edge SRC -> DST [guard ...] [update ...]'", n)
            guard = _conj(m.group(3), n) if m.group(3) else ()
            assign, resets = [], []
            for part in (m.group(4).split(",") if m.group(4) else []):
                a = _ASSIGN.match(part)
                if not a:
                    raise ModelSyntaxError(f"bad assignment {part.strip()!r}", n)
                var, value = a.group(1), int(a.group(2))
                if var in clocks:
                    if value != 0:
                        raise ModelSyntaxError(f"clock {var} can only be reset to 0", n)
                    resets.append(var)
                else:
                    assign.append((var, value))
            edges.append(Edge(m.group(1), m.group(2), guard, assign, resets))
        else:
            raise ModelSyntaxError(f"unknown declaration {keyword!r}", n)
    if initial is None:
        if not locations:
            raise ModelSyntaxError("no locations declared", 0)
        initial = locations[0].name
    return TimedAutomaton(locations, edges, initial, clocks, ints, name=name)


def read_model(path: str | Path) -> TimedAutomaton:
    path = Path(path)
    return parse_model(path.read_text(encoding="utf-8"), name=path.stem)


def render_model(model: TimedAutomaton) -> str:
    out = []
    if model.clocks:
        out.append("clock " + ", ".join(model.clocks))
    for v in model.int_vars:
        out.append(f"int {v.name} = {v.initial} range {v.lo}..{v.hi}")
    for loc in model.locations:
        parts = ["location", loc.name]
        if loc.name == model.initial:
            parts.append("initial")
        if loc.committed:
            parts.append("committed")
        if loc.invariant:
            parts += ["invariant", " && ".join(map(str, loc.invariant))]
        out.append(" ".join(parts))
    for e in model.edges:
        parts = ["edge", e.src, "->", e.dst]
        if e.guard:
            parts += ["guard", " && ".join(map(str, e.guard))]
        updates = [f"{n} := {v}" for n, v in e.assign] + [f"{c} := 0" for c in e.resets]
        if updates:
            parts += ["update", ", ".join(updates)]
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"

