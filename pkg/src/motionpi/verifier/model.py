"""Single timed automata with bounded integer variables."""

from __future__ import annotations

from dataclasses import dataclass, field

from .dbm import bound

OPS = ("==", "<=", "<", ">=", ">")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    """``name op value`` where ``name`` is a clock or an integer variable."""

    name: str
    op: str
    value: int

    def __post_init__(self):
        if self.op not in OPS:
            raise ModelError(f"unknown comparison {self.op!r}")
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise ModelError(f"constant in {self.name} {self.op} {self.value!r} must be an integer")

    def holds(self, v) -> bool:
        c = self.value
        return {
            "==": v == c,
            "<=": v <= c,
            "<": v < c,
            ">=": v >= c,
            ">": v > c,
        }[self.op]

    def __str__(self) -> str:
        return f"{self.name} {self.op} {self.value}"


def conj_text(atoms) -> str:
    return " && ".join(str(a) for a in atoms)


@dataclass(frozen=True)
class IntVar:
    name: str
    initial: int = 0
    lo: int = 0
    hi: int = 1

    def __post_init__(self):
        if not self.lo <= self.initial <= self.hi:
            raise ModelError(f"initial value of {self.name} outside [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Location:
    name: str
    invariant: tuple[Atom, ...] = ()
    committed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "invariant", tuple(self.invariant))


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    guard: tuple[Atom, ...] = ()
    assign: tuple[tuple[str, int], ...] = ()
    resets: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "guard", tuple(self.guard))
        object.__setattr__(self, "assign", tuple(tuple(a) for a in self.assign))
        object.__setattr__(self, "resets", tuple(self.resets))

    def label(self) -> str:
        parts = [f"{self.src} -> {self.dst}"]
        if self.guard:
            parts.append(f"[{conj_text(self.guard)}]")
        updates = [f"{n} := {v}" for n, v in self.assign] + [f"{c} := 0" for c in self.resets]
        if updates:
            parts.append("{" + ", ".join(updates) + "}")
        return " ".join(parts)


@dataclass(frozen=True)
class TimedAutomaton:
    locations: tuple[Location, ...]
    edges: tuple[Edge, ...]
    initial: str
    clocks: tuple[str, ...] = ()
    int_vars: tuple[IntVar, ...] = ()
    name: str = "model"
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        for attr in ("locations", "edges", "clocks", "int_vars"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        self._validate()
        object.__setattr__(self, "_index", {loc.name: loc for loc in self.locations})

    def _validate(self) -> None:
        names = [loc.name for loc in self.locations]
        if len(set(names)) != len(names):
            raise ModelError("duplicate location name")
        if self.initial not in names:
            raise ModelError(f"initial location {self.initial!r} is not declared")
        clocks, ints = set(self.clocks), {v.name: v for v in self.int_vars}
        if len(clocks) != len(self.clocks) or len(ints) != len(self.int_vars) or clocks & set(ints):
            raise ModelError("duplicate clock or variable name")
        for loc in self.locations:
            for a in loc.invariant:
                if a.name not in clocks:
                    raise ModelError(f"invariant of {loc.name} uses undeclared clock {a.name!r}")
                if a.op not in ("<=", "<"):
                    raise ModelError(f"invariant of {loc.name} must be an upper bound, got {a}")
                if a.value < 0:
                    raise ModelError(f"invariant of {loc.name} has a negative constant")
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in names:
                    raise ModelError(f"edge {e.src} -> {e.dst} uses undeclared location {end!r}")
            for a in e.guard:
                if a.name not in clocks and a.name not in ints:
                    raise ModelError(f"guard of {e.src} -> {e.dst} uses undeclared name {a.name!r}")
            for var, value in e.assign:
                if var not in ints:
                    raise ModelError(f"assignment to undeclared variable {var!r}")
                iv = ints[var]
                if not iv.lo <= value <= iv.hi:
                    raise ModelError(f"assignment {var} := {value} outside [{iv.lo}, {iv.hi}]")
            for c in e.resets:
                if c not in clocks:
                    raise ModelError(f"reset of undeclared clock {c!r}")

    def location(self, name: str) -> Location:
        return self._index[name]

    def committed_locations(self) -> list[str]:
        return [loc.name for loc in self.locations if loc.committed]

    def clock_index(self, name: str) -> int:
        return self.clocks.index(name) + 1

    def int_index(self, name: str) -> int:
        return [v.name for v in self.int_vars].index(name)

    def initial_ints(self) -> tuple[int, ...]:
        return tuple(v.initial for v in self.int_vars)

    def edges_from(self, name: str) -> list[Edge]:
        return [e for e in self.edges if e.src == name]

    def max_constant(self) -> int:
        atoms = [a for loc in self.locations for a in loc.invariant]
        atoms += [a for e in self.edges for a in e.guard if a.name in self.clocks]
        return max((abs(a.value) for a in atoms), default=0)

    def clock_ceilings(self, extra: tuple[Atom, ...] = ()) -> list[int]:
        """Largest constant each clock is compared with, index 0 unused."""
        ceil = [0] * (len(self.clocks) + 1)
        atoms = [a for loc in self.locations for a in loc.invariant]
        atoms += [a for e in self.edges for a in e.guard] + list(extra)
        for a in atoms:
            if a.name in self.clocks:
                k = self.clock_index(a.name)
                ceil[k] = max(ceil[k], abs(a.value))
        return ceil


def atom_constraints(model: TimedAutomaton, atom: Atom) -> list[tuple[int, int, int]]:
    """DBM constraints ``(i, j, raw)`` for a clock atom."""
    k, c = model.clock_index(atom.name), atom.value
    upper = {"<=": bound(c), "<": bound(c, strict=True), "==": bound(c)}
    lower = {">=": bound(-c), ">": bound(-c, strict=True), "==": bound(-c)}
    out = []
    if atom.op in upper:
        out.append((k, 0, upper[atom.op]))
    if atom.op in lower:
        out.append((0, k, lower[atom.op]))
    return out


def negated_constraints(model: TimedAutomaton, atom: Atom) -> list[tuple[int, int, int]]:
    """The complement of a one-sided clock atom, as a single constraint."""
    k, c = model.clock_index(atom.name), atom.value
    table = {
        "<=": (0, k, bound(-c, strict=True)),
        "<": (0, k, bound(-c)),
        ">=": (k, 0, bound(c, strict=True)),
        ">": (k, 0, bound(c)),
    }
    return [table[atom.op]]


def one_sided(atoms) -> list[Atom]:
    """Split ``==`` atoms into an upper and a lower bound."""
    out = []
    for a in atoms:
        if a.op == "==":
            out += [Atom(a.name, "<=", a.value), Atom(a.name, ">=", a.value)]
        else:
            out.append(a)
    return out


PICTURE_CLOCK = "pictureTakingTimeInterval"
VIDEO_CLOCK = "videoRecordingTimeInterval"


def build_motion_model() -> TimedAutomaton:
    """The motion-detection controller as a single timed automaton.

    Check_Motion either sees no motion (self-loop) or moves on; the
    controller then picks an operation, spends bounded time taking a picture
    or recording a video, and passes through a committed location (sending
    mail, converting the clip) back to Check_Motion.
    """
    return TimedAutomaton(
        name="motion",
        clocks=(PICTURE_CLOCK, VIDEO_CLOCK),
        int_vars=(IntVar("motion", 0, 0, 1), IntVar("operationPicked", 0, 0, 1)),
        initial="Check_Motion",
        locations=(
            Location("Check_Motion"),
            Location("Motion_Detected"),
            Location("Take_Picture", (Atom(PICTURE_CLOCK, "<=", 2),)),
            Location("Send_Email", committed=True),
            Location("Record_Video", (Atom(VIDEO_CLOCK, "<=", 4),)),
            Location("Convert_to_MP4", committed=True),
        ),
        edges=(
            Edge("Check_Motion", "Check_Motion", assign=(("motion", 0),)),
            Edge("Check_Motion", "Motion_Detected", assign=(("motion", 1),)),
            Edge("Motion_Detected", "Take_Picture", assign=(("operationPicked", 0),), resets=(PICTURE_CLOCK,)),
            Edge("Motion_Detected", "Record_Video", assign=(("operationPicked", 1),), resets=(VIDEO_CLOCK,)),
            Edge("Take_Picture", "Send_Email"),
            Edge("Send_Email", "Check_Motion"),
            Edge("Record_Video", "Convert_to_MP4"),
            Edge("Convert_to_MP4", "Check_Motion"),
        ),
    )


MOTION_QUERIES = (
    "E<>(operationPicked == 0)",
    "E<>(operationPicked == 1)",
    f"E[]({PICTURE_CLOCK} <= 2)",
    f"E[]({VIDEO_CLOCK} <= 4)",
    "A[](not deadlock)",
)
