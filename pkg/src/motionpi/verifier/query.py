"""Query language: ``E<>(pred)``, ``E[](pred)`` and ``A[](not deadlock)``.

A predicate is a conjunction (``&&`` or ``and``) of atoms ``name op int``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import Atom, TimedAutomaton, conj_text


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ValueError):
    pass


@dataclass(frozen=True)
class ExistsEventually:
    pred: tuple[Atom, ...]

    def __str__(self) -> str:
        return f"E<>({conj_text(self.pred)})"


@dataclass(frozen=True)
class ExistsAlways:
    pred: tuple[Atom, ...]

    def __str__(self) -> str:
        return f"E[]({conj_text(self.pred)})"


@dataclass(frozen=True)
class AlwaysNotDeadlock:
    def __str__(self) -> str:
        return "A[](not deadlock)"


Query = ExistsEventually | ExistsAlways | AlwaysNotDeadlock

_TOKEN = re.compile(
    r"\s*(?:(?P<path>E<>|E\[\]|A\[\])|(?P<op>==|<=|>=|<|>)|(?P<and>&&)"
    r"|(?P<num>-?\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[()]))"
)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while True:
        ws = len(text) - len(text[pos:].lstrip())
        if ws >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QuerySyntaxError(f"unexpected character {text[ws]!r}", ws, text)
        kind = m.lastgroup
        value = m.group(kind)
        out.append((kind, value, m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, value: str | None = None, what: str | None = None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            expected = what or (repr(value) if value else kind)
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise QuerySyntaxError(f"expected {expected}, found {found}", tok[2], self.text)
        self.i += 1
        return tok

    def query(self) -> Query:
        path = self.take("path", what="'E<>', 'E[]' or 'A[]'")[1]
        self.take("punct", "(")
        if path == "A[]":
            self.take("ident", "not", what="'not deadlock'")
            self.take("ident", "deadlock", what="'deadlock'")
            q = AlwaysNotDeadlock()
        else:
            pred = self.pred()
            q = ExistsEventually(pred) if path == "E<>" else ExistsAlways(pred)
        self.take("punct", ")")
        self.take("end", what="end of input")
        return q

    def pred(self) -> tuple[Atom, ...]:
        atoms = [self.atom()]
        while self.peek()[0] == "and" or self.peek()[:2] == ("ident", "and"):
            self.i += 1
            atoms.append(self.atom())
        return tuple(atoms)

    def atom(self) -> Atom:
        tok = self.peek()
        if tok[0] == "ident" and tok[1] in ("not", "and", "deadlock"):
            raise QuerySyntaxError(f"expected identifier, found {tok[1]!r}", tok[2], self.text)
        name = self.take("ident", what="identifier")[1]
        op = self.take("op", what="comparison operator")[1]
        value = int(self.take("num", what="integer")[1])
        return Atom(name, op, value)


def parse_query(text: str) -> Query:
    return _Parser(text).query()


def bind(query: Query | str, model: TimedAutomaton) -> Query:
    """Parse if needed and check every name against ``model``."""
    if isinstance(query, str):
        query = parse_query(query)
    known = set(model.clocks) | {v.name for v in model.int_vars}
    for a in getattr(query, "pred", ()):
        if a.name not in known:
            raise UnknownIdentifierError(f"unknown identifier {a.name!r} in {query}")
    return query
