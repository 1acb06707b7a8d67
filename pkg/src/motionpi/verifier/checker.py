"""Zone-graph model checking.

A symbolic state holds the zone on *entry* to its location.  Exploration
is breadth-first with edges in declaration order, so verdicts and witness
traces are reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .dbm import (
    Dbm,
    constrain_all,
    dbm_and,
    dbm_extrapolate,
    dbm_includes,
    dbm_is_empty,
    dbm_is_unbounded,
    dbm_reset,
    dbm_up,
)
from .model import Atom, Edge, TimedAutomaton, atom_constraints, negated_constraints, one_sided
from .query import AlwaysNotDeadlock, ExistsAlways, ExistsEventually, Query, bind

DEFAULT_STATE_BUDGET = 1_000_000


class Result(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


class StateBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ZoneState:
    location: str
    ints: tuple[int, ...]
    zone: Dbm


@dataclass
class Verdict:
    query: Query
    result: Result
    witness: list[str] | None = None
    states: int = 0

    @property
    def satisfied(self) -> bool:
        return self.result is Result.SAT


@dataclass
class _Compiled:
    model: TimedAutomaton
    ceilings: list[int]
    inv: dict[str, list] = field(default_factory=dict)

    @classmethod
    def of(cls, model: TimedAutomaton, extra: tuple[Atom, ...] = ()) -> "_Compiled":
        c = cls(model, model.clock_ceilings(extra))
        for loc in model.locations:
            c.inv[loc.name] = [k for a in loc.invariant for k in atom_constraints(model, a)]
        return c

    def split(self, atoms) -> tuple[list, list[Atom]]:
        clocks, ints = [], []
        for a in atoms:
            if a.name in self.model.clocks:
                clocks += atom_constraints(self.model, a)
            else:
                ints.append(a)
        return clocks, ints

    def ints_hold(self, atoms, ints: tuple[int, ...]) -> bool:
        return all(a.holds(ints[self.model.int_index(a.name)]) for a in atoms)

    def assign(self, edge: Edge, ints: tuple[int, ...]) -> tuple[int, ...]:
        out = list(ints)
        for name, value in edge.assign:
            out[self.model.int_index(name)] = value
        return tuple(out)

    def initial(self) -> ZoneState | None:
        m = self.model
        z = constrain_all(Dbm.zero(len(m.clocks)), self.inv[m.initial])
        return None if dbm_is_empty(z) else ZoneState(m.initial, m.initial_ints(), z)

    def closure(self, state: ZoneState) -> Dbm:
        if self.model.location(state.location).committed:
            return state.zone
        return constrain_all(dbm_up(state.zone), self.inv[state.location])

    def fire(self, edge: Edge, ints: tuple[int, ...], zone: Dbm) -> ZoneState | None:
        clock_guard, int_guard = self.split(edge.guard)
        if not self.ints_hold(int_guard, ints):
            return None
        z = constrain_all(zone, clock_guard)
        if dbm_is_empty(z):
            return None
        for c in edge.resets:
            z = dbm_reset(z, self.model.clock_index(c))
        z = constrain_all(z, self.inv[edge.dst])
        if dbm_is_empty(z):
            return None
        return ZoneState(edge.dst, self.assign(edge, ints), z)

    def transitions(self, state: ZoneState, closed: Dbm | None = None) -> list[tuple[Edge, ZoneState]]:
        if closed is None:
            closed = self.closure(state)
        out = []
        for edge in self.model.edges_from(state.location):
            nxt = self.fire(edge, state.ints, closed)
            if nxt is not None:
                out.append((edge, nxt))
        return out

    def normalize(self, state: ZoneState) -> ZoneState:
        return ZoneState(state.location, state.ints, dbm_extrapolate(state.zone, self.ceilings))


def successors(model: TimedAutomaton, state: ZoneState) -> list[ZoneState]:
    """Delay (unless committed) then every enabled edge, in declaration order."""
    return [s for _, s in _Compiled.of(model).transitions(state)]


def initial_state(model: TimedAutomaton) -> ZoneState | None:
    return _Compiled.of(model).initial()


class _Tree:
    """Parent pointers for witness reconstruction."""

    def __init__(self):
        self.parent: list[int] = []
        self.label: list[str] = []

    def add(self, parent: int, label: str) -> int:
        self.parent.append(parent)
        self.label.append(label)
        return len(self.parent) - 1

    def trace(self, node: int) -> list[str]:
        out = []
        while node >= 0:
            out.append(self.label[node])
            node = self.parent[node]
        return out[::-1]


def _describe(state: ZoneState, model: TimedAutomaton) -> str:
    ints = ", ".join(f"{v.name}={x}" for v, x in zip(model.int_vars, state.ints))
    return f"{state.location}({ints})" if ints else state.location


def _edge_step(edge: Edge) -> str:
    return f"delay; {edge.label()}"


def _explore(c: _Compiled, start: ZoneState, budget: int, visit) -> tuple[int, object]:
    """Breadth-first search with inclusion pruning.

    ``visit(state, closed_zone, node, tree)`` returns a non-None value to stop.
    """
    tree = _Tree()
    root = tree.add(-1, f"init {_describe(start, c.model)}")
    start = c.normalize(start)
    passed: dict[tuple, list[Dbm]] = {(start.location, start.ints): [start.zone]}
    queue = deque([(start, root)])
    count = 1
    while queue:
        state, node = queue.popleft()
        closed = c.closure(state)
        hit = visit(state, closed, node, tree)
        if hit is not None:
            return count, hit
        for edge, nxt in c.transitions(state, closed):
            nxt = c.normalize(nxt)
            key = (nxt.location, nxt.ints)
            zones = passed.setdefault(key, [])
            if any(dbm_includes(z, nxt.zone) for z in zones):
                continue
            zones[:] = [z for z in zones if not dbm_includes(nxt.zone, z)] + [nxt.zone]
            count += 1
            if count > budget:
                raise StateBudgetExceeded(f"more than {budget} symbolic states")
            queue.append((nxt, tree.add(node, f"{_edge_step(edge)} -> {_describe(nxt, c.model)}")))
    return count, None


def _check_reach(c: _Compiled, q: ExistsEventually, start, budget) -> Verdict:
    clocks, ints = c.split(q.pred)

    def visit(state, closed, node, tree):
        if c.ints_hold(ints, state.ints) and not dbm_is_empty(constrain_all(closed, clocks)):
            return tree.trace(node) + [f"reach {' && '.join(map(str, q.pred))}"]
        return None

    count, hit = _explore(c, start, budget, visit)
    return Verdict(q, Result.SAT if hit else Result.UNSAT, hit, count)


def _subtract(zone: Dbm, model: TimedAutomaton, atoms: list[Atom]) -> list[Dbm]:
    """``zone`` minus the conjunction of one-sided clock atoms, as disjoint pieces."""
    pieces, cur = [], zone
    for a in atoms:
        (neg,) = negated_constraints(model, a)
        part = dbm_and(cur, neg)
        if not dbm_is_empty(part):
            pieces.append(part)
        cur = constrain_all(cur, atom_constraints(model, a))
        if dbm_is_empty(cur):
            break
    return pieces


def deadlock_region(c: _Compiled, state: ZoneState, closed: Dbm) -> list[Dbm]:
    """Valuations of the closed zone that can neither delay nor take an edge."""
    m = c.model
    loc = m.location(state.location)
    if loc.committed:
        stuck = [closed]
    else:
        stuck = []
        for a in loc.invariant:
            if a.op == "<=":
                z = constrain_all(closed, atom_constraints(m, Atom(a.name, ">=", a.value)))
                if not dbm_is_empty(z):
                    stuck.append(z)
    for edge in m.edges_from(state.location):
        if not stuck:
            break
        clock_guard = [a for a in edge.guard if a.name in m.clocks]
        int_guard = [a for a in edge.guard if a.name not in m.clocks]
        if not c.ints_hold(int_guard, state.ints):
            continue
        target = m.location(edge.dst).invariant
        if any(a.name in edge.resets and not a.holds(0) for a in target):
            continue
        enabling = one_sided(clock_guard + [a for a in target if a.name not in edge.resets])
        if not enabling:
            return []
        stuck = [p for z in stuck for p in _subtract(z, m, enabling)]
    return stuck


def _check_deadlock(c: _Compiled, q: AlwaysNotDeadlock, start, budget) -> Verdict:
    def visit(state, closed, node, tree):
        if deadlock_region(c, state, closed):
            return tree.trace(node) + ["deadlock"]
        return None

    count, hit = _explore(c, start, budget, visit)
    return Verdict(q, Result.UNSAT if hit else Result.SAT, hit, count)


def _check_always(c: _Compiled, q: ExistsAlways, start, budget) -> Verdict:
    """Exact φ-restricted zone graph, then a lasso or time-divergence search."""
    clocks, ints = c.split(q.pred)
    m = c.model

    def restrict(state: ZoneState) -> ZoneState | None:
        if not c.ints_hold(ints, state.ints):
            return None
        z = constrain_all(state.zone, clocks)
        return None if dbm_is_empty(z) else ZoneState(state.location, state.ints, z)

    root = restrict(start)
    if root is None:
        return Verdict(q, Result.UNSAT, None, 1)
    index: dict[ZoneState, int] = {}
    nodes: list[ZoneState] = []
    adj: list[list[int]] = []
    tree = _Tree()

    def add(state: ZoneState, parent: int, label: str) -> int:
        state = c.normalize(state)
        if state in index:
            return index[state]
        if len(nodes) >= budget:
            raise StateBudgetExceeded(f"more than {budget} symbolic states")
        index[state] = len(nodes)
        nodes.append(state)
        adj.append([])
        tree.add(parent, label)
        return index[state]

    add(root, -1, f"init {_describe(root, m)}")
    i = 0
    while i < len(nodes):
        state = nodes[i]
        committed = m.location(state.location).committed
        closed = constrain_all(c.closure(state), clocks)
        if not committed and dbm_is_unbounded(closed):
            return Verdict(q, Result.SAT, tree.trace(i) + ["delay forever"], len(nodes))
        for edge, nxt in c.transitions(state, closed):
            nxt = restrict(nxt)
            if nxt is None:
                continue
            j = add(nxt, i, f"{_edge_step(edge)} -> {_describe(nxt, m)}")
            adj[i].append(j)
        i += 1

    # iterative depth-first search for a back edge
    color = [0] * len(nodes)
    stack = [(0, 0)]
    path = [0]
    color[0] = 1
    while stack:
        node, k = stack[-1]
        if k < len(adj[node]):
            stack[-1] = (node, k + 1)
            nxt = adj[node][k]
            if color[nxt] == 1:
                loop = path[path.index(nxt):]
                names = " -> ".join(_describe(nodes[n], m) for n in loop + [nxt])
                return Verdict(q, Result.SAT, tree.trace(nxt) + [f"loop {names}"], len(nodes))
            if color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, 0))
                path.append(nxt)
        else:
            color[node] = 2
            stack.pop()
            path.pop()
    return Verdict(q, Result.UNSAT, None, len(nodes))


def check(
    model: TimedAutomaton,
    query: Query | str,
    *,
    budget: int = DEFAULT_STATE_BUDGET,
    start: ZoneState | None = None,
) -> Verdict:
    """Decide ``query`` from the initial state (or from ``start``)."""
    query = bind(query, model)
    extra = getattr(query, "pred", ())
    c = _Compiled.of(model, extra)
    if start is None:
        start = c.initial()
    if start is None:
        # the initial valuation violates the initial invariant: nothing is reachable
        result = Result.SAT if isinstance(query, AlwaysNotDeadlock) else Result.UNSAT
        return Verdict(query, result, None, 0)
    if isinstance(query, ExistsEventually):
        return _check_reach(c, query, start, budget)
    if isinstance(query, AlwaysNotDeadlock):
        return _check_deadlock(c, query, start, budget)
    if isinstance(query, ExistsAlways):
        return _check_always(c, query, start, budget)
    raise TypeError(f"unsupported query {query!r}")


def reachable_states(model: TimedAutomaton, *, budget: int = DEFAULT_STATE_BUDGET) -> list[ZoneState]:
    """Every symbolic state kept by the breadth-first search, in visiting order."""
    c = _Compiled.of(model)
    start = c.initial()
    if start is None:
        return []
    seen: list[ZoneState] = []

    def visit(state, closed, node, tree):
        seen.append(state)
        return None

    _explore(c, start, budget, visit)
    return seen


def can_reach_location(
    model: TimedAutomaton, start: ZoneState, location: str, *, budget: int = DEFAULT_STATE_BUDGET
) -> bool:
    """Whether some run from ``start`` enters ``location`` after at least one edge."""
    c = _Compiled.of(model)

    def visit(state, closed, node, tree):
        return True if node > 0 and state.location == location else None

    return _explore(c, start, budget, visit)[1] is not None
