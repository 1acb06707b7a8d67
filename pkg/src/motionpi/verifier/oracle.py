"""Brute-force integer-time semantics, used to cross-check the zone engine.

Clock values are integers clamped at ``max constant + 1`` and time
advances in unit steps.  For closed (non-strict) constraints with integer
constants this explores the same behaviors as dense time.
"""

from __future__ import annotations

from collections import deque

from .checker import Result
from .model import TimedAutomaton
from .query import AlwaysNotDeadlock, ExistsAlways, ExistsEventually, Query, bind

MAX_ORACLE_CONSTANT = 16
MAX_ORACLE_CLOCKS = 3
DEFAULT_ORACLE_BUDGET = 2_000_000


class OracleError(RuntimeError):
    pass


def oracle_check(model: TimedAutomaton, query: Query | str, *, budget: int = DEFAULT_ORACLE_BUDGET) -> Result:
    query = bind(query, model)
    pred = getattr(query, "pred", ())
    consts = [model.max_constant()] + [abs(a.value) for a in pred if a.name in model.clocks]
    top = max(consts)
    if top > MAX_ORACLE_CONSTANT or len(model.clocks) > MAX_ORACLE_CLOCKS:
        raise OracleError("model outside oracle limits (constants <= 16, at most 3 clocks)")
    clamp = top + 1
    clocks = {c: i for i, c in enumerate(model.clocks)}
    ints = {v.name: i for i, v in enumerate(model.int_vars)}

    def value(atom, ints_v, clocks_v):
        return clocks_v[clocks[atom.name]] if atom.name in clocks else ints_v[ints[atom.name]]

    def holds(atoms, ints_v, clocks_v) -> bool:
        return all(a.holds(value(a, ints_v, clocks_v)) for a in atoms)

    def inv(loc, clocks_v) -> bool:
        return holds(model.location(loc).invariant, (), clocks_v)

    def delay(state):
        loc, iv, cv = state
        if model.location(loc).committed:
            return None
        nxt = tuple(min(x + 1, clamp) for x in cv)
        return (loc, iv, nxt) if inv(loc, nxt) else None

    def actions(state):
        loc, iv, cv = state
        for e in model.edges_from(loc):
            if not holds(e.guard, iv, cv):
                continue
            niv = list(iv)
            for name, v in e.assign:
                niv[ints[name]] = v
            ncv = tuple(0 if c in e.resets else x for c, x in zip(model.clocks, cv))
            if inv(e.dst, ncv):
                yield (e.dst, tuple(niv), ncv)

    def succ(state):
        out = []
        d = delay(state)
        if d is not None:
            out.append(d)
        out.extend(actions(state))
        return out

    start = (model.initial, model.initial_ints(), tuple(0 for _ in model.clocks))
    if not inv(model.initial, start[2]):
        return Result.SAT if isinstance(query, AlwaysNotDeadlock) else Result.UNSAT

    def phi(state) -> bool:
        return holds(pred, state[1], state[2])

    def reach(ok, step):
        seen = {start}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            if ok(s):
                return True, seen
            for n in step(s):
                if n not in seen:
                    seen.add(n)
                    if len(seen) > budget:
                        raise OracleError(f"oracle state space exceeds {budget} states")
                    queue.append(n)
        return False, seen

    if isinstance(query, ExistsEventually):
        found, _ = reach(phi, succ)
        return Result.SAT if found else Result.UNSAT
    if isinstance(query, AlwaysNotDeadlock):
        found, _ = reach(lambda s: not succ(s), succ)
        return Result.UNSAT if found else Result.SAT
    if isinstance(query, ExistsAlways):
        if not phi(start):
            return Result.UNSAT

        def step(s):
            return [n for n in succ(s) if phi(n)]

        _, seen = reach(lambda s: False, step)
        # a cycle exists iff repeatedly removing states without successors in the subgraph leaves something
        out_deg = {s: 0 for s in seen}
        preds: dict = {s: [] for s in seen}
        for s in seen:
            for n in set(step(s)):
                out_deg[s] += 1
                preds[n].append(s)
        queue = deque(s for s, k in out_deg.items() if k == 0)
        removed = 0
        while queue:
            s = queue.popleft()
            removed += 1
            for p in preds[s]:
                out_deg[p] -= 1
                if out_deg[p] == 0:
                    queue.append(p)
        # every remaining state can continue forever; some is reachable since all of `seen` is
        return Result.SAT if removed < len(seen) else Result.UNSAT
    raise TypeError(f"unsupported query {query!r}")
