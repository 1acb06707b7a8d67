"""Seeded generator of small timed automata and queries for differential tests.

Constraints are closed (``<=``, ``>=``, ``==``): on closed automata the
integer-time oracle is exact, so any disagreement is a checker bug.
"""

import random

from motionpi.verifier.model import Atom, Edge, IntVar, Location, TimedAutomaton

MAX_CONST = 5


def random_automaton(rng: random.Random, *, n_clocks: int | None = None) -> TimedAutomaton:
    nc = rng.randint(0, 2) if n_clocks is None else n_clocks
    clocks = [f"x{i}" for i in range(nc)]
    nl = rng.randint(1, 6)
    locs = []
    for i in range(nl):
        inv = []
        if clocks and rng.random() < 0.5:
            inv = [Atom(rng.choice(clocks), "<=", rng.randint(0, MAX_CONST))]
        locs.append(Location(f"L{i}", inv, committed=rng.random() < 0.2))
    edges = []
    for _ in range(rng.randint(0, 10)):
        src, dst = rng.randrange(nl), rng.randrange(nl)
        guard = []
        for _ in range(rng.randint(0, 2)):
            if clocks and rng.random() < 0.8:
                guard.append(Atom(rng.choice(clocks), rng.choice(["<=", ">=", "=="]), rng.randint(0, MAX_CONST)))
            else:
                guard.append(Atom("a", "==", rng.randint(0, 1)))
        resets = [c for c in clocks if rng.random() < 0.4]
        assign = [("a", rng.randint(0, 1))] if rng.random() < 0.4 else []
        edges.append(Edge(f"L{src}", f"L{dst}", guard, assign, resets))
    return TimedAutomaton(locs, edges, "L0", clocks, [IntVar("a", 0, 0, 1)])


def random_queries(rng: random.Random, model: TimedAutomaton) -> list[str]:
    names = list(model.clocks) + ["a"]
    out = ["A[](not deadlock)"]
    for path in ("E<>", "E[]"):
        atoms = []
        for _ in range(rng.randint(1, 2)):
            name = rng.choice(names)
            value = rng.randint(0, 1) if name == "a" else rng.randint(0, MAX_CONST)
            atoms.append(f"{name} {rng.choice(['<=', '>=', '=='])} {value}")
        out.append(f"{path}({' && '.join(atoms)})")
    return out
