"""Difference bound matrices.

Entry ``(i, j)`` bounds the clock difference ``x_i - x_j``; index 0 is the
reference clock that is always zero.  A bound ``(value, strictness)`` is
packed into one integer ``2 * value + (1 if non-strict else 0)`` so that the
natural integer order is the order of bounds, and ``INF`` stands for no
bound at all.
"""

from __future__ import annotations

from typing import Iterable, Sequence

INF = 1 << 62
LE_ZERO = 1
LT_ZERO = 0


def bound(value: int, strict: bool = False) -> int:
    return (value << 1) | (0 if strict else 1)


def bound_value(raw: int) -> int | None:
    return None if raw >= INF else raw >> 1


def bound_strict(raw: int) -> bool:
    return raw < INF and not raw & 1


def add(a: int, b: int) -> int:
    if a >= INF or b >= INF:
        return INF
    return a + b - ((a | b) & 1)


def format_bound(raw: int) -> str:
    if raw >= INF:
        return "<inf"
    return f"{'<' if bound_strict(raw) else '<='}{bound_value(raw)}"


class DbmError(ValueError):
    pass


class Dbm:
    """An immutable zone over ``dim - 1`` clocks."""

    __slots__ = ("dim", "m", "_hash")

    def __init__(self, dim: int, m: Sequence[int]):
        if len(m) != dim * dim:
            raise DbmError("matrix size does not match dimension")
        self.dim = dim
        self.m = tuple(m)
        self._hash = None

    @classmethod
    def zero(cls, n_clocks: int) -> "Dbm":
        """The point zone where every clock is 0."""
        dim = n_clocks + 1
        return cls(dim, [LE_ZERO] * (dim * dim))

    @classmethod
    def universe(cls, n_clocks: int) -> "Dbm":
        """All non-negative clock valuations."""
        dim = n_clocks + 1
        m = [INF] * (dim * dim)
        for i in range(dim):
            m[i * dim + i] = LE_ZERO
            m[i] = LE_ZERO  # row 0: 0 - x_j <= 0
        return cls(dim, m)

    @classmethod
    def empty(cls, n_clocks: int) -> "Dbm":
        dim = n_clocks + 1
        m = [LE_ZERO] * (dim * dim)
        m[0] = LT_ZERO
        return cls(dim, m)

    @property
    def n_clocks(self) -> int:
        return self.dim - 1

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.m[i * self.dim + j]

    def __eq__(self, other) -> bool:
        return isinstance(other, Dbm) and self.dim == other.dim and self.m == other.m

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, self.m))
        return self._hash

    def __repr__(self) -> str:
        if dbm_is_empty(self):
            return "Dbm(empty)"
        rows = [" ".join(f"{format_bound(self[i, j]):>6}" for j in range(self.dim)) for i in range(self.dim)]
        return "Dbm(\n  " + "\n  ".join(rows) + "\n)"

    def contains(self, valuation: Sequence) -> bool:
        """Whether a clock valuation (one value per clock) lies in the zone."""
        v = (0, *valuation)
        if len(v) != self.dim:
            raise DbmError("valuation size does not match the zone")
        for i in range(self.dim):
            for j in range(self.dim):
                raw = self[i, j]
                if raw >= INF:
                    continue
                diff, c = v[i] - v[j], bound_value(raw)
                if diff > c or (diff == c and bound_strict(raw)):
                    return False
        return True


def _check_clock(d: Dbm, k: int) -> None:
    if not 0 < k < d.dim:
        raise DbmError(f"unknown clock index {k}")


def dbm_canonical(d: Dbm) -> Dbm:
    """All-pairs shortest-path closure; an inconsistent zone becomes the empty zone."""
    n = d.dim
    m = list(d.m)
    for k in range(n):
        rk = k * n
        for i in range(n):
            ri = i * n
            dik = m[ri + k]
            if dik >= INF:
                continue
            for j in range(n):
                dkj = m[rk + j]
                if dkj >= INF:
                    continue
                s = dik + dkj - ((dik | dkj) & 1)
                if s < m[ri + j]:
                    m[ri + j] = s
    if any(m[i * n + i] < LE_ZERO for i in range(n)):
        return Dbm.empty(n - 1)
    return Dbm(n, m)


def dbm_is_empty(d: Dbm) -> bool:
    return d.m[0] < LE_ZERO


def dbm_up(d: Dbm) -> Dbm:
    """Future of the zone: remove the upper bound of every clock."""
    if dbm_is_empty(d):
        return d
    n = d.dim
    m = list(d.m)
    for i in range(1, n):
        m[i * n] = INF
    return Dbm(n, m)


def dbm_reset(d: Dbm, clock: int, value: int = 0) -> Dbm:
    _check_clock(d, clock)
    if dbm_is_empty(d):
        return d
    n = d.dim
    m = list(d.m)
    pos, neg = bound(value), bound(-value)
    for j in range(n):
        m[clock * n + j] = add(pos, d.m[j])
        m[j * n + clock] = add(d.m[j * n], neg)
    m[clock * n + clock] = LE_ZERO
    return Dbm(n, m)


def dbm_and(d: Dbm, constraint: tuple[int, int, int]) -> Dbm:
    """Intersect with ``x_i - x_j`` bounded by ``raw`` where ``constraint = (i, j, raw)``.

    ``d`` must be canonical; so is the result.
    """
    i, j, raw = constraint
    if not (0 <= i < d.dim and 0 <= j < d.dim) or i == j:
        raise DbmError(f"bad constraint indices ({i}, {j})")
    if dbm_is_empty(d):
        return d
    n = d.dim
    if add(d.m[j * n + i], raw) < LE_ZERO:
        return Dbm.empty(n - 1)
    if raw >= d.m[i * n + j]:
        return d
    m = list(d.m)
    m[i * n + j] = raw
    for a in range(n):
        dai = m[a * n + i]
        if dai >= INF:
            continue
        via = add(dai, raw)
        for b in range(n):
            s = add(via, m[j * n + b])
            if s < m[a * n + b]:
                m[a * n + b] = s
    return Dbm(n, m)


def dbm_includes(outer: Dbm, inner: Dbm) -> bool:
    """Whether ``inner`` is a subset of ``outer`` (both canonical)."""
    if dbm_is_empty(inner):
        return True
    if dbm_is_empty(outer):
        return False
    return all(a <= b for a, b in zip(inner.m, outer.m))


def dbm_intersects(a: Dbm, b: Dbm) -> bool:
    d = Dbm(a.dim, [min(x, y) for x, y in zip(a.m, b.m)])
    return not dbm_is_empty(dbm_canonical(d))


def dbm_extrapolate(d: Dbm, ceilings: Sequence[int]) -> Dbm:
    """Classic maximal-constant extrapolation.

    ``ceilings[i]`` is the largest constant clock ``i`` is compared with
    (``ceilings[0]`` is ignored).  Bounds beyond a ceiling are widened the way
    region equivalence allows, which keeps the zone graph finite.
    """
    if dbm_is_empty(d):
        return d
    n = d.dim
    m = list(d.m)
    changed = False
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            raw = m[i * n + j]
            if raw >= INF:
                continue
            if i and raw > bound(ceilings[i]):
                m[i * n + j] = INF
                changed = True
            elif j and raw < bound(-ceilings[j], strict=True):
                m[i * n + j] = bound(-ceilings[j], strict=True)
                changed = True
    return dbm_canonical(Dbm(n, m)) if changed else d


def dbm_is_unbounded(d: Dbm) -> bool:
    """Whether time can elapse forever inside the zone."""
    return not dbm_is_empty(d) and all(d.m[i * d.dim] >= INF for i in range(1, d.dim))


def constrain_all(d: Dbm, constraints: Iterable[tuple[int, int, int]]) -> Dbm:
    for c in constraints:
        d = dbm_and(d, c)
        if dbm_is_empty(d):
            break
    return d
