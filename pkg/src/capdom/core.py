"""Problem instances, demand assignments and their evaluation.

All numeric data is held as :class:`fractions.Fraction` so that the ceiling
in the multiplicity formula and every feasibility comparison is exact.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

Number = Union[int, str, Fraction]

#: Sparse demand assignment: ``(v, u) -> amount of v's demand served by u``.
Assignment = dict[tuple[int, int], Fraction]


class InstanceError(ValueError):
    """An instance description violates the model rules."""


class InfeasibleAssignmentError(ValueError):
    """An operation that requires a feasible assignment received an infeasible one."""


def as_fraction(value: Number) -> Fraction:
    """Convert ints, ``"p/q"`` strings, decimal strings or Fractions exactly.

    Floats are rejected: they rarely mean what they look like.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact numeric value {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


def format_fraction(value: Fraction) -> str:
    """Canonical text form: ``"p"`` for integers, ``"p/q"`` otherwise."""
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Instance:
    """A capacitated domination instance on dense vertex ids ``0..n-1``.

    Use :meth:`build` (or :func:`validate_instance` for raw, externally
    named data) rather than the constructor; it validates and normalises
    the edge list.
    """

    cost: tuple[Fraction, ...]
    capacity: tuple[Fraction, ...]
    demand: tuple[Fraction, ...]
    edges: tuple[tuple[int, int], ...]
    names: tuple[str, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    closed: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        adj: list[list[int]] = [[] for _ in range(len(self.cost))]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for nbrs in adj:
            nbrs.sort()
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))
        object.__setattr__(
            self, "closed", tuple(tuple(sorted((v, *adj[v]))) for v in range(len(adj)))
        )

    @classmethod
    def build(
        cls,
        cost: Sequence[Number],
        capacity: Sequence[Number],
        demand: Sequence[Number],
        edges: Iterable[tuple[int, int]],
        names: Sequence[str] | None = None,
    ) -> Instance:
        n = len(cost)
        if len(capacity) != n or len(demand) != n:
            raise InstanceError("cost, capacity and demand must have equal length")
        names = tuple(str(i) for i in range(n)) if names is None else tuple(names)
        if len(names) != n:
            raise InstanceError("one name per vertex required")
        if len(set(names)) != n:
            raise InstanceError("duplicate vertex id")
        w = tuple(as_fraction(x) for x in cost)
        c = tuple(as_fraction(x) for x in capacity)
        d = tuple(as_fraction(x) for x in demand)
        for v in range(n):
            if c[v] <= 0:
                raise InstanceError(f"vertex {names[v]}: capacity must be strictly positive")
            if w[v] < 0:
                raise InstanceError(f"vertex {names[v]}: cost must be non-negative")
            if d[v] < 0:
                raise InstanceError(f"vertex {names[v]}: demand must be non-negative")
        seen: set[tuple[int, int]] = set()
        for a, b in edges:
            for x in (a, b):
                if not (isinstance(x, int) and 0 <= x < n):
                    raise InstanceError(f"edge ({a}, {b}): dangling endpoint {x}")
            if a == b:
                raise InstanceError(f"edge ({names[a]}, {names[b]}): self-loop")
            key = (a, b) if a < b else (b, a)
            if key in seen:
                raise InstanceError(f"edge ({names[a]}, {names[b]}): duplicate edge")
            seen.add(key)
        return cls(w, c, d, tuple(sorted(seen)), names)

    @property
    def n(self) -> int:
        return len(self.cost)

    def closed_degree(self, v: int) -> int:
        return len(self.closed[v])

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InstanceError(f"unknown vertex {name!r}") from None

    def total_demand(self) -> Fraction:
        return sum(self.demand, Fraction(0))

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest member."""
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [s], [s]
            while stack:
                v = stack.pop()
                for u in self.adjacency[v]:
                    if not seen[u]:
                        seen[u] = True
                        comp.append(u)
                        stack.append(u)
            out.append(sorted(comp))
        return out

    def restrict(
        self,
        vertices: Iterable[int],
        edges: Iterable[tuple[int, int]] | None = None,
        demand: Mapping[int, Fraction] | None = None,
    ) -> tuple[Instance, tuple[int, ...]]:
        """Sub-instance on ``vertices`` with local ids in ascending parent order.

        ``edges`` defaults to the induced edge set; ``demand`` (keyed by
        parent id) overrides demands, missing keys keep the parent value.
        Returns the sub-instance and the local-to-parent id map.
        """
        origin = tuple(sorted(set(vertices)))
        local = {v: i for i, v in enumerate(origin)}
        if edges is None:
            edges = [(a, b) for a, b in self.edges if a in local and b in local]
        sub_edges = tuple(sorted((local[a], local[b]) if local[a] < local[b] else (local[b], local[a])
                                 for a, b in edges))
        d = tuple(
            (demand.get(v, self.demand[v]) if demand is not None else self.demand[v]) for v in origin
        )
        sub = Instance(
            tuple(self.cost[v] for v in origin),
            tuple(self.capacity[v] for v in origin),
            d,
            sub_edges,
            tuple(self.names[v] for v in origin),
        )
        return sub, origin


def validate_instance(raw: Mapping[str, Any]) -> Instance:
    """Validate a raw description with external string ids.

    ``raw`` has ``"vertices"``, a list of mappings with keys ``id``,
    ``cost``, ``capacity`` and ``demand``, and ``"edges"``, a list of
    id pairs. Dense integer ids follow the vertex list order.
    """
    vertices = raw.get("vertices")
    if not isinstance(vertices, list):
        raise InstanceError("instance needs a 'vertices' list")
    names, w, c, d = [], [], [], []
    for rec in vertices:
        try:
            names.append(str(rec["id"]))
            w.append(as_fraction(rec["cost"]))
            c.append(as_fraction(rec["capacity"]))
            d.append(as_fraction(rec["demand"]))
        except KeyError as exc:
            raise InstanceError(f"vertex record {rec!r} lacks field {exc.args[0]!r}") from None
    ids = {name: i for i, name in enumerate(names)}
    if len(ids) != len(names):
        dup = next(x for x in names if names.count(x) > 1)
        raise InstanceError(f"duplicate vertex id {dup!r}")
    edges = []
    for pair in raw.get("edges", []):
        a, b = (str(x) for x in pair)
        for x in (a, b):
            if x not in ids:
                raise InstanceError(f"edge ({a}, {b}): dangling endpoint {x!r}")
        edges.append((ids[a], ids[b]))
    return Instance.build(w, c, d, edges, names)


def inbound(f: Mapping[tuple[int, int], Fraction], n: int) -> list[Fraction]:
    """Total demand served by each vertex."""
    load = [Fraction(0)] * n
    for (_, u), amount in f.items():
        load[u] += amount
    return load


def _check_support(f: Mapping[tuple[int, int], Fraction], inst: Instance) -> None:
    for (v, u), amount in f.items():
        if amount < 0:
            raise InstanceError(f"negative assignment f({v}, {u}) = {amount}")
        if not (0 <= v < inst.n and 0 <= u < inst.n) or (u != v and u not in inst.adjacency[v]):
            raise InstanceError(f"assignment ({v}, {u}) outside the closed neighbourhood")


def multiplicity_of(f: Mapping[tuple[int, int], Fraction], inst: Instance) -> tuple[int, ...]:
    """``x(v) = ceil(inbound(v) / c(v))`` for every vertex."""
    _check_support(f, inst)
    return tuple(math.ceil(a / c) for a, c in zip(inbound(f, inst.n), inst.capacity))


def cost_of(x: Sequence[int], inst: Instance) -> Fraction:
    return sum((w * k for w, k in zip(inst.cost, x)), Fraction(0))


@dataclass(frozen=True)
class SolutionReport:
    assignment: Assignment
    multiplicity: tuple[int, ...]
    cost: Fraction
    feasible: bool
    violations: dict[int, Fraction]  # vertex -> unmet demand


def shortfalls(f: Mapping[tuple[int, int], Fraction], inst: Instance) -> dict[int, Fraction]:
    served = [Fraction(0)] * inst.n
    for (v, _), amount in f.items():
        served[v] += amount
    return {v: inst.demand[v] - served[v] for v in range(inst.n) if served[v] < inst.demand[v]}


def check_feasible(f: Mapping[tuple[int, int], Fraction], inst: Instance) -> SolutionReport:
    x = multiplicity_of(f, inst)
    missing = shortfalls(f, inst)
    return SolutionReport(dict(f), x, cost_of(x, inst), not missing, missing)


def normalize(f: Mapping[tuple[int, int], Fraction], inst: Instance) -> Assignment:
    """Clamp every ``f(v, u)`` to at most ``d(v)`` and drop zero entries.

    Feasibility is preserved and no vertex load grows, so the cost cannot
    increase. Afterwards ``d(v) * x(u) >= f(v, u)`` holds for every pair.
    """
    _check_support(f, inst)
    if shortfalls(f, inst):
        raise InfeasibleAssignmentError("normalize requires a feasible assignment")
    out: Assignment = {}
    for (v, u), amount in f.items():
        amount = min(amount, inst.demand[v])
        if amount > 0:
            out[v, u] = amount
    return out


def combine(assignments: Iterable[Mapping[tuple[int, int], Fraction]]) -> Assignment:
    """Pointwise sum."""
    out: Assignment = {}
    for f in assignments:
        for key, amount in f.items():
            out[key] = out.get(key, Fraction(0)) + amount
    return out
