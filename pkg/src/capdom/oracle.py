"""Exact ground truth for small instances.

``exact_opt`` walks multiplicity vectors in nondecreasing cost and stops at
the first one that admits a fractional assignment. Candidate vectors of
one cost level are screened in bulk with the Hall-type cut conditions
(demand of every vertex set fits into the capacity opened on its closed
neighbourhood); the winner is confirmed, and its witness assignment
built, by an exact max-flow.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import Assignment, Instance, cost_of, multiplicity_of

DEFAULT_CAP = 10


class ScaleError(ValueError):
    """The instance is too large for exhaustive treatment."""


def max_flow(n_nodes: int, arcs: Sequence[tuple[int, int, Fraction | None]], s: int, t: int):
    """Edmonds-Karp on exact rationals; ``None`` capacity means unbounded.

    Returns the flow value and the flow on each input arc.
    """
    head, cap, adj = [], [], [[] for _ in range(n_nodes)]
    for a, b, c in arcs:
        adj[a].append(len(head))
        head.append(b)
        cap.append(c)
        adj[b].append(len(head))
        head.append(a)
        cap.append(Fraction(0))
    flow = [Fraction(0)] * len(head)

    def residual(e: int):
        return None if cap[e] is None else cap[e] - flow[e]

    value = Fraction(0)
    while True:
        parent = [-1] * n_nodes
        parent[s] = -2
        queue = deque([s])
        while queue and parent[t] == -1:
            v = queue.popleft()
            for e in adj[v]:
                r = residual(e)
                if parent[head[e]] == -1 and (r is None or r > 0):
                    parent[head[e]] = e
                    queue.append(head[e])
        if parent[t] == -1:
            break
        push = None
        v = t
        while v != s:
            e = parent[v]
            r = residual(e)
            if r is not None and (push is None or r < push):
                push = r
            v = head[e ^ 1]
        if push is None:
            raise ValueError("unbounded flow")
        v = t
        while v != s:
            e = parent[v]
            flow[e] += push
            flow[e ^ 1] -= push
            v = head[e ^ 1]
        value += push
    return value, [flow[2 * i] for i in range(len(arcs))]


def _transport(x: Sequence[int], inst: Instance) -> tuple[bool, Assignment]:
    n = inst.n
    s, t = 2 * n, 2 * n + 1
    arcs: list[tuple[int, int, Fraction | None]] = []
    pairs = []
    for v in range(n):
        if inst.demand[v] > 0:
            arcs.append((s, v, inst.demand[v]))
            for u in inst.closed[v]:
                if x[u] > 0:
                    pairs.append((len(arcs), v, u))
                    arcs.append((v, n + u, None))
    for u in range(n):
        if x[u] > 0:
            arcs.append((n + u, t, inst.capacity[u] * x[u]))
    value, flows = max_flow(2 * n + 2, arcs, s, t)
    f = {(v, u): flows[i] for i, v, u in pairs if flows[i] > 0}
    return value == inst.total_demand(), f


def feasibility_flow(x: Sequence[int], inst: Instance) -> bool:
    """Whether opening ``x(u)`` copies of each ``u`` can serve all demand."""
    if len(x) != inst.n or any(k < 0 for k in x):
        raise ValueError("multiplicity vector must be non-negative with one entry per vertex")
    return _transport(x, inst)[0]


def _lcm_denominator(values) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


def hall_constraints(inst: Instance) -> tuple[list[int], list[Fraction]]:
    """Cut conditions ``sum_{u in M} c(u) x(u) >= D(M)`` as (mask, D) pairs.

    ``D(M)`` is the largest demand of a vertex set whose closed
    neighbourhood is exactly ``M``. Dominated rows are dropped.
    """
    demand_vs = [v for v in range(inst.n) if inst.demand[v] > 0]
    nb = [sum(1 << u for u in inst.closed[v]) for v in demand_vs]
    scale = _lcm_denominator(inst.demand[v] for v in demand_vs)
    dem = [int(inst.demand[v] * scale) for v in demand_vs]
    best: dict[int, int] = {}
    k = len(demand_vs)
    mask_of = [0] * (1 << k)
    dem_of = [0] * (1 << k)
    for s in range(1, 1 << k):
        low = (s & -s).bit_length() - 1
        rest = s & (s - 1)
        m = mask_of[s] = mask_of[rest] | nb[low]
        dm = dem_of[s] = dem_of[rest] + dem[low]
        if dm > best.get(m, -1):
            best[m] = dm
    rows = sorted(best.items())
    kept = [
        (m, dm) for m, dm in rows
        if not any(m2 != m and m2 & m == m2 and d2 >= dm for m2, d2 in rows)
    ]
    return [m for m, _ in kept], [Fraction(dm, scale) for _, dm in kept]


@dataclass(frozen=True)
class ExactSolution:
    multiplicity: tuple[int, ...]
    assignment: Assignment
    cost: Fraction


def exact_opt(inst: Instance, cap: int = DEFAULT_CAP) -> ExactSolution:
    """Optimal multiplicities and a witness assignment."""
    n = inst.n
    if n > cap:
        raise ScaleError(f"oracle scale exceeded: {n} vertices > cap {cap}")
    if inst.total_demand() == 0:
        return ExactSolution((0,) * n, {}, Fraction(0))
    # no useful multiplicity exceeds what the closed neighbourhood can ask for
    xmax = []
    for u in range(n):
        near = sum((inst.demand[v] for v in inst.closed[u]), Fraction(0))
        xmax.append(math.ceil(near / inst.capacity[u]))
    free = [u for u in range(n) if inst.cost[u] == 0]
    paid = [u for u in range(n) if inst.cost[u] > 0 and xmax[u] > 0]

    masks, need = hall_constraints(inst)
    scale = _lcm_denominator([*inst.capacity, *need])
    A = np.array(
        [[int(inst.capacity[u] * scale) if m >> u & 1 else 0 for u in range(n)] for m in masks],
        dtype=object,
    )
    b = np.array([int(dm * scale) for dm in need], dtype=object)
    if all(abs(int(v)) < 2**20 for v in (*A.flat, *b)):
        A, b = A.astype(np.int64), b.astype(np.int64)
    base = np.zeros(n, dtype=A.dtype)
    for u in free:
        base[u] = xmax[u]
    wscale = _lcm_denominator([inst.cost[u] for u in paid])
    W = [int(inst.cost[u] * wscale) for u in paid]
    g = 0
    for x in W:
        g = math.gcd(g, x)
    W = [x // g for x in W] if g else W
    unit = Fraction(g, wscale) if g else Fraction(0)
    m = len(paid)

    @lru_cache(maxsize=None)
    def level(i: int, k: int) -> np.ndarray:
        # all (x_i..x_{m-1}) over paid vertices with weighted sum exactly k
        if i == m:
            return np.zeros((1, 0), dtype=np.int64) if k == 0 else np.zeros((0, 0), dtype=np.int64)
        blocks = []
        for xi in range(min(xmax[paid[i]], k // W[i]) + 1):
            tail = level(i + 1, k - xi * W[i])
            if len(tail):
                blocks.append(np.hstack([np.full((len(tail), 1), xi, dtype=np.int64), tail]))
        if not blocks:
            return np.zeros((0, m - i), dtype=np.int64)
        return np.vstack(blocks)

    top = sum(W[i] * xmax[paid[i]] for i in range(m))
    for k in range(top + 1):
        cand = level(0, k)
        if not len(cand):
            continue
        X = np.tile(base, (len(cand), 1))
        X[:, paid] = cand
        ok = np.all(X @ A.T >= b, axis=1) if len(b) else np.ones(len(X), dtype=bool)
        if not ok.any():
            continue
        x = min(tuple(int(v) for v in row) for row in X[ok])
        feasible, f = _transport(x, inst)
        if not feasible:
            raise AssertionError(f"cut conditions and max-flow disagree on {x}")
        return ExactSolution(x, f, unit * k)
    raise AssertionError("no feasible multiplicity vector found below the trivial bound")


def star_instance(alpha: Fraction | int | str, n: int) -> Instance:
    """Star on ``n`` vertices, unit cost and demand; centre capacity ``n``, petals ``alpha * n``."""
    alpha = Fraction(alpha)
    cap = [Fraction(n)] + [alpha * n] * (n - 1)
    names = ["center"] + [f"petal{i}" for i in range(1, n)]
    return Instance.build([1] * n, cap, [1] * n, [(0, i) for i in range(1, n)], names)


@dataclass(frozen=True)
class GapReport:
    alpha: Fraction
    n: int
    fractional_x: tuple[Fraction, ...]
    fractional_f: dict[tuple[int, int], Fraction]
    fractional_cost: Fraction
    integer_opt: Fraction
    gap: Fraction
    relaxed_ok: bool  # demand and capacity rows hold for the fractional point
    third_violations: tuple[tuple[int, int, Fraction], ...]  # (v, u, d(v) x(u) - f(v, u))


def lp_gap_demo(alpha: Fraction | int | str, n: int, cap: int = DEFAULT_CAP) -> GapReport:
    """Integrality gap on the star when the per-pair constraint is dropped.

    Every unit of demand is parked on a petal, buying ``1/(alpha n)`` of a
    copy there; all petals together cost ``1/alpha`` while any integral
    solution pays at least one unit.
    """
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if n < 2:
        raise ValueError("the star needs at least two vertices")
    inst = star_instance(alpha, n)
    f = {(v, v): Fraction(1) for v in range(1, n)}
    f[0, 1] = Fraction(1)
    load = [Fraction(0)] * n
    for (_, u), a in f.items():
        load[u] += a
    x = tuple(load[u] / inst.capacity[u] for u in range(n))
    frac_cost = sum((inst.cost[u] * x[u] for u in range(n)), Fraction(0))
    served = [Fraction(0)] * n
    for (v, _), a in f.items():
        served[v] += a
    relaxed_ok = all(served[v] >= inst.demand[v] for v in range(n)) and all(
        inst.capacity[u] * x[u] >= load[u] for u in range(n)
    )
    third = tuple(
        (v, u, inst.demand[v] * x[u] - f.get((v, u), Fraction(0)))
        for u in range(n) for v in inst.closed[u]
        if inst.demand[v] * x[u] - f.get((v, u), Fraction(0)) < 0
    )
    if n <= cap:
        opt = exact_opt(inst, cap).cost
    else:
        # any positive-demand instance with unit costs pays >= 1; one centre copy suffices
        assert feasibility_flow((1,) + (0,) * (n - 1), inst)
        opt = Fraction(1)
    return GapReport(alpha, n, x, f, frac_cost, opt, opt / frac_cost, relaxed_ok, third)


def pair_bound_holds(f: Mapping[tuple[int, int], Fraction], inst: Instance) -> bool:
    """``d(v) * x(u) >= f(v, u)`` for every ``u`` and ``v`` in ``N[u]``."""
    x = multiplicity_of(f, inst)
    return all(
        inst.demand[v] * x[u] >= f.get((v, u), Fraction(0))
        for u in range(inst.n) for v in inst.closed[u]
    )


def opt_cost(inst: Instance, cap: int = DEFAULT_CAP) -> Fraction:
    sol = exact_opt(inst, cap)
    return cost_of(sol.multiplicity, inst)
