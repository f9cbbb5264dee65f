"""Slow, independent re-implementations used as test oracles."""

from __future__ import annotations

import math
from fractions import Fraction

import networkx as nx

from capdom.core import Instance
from capdom.embedding import RotationSystem
from capdom.primaldual import DualSolution

ZERO = Fraction(0)


def naive_charging(inst: Instance):
    """Greedy charging with a full rescan and uniform residual decrement per step."""
    n = inst.n
    w, c, d, N = inst.cost, inst.capacity, inst.demand, inst.closed
    active = [d[v] > 0 for v in range(n)]
    rem = list(d)
    resid = list(w)
    y = [ZERO] * n
    light_at: list[Fraction | None] = [None] * n
    dstar: dict[int, list[int]] = {}
    heavy_queue: list[int] = []
    f: dict[tuple[int, int], Fraction] = {}
    t = ZERO

    def dphi() -> list[Fraction]:
        return [sum((d[x] for x in N[v] if active[x]), ZERO) for v in range(n)]

    cur = dphi()
    for v in range(n):
        if not c[v] < cur[v]:
            light_at[v] = ZERO
    while any(active):
        cur = dphi()
        star = [v for v in range(n) if cur[v] > 0]
        r = {v: resid[v] / min(c[v], cur[v]) for v in star}
        delta = min(r.values())
        u = min(v for v in star if r[v] == delta)
        for v in star:
            resid[v] -= delta * min(c[v], cur[v])
        t += delta
        s_u = [x for x in N[u] if active[x]]
        if cur[u] <= c[u]:
            for x in s_u:
                f[x, u] = f.get((x, u), ZERO) + rem[x]
                rem[x] = ZERO
            spare = c[u] - cur[u]
            for x in sorted(dstar.get(u, [])):
                take = min(spare, rem[x])
                if take > 0:
                    f[x, u] = f.get((x, u), ZERO) + take
                    rem[x] -= take
                    spare -= take
        else:
            heavy_queue.append(u)
        for x in s_u:
            active[x] = False
            y[x] = t
        after = dphi()
        for v in range(n):
            if c[v] < cur[v] and after[v] <= c[v]:
                light_at[v] = t
                dstar[v] = [x for x in N[v] if active[x] or x in s_u]
    for u in heavy_queue:
        for x in N[u]:
            if rem[x] > 0:
                f[x, u] = f.get((x, u), ZERO) + rem[x]
                rem[x] = ZERO
    z = [t if a is None else a for a in light_at]
    g = {}
    for v in range(n):
        for u in N[v]:
            if d[u] > 0 and y[u] > z[v]:
                g[v, u] = y[u] - z[v]
    x = []
    for u in range(n):
        load = sum((a for (_, b), a in f.items() if b == u), ZERO)
        x.append(math.ceil(load / c[u]))
    return f, tuple(x), DualSolution(tuple(y), tuple(z), g)


def _scale(values) -> int:
    out = 1
    for v in values:
        out = out * v.denominator // math.gcd(out, v.denominator)
    return out


def flow_feasible(x, inst: Instance) -> bool:
    """Transportation feasibility through networkx on integer-scaled data."""
    k = _scale([*inst.demand, *inst.capacity])
    g = nx.DiGraph()
    total = 0
    for v in range(inst.n):
        if inst.demand[v] > 0:
            dv = int(inst.demand[v] * k)
            total += dv
            g.add_edge("s", ("d", v), capacity=dv)
            for u in inst.closed[v]:
                g.add_edge(("d", v), ("c", u))  # no capacity attribute: unbounded
    for u in range(inst.n):
        if x[u] > 0:
            g.add_edge(("c", u), "t", capacity=int(inst.capacity[u] * k) * x[u])
    if total == 0:
        return True
    if "t" not in g:
        return False
    return nx.maximum_flow_value(g, "s", "t") == total


def branch_and_bound_opt(inst: Instance) -> Fraction:
    """Depth-first search over multiplicity vectors with cost and completion pruning."""
    n = inst.n
    total = sum(inst.demand, ZERO)
    xmax = [math.ceil(total / inst.capacity[v]) for v in range(n)]
    best = [sum((inst.cost[v] * math.ceil(inst.demand[v] / inst.capacity[v])
                 for v in range(n)), ZERO)]

    def rec(i: int, x: list[int], cost: Fraction) -> None:
        if cost >= best[0] and not (cost == best[0] == 0):
            return
        if not flow_feasible(x + xmax[i:], inst):
            return
        if i == n:
            best[0] = cost
            return
        for k in range(xmax[i] + 1):
            rec(i + 1, x + [k], cost + inst.cost[i] * k)

    if total == 0:
        return ZERO
    rec(0, [], ZERO)
    return best[0]


def radial_levels(inst: Instance, rs: RotationSystem) -> dict[int, int]:
    """Level of each vertex from distances in the vertex-face incidence graph."""
    g = nx.Graph()
    outer = rs.outer[0]
    key_outer = None
    for i, walk in enumerate(rs.faces()):
        node = ("f", i)
        if set(walk) == set(outer) and key_outer is None and _same_face(walk, outer):
            key_outer = node
        for v in walk:
            g.add_edge(node, ("v", v))
    dist = nx.single_source_shortest_path_length(g, key_outer)
    return {v: (dist[("v", v)] - 1) // 2 for v in range(inst.n)}


def _same_face(a, b) -> bool:
    darts = {(a[i], a[(i + 1) % len(a)]) for i in range(len(a))}
    return (b[0], b[1 % len(b)]) in darts if len(b) > 1 else tuple(a) == tuple(b)
