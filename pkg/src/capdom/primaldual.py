"""Greedy charging: a feasible assignment together with a feasible dual.

Every unserved demand vertex raises its dual ``y`` at unit rate. A
neighbour ``v`` pays for this through ``z_v`` while heavily loaded
(``c(v) < d_phi(v)``) and through ``g_{v,u}`` otherwise, so the left side of
``v``'s dual constraint grows at rate ``min(c(v), d_phi(v))``. When a
constraint becomes tight the vertex saturates: a lightly loaded vertex
takes its unserved neighbourhood (and spare capacity goes to the demand it
tracked when it turned light); a heavily loaded one is queued and serves
its neighbourhood after the dual phase, in saturation order.

Saturation times are kept in a heap keyed by ``(time, vertex id)``; only
vertices whose rate changed are re-keyed, which is equivalent to the
uniform residual decrement of the textbook loop.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Assignment, Instance, cost_of, multiplicity_of

ZERO = Fraction(0)


@dataclass(frozen=True)
class DualSolution:
    y: tuple[Fraction, ...]
    z: tuple[Fraction, ...]
    g: dict[tuple[int, int], Fraction]  # (u, v) with v in N[u]; absent means 0

    @classmethod
    def zero(cls, n: int) -> DualSolution:
        return cls((ZERO,) * n, (ZERO,) * n, {})


@dataclass(frozen=True)
class DualViolation:
    kind: str  # "vertex", "pair", "sign", "support"
    where: tuple[int, ...]
    slack: Fraction  # negative amount by which the constraint fails


@dataclass
class DualReport:
    violations: list[DualViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_dual(dual: DualSolution, inst: Instance) -> DualReport:
    """Exact check of both constraint families and non-negativity."""
    report = DualReport()
    bad = report.violations.append
    n = inst.n
    if len(dual.y) != n or len(dual.z) != n:
        bad(DualViolation("support", (), ZERO))
        return report
    for u in range(n):
        for name, val in (("y", dual.y[u]), ("z", dual.z[u])):
            if val < 0:
                bad(DualViolation("sign", (u,), val))
    closed = inst.closed
    for (u, v), val in dual.g.items():
        if not (0 <= u < n and v in closed[u]):
            bad(DualViolation("support", (u, v), ZERO))
        elif val < 0:
            bad(DualViolation("sign", (u, v), val))
    load = [c * z for c, z in zip(inst.capacity, dual.z)]
    for (u, v), val in dual.g.items():
        if 0 <= u < n and 0 <= v < n:
            load[u] += inst.demand[v] * val
    for u in range(n):
        if load[u] > inst.cost[u]:
            bad(DualViolation("vertex", (u,), inst.cost[u] - load[u]))
    g = dual.g
    for u in range(n):
        for v in closed[u]:
            slack = dual.z[v] + g.get((v, u), ZERO) - dual.y[u]
            if slack < 0:
                bad(DualViolation("pair", (u, v), slack))
    return report


def dual_value(dual: DualSolution, inst: Instance) -> Fraction:
    return sum((d * y for d, y in zip(inst.demand, dual.y)), ZERO)


@dataclass(frozen=True)
class ChargingEvent:
    kind: str  # "light", "heavy" or "flush"
    vertex: int
    time: Fraction
    delta: Fraction
    assigned: tuple[tuple[int, Fraction], ...]

    def line(self, names: tuple[str, ...] | None = None) -> str:
        nm = (lambda v: names[v]) if names else str
        parts = " ".join(f"{nm(v)}:{a}" for v, a in self.assigned)
        return f"{self.kind} {nm(self.vertex)} t={self.time} delta={self.delta} assigned=[{parts}]"


@dataclass(frozen=True)
class ChargingResult:
    assignment: Assignment
    multiplicity: tuple[int, ...]
    dual: DualSolution
    events: tuple[ChargingEvent, ...] = ()

    def __iter__(self):
        return iter((self.assignment, self.multiplicity, self.dual))

    def cost(self, inst: Instance) -> Fraction:
        return cost_of(self.multiplicity, inst)


def _dual_at(inst, t, removed_at, first_light, active) -> DualSolution:
    n = inst.n
    y = tuple(t if active[v] else removed_at.get(v, ZERO) for v in range(n))
    # still heavily loaded vertices have paid through z for the whole run
    z = tuple(t if first_light[v] is None else first_light[v] for v in range(n))
    g = {}
    for v in range(n):
        for u in inst.closed[v]:
            if inst.demand[u] > 0 and y[u] > z[v]:
                g[v, u] = y[u] - z[v]
    return DualSolution(y, z, g)


def greedy_charging(
    inst: Instance, *, log_events: bool = False, debug: bool = False
) -> ChargingResult:
    """Run the charging scheme on ``inst``.

    With ``debug`` the partial dual is rebuilt and verified after every
    saturation event (quadratic; meant for tests).
    """
    n = inst.n
    w, c, d, N = inst.cost, inst.capacity, inst.demand, inst.closed
    active = [d[v] > 0 for v in range(n)]
    n_active = sum(active)
    remaining = list(d)
    f: Assignment = {}
    events: list[ChargingEvent] = []
    if n_active == 0:
        return ChargingResult({}, (0,) * n, DualSolution.zero(n))

    dphi = [sum((d[x] for x in N[v] if active[x]), ZERO) for v in range(n)]
    in_star = [dphi[v] > 0 for v in range(n)]
    # time at which v stopped being heavily loaded; 0 if it never was
    first_light: list[Fraction | None] = [None if c[v] < dphi[v] else ZERO for v in range(n)]
    residual = list(w)
    stamp = [ZERO] * n
    rate = [min(c[v], dphi[v]) for v in range(n)]
    version = [0] * n
    heap: list[tuple[Fraction, int, int]] = []
    for v in range(n):
        if in_star[v]:
            heap.append((residual[v] / rate[v], v, 0))
    heapq.heapify(heap)
    dstar: dict[int, tuple[int, ...]] = {}
    removed_at: dict[int, Fraction] = {}
    queue: list[int] = []
    t = ZERO

    while n_active:
        while True:
            when, u, ver = heapq.heappop(heap)
            if ver == version[u] and in_star[u]:
                break
        delta, t = when - t, when
        served = [x for x in N[u] if active[x]]
        light = dphi[u] <= c[u]
        given: list[tuple[int, Fraction]] = []
        if light:
            for x in served:
                f[x, u] = f.get((x, u), ZERO) + remaining[x]
                given.append((x, remaining[x]))
                remaining[x] = ZERO
            spare = c[u] - dphi[u]
            for x in dstar.get(u, ()):
                if spare <= 0:
                    break
                if remaining[x] > 0:
                    amount = min(spare, remaining[x])
                    f[x, u] = f.get((x, u), ZERO) + amount
                    given.append((x, amount))
                    remaining[x] -= amount
                    spare -= amount
        else:
            queue.append(u)
        if log_events:
            events.append(ChargingEvent("light" if light else "heavy", u, t, delta, tuple(given)))
        snapshot = set(served)

        touched = sorted({z for x in served for z in N[x]})
        was_heavy = {}
        for z in touched:
            residual[z] -= (t - stamp[z]) * rate[z]
            stamp[z] = t
            was_heavy[z] = c[z] < dphi[z]
        for x in served:
            active[x] = False
            removed_at[x] = t
            n_active -= 1
            for z in N[x]:
                dphi[z] -= d[x]
        for z in touched:
            if was_heavy[z] and dphi[z] <= c[z]:
                first_light[z] = t
                dstar[z] = tuple(x for x in N[z] if active[x] or x in snapshot)
            if dphi[z] == 0:
                in_star[z] = False
                continue
            new_rate = min(c[z], dphi[z])
            if new_rate != rate[z]:
                rate[z] = new_rate
                version[z] += 1
                heapq.heappush(heap, (t + residual[z] / new_rate, z, version[z]))
        if debug:
            report = verify_dual(_dual_at(inst, t, removed_at, first_light, active), inst)
            if not report.ok:
                raise AssertionError(f"dual infeasible after saturating {u}: {report.violations[:3]}")

    for u in queue:
        given = []
        for x in N[u]:
            if remaining[x] > 0:
                f[x, u] = f.get((x, u), ZERO) + remaining[x]
                given.append((x, remaining[x]))
                remaining[x] = ZERO
        if log_events:
            events.append(ChargingEvent("flush", u, t, ZERO, tuple(given)))

    dual = _dual_at(inst, t, removed_at, first_light, active)
    for u in range(n):
        load = c[u] * dual.z[u] + sum(
            (d[v] * dual.g.get((u, v), ZERO) for v in N[u]), ZERO
        )
        if load > w[u]:
            raise AssertionError(f"charging overspent vertex {u}: {load} > {w[u]}")
    return ChargingResult(f, multiplicity_of(f, inst), dual, tuple(events))


def degree_factor(inst: Instance) -> int:
    """Largest closed degree among positive-demand vertices (0 if none)."""
    return max((len(inst.closed[v]) for v in range(inst.n) if inst.demand[v] > 0), default=0)


def charge_bound_holds(result: ChargingResult, inst: Instance, factor: int | None = None) -> bool:
    """``w(f) <= factor * dual value``.

    The default factor is one more than :func:`degree_factor`. A lightly
    loaded vertex opens one copy, paid for by the duals of its closed
    neighbourhood; a heavily loaded one opens possibly several, paid for
    at most twice over by the duals of the demand it removed. The extra
    one is needed: a lone vertex with ``d = 3``, ``c = 2``, ``w = 1`` costs
    2 against a dual value of 3/2.
    """
    k = degree_factor(inst) + 1 if factor is None else factor
    return result.cost(inst) <= k * dual_value(result.dual, inst)
