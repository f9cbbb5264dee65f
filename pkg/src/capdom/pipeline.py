"""Layer decomposition, edge reduction and the end-to-end solvers."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .core import Assignment, Instance, SolutionReport, check_feasible, combine
from .embedding import (
    EmbeddingError,
    RotationSystem,
    level_walks,
    order_from_walk,
    peel_levels,
)
from .ladder import GeneralLadder, LadderError, extract_ladder, verify_ladder
from .primaldual import (
    ChargingEvent,
    DualSolution,
    degree_factor,
    dual_value,
    greedy_charging,
    verify_dual,
)

#: Degree bound of a reduced target vertex and the matching charging factor.
OUTERPLANAR_DEGREE, OUTERPLANAR_FACTOR = 6, 7
PLANAR_DEGREE, PLANAR_FACTOR = 8, 9


@dataclass(frozen=True)
class SubInstance:
    """One residue class: demand lives only on ``targets`` (local ids)."""

    instance: Instance
    origin: tuple[int, ...]  # local id -> id in the decomposed instance
    targets: frozenset[int]
    residue: int


@dataclass(frozen=True)
class LayerDecomposition:
    parts: tuple[SubInstance, SubInstance, SubInstance]

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i: int) -> SubInstance:
        return self.parts[i]


def star_subinstance(inst: Instance, targets: Sequence[int], residue: int = 0) -> SubInstance:
    """Closed neighbourhood of ``targets`` with edges incident to a target only."""
    tset = set(targets)
    vertices = set(tset)
    for v in tset:
        vertices.update(inst.adjacency[v])
    edges = [(a, b) for a, b in inst.edges if a in tset or b in tset]
    zeroed = {v: Fraction(0) for v in vertices if v not in tset}
    sub, origin = inst.restrict(vertices, edges, zeroed)
    local = {v: i for i, v in enumerate(origin)}
    return SubInstance(sub, origin, frozenset(local[v] for v in tset), residue)


def decompose(ladder: GeneralLadder, inst: Instance) -> LayerDecomposition:
    parts = []
    for i in range(3):
        targets = [v for k, layer in enumerate(ladder.layers) if k % 3 == i for v in layer]
        parts.append(star_subinstance(inst, targets, i))
    return LayerDecomposition(tuple(parts))


@dataclass(frozen=True)
class KeptNeighbors:
    vertex: int
    ranking: tuple[int, ...]  # closed neighbourhood by (cost, id)
    j: int | None  # first ranked neighbour with capacity above the demand
    k: int | None  # best cost/capacity ratio ranked before j
    p: int | None  # rightmost neighbour in the layer above
    q: int | None  # rightmost neighbour in the layer below
    extra: tuple[int, ...]  # rightmost neighbours in adjacent embedding levels (planar slabs)
    removed: tuple[int, ...]


@dataclass(frozen=True)
class ReducedGraph:
    instance: Instance
    origin: tuple[int, ...]
    targets: frozenset[int]
    residue: int
    kept: dict[int, KeptNeighbors]
    removed: tuple[tuple[int, int], ...]  # (target, neighbour) in local ids
    source: Instance  # the unreduced sub-instance


def kept_neighbors(
    sub: SubInstance,
    v: int,
    layer: Mapping[int, int],
    rank: Mapping[int, int],
    sides: Mapping[int, tuple[int, int]] | None = None,
) -> KeptNeighbors:
    inst, origin = sub.instance, sub.origin
    w, c, dv = inst.cost, inst.capacity, inst.demand[v]
    nbhd = inst.closed[v]
    ranking = tuple(sorted(nbhd, key=lambda x: (w[x], origin[x])))
    j_idx = next((t for t, x in enumerate(ranking) if c[x] > dv), len(ranking))
    j = ranking[j_idx] if j_idx < len(ranking) else None
    k = None
    if j_idx > 0:
        k = min(ranking[:j_idx], key=lambda x: w[x] / c[x])  # min keeps the earliest on ties
    lv = layer[origin[v]]

    def rightmost(target_layer: int) -> int | None:
        cands = [x for x in nbhd if layer.get(origin[x]) == target_layer]
        return max(cands, key=lambda x: rank[origin[x]]) if cands else None

    p, q = rightmost(lv - 1), rightmost(lv + 1)
    extra: list[int] = []
    if sides:
        for side in (-1, 1):
            cands = [x for x in nbhd if origin[x] in sides and sides[origin[x]][0] == side]
            if cands:
                extra.append(max(cands, key=lambda x: sides[origin[x]][1]))
    keep = {x for x in nbhd if layer.get(origin[x]) == lv}
    keep.update(x for x in (j, k, p, q, *extra) if x is not None)
    removed = tuple(x for x in nbhd if x not in keep)
    return KeptNeighbors(v, ranking, j, k, p, q, tuple(extra), removed)


def reduce(
    sub: SubInstance,
    ladder: GeneralLadder,
    sides: Mapping[int, tuple[int, int]] | None = None,
) -> ReducedGraph:
    """Cut every target off from all but a constant number of neighbours.

    ``ladder`` is keyed by the ids ``sub.origin`` maps into. ``sides`` maps
    vertices of the neighbouring embedding levels to ``(side, rank)`` with
    side ``-1`` above and ``+1`` below; it is only used for planar slabs.
    """
    kept = {}
    gone: set[tuple[int, int]] = set()
    removed = []
    for v in sorted(sub.targets):
        kn = kept_neighbors(sub, v, ladder.layer, ladder.rank, sides)
        kept[v] = kn
        for x in kn.removed:
            removed.append((v, x))
            gone.add((v, x) if v < x else (x, v))
    inst = sub.instance
    h = Instance(
        inst.cost, inst.capacity, inst.demand,
        tuple(e for e in inst.edges if e not in gone), inst.names,
    )
    return ReducedGraph(h, sub.origin, sub.targets, sub.residue, kept, tuple(removed), inst)


def reduction_violations(red: ReducedGraph, degree_bound: int) -> list[str]:
    """Degree bound on targets and the at-most-one-lost-edge rule elsewhere."""
    out = []
    h, g = red.instance, red.source
    for v in sorted(red.targets):
        if len(h.adjacency[v]) > degree_bound:
            out.append(f"target {h.names[v]} keeps degree {len(h.adjacency[v])} > {degree_bound}")
    for v in range(h.n):
        if v in red.targets:
            continue
        lost = len(g.adjacency[v]) - len(h.adjacency[v])
        if lost > 1:
            out.append(f"non-target {h.names[v]} lost {lost} edges")
    return out


@dataclass(frozen=True)
class Certificate:
    """Charging output on one reduced sub-instance, with its dual witness."""

    label: str
    reduced: ReducedGraph
    origin: tuple[int, ...]  # local id -> id in the solved instance
    assignment: Assignment  # local ids
    multiplicity: tuple[int, ...]
    dual: DualSolution
    cost: Fraction
    dual_value: Fraction
    factor: int  # charging bound to certify: 7 (outerplanar) or 9 (planar slab)
    events: tuple[ChargingEvent, ...] = ()

    @property
    def instance(self) -> Instance:
        return self.reduced.instance

    @property
    def dual_feasible(self) -> bool:
        return verify_dual(self.dual, self.instance).ok

    @property
    def bound_holds(self) -> bool:
        return self.cost <= self.factor * self.dual_value

    @property
    def degree_factor(self) -> int:
        return degree_factor(self.instance)

    def lifted_assignment(self) -> Assignment:
        o = self.origin
        return {(o[v], o[u]): a for (v, u), a in self.assignment.items()}


@dataclass(frozen=True)
class PipelineResult:
    report: SolutionReport
    certificates: tuple[Certificate, ...]
    lower_bound: Fraction  # certified lower bound on OPT

    @property
    def assignment(self) -> Assignment:
        return self.report.assignment

    @property
    def cost(self) -> Fraction:
        return self.report.cost


def _certify(red: ReducedGraph, origin, label, factor, log_events) -> Certificate:
    res = greedy_charging(red.instance, log_events=log_events)
    h = red.instance
    return Certificate(
        label, red, origin, res.assignment, res.multiplicity, res.dual,
        res.cost(h), dual_value(res.dual, h), factor, res.events,
    )


def _lift(origin_outer: tuple[int, ...], origin_inner: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(origin_outer[v] for v in origin_inner)


def _component_embedding(rs: RotationSystem, origin: tuple[int, ...]) -> RotationSystem:
    local = {v: i for i, v in enumerate(origin)}
    rotation = tuple(tuple(local[u] for u in rs.rotation[v]) for v in origin)
    walk = rs.outer_walk(origin[0])
    return RotationSystem(rotation, (tuple(local[v] for v in walk),))


def solve_outerplanar(
    inst: Instance, rs: RotationSystem, *, log_events: bool = False
) -> PipelineResult:
    """Ladder, three-way decomposition, reduction and charging per component.

    The anchor of each component is its smallest vertex id. The returned
    lower bound uses that the dual of each reduced residue class is at most
    twice the optimum of the whole instance.
    """
    certs: list[Certificate] = []
    per_residue = [Fraction(0)] * 3
    for ci, comp in enumerate(inst.components()):
        sub, origin = inst.restrict(comp)
        crs = _component_embedding(rs, origin)
        ladder = extract_ladder(sub, crs, 0)
        report = verify_ladder(ladder, sub)
        if not report.ok:
            raise LadderError(f"component {ci}: extracted ladder is invalid: {report.violations[:3]}")
        for part in decompose(ladder, sub):
            if not part.targets or all(part.instance.demand[v] == 0 for v in part.targets):
                continue
            red = reduce(part, ladder)
            cert = _certify(
                red, _lift(origin, part.origin), f"component={ci} residue={part.residue}",
                OUTERPLANAR_FACTOR, log_events,
            )
            certs.append(cert)
            per_residue[part.residue] += cert.dual_value
    f = combine(c.lifted_assignment() for c in certs)
    return PipelineResult(check_feasible(f, inst), tuple(certs), max(per_residue) / 2)


def solve_planar(
    inst: Instance, rs: RotationSystem, *, log_events: bool = False
) -> PipelineResult:
    """Serve every embedding level as the middle of its own three-level slab.

    Inside a slab only the middle level carries demand. Each component of
    the middle level is laddered from its smallest vertex, decomposed into
    three residue classes and reduced, additionally keeping each target's
    rightmost neighbour in the level above and in the level below.
    """
    certs: list[Certificate] = []
    best = Fraction(0)
    for ci, comp in enumerate(inst.components()):
        sub, origin = inst.restrict(comp)
        crs = _component_embedding(rs, origin)
        levels = peel_levels(crs)
        walks = [level_walks(crs, levels, k) for k in range(levels.depth)]
        ranks: list[dict[int, int]] = []
        for k in range(levels.depth):
            rank: dict[int, int] = {}
            for walk in sorted(walks[k], key=min):
                for v in order_from_walk(walk, min(walk)).sequence:
                    rank[v] = len(rank) + 1
            ranks.append(rank)
        for r in range(3):
            for lv in range(r, levels.depth, 3):
                sides = {}
                for side in (-1, 1):
                    if 0 <= lv + side < levels.depth:
                        for v, rk in ranks[lv + side].items():
                            sides[v] = (side, rk)
                for walk in sorted(walks[lv], key=min):
                    msub, morigin = sub.restrict(set(walk))
                    mlocal = {v: i for i, v in enumerate(morigin)}
                    mrot = tuple(
                        tuple(mlocal[u] for u in crs.rotation[v] if u in mlocal) for v in morigin
                    )
                    mrs = RotationSystem(mrot, (tuple(mlocal[v] for v in walk),))
                    ladder = extract_ladder(msub, mrs, 0)
                    report = verify_ladder(ladder, msub)
                    if not report.ok:
                        raise LadderError(f"level {lv}: ladder invalid: {report.violations[:3]}")
                    lifted = ladder.relabel(morigin)
                    for i in range(3):
                        targets = [v for k, layer in enumerate(lifted.layers) if k % 3 == i for v in layer]
                        if not any(sub.demand[v] > 0 for v in targets):
                            continue
                        # neighbours of a level lie within one level of it, so the
                        # closed neighbourhood already stays inside the slab
                        part = star_subinstance(sub, targets, i)
                        red = reduce(part, lifted, sides)
                        cert = _certify(
                            red, _lift(origin, part.origin),
                            f"component={ci} level={lv} piece={min(walk)} residue={i}",
                            PLANAR_FACTOR, log_events,
                        )
                        certs.append(cert)
                        best = max(best, cert.dual_value / 2)
    f = combine(c.lifted_assignment() for c in certs)
    return PipelineResult(check_feasible(f, inst), tuple(certs), best)


__all__ = [
    "Certificate",
    "EmbeddingError",
    "KeptNeighbors",
    "LayerDecomposition",
    "PipelineResult",
    "ReducedGraph",
    "SubInstance",
    "combine",
    "decompose",
    "kept_neighbors",
    "reduce",
    "reduction_violations",
    "solve_outerplanar",
    "solve_planar",
    "star_subinstance",
]
