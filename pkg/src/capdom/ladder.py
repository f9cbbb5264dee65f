"""General-ladder representation of outerplanar graphs.

Layers are BFS distances from an anchor; within a layer vertices are
ordered by their first appearance on the counter-clockwise outer walk.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .core import Instance
from .embedding import RotationSystem, VertexOrder, outer_order


class LadderError(ValueError):
    pass


@dataclass(frozen=True)
class GeneralLadder:
    anchor: int
    order: VertexOrder
    layer: dict[int, int]
    layers: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> dict[int, int]:
        return self.order.rank

    @property
    def height(self) -> int:
        """Index of the last layer."""
        return len(self.layers) - 1

    def relabel(self, origin: tuple[int, ...]) -> GeneralLadder:
        """Rename vertex ``i`` to ``origin[i]``."""
        seq = tuple(origin[v] for v in self.order.sequence)
        return GeneralLadder(
            origin[self.anchor],
            VertexOrder(seq, {v: i + 1 for i, v in enumerate(seq)}),
            {origin[v]: k for v, k in self.layer.items()},
            tuple(tuple(origin[v] for v in layer) for layer in self.layers),
        )


def bfs_distances(inst: Instance, source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in inst.adjacency[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def extract_ladder(inst: Instance, rs: RotationSystem, anchor: int) -> GeneralLadder:
    """Layer a connected outerplanar instance by distance to ``anchor``."""
    dist = bfs_distances(inst, anchor)
    if len(dist) != inst.n:
        raise LadderError("instance is disconnected; split it into components first")
    order = outer_order(rs, anchor)
    layers: list[list[int]] = [[] for _ in range(max(dist.values()) + 1)]
    for v in order.sequence:
        layers[dist[v]].append(v)
    return GeneralLadder(anchor, order, dist, tuple(tuple(x) for x in layers))


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple[int, ...]
    detail: str = ""


@dataclass
class LadderReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def verify_ladder(ladder: GeneralLadder, inst: Instance) -> LadderReport:
    """Check every general-ladder property, collecting witnesses."""
    report = LadderReport()
    bad = report.violations.append
    layer, rank = ladder.layer, ladder.rank

    if ladder.layers[:1] != ((ladder.anchor,),):
        bad(Violation("anchor", (ladder.anchor,), "top layer must be exactly the anchor"))
    listed = [v for lay in ladder.layers for v in lay]
    if sorted(listed) != list(range(inst.n)) or set(layer) != set(range(inst.n)):
        bad(Violation("coverage", (), "every vertex must sit in exactly one layer"))
        return report
    for k, lay in enumerate(ladder.layers):
        for v in lay:
            if layer[v] != k:
                bad(Violation("layer-index", (v,), f"listed in layer {k}, labelled {layer[v]}"))
        for a, b in zip(lay, lay[1:]):
            if rank[a] >= rank[b]:
                bad(Violation("layer-order", (a, b), "layer not sorted by outer order"))
    dist = bfs_distances(inst, ladder.anchor)
    for v in range(inst.n):
        if dist.get(v) != layer[v]:
            bad(Violation("distance", (v,), f"layer {layer[v]} but distance {dist.get(v)}"))

    position = {v: i for lay in ladder.layers for i, v in enumerate(lay)}
    for a, b in inst.edges:
        gap = abs(layer[a] - layer[b])
        if gap > 1:
            bad(Violation("edge-span", (a, b), f"joins layers {layer[a]} and {layer[b]}"))
        elif gap == 0 and abs(position[a] - position[b]) != 1:
            bad(Violation("layer-path", (a, b), "same-layer edge between non-consecutive vertices"))

    for lay in ladder.layers:
        # u < v in a layer must not have max(down(u)) after min(down(v))
        best: tuple[int, int, int] | None = None  # (rank of max down-neighbour, u, p)
        for v in lay:
            down = [x for x in inst.adjacency[v] if layer[x] == layer[v] + 1]
            if not down:
                continue
            q = min(down, key=rank.__getitem__)
            if best is not None and best[0] > rank[q]:
                bad(Violation("crossing", (best[1], v, best[2], q),
                              "down-neighbours of an earlier vertex pass a later one's"))
            p = max(down, key=rank.__getitem__)
            if best is None or rank[p] > best[0]:
                best = (rank[p], v, p)

    for v in range(inst.n):
        up = [x for x in inst.adjacency[v] if layer[x] == layer[v] - 1]
        if len(up) > 2:
            bad(Violation("upward-degree", (v, *up), f"{len(up)} neighbours in the layer above"))
    return report


def ladder_to_dot(ladder: GeneralLadder, inst: Instance) -> str:
    """Graphviz text: one ``rank=same`` group per layer, left-to-right by order."""
    def q(v: int) -> str:
        return '"' + inst.names[v].replace('"', r"\"") + '"'

    lines = ["graph ladder {", "  ordering=out;"]
    for k, lay in enumerate(ladder.layers):
        lines.append(f"  {{ rank=same; /* layer {k} */ " + " ".join(q(v) + ";" for v in lay) + " }")
        for a, b in zip(lay, lay[1:]):
            lines.append(f"  {q(a)} -- {q(b)} [style=invis];")
    for a, b in inst.edges:
        lines.append(f"  {q(a)} -- {q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
