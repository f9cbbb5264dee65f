"""Combinatorial embeddings and instance generators.

Conventions: ``rotation[v]`` lists the neighbours of ``v`` in
counter-clockwise order. A dart ``(u, v)`` is followed on its face by
``(v, w)`` where ``w`` is the counter-clockwise successor of ``u`` around
``v``. Faces therefore lie to the right of their darts, and the outer face
is walked counter-clockwise. A walk ``(v0, ..., vk-1)`` denotes the closed
dart sequence ``v0->v1, ..., vk-1->v0``; a single isolated vertex is the
walk ``(v,)``.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .core import Instance

Walk = tuple[int, ...]


class EmbeddingError(ValueError):
    """The rotation system is inconsistent or unsuitable for the request."""


@dataclass(frozen=True, eq=False)
class RotationSystem:
    rotation: tuple[tuple[int, ...], ...]
    outer: tuple[Walk, ...]  # one designated outer walk per connected component
    _pos: tuple[dict[int, int], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_pos", tuple({u: i for i, u in enumerate(r)} for r in self.rotation)
        )

    @property
    def n(self) -> int:
        return len(self.rotation)

    def next_dart(self, u: int, v: int) -> tuple[int, int]:
        rot = self.rotation[v]
        return v, rot[(self._pos[v][u] + 1) % len(rot)]

    def trace(self, u: int, v: int) -> Walk:
        """The face walk containing dart ``u -> v``, starting with ``u``."""
        walk = [u]
        a, b = self.next_dart(u, v)
        while (a, b) != (u, v):
            walk.append(a)
            a, b = self.next_dart(a, b)
        return tuple(walk)

    def faces(self) -> list[Walk]:
        seen: set[tuple[int, int]] = set()
        out = []
        for v in range(self.n):
            for u in self.rotation[v]:
                if (v, u) in seen:
                    continue
                walk = self.trace(v, u)
                for i, a in enumerate(walk):
                    seen.add((a, walk[(i + 1) % len(walk)]))
                out.append(walk)
        return out

    def outer_walk(self, v: int) -> Walk:
        for walk in self.outer:
            if v in walk:
                return walk
        raise EmbeddingError(f"vertex {v} is not on any designated outer walk")


def make_rotation_system(
    inst: Instance, rotation: Sequence[Sequence[int]], outer: Iterable[Sequence[int]]
) -> RotationSystem:
    """Validate a rotation system against ``inst`` and return it.

    Checks that each edge appears once in each endpoint's rotation, that
    every designated walk is a face, and that each connected component has
    exactly one designated walk.
    """
    if len(rotation) != inst.n:
        raise EmbeddingError("one rotation per vertex required")
    for v, rot in enumerate(rotation):
        if len(set(rot)) != len(rot) or sorted(rot) != list(inst.adjacency[v]):
            raise EmbeddingError(
                f"rotation of {inst.names[v]} must list each incident edge exactly once"
            )
    rs = RotationSystem(tuple(tuple(r) for r in rotation), tuple(tuple(w) for w in outer))
    comp_of = {}
    for k, comp in enumerate(inst.components()):
        for v in comp:
            comp_of[v] = k
    owners: dict[int, int] = {}
    for walk in rs.outer:
        if not walk:
            raise EmbeddingError("empty outer walk")
        if any(not 0 <= v < inst.n for v in walk):
            raise EmbeddingError(f"outer walk {walk} names unknown vertices")
        if len(walk) == 1:
            if rs.rotation[walk[0]]:
                raise EmbeddingError(
                    f"single-vertex outer walk at non-isolated vertex {inst.names[walk[0]]}"
                )
        else:
            a, b = walk[0], walk[1]
            if b not in rs._pos[a]:
                raise EmbeddingError(f"outer walk uses non-edge ({inst.names[a]}, {inst.names[b]})")
            if rs.trace(a, b) != walk:
                raise EmbeddingError(f"outer walk starting {inst.names[a]} is not a face")
        k = comp_of[walk[0]]
        if k in owners:
            raise EmbeddingError("a component has more than one designated outer walk")
        owners[k] = 1
    if len(owners) != len(set(comp_of.values())):
        raise EmbeddingError("every component needs a designated outer walk")
    return rs


def is_outerplanar_embedding(rs: RotationSystem) -> bool:
    on_walk = set()
    for walk in rs.outer:
        on_walk.update(walk)
    return len(on_walk) == rs.n


def _component(rs: RotationSystem, s: int) -> set[int]:
    seen = {s}
    stack = [s]
    while stack:
        v = stack.pop()
        for u in rs.rotation[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


@dataclass(frozen=True)
class VertexOrder:
    sequence: tuple[int, ...]
    rank: dict[int, int]  # 1-based

    @property
    def first(self) -> int:
        return self.sequence[0]


def order_from_walk(walk: Walk, anchor: int) -> VertexOrder:
    """First appearances along ``walk`` starting at ``anchor``'s first occurrence."""
    start = walk.index(anchor)
    seq: list[int] = []
    seen: set[int] = set()
    for i in range(len(walk)):
        v = walk[(start + i) % len(walk)]
        if v not in seen:
            seen.add(v)
            seq.append(v)
    return VertexOrder(tuple(seq), {v: i + 1 for i, v in enumerate(seq)})


def outer_order(rs: RotationSystem, anchor: int) -> VertexOrder:
    """Counter-clockwise outer-face order of ``anchor``'s component."""
    walk = rs.outer_walk(anchor)
    missing = _component(rs, anchor) - set(walk)
    if missing:
        raise EmbeddingError(f"not outerplanar embedding: vertex {min(missing)} is interior")
    return order_from_walk(walk, anchor)


@dataclass(frozen=True)
class LevelStructure:
    level: tuple[int, ...]
    #: per level, the walks bounding the outer region when that level was peeled
    boundary: tuple[tuple[Walk, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.boundary)

    def members(self, k: int) -> list[int]:
        return [v for v, lv in enumerate(self.level) if lv == k]


def peel_levels(rs: RotationSystem) -> LevelStructure:
    """Assign each vertex its outerplanarity level by repeated peeling.

    Level 0 is the designated outer boundary. In later rounds the faces of
    the remaining graph are re-traced; a face belongs to the outer region
    exactly when one of its corners skips a previously peeled neighbour.
    """
    n = rs.n
    level = [-1] * n
    boundary: list[tuple[Walk, ...]] = []
    walks = tuple(rs.outer)
    for walk in walks:
        for v in walk:
            level[v] = 0
    boundary.append(walks)
    alive = {v for v in range(n) if level[v] < 0}
    k = 1
    while alive:
        rot = {v: tuple(u for u in rs.rotation[v] if u in alive) for v in alive}
        pos = {v: {u: i for i, u in enumerate(r)} for v, r in rot.items()}
        seen: set[tuple[int, int]] = set()
        found: list[Walk] = []
        for s in sorted(alive):
            if not rot[s]:
                found.append((s,))
                continue
            for t in rot[s]:
                if (s, t) in seen:
                    continue
                walk = [s]
                a, b = s, t
                gap = False
                while True:
                    seen.add((a, b))
                    r = rot[b]
                    c = r[(pos[b][a] + 1) % len(r)]
                    full = rs._pos[b]
                    deg = len(rs.rotation[b])
                    if (c == a and deg > 1) or (c != a and (full[c] - full[a]) % deg != 1):
                        gap = True
                    a, b = b, c
                    if (a, b) == (s, t):
                        break
                    walk.append(a)
                if gap:
                    found.append(tuple(walk))
        peeled = {v for walk in found for v in walk}
        if not peeled:
            raise EmbeddingError("rotation system inconsistent: no outer boundary found while peeling")
        for v in peeled:
            level[v] = k
        alive -= peeled
        boundary.append(tuple(found))
        k += 1
    return LevelStructure(tuple(level), tuple(boundary))


def level_walks(rs: RotationSystem, levels: LevelStructure, k: int) -> list[Walk]:
    """Outer walks of the components of the subgraph induced by level ``k``.

    Walks are traced in the rotation restricted to level ``k``, starting
    from a dart that bounded the outer region when the level was peeled,
    so each is the counter-clockwise outer boundary of its component.
    """
    members = {v for v, lv in enumerate(levels.level) if lv == k}
    rot = {v: tuple(u for u in rs.rotation[v] if u in members) for v in members}
    pos = {v: {u: i for i, u in enumerate(r)} for v, r in rot.items()}

    def trace(s: int, t: int) -> Walk:
        walk = [s]
        a, b = s, t
        while True:
            r = rot[b]
            a, b = b, r[(pos[b][a] + 1) % len(r)]
            if (a, b) == (s, t):
                return tuple(walk)
            walk.append(a)

    covered: set[int] = set()
    out = []
    for walk in levels.boundary[k]:
        darts = [(walk[i], walk[(i + 1) % len(walk)]) for i in range(len(walk))] if len(walk) > 1 else []
        starts = [(a, b) for a, b in darts if a in members and b in members] or [(walk[0], None)]
        for a, b in starts:
            if a in covered:
                continue
            if b is None:
                if rot[a]:
                    continue
                found: Walk = (a,)
            else:
                found = trace(a, b)
            covered.update(found)
            out.append(found)
    for v in sorted(members - covered):  # defensive: isolated in the level graph
        if not rot[v]:
            out.append((v,))
            covered.add(v)
    if covered != members:
        raise EmbeddingError(f"level {k}: could not recover outer walks for every component")
    return out


# --- generators -----------------------------------------------------------------


def _draw(rng: random.Random, rng_range: tuple[int, int]) -> int:
    return rng.randint(rng_range[0], rng_range[1])


def _check_ranges(cost, capacity, demand) -> None:
    for name, (lo, hi) in (("cost", cost), ("capacity", capacity), ("demand", demand)):
        if lo > hi:
            raise ValueError(f"{name} range {lo}..{hi} is empty")
        if lo < 0:
            raise ValueError(f"{name} range must be non-negative")
    if capacity[0] <= 0:
        raise ValueError("capacity range must be strictly positive")


def _random_triangulation(m: int, rng: random.Random) -> list[tuple[int, int, int]]:
    """Uniform triangulation of the convex ``(m + 2)``-gon as a list of triangles.

    Samples a uniform full binary tree with ``m`` internal nodes through the
    cycle lemma on a shuffled Lukasiewicz word, then reads the triangles
    off its preorder.
    """
    if m <= 0:
        return []
    word = [1] * m + [0] * (m + 1)
    rng.shuffle(word)
    low, s, cut = 0, 0, 0
    for i, b in enumerate(word):
        s += 1 if b else -1
        if s < low:
            low, cut = s, i + 1
    word = word[cut:] + word[:cut]
    size = len(word)
    count = [0] * size  # internal nodes in subtree
    end = [0] * size
    stack: list[int] = []
    for p in range(size - 1, -1, -1):
        if word[p]:
            left = stack.pop()
            right = stack.pop()
            count[p] = 1 + count[left] + count[right]
            end[p] = end[right]
        else:
            end[p] = p
        stack.append(p)
    triangles = []
    todo = [(0, m + 1, 0)]
    while todo:
        i, j, p = todo.pop()
        if j - i < 2:
            continue
        left = p + 1
        k = i + 1 + count[left]
        triangles.append((i, k, j))
        todo.append((i, k, left))
        todo.append((k, j, end[left] + 1))
    return triangles


def gen_outerplanar(
    n: int,
    seed: int | None = None,
    keep: float = 1.0,
    cost: tuple[int, int] = (1, 10),
    capacity: tuple[int, int] = (1, 10),
    demand: tuple[int, int] = (1, 5),
) -> tuple[Instance, RotationSystem]:
    """Random outerplanar instance on a convex polygon.

    The polygon is triangulated uniformly at random, and each chord is then
    kept independently with probability ``keep``. Vertices ``0..n-1`` sit in
    counter-clockwise order, so the polygon boundary is the outer walk.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= keep <= 1.0:
        raise ValueError("keep probability must lie in [0, 1]")
    _check_ranges(cost, capacity, demand)
    rng = random.Random(seed)
    edges = {(i, i + 1) for i in range(n - 1)}
    if n >= 3:
        edges.add((0, n - 1))
    chords = set()
    for tri in _random_triangulation(n - 2, rng):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])):
            if b - a >= 2 and not (a == 0 and b == n - 1):
                chords.add((a, b))
    for ch in sorted(chords):
        if rng.random() < keep:
            edges.add(ch)
    w, c, d = [], [], []
    for _ in range(n):
        w.append(_draw(rng, cost))
        c.append(_draw(rng, capacity))
        d.append(_draw(rng, demand))
    inst = Instance.build(w, c, d, sorted(edges))
    rotation = [sorted(inst.adjacency[v], key=lambda u, v=v: (u - v) % n) for v in range(n)]
    rs = RotationSystem(tuple(tuple(r) for r in rotation), ((0,),))
    if n > 1:
        rs = RotationSystem(rs.rotation, (rs.trace(0, rotation[0][0]),))
    return inst, rs


def grid_rotation(rows: int, cols: int) -> RotationSystem:
    """Canonical embedding of the ``rows x cols`` grid (vertex ``r * cols + c``)."""
    rotation = []
    for r in range(rows):
        for c in range(cols):
            rot = []
            # counter-clockwise: east, north, west, south
            for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    rot.append(rr * cols + cc)
            rotation.append(tuple(rot))
    rs = RotationSystem(tuple(rotation), ((0,),))
    if rows * cols > 1:
        rs = RotationSystem(rs.rotation, (rs.trace(0, rotation[0][0]),))
    return rs


def gen_grid(
    rows: int,
    cols: int,
    seed: int | None = None,
    cost: tuple[int, int] = (1, 10),
    capacity: tuple[int, int] = (1, 10),
    demand: tuple[int, int] = (1, 5),
) -> tuple[Instance, RotationSystem]:
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    _check_ranges(cost, capacity, demand)
    rng = random.Random(seed)
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    w, cap, d = [], [], []
    for _ in range(rows * cols):
        w.append(_draw(rng, cost))
        cap.append(_draw(rng, capacity))
        d.append(_draw(rng, demand))
    inst = Instance.build(w, cap, d, edges)
    return inst, grid_rotation(rows, cols)
