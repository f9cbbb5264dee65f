"""Instance text files and JSON result files.

An instance file is line based::

    capdom-instance 1
    # comments and blank lines are ignored
    vertex <id> <cost> <capacity> <demand>
    edge <id> <id>
    rotation <id> <neighbour ids in counter-clockwise order>
    outer <ids of one outer face walk>
    grid <rows> <cols>

Numbers are integers, decimals or ``p/q``; they are read exactly and
written back in canonical ``p`` / ``p/q`` form. The embedding block
(``rotation`` and ``outer`` lines) is optional, but when present every
vertex needs a ``rotation`` line. :func:`dump_instance` writes the
canonical layout, and parsing a canonical file and dumping it again
reproduces it byte for byte.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .core import Assignment, Instance, InstanceError, as_fraction, format_fraction
from .embedding import RotationSystem, grid_rotation, make_rotation_system
from .primaldual import DualSolution

INSTANCE_HEADER = "capdom-instance 1"
RESULT_FORMAT = "capdom-result 1"


class FormatError(ValueError):
    """Malformed file contents (as opposed to an invalid instance)."""


@dataclass(frozen=True)
class InstanceFile:
    instance: Instance
    embedding: RotationSystem | None = None
    grid: tuple[int, int] | None = None

    def rotation_system(self) -> RotationSystem | None:
        """The stored embedding, or the canonical one for a grid."""
        if self.embedding is not None:
            return self.embedding
        if self.grid is not None:
            return grid_rotation(*self.grid)
        return None


def _fraction(token: str, where: str) -> Fraction:
    try:
        return as_fraction(token)
    except InstanceError as exc:
        raise FormatError(f"{where}: {exc}") from None


def parse_instance(text: str) -> InstanceFile:
    lines = text.splitlines()
    body = [(i + 1, ln.split("#", 1)[0].split()) for i, ln in enumerate(lines)]
    body = [(no, toks) for no, toks in body if toks]
    if not body or " ".join(body[0][1]) != INSTANCE_HEADER:
        raise FormatError(f"line 1: expected header {INSTANCE_HEADER!r}")
    names: list[str] = []
    w, c, d = [], [], []
    raw_edges: list[tuple[str, str, int]] = []
    raw_rot: dict[str, list[str]] = {}
    raw_outer: list[list[str]] = []
    grid = None
    for no, toks in body[1:]:
        kind, args = toks[0], toks[1:]
        where = f"line {no}"
        if kind == "vertex":
            if len(args) != 4:
                raise FormatError(f"{where}: vertex needs id, cost, capacity and demand")
            names.append(args[0])
            w.append(_fraction(args[1], where))
            c.append(_fraction(args[2], where))
            d.append(_fraction(args[3], where))
        elif kind == "edge":
            if len(args) != 2:
                raise FormatError(f"{where}: edge needs two endpoints")
            raw_edges.append((args[0], args[1], no))
        elif kind == "rotation":
            if not args:
                raise FormatError(f"{where}: rotation needs a vertex")
            if args[0] in raw_rot:
                raise FormatError(f"{where}: second rotation for vertex {args[0]}")
            raw_rot[args[0]] = args[1:]
        elif kind == "outer":
            if not args:
                raise FormatError(f"{where}: empty outer walk")
            raw_outer.append(args)
        elif kind == "grid":
            if len(args) != 2 or not all(a.isdigit() for a in args):
                raise FormatError(f"{where}: grid needs two positive integers")
            grid = (int(args[0]), int(args[1]))
        else:
            raise FormatError(f"{where}: unknown record {kind!r}")

    # everything below is model validation, not syntax
    index = {}
    for i, name in enumerate(names):
        if name in index:
            raise InstanceError(f"vertex {name}: duplicate vertex id")
        index[name] = i

    def ref(name: str) -> int:
        if name not in index:
            raise InstanceError(f"dangling endpoint {name}: no such vertex")
        return index[name]

    edges = []
    for a, b, no in raw_edges:
        if a not in index or b not in index:
            raise InstanceError(f"edge ({a}, {b}) on line {no}: dangling endpoint")
        edges.append((index[a], index[b]))
    inst = Instance.build(w, c, d, edges, names)
    if grid is not None and grid[0] * grid[1] != inst.n:
        raise InstanceError(f"grid {grid[0]}x{grid[1]} does not match {inst.n} vertices")
    embedding = None
    if raw_rot or raw_outer:
        missing = [nm for nm in names if nm not in raw_rot]
        if missing:
            raise InstanceError(f"vertex {missing[0]}: no rotation given")
        rotation = [[ref(u) for u in raw_rot[nm]] for nm in names]
        for nm in raw_rot:
            ref(nm)
        outer = [[ref(v) for v in walk] for walk in raw_outer]
        embedding = make_rotation_system(inst, rotation, outer)
    return InstanceFile(inst, embedding, grid)


def dump_instance(
    inst: Instance, embedding: RotationSystem | None = None, grid: tuple[int, int] | None = None
) -> str:
    nm = inst.names
    out = [INSTANCE_HEADER]
    if grid is not None:
        out.append(f"grid {grid[0]} {grid[1]}")
    for v in range(inst.n):
        vals = (inst.cost[v], inst.capacity[v], inst.demand[v])
        out.append(f"vertex {nm[v]} " + " ".join(format_fraction(x) for x in vals))
    for a, b in inst.edges:
        out.append(f"edge {nm[a]} {nm[b]}")
    if embedding is not None:
        for v in range(inst.n):
            out.append(" ".join(["rotation", nm[v], *(nm[u] for u in embedding.rotation[v])]))
        for walk in embedding.outer:
            out.append(" ".join(["outer", *(nm[v] for v in walk)]))
    return "\n".join(out) + "\n"


def read_instance(path) -> InstanceFile:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


# --- result files -------------------------------------------------------------

def _q(x: Fraction) -> str:
    return format_fraction(x)


def _triples(f: Assignment, names: Sequence[str]) -> list[list[str]]:
    return [[names[v], names[u], _q(a)] for (v, u), a in sorted(f.items())]


def certificate_record(cert, parent: Instance) -> dict[str, Any]:
    """JSON form of a :class:`~capdom.pipeline.Certificate`, in parent names."""
    h = cert.instance
    nm = [parent.names[o] for o in cert.origin]
    dual = cert.dual
    return {
        "label": cert.label,
        "residue": cert.reduced.residue,
        "vertices": nm,
        "targets": [nm[v] for v in sorted(cert.reduced.targets)],
        "edges": [[nm[a], nm[b]] for a, b in h.edges],
        "assignment": _triples(cert.assignment, nm),
        "multiplicity": list(cert.multiplicity),
        "cost": _q(cert.cost),
        "dual": {
            "y": [_q(v) for v in dual.y],
            "z": [_q(v) for v in dual.z],
            "g": [[nm[u], nm[v], _q(a)] for (u, v), a in sorted(dual.g.items())],
        },
        "dual_value": _q(cert.dual_value),
        "factor": cert.factor,
    }


def result_record(
    inst: Instance,
    *,
    algorithm: str,
    assignment: Assignment,
    multiplicity: Sequence[int],
    cost: Fraction,
    feasible: bool,
    violations: Iterable[int],
    certificates: Sequence[dict[str, Any]] = (),
    lower_bound: Fraction | None = None,
    seed: int | None = None,
    timings: dict[str, float] | None = None,
) -> dict[str, Any]:
    ratio = None
    if lower_bound is not None and lower_bound > 0:
        ratio = _q(cost / lower_bound)
    return {
        "format": RESULT_FORMAT,
        "algorithm": algorithm,
        "seed": seed,
        "timings": timings or {},
        "vertices": list(inst.names),
        "assignment": _triples(assignment, inst.names),
        "multiplicity": list(multiplicity),
        "cost": _q(cost),
        "feasible": feasible,
        "violations": [inst.names[v] for v in violations],
        "certificates": list(certificates),
        "dual_lower_bound": None if lower_bound is None else _q(lower_bound),
        "ratio_vs_dual_bound": ratio,
    }


def dump_result(record: dict[str, Any]) -> str:
    return json.dumps(record, indent=2) + "\n"


def load_result(text: str) -> dict[str, Any]:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"result is not JSON: {exc}") from None
    if not isinstance(record, dict) or record.get("format") != RESULT_FORMAT:
        raise FormatError(f"result must be a JSON object with format {RESULT_FORMAT!r}")
    for key in ("vertices", "assignment", "multiplicity", "cost", "feasible", "certificates"):
        if key not in record:
            raise FormatError(f"result lacks field {key!r}")
    return record


def read_triples(rows, index: dict[str, int], what: str) -> Assignment:
    f: Assignment = {}
    for row in rows:
        if not (isinstance(row, list) and len(row) == 3):
            raise FormatError(f"{what}: entries must be [v, u, amount]")
        v, u, amount = row
        if v not in index or u not in index:
            raise InstanceError(f"{what}: unknown vertex in {row}")
        f[index[v], index[u]] = _fraction(str(amount), what)
    return f


def read_dual(rec: dict[str, Any], index: dict[str, int], n: int, what: str) -> DualSolution:
    try:
        y = tuple(_fraction(str(v), what) for v in rec["y"])
        z = tuple(_fraction(str(v), what) for v in rec["z"])
        g = read_triples(rec["g"], index, what)
    except (KeyError, TypeError):
        raise FormatError(f"{what}: dual needs y, z and g lists") from None
    if len(y) != n or len(z) != n:
        raise FormatError(f"{what}: dual y and z need one entry per vertex")
    return DualSolution(y, z, g)
