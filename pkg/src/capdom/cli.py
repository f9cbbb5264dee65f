"""Command-line driver.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid
instance or embedding, 4 oracle scale exceeded, 5 verification failure.
Output files default to stdout; with ``CAPDOM_OUT_DIR`` set they are
written into that directory under a name derived from the input.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Instance, InstanceError, check_feasible, combine, cost_of, multiplicity_of
from .embedding import EmbeddingError, gen_grid, gen_outerplanar
from .formats import (
    FormatError,
    InstanceFile,
    certificate_record,
    dump_instance,
    dump_result,
    load_result,
    read_dual,
    read_instance,
    read_triples,
    result_record,
)
from .ladder import LadderError, extract_ladder, ladder_to_dot
from .oracle import DEFAULT_CAP, ScaleError, exact_opt, lp_gap_demo
from .pipeline import (
    OUTERPLANAR_FACTOR,
    PLANAR_FACTOR,
    PipelineResult,
    solve_outerplanar,
    solve_planar,
)
from .primaldual import dual_value, verify_dual

OUT_DIR_ENV = "CAPDOM_OUT_DIR"

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_SCALE, EXIT_VERIFY = 0, 2, 3, 4, 5


class VerificationFailed(Exception):
    pass


# --- commands -----------------------------------------------------------------

def cmd_gen(family: str, *, seed: int | None = None, n: int = 10, rows: int = 3, cols: int = 3,
            keep: float = 1.0, cost=(1, 10), capacity=(1, 10), demand=(1, 5)) -> str:
    if family == "outerplanar":
        inst, rs = gen_outerplanar(n, seed, keep, cost, capacity, demand)
        return dump_instance(inst, rs)
    if family == "grid":
        inst, rs = gen_grid(rows, cols, seed, cost, capacity, demand)
        return dump_instance(inst, rs, grid=(rows, cols))
    raise ValueError(f"unknown family {family!r}")


def _embedding_for(doc: InstanceFile, mode: str):
    rs = doc.rotation_system()
    if rs is None:
        raise EmbeddingError(f"{mode} solve needs an embedding block (or a grid header)")
    return rs


def cmd_solve(doc: InstanceFile, mode: str = "outerplanar", *, seed: int | None = None,
              event_log: list[str] | None = None) -> dict:
    inst = doc.instance
    rs = _embedding_for(doc, mode)
    solver = {"outerplanar": solve_outerplanar, "planar": solve_planar}[mode]
    start = time.perf_counter()
    res: PipelineResult = solver(inst, rs, log_events=event_log is not None)
    elapsed = time.perf_counter() - start
    if event_log is not None:
        for cert in res.certificates:
            event_log.append(f"# {cert.label}")
            names = tuple(cert.instance.names)
            event_log.extend(e.line(names) for e in cert.events)
    rep = res.report
    return result_record(
        inst,
        algorithm=mode,
        assignment=rep.assignment,
        multiplicity=rep.multiplicity,
        cost=rep.cost,
        feasible=rep.feasible,
        violations=sorted(rep.violations),
        certificates=[certificate_record(c, inst) for c in res.certificates],
        lower_bound=res.lower_bound,
        seed=seed,
        timings={"solve_seconds": round(elapsed, 6)},
    )


def cmd_exact(doc: InstanceFile, cap: int = DEFAULT_CAP, *, seed: int | None = None) -> dict:
    inst = doc.instance
    start = time.perf_counter()
    sol = exact_opt(inst, cap)
    elapsed = time.perf_counter() - start
    rep = check_feasible(sol.assignment, inst)
    return result_record(
        inst,
        algorithm="exact",
        assignment=sol.assignment,
        multiplicity=rep.multiplicity,
        cost=rep.cost,
        feasible=rep.feasible,
        violations=sorted(rep.violations),
        lower_bound=sol.cost,
        seed=seed,
        timings={"solve_seconds": round(elapsed, 6)},
    )


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def _rebuild(rec: dict, inst: Instance, what: str) -> Instance:
    """The reduced sub-instance a certificate claims to be about."""
    index = {nm: i for i, nm in enumerate(inst.names)}
    names = rec["vertices"]
    if any(nm not in index for nm in names):
        raise InstanceError(f"{what}: names vertices outside the instance")
    ids = [index[nm] for nm in names]
    local = {nm: i for i, nm in enumerate(names)}
    targets = set(rec["targets"])
    edges = []
    for a, b in rec["edges"]:
        if a not in index or b not in index or index[b] not in inst.adjacency[index[a]]:
            raise InstanceError(f"{what}: edge ({a}, {b}) is not in the instance")
        edges.append((local[a], local[b]))
    return Instance.build(
        [inst.cost[v] for v in ids],
        [inst.capacity[v] for v in ids],
        [inst.demand[v] if nm in targets else 0 for v, nm in zip(ids, names)],
        edges,
        names,
    )


def cmd_verify(inst: Instance, record: dict) -> list[Check]:
    """Re-derive every claim of a result file from scratch."""
    if list(record["vertices"]) != list(inst.names):
        raise InstanceError("result and instance list different vertex sets")
    index = {nm: i for i, nm in enumerate(inst.names)}
    checks: list[Check] = []
    f = read_triples(record["assignment"], index, "assignment")
    rep = check_feasible(f, inst)
    missing = ", ".join(f"{inst.names[v]} short by {a}" for v, a in sorted(rep.violations.items()))
    checks.append(Check("feasibility", rep.feasible, missing))
    checks.append(Check("feasible-flag", rep.feasible == bool(record["feasible"]),
                        f"recorded {record['feasible']}, recomputed {rep.feasible}"))
    x = multiplicity_of(f, inst)
    bad_x = [inst.names[v] for v in range(inst.n)
             if v >= len(record["multiplicity"]) or record["multiplicity"][v] != x[v]]
    checks.append(Check("multiplicity", not bad_x and len(record["multiplicity"]) == inst.n,
                        f"mismatch at {', '.join(bad_x)}" if bad_x else ""))
    cost = cost_of(x, inst)
    checks.append(Check("cost", Fraction(record["cost"]) == cost,
                        f"recorded {record['cost']}, recomputed {cost}"))

    algorithm = record.get("algorithm")
    factor = {"outerplanar": OUTERPLANAR_FACTOR, "planar": PLANAR_FACTOR}.get(algorithm)
    if factor is None:
        return checks
    lifted = []
    per_residue = [Fraction(0)] * 3
    best_piece = Fraction(0)
    for i, rec in enumerate(record["certificates"]):
        what = f"certificate {i} ({rec.get('label', '?')})"
        h = _rebuild(rec, inst, what)
        hidx = {nm: k for k, nm in enumerate(h.names)}
        dual = read_dual(rec["dual"], hidx, h.n, what)
        drep = verify_dual(dual, h)
        detail = "; ".join(
            f"{v.kind} constraint at {','.join(h.names[k] for k in v.where)} off by {-v.slack}"
            for v in drep.violations[:5]
        )
        checks.append(Check(f"{what} dual", drep.ok, detail))
        value = dual_value(dual, h)
        checks.append(Check(f"{what} dual value", Fraction(rec["dual_value"]) == value,
                            f"recorded {rec['dual_value']}, recomputed {value}"))
        g = read_triples(rec["assignment"], hidx, what)
        hrep = check_feasible(g, h)
        checks.append(Check(f"{what} feasibility", hrep.feasible,
                            ", ".join(h.names[v] for v in sorted(hrep.violations))))
        checks.append(Check(f"{what} charging bound", hrep.cost <= factor * value,
                            f"cost {hrep.cost} vs {factor} x {value}"))
        lifted.append({(index[h.names[v]], index[h.names[u]]): a for (v, u), a in g.items()})
        if algorithm == "outerplanar":
            per_residue[int(rec["residue"]) % 3] += value
        best_piece = max(best_piece, value)
    checks.append(Check("certificates cover assignment", combine(lifted) == f))
    if record.get("dual_lower_bound") is not None:
        bound = max(per_residue) / 2 if algorithm == "outerplanar" else best_piece / 2
        checks.append(Check("dual lower bound", Fraction(record["dual_lower_bound"]) == bound,
                            f"recorded {record['dual_lower_bound']}, recomputed {bound}"))
    return checks


def cmd_gapdemo(alpha: str, n: int, cap: int = DEFAULT_CAP) -> list[str]:
    r = lp_gap_demo(Fraction(alpha), n, cap)
    lines = [
        f"star with n={r.n}, alpha={r.alpha}",
        f"fractional cost {r.fractional_cost} (demand and capacity rows hold: {r.relaxed_ok})",
        f"integer optimum {r.integer_opt}",
        f"gap {r.gap}",
        f"pair constraint d(v) x(u) >= f(v,u) violated at {len(r.third_violations)} pairs",
    ]
    for v, u, slack in r.third_violations:
        lines.append(f"  v={v} u={u} slack={slack}")
    return lines


def cmd_dot(doc: InstanceFile, anchor: str | None = None) -> str:
    inst = doc.instance
    rs = _embedding_for(doc, "dot")
    a = inst.index(anchor) if anchor is not None else 0
    return ladder_to_dot(extract_ladder(inst, rs, a), inst)


def growth_exponent(sizes: Sequence[int], seconds: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(n)."""
    slope, _ = np.polyfit(np.log(sizes), np.log(seconds), 1)
    return float(slope)


def cmd_bench(sizes: Sequence[int], *, seed: int = 0, stage: str = "solve",
              repeat: int = 1) -> list[tuple[int, float]]:
    rows = []
    for n in sizes:
        inst, rs = gen_outerplanar(n, seed + n)
        best = float("inf")
        for _ in range(repeat):
            start = time.perf_counter()
            if stage == "ladder":
                extract_ladder(inst, rs, 0)
            else:
                solve_outerplanar(inst, rs)
            best = min(best, time.perf_counter() - start)
        rows.append((n, best))
    return rows


# --- plumbing -----------------------------------------------------------------

def _emit(text: str, out: str | None, default_name: str) -> None:
    target = out
    if target is None and os.environ.get(OUT_DIR_ENV):
        target = os.path.join(os.environ[OUT_DIR_ENV], default_name)
    if target is None:
        sys.stdout.write(text)
        return
    Path(target).parent.mkdir(parents=True, exist_ok=True)
    Path(target).write_text(text, encoding="utf-8")


def _load(path: str) -> InstanceFile:
    try:
        return read_instance(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None


def _range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="capdom", description="Capacitated domination toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance with embedding")
    g.add_argument("family", choices=["outerplanar", "grid"])
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--rows", type=int, default=3)
    g.add_argument("--cols", type=int, default=3)
    g.add_argument("--keep", type=float, default=1.0, help="chord keep probability")
    g.add_argument("--cost", type=_range, default=(1, 10), metavar="LO,HI")
    g.add_argument("--capacity", type=_range, default=(1, 10), metavar="LO,HI")
    g.add_argument("--demand", type=_range, default=(1, 5), metavar="LO,HI")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")

    s = sub.add_parser("solve", help="run the approximation pipeline")
    s.add_argument("instance")
    s.add_argument("--mode", choices=["outerplanar", "planar"], default="outerplanar")
    s.add_argument("--seed", type=int)
    s.add_argument("--event-log", help="write charging events to this file")
    s.add_argument("--out")

    e = sub.add_parser("exact", help="exact optimum by enumeration (small instances)")
    e.add_argument("instances", nargs="+")
    e.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)
    e.add_argument("--seed", type=int)
    e.add_argument("--out", help="result file (single instance only)")

    v = sub.add_parser("verify", help="re-check a result file against its instance")
    v.add_argument("instance")
    v.add_argument("result")

    d = sub.add_parser("gapdemo", help="integrality gap of the relaxation without pair rows")
    d.add_argument("alpha")
    d.add_argument("n", type=int)
    d.add_argument("--oracle-cap", type=int, default=DEFAULT_CAP)

    t = sub.add_parser("dot", help="Graphviz rendering of the layered ladder")
    t.add_argument("instance")
    t.add_argument("--anchor")
    t.add_argument("--out")

    b = sub.add_parser("bench", help="time the pipeline on a doubling series")
    b.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    b.add_argument("--stage", choices=["solve", "ladder"], default="solve")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    return p


def _run(args: argparse.Namespace) -> int:
    if args.command == "gen":
        text = cmd_gen(args.family, seed=args.seed, n=args.n, rows=args.rows, cols=args.cols,
                       keep=args.keep, cost=args.cost, capacity=args.capacity, demand=args.demand)
        size = f"n{args.n}" if args.family == "outerplanar" else f"{args.rows}x{args.cols}"
        _emit(text, args.out, f"{args.family}_{size}_s{args.seed}.capdom")
    elif args.command == "solve":
        doc = _load(args.instance)
        log: list[str] | None = [] if args.event_log else None
        record = cmd_solve(doc, args.mode, seed=args.seed, event_log=log)
        if log is not None:
            Path(args.event_log).write_text("\n".join(log) + "\n", encoding="utf-8")
        _emit(dump_result(record), args.out, f"{Path(args.instance).stem}.{args.mode}.json")
    elif args.command == "exact":
        if args.out and len(args.instances) > 1:
            raise FormatError("--out takes a single instance")
        for path in args.instances:
            record = cmd_exact(_load(path), args.oracle_cap, seed=args.seed)
            if len(args.instances) == 1 and (args.out or os.environ.get(OUT_DIR_ENV)):
                _emit(dump_result(record), args.out, f"{Path(path).stem}.exact.json")
            else:
                print(f"{path}\tOPT {record['cost']}")
    elif args.command == "verify":
        inst = _load(args.instance).instance
        try:
            record = load_result(Path(args.result).read_text(encoding="utf-8"))
        except OSError as exc:
            raise FormatError(f"{args.result}: {exc}") from None
        checks = cmd_verify(inst, record)
        for c in checks:
            print(c.line())
        if not all(c.ok for c in checks):
            raise VerificationFailed(f"{sum(not c.ok for c in checks)} check(s) failed")
    elif args.command == "gapdemo":
        alpha = Fraction(args.alpha)
        if alpha <= 1 or args.n < 2:
            raise InstanceError("gapdemo needs alpha > 1 and n >= 2")
        print("\n".join(cmd_gapdemo(args.alpha, args.n, args.oracle_cap)))
    elif args.command == "dot":
        _emit(cmd_dot(_load(args.instance), args.anchor), args.out,
              f"{Path(args.instance).stem}.dot")
    elif args.command == "bench":
        rows = cmd_bench(args.sizes, seed=args.seed, stage=args.stage, repeat=args.repeat)
        for n, sec in rows:
            print(f"n={n}\tseconds={sec:.4f}")
        if len(rows) > 1:
            print(f"fitted exponent {growth_exponent(*zip(*rows)):.3f}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScaleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (InstanceError, EmbeddingError, LadderError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
