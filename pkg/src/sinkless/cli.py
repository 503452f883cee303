"""Command-line harness: generate, run, refute, acceptance.

Exit codes: 0 success, 1 validation or refutation failure, 2 usage error.
Reports are {"payload": ..., "meta": ...}; only ``meta`` carries timings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time
from pathlib import Path

from .exec_models import SCHEDULES, make_schedule
from .graph_core import (
    FIXTURES,
    ID_ADVERSARIES,
    GraphError,
    bipartite_double_cover,
    complete_graph,
    dumps_edge_list,
    fixture,
    girth,
    is_regular,
    make_ids,
    random_regular,
    random_tree,
    read_edge_list,
    two_coloring,
)
from .lower_bound import (
    STRAWMEN,
    PreconditionError,
    RefuterError,
    SupportInstance,
    dumps_certificate,
    load_lookup_table,
    random_algorithm,
    refute_detailed,
    strawman,
)
from .slocal_so import fast_pipeline, fast_report, run_pipeline_composed

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMPOSED_MAX_N = 400


class UsageError(Exception):
    pass


def _meta(t0: float) -> dict:
    return {"seconds": round(time.perf_counter() - t0, 3), "host": platform.node(), "python": platform.python_version()}


def _emit(payload: dict, meta: dict, fmt: str, out: str | None, rows: list[dict] | None = None) -> None:
    if fmt == "csv":
        rows = rows if rows is not None else [payload]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps({"payload": payload, "meta": meta}, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_graph(spec: str):
    """Fixture name or edge-list path; returns (graph, coloring or None, ref)."""
    if spec in FIXTURES:
        g, col = fixture(spec)
        return g, col, f"fixture:{spec}"
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"graph {spec!r} is neither a fixture nor a file")
    try:
        g = read_edge_list(path)
    except GraphError as exc:
        raise UsageError(f"cannot parse {spec}: {exc}") from None
    return g, two_coloring(g), str(path)


# ---------------------------------------------------------------- generate


def cmd_generate(args) -> int:
    t0 = time.perf_counter()
    fam = args.family
    try:
        if fam == "regular":
            g = random_regular(args.n, args.d, args.seed)
        elif fam == "tree":
            g = random_tree(args.n, args.seed)
        elif fam == "double_cover":
            base = complete_graph(args.n) if args.d == args.n - 1 else random_regular(args.n, args.d, args.seed)
            g, _ = bipartite_double_cover(base)
        else:
            g, _ = fixture(args.name)
    except (GraphError, ValueError) as exc:
        raise UsageError(f"infeasible parameters: {exc}") from None
    if args.out:
        Path(args.out).write_text(dumps_edge_list(g))
    degs = set(g.degrees())
    gi = girth(g)
    summary = {
        "n": g.n,
        "m": g.m,
        "girth": gi if gi != float("inf") else None,
        "regular": degs.pop() if len(degs) == 1 and is_regular(g) else None,
    }
    _emit(summary, _meta(t0), args.format, None)
    return EXIT_OK


# ---------------------------------------------------------------- run


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    g, _, ref = _load_graph(args.graph)
    ids = make_ids(args.ids, g, args.seed)
    sched = make_schedule(args.schedule, g, args.seed)
    engine = args.engine
    if engine == "auto":
        engine = "composed" if g.n <= COMPOSED_MAX_N else "fast"
    if engine == "composed":
        rep = run_pipeline_composed(g, ids, sched).report
    else:
        rep = fast_report(g, fast_pipeline(g, ids, sched.order, strict=False))
    payload = {"graph": ref, "ids": args.ids, "schedule": args.schedule, "seed": args.seed, "engine": engine}
    payload.update(rep.payload())
    payload["lemma_errors"] = rep.lemma_errors
    ok = not rep.violations and rep.measured_max_radius <= rep.declared_locality and not rep.lemma_errors
    rows = None
    if args.format == "csv":
        flat = {k: v for k, v in payload.items() if k not in ("violations", "stage_reach")}
        flat["violations"] = len(rep.violations)
        rows = [flat]
    _emit(payload, _meta(t0), args.format, args.out, rows)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- refute


def _candidate(spec: str, T: int):
    if spec in STRAWMEN:
        return strawman(spec, T)
    if spec.startswith("random:"):
        return random_algorithm(int(spec.split(":", 1)[1]), T)
    path = Path(spec)
    if path.exists():
        alg = load_lookup_table(path.read_text(), name=path.name)
        if alg.locality != T:
            raise UsageError(f"table has locality {alg.locality}, but T={T} was requested")
        return alg
    raise UsageError(f"unknown candidate {spec!r}: use a strawman name, random:SEED, or a table file")


def cmd_refute(args) -> int:
    t0 = time.perf_counter()
    g, col, ref = _load_graph(args.graph)
    if col is None:
        raise UsageError("support graph is not bipartite")
    try:
        si = SupportInstance(g, col)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    alg = _candidate(args.candidate, args.T)
    try:
        res = refute_detailed(si, alg)
    except PreconditionError as exc:
        raise UsageError(f"precondition failed: {exc}") from None
    except RefuterError as exc:
        sys.stderr.write(f"refutation failed: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL
    cert = dumps_certificate(res.certificate, ref)
    if args.out:
        Path(args.out).write_text(cert)
    payload = json.loads(cert)
    payload.update({"candidate": alg.name, "T": args.T, "zero_round_branch": res.zero_round_branch, "queries": res.queries})
    _emit(payload, _meta(t0), args.format, None)
    return EXIT_OK


# ---------------------------------------------------------------- acceptance


def cmd_acceptance(args) -> int:
    from .acceptance import MatrixConfig, run_acceptance

    t0 = time.perf_counter()
    if args.config:
        try:
            cfg = MatrixConfig.from_dict(json.loads(Path(args.config).read_text()))
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad matrix config: {exc}") from None
    else:
        cfg = MatrixConfig()
    cfg.seed = args.seed if args.seed is not None else cfg.seed
    cfg.heavy = cfg.heavy or args.heavy
    if args.criteria:
        cfg.criteria = tuple(int(x) for x in args.criteria.split(","))
    summary = run_acceptance(cfg, on_result=lambda r: sys.stderr.write(r.line() + "\n"))
    for w in summary.warnings:
        sys.stderr.write(f"warning: {w}\n")
    meta = _meta(t0)
    meta.update(summary.meta())
    rows = [r.payload() for r in summary.results]
    _emit(summary.payload(), meta, args.format, args.out, rows)
    return EXIT_OK if summary.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sinkless", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        if out:
            sp.add_argument("--out", "-o")

    g = sub.add_parser("generate", help="write a graph as an edge list")
    g.add_argument("family", choices=("regular", "tree", "double_cover", "fixture"))
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--name", choices=FIXTURES, default="k6_cover")
    common(g)
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("run", help="run the SLOCAL sinkless-orientation pipeline")
    r.add_argument("--graph", required=True)
    r.add_argument("--ids", choices=ID_ADVERSARIES, default="identity")
    r.add_argument("--schedule", choices=SCHEDULES, default="identity")
    r.add_argument("--engine", choices=("auto", "composed", "fast"), default="auto")
    common(r)
    r.set_defaults(fn=cmd_run)

    f = sub.add_parser("refute", help="refute a candidate bipartite algorithm")
    f.add_argument("--graph", default="k6_cover")
    f.add_argument("--candidate", required=True)
    f.add_argument("--T", type=int, default=0)
    common(f)
    f.set_defaults(fn=cmd_refute)

    a = sub.add_parser("acceptance", help="run the acceptance matrix")
    a.add_argument("--config")
    a.add_argument("--criteria", help="comma-separated criterion numbers")
    a.add_argument("--heavy", action="store_true")
    a.add_argument("--seed", type=int, default=None)
    a.add_argument("--format", choices=("json", "csv"), default="json")
    a.add_argument("--out", "-o")
    a.set_defaults(fn=cmd_acceptance)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
