"""Acceptance matrix shared by the CLI and the test suite.

Each criterion returns a CriterionResult; trials are pure functions of
their key and the matrix seed, so results do not depend on scheduling.
"""

from __future__ import annotations

import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from .exec_models import SCHEDULES, make_schedule, perturbation_check, run_staged, stage_orders
from .graph_core import (
    ID_ADVERSARIES,
    caterpillar_graph,
    fixture,
    gnm_graph,
    ladder_graph,
    make_ids,
    path_graph,
    random_multigraph,
    random_regular,
    random_tree,
    bfs_distances,
)
from .lower_bound import (
    STRAWMEN,
    SupportInstance,
    check_input,
    eliminate_round,
    exhaustive_check,
    lift_counterexample,
    random_algorithm,
    refute,
    refute_detailed,
    refute_zero_round_detailed,
    strawman,
    verify_certificate,
)
from .slocal_so import (
    Clustering,
    assemble_orientation,
    build_cluster_graph,
    check_clustering,
    check_provenance,
    declared_locality,
    fast_pipeline,
    fast_report,
    greedy_high_degree_so,
    greedy_invariant_check,
    run_clustering,
    run_pipeline_composed,
    sinkless_orientation_slocal,
    t_param,
)
from .so_validate import MISSING_LABEL, global_orientation, validate_high_degree, validate_sinkless

THREADS_ENV = "SINKLESS_THREADS"

CRITERIA = {
    1: "end-to-end SLOCAL validity",
    2: "locality budget",
    3: "greedy invariant",
    4: "clustering invariants",
    5: "low-degree cluster lemma",
    6: "composition lemma",
    7: "zero-round refutation",
    8: "full refutation pipeline",
    9: "round-elimination soundness",
    10: "oracle agreement",
}

DEFAULT_REGULAR = tuple((n, d) for n in (1000, 10000, 100000) for d in (3, 5, 10))


@dataclass
class MatrixConfig:
    seed: int = 0
    regular: tuple = DEFAULT_REGULAR
    trees: tuple = (10000,)
    fig1_path: bool = True
    combos: int = 20
    greedy_graphs: int = 500
    greedy_orders: int = 100
    greedy_rule2: str = "fewer"
    cluster_graphs: int = 200
    composition_trials: int = 50
    perturbations: int = 200
    zero_round_random: int = 1000
    refute_T: int = 1
    elim_algorithms: int = 100
    oracle_instances: int = 1000
    heavy: bool = False
    criteria: tuple = tuple(CRITERIA)

    @classmethod
    def empty(cls) -> "MatrixConfig":
        return cls(
            regular=(),
            trees=(),
            fig1_path=False,
            combos=0,
            greedy_graphs=0,
            cluster_graphs=0,
            composition_trials=0,
            zero_round_random=0,
            elim_algorithms=0,
            oracle_instances=0,
        )

    @classmethod
    def from_dict(cls, d: dict) -> "MatrixConfig":
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise ValueError(f"unknown matrix config keys: {sorted(bad)}")
        kw = dict(d)
        for k in ("regular", "trees", "criteria"):
            if k in kw:
                kw[k] = tuple(tuple(x) if isinstance(x, list) else x for x in kw[k])
        return cls(**kw)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    trials: int = 0
    seconds: float = 0.0
    warning: str | None = None
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" [warning: {self.warning}]" if self.warning else ""
        return f"criterion {self.number:2d} {status} {self.name}: {self.detail} ({self.seconds:.1f}s){extra}"

    def payload(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": self.passed,
            "trials": self.trials,
            "detail": self.detail,
            "warning": self.warning,
        }


def _pmap(fn: Callable, items: list) -> list:
    workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _seed(*parts) -> int:
    return random.Random(repr(parts)).randrange(2**32)


def adversary_combos(k: int) -> list[tuple[str, str, int]]:
    """k (schedule, ids, seed) combinations: every schedule x id adversary,
    then extra random/random draws."""
    base = [(s, i, 0) for s in SCHEDULES for i in ID_ADVERSARIES]
    extra = 1
    while len(base) < k:
        base.append(("random", "random", extra))
        extra += 1
    return base[:k]


# ---------------------------------------------------------------- criteria 1, 2, 5


def _validity_graph(task):
    kind, params, combos, seed = task
    if kind == "regular":
        n, d = params
        g = random_regular(n, d, _seed(seed, "regular", n, d))
    elif kind == "tree":
        (n,) = params
        g = random_tree(n, _seed(seed, "tree", n))
    else:
        g = path_graph(7)
    records = []
    for sched_kind, id_kind, extra in combos:
        s = _seed(seed, kind, params, sched_kind, id_kind, extra)
        ids = make_ids(id_kind, g, s)
        sched = make_schedule(sched_kind, g, s)
        run = fast_pipeline(g, ids, sched.order, strict=False)
        rep = fast_report(g, run)
        rec = {
            "key": f"{kind}{params}/{sched_kind}/{id_kind}/{extra}",
            "n": g.n,
            "T": rep.T,
            "violations": len(rep.violations),
            "measured": rep.measured_max_radius,
            "declared": rep.declared_locality,
            "stage_reach": rep.stage_reach,
            "lemma_errors": rep.lemma_errors,
        }
        if g.n <= 64:
            cr = run_pipeline_composed(g, ids, sched)
            rec["violations"] += len(cr.report.violations)
            rec["measured"] = max(rec["measured"], cr.report.measured_max_radius)
        records.append(rec)
    return records


def validity_trials(cfg: MatrixConfig) -> list[dict]:
    combos = adversary_combos(cfg.combos)
    if not combos:
        return []
    tasks = [("regular", (n, d), combos, cfg.seed) for n, d in cfg.regular]
    tasks += [("tree", (n,), combos, cfg.seed) for n in cfg.trees]
    if cfg.fig1_path:
        tasks.append(("path", (7,), combos, cfg.seed))
    out = []
    for recs in _pmap(_validity_graph, tasks):
        out.extend(recs)
    return sorted(out, key=lambda r: r["key"])


def criterion_1(recs: list[dict]) -> tuple[bool, str]:
    bad = [r["key"] for r in recs if r["violations"]]
    return not bad, f"{len(recs)} trials, {len(bad)} with sinks" + (f" e.g. {bad[0]}" if bad else "")


def criterion_2(recs: list[dict]) -> tuple[bool, str]:
    bad = []
    for r in recs:
        T = t_param(r["n"])
        if r["T"] != T or r["declared"] != 22 * T + 17 or r["declared"] != declared_locality(T):
            bad.append((r["key"], "declared"))
        elif r["measured"] > r["declared"]:
            bad.append((r["key"], "measured"))
    anchors = t_param(10**5) == 5 and declared_locality(5) == 127
    worst = max((r["measured"] for r in recs), default=0)
    ok = not bad and anchors
    return ok, f"{len(recs)} trials, max measured {worst}, declared 22T+17, {len(bad)} over budget"


# ---------------------------------------------------------------- criterion 3


def _greedy_graph(task):
    i, orders, seed, rule2 = task
    rng = random.Random(_seed(seed, "greedy", i))
    n = rng.randint(1, 200)
    m = rng.randint(0, 800)
    g = random_multigraph(n, m, rng.randrange(2**32))
    # a cluster graph of a larger graph: the threshold source is at least n
    n_thr = n if i % 4 else rng.randint(n, 10**6)
    ids = list(range(n))
    rng.shuffle(ids)
    fails = []
    for j in range(orders):
        order = list(range(g.m))
        rng.shuffle(order)
        res = greedy_invariant_check(g, n_thr, order, ids, rule2)
        o = greedy_high_degree_so(g, n_thr, order, ids, rule2)
        if not res.passed or validate_high_degree(g, o, n_thr):
            fails.append((i, j, res.step, res.node))
    return fails


def criterion_3(cfg: MatrixConfig) -> tuple[bool, str, int]:
    tasks = [(i, cfg.greedy_orders, cfg.seed, cfg.greedy_rule2) for i in range(cfg.greedy_graphs)]
    fails = [f for fs in _pmap(_greedy_graph, tasks) for f in fs]
    total = cfg.greedy_graphs * cfg.greedy_orders
    return not fails, f"{total} runs, {len(fails)} failures" + (f" first {fails[0]}" if fails else ""), total


# ---------------------------------------------------------------- criteria 4, 5


def _cluster_graph(task):
    i, seed = task
    rng = random.Random(_seed(seed, "cluster", i))
    n = rng.randint(20, 150)
    T = rng.choice((1, 2, 3))
    fam = i % 4
    if fam == 0:
        g = gnm_graph(n, rng.randint(n, 3 * n), rng.randrange(2**32))
    elif fam == 1:
        g = random_regular(n - n % 2, rng.choice((3, 4)), rng.randrange(2**32))
    elif fam == 2:
        g = random_tree(n, rng.randrange(2**32))
    else:
        g = gnm_graph(n, rng.randint(n // 2, n), rng.randrange(2**32))
    s = rng.randrange(2**32)
    ids = make_ids(rng.choice(ID_ADVERSARIES), g, s)
    sched = make_schedule(rng.choice(SCHEDULES), g, s)
    c = run_clustering(g, ids, sched, T, composed=True)
    chk = check_clustering(g, c)
    prov = check_provenance(g, c, build_cluster_graph(g, c))
    run = fast_pipeline(g, ids, sched.order, T=T, strict=False)
    fast_c = Clustering(frozenset(np.flatnonzero(run.in_I).tolist()), tuple(run.owner.tolist()), T)
    fast_chk = check_clustering(g, fast_c)
    return {
        "key": i,
        "ok": chk.ok and prov and fast_chk.ok,
        "problems": chk.problems[:3] + fast_chk.problems[:3] + ([] if prov else ["provenance"]),
        "lemma_errors": run.lemma_errors,
        "sinks": len(fast_report(g, run).violations),
    }


def cluster_trials(cfg: MatrixConfig) -> list[dict]:
    return sorted(_pmap(_cluster_graph, [(i, cfg.seed) for i in range(cfg.cluster_graphs)]), key=lambda r: r["key"])


def criterion_4(recs: list[dict]) -> tuple[bool, str]:
    bad = [r for r in recs if not r["ok"]]
    return not bad, f"{len(recs)} graphs, {len(bad)} failing" + (f" e.g. {bad[0]['problems']}" if bad else "")


def criterion_5(c1: list[dict], c4: list[dict]) -> tuple[bool, str]:
    errs = sum(r["lemma_errors"] for r in c1) + sum(r["lemma_errors"] for r in c4)
    return errs == 0, f"{errs} impossibility errors over {len(c1) + len(c4)} trials"


# ---------------------------------------------------------------- criterion 6


def composition_graph(i: int, seed: int):
    rng = random.Random(_seed(seed, "compose", i))
    fam = i % 5
    if fam == 0:
        return ladder_graph(rng.randint(130, 160))
    if fam == 1:
        return caterpillar_graph(rng.randint(90, 130))
    if fam == 2:
        return random_tree(rng.randint(200, 300), rng.randrange(2**32))
    if fam == 3:
        return gnm_graph(rng.randint(30, 80), rng.randint(60, 160), rng.randrange(2**32))
    return random_regular(rng.randrange(20, 60, 2), 3, rng.randrange(2**32))


def _composition_trial(task):
    i, seed, perturbations = task
    g = composition_graph(i, seed)
    rng = random.Random(_seed(seed, "compose-adv", i))
    s = rng.randrange(2**32)
    ids = make_ids(rng.choice(ID_ADVERSARIES), g, s)
    sched = make_schedule(rng.choice(SCHEDULES), g, s)
    alg = sinkless_orientation_slocal()
    cr = run_pipeline_composed(g, ids, sched)
    staged = run_staged(g, ids, stage_orders(alg, cr.states, sched.order))
    equal = staged[-1] == cr.outputs and assemble_orientation(g, staged[-1]) == cr.orientation
    r = alg.locality(g.n)
    # perturb around the node with the largest eccentricity, processed as late as possible
    ecc = {v: max(bfs_distances(g, v).values()) for v in (0, g.n - 1, sched.order[-1])}
    v = max(ecc, key=lambda x: (ecc[x], x))
    pr = perturbation_check(alg, g, ids, v, r, perturbations, s, sched=sched.order)
    return {
        "key": i,
        "equal": equal,
        "valid": not cr.report.violations,
        "within": cr.report.measured_max_radius <= cr.report.declared_locality,
        "perturbation": pr.passed,
        "witness": pr.witness,
        "far": ecc[v] > r,
    }


def criterion_6(cfg: MatrixConfig) -> tuple[bool, str, int]:
    tasks = [(i, cfg.seed, cfg.perturbations) for i in range(cfg.composition_trials)]
    recs = sorted(_pmap(_composition_trial, tasks), key=lambda r: r["key"])
    bad = [r for r in recs if not (r["equal"] and r["valid"] and r["within"] and r["perturbation"])]
    far = sum(r["far"] for r in recs)
    detail = f"{len(recs)} trials ({far} with data beyond the radius), {len(bad)} failing"
    if bad:
        detail += f" e.g. trial {bad[0]['key']}"
    return not bad, detail, len(recs)


# ---------------------------------------------------------------- criteria 7-9


def _k6():
    g, col = fixture("k6_cover")
    return SupportInstance(g, col)


def criterion_7(cfg: MatrixConfig) -> tuple[bool, str, int]:
    si = _k6()
    algs = [strawman(nm, 0) for nm in STRAWMEN]
    algs += [random_algorithm(_seed(cfg.seed, "zero", k), 0) for k in range(cfg.zero_round_random)]
    budget = len(si.nodes(algs[0].active)) * 2**5
    bad = []
    worst = 0
    for a in algs:
        try:
            zr = refute_zero_round_detailed(si, a)
        except Exception as exc:  # noqa: BLE001 - any failure is a criterion failure
            bad.append((a.name, repr(exc)))
            continue
        worst = max(worst, zr.queries)
        viol = [x for x in check_input(si, a, zr.certificate.input_edges) if x.kind != MISSING_LABEL]
        if zr.queries > budget or not viol:
            bad.append((a.name, zr.queries))
    return not bad, f"{len(algs)} algorithms, max {worst}/{budget} queries, {len(bad)} failing", len(algs)


def criterion_8(cfg: MatrixConfig) -> tuple[bool, str, int, str | None]:
    si = _k6()
    bad = []
    for nm in STRAWMEN:
        a = strawman(nm, cfg.refute_T)
        try:
            cex = refute_detailed(si, a).certificate
        except Exception as exc:  # noqa: BLE001
            bad.append((nm, repr(exc)))
            continue
        indep = any(x.node == cex.violating_node and x.kind == cex.kind for x in check_input(si, a, cex.input_edges))
        ex = exhaustive_check(si, a, cap=30)
        if not indep or ex is None or not verify_certificate(si, a, ex):
            bad.append((nm, "cross-check"))
    detail = f"{len(STRAWMEN)} strawmen at T={cfg.refute_T}, {len(bad)} failing"
    warning = None
    if cfg.heavy:
        g, col = fixture("pg24")
        big = SupportInstance(g, col)
        ok = 0
        errs = []
        for nm in STRAWMEN:
            try:
                refute(big, strawman(nm, 2))
                ok += 1
            except Exception as exc:  # noqa: BLE001
                errs.append(type(exc).__name__)
        detail += f"; heavy T=2 on the 42-node fixture: {ok} refuted"
        if ok < 2:
            bad.append(("heavy", errs))
            detail += f" ({', '.join(sorted(set(errs)))})"
    else:
        warning = "heavy variant skipped (enable with --heavy)"
    return not bad, detail, len(STRAWMEN), warning


def criterion_9(cfg: MatrixConfig) -> tuple[bool, str, int]:
    si = _k6()
    bad = []
    lifted = 0
    for k in range(cfg.elim_algorithms):
        a = random_algorithm(_seed(cfg.seed, "elim", k), 1)
        try:
            el = eliminate_round(si, a, strict=False)
            cex = exhaustive_check(si, el, cap=30)
            if cex is None:
                continue
            up = lift_counterexample(si, a, cex, eliminated=el)
            if not verify_certificate(si, a, up):
                bad.append((a.name, "unverified"))
            lifted += 1
        except Exception as exc:  # noqa: BLE001
            bad.append((a.name, repr(exc)))
    detail = f"{cfg.elim_algorithms} algorithms, {lifted} violations lifted, {len(bad)} failing"
    if bad:
        detail += f" e.g. {bad[0][0]}: {bad[0][1]}"
    return not bad, detail, cfg.elim_algorithms


# ---------------------------------------------------------------- criterion 10


def oracle_graph(i: int, seed: int):
    rng = random.Random(_seed(seed, "oracle", i))
    big = i % 100 == 99
    n = rng.randint(2000, 10000) if big else rng.randint(1, 300)
    fam = i % 5
    s = rng.randrange(2**32)
    if fam == 0:
        d = rng.choice((3, 4, 5))
        n = max(n, d + 1)
        return random_regular(n + (n * d) % 2, d, s)
    if fam == 1:
        return random_tree(n, s)
    if fam == 2:
        return gnm_graph(n, rng.randint(0, 2 * n), s)
    if fam == 3:
        return random_multigraph(n, rng.randint(0, 3 * n), s)
    return gnm_graph(n, rng.randint(n // 2, n + 5), s)


def _oracle_chunk(task):
    lo, hi, seed = task
    bad = []
    for i in range(lo, hi):
        g = oracle_graph(i, seed)
        ids = list(range(1, g.n + 1))
        random.Random(_seed(seed, "oracle-ids", i)).shuffle(ids)
        if validate_sinkless(g, global_orientation(g, ids)):
            bad.append(i)
    return bad


def criterion_10(cfg: MatrixConfig) -> tuple[bool, str, int]:
    N = cfg.oracle_instances
    tasks = [(lo, min(N, lo + 100), cfg.seed) for lo in range(0, N, 100)]
    bad = [i for b in _pmap(_oracle_chunk, tasks) for i in b]
    return not bad, f"{N} instances, {len(bad)} failing", N


# ---------------------------------------------------------------- driver


@dataclass
class AcceptanceSummary:
    results: list
    warnings: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def payload(self) -> dict:
        return {
            "passed": self.passed,
            "criteria": [r.payload() for r in self.results],
            "warnings": list(self.warnings),
        }

    def meta(self) -> dict:
        return {"seconds": {str(r.number): round(r.seconds, 3) for r in self.results}}


def run_acceptance(cfg: MatrixConfig, on_result: Callable[[CriterionResult], None] | None = None) -> AcceptanceSummary:
    results: list[CriterionResult] = []
    warnings: list[str] = []
    want = set(cfg.criteria)
    cache: dict = {}

    def emit(num, passed, detail, trials, t0, warning=None):
        res = CriterionResult(num, CRITERIA[num], passed, detail, trials, time.perf_counter() - t0, warning)
        if trials == 0 and warning is None:
            res.warning = "no trials in matrix"
        if res.warning:
            warnings.append(f"criterion {num}: {res.warning}")
        results.append(res)
        if on_result:
            on_result(res)

    def c1_records():
        if "c1" not in cache:
            cache["c1"] = validity_trials(cfg)
        return cache["c1"]

    def c4_records():
        if "c4" not in cache:
            cache["c4"] = cluster_trials(cfg)
        return cache["c4"]

    for num in sorted(want):
        t0 = time.perf_counter()
        if num == 1:
            recs = c1_records()
            ok, d = criterion_1(recs)
            emit(1, ok, d, len(recs), t0)
        elif num == 2:
            recs = c1_records()
            ok, d = criterion_2(recs)
            emit(2, ok, d, len(recs), t0)
        elif num == 3:
            ok, d, k = criterion_3(cfg)
            emit(3, ok, d, k, t0)
        elif num == 4:
            recs = c4_records()
            ok, d = criterion_4(recs)
            emit(4, ok, d, len(recs), t0)
        elif num == 5:
            a = c1_records() if 1 in want else []
            b = c4_records() if 4 in want else []
            ok, d = criterion_5(a, b)
            emit(5, ok, d, len(a) + len(b), t0)
        elif num == 6:
            ok, d, k = criterion_6(cfg)
            emit(6, ok, d, k, t0)
        elif num == 7:
            if cfg.zero_round_random == 0 and cfg == MatrixConfig.empty():
                emit(7, True, "skipped", 0, t0)
                continue
            ok, d, k = criterion_7(cfg)
            emit(7, ok, d, k, t0)
        elif num == 8:
            if cfg == MatrixConfig.empty():
                emit(8, True, "skipped", 0, t0)
                continue
            ok, d, k, w = criterion_8(cfg)
            emit(8, ok, d, k, t0, w)
        elif num == 9:
            ok, d, k = criterion_9(cfg)
            emit(9, ok, d, k, t0)
        elif num == 10:
            ok, d, k = criterion_10(cfg)
            emit(10, ok, d, k, t0)
        else:
            raise ValueError(f"unknown criterion {num}")
    return AcceptanceSummary(results, warnings)
