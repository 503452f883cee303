"""Deterministic SLOCAL sinkless orientation with locality O(log log n).

Pipeline stages (R = 2T+1):

1. ``mis_stage``   locality R     join I iff no I-node within distance R
2. ``owner_stage`` locality R     owner = lowest-Identifier nearest I-node
3. ``inter_stage`` locality 2R+2  greedy high-degree orientation of the
   cluster multigraph, one edge at a time, edges processed by their first
   processed endpoint in EdgeId order
4. ``intra_stage`` locality 2R+1  orient the edges inside the own cluster

Composed as ((1.2).3).4, the declared locality is R + 2R + 2(2R+2) +
2(2R+1) = 11R + 6 = 22T + 17.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .exec_models import (
    RunTrace,
    SlocalAlgorithm,
    State,
    View,
    compose_slocal,
    run_slocal,
)
from .graph_core import Multigraph, bfs_distances, build_multigraph
from .so_validate import (
    find_first_cycle,
    orient_toward_sources,
    threshold,
    validate_high_degree,
    validate_sinkless,
)


class LowDegreeLemmaError(RuntimeError):
    """An acyclic cluster whose nodes all have degree >= 3: impossible for a
    correct pipeline, so raising it flags a bug."""


class PipelineError(RuntimeError):
    pass


def t_param(n: int) -> int:
    """ceil(log2(floor(log2 n) + 1))."""
    if n < 2:
        raise ValueError("t_param needs n >= 2")
    return (threshold(n) - 1).bit_length()


def declared_locality(T: int) -> int:
    return 22 * T + 17


# ---------------------------------------------------------------- greedy


def _key_fn(ids):
    if ids is None:
        return lambda v: v
    return lambda v: ids[v]


def choose_head(a, b, sat, cnt, key, rule2: str = "fewer") -> tuple[int, int]:
    """Head endpoint of edge {a, b} and the rule used (1 or 2)."""
    if sat[a] or sat[b]:
        if sat[a] and sat[b]:
            return (a if key(a) < key(b) else b), 1
        return (a if sat[a] else b), 1
    if rule2 == "fewer" and cnt[a] != cnt[b]:
        return (a if cnt[a] < cnt[b] else b), 2
    return (a if key(a) < key(b) else b), 2


class GreedyRun:
    """Incremental greedy high-degree orientation of a multigraph.

    ``rule2="lowest_id"`` is a deliberately broken variant (rule 2 ignores
    the processed counts) used for mutation testing.
    """

    def __init__(self, g: Multigraph, n_threshold_source: int, ids=None, rule2: str = "fewer"):
        self.g = g
        self.key = _key_fn(ids)
        self.rule2 = rule2
        t = threshold(n_threshold_source)
        self.high = [g.degree(v) >= t for v in range(g.n)]
        self.sat = [not h for h in self.high]
        self.cnt = [0] * g.n
        self.inward = [0] * g.n
        self.parent = list(range(g.n))
        self.size = [1] * g.n
        self.orientation: dict[int, int] = {}

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def process(self, e: int) -> tuple[int, int]:
        a, b = self.g.edges[e]
        head, rule = choose_head(a, b, self.sat, self.cnt, self.key, self.rule2)
        tail = b if head == a else a
        self.orientation[e] = head
        self.cnt[a] += 1
        self.cnt[b] += 1
        self.inward[head] += 1
        self.sat[tail] = True
        if rule == 2:
            ra, rb = self.find(a), self.find(b)
            if ra != rb:
                if self.size[ra] < self.size[rb]:
                    ra, rb = rb, ra
                self.parent[rb] = ra
                self.size[ra] += self.size[rb]
        return head, rule

    def invariant_holds(self, v: int) -> bool:
        return self.sat[v] or self.size[self.find(v)] >= 2 ** self.inward[v]


def greedy_high_degree_so(
    g: Multigraph, n_threshold_source: int, edge_order: Sequence[int] | None = None, ids=None, rule2: str = "fewer"
) -> dict:
    run = GreedyRun(g, n_threshold_source, ids, rule2)
    for e in edge_order if edge_order is not None else range(g.m):
        run.process(e)
    return run.orientation


@dataclass
class InvariantResult:
    passed: bool
    step: int | None = None
    node: int | None = None


def greedy_invariant_check(
    g: Multigraph, n_threshold_source: int, edge_order: Sequence[int] | None = None, ids=None, rule2: str = "fewer"
) -> InvariantResult:
    """Replay the greedy run; after each step every unsatisfied node with b
    inward edges must sit in a rule-2 component of size >= 2**b.

    Only the head of the current edge gains an inward edge and component
    sizes never shrink, so checking the head after each step covers every
    node; a full sweep at the end double-checks this.
    """
    run = GreedyRun(g, n_threshold_source, ids, rule2)
    for i, e in enumerate(edge_order if edge_order is not None else range(g.m)):
        head, _ = run.process(e)
        if not run.invariant_holds(head):
            return InvariantResult(False, i, head)
    for v in range(g.n):
        if not run.invariant_holds(v):
            return InvariantResult(False, g.m, v)
    return InvariantResult(True)


# ---------------------------------------------------------------- clustering


@dataclass(frozen=True)
class Clustering:
    independent: frozenset
    owner: tuple
    T: int

    @property
    def centers(self) -> list[int]:
        return sorted(self.independent)


def _stage_T(T: int | None) -> Callable[[int], int]:
    if T is not None:
        return lambda n: T
    return t_param


def mis_stage(T: int | None = None) -> SlocalAlgorithm:
    tf = _stage_T(T)

    def locality(n):
        return 2 * tf(n) + 1

    def step(view: View):
        R = locality(view.n)
        seen = {view.root}
        frontier = [view.root]
        for _ in range(R):
            nxt = []
            for x in frontier:
                for _, y in view.incident(x):
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            for y in nxt:
                st = view.state(y)
                if st is not None and st.payload:
                    return State("mis/1", False), False
            frontier = nxt
            if not frontier:
                break
        return State("mis/1", True), True

    return SlocalAlgorithm("mis", locality, step)


def owner_stage(T: int | None = None) -> SlocalAlgorithm:
    tf = _stage_T(T)

    def locality(n):
        return 2 * tf(n) + 1

    def step(view: View):
        root = view.root
        if view.prior(root):
            return State("own/1"), (True, root)
        R = locality(view.n)
        seen = {root}
        frontier = [root]
        for _ in range(R):
            nxt = []
            for x in frontier:
                for _, y in view.incident(x):
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            hits = [y for y in nxt if view.prior(y)]
            if hits:
                return State("own/1"), (False, min(hits, key=view.id))
            frontier = nxt
            if not frontier:
                break
        raise PipelineError(f"node {root} has no independent node within distance {R}")

    return SlocalAlgorithm("owner", locality, step)


def slocal_clustering(g: Multigraph | None = None, n: int | None = None, T: int | None = None) -> SlocalAlgorithm:
    """MIS stage composed with the owner stage; outputs (in_I, owner).

    ``g`` and ``n`` are accepted for signature compatibility; the radius
    parameter comes from ``T`` or from the view's n.
    """
    if T is None and n is not None:
        T = t_param(n)
    return compose_slocal(mis_stage(T), owner_stage(T))


def clustering_from_outputs(outputs: Mapping[int, Any], n: int, T: int) -> Clustering:
    owner = [None] * n
    ind = set()
    for v, out in outputs.items():
        in_i, own = out[0], out[1]
        owner[v] = own
        if in_i:
            ind.add(v)
    if any(o is None for o in owner):
        raise PipelineError("clustering output is missing some nodes")
    return Clustering(frozenset(ind), tuple(owner), T)


def run_clustering(g: Multigraph, ids, sched, T: int | None = None, composed: bool = True) -> Clustering:
    T_ = t_param(g.n) if T is None else T
    if composed:
        outs, _ = run_slocal(g, ids, sched, slocal_clustering(T=T_))
    else:
        mis, _ = run_slocal(g, ids, sched, mis_stage(T_))
        outs, _ = run_slocal(g, ids, sched, owner_stage(T_), prior=mis)
    return clustering_from_outputs(outs, g.n, T_)


@dataclass
class ClusteringCheck:
    ok: bool
    problems: list = field(default_factory=list)
    max_owner_distance: int = 0


def check_clustering(g: Multigraph, c: Clustering) -> ClusteringCheck:
    """BFS oracle for the clustering invariants."""
    T = c.T
    problems = []
    ind = c.centers
    max_own = 0
    for x in ind:
        if c.owner[x] != x:
            problems.append(("center_not_self_owned", x))
        dist = bfs_distances(g, x, 2 * T + 1)
        for y in ind:
            if y != x and y in dist:
                problems.append(("independent_too_close", x, y, dist[y]))
        for y, d in bfs_distances(g, x, T).items():
            if c.owner[y] != x:
                problems.append(("radius_T_owner", y, x, d))
    for v in range(g.n):
        o = c.owner[v]
        if o not in c.independent:
            problems.append(("owner_not_independent", v, o))
            continue
        d = bfs_distances(g, v, 2 * T + 1).get(o)
        if d is None:
            problems.append(("owner_too_far", v, o))
        else:
            max_own = max(max_own, d)
    return ClusteringCheck(not problems, problems, max_own)


# ---------------------------------------------------------------- cluster graph


@dataclass(frozen=True)
class ClusterGraph:
    graph: Multigraph
    centers: tuple
    provenance: tuple

    def cluster_index(self) -> dict:
        return {c: i for i, c in enumerate(self.centers)}


def build_cluster_graph(g: Multigraph, c: Clustering) -> ClusterGraph:
    if len(c.owner) != g.n or any(o is None for o in c.owner):
        raise PipelineError("owner missing for some node")
    centers = tuple(sorted(set(c.owner)))
    idx = {x: i for i, x in enumerate(centers)}
    edges = []
    prov = []
    for e, (a, b) in enumerate(g.edges):
        ca, cb = c.owner[a], c.owner[b]
        if ca != cb:
            edges.append((idx[ca], idx[cb]))
            prov.append(e)
    return ClusterGraph(build_multigraph(len(centers), edges), centers, tuple(prov))


def check_provenance(g: Multigraph, c: Clustering, cg: ClusterGraph) -> bool:
    inter = [e for e, (a, b) in enumerate(g.edges) if c.owner[a] != c.owner[b]]
    if sorted(cg.provenance) != inter or len(set(cg.provenance)) != len(cg.provenance):
        return False
    for ce, e in enumerate(cg.provenance):
        a, b = g.edges[e]
        x, y = cg.graph.edges[ce]
        if {cg.centers[x], cg.centers[y]} != {c.owner[a], c.owner[b]}:
            return False
    return True


# ---------------------------------------------------------------- inter / intra


def _cluster_scan(view: View, center: int, owner_of: Callable[[int], int]):
    """Members of ``center``'s cluster and its boundary edges (e, member, outsider)."""
    members = {center}
    order = [center]
    q = deque([center])
    boundary = []
    intra = {}
    while q:
        x = q.popleft()
        for e, y in view.incident(x):
            if owner_of(y) == center:
                if y not in members:
                    members.add(y)
                    order.append(y)
                    q.append(y)
                intra[e] = (x, y)
            else:
                boundary.append((e, x, y))
    return members, order, boundary, intra


def inter_stage(T: int | None = None) -> SlocalAlgorithm:
    tf = _stage_T(T)

    def locality(n):
        return 2 * (2 * tf(n) + 1) + 2

    def step(view: View):
        root = view.root
        in_i, me = view.prior(root)
        todo = []
        for e, w in sorted(view.incident(root)):
            if view.prior(w)[1] != me and view.state(w) is None:
                todo.append((e, w))
        if not todo:
            return State("inter/1", {}), (in_i, me, {})
        th = threshold(view.n)

        def owner_of(x):
            return view.prior(x)[1]

        def decided(e, a, b):
            for x in (a, b):
                st = view.state(x)
                if st is not None and e in st.payload:
                    return st.payload[e]
            return None

        sat, cnt = {}, {}
        for center in {me} | {view.prior(w)[1] for _, w in todo}:
            members, _, boundary, _ = _cluster_scan(view, center, owner_of)
            heads = [decided(e, a, b) for e, a, b in boundary]
            done = [h for h in heads if h is not None]
            cnt[center] = len(done)
            sat[center] = len(boundary) < th or any(h not in members for h in done)
        decisions = {}
        for e, w in todo:
            other = view.prior(w)[1]
            head_c, _ = choose_head(me, other, sat, cnt, view.id)
            tail_c = other if head_c == me else me
            decisions[e] = root if head_c == me else w
            cnt[me] += 1
            cnt[other] += 1
            sat[tail_c] = True
        return State("inter/1", decisions), (in_i, me, decisions)

    return SlocalAlgorithm("inter", locality, step)


def find_cycle_or_low_degree(sub: Multigraph, degrees: Sequence[int] | None = None, ids=None):
    """("cycle", [(edge, tail, head), ...]) if ``sub`` has a cycle, else
    ("node", v) for the lowest-Identifier node of degree <= 2.

    ``degrees`` overrides the degrees used for the low-degree test (the
    pipeline passes degrees in the original graph).
    """
    cyc = find_first_cycle(sub, range(sub.n), ids)
    if cyc is not None:
        return "cycle", cyc
    deg = sub.degrees() if degrees is None else list(degrees)
    cands = [v for v in range(sub.n) if deg[v] <= 2]
    if not cands:
        raise LowDegreeLemmaError(
            f"acyclic subgraph on {sub.n} nodes with minimum degree {min(deg, default=0)}"
        )
    key = _key_fn(ids)
    return "node", min(cands, key=key)


def orient_cluster(
    members: Sequence[int],
    intra: Mapping[int, tuple[int, int]],
    inter_heads: Sequence[tuple[int, int, int]],
    id_of: Callable[[int], int],
    degree_of: Callable[[int], int],
) -> dict:
    """Orientation of a cluster's internal edges.

    ``inter_heads`` lists (edge, member endpoint, head). A cluster with an
    outgoing boundary edge orients everything toward the lowest-Identifier
    member owning such an edge; otherwise toward a canonical cycle or a
    node of original degree <= 2.
    """
    mem = sorted(members)
    local = {x: i for i, x in enumerate(mem)}
    eids = sorted(intra)
    sub = build_multigraph(len(mem), [(local[intra[e][0]], local[intra[e][1]]) for e in eids])
    lids = [id_of(x) for x in mem]
    outgoing = sorted({m for _, m, h in inter_heads if h != m}, key=id_of)
    skip = []
    heads = {}
    if outgoing:
        sources = [local[outgoing[0]]]
    else:
        kind, res = find_cycle_or_low_degree(sub, [degree_of(x) for x in mem], lids)
        if kind == "cycle":
            for le, _tail, head in res:
                heads[eids[le]] = mem[head]
                skip.append(le)
            sources = [t for _, t, _ in res]
        else:
            sources = [res]
    o = orient_toward_sources(sub, range(sub.n), sources, lids, skip=skip)
    for le, h in o.items():
        heads[eids[le]] = mem[h]
    return heads


def intra_stage(T: int | None = None) -> SlocalAlgorithm:
    tf = _stage_T(T)

    def locality(n):
        return 2 * (2 * tf(n) + 1) + 1

    def step(view: View):
        root = view.root
        me = view.prior(root)[1]

        def owner_of(x):
            return view.prior(x)[1]

        members, _, boundary, intra = _cluster_scan(view, me, owner_of)
        inter_heads = []
        for e, m, x in boundary:
            h = view.prior(m)[2].get(e)
            if h is None:
                h = view.prior(x)[2].get(e)
            if h is None:
                raise PipelineError(f"inter-cluster edge {e} has no decision")
            inter_heads.append((e, m, h))
        heads = orient_cluster(sorted(members), intra, inter_heads, view.id, view.degree)
        for e, _, h in inter_heads:
            heads[e] = h
        out = {e: heads[e] for e, _ in view.incident(root)}
        return State("intra/1"), out

    return SlocalAlgorithm("intra", locality, step)


def pipeline_stages(T: int | None = None) -> list[SlocalAlgorithm]:
    return [mis_stage(T), owner_stage(T), inter_stage(T), intra_stage(T)]


def sinkless_orientation_slocal(n: int | None = None, T: int | None = None) -> SlocalAlgorithm:
    """The composed four-stage pipeline; locality 22T+17."""
    if n is not None and n < 2:
        raise ValueError("pipeline needs n >= 2")
    mis, own, inter, intra = pipeline_stages(T)
    return compose_slocal(compose_slocal(compose_slocal(mis, own), inter), intra)


def assemble_orientation(g: Multigraph, outputs: Mapping[int, Mapping[int, int]]) -> dict:
    """Merge per-node edge heads; both endpoints must agree."""
    o: dict[int, int] = {}
    for v in sorted(outputs):
        for e, h in outputs[v].items():
            if e in o and o[e] != h:
                raise PipelineError(f"endpoints disagree on edge {e}: {o[e]} vs {h}")
            o[e] = h
    missing = [e for e in range(g.m) if e not in o]
    if missing:
        raise PipelineError(f"{len(missing)} edges left unoriented, first {missing[0]}")
    return o


def orient_inter_cluster(g: Multigraph, c: Clustering, ids, sched, cluster_g: ClusterGraph | None = None) -> dict:
    """Run the inter-cluster stage on a given clustering; returns the
    partial orientation of the inter-cluster edges."""
    prior = {v: (v in c.independent, c.owner[v]) for v in range(g.n)}
    outs, _ = run_slocal(g, ids, sched, inter_stage(c.T), prior=prior)
    partial = {}
    for v in outs:
        partial.update(outs[v][2])
    return partial


def orient_intra_cluster(g: Multigraph, c: Clustering, partial: Mapping[int, int], ids, sched) -> dict:
    """Run the intra-cluster stage given the inter-cluster orientation;
    returns the completed orientation."""
    dec: dict[int, dict] = {v: {} for v in range(g.n)}
    for e, h in partial.items():
        a, b = g.edges[e]
        dec[a][e] = h
    prior = {v: (v in c.independent, c.owner[v], dec[v]) for v in range(g.n)}
    outs, _ = run_slocal(g, ids, sched, intra_stage(c.T), prior=prior)
    return assemble_orientation(g, outs)


# ---------------------------------------------------------------- reports


@dataclass
class PipelineReport:
    n: int
    T: int
    declared_locality: int
    measured_max_radius: int
    cluster_count: int
    max_cluster_radius: int
    violations: list
    stage_reach: list = field(default_factory=list)
    lemma_errors: int = 0

    def payload(self) -> dict:
        return {
            "n": self.n,
            "T": self.T,
            "declared_locality": self.declared_locality,
            "measured_max_radius": self.measured_max_radius,
            "cluster_count": self.cluster_count,
            "max_cluster_radius": self.max_cluster_radius,
            "violations": [v.as_dict() for v in self.violations],
            "stage_reach": list(self.stage_reach),
        }


@dataclass
class ComposedRun:
    orientation: dict
    outputs: dict
    states: dict
    trace: RunTrace
    report: PipelineReport


def run_pipeline_composed(g: Multigraph, ids, sched, T: int | None = None) -> ComposedRun:
    """Faithful run of the composed pipeline through the lazy-view engine."""
    T_ = t_param(g.n) if T is None else T
    alg = sinkless_orientation_slocal(T=T)
    trace = RunTrace()
    outs, states = run_slocal(g, ids, sched, alg, trace=trace)
    o = assemble_orientation(g, outs)
    owners = {}
    for st in states.values():
        for u, (_, out) in st.cache.items():
            owners[u] = out[1]
    radius = 0
    for v, c in owners.items():
        radius = max(radius, bfs_distances(g, c, 2 * T_ + 1).get(v, 10**9))
    rep = PipelineReport(
        g.n,
        T_,
        alg.locality(g.n),
        trace.max_radius,
        len(set(owners.values())),
        radius,
        validate_sinkless(g, o),
    )
    return ComposedRun(o, outs, states, trace, rep)


# ---------------------------------------------------------------- vectorised engine


@dataclass
class FastRun:
    """Staged pipeline evaluated with array operations; every stage runs
    under the same schedule."""

    T: int
    in_I: Any
    owner: Any
    owner_dist: Any
    inter_heads: dict
    orientation: dict
    reach: list  # per-stage arrays of per-node reach bounds
    lemma_errors: int
    cluster_graph_edges: int

    @property
    def stage_reach(self) -> list[int]:
        return [int(r.max()) if len(r) else 0 for r in self.reach]

    @property
    def composed_reach(self) -> int:
        r1, r2, r3, r4 = self.stage_reach
        return r1 + 2 * r2 + 2 * r3 + 2 * r4


def _gather(indptr, indices, frontier):
    import numpy as np

    starts = indptr[frontier]
    cnts = indptr[frontier + 1] - starts
    total = int(cnts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    offs = np.cumsum(cnts) - cnts
    idx = np.arange(total) - np.repeat(offs, cnts) + np.repeat(starts, cnts)
    return indices[idx], np.repeat(frontier, cnts)


def fast_pipeline(g: Multigraph, ids, order: Sequence[int], T: int | None = None, strict: bool = True) -> FastRun:
    import numpy as np
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    n = g.n
    T_ = t_param(n) if T is None else T
    R = 2 * T_ + 1
    indptr, indices, _ = g.csr()
    order = np.asarray(list(order), dtype=np.int64)
    idarr = np.asarray(list(ids), dtype=np.int64)
    adj = csr_matrix((np.ones(len(indices)), indices, indptr), shape=(n, n))

    # stage 1: independent set in G^R under the schedule
    dist_i = np.full(n, np.inf)
    in_i = np.zeros(n, dtype=bool)
    reach1 = np.zeros(n, dtype=np.int64)
    for v in order.tolist():
        dv = dist_i[v]
        if dv > R:
            in_i[v] = True
            d = dijkstra(adj, directed=False, indices=v, unweighted=True, limit=R + 0.5)
            fin = d[np.isfinite(d)]
            reach1[v] = int(fin.max())
            np.minimum(dist_i, d, out=dist_i)
        else:
            reach1[v] = int(dv)

    # stage 2: lowest-Identifier nearest independent node
    dist = np.full(n, -1, dtype=np.int64)
    key = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    src = np.flatnonzero(in_i)
    dist[src] = 0
    key[src] = idarr[src]
    frontier = src
    k = 0
    while frontier.size:
        k += 1
        nb, par = _gather(indptr, indices, frontier)
        mask = dist[nb] == -1
        nb, pk = nb[mask], key[par[mask]]
        if nb.size == 0:
            break
        np.minimum.at(key, nb, pk)
        frontier = np.unique(nb)
        dist[frontier] = k
    if (dist < 0).any() or dist.max(initial=0) > R:
        raise PipelineError("independent set is not maximal in the power graph")
    by_id = np.argsort(idarr)
    owner = by_id[np.searchsorted(idarr[by_id], key)]
    reach2 = dist.copy()

    # stage 3: greedy on the cluster multigraph, edge order induced by the schedule
    ea = np.fromiter((a for a, _ in g.edges), dtype=np.int64, count=g.m)
    eb = np.fromiter((b for _, b in g.edges), dtype=np.int64, count=g.m)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    oa, ob = owner[ea], owner[eb]
    inter = np.flatnonzero(oa != ob)
    proc = np.where(pos[ea[inter]] < pos[eb[inter]], ea[inter], eb[inter])
    seq = inter[np.lexsort((inter, pos[proc]))]
    centers = np.unique(owner)
    cidx = np.full(n, -1, dtype=np.int64)
    cidx[centers] = np.arange(len(centers))
    rad = np.zeros(len(centers), dtype=np.int64)
    np.maximum.at(rad, cidx[owner], dist)
    cg = build_multigraph(len(centers), list(zip(cidx[oa[seq]].tolist(), cidx[ob[seq]].tolist())))
    run = GreedyRun(cg, n, ids=idarr[centers].tolist())
    inter_heads = {}
    seq_l = seq.tolist()
    for ce, e in enumerate(seq_l):
        hc, _ = run.process(ce)
        a, b = g.edges[e]
        inter_heads[e] = a if cidx[owner[a]] == hc else b
    if strict:
        bad = validate_high_degree(cg, run.orientation, n)
        if bad:
            raise PipelineError(f"cluster greedy left high-degree sinks: {bad[:3]}")
    deg = np.diff(indptr)
    reach3 = np.minimum(deg, 1)
    if seq.size:
        p = np.where(pos[ea[seq]] < pos[eb[seq]], ea[seq], eb[seq])
        q = np.where(p == ea[seq], eb[seq], ea[seq])
        own_r = dist[p] + rad[cidx[owner[p]]] + 1
        oth_r = 1 + dist[q] + rad[cidx[owner[q]]] + 1
        np.maximum.at(reach3, p, np.maximum(own_r, oth_r))

    # stage 4: per-cluster orientation
    orientation = dict(inter_heads)
    lemma_errors = 0
    members_of: dict[int, list[int]] = {}
    for v, c in enumerate(owner.tolist()):
        members_of.setdefault(c, []).append(v)
    intra_of: dict[int, dict] = {}
    for e in np.flatnonzero(oa == ob).tolist():
        intra_of.setdefault(int(oa[e]), {})[e] = g.edges[e]
    bnd_of: dict[int, list] = {}
    for e, h in inter_heads.items():
        a, b = g.edges[e]
        for m in (a, b):
            bnd_of.setdefault(int(owner[m]), []).append((e, m, h))
    id_list = idarr.tolist()
    degl = deg.tolist()
    for c, mem in members_of.items():
        try:
            heads = orient_cluster(mem, intra_of.get(c, {}), bnd_of.get(c, []), id_list.__getitem__, degl.__getitem__)
        except LowDegreeLemmaError:
            lemma_errors += 1
            if strict:
                raise
            continue
        orientation.update(heads)
    reach4 = dist + rad[cidx[owner]] + 1
    reach4 = np.where(deg > 0, reach4, dist)
    return FastRun(
        T_,
        in_i,
        owner,
        dist,
        inter_heads,
        orientation,
        [reach1, reach2, reach3, reach4],
        lemma_errors,
        len(seq_l),
    )


def fast_report(g: Multigraph, run: FastRun) -> PipelineReport:
    viol = validate_sinkless(g, run.orientation) if len(run.orientation) == g.m else [None]
    return PipelineReport(
        g.n,
        run.T,
        declared_locality(run.T),
        run.composed_reach,
        int(len(set(run.owner.tolist()))),
        int(run.owner_dist.max(initial=0)),
        viol,
        run.stage_reach,
        run.lemma_errors,
    )
