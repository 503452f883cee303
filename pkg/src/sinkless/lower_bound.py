"""Supported-LOCAL lower-bound machinery packaged as an automatic refuter.

Candidate algorithms are black boxes: ``decide(si, root, known)`` maps the
input status of the edges visible at the algorithm's radius (an edge is
visible iff one endpoint is within that radius of the root) to an O/I label
per incident input edge. An optional ``batch`` form evaluates many inputs
at once; it receives 64-bit input masks (bit e = edge e is an input edge)
and returns, per incident edge, a boolean array (True = O). The refuter
only queries these callables.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .exec_models import LocalAlgorithm, View
from .graph_core import (
    Color,
    Graph,
    IdAssignment,
    TwoColoring,
    bfs_distances,
    girth,
    identity_ids,
    is_regular,
)
from .so_validate import (
    ACTIVE_SINK,
    I,
    MISSING_LABEL,
    O,
    PASSIVE_SINK,
    validate_bipartite,
)

ENUM_CAP_BITS = 26
SCALAR_CAP_BITS = 16
CHUNK_BITS = 16


class RefuterError(RuntimeError):
    pass


class PreconditionError(RefuterError):
    def __init__(self, msg: str, witness: Any = None):
        super().__init__(msg if witness is None else f"{msg} (witness {witness})")
        self.witness = witness


class EnumerationTooLarge(RefuterError):
    pass


class CertificateError(RefuterError):
    """A certificate failed re-verification: a bug sentinel."""


class LiftError(RefuterError):
    pass


class CapExceeded(RefuterError):
    pass


# ---------------------------------------------------------------- instances


class SupportInstance:
    """Support graph with coloring, identifiers and precomputed girth."""

    def __init__(self, G: Graph, coloring: TwoColoring, ids: IdAssignment | None = None, d: int | None = None):
        if not coloring.is_proper(G):
            raise ValueError("coloring is not a proper 2-coloring of the support graph")
        degs = set(G.degrees())
        if d is None:
            if len(degs) != 1:
                raise ValueError("support graph is not regular")
            d = degs.pop()
        elif not is_regular(G, d):
            raise ValueError(f"support graph is not {d}-regular")
        self.G = G
        self.coloring = coloring
        self.ids = ids if ids is not None else identity_ids(G.n)
        self.d = d
        self.girth = girth(G)
        self._vis: dict[tuple[int, int], tuple[int, ...]] = {}

    @property
    def m(self) -> int:
        return self.G.m

    def nodes(self, color: Color) -> list[int]:
        return self.coloring.nodes_of(color)

    def visible(self, v: int, r: int) -> tuple[int, ...]:
        key = (v, r)
        if key not in self._vis:
            es = set()
            for x in bfs_distances(self.G, v, r):
                for e, _ in self.G.incidence[x]:
                    es.add(e)
            self._vis[key] = tuple(sorted(es))
        return self._vis[key]

    def incident(self, v: int) -> list[int]:
        return [e for e, _ in self.G.incidence[v]]

    def edge_between(self, u: int, v: int) -> int:
        for e, w in self.G.incidence[u]:
            if w == v:
                return e
        raise KeyError(f"no edge between {u} and {v}")


def mask_of(edges) -> int:
    out = 0
    for e in edges:
        out |= 1 << e
    return out


def known_from_mask(edges: Sequence[int], mask: int) -> dict[int, bool]:
    return {e: bool(mask >> e & 1) for e in edges}


# ---------------------------------------------------------------- algorithms


@dataclass(frozen=True)
class BipartiteAlgorithm:
    name: str
    active: Color
    locality: int
    decide: Callable[[SupportInstance, int, Mapping[int, bool]], dict]
    batch: Callable | None = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Counterexample:
    input_edges: frozenset
    violating_node: int
    kind: str

    def as_dict(self, graph_ref: str = "") -> dict:
        return {
            "support_graph_ref": graph_ref,
            "input_edge_ids": sorted(self.input_edges),
            "violating_node": self.violating_node,
            "kind": self.kind,
        }


def run_decide(si: SupportInstance, alg: BipartiteAlgorithm, v: int, input_mask: int) -> dict:
    """Labels of ``alg`` at active node v under the given global input mask."""
    vis = si.visible(v, alg.locality)
    out = alg.decide(si, v, known_from_mask(vis, input_mask))
    want = {e for e in si.incident(v) if input_mask >> e & 1}
    if set(out) != want or any(x not in (O, I) for x in out.values()):
        raise RefuterError(f"{alg.name} at node {v} returned {out!r}; expected O/I on edges {sorted(want)}")
    return out


def labeling_for_input(si: SupportInstance, alg: BipartiteAlgorithm, input_edges, memo: dict | None = None) -> dict:
    mask = mask_of(input_edges)
    lab = {}
    for v in si.nodes(alg.active):
        if not any(mask >> e & 1 for e in si.incident(v)):
            continue
        if memo is not None:
            key = (v, mask & mask_of(si.visible(v, alg.locality)))
            out = memo.get(key)
            if out is None:
                out = memo[key] = run_decide(si, alg, v, mask)
        else:
            out = run_decide(si, alg, v, mask)
        for e, x in out.items():
            lab[(v, e)] = x
    return lab


def check_input(si: SupportInstance, alg: BipartiteAlgorithm, input_edges, memo: dict | None = None) -> list:
    lab = labeling_for_input(si, alg, input_edges, memo)
    return validate_bipartite(si.G, si.coloring, input_edges, alg.active, lab)


def verify_certificate(si: SupportInstance, alg: BipartiteAlgorithm, cex: Counterexample) -> bool:
    viol = check_input(si, alg, cex.input_edges)
    return any(x.node == cex.violating_node and x.kind == cex.kind for x in viol)


def _verified(si, alg, cex: Counterexample) -> Counterexample:
    if not verify_certificate(si, alg, cex):
        raise CertificateError(f"certificate {cex} does not verify against {alg.name}")
    return cex


# ---------------------------------------------------------------- enumeration


def _free_tables(free: Sequence[int]):
    lo = free[:CHUNK_BITS]
    hi = free[CHUNK_BITS:]
    idx = np.arange(1 << len(lo), dtype=np.uint64)
    low = np.zeros(1 << len(lo), dtype=np.uint64)
    for j, e in enumerate(lo):
        low |= ((idx >> np.uint64(j)) & np.uint64(1)) << np.uint64(e)
    return low, hi


def enumerate_masks(base: int, free: Sequence[int]):
    """Yield (first assignment index, masks) chunks covering all 2^k
    assignments of the ``free`` bits on top of ``base``; assignment index
    bit j sets edge free[j]."""
    if len(free) > ENUM_CAP_BITS:
        raise EnumerationTooLarge(f"{len(free)} free edges exceed the cap of {ENUM_CAP_BITS}")
    low, hi = _free_tables(list(free))
    step = len(low)
    for c in range(1 << len(hi)):
        h = base
        for j, e in enumerate(hi):
            if c >> j & 1:
                h |= 1 << e
        yield c * step, low | np.uint64(h)


def assignment_mask(base: int, free: Sequence[int], index: int) -> int:
    out = base
    for j, e in enumerate(free):
        if index >> j & 1:
            out |= 1 << e
    return out


def _batch_ok(si: SupportInstance, alg: BipartiteAlgorithm) -> bool:
    return alg.batch is not None and si.m <= 64


def possible_outputs(
    si: SupportInstance, alg: BipartiteAlgorithm, u: int, v: int, known: Mapping[int, bool]
) -> frozenset:
    """S(u, v): labels ``alg`` at v can put on {u, v} over all inputs on
    v's radius-T view compatible with ``known`` on u's radius-(T-1) view."""
    T = alg.locality
    if T < 1:
        raise PreconditionError("possible_outputs needs locality >= 1")
    e_uv = si.edge_between(u, v)
    if not known.get(e_uv, False):
        raise PreconditionError(f"edge {e_uv} between {u} and {v} is not an input edge in `known`")
    vis_u = set(si.visible(u, T - 1))
    vis_v = si.visible(v, T)
    free = [e for e in vis_v if e not in vis_u]
    base = mask_of(e for e in vis_v if e in vis_u and known.get(e, False))
    seen: set[str] = set()
    if _batch_ok(si, alg):
        for _, masks in enumerate_masks(base, free):
            res = alg.batch(si, v, masks)[e_uv]
            if res.any():
                seen.add(O)
            if not res.all():
                seen.add(I)
            if len(seen) == 2:
                break
    else:
        if len(free) > SCALAR_CAP_BITS:
            raise EnumerationTooLarge(
                f"{len(free)} free edges for scalar enumeration at ({u}, {v}); cap is {SCALAR_CAP_BITS}"
            )
        for a in range(1 << len(free)):
            seen.add(run_decide(si, alg, v, assignment_mask(base, free, a))[e_uv])
            if len(seen) == 2:
                break
    return frozenset(seen)


def _overlap_witness(si: SupportInstance, T: int, passive: Color):
    for u in si.nodes(passive):
        vis_u = set(si.visible(u, T - 1))
        nbrs = sorted(si.G.neighbors(u))
        free = {v: set(si.visible(v, T)) - vis_u for v in nbrs}
        for v, w in itertools.combinations(nbrs, 2):
            if free[v] & free[w]:
                return (u, v, w)
    return None


def eliminate_round(si: SupportInstance, alg: BipartiteAlgorithm, strict: bool = True) -> BipartiteAlgorithm:
    """Locality T-1 algorithm on the opposite color: O on {u, v} iff
    S(u, v) = {I}.

    The enumerated edge sets of different neighbours of a passive node must
    be disjoint; ``strict`` aborts with a witness triple when they are not,
    otherwise the overlap is recorded in ``meta`` and left to the lifting
    step (whose certificates are always re-verified).
    """
    T = alg.locality
    if not (0 < T and 2 * T < si.girth):
        raise PreconditionError(f"round elimination needs 0 < T < girth/2 (T={T}, girth={si.girth})")
    passive = alg.active.other()
    witness = _overlap_witness(si, T, passive)
    if witness is not None and strict:
        raise PreconditionError("enumerated edge sets of two neighbours overlap", witness)
    memo: dict = {}

    def decide(si_: SupportInstance, u: int, known: Mapping[int, bool]) -> dict:
        out = {}
        kkey = frozenset(e for e, x in known.items() if x)
        for e, v in si_.G.incidence[u]:
            if not known.get(e, False):
                continue
            key = (u, v, kkey)
            s = memo.get(key)
            if s is None:
                s = memo[key] = possible_outputs(si_, alg, u, v, known)
            out[e] = O if s == frozenset({I}) else I
        return out

    meta = {"parent": alg, "disjoint": witness is None, "overlap_witness": witness, "memo": memo}
    return BipartiteAlgorithm(f"elim({alg.name})", passive, T - 1, decide, None, meta)


# ---------------------------------------------------------------- zero round


@dataclass
class ZeroRoundResult:
    certificate: Counterexample
    branch: str
    queries: int
    label_sets: dict


def refute_zero_round_detailed(si: SupportInstance, alg0: BipartiteAlgorithm) -> ZeroRoundResult:
    if alg0.locality != 0:
        raise PreconditionError(f"expected a locality-0 algorithm, got {alg0.locality}")
    if si.d != 5:
        raise PreconditionError(f"the zero-round argument is only run on 5-regular graphs (d={si.d})")
    active = sorted(si.nodes(alg0.active))
    passive = sorted(si.nodes(alg0.active.other()), key=lambda x: (si.ids[x], x))
    d = si.d
    label_sets: dict[int, set] = {e: set() for e in range(si.m)}
    outputs: dict[tuple[int, int], dict] = {}
    queries = 0
    for v in active:
        inc = si.incident(v)
        for cfg in range(1 << d):
            known = {inc[i]: bool(cfg >> i & 1) for i in range(d)}
            out = alg0.decide(si, v, known)
            queries += 1
            want = {e for e in inc if known[e]}
            if set(out) != want or any(x not in (O, I) for x in out.values()):
                raise RefuterError(f"{alg0.name} at {v} returned {out!r}")
            outputs[(v, cfg)] = out
            for e, x in out.items():
                label_sets[e].add(x)
    if queries > len(active) * (1 << d):
        raise RefuterError("query budget exceeded")
    only_i = frozenset({I})

    for v in sorted(active, key=lambda x: (si.ids[x], x)):
        inc = si.incident(v)
        non_i = [e for e in inc if label_sets[e] != only_i]
        if len(non_i) <= 2:
            pick = [e for e in inc if label_sets[e] == only_i][:3]
            cex = Counterexample(frozenset(pick), v, ACTIVE_SINK)
            return ZeroRoundResult(_verified(si, alg0, cex), "A", queries, label_sets)

    for u in passive:
        cand = sorted(e for e, _ in si.G.incidence[u] if label_sets[e] != only_i)
        if len(cand) < 3:
            continue
        chosen = cand[:3]
        inputs: set[int] = set()
        for e in chosen:
            v = si.G.other(e, u)
            inc = si.incident(v)
            i = inc.index(e)
            cfg = next(c for c in range(1 << d) if c >> i & 1 and outputs[(v, c)][e] == O)
            inputs.update(inc[j] for j in range(d) if cfg >> j & 1)
        cex = Counterexample(frozenset(inputs), u, PASSIVE_SINK)
        return ZeroRoundResult(_verified(si, alg0, cex), "B", queries, label_sets)
    raise RefuterError("neither branch applies: the algorithm is not total, or this is a bug")


def refute_zero_round(si: SupportInstance, alg0: BipartiteAlgorithm) -> Counterexample:
    return refute_zero_round_detailed(si, alg0).certificate


# ---------------------------------------------------------------- lifting


def _labels_o(si: SupportInstance, alg: BipartiteAlgorithm, v: int, e: int, masks: np.ndarray) -> np.ndarray:
    if _batch_ok(si, alg):
        return np.asarray(alg.batch(si, v, masks)[e], dtype=bool)
    return np.fromiter((run_decide(si, alg, v, int(x))[e] == O for x in masks), dtype=bool, count=len(masks))


def _first_joint(si, alg, base: int, free: list[int], targets: list[tuple[int, int]]) -> int | None:
    if not _batch_ok(si, alg) and len(free) > SCALAR_CAP_BITS:
        raise EnumerationTooLarge(f"{len(free)} free edges without a batch form")
    for start, masks in enumerate_masks(base, free):
        ok = np.ones(len(masks), dtype=bool)
        for v, e in targets:
            ok &= _labels_o(si, alg, v, e, masks)
            if not ok.any():
                break
        hit = np.flatnonzero(ok)
        if hit.size:
            return start + int(hit[0])
    return None


def lift_counterexample(
    si: SupportInstance,
    alg_t: BipartiteAlgorithm,
    cex: Counterexample,
    eliminated: BipartiteAlgorithm | None = None,
) -> Counterexample:
    """Turn a certificate against eliminate_round(alg_t) into one against alg_t."""
    elim = eliminated if eliminated is not None else eliminate_round(si, alg_t, strict=False)
    if not verify_certificate(si, elim, cex):
        raise LiftError(f"certificate {cex} does not verify against {elim.name}")
    T = alg_t.locality
    H = mask_of(cex.input_edges)
    if cex.kind == PASSIVE_SINK:
        # every active neighbour of the sink saw S = {I}, so alg_t outputs I on all of them
        return _verified(si, alg_t, Counterexample(cex.input_edges, cex.violating_node, ACTIVE_SINK))
    if cex.kind != ACTIVE_SINK:
        raise LiftError(f"cannot lift a {cex.kind} certificate")
    u = cex.violating_node
    targets = [(si.G.other(e, u), e) for e in si.incident(u) if H >> e & 1]
    vis_u = set(si.visible(u, T - 1))
    fixed = H & mask_of(vis_u)
    frees = {v: [e for e in si.visible(v, T) if e not in vis_u] for v, _ in targets}
    if all(
        _labels_o(si, alg_t, v, e, np.array([H], dtype=np.uint64))[0] for v, e in targets
    ) and si.m <= 64 or (si.m > 64 and all(run_decide(si, alg_t, v, H)[e] == O for v, e in targets)):
        new = H
    else:
        union = sorted(set().union(*frees.values()))
        rest = H & ~mask_of(union) & ~mask_of(vis_u)
        base = fixed | rest
        disjoint = sum(len(f) for f in frees.values()) == len(union)
        if disjoint:
            new = base
            for v, e in targets:
                idx = _first_joint(si, alg_t, base, frees[v], [(v, e)])
                if idx is None:
                    raise LiftError(f"no extension makes {v} output O on edge {e}")
                new |= assignment_mask(0, frees[v], idx)
        else:
            idx = _first_joint(si, alg_t, base, union, targets)
            if idx is None:
                raise LiftError(f"no consistent extension around node {u}: overlapping views conflict")
            new = assignment_mask(base, union, idx)
    edges = frozenset(e for e in range(si.m) if new >> e & 1)
    return _verified(si, alg_t, Counterexample(edges, u, PASSIVE_SINK))


# ---------------------------------------------------------------- pipeline


@dataclass
class RefutationResult:
    certificate: Counterexample
    chain: list
    level_certificates: list
    zero_round_branch: str
    queries: int


def refute_detailed(si: SupportInstance, alg: BipartiteAlgorithm) -> RefutationResult:
    T = alg.locality
    if 2 * T >= si.girth:
        raise PreconditionError(f"refute needs T < girth/2 (T={T}, girth={si.girth})")
    chain = [alg]
    for _ in range(T):
        chain.append(eliminate_round(si, chain[-1], strict=False))
    zr = refute_zero_round_detailed(si, chain[-1])
    cex = zr.certificate
    certs = [cex]
    for level in range(T - 1, -1, -1):
        cex = lift_counterexample(si, chain[level], cex, eliminated=chain[level + 1])
        certs.append(cex)
    return RefutationResult(_verified(si, alg, cex), chain, certs[::-1], zr.branch, zr.queries)


def refute(si: SupportInstance, alg: BipartiteAlgorithm) -> Counterexample:
    return refute_detailed(si, alg).certificate


def exhaustive_check(si: SupportInstance, alg: BipartiteAlgorithm, cap: int = 30) -> Counterexample | None:
    """First input (in increasing bitmask order, bit e = edge e) on which
    ``alg`` produces a violation, or None. Independent of the refuter: it
    only calls ``decide`` and the validator."""
    m = si.m
    if m > cap:
        raise CapExceeded(f"{m} edges exceed the exhaustive-search cap of {cap}")
    inc_masks = [mask_of(si.incident(v)) for v in range(si.G.n)]
    memo: dict = {}
    for mask in range(1, 1 << m):
        if not any((mask & im).bit_count() >= 3 for im in inc_masks):
            continue
        edges = [e for e in range(m) if mask >> e & 1]
        viol = [x for x in check_input(si, alg, edges, memo) if x.kind != MISSING_LABEL]
        if viol:
            x = viol[0]
            return Counterexample(frozenset(edges), x.node, x.kind)
    return None


# ---------------------------------------------------------------- encoding


def encode_bipartite(alg: LocalAlgorithm, active: Color, n: int | None = None) -> BipartiteAlgorithm:
    """Wrap an orientation-producing algorithm: O on edges directed away
    from the active node, I on edges directed toward it."""

    def locality_at(si):
        return alg.locality(si.G.n if n is None else n)

    def decide(si: SupportInstance, root: int, known: Mapping[int, bool]) -> dict:
        T = locality_at(si)
        view = View(
            si.G,
            si.ids,
            root,
            T,
            coloring=si.coloring,
            status_fn=lambda e: bool(known.get(e, False)),
            supported=True,
        )
        heads = alg.decide(view)
        out = {}
        for e, w in si.G.incidence[root]:
            if not known.get(e, False):
                continue
            h = heads.get(e) if isinstance(heads, Mapping) else None
            if h not in (root, w):
                raise RefuterError(f"{alg.name} did not orient input edge {e} at node {root}")
            out[e] = I if h == root else O
        return out

    T0 = alg.locality(n if n is not None else 2)
    return BipartiteAlgorithm(f"encoded({alg.name})", active, T0, decide)


# ---------------------------------------------------------------- strawmen


def _inc_sorted(si, v):
    return sorted(si.incident(v))


def constant_algorithm(label: str, active: Color = Color.BLACK, T: int = 0) -> BipartiteAlgorithm:
    def decide(si, v, known):
        return {e: label for e in si.incident(v) if known.get(e, False)}

    def batch(si, v, masks):
        val = np.full(len(masks), label == O, dtype=bool)
        return {e: val for e in si.incident(v)}

    return BipartiteAlgorithm(f"constant_{label}", active, T, decide, batch)


def parity_algorithm(active: Color = Color.BLACK, T: int = 0) -> BipartiteAlgorithm:
    """O on every input edge iff the input-degree is even."""

    def decide(si, v, known):
        mine = [e for e in si.incident(v) if known.get(e, False)]
        lab = O if len(mine) % 2 == 0 else I
        return {e: lab for e in mine}

    def batch(si, v, masks):
        cnt = np.bitwise_count(masks & np.uint64(mask_of(si.incident(v))))
        val = (cnt % 2) == 0
        return {e: val for e in si.incident(v)}

    return BipartiteAlgorithm("parity", active, T, decide, batch)


def lowest_edge_algorithm(active: Color = Color.BLACK, T: int = 0) -> BipartiteAlgorithm:
    """O on the input edge with the lowest EdgeId, I on the others."""

    def decide(si, v, known):
        mine = sorted(e for e in si.incident(v) if known.get(e, False))
        return {e: (O if i == 0 else I) for i, e in enumerate(mine)}

    def batch(si, v, masks):
        out = {}
        inc = _inc_sorted(si, v)
        for i, e in enumerate(inc):
            lower = np.uint64(mask_of(inc[:i]))
            out[e] = (masks & lower) == 0
        return out

    return BipartiteAlgorithm("lowest_edge_O", active, T, decide, batch)


def id_heuristic_algorithm(active: Color = Color.BLACK, T: int = 0) -> BipartiteAlgorithm:
    """O toward input neighbours with a larger Identifier; with locality >= 1
    such a neighbour must also have input-degree >= 2."""

    def decide(si, v, known):
        out = {}
        for e, w in si.G.incidence[v]:
            if not known.get(e, False):
                continue
            ok = si.ids[w] > si.ids[v]
            if ok and T >= 1:
                ok = sum(known.get(f, False) for f in si.incident(w)) >= 2
            out[e] = O if ok else I
        return out

    def batch(si, v, masks):
        out = {}
        for e, w in si.G.incidence[v]:
            if si.ids[w] > si.ids[v]:
                if T >= 1:
                    out[e] = np.bitwise_count(masks & np.uint64(mask_of(si.incident(w)))) >= 2
                else:
                    out[e] = np.ones(len(masks), dtype=bool)
            else:
                out[e] = np.zeros(len(masks), dtype=bool)
        return out

    return BipartiteAlgorithm("id_heuristic", active, T, decide, batch)


STRAWMEN = ("constant_O", "constant_I", "parity", "lowest_edge_O", "id_heuristic")


def strawman(name: str, T: int = 0, active: Color = Color.BLACK) -> BipartiteAlgorithm:
    if name == "constant_O":
        return constant_algorithm(O, active, T)
    if name == "constant_I":
        return constant_algorithm(I, active, T)
    if name == "parity":
        return parity_algorithm(active, T)
    if name == "lowest_edge_O":
        return lowest_edge_algorithm(active, T)
    if name == "id_heuristic":
        return id_heuristic_algorithm(active, T)
    raise KeyError(f"unknown strawman {name!r}")


# ---------------------------------------------------------------- seeded random algorithms

_M64 = (1 << 64) - 1


def _mix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def _mix_np(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _salt(seed: int, v: int, e: int) -> int:
    return _mix(_mix(_mix(seed) ^ v) ^ e)


def random_hash_algorithm(seed: int, T: int, active: Color = Color.BLACK) -> BipartiteAlgorithm:
    """Label = one pseudo-random bit of (seed, node, edge, whole visible input)."""

    def decide(si, v, known):
        vis = mask_of(si.visible(v, T))
        x = mask_of(e for e, b in known.items() if b) & vis
        return {e: (O if _mix(x ^ _salt(seed, v, e)) & 1 else I) for e in si.incident(v) if known.get(e, False)}

    def batch(si, v, masks):
        vis = np.uint64(mask_of(si.visible(v, T)))
        x = masks & vis
        return {e: (_mix_np(x ^ np.uint64(_salt(seed, v, e))) & np.uint64(1)).astype(bool) for e in si.incident(v)}

    return BipartiteAlgorithm(f"random_hash_{seed}_T{T}", active, T, decide, batch)


def random_table_algorithm(seed: int, T: int, active: Color = Color.BLACK, max_deps: int = 3) -> BipartiteAlgorithm:
    """Each (node, edge) reads a seeded subset of at most ``max_deps``
    visible edges and looks its label up in a seeded truth table."""
    cache: dict = {}

    def plan(si, v, e):
        key = (v, e)
        if key not in cache:
            h = _salt(seed, v, e)
            vis = list(si.visible(v, T))
            k = h % (max_deps + 1)
            deps = []
            state = h
            for _ in range(k):
                state = _mix(state)
                deps.append(vis[state % len(vis)])
            state = _mix(state)
            table = [(state >> i) & 1 for i in range(1 << k)]
            cache[key] = (deps, table)
        return cache[key]

    def decide(si, v, known):
        out = {}
        for e in si.incident(v):
            if not known.get(e, False):
                continue
            deps, table = plan(si, v, e)
            idx = sum(int(known.get(f, False)) << j for j, f in enumerate(deps))
            out[e] = O if table[idx] else I
        return out

    def batch(si, v, masks):
        out = {}
        for e in si.incident(v):
            deps, table = plan(si, v, e)
            idx = np.zeros(len(masks), dtype=np.int64)
            for j, f in enumerate(deps):
                idx |= ((masks >> np.uint64(f)) & np.uint64(1)).astype(np.int64) << j
            out[e] = np.asarray(table, dtype=bool)[idx]
        return out

    return BipartiteAlgorithm(f"random_table_{seed}_T{T}", active, T, decide, batch)


def random_algorithm(seed: int, T: int, active: Color = Color.BLACK) -> BipartiteAlgorithm:
    """Seeded family mixing whole-view hash labels and small truth tables."""
    if seed % 2:
        return random_table_algorithm(seed, T, active)
    return random_hash_algorithm(seed, T, active)


# ---------------------------------------------------------------- file formats


def view_digest(si: SupportInstance, v: int, T: int, known: Mapping[int, bool]) -> str:
    vis = si.visible(v, T)
    bits = "".join("1" if known.get(e, False) else "0" for e in vis)
    return hashlib.sha256(f"{v}|{T}|{bits}".encode()).hexdigest()[:16]


def dump_lookup_table(si: SupportInstance, alg: BipartiteAlgorithm) -> str:
    """Full table of a locality-0 algorithm."""
    if alg.locality != 0:
        raise ValueError("only locality-0 tables can be dumped exhaustively")
    lines = [f"# active={alg.active.value} T=0"]
    for v in si.nodes(alg.active):
        inc = _inc_sorted(si, v)
        for cfg in range(1 << len(inc)):
            known = {e: bool(cfg >> i & 1) for i, e in enumerate(inc)}
            out = alg.decide(si, v, known)
            labels = "".join(out[e] if known[e] else "-" for e in inc)
            lines.append(f"{v}; {cfg}; {labels}")
    return "\n".join(lines) + "\n"


def load_lookup_table(text: str, name: str = "table") -> BipartiteAlgorithm:
    """Rows "node; key; labels" where key is the incident-edge bitmask (T=0)
    or a view digest (T>=1); labels list O/I/- per incident edge in EdgeId
    order. A row "*; *; X" sets a default label X for missing rows."""
    active = Color.BLACK
    T = 0
    rows: dict[tuple[int, str], str] = {}
    default = None
    for ln in text.splitlines():
        s = ln.strip()
        if not s:
            continue
        if s.startswith("#"):
            for tok in s[1:].split():
                if tok.startswith("active="):
                    active = Color(tok.split("=", 1)[1])
                elif tok.startswith("T="):
                    T = int(tok.split("=", 1)[1])
            continue
        parts = [p.strip() for p in s.split(";")]
        if len(parts) != 3:
            raise ValueError(f"malformed lookup-table row: {ln!r}")
        if parts[0] == "*":
            default = parts[2]
            continue
        rows[(int(parts[0]), parts[1])] = parts[2]

    def decide(si, v, known):
        inc = _inc_sorted(si, v)
        if T == 0:
            key = str(sum(int(known.get(e, False)) << i for i, e in enumerate(inc)))
        else:
            key = view_digest(si, v, T, known)
        labels = rows.get((v, key))
        out = {}
        for i, e in enumerate(inc):
            if not known.get(e, False):
                continue
            if labels is None:
                if default is None:
                    raise RefuterError(f"lookup table has no row for node {v}, key {key}")
                out[e] = default
            else:
                out[e] = labels[i]
        return out

    return BipartiteAlgorithm(name, active, T, decide)


def dumps_certificate(cex: Counterexample, graph_ref: str) -> str:
    return json.dumps(cex.as_dict(graph_ref), sort_keys=True, indent=2) + "\n"


def loads_certificate(text: str) -> tuple[Counterexample, str]:
    d = json.loads(text)
    return Counterexample(frozenset(d["input_edge_ids"]), int(d["violating_node"]), d["kind"]), d.get("support_graph_ref", "")
