"""Execution semantics for LOCAL, SLOCAL and supported LOCAL.

Algorithms only see the world through a :class:`View`. Views are lazy: the
distance from the root is explored on demand, every access is checked
against the radius (``LocalityError`` otherwise) and the largest distance
actually touched is recorded as the measured radius.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .graph_core import Color, IdAssignment, Multigraph, TwoColoring, bfs_distances

INPUT = "input"
NON_INPUT = "non_input"
UNKNOWN = "unknown"


class LocalityError(RuntimeError):
    def __init__(self, root: int, radius: int, what: str):
        super().__init__(f"view at {root} with radius {radius} cannot see {what}")
        self.root = root
        self.radius = radius


class AlgorithmError(RuntimeError):
    def __init__(self, node: int, position: int | None, cause: BaseException):
        where = f"node {node}" if position is None else f"node {node} (schedule position {position})"
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")
        self.node = node
        self.position = position
        self.cause = cause


@dataclass(frozen=True)
class State:
    """Opaque node state; ``tag`` names the producing algorithm and version."""

    tag: str
    payload: Any = None


class View:
    """Radius-limited window rooted at a node.

    ``state_fn`` and ``prior_fn`` return a node's SLOCAL state (None when
    unprocessed) and the output of an earlier stage. A view created with
    ``derived`` forwards every access to its parent as well, so nested
    algorithms are charged against the outer radius.
    """

    def __init__(
        self,
        g: Multigraph,
        ids: IdAssignment | Sequence[int],
        root: int,
        radius: int,
        *,
        coloring: TwoColoring | None = None,
        status_fn: Callable[[int], bool] | None = None,
        state_fn: Callable[[int], Any] | None = None,
        prior_fn: Callable[[int], Any] | None = None,
        n: int | None = None,
        supported: bool = False,
        enforce: bool = True,
        parent: "View | None" = None,
    ):
        if radius < 0:
            raise ValueError("radius must be non-negative")
        self.g = g
        self._ids = ids
        self.root = root
        self.radius = radius
        self._coloring = coloring
        self._status_fn = status_fn
        self._state_fn = state_fn or (lambda x: None)
        self._prior_fn = prior_fn or (lambda x: None)
        self.n = g.n if n is None else n
        self.supported = supported
        self.enforce = enforce
        self._parent = parent
        self._dist = {root: 0}
        self._frontier = [root]
        self._level = 0
        self.reach = 0

    # -- distance bookkeeping

    def _distance(self, x: int) -> int | None:
        d = self._dist.get(x)
        if d is not None:
            return d
        inc = self.g.incidence
        while self._frontier and self._level < self.radius:
            nxt = []
            lvl = self._level + 1
            for a in self._frontier:
                for _, b in inc[a]:
                    if b not in self._dist:
                        self._dist[b] = lvl
                        nxt.append(b)
            self._frontier = nxt
            self._level = lvl
            if x in self._dist:
                return lvl
        return None

    def _touch(self, x: int) -> None:
        if self.enforce:
            d = self._distance(x)
            if d is None:
                raise LocalityError(self.root, self.radius, f"node {x}")
            if d > self.reach:
                self.reach = d
        if self._parent is not None:
            self._parent._touch(x)

    def _edge_visible(self, e: int) -> bool:
        if not self.enforce:
            return True
        a, b = self.g.edges[e]
        ds = [d for d in (self._distance(a), self._distance(b)) if d is not None]
        if not ds:
            return False
        if min(ds) > self.reach:
            self.reach = min(ds)
        return True

    def _touch_edge(self, e: int) -> bool:
        ok = self._edge_visible(e)
        if ok and self._parent is not None:
            ok = self._parent._touch_edge(e)
        return ok

    def sees(self, x: int) -> bool:
        return not self.enforce or self._distance(x) is not None

    def distance(self, x: int) -> int:
        """Distance from the root (only for nodes inside the view)."""
        self._touch(x)
        d = self._dist.get(x)
        if d is None:
            d = bfs_distances(self.g, self.root).get(x)
        return d

    # -- content

    def id(self, x: int) -> int:
        if not self.supported:
            self._touch(x)
        return self._ids[x]

    def color(self, x: int) -> Color | None:
        if not self.supported:
            self._touch(x)
        return None if self._coloring is None else self._coloring[x]

    def incident(self, x: int) -> tuple[tuple[int, int], ...]:
        if not self.supported:
            self._touch(x)
        return self.g.incidence[x]

    def degree(self, x: int) -> int:
        return len(self.incident(x))

    def endpoints(self, e: int) -> tuple[int, int]:
        if not self.supported and not self._touch_edge(e):
            raise LocalityError(self.root, self.radius, f"edge {e}")
        return self.g.edges[e]

    def input_status(self, e: int) -> str:
        if not self._touch_edge(e):
            if self.supported:
                return UNKNOWN
            raise LocalityError(self.root, self.radius, f"edge {e}")
        if self._status_fn is None:
            return INPUT
        return INPUT if self._status_fn(e) else NON_INPUT

    def state(self, x: int) -> Any:
        self._touch(x)
        return self._state_fn(x)

    def prior(self, x: int) -> Any:
        self._touch(x)
        return self._prior_fn(x)

    def ball(self, center: int, r: int) -> list[int]:
        """Nodes within distance r of ``center`` (BFS order), all touched."""
        dist = bfs_distances(self.g, center, r)
        out = sorted(dist, key=lambda x: (dist[x], x))
        for x in out:
            self._touch(x)
        return out

    def nodes(self) -> list[int]:
        return self.ball(self.root, self.radius)

    def visible_edges(self) -> list[int]:
        seen = set()
        for x in self.nodes():
            for e, _ in self.g.incidence[x]:
                seen.add(e)
        return sorted(seen)

    def derived(self, root: int, radius: int, state_fn=None, prior_fn=None) -> "View":
        return View(
            self.g,
            self._ids,
            root,
            radius,
            coloring=self._coloring,
            status_fn=self._status_fn,
            state_fn=state_fn,
            prior_fn=prior_fn,
            n=self.n,
            supported=self.supported,
            enforce=self.enforce,
            parent=self,
        )


def make_view(
    g: Multigraph,
    ids,
    coloring: TwoColoring | None,
    input_edges,
    states: Mapping[int, Any] | None,
    root: int,
    r: int,
    supported: bool = False,
    prior: Mapping[int, Any] | None = None,
    enforce: bool = True,
) -> View:
    """``input_edges``: None (every edge is input), a set of input EdgeIds,
    or a mapping EdgeId -> bool."""
    return View(
        g,
        ids,
        root,
        r,
        coloring=coloring,
        status_fn=_status_fn(input_edges),
        state_fn=(states or {}).get,
        prior_fn=(prior or {}).get,
        supported=supported,
        enforce=enforce,
    )


def _status_fn(input_edges):
    if input_edges is None:
        return None
    if isinstance(input_edges, Mapping):
        return lambda e: bool(input_edges.get(e, False))
    s = frozenset(input_edges)
    return s.__contains__


def view_snapshot(view: View) -> dict:
    """Materialised content of a view (nodes, ids, colors, edges, states)."""
    nodes = view.nodes()
    edges = view.visible_edges()
    return {
        "root": view.root,
        "radius": view.radius,
        "n": view.n,
        "nodes": {x: (view.id(x), view.color(x)) for x in nodes},
        "edges": [(e, view.g.edges[e], view.input_status(e)) for e in edges],
        "states": {x: view.state(x) for x in nodes if view.state(x) is not None},
    }


# ---------------------------------------------------------------- algorithms


@dataclass(frozen=True)
class LocalAlgorithm:
    name: str
    locality: Callable[[int], int]
    decide: Callable[[View], Any]


@dataclass(frozen=True)
class SlocalAlgorithm:
    name: str
    locality: Callable[[int], int]
    step: Callable[[View], tuple[Any, Any]]
    parts: tuple = ()


def constant_locality(r: int) -> Callable[[int], int]:
    return lambda n: r


@dataclass
class RunTrace:
    """Per-node measured radius of one execution."""

    reach: dict = field(default_factory=dict)

    @property
    def max_radius(self) -> int:
        return max(self.reach.values(), default=0)


def run_local(
    g: Multigraph,
    ids,
    alg: LocalAlgorithm,
    *,
    coloring=None,
    input_edges=None,
    supported: bool = False,
    order: Sequence[int] | None = None,
    trace: RunTrace | None = None,
) -> dict:
    r = alg.locality(g.n)
    status = _status_fn(input_edges)
    out = {}
    for v in order if order is not None else range(g.n):
        view = View(g, ids, v, r, coloring=coloring, status_fn=status, supported=supported)
        try:
            out[v] = alg.decide(view)
        except Exception as exc:
            raise AlgorithmError(v, None, exc) from exc
        if trace is not None:
            trace.reach[v] = view.reach
    return {v: out[v] for v in sorted(out)}


def run_slocal(
    g: Multigraph,
    ids,
    sched,
    alg: SlocalAlgorithm,
    *,
    coloring=None,
    input_edges=None,
    prior: Mapping[int, Any] | None = None,
    trace: RunTrace | None = None,
    stop_before: int | None = None,
    enforce: bool = True,
) -> tuple[dict, dict]:
    """Process nodes in schedule order; returns (outputs, final states)."""
    order = list(sched)
    r = alg.locality(g.n)
    status = _status_fn(input_edges)
    prior_fn = (prior or {}).get
    states: dict[int, Any] = {}
    outputs: dict[int, Any] = {}
    for pos, v in enumerate(order):
        if v == stop_before:
            break
        view = View(
            g, ids, v, r, coloring=coloring, status_fn=status, state_fn=states.get, prior_fn=prior_fn, enforce=enforce
        )
        try:
            st, out = alg.step(view)
        except Exception as exc:
            raise AlgorithmError(v, pos, exc) from exc
        states[v] = st
        outputs[v] = out
        if trace is not None:
            trace.reach[v] = view.reach
    return outputs, states


# ---------------------------------------------------------------- schedules


@dataclass(frozen=True)
class Schedule:
    order: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError("schedule is not a permutation of the nodes")

    def __iter__(self):
        return iter(self.order)

    def __len__(self):
        return len(self.order)


SCHEDULES = ("identity", "reverse", "random", "bfs", "degree", "interleave")


def bfs_order(g: Multigraph) -> list[int]:
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        q = deque([s])
        while q:
            x = q.popleft()
            out.append(x)
            for _, y in sorted(g.incidence[x], key=lambda t: t[1]):
                if not seen[y]:
                    seen[y] = True
                    q.append(y)
    return out


def make_schedule(kind: str, g: Multigraph, seed: int = 0) -> Schedule:
    n = g.n
    if kind == "identity":
        order = list(range(n))
    elif kind == "reverse":
        order = list(range(n - 1, -1, -1))
    elif kind == "random":
        order = list(range(n))
        random.Random(seed).shuffle(order)
    elif kind == "bfs":
        order = bfs_order(g)
    elif kind == "degree":
        order = sorted(range(n), key=lambda v: (-g.degree(v), v))
    elif kind == "interleave":
        base = bfs_order(g)
        order = []
        lo, hi = 0, n - 1
        while lo <= hi:
            order.append(base[lo])
            if lo != hi:
                order.append(base[hi])
            lo += 1
            hi -= 1
    else:
        raise ValueError(f"unknown schedule adversary {kind!r}")
    return Schedule(tuple(order))


# ---------------------------------------------------------------- perturbation


@dataclass
class PerturbationResult:
    passed: bool
    trials: int
    witness: dict | None = None


def perturbation_check(
    alg,
    g: Multigraph,
    ids,
    v: int,
    r: int,
    trials: int,
    seed: int,
    *,
    sched=None,
    coloring=None,
    input_edges=None,
    prior: Mapping[int, Any] | None = None,
) -> PerturbationResult:
    """Perturb everything outside ball(v, r) and check that v's output stays.

    Views run unenforced, so an algorithm reading past r sees the
    perturbed data instead of raising.
    """
    rng = random.Random(seed)
    inside = set(bfs_distances(g, v, r))
    outside = sorted(set(range(g.n)) - inside)
    invisible = [e for e, (a, b) in enumerate(g.edges) if a not in inside and b not in inside]
    base_ids = list(ids)
    if isinstance(input_edges, Mapping):
        base_status = {e: bool(input_edges.get(e, False)) for e in range(g.m)}
    elif input_edges is None:
        base_status = {e: True for e in range(g.m)}
    else:
        s = set(input_edges)
        base_status = {e: e in s for e in range(g.m)}
    base_prior = dict(prior or {})

    states: dict = {}
    if isinstance(alg, SlocalAlgorithm):
        order = list(sched) if sched is not None else list(range(g.n))
        _, states = run_slocal(
            g, ids, order, alg, coloring=coloring, input_edges=input_edges, prior=prior, stop_before=v, enforce=False
        )

    def evaluate(id_list, status, st, pri):
        view = View(
            g,
            id_list,
            v,
            r,
            coloring=coloring,
            status_fn=status.__getitem__,
            state_fn=st.get,
            prior_fn=pri.get,
            enforce=False,
        )
        if isinstance(alg, SlocalAlgorithm):
            return alg.step(view)[1]
        return alg.decide(view)

    baseline = evaluate(base_ids, base_status, states, base_prior)
    c = getattr(ids, "c", 2)
    hi = max(g.n, 1) ** c
    for t in range(trials):
        new_ids = list(base_ids)
        if outside:
            shuffled = [base_ids[x] for x in outside]
            rng.shuffle(shuffled)
            used = set(base_ids)
            for x, i in zip(outside, shuffled):
                new_ids[x] = i
            for x in rng.sample(outside, max(1, len(outside) // 4)):
                if len(used) >= hi:
                    break
                fresh = rng.randint(1, hi)
                while fresh in used:
                    fresh = rng.randint(1, hi)
                used.add(fresh)
                new_ids[x] = fresh
        status = dict(base_status)
        flipped = [e for e in invisible if rng.random() < 0.5]
        for e in flipped:
            status[e] = not status[e]
        new_states = dict(states)
        pool = [states[x] for x in sorted(states)]
        changed_states = []
        for x in outside:
            if x in states and rng.random() < 0.5:
                changed_states.append(x)
                if rng.random() < 0.5 or not pool:
                    del new_states[x]
                else:
                    new_states[x] = rng.choice(pool)
        new_prior = dict(base_prior)
        if base_prior:
            keys = [x for x in outside if x in base_prior]
            vals = [base_prior[x] for x in keys]
            rng.shuffle(vals)
            new_prior.update(zip(keys, vals))
        witness = {
            "trial": t,
            "node": v,
            "radius": r,
            "changed_ids": sorted(x for x in outside if new_ids[x] != base_ids[x]),
            "flipped_edges": flipped,
            "changed_states": changed_states,
        }
        try:
            got = evaluate(new_ids, status, new_states, new_prior)
        except Exception as exc:
            witness["error"] = f"{type(exc).__name__}: {exc}"
            return PerturbationResult(False, t + 1, witness)
        if got != baseline:
            witness["expected"] = baseline
            witness["got"] = got
            return PerturbationResult(False, t + 1, witness)
    return PerturbationResult(True, trials)


# ---------------------------------------------------------------- composition


@dataclass(frozen=True)
class ComposedState:
    """State of a composed algorithm at a processed node: the B-state and
    the A-results (state, output) this node computed, in computation order."""

    b_state: Any
    cache: Mapping[int, tuple[Any, Any]]


def compose_slocal(a: SlocalAlgorithm, b: SlocalAlgorithm) -> SlocalAlgorithm:
    """Run ``b`` on top of ``a`` with locality T_A + 2 T_B.

    The A-output of a node u is looked up in the caches stored within
    distance T_B of u, and computed from u's radius-T_A view (and cached at
    the processing node) when nobody has it yet.
    """

    def locality(n: int) -> int:
        return a.locality(n) + 2 * b.locality(n)

    def step(view: View):
        n = view.n
        t_a, t_b = a.locality(n), b.locality(n)
        found: dict[int, tuple | None] = {}
        new_cache: dict[int, tuple] = {}

        def lookup(u: int):
            if u in found:
                return found[u]
            hit = None
            for p in view.ball(u, t_b):
                st = view.state(p)
                if isinstance(st, ComposedState) and u in st.cache:
                    hit = st.cache[u]
                    break
            found[u] = hit
            return hit

        def a_state(x: int):
            hit = lookup(x)
            return None if hit is None else hit[0]

        def a_result(u: int):
            hit = lookup(u)
            if hit is None:
                av = view.derived(u, t_a, state_fn=a_state, prior_fn=view.prior)
                hit = a.step(av)
                new_cache[u] = hit
                found[u] = hit
            return hit

        def b_state(x: int):
            st = view.state(x)
            return st.b_state if isinstance(st, ComposedState) else None

        bv = view.derived(view.root, t_b, state_fn=b_state, prior_fn=lambda x: a_result(x)[1])
        st, out = b.step(bv)
        return ComposedState(st, new_cache), out

    return SlocalAlgorithm(f"{a.name}+{b.name}", locality, step, parts=(a, b))


def stage_orders(alg: SlocalAlgorithm, states: Mapping[int, Any], order: Sequence[int]) -> list:
    """Recover (stage algorithm, evaluation order) pairs of a composed run.

    The order in which inner A-outputs were computed is read off the
    caches in the final states: processing nodes in schedule order, cache
    entries in insertion order.
    """
    if not alg.parts:
        return [(alg, list(order))]
    a, b = alg.parts
    a_order = []
    a_states = {}
    for v in order:
        st = states.get(v)
        if isinstance(st, ComposedState):
            for u, (s, _) in st.cache.items():
                a_order.append(u)
                a_states[u] = s
    return stage_orders(a, a_states, a_order) + [(b, list(order))]


def cache_sizes(alg: SlocalAlgorithm, states: Mapping[int, Any]) -> list[tuple[int, int]]:
    """(total cache entries, distinct cached nodes) for every composition level."""
    if not alg.parts:
        return []
    a, _ = alg.parts
    total = 0
    distinct = set()
    a_states = {}
    for st in states.values():
        if isinstance(st, ComposedState):
            total += len(st.cache)
            distinct.update(st.cache)
            for u, (s, _) in st.cache.items():
                a_states[u] = s
    return [(total, len(distinct))] + cache_sizes(a, a_states)


def run_staged(g: Multigraph, ids, stages: Sequence[tuple[SlocalAlgorithm, Sequence[int]]], **kw) -> list[dict]:
    """Run stages one after another, each under its own order, feeding the
    outputs of a stage to the next as ``prior``. Returns per-stage outputs."""
    prior = kw.pop("prior", None)
    outs = []
    for alg, order in stages:
        prior, _ = run_slocal(g, ids, order, alg, prior=prior, **kw)
        outs.append(prior)
    return outs
