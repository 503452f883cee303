"""Orientation objects, sinkless-orientation validators and the global
reference orientation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .graph_core import Color, Multigraph, TwoColoring

O = "O"
I = "I"

# Orientation: EdgeId -> head node (the endpoint the edge points to).
Orientation = dict
# EdgeLabeling: (active NodeId, EdgeId) -> "O" | "I".
EdgeLabeling = dict

SINK = "sink"
PASSIVE_SINK = "passive_sink"
ACTIVE_SINK = "active_sink"
MISSING_LABEL = "missing_label"


class ValidationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Violation:
    node: int
    kind: str
    degree: int

    def as_dict(self) -> dict:
        return {"node": self.node, "kind": self.kind, "degree": self.degree}


def threshold(n: int) -> int:
    """floor(log2 n) + 1, computed on integers."""
    if n < 1:
        raise ValueError("threshold needs n >= 1")
    return n.bit_length()


def _check_total(g: Multigraph, o: Mapping[int, int]) -> None:
    for e, (a, b) in enumerate(g.edges):
        h = o.get(e)
        if h is None:
            raise ValidationError(f"orientation is partial: edge {e} has no direction")
        if h != a and h != b:
            raise ValidationError(f"edge {e} points to {h}, not an endpoint of ({a}, {b})")


def validate_sinkless(g: Multigraph, o: Mapping[int, int]) -> list[Violation]:
    _check_total(g, o)
    out = []
    for v in range(g.n):
        deg = g.degree(v)
        if deg >= 3 and all(o[e] == v for e, _ in g.incidence[v]):
            out.append(Violation(v, SINK, deg))
    return out


def validate_high_degree(g: Multigraph, o: Mapping[int, int], n_threshold_source: int) -> list[Violation]:
    _check_total(g, o)
    t = threshold(n_threshold_source)
    out = []
    for v in range(g.n):
        deg = g.degree(v)
        if deg >= t and deg >= 1 and all(o[e] == v for e, _ in g.incidence[v]):
            out.append(Violation(v, SINK, deg))
    return out


def validate_bipartite(
    g: Multigraph,
    coloring: TwoColoring,
    input_edges,
    active: Color,
    lab: Mapping[tuple[int, int], str],
) -> list[Violation]:
    """Check an O/I labeling of the input edges emitted by active nodes."""
    inp = set(input_edges)
    in_deg = [0] * g.n
    for e in inp:
        a, b = g.edges[e]
        in_deg[a] += 1
        in_deg[b] += 1
    out = []
    missing = set()
    for e in sorted(inp):
        a, b = g.edges[e]
        act = a if coloring[a] is active else b
        if (act, e) not in lab:
            missing.add(act)
    for v in sorted(missing):
        out.append(Violation(v, MISSING_LABEL, in_deg[v]))
    for v in range(g.n):
        if in_deg[v] < 3:
            continue
        mine = [e for e, _ in g.incidence[v] if e in inp]
        if coloring[v] is active:
            if v in missing:
                continue
            if not any(lab[(v, e)] == O for e in mine):
                out.append(Violation(v, ACTIVE_SINK, in_deg[v]))
        else:
            labels = []
            for e in mine:
                act = g.other(e, v)
                if (act, e) not in lab:
                    labels = None
                    break
                labels.append(lab[(act, e)])
            if labels is not None and I not in labels:
                out.append(Violation(v, PASSIVE_SINK, in_deg[v]))
    return sorted(out, key=lambda x: (x.node, x.kind))


# ---------------------------------------------------------------- conversions


def orientation_to_labeling(
    g: Multigraph, o: Mapping[int, int], coloring: TwoColoring, active: Color, input_edges=None
) -> dict:
    """O on {u, v} with active v means the edge points from v to u."""
    edges = range(g.m) if input_edges is None else input_edges
    lab = {}
    for e in edges:
        if e not in o:
            continue
        a, b = g.edges[e]
        act = a if coloring[a] is active else b
        lab[(act, e)] = O if o[e] != act else I
    return lab


def labeling_to_orientation(g: Multigraph, lab: Mapping[tuple[int, int], str]) -> dict:
    o = {}
    for (act, e), x in lab.items():
        if x == O:
            o[e] = g.other(e, act)
        elif x == I:
            o[e] = act
        else:
            raise ValidationError(f"label {x!r} is not O or I")
    return o


# ---------------------------------------------------------------- reference


def _key_order(ids: Sequence[int] | None):
    if ids is None:
        return lambda v: v
    return lambda v: ids[v]


def find_first_cycle(g: Multigraph, nodes: Sequence[int], ids=None, allowed=None):
    """First cycle closed by an iterative DFS from the lowest-Identifier node
    of ``nodes`` (neighbours in (Identifier, EdgeId) order).

    ``allowed`` optionally restricts the usable edges. Returns a list of
    (edge, tail, head) oriented consistently, or None if acyclic.
    """
    key = _key_order(ids)
    member = set(nodes)
    visited: set[int] = set()
    for root in sorted(nodes, key=key):
        if root in visited:
            continue
        visited.add(root)
        on_stack = {root: 0}
        path = [root]
        path_edges = [-1]
        iters = [iter(_sorted_incidence(g, root, key, member, allowed))]
        while iters:
            x = path[-1]
            step = next(iters[-1], None)
            if step is None:
                iters.pop()
                path.pop()
                path_edges.pop()
                del on_stack[x]
                continue
            e, y = step
            if e == path_edges[-1]:
                continue
            if y in on_stack:
                start = on_stack[y]
                cyc_nodes = path[start:]
                cyc_edges = path_edges[start + 1:] + [e]
                out = []
                for i, ce in enumerate(cyc_edges):
                    tail = cyc_nodes[i]
                    head = cyc_nodes[i + 1] if i + 1 < len(cyc_nodes) else cyc_nodes[0]
                    out.append((ce, tail, head))
                return out
            if y in visited:
                continue
            visited.add(y)
            on_stack[y] = len(path)
            path.append(y)
            path_edges.append(e)
            iters.append(iter(_sorted_incidence(g, y, key, member, allowed)))
    return None


def _sorted_incidence(g, x, key, member, allowed):
    inc = [
        (e, y)
        for e, y in g.incidence[x]
        if y in member and (allowed is None or e in allowed)
    ]
    inc.sort(key=lambda t: (key(t[1]), t[0]))
    return inc


def orient_toward_sources(g: Multigraph, nodes, sources, ids=None, allowed=None, skip=()):
    """Orient edges inside ``nodes`` toward the endpoint closer to ``sources``
    (ties toward lower Identifier). Edges in ``skip`` are left out."""
    key = _key_order(ids)
    member = set(nodes)
    dist = {s: 0 for s in sources}
    q = deque(sorted(sources, key=key))
    while q:
        x = q.popleft()
        for e, y in g.incidence[x]:
            if y in member and y not in dist and (allowed is None or e in allowed):
                dist[y] = dist[x] + 1
                q.append(y)
    return _orient_by_distance(g, member, dist, key, allowed, skip)


def _orient_by_distance(g, member, dist, key, allowed, skip):
    o = {}
    skip = set(skip)
    for x in member:
        for e, y in g.incidence[x]:
            if e in o or e in skip or y not in member:
                continue
            if allowed is not None and e not in allowed:
                continue
            dx, dy = dist.get(x), dist.get(y)
            if dx is None or dy is None:
                raise ValidationError(f"edge {e} not reachable from the source set")
            o[e] = x if (dx, key(x)) < (dy, key(y)) else y
    return o


def global_orientation(g: Multigraph, ids: Sequence[int] | None = None) -> dict:
    """Per component: a tree is oriented toward its lowest-Identifier leaf;
    otherwise a canonical cycle is oriented consistently and every other
    edge points toward the cycle along shortest paths."""
    from .graph_core import connected_components

    key = _key_order(ids)
    o: dict[int, int] = {}
    for comp in connected_components(g):
        if len(comp) == 1:
            continue
        cyc = find_first_cycle(g, comp, ids)
        if cyc is None:
            leaf = min((v for v in comp if g.degree(v) == 1), key=key)
            o.update(orient_toward_sources(g, comp, [leaf], ids))
        else:
            for e, _tail, head in cyc:
                o[e] = head
            o.update(orient_toward_sources(g, comp, [t for _, t, _ in cyc], ids, skip=[e for e, _, _ in cyc]))
    return o


# ---------------------------------------------------------------- text format


def dumps_orientation(o: Mapping[int, int]) -> str:
    return "".join(f"{e} {o[e]}\n" for e in sorted(o))


def loads_orientation(text: str) -> dict:
    o = {}
    for ln in text.splitlines():
        if ln.strip():
            e, h = ln.split()
            o[int(e)] = int(h)
    return o
