"""Graphs and multigraphs with stable edge identities, plus generators and
structural queries (balls, girth, power graphs, double covers)."""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

INF = math.inf


class GraphError(ValueError):
    pass


class Color(str, Enum):
    BLACK = "black"
    WHITE = "white"

    def other(self) -> "Color":
        return Color.WHITE if self is Color.BLACK else Color.BLACK


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph on nodes 0..n-1.

    Edge e joins ``edges[e]``; ``incidence[v]`` lists ``(edge_id, other)``
    in increasing edge id order. Parallel edges keep separate ids.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    incidence: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def degrees(self) -> list[int]:
        return [len(inc) for inc in self.incidence]

    def other(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        return b if a == v else a

    def neighbors(self, v: int) -> list[int]:
        return [w for _, w in self.incidence[v]]

    def has_parallel_edges(self) -> bool:
        seen = set()
        for a, b in self.edges:
            key = (a, b) if a < b else (b, a)
            if key in seen:
                return True
            seen.add(key)
        return False

    def csr(self):
        """(indptr, indices, edge_ids) numpy arrays; cached on first use."""
        cached = self.__dict__.get("_csr")
        if cached is None:
            import numpy as np

            deg = np.fromiter((len(i) for i in self.incidence), dtype=np.int64, count=self.n)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            indices = np.fromiter((w for inc in self.incidence for _, w in inc), dtype=np.int64, count=2 * self.m)
            eids = np.fromiter((e for inc in self.incidence for e, _ in inc), dtype=np.int64, count=2 * self.m)
            cached = (indptr, indices, eids)
            object.__setattr__(self, "_csr", cached)
        return cached


@dataclass(frozen=True)
class Graph(Multigraph):
    """Multigraph with at most one edge per node pair."""


def _incidence(n: int, edges: Sequence[tuple[int, int]]):
    inc: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (a, b) in enumerate(edges):
        inc[a].append((e, b))
        inc[b].append((e, a))
    return tuple(tuple(x) for x in inc)


def _check_edges(n: int, edges: Iterable[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    if n < 0:
        raise GraphError(f"negative node count {n}")
    out = []
    for i, pair in enumerate(edges):
        a, b = int(pair[0]), int(pair[1])
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError(f"edge {i} ({a}, {b}) has an endpoint outside [0, {n})")
        if a == b:
            raise GraphError(f"edge {i} is a self-loop at node {a}")
        out.append((a, b))
    return tuple(out)


def build_multigraph(n: int, edges: Iterable[Sequence[int]]) -> Multigraph:
    es = _check_edges(n, edges)
    return Multigraph(n, es, _incidence(n, es))


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    es = _check_edges(n, edges)
    g = Graph(n, es, _incidence(n, es))
    if g.has_parallel_edges():
        raise GraphError("parallel edges are not allowed in a simple graph")
    return g


def as_graph(g: Multigraph) -> Graph:
    if isinstance(g, Graph):
        return g
    return build_graph(g.n, g.edges)


# ---------------------------------------------------------------- colorings


@dataclass(frozen=True)
class TwoColoring:
    colors: tuple[Color, ...]

    def __getitem__(self, v: int) -> Color:
        return self.colors[v]

    def nodes_of(self, c: Color) -> list[int]:
        return [v for v, x in enumerate(self.colors) if x is c]

    def is_proper(self, g: Multigraph) -> bool:
        return all(self.colors[a] is not self.colors[b] for a, b in g.edges)


def two_coloring(g: Multigraph) -> TwoColoring | None:
    """BFS 2-coloring (lowest node of each component black), or None."""
    col: list[Color | None] = [None] * g.n
    for s in range(g.n):
        if col[s] is not None:
            continue
        col[s] = Color.BLACK
        q = deque([s])
        while q:
            x = q.popleft()
            for _, y in g.incidence[x]:
                if col[y] is None:
                    col[y] = col[x].other()
                    q.append(y)
                elif col[y] is col[x]:
                    return None
    return TwoColoring(tuple(col))


# ---------------------------------------------------------------- identifiers


@dataclass(frozen=True)
class IdAssignment:
    """Injective map NodeId -> Identifier with values in [1, n**c]."""

    ids: tuple[int, ...]
    c: int = 2

    def __post_init__(self):
        n = len(self.ids)
        if self.c < 1:
            raise GraphError("identifier exponent c must be >= 1")
        if len(set(self.ids)) != n:
            raise GraphError("identifiers are not unique")
        hi = max(n, 1) ** self.c
        for v, i in enumerate(self.ids):
            if not (1 <= i <= hi):
                raise GraphError(f"identifier {i} of node {v} outside [1, {hi}]")

    def __getitem__(self, v: int) -> int:
        return self.ids[v]

    def __len__(self) -> int:
        return len(self.ids)


def identity_ids(n: int) -> IdAssignment:
    return IdAssignment(tuple(range(1, n + 1)))


def random_ids(n: int, seed: int, c: int = 2) -> IdAssignment:
    rng = random.Random(seed)
    hi = max(n, 1) ** c
    return IdAssignment(tuple(rng.sample(range(1, hi + 1), n)), c)


def degree_sorted_ids(g: Multigraph, c: int = 2) -> IdAssignment:
    """High degree gets small identifiers, spaced n apart inside [1, n**c]."""
    n = g.n
    order = sorted(range(n), key=lambda v: (-g.degree(v), v))
    step = n if c >= 2 else 1
    ids = [0] * n
    for rank, v in enumerate(order):
        ids[v] = rank * step + 1
    return IdAssignment(tuple(ids), c)


ID_ADVERSARIES = ("identity", "random", "degree")


def make_ids(kind: str, g: Multigraph, seed: int = 0, c: int = 2) -> IdAssignment:
    if kind == "identity":
        return identity_ids(g.n)
    if kind == "random":
        return random_ids(g.n, seed, c)
    if kind == "degree":
        return degree_sorted_ids(g, c)
    raise GraphError(f"unknown id adversary {kind!r}")


# ---------------------------------------------------------------- structure


def bfs_distances(g: Multigraph, src: int | Iterable[int], limit: float = INF) -> dict[int, int]:
    """Distances from a node (or node set) up to ``limit`` inclusive."""
    srcs = [src] if isinstance(src, int) else list(src)
    dist = {s: 0 for s in srcs}
    q = deque(srcs)
    while q:
        x = q.popleft()
        d = dist[x]
        if d >= limit:
            continue
        for _, y in g.incidence[x]:
            if y not in dist:
                dist[y] = d + 1
                q.append(y)
    return dist


def ball(g: Multigraph, v: int, r: int) -> set[int]:
    if r < 0:
        raise GraphError("radius must be non-negative")
    return set(bfs_distances(g, v, r))


def girth(g: Multigraph) -> float:
    """Shortest cycle length by BFS from every node; INF for forests.

    Parallel edges count as 2-cycles.
    """
    if g.has_parallel_edges():
        return 2
    best = INF
    for s in range(g.n):
        dist = {s: 0}
        via = {s: -1}
        q = deque([s])
        while q:
            x = q.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for e, y in g.incidence[x]:
                if e == via[x]:
                    continue
                if y not in dist:
                    dist[y] = dist[x] + 1
                    via[y] = e
                    q.append(y)
                else:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def power_graph(g: Multigraph, k: int) -> Graph:
    if k < 1:
        raise GraphError("exponent must be >= 1")
    edges = []
    for u in range(g.n):
        for v, d in sorted(bfs_distances(g, u, k).items()):
            if v > u and d >= 1:
                edges.append((u, v))
    return build_graph(g.n, edges)


def bipartite_double_cover(g: Multigraph) -> tuple[Graph, TwoColoring]:
    """Node (v, layer) gets index v + layer*n; layer 0 is black."""
    n = g.n
    edges = []
    for a, b in g.edges:
        edges.append((a, b + n))
        edges.append((b, a + n))
    col = TwoColoring(tuple([Color.BLACK] * n + [Color.WHITE] * n))
    return build_graph(2 * n, edges), col


def is_regular(g: Multigraph, d: int | None = None) -> bool:
    degs = set(g.degrees())
    if not degs:
        return True
    return len(degs) == 1 and (d is None or degs == {d})


def connected_components(g: Multigraph) -> list[list[int]]:
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = list(bfs_distances(g, s))
        for x in comp:
            seen[x] = True
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------- generators


def random_regular(n: int, d: int, seed: int, max_restarts: int = 50) -> Graph:
    """Pairing model: points are paired at random, pairs that would create
    a loop or a repeated edge are rejected; a dead end restarts the run."""
    if n * d % 2:
        raise GraphError(f"no {d}-regular graph on {n} nodes (n*d odd)")
    if d >= n or d < 0:
        raise GraphError(f"degree {d} infeasible for {n} nodes")
    rng = random.Random(seed)
    for _ in range(max_restarts):
        edges = _try_pairing(n, d, rng)
        if edges is not None:
            return build_graph(n, edges)
    raise GraphError(f"pairing did not converge after {max_restarts} restarts")


def _try_pairing(n: int, d: int, rng: random.Random):
    points = [v for v in range(n) for _ in range(d)]
    adj: list[set[int]] = [set() for _ in range(n)]
    edges = []
    while points:
        failures = 0
        while True:
            i = rng.randrange(len(points))
            j = rng.randrange(len(points))
            a, b = points[i], points[j]
            if i != j and a != b and b not in adj[a]:
                break
            failures += 1
            if failures > 50 + 4 * len(points):
                if _stuck(points, adj):
                    return None
                failures = 0
        adj[a].add(b)
        adj[b].add(a)
        edges.append((a, b))
        for k in sorted((i, j), reverse=True):
            points[k] = points[-1]
            points.pop()
    return edges


def _stuck(points: list[int], adj: list[set[int]]) -> bool:
    rest = sorted(set(points))
    for x in range(len(rest)):
        for y in range(x + 1, len(rest)):
            if rest[y] not in adj[rest[x]]:
                return False
    return True


def random_tree(n: int, seed: int) -> Graph:
    """Uniform random labelled tree via a Pruefer sequence."""
    if n <= 1:
        return build_graph(n, [])
    if n == 2:
        return build_graph(2, [(0, 1)])
    import heapq

    rng = random.Random(seed)
    seq = [rng.randrange(n) for _ in range(n - 2)]
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    leaves = [v for v in range(n) if deg[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        deg[x] -= 1
        if deg[x] == 1:
            heapq.heappush(leaves, x)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((a, b))
    return build_graph(n, edges)


def random_multigraph(n: int, m: int, seed: int) -> Multigraph:
    """m uniformly random non-loop node pairs; repeats kept as parallel edges."""
    rng = random.Random(seed)
    edges = []
    if n >= 2:
        for _ in range(m):
            a, b = rng.sample(range(n), 2)
            edges.append((a, b))
    return build_multigraph(n, edges)


def gnm_graph(n: int, m: int, seed: int) -> Graph:
    rng = random.Random(seed)
    m = min(m, n * (n - 1) // 2)
    seen: set[tuple[int, int]] = set()
    edges = []
    while len(edges) < m:
        a, b = rng.sample(range(n), 2)
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            edges.append(key)
    return build_graph(n, edges)


def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])


def complete_bipartite(p: int, q: int) -> tuple[Graph, TwoColoring]:
    edges = [(a, p + b) for a in range(p) for b in range(q)]
    col = TwoColoring(tuple([Color.BLACK] * p + [Color.WHITE] * q))
    return build_graph(p + q, edges), col


def star_graph(leaves: int) -> Graph:
    return build_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def ladder_graph(k: int) -> Graph:
    """Two paths of length k joined by rungs; nodes i and i+k form rung i."""
    edges = [(i, i + 1) for i in range(k - 1)]
    edges += [(k + i, k + i + 1) for i in range(k - 1)]
    edges += [(i, k + i) for i in range(k)]
    return build_graph(2 * k, edges)


def caterpillar_graph(spine: int) -> Graph:
    """Path of ``spine`` nodes, each with one pendant leaf."""
    edges = [(i, i + 1) for i in range(spine - 1)]
    edges += [(i, spine + i) for i in range(spine)]
    return build_graph(2 * spine, edges)


# ---------------------------------------------------------------- fixtures

# GF(4) = {0, 1, a, a+1} encoded as 0..3, with a*a = a+1.
_GF4_MUL = [
    [0, 0, 0, 0],
    [0, 1, 2, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
]


def _pg24_points() -> list[tuple[int, int, int]]:
    pts = []
    for x in range(4):
        for y in range(4):
            for z in range(4):
                v = (x, y, z)
                if v == (0, 0, 0):
                    continue
                lead = next(c for c in v if c)
                if lead == 1:
                    pts.append(v)
    return pts


def projective_plane_incidence() -> tuple[Graph, TwoColoring]:
    """Point-line incidence graph of the projective plane of order 4:
    21 points (black, 0..20) and 21 lines (white, 21..41); 5-regular,
    bipartite, girth 6."""
    pts = _pg24_points()
    edges = []
    for i, p in enumerate(pts):
        for j, l in enumerate(pts):
            dot = 0
            for a, b in zip(p, l):
                dot ^= _GF4_MUL[a][b]
            if dot == 0:
                edges.append((i, len(pts) + j))
    col = TwoColoring(tuple([Color.BLACK] * len(pts) + [Color.WHITE] * len(pts)))
    return build_graph(2 * len(pts), edges), col


def fixture(name: str) -> tuple[Graph, TwoColoring | None]:
    if name == "k55":
        return complete_bipartite(5, 5)
    if name == "k6_cover":
        return bipartite_double_cover(complete_graph(6))
    if name == "pg24":
        return projective_plane_incidence()
    if name == "fig1_path":
        return path_graph(7), None
    raise GraphError(f"unknown fixture {name!r}")


FIXTURES = ("k55", "k6_cover", "pg24", "fig1_path")


# ---------------------------------------------------------------- text format


def dumps_edge_list(g: Multigraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{a} {b}" for a, b in g.edges]
    return "\n".join(lines) + "\n"


def loads_edge_list(text: str, simple: bool = True) -> Multigraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise GraphError("empty edge-list file")
    try:
        n, m = (int(x) for x in rows[0])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise GraphError(f"header says {m} edges, found {len(edges)}")
    return build_graph(n, edges) if simple else build_multigraph(n, edges)


def read_edge_list(path, simple: bool = True) -> Multigraph:
    with open(path) as fh:
        return loads_edge_list(fh.read(), simple)


def write_edge_list(g: Multigraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_edge_list(g))
