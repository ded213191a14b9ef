"""Undirected simple graphs with stable vertex identities.

Vertices are positive integers handed out by the graph and never reused,
so vertex sets recorded before a deletion stay meaningful afterwards.
Paths are plain tuples of vertex ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .errors import InputError, NotApplicableError

Path = tuple  # a simple path, stored as its vertex sequence


class Graph:
    """Adjacency-set graph. No self-loops, no parallel edges."""

    def __init__(self) -> None:
        self._adj: dict[int, set[int]] = {}
        self._next_id = 1

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]] = ()) -> "Graph":
        g = cls()
        for v in vertices:
            g._insert_vertex(v)
        for u, v in edges:
            g.add_edge(u, v)
        return g

    def _insert_vertex(self, v: int) -> None:
        if not isinstance(v, int) or v < 1:
            raise InputError(f"vertex ids are positive integers, got {v!r}")
        if v in self._adj:
            raise InputError(f"duplicate vertex {v}")
        self._adj[v] = set()
        if v >= self._next_id:
            self._next_id = v + 1

    def add_vertex(self) -> int:
        v = self._next_id
        self._adj[v] = set()
        self._next_id = v + 1
        return v

    def add_vertices(self, count: int) -> tuple[int, ...]:
        return tuple(self.add_vertex() for _ in range(count))

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise InputError(f"self-loop at {u}")
        if u not in self._adj or v not in self._adj:
            raise InputError(f"edge ({u},{v}) references an unknown vertex")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def delete_edge(self, u: int, v: int) -> None:
        if v not in self._adj.get(u, ()):
            raise InputError(f"edge ({u},{v}) not present")
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def delete_vertex(self, v: int) -> None:
        if v not in self._adj:
            raise InputError(f"unknown vertex {v}")
        for w in self._adj.pop(v):
            self._adj[w].discard(v)

    def delete_vertices(self, vs: Iterable[int]) -> None:
        for v in list(vs):
            self.delete_vertex(v)

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def m(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    @property
    def vertices(self):
        return self._adj.keys()

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in self._adj:
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def has_vertex(self, v: int) -> bool:
        return v in self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def neighbors(self, v: int) -> set[int]:
        """The adjacency set of ``v``. Treat as read-only."""
        if v not in self._adj:
            raise InputError(f"unknown vertex {v}")
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def copy(self) -> "Graph":
        g = Graph()
        g._adj = {v: set(s) for v, s in self._adj.items()}
        g._next_id = self._next_id
        return g

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __hash__(self):
        raise TypeError("Graph is mutable and unhashable")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def induced_subgraph(g: Graph, s: Iterable[int]) -> Graph:
    """The subgraph on vertex set ``s`` with ids preserved."""
    keep = set(s)
    unknown = keep - set(g.vertices)
    if unknown:
        raise InputError(f"unknown vertices {sorted(unknown)}")
    sub = Graph()
    sub._adj = {v: g.neighbors(v) & keep for v in keep}
    sub._next_id = g._next_id
    return sub


def open_neighborhood(g: Graph, s: Iterable[int]) -> set[int]:
    """All vertices outside ``s`` adjacent to some vertex of ``s``."""
    inside = set(s)
    unknown = inside - set(g.vertices)
    if unknown:
        raise InputError(f"unknown vertices {sorted(unknown)}")
    out: set[int] = set()
    for v in inside:
        out |= g.neighbors(v)
    return out - inside


def closed_neighborhood(g: Graph, s: Iterable[int]) -> set[int]:
    inside = set(s)
    return open_neighborhood(g, inside) | inside


@dataclass(frozen=True)
class Separation:
    """A separation (A, B): A∪B covers the graph and no edge crosses
    A∖B to B∖A. ``branch`` records which construction produced it."""

    side_a: frozenset
    side_b: frozenset
    branch: Optional[str] = field(default=None, compare=False)

    @property
    def order(self) -> int:
        return len(self.side_a & self.side_b)

    def cut(self) -> frozenset:
        return self.side_a & self.side_b


def check_separation(g: Graph, a: Iterable[int], b: Iterable[int]) -> bool:
    """Total predicate: is (a, b) a separation of g?"""
    sa, sb = set(a), set(b)
    if sa | sb != set(g.vertices):
        return False
    only_a = sa - sb
    for v in only_a:
        if g.has_vertex(v) and (g.neighbors(v) & (sb - sa)):
            return False
    return True


def is_simple_path(g: Graph, p: Iterable[int]) -> bool:
    seq = tuple(p)
    if not seq or len(set(seq)) != len(seq):
        return False
    if any(not g.has_vertex(v) for v in seq):
        return False
    return all(g.has_edge(seq[i], seq[i + 1]) for i in range(len(seq) - 1))


def traverses(p: Iterable[int], a: Iterable[int]) -> list[Path]:
    """Maximal subpaths of ``p`` that contain a vertex of ``a`` and have all
    internal vertices in ``a``, in order of occurrence along ``p``.

    Each returned subpath ends either at an endpoint of ``p`` or at the
    vertex just outside ``a``; consecutive traverses may share that vertex.
    """
    seq = tuple(p)
    inside = set(a)
    out: list[Path] = []
    i, n = 0, len(seq)
    while i < n:
        if seq[i] in inside:
            j = i
            while j + 1 < n and seq[j + 1] in inside:
                j += 1
            lo = i - 1 if i > 0 else i
            hi = j + 1 if j + 1 < n else j
            out.append(seq[lo : hi + 1])
            i = j + 1
        else:
            i += 1
    return out


def is_guarded(g: Graph, p: Iterable[int], a: Iterable[int], z: Iterable[int]) -> bool:
    """True iff ``p`` lies inside ``a`` or every a-traverse of ``p`` has an
    endpoint in ``z``. Requires z ⊆ N(a)."""
    inside = set(a)
    guard = set(z)
    if not guard <= open_neighborhood(g, inside):
        raise InputError("guard is not a subset of the region's neighborhood")
    seq = tuple(p)
    if set(seq) <= inside:
        return True
    return all(t[0] in guard or t[-1] in guard for t in traverses(seq, inside))


def brute_force_k_path(g: Graph, k: int, cap: int = 32) -> Optional[Path]:
    """Exhaustive search for a simple path on exactly k vertices.

    DFS over partial paths, pruning a branch when the vertices still
    reachable from its head cannot complete the path. Reference oracle;
    capped at ``cap`` vertices.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    if g.n > cap:
        raise NotApplicableError(f"graph has {g.n} > {cap} vertices")
    if k > g.n:
        return None
    verts = sorted(g.vertices)
    if k == 1:
        return (verts[0],)
    adj = {v: sorted(g.neighbors(v)) for v in verts}
    on_path: set[int] = set()
    path: list[int] = []

    def reach_count(x: int) -> int:
        seen = {x}
        stack = [x]
        cnt = 0
        while stack:
            y = stack.pop()
            for w in adj[y]:
                if w not in seen and w not in on_path:
                    seen.add(w)
                    cnt += 1
                    stack.append(w)
        return cnt

    def dfs(x: int) -> bool:
        if len(path) == k:
            return True
        if reach_count(x) < k - len(path):
            return False
        for w in adj[x]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                if dfs(w):
                    return True
                path.pop()
                on_path.remove(w)
        return False

    for s in verts:
        path = [s]
        on_path = {s}
        if dfs(s):
            return tuple(path)
    return None


def iter_k_paths(g: Graph, k: int) -> Iterator[Path]:
    """Yield every simple path on exactly k vertices (each direction once)."""
    if k < 1:
        raise InputError("k must be >= 1")
    verts = sorted(g.vertices)
    if k == 1:
        yield from ((v,) for v in verts)
        return
    adj = {v: sorted(g.neighbors(v)) for v in verts}

    def dfs(path: list[int], on_path: set[int]):
        if len(path) == k:
            yield tuple(path)
            return
        for w in adj[path[-1]]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                yield from dfs(path, on_path)
                path.pop()
                on_path.remove(w)

    for s in verts:
        yield from dfs([s], {s})


def reachable(g: Graph, start: int, allowed: Iterable[int]) -> set[int]:
    """Vertices of ``allowed`` reachable from ``start`` through ``allowed``
    (``start`` itself need not be in ``allowed``)."""
    ok = set(allowed)
    seen = {start}
    out: set[int] = set()
    stack = [start]
    while stack:
        x = stack.pop()
        for w in g.neighbors(x):
            if w not in seen and w in ok:
                seen.add(w)
                out.add(w)
                stack.append(w)
    return out


def connected_components(g: Graph, within: Optional[Iterable[int]] = None) -> list[set[int]]:
    """Components of g (or of the induced subgraph on ``within``),
    sorted by smallest member."""
    pool = set(g.vertices) if within is None else set(within)
    comps = []
    while pool:
        s = min(pool)
        comp = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for w in g.neighbors(x):
                if w in pool and w not in comp:
                    comp.add(w)
                    stack.append(w)
        pool -= comp
        comps.append(comp)
    comps.sort(key=min)
    return comps


def vertex_index(g: Graph) -> dict[int, int]:
    """Map vertex ids to 1..n in ascending order (text format ids)."""
    return {v: i + 1 for i, v in enumerate(sorted(g.vertices))}


def write_graph_text(g: Graph) -> str:
    """Text format: ``p <n> <m>`` header, then one ``<u> <v>`` line per edge
    with 1-based ids in ascending order. Sparse ids are remapped."""
    idx = vertex_index(g)
    lines = [f"p {g.n} {g.m}"]
    mapped = sorted((min(idx[u], idx[v]), max(idx[u], idx[v])) for u, v in g.edges())
    lines.extend(f"{u} {v}" for u, v in mapped)
    return "\n".join(lines) + "\n"


def read_graph_text(text: str) -> Graph:
    n = m = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise InputError(f"line {lineno}: duplicate header")
            if len(parts) != 3:
                raise InputError(f"line {lineno}: malformed header")
            n, m = int(parts[1]), int(parts[2])
        else:
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected an edge line")
            edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise InputError("missing 'p <n> <m>' header")
    if m != len(edges):
        raise InputError(f"header announces {m} edges, found {len(edges)}")
    g = Graph.from_edges(range(1, n + 1))
    for u, v in edges:
        g.add_edge(u, v)
    return g
