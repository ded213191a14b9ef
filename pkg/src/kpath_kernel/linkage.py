"""Exact k-linkage solving.

An instance asks for one path per request. A request names at most two
terminals; its path must meet the terminal set exactly in those vertices,
and only at its endpoints. Paths are disjoint on non-terminals, terminals
are shared exactly by the paths whose requests name them, and the paths
together cover exactly ``k_prime`` distinct vertices.

Asking with no terminals and a single empty request is exactly the
k-path question, which is how the kernel drivers use this module.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .errors import BudgetExceededError, InputError, NotApplicableError, OracleFaultError
from .graphs import Graph, Path, connected_components, is_simple_path

Request = frozenset
Solution = list  # list[Path], aligned with the instance's request order
LinkageSolver = Callable[["LinkageInstance"], Optional[Solution]]


@dataclass
class LinkageInstance:
    graph: Graph
    k_prime: int
    terminals: frozenset
    requests: tuple[Request, ...]

    def validate(self) -> None:
        if self.k_prime < 0:
            raise InputError("k_prime must be >= 0")
        verts = set(self.graph.vertices)
        if not set(self.terminals) <= verts:
            raise InputError("terminals must be vertices of the graph")
        for r in self.requests:
            if len(r) > 2:
                raise InputError(f"request {sorted(r)} has more than two terminals")
            if not set(r) <= set(self.terminals):
                raise InputError(f"request {sorted(r)} references a non-terminal")

    def canonical_key(self):
        """Order-invariant identity: requests sorted by (size, ids)."""
        reqs = tuple(sorted((tuple(sorted(r)) for r in self.requests), key=lambda t: (len(t), t)))
        return (self.k_prime, reqs)


def canonical_requests(requests: Iterable[Request]) -> tuple[Request, ...]:
    return tuple(sorted((frozenset(r) for r in requests), key=lambda r: (len(r), sorted(r))))


def validate_solution(inst: LinkageInstance, sol: Optional[Sequence[Path]]) -> bool:
    """True iff ``sol`` is a feasible solution of ``inst``."""
    if sol is None or len(sol) != len(inst.requests):
        return False
    g, terms = inst.graph, set(inst.terminals)
    nonterm_owner: dict[int, int] = {}
    covered: set[int] = set()
    for i, p in enumerate(sol):
        if not is_simple_path(g, p):
            return False
        on_terms = set(p) & terms
        if on_terms != set(inst.requests[i]):
            return False
        if any(v in on_terms for v in p[1:-1]):
            return False
        for v in p:
            if v not in terms:
                if nonterm_owner.setdefault(v, i) != i:
                    return False
        covered.update(p)
    return len(covered) == inst.k_prime


def solve_linkage(inst: LinkageInstance, node_budget: Optional[int] = None) -> Optional[Solution]:
    """Exact branch-and-bound search.

    Requests are processed most-constrained first (pairs, then single
    endpoints, then free paths). The search tracks the number of
    non-terminal vertices still to be placed; branches are cut when that
    budget cannot be met by the remaining requests or when a pair's
    endpoints are no longer connected through unused non-terminals.
    Exceeding ``node_budget`` expansions raises, it never mis-answers.
    """
    inst.validate()
    g = inst.graph
    reqs = inst.requests
    nreq = len(reqs)
    if nreq == 0:
        return [] if inst.k_prime == 0 else None
    union_terms = frozenset().union(*reqs)
    free_total = inst.k_prime - len(union_terms)
    if free_total < 0:
        return None
    pool = frozenset(g.vertices) - inst.terminals
    if free_total > len(pool):
        return None
    adj = {v: sorted(g.neighbors(v)) for v in g.vertices}

    order = sorted(range(nreq), key=lambda i: (-len(reqs[i]), sorted(reqs[i]), i))
    lbs = []
    for i in order:
        r = reqs[i]
        if len(r) == 2:
            u, v = sorted(r)
            lbs.append(0 if g.has_edge(u, v) else 1)
        else:
            lbs.append(0 if len(r) == 1 else 1)
    suffix_lb = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        suffix_lb[i] = suffix_lb[i + 1] + lbs[i]
    if free_total < suffix_lb[0]:
        return None

    used: set[int] = set()
    paths: list[Optional[Path]] = [None] * nreq
    free = [free_total]
    expansions = [0]

    def bump() -> None:
        expansions[0] += 1
        if node_budget is not None and expansions[0] > node_budget:
            raise BudgetExceededError(f"exceeded {node_budget} expansions")

    def pair_reachable(u: int, v: int) -> bool:
        seen = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            for w in adj[x]:
                if w == v:
                    return True
                if w in pool and w not in used and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def assign(pos: int) -> bool:
        if pos == len(order):
            return free[0] == 0
        if free[0] > len(pool) - len(used):
            return False
        i = order[pos]
        r = reqs[i]
        if len(r) == 2:
            u, v = sorted(r)
            if not pair_reachable(u, v):
                return False
            return pair_dfs(pos, i, u, v, u, [])
        if len(r) == 1:
            (u,) = r
            return open_dfs(pos, i, u, u, [])
        for s in sorted(pool):
            if s not in used:
                used.add(s)
                if open_dfs(pos, i, None, s, [s]):
                    return True
                used.discard(s)
        return False

    def pair_dfs(pos: int, i: int, u: int, v: int, head: int, seq: list[int]) -> bool:
        bump()
        c = len(seq)
        room = free[0] - suffix_lb[pos + 1]
        if c <= room and v in g.neighbors(head):
            paths[i] = (u, *seq, v)
            free[0] -= c
            if assign(pos + 1):
                return True
            free[0] += c
            paths[i] = None
        if c < room:
            for w in adj[head]:
                if w in pool and w not in used:
                    used.add(w)
                    seq.append(w)
                    if pair_dfs(pos, i, u, v, w, seq):
                        return True
                    seq.pop()
                    used.discard(w)
        return False

    def open_dfs(pos: int, i: int, anchor: Optional[int], head: int, seq: list[int]) -> bool:
        bump()
        c = len(seq)
        room = free[0] - suffix_lb[pos + 1]
        stop_ok = c <= room
        if anchor is None:
            # free paths are direction-symmetric: keep one orientation
            stop_ok = stop_ok and c >= 1 and (c == 1 or seq[0] < seq[-1])
        if stop_ok:
            paths[i] = ((anchor,) if anchor is not None else ()) + tuple(seq)
            free[0] -= c
            if assign(pos + 1):
                return True
            free[0] += c
            paths[i] = None
        if c < room:
            for w in adj[head]:
                if w in pool and w not in used:
                    used.add(w)
                    seq.append(w)
                    if open_dfs(pos, i, anchor, w, seq):
                        return True
                    seq.pop()
                    used.discard(w)
        return False

    if assign(0):
        return [p for p in paths]  # type: ignore[list-item]
    return None


def brute_force_linkage(inst: LinkageInstance, cap: int = 16) -> Optional[Solution]:
    """Independent reference solver: enumerate every tuple of satisfying
    paths, request by request, and keep the first feasible one."""
    inst.validate()
    if inst.graph.n > cap:
        raise NotApplicableError(f"graph has {inst.graph.n} > {cap} vertices")
    g = inst.graph
    reqs = inst.requests
    if not reqs:
        return [] if inst.k_prime == 0 else None
    terms = set(inst.terminals)
    pool = sorted(set(g.vertices) - terms)
    adj = {v: sorted(g.neighbors(v)) for v in g.vertices}
    used: set[int] = set()
    paths: list[Optional[Path]] = [None] * len(reqs)

    def paths_for(r: Request) -> list[Path]:
        out: list[Path] = []
        if len(r) == 2:
            u, v = sorted(r)

            def dfs2(x: int, seq: list[int]) -> None:
                for w in adj[x]:
                    if w == v:
                        out.append((u, *seq, v))
                    elif w in pool and w not in used and w not in seq:
                        seq.append(w)
                        dfs2(w, seq)
                        seq.pop()

            dfs2(u, [])
        elif len(r) == 1:
            (u,) = r
            out.append((u,))

            def dfs1(x: int, seq: list[int]) -> None:
                for w in adj[x]:
                    if w in pool and w not in used and w not in seq:
                        seq.append(w)
                        out.append((u, *seq))
                        dfs1(w, seq)
                        seq.pop()

            dfs1(u, [])
        else:
            def dfs0(x: int, seq: list[int]) -> None:
                for w in adj[x]:
                    if w in pool and w not in used and w not in seq:
                        seq.append(w)
                        out.append(tuple(seq))
                        dfs0(w, seq)
                        seq.pop()

            for s in pool:
                if s not in used:
                    out.append((s,))
                    dfs0(s, [s])
        return out

    def rec(i: int, covered: frozenset) -> bool:
        if len(covered) > inst.k_prime:
            return False
        if i == len(reqs):
            return len(covered) == inst.k_prime
        for p in paths_for(reqs[i]):
            fresh = [w for w in p if w not in terms]
            paths[i] = p
            used.update(fresh)
            if rec(i + 1, covered | frozenset(p)):
                return True
            used.difference_update(fresh)
            paths[i] = None
        return False

    if rec(0, frozenset()):
        return [p for p in paths]  # type: ignore[list-item]
    return None


def decision_to_witness(
    decider: Callable[[LinkageInstance], bool], inst: LinkageInstance
) -> Optional[Solution]:
    """Turn a yes/no oracle into a witness-producing one.

    Deletes edges, then request-free vertices, as long as the decider keeps
    answering yes. In the surviving minimal graph every edge and vertex lies
    on every solution, so the solution paths can be read off its structure.
    Uses at most |E| + |V| decision calls beyond the first.
    """
    inst.validate()
    if not decider(inst):
        return None
    work = inst.graph.copy()
    terms = set(inst.terminals)
    req_union = set().union(*inst.requests) if inst.requests else set()

    def ask(g2: Graph, t2: set[int]) -> bool:
        return decider(LinkageInstance(g2, inst.k_prime, frozenset(t2), inst.requests))

    for u, v in sorted(inst.graph.edges()):
        trial = work.copy()
        trial.delete_edge(u, v)
        if ask(trial, terms):
            work = trial
    for v in sorted(inst.graph.vertices):
        if v in req_union:
            continue
        trial = work.copy()
        trial.delete_vertex(v)
        t2 = terms - {v}
        if ask(trial, t2):
            work, terms = trial, t2

    sol = _read_off_solution(work, terms & set(work.vertices), inst.requests)
    if sol is None or not validate_solution(inst, sol):
        raise OracleFaultError("decider answers do not describe a consistent solution")
    return sol


def _read_off_solution(
    h: Graph, terms: set[int], requests: tuple[Request, ...]
) -> Optional[Solution]:
    """Decompose a minimal surviving graph into one path per request."""
    nonterm = [v for v in h.vertices if v not in terms]
    if any(h.degree(v) > 2 for v in nonterm):
        return None
    spelled: list[tuple[Request, Path]] = []
    for u, v in sorted(h.edges()):
        if u in terms and v in terms:
            spelled.append((frozenset({u, v}), (u, v)))
    for comp in connected_components(h, within=nonterm):
        seg = _order_segment(h, comp, terms)
        if seg is None:
            return None
        spelled.append(seg)

    want: dict[Request, list[int]] = {}
    for i, r in enumerate(requests):
        want.setdefault(r, []).append(i)
    assign: list[Optional[Path]] = [None] * len(requests)
    for r, p in spelled:
        slots = want.get(r)
        if not slots:
            return None
        assign[slots.pop(0)] = p
    # leftovers are requests whose paths add no vertices of their own: a bare
    # terminal, or a duplicate pair request reusing a surviving edge
    for r, slots in want.items():
        for i in slots:
            if len(r) == 1:
                (t,) = r
                if t in terms:
                    assign[i] = (t,)
                    continue
            if len(r) == 2:
                u, v = sorted(r)
                if h.has_edge(u, v):
                    assign[i] = (u, v)
                    continue
            return None
    return assign  # type: ignore[return-value]


def _order_segment(h: Graph, comp: set[int], terms: set[int]) -> Optional[tuple[Request, Path]]:
    """Lay out one non-terminal component as a path and attach its
    terminal endpoints; None if the shape is not a path."""
    if len(comp) == 1:
        (v,) = comp
        ts = sorted(w for w in h.neighbors(v) if w in terms)
        if len(ts) > 2:
            return None
        if len(ts) == 2:
            return (frozenset(ts), (ts[0], v, ts[1]))
        if len(ts) == 1:
            return (frozenset(ts), (ts[0], v))
        return (frozenset(), (v,))
    ends = sorted(v for v in comp if len(h.neighbors(v) & comp) <= 1)
    if len(ends) != 2:
        return None  # a cycle, or something stranger
    seq = [ends[0]]
    seen = {ends[0]}
    while True:
        nxt = [w for w in h.neighbors(seq[-1]) if w in comp and w not in seen]
        if not nxt:
            break
        if len(nxt) > 1:
            return None
        seq.append(nxt[0])
        seen.add(nxt[0])
    if len(seq) != len(comp):
        return None
    t_first = sorted(w for w in h.neighbors(seq[0]) if w in terms)
    t_last = sorted(w for w in h.neighbors(seq[-1]) if w in terms)
    if len(t_first) > 1 or len(t_last) > 1:
        return None
    for v in seq[1:-1]:
        if h.neighbors(v) & terms:
            return None
    if t_first and t_last and t_first[0] == t_last[0]:
        return None
    full = tuple(t_first) + tuple(seq) + tuple(t_last)
    return (frozenset(t_first + t_last), full)


@dataclass
class PerCall:
    vertices: int
    k_prime: int
    requests: int
    answered_yes: bool


class OracleStats:
    """Audit trail of oracle usage. Safe for concurrent recording."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.calls = 0
        self.max_instance_vertices = 0
        self.per_call_log: list[PerCall] = []

    def record(self, vertices: int, k_prime: int, requests: int, answered_yes: bool) -> None:
        with self._lock:
            self.calls += 1
            self.max_instance_vertices = max(self.max_instance_vertices, vertices)
            self.per_call_log.append(PerCall(vertices, k_prime, requests, answered_yes))

    def to_json(self) -> dict:
        return {
            "calls": self.calls,
            "max_instance_vertices": self.max_instance_vertices,
        }


def counting_oracle(inner: LinkageSolver, stats: OracleStats) -> LinkageSolver:
    """Decorate a solver so every call is logged; answers pass through."""

    def solver(inst: LinkageInstance) -> Optional[Solution]:
        ans = inner(inst)
        stats.record(inst.graph.n, inst.k_prime, len(inst.requests), ans is not None)
        return ans

    return solver


def instance_to_json(inst: LinkageInstance) -> dict:
    return {
        "graph": {
            "vertices": sorted(inst.graph.vertices),
            "edges": sorted([u, v] for u, v in inst.graph.edges()),
        },
        "k_prime": inst.k_prime,
        "terminals": sorted(inst.terminals),
        "requests": [sorted(r) for r in inst.requests],
    }


def instance_from_json(data: dict) -> LinkageInstance:
    try:
        gd = data["graph"]
        g = Graph.from_edges(gd["vertices"], [tuple(e) for e in gd["edges"]])
        inst = LinkageInstance(
            g,
            int(data["k_prime"]),
            frozenset(data["terminals"]),
            tuple(frozenset(r) for r in data["requests"]),
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed linkage instance: {exc}") from exc
    inst.validate()
    return inst


def load_instance(path: str) -> LinkageInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))
