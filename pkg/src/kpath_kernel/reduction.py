"""The oracle-driven reduction rule.

A guarded region is a vertex set A with boundary N(A) and a guard
Z ⊆ N(A) such that, whenever the graph has a k-path, some k-path crosses
A only through traverses anchored in Z (or lies inside A). Querying the
oracle once per candidate way such a path can intersect A marks every
vertex a crossing could need; the rest of A is deleted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .errors import InputError, NotApplicableError
from .graphs import (
    Graph,
    brute_force_k_path,
    induced_subgraph,
    is_guarded,
    iter_k_paths,
    open_neighborhood,
)
from .linkage import LinkageInstance, LinkageSolver, OracleStats, counting_oracle


@dataclass(frozen=True)
class GuardedRegion:
    region: frozenset
    boundary: frozenset
    guard: frozenset
    k: int


def make_guarded_region(g: Graph, region, k: int, guard=None) -> GuardedRegion:
    """Build a region with boundary N(region); guard defaults to the full
    boundary, which is always a valid guard."""
    reg = frozenset(region)
    boundary = frozenset(open_neighborhood(g, reg))
    gz = boundary if guard is None else frozenset(guard)
    if not gz <= boundary:
        raise InputError("guard must be a subset of the region's boundary")
    if k < 1:
        raise InputError("k must be >= 1")
    return GuardedRegion(reg, boundary, gz, k)


def p_bound(k: int, ell: int, h: int) -> int:
    """Count bound for the distinct oracle instances a guarded region can
    induce: (k+1) * (1 + sum_{r=0}^{2h} (h*(ell+1))^r). Exact integer."""
    if k < 1 or ell < 0 or h < 0:
        raise InputError("need k >= 1, ell >= 0, h >= 0")
    base = h * (ell + 1)
    return (k + 1) * (1 + sum(base**r for r in range(2 * h + 1)))


@dataclass(frozen=True)
class CandidateInstance:
    k_prime: int
    requests: tuple[frozenset, ...]


def _request_universe(guard, boundary) -> list[frozenset]:
    universe = set()
    for z in sorted(guard):
        universe.add(frozenset({z}))
        for b in sorted(boundary):
            if b != z:
                universe.add(frozenset({z, b}))
    return sorted(universe, key=lambda r: (len(r), sorted(r)))


def enumerate_candidates(gr: GuardedRegion) -> list[CandidateInstance]:
    """Every distinct candidate instance for the region: per k' in 0..k, the
    single-empty-request pattern plus every multiset of at most max(1, 2|Z|)
    requests {z} or {z, b} with z in the guard and b in the boundary."""
    patterns: list[tuple[frozenset, ...]] = [(frozenset(),)]
    universe = _request_universe(gr.guard, gr.boundary)
    rmax = max(1, 2 * len(gr.guard))
    for r in range(1, rmax + 1):
        patterns.extend(itertools.combinations_with_replacement(universe, r))
    out = [
        CandidateInstance(kp, tuple(pat))
        for kp in range(gr.k + 1)
        for pat in patterns
    ]
    assert len(out) <= p_bound(gr.k, len(gr.boundary), len(gr.guard))
    return out


def guard_is_valid(g: Graph, gr: GuardedRegion, cap: int = 20) -> bool:
    """Brute-force the guard definition: no k-path at all, or some k-path is
    guarded w.r.t. (region, guard). Exponential; capped."""
    if g.n > cap:
        raise NotApplicableError(f"guard check capped at {cap} vertices")
    if brute_force_k_path(g, gr.k, cap=cap) is None:
        return True
    return any(is_guarded(g, p, gr.region, gr.guard) for p in iter_k_paths(g, gr.k))


def apply_reduction(
    g: Graph,
    gr: GuardedRegion,
    oracle: LinkageSolver,
    stats: Optional[OracleStats] = None,
    verify_guard: bool = False,
) -> tuple[Graph, frozenset, OracleStats]:
    """Run the reduction rule once: query the oracle on every candidate
    instance over G[N[A]], mark all witness vertices, delete the unmarked
    part of A. Applicable only when |A| exceeds k * p_bound(k, l, h), which
    guarantees at least one deletion.
    """
    ell, h = len(gr.boundary), len(gr.guard)
    threshold = gr.k * p_bound(gr.k, ell, h)
    if len(gr.region) <= threshold:
        raise NotApplicableError(
            f"|A| = {len(gr.region)} <= k*p_bound = {threshold}; rule not applicable"
        )
    if open_neighborhood(g, gr.region) != set(gr.boundary):
        raise InputError("region boundary is stale for this graph")
    if verify_guard and not guard_is_valid(g, gr):
        raise InputError("guard set is not a valid guard for this region")
    stats = stats if stats is not None else OracleStats()
    solver = counting_oracle(oracle, stats)
    sub = induced_subgraph(g, gr.region | gr.boundary)
    terminals = frozenset(gr.boundary)
    marked: set[int] = set()
    for cand in enumerate_candidates(gr):
        sol = solver(LinkageInstance(sub, cand.k_prime, terminals, cand.requests))
        if sol is not None:
            for p in sol:
                marked.update(p)
    deletable = gr.region - marked
    assert deletable, "marking can never cover a region larger than k*p_bound"
    out = g.copy()
    out.delete_vertices(deletable)
    return out, frozenset(deletable), stats
