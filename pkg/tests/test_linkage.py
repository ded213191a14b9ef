import itertools
import json
import random

import pytest

from kpath_kernel.errors import (
    BudgetExceededError,
    InputError,
    NotApplicableError,
    OracleFaultError,
)
from kpath_kernel.graphs import Graph
from kpath_kernel.linkage import (
    LinkageInstance,
    OracleStats,
    brute_force_linkage,
    counting_oracle,
    decision_to_witness,
    instance_from_json,
    instance_to_json,
    solve_linkage,
    validate_solution,
)


def random_graph(rng, n, p):
    g = Graph.from_edges(range(1, n + 1))
    for a, b in itertools.combinations(range(1, n + 1), 2):
        if rng.random() < p:
            g.add_edge(a, b)
    return g


def random_instance(rng, max_n=8, max_r=3, max_k=8):
    n = rng.randint(1, max_n)
    g = random_graph(rng, n, rng.choice([0.2, 0.35, 0.5, 0.7]))
    verts = sorted(g.vertices)
    terms = frozenset(rng.sample(verts, min(n, rng.randint(0, 4))))
    reqs = []
    tlist = sorted(terms)
    for _ in range(rng.randint(0, max_r)):
        size = rng.choice([0, 1, 1, 2, 2])
        if size > len(tlist):
            size = len(tlist)
        reqs.append(frozenset(rng.sample(tlist, size)))
    k = rng.randint(0, max_k)
    return LinkageInstance(g, k, terms, tuple(reqs))


class TestInstanceValidation:
    def test_request_must_reference_terminals(self):
        g = Graph.from_edges([1, 2])
        inst = LinkageInstance(g, 1, frozenset({1}), (frozenset({2}),))
        with pytest.raises(InputError):
            inst.validate()

    def test_oversized_request_rejected(self):
        g = Graph.from_edges([1, 2, 3])
        inst = LinkageInstance(g, 1, frozenset({1, 2, 3}), (frozenset({1, 2, 3}),))
        with pytest.raises(InputError):
            inst.validate()

    def test_negative_budget_rejected(self):
        g = Graph.from_edges([1])
        with pytest.raises(InputError):
            LinkageInstance(g, -1, frozenset(), ()).validate()


class TestSolveLinkage:
    def test_plain_k_path_question(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3), (1, 3)])
        sol = solve_linkage(LinkageInstance(g, 3, frozenset(), (frozenset(),)))
        assert sol is not None and len(sol[0]) == 3

    def test_smallest_yes_instance(self):
        g = Graph.from_edges([7])
        sol = solve_linkage(LinkageInstance(g, 1, frozenset(), (frozenset(),)))
        assert sol == [(7,)]

    def test_single_edge_request(self):
        g = Graph.from_edges([1, 2], [(1, 2)])
        inst = LinkageInstance(g, 2, frozenset({1, 2}), (frozenset({1, 2}),))
        assert solve_linkage(inst) == [(1, 2)]
        inst3 = LinkageInstance(g, 3, frozenset({1, 2}), (frozenset({1, 2}),))
        assert solve_linkage(inst3) is None

    def test_no_requests(self):
        g = Graph.from_edges([1, 2])
        assert solve_linkage(LinkageInstance(g, 0, frozenset(), ())) == []
        assert solve_linkage(LinkageInstance(g, 1, frozenset(), ())) is None

    def test_duplicate_pair_requests_share_both_endpoints(self):
        # two internally disjoint 1-interior paths between the poles
        g = Graph.from_edges([1, 2, 3, 4], [(1, 3), (3, 2), (1, 4), (4, 2)])
        req = frozenset({1, 2})
        inst = LinkageInstance(g, 4, frozenset(req), (req, req))
        sol = solve_linkage(inst)
        assert sol is not None
        assert validate_solution(inst, sol)

    def test_budget_is_a_hard_error(self):
        rng = random.Random(3)
        g = random_graph(rng, 8, 0.8)
        inst = LinkageInstance(g, 8, frozenset(), (frozenset(),))
        with pytest.raises(BudgetExceededError):
            solve_linkage(inst, node_budget=2)

    def test_terminal_not_in_any_request_is_avoided(self):
        # path 1-2-3 with 2 a terminal not requested: no 3-path may use it
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])
        inst = LinkageInstance(g, 3, frozenset({2}), (frozenset(),))
        assert solve_linkage(inst) is None


class TestValidateSolution:
    def test_round_trip(self):
        rng = random.Random(11)
        seen_yes = 0
        for _ in range(150):
            inst = random_instance(rng)
            sol = solve_linkage(inst)
            if sol is not None:
                seen_yes += 1
                assert validate_solution(inst, sol)
        assert seen_yes > 10

    def test_shared_nonterminal_rejected(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])
        inst = LinkageInstance(g, 3, frozenset({1, 3}), (frozenset({1}), frozenset({3})))
        bogus = [(1, 2), (3, 2)]
        assert not validate_solution(inst, bogus)

    def test_terminal_must_be_an_endpoint(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])
        inst = LinkageInstance(g, 3, frozenset({1, 2}), (frozenset({1, 2}),))
        assert not validate_solution(inst, [(1, 2, 3)])

    def test_count_must_match(self):
        g = Graph.from_edges([1, 2], [(1, 2)])
        inst = LinkageInstance(g, 1, frozenset({1, 2}), (frozenset({1, 2}),))
        assert not validate_solution(inst, [(1, 2)])


class TestBruteForceLinkage:
    def test_cap(self):
        g = Graph.from_edges(range(1, 20))
        with pytest.raises(NotApplicableError):
            brute_force_linkage(LinkageInstance(g, 0, frozenset(), ()))

    def test_vacuous_cases(self):
        g = Graph.from_edges([1])
        assert brute_force_linkage(LinkageInstance(g, 0, frozenset(), ())) == []
        assert brute_force_linkage(LinkageInstance(g, 2, frozenset(), ())) is None

    def test_agrees_with_solver_on_random_instances(self):
        rng = random.Random(20260810)
        for _ in range(200):
            inst = random_instance(rng, max_n=7)
            a = solve_linkage(inst)
            b = brute_force_linkage(inst)
            assert (a is None) == (b is None), instance_to_json(inst)
            if a is not None:
                assert validate_solution(inst, a) and validate_solution(inst, b)

    def test_edge_monotonicity_of_yes(self):
        rng = random.Random(9)
        checked = 0
        for _ in range(200):
            inst = random_instance(rng, max_n=7)
            if solve_linkage(inst) is None:
                continue
            g2 = inst.graph.copy()
            absent = [
                (a, b)
                for a, b in itertools.combinations(sorted(g2.vertices), 2)
                if not g2.has_edge(a, b)
            ]
            if not absent:
                continue
            g2.add_edge(*rng.choice(absent))
            inst2 = LinkageInstance(g2, inst.k_prime, inst.terminals, inst.requests)
            assert solve_linkage(inst2) is not None
            checked += 1
        assert checked > 20


class TestDecisionToWitness:
    @staticmethod
    def make_decider(counter):
        def decide(inst):
            counter[0] += 1
            return brute_force_linkage(inst) is not None

        return decide

    def test_single_edge_reconstruction(self):
        g = Graph.from_edges([1, 2], [(1, 2)])
        inst = LinkageInstance(g, 2, frozenset({1, 2}), (frozenset({1, 2}),))
        calls = [0]
        sol = decision_to_witness(self.make_decider(calls), inst)
        assert sol == [(1, 2)]

    def test_no_instance_costs_one_call(self):
        g = Graph.from_edges([1, 2])
        inst = LinkageInstance(g, 2, frozenset({1, 2}), (frozenset({1, 2}),))
        calls = [0]
        assert decision_to_witness(self.make_decider(calls), inst) is None
        assert calls[0] == 1

    def test_triangle_hamiltonian_witness(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3), (1, 3)])
        inst = LinkageInstance(g, 3, frozenset(), (frozenset(),))
        calls = [0]
        sol = decision_to_witness(self.make_decider(calls), inst)
        assert sol is not None and validate_solution(inst, sol)

    def test_random_yes_instances_within_call_budget(self):
        rng = random.Random(17)
        reconstructed = 0
        for _ in range(120):
            inst = random_instance(rng, max_n=7, max_r=2, max_k=6)
            if brute_force_linkage(inst) is None:
                continue
            calls = [0]
            sol = decision_to_witness(self.make_decider(calls), inst)
            assert sol is not None and validate_solution(inst, sol)
            assert calls[0] <= inst.graph.m + inst.graph.n + 1
            reconstructed += 1
        assert reconstructed > 20

    def test_duplicate_pair_requests_can_share_one_edge(self):
        # found by fuzzing: both {2,7} requests ride the single edge (2,7)
        g = Graph.from_edges(
            range(1, 9),
            [(1, 3), (1, 5), (1, 6), (1, 7), (2, 3), (2, 5), (2, 6), (2, 7),
             (2, 8), (3, 4), (3, 5), (3, 6), (3, 8), (4, 5), (4, 6), (5, 7),
             (5, 8), (6, 7)],
        )
        inst = LinkageInstance(
            g, 7, frozenset({2, 6, 7}),
            (frozenset({2, 6}), frozenset({2, 7}), frozenset({2, 7})),
        )
        calls = [0]
        sol = decision_to_witness(self.make_decider(calls), inst)
        assert sol is not None and validate_solution(inst, sol)
        assert calls[0] <= g.m + g.n + 1

    def test_inconsistent_decider_is_reported(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])
        inst = LinkageInstance(g, 3, frozenset(), (frozenset(),))

        def liar(_inst):
            return True  # claims yes even for empty graphs

        with pytest.raises(OracleFaultError):
            decision_to_witness(liar, inst)


class TestCountingOracle:
    def test_counts_and_max(self):
        stats = OracleStats()
        solver = counting_oracle(solve_linkage, stats)
        for n in (5, 9, 7):
            g = Graph.from_edges(range(1, n + 1))
            solver(LinkageInstance(g, 1, frozenset(), (frozenset(),)))
        assert stats.calls == 3
        assert stats.max_instance_vertices == 9

    def test_pass_through(self):
        rng = random.Random(23)
        stats = OracleStats()
        wrapped = counting_oracle(solve_linkage, stats)
        for _ in range(50):
            inst = random_instance(rng, max_n=6)
            assert (wrapped(inst) is None) == (solve_linkage(inst) is None)
        assert stats.calls == 50


class TestConcurrentStats:
    def test_recording_is_thread_safe(self):
        from concurrent.futures import ThreadPoolExecutor

        stats = OracleStats()
        solver = counting_oracle(solve_linkage, stats)
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])
        inst = LinkageInstance(g, 3, frozenset(), (frozenset(),))
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(lambda _: solver(inst), range(200)))
        assert stats.calls == 200
        assert len(stats.per_call_log) == 200
        assert stats.max_instance_vertices == 3


class TestJsonFormat:
    def test_round_trip(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2)])
        inst = LinkageInstance(g, 2, frozenset({1, 2}), (frozenset({1, 2}), frozenset()))
        data = json.loads(json.dumps(instance_to_json(inst)))
        back = instance_from_json(data)
        assert back.graph == inst.graph
        assert back.k_prime == inst.k_prime
        assert back.terminals == inst.terminals
        assert sorted(map(sorted, back.requests)) == sorted(map(sorted, inst.requests))
