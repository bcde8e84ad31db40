import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccsp.errors import AlgoMismatch
from ccsp.instance import Instance, all_positive_ksat, random_complete_instance
from ccsp.oracle import enumerate_bruteforce
from ccsp.twocsp import (EnumStats, TwoCspView, build_implication_graph, consistency_check,
                         decide_2csp, decide_instance, enumerate_2csp, enumerate_complete_2csp,
                         strongly_connected_components)


def test_scc_simple_cycle():
    comp = strongly_connected_components([[1], [2], [0], []])
    assert comp[0] == comp[1] == comp[2] != comp[3]


def test_scc_deep_chain_is_iterative():
    n = 20000
    adj = [[i + 1] for i in range(n - 1)] + [[0]]
    comp = strongly_connected_components(adj)
    assert len(set(comp)) == 1


def test_implication_edges():
    inst = Instance(2, 2, 2, {(0, 1): [(0, 0)]})
    g = build_implication_graph(TwoCspView.from_instance(inst))
    # forbidding (0, 0) is the clause x0 or x1
    assert sorted(g.edges) == [(0, 3), (2, 1)]
    assert consistency_check(g)


def test_unit_contradiction():
    inst = Instance(2, 2, 2, {(0, 1): [(0, 0), (0, 1), (1, 0), (1, 1)]})
    view = TwoCspView.from_instance(inst)
    assert not consistency_check(build_implication_graph(view))
    assert decide_2csp(view) == (False, None)


def test_deleting_edges_restores_consistency():
    inst = Instance(2, 2, 2, {(0, 1): [(0, 0), (1, 1), (0, 1), (1, 0)]})
    g = build_implication_graph(TwoCspView.from_instance(inst))
    assert not consistency_check(g)
    assert consistency_check(g, deleted=range(len(g.edges)))


def test_label_mapping_for_ternary_sets():
    inst = Instance(2, 3, 2, {(0, 1): [(2, 0), (1, 2)]}, label_sets=[{1, 2}, {0, 2}])
    sols = enumerate_2csp(TwoCspView.from_instance(inst))
    assert sols == enumerate_bruteforce(inst).tuples()
    assert sols == [(1, 0), (2, 2)]


def test_three_labels_rejected():
    inst = Instance(2, 3, 2, {(0, 1): [(0, 0)]})
    with pytest.raises(AlgoMismatch):
        TwoCspView.from_instance(inst)
    with pytest.raises(AlgoMismatch):
        enumerate_complete_2csp(all_positive_ksat(4, 3))


@pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
def test_all_positive_2sat(n):
    sols = enumerate_complete_2csp(all_positive_ksat(n, 2)).tuples()
    assert len(sols) == n + 1
    assert sols[0] == (0,) + (1,) * (n - 1) if n > 1 else sols[0] == (0,)


def test_enumeration_is_lexicographic(rng):
    inst = random_complete_instance(9, 2, 2, rng, 1, 1)
    sols = enumerate_2csp(TwoCspView.from_instance(inst))
    assert sols == sorted(sols)


def test_polynomial_pruning_count(rng):
    # each emitted solution costs at most 2n pruning calls, plus the root
    inst = all_positive_ksat(30, 2)
    stats = EnumStats()
    sols = enumerate_complete_2csp(inst, stats)
    assert stats.pruning_calls <= 1 + 2 * inst.n * len(sols)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 9), st.integers(1, 3))
def test_matches_oracle(seed, n, hi):
    inst = random_complete_instance(n, 2, 2, np.random.default_rng(seed), 1, hi)
    assert enumerate_complete_2csp(inst) == enumerate_bruteforce(inst)
    sat, w = decide_instance(inst)
    assert sat == (len(enumerate_bruteforce(inst)) > 0)
    if sat:
        assert inst.satisfies(w)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_sparse_restricted_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 6
    sets = [frozenset(rng.choice(3, size=int(rng.integers(1, 3)), replace=False).tolist())
            for _ in range(n)]
    clauses = {key: [tuple(int(x) for x in rng.integers(0, 3, 2))]
               for key in itertools.combinations(range(n), 2) if rng.random() < 0.6}
    inst = Instance(2, 3, n, clauses, sets)
    assert enumerate_2csp(TwoCspView.from_instance(inst)) == enumerate_bruteforce(inst).tuples()
