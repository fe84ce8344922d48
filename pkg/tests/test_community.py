import itertools

import pytest
from hypothesis import given, settings, strategies as st

from gedminer.community import CommunityAssignment, cpm_quality, detect_communities
from gedminer.fixtures import running_example_graph
from gedminer.graph import NodeRecord, PropertyGraph
from gedminer.synthetic import random_property_graph


def _graph(n, edges):
    return PropertyGraph([NodeRecord(str(i), "N") for i in range(n)], [(str(a), "r", str(b)) for a, b in edges])


TRIANGLES = _graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] | {first}] + part[i + 1:]
        yield part + [{first}]


def _best_partition(G, gamma):
    best, arg = None, None
    for part in _set_partitions(sorted(G.nodes)):
        q = cpm_quality(G, CommunityAssignment.from_communities(part, gamma))
        if best is None or q > best + 1e-12:
            best, arg = q, part
    return best, arg


def test_quality_single_community():
    G = running_example_graph()
    A = CommunityAssignment({v: 0 for v in G.nodes}, gamma=0.2)
    assert cpm_quality(G, A) == pytest.approx(20 - 0.2 * 15 * 14 / 2, abs=1e-12)


def test_quality_singletons_is_zero():
    G = running_example_graph()
    assert cpm_quality(G, CommunityAssignment({v: v for v in G.nodes}, gamma=3.0)) == 0.0


def test_quality_two_communities():
    G = _graph(3, [(0, 1)])
    A = CommunityAssignment.from_communities([{"0", "1"}, {"2"}], gamma=0.5)
    assert cpm_quality(G, A) == pytest.approx(0.5, abs=1e-12)


def test_quality_counts_edges_without_direction():
    G = _graph(2, [(0, 1), (1, 0)])
    assert cpm_quality(G, CommunityAssignment({"0": 0, "1": 0}, gamma=1.0)) == pytest.approx(1.0)


def test_quality_requires_cover():
    G = _graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        cpm_quality(G, CommunityAssignment({"0": 0}, gamma=1.0))


def test_assignment_invariants():
    with pytest.raises(ValueError):
        CommunityAssignment({"a": 0, "b": 1}, [frozenset("a"), frozenset("ab")])
    with pytest.raises(ValueError):
        CommunityAssignment({"a": 0}, [frozenset("a"), frozenset()])


def test_two_triangles_match_exhaustive_optimum():
    best, part = _best_partition(TRIANGLES, 0.1)
    A = detect_communities(TRIANGLES, gamma=0.1)
    assert cpm_quality(TRIANGLES, A) == pytest.approx(best)
    assert sorted(map(sorted, A.communities)) == sorted(map(sorted, part)) == [["0", "1", "2"], ["3", "4", "5"]]


def test_single_node_and_empty_graph():
    A = detect_communities(_graph(1, []), gamma=1.0)
    assert A.communities == [frozenset(["0"])]
    assert len(detect_communities(PropertyGraph(), gamma=1.0)) == 0


def test_fixture_node_13_alone():
    A = detect_communities(running_example_graph(), gamma=0.01)
    assert frozenset(["13"]) in A.communities
    assert sorted(len(c) for c in A.communities) == [1, 4, 10]


@pytest.mark.parametrize("method", ["leiden", "greedy"])
def test_accepted_moves_strictly_improve(method):
    gains = []
    G = random_property_graph(200, 500, seed=3)
    detect_communities(G, gamma=0.05, method=method, audit=gains.append)
    assert gains and all(g > 0 for g in gains)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.01, 0.1, 0.5, 1.0]))
def test_result_beats_singletons_and_is_a_partition(seed, gamma):
    G = random_property_graph(40, 80, seed=seed)
    A = detect_communities(G, gamma=gamma, seed=seed)
    assert set(A.assignment) == set(G.nodes)
    assert sum(len(c) for c in A.communities) == len(G.nodes)
    singles = CommunityAssignment({v: i for i, v in enumerate(G.nodes)}, gamma=gamma)
    assert cpm_quality(G, A) >= cpm_quality(G, singles) - 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.05, 0.3]))
def test_no_single_node_move_improves_result(seed, gamma):
    G = random_property_graph(40, 100, seed=seed)
    A = detect_communities(G, gamma=gamma, seed=seed)
    q = cpm_quality(G, A)
    asg = dict(A.assignment)
    targets = set(asg.values()) | {-1}
    for v in G.nodes:
        old = asg[v]
        for t in targets - {old}:
            asg[v] = t
            assert cpm_quality(G, CommunityAssignment(dict(asg), gamma=gamma)) <= q + 1e-9
        asg[v] = old


def test_seeded_runs_are_identical():
    G = random_property_graph(300, 900, seed=11)
    runs = [detect_communities(G, gamma=0.02, seed=5).assignment for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


def test_higher_resolution_gives_no_fewer_communities():
    G = random_property_graph(150, 400, seed=2)
    for seed in range(10):
        assert len(detect_communities(G, gamma=1.0, seed=seed)) >= len(detect_communities(G, gamma=0.001, seed=seed))


def test_bad_arguments():
    with pytest.raises(ValueError):
        detect_communities(TRIANGLES, gamma=0)
    with pytest.raises(ValueError):
        detect_communities(TRIANGLES, method="louvain")
