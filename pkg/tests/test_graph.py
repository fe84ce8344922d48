import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from gedminer.fixtures import fixture_paths, running_example_graph, running_example_patterns
from gedminer.graph import (
    WILDCARD, DuplicateNodeError, GraphFormatError, GraphPattern, NodeRecord, PatternError, PropertyGraph,
    ReferentialIntegrityError, filter_graph, labels_match, load_graph, load_graph_files, write_graph,
)
from gedminer.matcher import find_matches

import oracles

NODES = "id,label,attr,attr\n1,company,name=Ubisoft,country=France\n4,product,name=AC,\n"
EDGES = "src,label,dst\n1,create,4\n"


def test_loads_fixture_sizes():
    G = running_example_graph()
    assert len(G.nodes) == 15
    assert len(G.edges) == 20
    assert G.node("1").attribute_dict == {"name": "Ubisoft", "country": "France"}
    assert G.label("13") == "person"


def test_load_from_files_matches_in_memory():
    G = load_graph_files(*fixture_paths())
    assert G.edges == running_example_graph().edges


def test_load_accepts_str_and_bytes():
    a = load_graph(NODES, EDGES)
    b = load_graph(NODES.encode(), EDGES.encode())
    assert a.edges == b.edges == {("1", "create", "4")}
    assert b.node("4").attributes == (("name", "AC"),)


def test_json_attribute_cell():
    G = load_graph('id,label,attr\n1,company,"{""name"": ""A,B""}"\n', "src,label,dst\n")
    assert G.node("1").get("name") == "A,B"


def test_parallel_edges_collapse():
    G = load_graph(NODES, EDGES + "1,create,4\n")
    assert len(G.edges) == 1


def test_duplicate_node_rejected():
    with pytest.raises(DuplicateNodeError):
        load_graph(NODES + "1,company,\n", EDGES)


def test_dangling_edge_rejected():
    with pytest.raises(ReferentialIntegrityError):
        load_graph(NODES, EDGES + "1,create,99\n")


@pytest.mark.parametrize("nodes", [
    "node,label\n1,a\n",                          # bad header
    "id,label,colour\n1,a,red\n",                 # undeclared column
    "id,label,attr\n1,a,x=1,y=2\n",               # row longer than header
    "id,label,attr\n1,a,novalue\n",               # not key=value
    "id,label,attr\n1,a,{bad json\n",
    "id,label,attr,attr\n1,a,x=1,x=2\n",          # repeated attribute
    "id,label,attr\n1,a,id=3\n",                  # reserved name
    "id,label\n1,\n",
])
def test_malformed_nodes_rejected(nodes):
    with pytest.raises(GraphFormatError):
        load_graph(nodes, "src,label,dst\n")


def test_malformed_edge_rows_report_line():
    with pytest.raises(GraphFormatError) as err:
        load_graph(NODES, "src,label,dst\n1,create,4\n1,create\n")
    assert "3" in str(err.value)


def test_labels_match_wildcard():
    assert labels_match("a", "a")
    assert labels_match(WILDCARD, "a") and labels_match("a", WILDCARD)
    assert not labels_match("a", "b")


@given(st.text(max_size=3), st.text(max_size=3))
def test_labels_match_symmetric(a, b):
    assert labels_match(a, b) == labels_match(b, a)


def test_pattern_validation():
    with pytest.raises(PatternError):
        GraphPattern.build({"x": "a", "y": "b"})  # disconnected
    with pytest.raises(PatternError):
        GraphPattern.build({"x": "a"}, [("x", "r", "z")])
    with pytest.raises(PatternError):
        GraphPattern(("x", "x"), ("a", "a"), frozenset([("x", "r", "x")]))


def test_pattern_dict_round_trip():
    for Q in running_example_patterns().values():
        assert GraphPattern.from_dict(Q.to_dict()) == Q


def test_write_read_round_trip():
    G = running_example_graph()
    n, e = io.StringIO(), io.StringIO()
    write_graph(G, n, e)
    H = load_graph(n.getvalue(), e.getvalue())
    assert H.edges == G.edges
    assert {k: v.attribute_dict for k, v in H.nodes.items()} == {k: v.attribute_dict for k, v in G.nodes.items()}


def test_filter_keeps_only_relevant_labels():
    G = running_example_graph()
    Q = GraphPattern.build({"x": "company", "y": "product", "z": "product"},
                           [("x", "create", "y"), ("x", "create", "z")])
    F = filter_graph(G, Q)
    assert {F.label(n) for n in F.nodes} <= {"company", "product"}
    assert {l for _, l, _ in F.edges} == {"create"}
    assert "13" not in F.nodes


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_filter_is_idempotent_and_preserves_matches(seed):
    rng = random.Random(seed)
    G = oracles.random_graph(rng, rng.randint(1, 10), rng.randint(0, 20), loops=True)
    Q = oracles.random_pattern(rng, rng.randint(1, 3))
    F = filter_graph(G, Q)
    FF = filter_graph(F, Q)
    assert FF.edges == F.edges and set(FF.nodes) == set(F.nodes)
    for iso in (False, True):
        a = [m.nodes for m in find_matches(Q, G, isomorphic=iso, prefilter=False, orbit_dedup=False)]
        b = [m.nodes for m in find_matches(Q, F, isomorphic=iso, prefilter=False, orbit_dedup=False)]
        assert a == b


def test_subgraph_is_induced():
    G = running_example_graph()
    S = G.subgraph(["1", "4", "5", "13"])
    assert S.edges == {("1", "create", "4"), ("1", "create", "5"), ("4", "similar_to", "5")}


def test_node_record_rejects_reserved_id():
    with pytest.raises(Exception):
        NodeRecord("1", "a", (("id", "2"),))
    PropertyGraph([NodeRecord("1", "a")], [])
