"""
Rule classes and checking rules on a graph
==========================================

Compare the three rule classes on one small graph and check a
hand-written rule against the running example.
"""

from gedminer import DiscoveryConfig, Ged, Literal, check_satisfaction, discover_from_graph
from gedminer.fixtures import running_example_graph, running_example_patterns
from gedminer.graph import NodeRecord, PropertyGraph

# Four vendors in one market, three products each.  Serial numbers are
# unique, so within any pair of products "same serial" means "same node";
# that is a key rule, visible only when a pair may bind one node twice.
nodes = [NodeRecord("market", "market", (("name", "games"),))]
edges = []
for v, genre in enumerate(["racing", "racing", "puzzle", "shooter"]):
    vid = f"v{v}"
    nodes.append(NodeRecord(vid, "company", (("genre", genre),)))
    edges.append((vid, "sells_in", "market"))
    for p in range(3):
        pid = f"{vid}p{p}"
        nodes.append(NodeRecord(pid, "product", (("serial", f"S{v}{p}"), ("genre", genre))))
        edges.append((vid, "create", pid))
G = PropertyGraph(nodes, edges)

for mode, matching in (("ged", "auto"), ("gfd", "auto"), ("gkey", "homomorphic")):
    cfg = DiscoveryConfig(gamma=0.01, tau=2, mode=mode, matching=matching, max_lhs_size=1, top_k=3)
    report = discover_from_graph(G, cfg)
    print(f"{mode} ({'isomorphic' if cfg.isomorphic else 'homomorphic'} matching)")
    for g in report.rules:
        print("   ", g)

# A rule that almost holds: products carry their maker's name as creator,
# except for one product credited to a studio.
Q2 = running_example_patterns()["Q2"]
phi = Ged(Q2, frozenset(), frozenset([Literal.variable("y", "creator", "x", "name")]))
ok, violations = check_satisfaction(phi, running_example_graph())
print("holds:", ok, "violated by", [m.as_dict() for m in violations])
