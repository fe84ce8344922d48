"""
Matching patterns on the running example
========================================

Load the small gaming-industry graph, list the matches of the four
query patterns, and split the graph into communities.
"""

from gedminer import detect_communities, homomorphic_matches, isomorphic_matches
from gedminer.fixtures import running_example_graph, running_example_patterns

G = running_example_graph()
patterns = running_example_patterns()
print(f"{len(G.nodes)} nodes, {len(G.edges)} edges")

# Homomorphic matches need not be injective; symmetric copies of a
# match (y and y2 swapped) are reported once.
for name, Q in patterns.items():
    matches = homomorphic_matches(Q, G)
    print(f"{name} {Q}")
    print("   ", " ".join("(" + ",".join(m.nodes) + ")" for m in matches))

# Two products made by the same company: homomorphic matching also allows
# y = y2, isomorphic matching does not.
from gedminer import GraphPattern

twin = GraphPattern.build({"x": "company", "y": "product", "y2": "product"},
                          [("x", "create", "y"), ("x", "create", "y2")])
print("twin products:", len(homomorphic_matches(twin, G, orbit_dedup=False)), "homomorphic,",
      len(isomorphic_matches(twin, G, orbit_dedup=False)), "isomorphic")

# A low resolution keeps the connected parts together; node 13 has no
# edges and ends up alone.
A = detect_communities(G, gamma=0.01, seed=0)
for i, c in enumerate(A.communities):
    print(f"community {i}:", sorted(c, key=int))
