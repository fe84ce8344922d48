"""
Walking the dependency lattice
==============================

Build the match table of the three-node pattern, look at a few
partitions, then mine the minimal dependencies level by level.
"""

from gedminer import Literal, build_pseudo_relation, homomorphic_matches, mine_dependencies, partition_of
from gedminer.depminer import MiningTrace
from gedminer.fixtures import running_example_graph, running_example_patterns

G = running_example_graph()
Q = running_example_patterns()["Q3"]

# Keep only names, as in the walk-through: one id column and one name
# column per variable.
T = build_pseudo_relation(Q, homomorphic_matches(Q, G), G, {"x": ["name"], "y": ["name"], "y2": ["name"]})
print("columns:", ", ".join(f"{v}.{a}" for v, a in T.columns))
for row in T.to_records():
    print("   ", row)

# pi({}) is one block holding every match; a constant literal keeps only
# the rows that satisfy it.
f20 = Literal.constant("y", "name", "F20")
ea = Literal.constant("x", "name", "EA")
print("pi({})            =", sorted(map(sorted, partition_of([], T).blocks)))
print("pi(y.name=F20)    =", sorted(map(sorted, partition_of([f20], T).blocks)))
print("pi(F20, x.name=EA)=", sorted(map(sorted, partition_of([f20, ea], T).blocks)))

# Equal partitions mean y.name=F20 -> x.name=EA holds on every match.
trace = MiningTrace()
rules = mine_dependencies(Q, T, max_lhs_size=2, trace=trace)
print("lattice level sizes:", trace.level_sizes, "rules:", len(rules))
for g in rules[:8]:
    lhs = ", ".join(map(str, sorted(g.lhs))) or "{}"
    print(f"    {lhs} -> {', '.join(map(str, g.rhs))}   support {g.stats.support}/{g.stats.matches}")
