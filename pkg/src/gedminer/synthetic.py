"""Seeded random property graphs with planted attribute dependencies."""

from __future__ import annotations

import numpy as np

from .graph import NodeRecord, PropertyGraph


def random_property_graph(
    n_nodes: int,
    n_edges: int,
    n_labels: int = 3,
    n_attributes: int = 4,
    n_edge_labels: int = 3,
    domain: int = 20,
    seed: int = 0,
) -> PropertyGraph:
    """Uniform random multigraph (duplicates collapse) over labelled nodes.

    Attribute ``a0`` is drawn from ``domain`` values; ``a1`` is a function
    of ``a0`` so that ``a0 -> a1`` style rules exist; the rest are noise.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_labels, n_nodes)
    cols = []
    if n_attributes >= 1:
        a0 = rng.integers(0, domain, n_nodes)
        cols.append(a0)
    if n_attributes >= 2:
        cols.append(a0 % max(2, domain // 4))
    for _ in range(2, n_attributes):
        cols.append(rng.integers(0, domain, n_nodes))
    nodes = [
        NodeRecord(str(i), f"L{labels[i]}", tuple((f"a{j}", f"v{cols[j][i]}") for j in range(n_attributes)))
        for i in range(n_nodes)
    ]
    src = rng.integers(0, n_nodes, n_edges)
    dst = rng.integers(0, n_nodes, n_edges)
    el = rng.integers(0, n_edge_labels, n_edges)
    edges = [(str(s), f"e{l}", str(t)) for s, l, t in zip(src, el, dst) if s != t]
    return PropertyGraph(nodes, edges)
