"""Constant Potts Model communities via a Leiden-style optimiser.

Density is computed on the undirected projection: the weight between two
nodes is the number of graph edges joining them in either direction.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable

from .graph import PropertyGraph


@dataclass
class CommunityAssignment:
    assignment: dict[Hashable, int]
    communities: list[frozenset] = field(default_factory=list)
    gamma: float = 1.0

    def __post_init__(self):
        if not self.communities:
            groups = defaultdict(set)
            for n, c in self.assignment.items():
                groups[c].add(n)
            self.communities = [frozenset(groups[c]) for c in sorted(groups)]
        seen = set()
        for c in self.communities:
            if not c:
                raise ValueError("empty community")
            if seen & c:
                raise ValueError("communities overlap")
            seen |= c
        if seen != set(self.assignment):
            raise ValueError("communities and assignment disagree")

    @classmethod
    def from_communities(cls, communities, gamma: float = 1.0) -> "CommunityAssignment":
        comms = [frozenset(c) for c in communities]
        assignment = {n: i for i, c in enumerate(comms) for n in c}
        return cls(assignment, comms, gamma)

    def __len__(self):
        return len(self.communities)


def cpm_quality(G: PropertyGraph, A: CommunityAssignment) -> float:
    """``sum_c [e_c - gamma * C(n_c, 2)]`` for the assignment ``A``."""
    if A.gamma <= 0:
        raise ValueError("gamma must be positive")
    if set(A.assignment) != set(G.nodes):
        raise ValueError("assignment does not cover exactly the graph's nodes")
    e = defaultdict(int)
    for s, _, t in G.edges:
        cs = A.assignment[s]
        if cs == A.assignment[t]:
            e[cs] += 1
    total = 0.0
    for c in A.communities:
        n_c = len(c)
        total += e[A.assignment[next(iter(c))]] - A.gamma * n_c * (n_c - 1) / 2
    return total


# -- optimiser ---------------------------------------------------------------------

class _Net:
    """Weighted undirected network over integer nodes with node sizes."""

    def __init__(self, adj: list[dict[int, float]], size: list[int]):
        self.adj = adj
        self.size = size

    @property
    def n(self):
        return len(self.size)


def _projection(G: PropertyGraph) -> tuple[list, _Net]:
    ids = sorted(G.nodes, key=lambda x: (str(type(x)), x))
    pos = {n: i for i, n in enumerate(ids)}
    adj: list[dict] = [defaultdict(float) for _ in ids]
    for s, _, t in G.edges:
        a, b = pos[s], pos[t]
        if a == b:
            continue
        adj[a][b] += 1.0
        adj[b][a] += 1.0
    # sorted adjacency keeps visiting order independent of edge-set hashing
    return ids, _Net([dict(sorted(d.items())) for d in adj], [1] * len(ids))


def _local_moving(net: _Net, part: list[int], gamma: float, rng: random.Random,
                  audit: Callable[[float], None] | None) -> bool:
    n = net.n
    csize = defaultdict(int)
    for v in range(n):
        csize[part[v]] += net.size[v]
    free = [c for c in range(n) if csize[c] == 0]
    next_id = max(part) + 1
    order = list(range(n))
    rng.shuffle(order)
    queue = list(order)
    inq = [True] * n
    head = 0
    moved = False
    while head < len(queue):
        v = queue[head]
        head += 1
        inq[v] = False
        sv = net.size[v]
        own = part[v]
        kc = defaultdict(float)
        for u, w in net.adj[v].items():
            kc[part[u]] += w
        stay = kc.get(own, 0.0) - gamma * sv * (csize[own] - sv)
        best_c, best_gain = own, stay
        for c in sorted(kc):
            if c == own:
                continue
            gain = kc[c] - gamma * sv * csize[c]
            if gain > best_gain + 1e-12:
                best_c, best_gain = c, gain
        if csize[own] > sv and best_gain < -1e-12:
            # moving into an empty community (gain 0) beats every option
            if free:
                best_c = free.pop()
            else:
                best_c, next_id = next_id, next_id + 1
            best_gain = 0.0
        if best_c == own:
            continue
        if audit is not None:
            audit(best_gain - stay)
        csize[own] -= sv
        if csize[own] == 0:
            free.append(own)
        csize[best_c] += sv
        part[v] = best_c
        moved = True
        for u in net.adj[v]:
            if not inq[u] and part[u] != best_c:
                inq[u] = True
                queue.append(u)
    return moved


def _refine(net: _Net, part: list[int], gamma: float, rng: random.Random, theta: float = 0.01) -> list[int]:
    members = defaultdict(list)
    for v in range(net.n):
        members[part[v]].append(v)
    refined = list(range(net.n))
    rsize = list(net.size)
    rcount = [1] * net.n
    for c, nodes in members.items():
        in_c = set(nodes)
        n_s = sum(net.size[v] for v in nodes)
        k_in = {v: sum(w for u, w in net.adj[v].items() if u in in_c) for v in nodes}
        ext = {v: k_in[v] for v in nodes}  # edge weight from refined cluster to rest of S
        order = list(nodes)
        rng.shuffle(order)
        for v in order:
            if rcount[refined[v]] != 1:
                continue
            sv = net.size[v]
            if k_in[v] < gamma * sv * (n_s - sv):
                continue
            kc = defaultdict(float)
            for u, w in net.adj[v].items():
                if u in in_c and u != v:
                    kc[refined[u]] += w
            options = [(0.0, refined[v])]
            for r in sorted(kc):
                if r == refined[v]:
                    continue
                nr = rsize[r]
                if ext[r] < gamma * nr * (n_s - nr):
                    continue
                gain = kc[r] - gamma * sv * nr
                if gain > 1e-12:
                    options.append((gain, r))
            if len(options) == 1:
                continue
            top = max(g for g, _ in options)
            weights = [math.exp((g - top) / theta) for g, _ in options]
            _, target = rng.choices(options, weights=weights)[0]
            if target == refined[v]:
                continue
            old = refined[v]
            ext[target] = ext[target] + k_in[v] - 2 * kc[target]
            rsize[target] += sv
            rsize[old] -= sv
            rcount[target] += 1
            rcount[old] -= 1
            refined[v] = target
    return refined


def _aggregate(net: _Net, refined: list[int]) -> tuple[_Net, list[int]]:
    ids = sorted(set(refined))
    pos = {r: i for i, r in enumerate(ids)}
    size = [0] * len(ids)
    adj: list[dict] = [defaultdict(float) for _ in ids]
    for v in range(net.n):
        a = pos[refined[v]]
        size[a] += net.size[v]
        for u, w in net.adj[v].items():
            b = pos[refined[u]]
            if a != b:
                adj[a][b] += w
    return _Net([dict(sorted(d.items())) for d in adj], size), [pos[r] for r in refined]


def _net_quality(net: _Net, part: list[int], gamma: float) -> float:
    inner = 0.0
    csize = defaultdict(int)
    for v in range(net.n):
        csize[part[v]] += net.size[v]
        inner += sum(w for u, w in net.adj[v].items() if part[u] == part[v])
    return inner / 2 - gamma * sum(n * (n - 1) / 2 for n in csize.values())


def _leiden_pass(net: _Net, start: list[int], gamma: float, rng: random.Random,
                 audit: Callable[[float], None] | None, max_iterations: int) -> list[int]:
    """Local moving, refinement and aggregation until an aggregate level moves nothing."""
    membership = list(range(net.n))  # original node -> aggregate node
    part = list(start)
    for _ in range(max_iterations):
        _local_moving(net, part, gamma, rng, audit)
        if len(set(part)) == net.n:
            break
        refined = _refine(net, part, gamma, rng)
        agg, node_map = _aggregate(net, refined)
        membership = [node_map[m] for m in membership]
        # the aggregate starts from the unrefined partition
        new_part = [0] * agg.n
        for v in range(net.n):
            new_part[node_map[v]] = part[v]
        net, part = agg, new_part
    return [part[m] for m in membership]


def detect_communities(
    G: PropertyGraph,
    gamma: float = 1.0,
    seed: int = 0,
    method: str = "leiden",
    max_iterations: int = 100,
    audit: Callable[[float], None] | None = None,
) -> CommunityAssignment:
    """Partition ``G`` maximising CPM quality.

    ``method="leiden"`` runs local moving, refinement and aggregation until
    an aggregate level moves nothing, and repeats such passes from the
    previous result until the quality stops rising; ``method="greedy"`` repeats node-level
    local moving only.  ``audit`` receives the quality gain of every accepted
    local move.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if method not in ("leiden", "greedy"):
        raise ValueError(f"unknown method {method!r}")
    ids, net = _projection(G)
    if not ids:
        return CommunityAssignment({}, [], gamma)
    rng = random.Random(seed)

    if method == "greedy":
        part = list(range(net.n))
        for _ in range(max_iterations):
            if not _local_moving(net, part, gamma, rng, audit):
                break
        final = part
    else:
        # repeat whole passes from the previous result; a pass that leaves the
        # quality unchanged made no node-level move, so the result is stable
        final = list(range(net.n))
        quality = _net_quality(net, final, gamma)
        for _ in range(max_iterations):
            final = _leiden_pass(net, final, gamma, rng, audit, max_iterations)
            q = _net_quality(net, final, gamma)
            if q <= quality + 1e-12:
                break
            quality = q

    groups = defaultdict(list)
    for i, c in enumerate(final):
        groups[c].append(ids[i])
    pos = {x: i for i, x in enumerate(ids)}
    comms = sorted((frozenset(g) for g in groups.values()), key=lambda c: min(pos[x] for x in c))
    result = CommunityAssignment.from_communities(comms, gamma)
    singles = CommunityAssignment.from_communities([[n] for n in ids], gamma)
    if cpm_quality(G, result) < cpm_quality(G, singles):
        return singles
    return result
