"""Minimal cover by transitive reduction of the per-pattern rule graph, and rule ranking."""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .depminer import Ged
from .rules_io import rule_text


class RankError(ValueError):
    pass


def _side(literals) -> tuple:
    return tuple(sorted(literals))


class RuleGraph:
    """Literal sets of one pattern as nodes, one edge ``X -> Y`` per rule."""

    def __init__(self):
        self.out: dict = defaultdict(set)
        self.inn: dict = defaultdict(set)
        self.rules: dict = {}

    def __contains__(self, edge):
        return edge in self.rules

    def add(self, g: Ged):
        x, y = g.lhs, g.rhs
        self.rules[(x, y)] = g
        self.out[x].add(y)
        self.inn[y].add(x)

    def remove(self, x, y):
        del self.rules[(x, y)]
        self.out[x].discard(y)
        self.inn[y].discard(x)

    def reachable(self, x, y, skip=None) -> bool:
        """Path from ``x`` to ``y`` that avoids the edge ``skip``."""
        stack, seen = [x], {x}
        while stack:
            a = stack.pop()
            for b in self.out[a]:
                if (a, b) == skip or b in seen:
                    continue
                if b == y:
                    return True
                seen.add(b)
                stack.append(b)
        return False

    def insert(self, g: Ged):
        """Add ``g``; drop the transitive edge of every triangle it completes."""
        x, y = g.lhs, g.rhs
        if (x, y) in self.rules:
            return
        if any(y in self.out[z] for z in self.out[x]):
            return  # the new edge itself is implied
        self.add(g)
        for z in list(self.out[y]):
            if (x, z) in self.rules:
                self.remove(x, z)
        for w in list(self.inn[x]):
            if (w, y) in self.rules:
                self.remove(w, y)


def _edge_order(g: Ged):
    return (_side(g.lhs), _side(g.rhs))


def find_cover(sigma: Iterable[Ged]) -> list[Ged]:
    """Drop every rule implied by a chain of other rules over the same pattern.

    Edges are inserted in sorted order with triangle elimination, then any
    edge still reachable without itself is removed, so no survivor is
    transitively implied by the rest.
    """
    groups: dict = defaultdict(list)
    for g in sigma:
        groups[g.pattern].append(g)
    out = []
    for pattern in sorted(groups, key=str):
        graph = RuleGraph()
        for g in sorted(groups[pattern], key=_edge_order):
            graph.insert(g)
        for x, y in sorted(graph.rules, key=lambda e: (_side(e[0]), _side(e[1]))):
            if graph.reachable(x, y, skip=(x, y)):
                graph.remove(x, y)
        out.extend(sorted(graph.rules.values(), key=_edge_order))
    return out


@dataclass(frozen=True)
class RankConfig:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def rank_ged(phi: Ged, cfg: RankConfig) -> float:
    """``alpha * (1 - support / |H|) + (1 - alpha) * k / N``; lower ranks first."""
    s = phi.stats
    if s is None:
        raise RankError("rule carries no statistics")
    if s.matches <= 0 or s.n_attributes <= 0:
        raise RankError("rank is undefined for |H| = 0 or N = 0")
    ratio = s.support / s.matches
    return cfg.alpha * (1.0 - ratio) + (1.0 - cfg.alpha) * (s.k / s.n_attributes)


def rank_report(sigma_c: Sequence[Ged], cfg: RankConfig, top_k: int) -> list[Ged]:
    """Rules with ``rank`` filled in, best first, at most ``top_k`` of them."""
    if top_k <= 0:
        return []
    scored = sorted(((rank_ged(g, cfg), g.n_literals), i) for i, g in enumerate(sigma_c))
    if len(scored) > top_k:
        # only rules tied with the k-th one need the serialization tie-break
        cut = scored[top_k - 1][0]
        scored = [t for t in scored if t[0] <= cut]
    ranked = [dataclasses.replace(sigma_c[i], rank=r) for (r, _), i in scored]
    ranked.sort(key=lambda g: (g.rank, g.n_literals, rule_text(dataclasses.replace(g, rank=None))))
    return ranked[:top_k]
