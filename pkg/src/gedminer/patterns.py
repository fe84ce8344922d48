"""Frequent pattern mining with MNI support, and subsumption-based reduction."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._engine import TargetView, base_domains, exists_embedding, iter_embeddings
from .graph import GraphPattern, PropertyGraph

_LOOP = "@loop"


# -- canonical form -------------------------------------------------------------

def _entry(Q_adj, labels, order_pos, v):
    loops, out_e, in_e = Q_adj
    items = [(-1, "L", l) for l in loops.get(v, ())]
    for l, w in out_e.get(v, ()):
        if w in order_pos:
            items.append((order_pos[w], "o", l))
    for l, w in in_e.get(v, ()):
        if w in order_pos:
            items.append((order_pos[w], "i", l))
    return (labels[v], tuple(sorted(items)))


def canonical_code(Q: GraphPattern) -> tuple:
    """Minimum code over connected vertex orderings of ``Q``.

    Each position contributes the vertex label and its edges to earlier
    positions, so the code is an isomorphism-invariant, complete key.
    """
    return _canonical(Q)[0]


def _canonical(Q: GraphPattern) -> tuple[tuple, tuple[str, ...]]:
    labels = Q.labels
    loops: dict = {}
    out_e: dict = {}
    in_e: dict = {}
    nbrs: dict = {v: set() for v in Q.variables}
    for u, l, v in Q.edges:
        if u == v:
            loops.setdefault(u, []).append(l)
            continue
        out_e.setdefault(u, []).append((l, v))
        in_e.setdefault(v, []).append((l, u))
        nbrs[u].add(v)
        nbrs[v].add(u)
    adj = (loops, out_e, in_e)
    n = len(Q.variables)
    best: list = [None, None]

    def rec(order, pos, code, frontier):
        if len(order) == n:
            if best[0] is None or tuple(code) < best[0]:
                best[0] = tuple(code)
                best[1] = tuple(order)
            return
        cands = frontier if order else set(Q.variables)
        entries = {v: _entry(adj, labels, pos, v) for v in cands}
        low = min(entries.values())
        k = len(code)
        if best[0] is not None and tuple(code) + (low,) > best[0][: k + 1]:
            return
        for v in sorted(u for u, e in entries.items() if e == low):
            pos[v] = k
            order.append(v)
            code.append(low)
            rec(order, pos, code, (frontier | nbrs[v]) - set(order))
            code.pop()
            order.pop()
            del pos[v]

    rec([], {}, [], set())
    return best[0], best[1]


def canonical_pattern(Q: GraphPattern, prefix: str = "x") -> GraphPattern:
    """Relabel variables ``x0, x1, ...`` in canonical order."""
    _, order = _canonical(Q)
    ren = {v: f"{prefix}{i}" for i, v in enumerate(order)}
    return GraphPattern(
        tuple(ren[v] for v in order),
        tuple(Q.label(v) for v in order),
        frozenset((ren[u], l, ren[v]) for u, l, v in Q.edges),
    )


# -- isomorphisms and MNI ---------------------------------------------------------

@dataclass
class IsomorphismSet:
    variables: tuple[str, ...]
    mappings: list[dict]

    @property
    def images(self) -> dict[str, set]:
        out = {v: set() for v in self.variables}
        for m in self.mappings:
            for v, n in m.items():
                out[v].add(n)
        return out

    def __len__(self):
        return len(self.mappings)


def subgraph_isomorphisms(query: GraphPattern, target, induced: bool = False) -> IsomorphismSet:
    """All injective, label- and edge-preserving maps from ``query`` into ``target``.

    ``target`` may be a :class:`PropertyGraph` or another :class:`GraphPattern`.
    With ``induced=False`` only query edges constrain the map.
    """
    maps = [dict(zip(query.variables, emb))
            for emb in iter_embeddings(query, target, injective=True, induced=induced)]
    return IsomorphismSet(query.variables, maps)


def _mni(Q: GraphPattern, target, tau: int | None = None, saturate: bool = False) -> int:
    """MNI, or a cheaper answer when only ``>= tau`` matters.

    With ``tau`` set, a value below ``tau`` is an upper bound of the true
    support.  With ``saturate`` as well, counting for a variable stops once
    it has ``tau`` images, so a value ``>= tau`` is a lower bound.
    """
    view = TargetView.of(target)
    supported = {v: set() for v in Q.variables}
    domains = base_domains(Q, view, False)
    if domains is None:
        return 0
    # smallest domains first: they bound the support and fail fastest
    best = None
    for v in sorted(Q.variables, key=lambda v: len(domains[v])):
        dom = domains[v]
        failed = 0
        for u in dom:
            if u in supported[v]:
                continue
            if saturate and tau is not None and len(supported[v]) >= tau:
                break
            if tau is not None and len(dom) - failed < tau:
                return len(dom) - failed  # upper bound, already below tau
            emb = exists_embedding(Q, view, injective=True, fixed={v: u})
            if emb is None:
                failed += 1
                continue
            for var, node in zip(Q.variables, emb):
                supported[var].add(node)
        count = len(supported[v])
        best = count if best is None else min(best, count)
        if best == 0 or (tau is not None and best < tau):
            return best
    return best or 0


def mni_support(Q: GraphPattern, g) -> int:
    """Minimum over variables of the number of distinct images under all isomorphisms."""
    return _mni(Q, g)


# -- mining -----------------------------------------------------------------------

@dataclass
class FrequentPattern:
    pattern: GraphPattern
    code: tuple
    # community id -> MNI, counted only up to the threshold
    support: dict = field(default_factory=dict)

    @property
    def mni(self) -> int:
        return max(self.support.values()) if self.support else 0


@dataclass
class FrequentPatternSet:
    patterns: list[FrequentPattern] = field(default_factory=list)

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def graph_patterns(self) -> list[GraphPattern]:
        return [p.pattern for p in self.patterns]

    @classmethod
    def merge(cls, sets: Iterable["FrequentPatternSet"]) -> "FrequentPatternSet":
        """Union by canonical code; supports from every community are kept."""
        by_code: dict = {}
        for s in sets:
            for fp in s.patterns:
                cur = by_code.get(fp.code)
                if cur is None:
                    by_code[fp.code] = FrequentPattern(fp.pattern, fp.code, dict(fp.support))
                else:
                    cur.support.update(fp.support)
        return cls([by_code[c] for c in sorted(by_code)])


def _edge_triples(g: PropertyGraph) -> Counter:
    c = Counter()
    for s, l, t in g.edges:
        if s == t:
            c[(g.label(s), l, _LOOP)] += 1
        else:
            c[(g.label(s), l, g.label(t))] += 1
    return c


def _seed(triple) -> GraphPattern:
    ls, l, lt = triple
    if lt == _LOOP:
        return GraphPattern(("x0",), (ls,), frozenset([("x0", l, "x0")]))
    return GraphPattern(("x0", "x1"), (ls, lt), frozenset([("x0", l, "x1")]))


def _extensions(P: GraphPattern, triples: Sequence[tuple], max_nodes: int):
    labels = P.labels
    vs = P.variables
    fresh = f"x{len(vs)}"
    for ls, l, lt in triples:
        if lt == _LOOP:
            for v in vs:
                if labels[v] == ls and (v, l, v) not in P.edges:
                    yield GraphPattern(vs, P.node_labels, P.edges | {(v, l, v)})
            continue
        for v in vs:
            if len(vs) < max_nodes:
                if labels[v] == ls:
                    yield GraphPattern(vs + (fresh,), P.node_labels + (lt,), P.edges | {(v, l, fresh)})
                if labels[v] == lt:
                    yield GraphPattern(vs + (fresh,), P.node_labels + (ls,), P.edges | {(fresh, l, v)})
            for w in vs:
                if w != v and labels[v] == ls and labels[w] == lt and (v, l, w) not in P.edges:
                    yield GraphPattern(vs, P.node_labels, P.edges | {(v, l, w)})


def mine_frequent_patterns(
    c: PropertyGraph,
    tau: int,
    max_pattern_nodes: int = 5,
    max_pattern_edges: int | None = None,
    community_id=0,
) -> FrequentPatternSet:
    """All connected patterns with MNI >= ``tau`` in ``c``, grown one edge at a time.

    Growth starts from frequent single-edge seeds; only frequent patterns are
    extended and only with frequent edge triples, which is sound because MNI
    never increases when an edge is added.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    view = TargetView.of(c)
    found: dict = {}
    triples = []
    level = []
    for triple in sorted(_edge_triples(c)):
        if max_pattern_nodes < 2 and triple[2] != _LOOP:
            continue
        P = canonical_pattern(_seed(triple))
        s = _mni(P, view, tau, saturate=True)
        if s >= tau:
            triples.append(triple)
            code = canonical_code(P)
            found[code] = FrequentPattern(P, code, {community_id: s})
            level.append(P)
    seen = set(found)
    n_edges = 1
    while level and (max_pattern_edges is None or n_edges < max_pattern_edges):
        nxt = []
        for P in level:
            for ext in _extensions(P, triples, max_pattern_nodes):
                code = canonical_code(ext)
                if code in seen:
                    continue
                seen.add(code)
                s = _mni(ext, view, tau, saturate=True)
                if s >= tau:
                    cp = canonical_pattern(ext)
                    found[code] = FrequentPattern(cp, code, {community_id: s})
                    nxt.append(cp)
        level = nxt
        n_edges += 1
    return FrequentPatternSet([found[k] for k in sorted(found)])


def reduce_patterns(Q_all) -> list[GraphPattern]:
    """Drop every pattern that embeds (non-induced, injectively) into a larger kept one.

    Patterns are visited by descending edge count, then descending node
    count, then canonical code.
    """
    if isinstance(Q_all, FrequentPatternSet):
        pats = Q_all.graph_patterns()
    else:
        pats = list(Q_all)
    keyed = sorted(((-p.size_edges, -p.size_nodes, canonical_code(p)), i, p) for i, p in enumerate(pats))
    ordered = [p for _, _, p in keyed]
    n = len(ordered)
    tagged = [False] * n
    kept = []
    for i in range(n):
        if tagged[i]:
            continue
        for j in range(i + 1, n):
            if not tagged[j] and exists_embedding(ordered[j], ordered[i], injective=True) is not None:
                tagged[j] = True
        kept.append(ordered[i])
    return kept
