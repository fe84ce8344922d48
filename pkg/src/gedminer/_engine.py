"""Backtracking pattern-embedding engine shared by the matcher and the miner.

Candidates for the next variable are obtained by intersecting the adjacency
sets of all of its already-bound pattern neighbours (the worst-case-optimal
join style of evaluation), never by joining edge relations pairwise.
"""

from __future__ import annotations

from typing import Iterator, Mapping

from .graph import WILDCARD, GraphPattern, PropertyGraph

_EMPTY: frozenset = frozenset()


class TargetView:
    """Uniform read-only adjacency access over a graph or a pattern."""

    def __init__(self, labels: Mapping, out_adj: Mapping, in_adj: Mapping):
        self.labels = labels
        self._out = out_adj
        self._in = in_adj
        self._out_all: dict = {}
        self._in_all: dict = {}
        by_label: dict = {}
        for n, lab in labels.items():
            by_label.setdefault(lab, set()).add(n)
        self._by_label = {k: frozenset(v) for k, v in by_label.items()}
        self._all = frozenset(labels)
        self._pair: dict | None = None
        self._domains: dict = {}
        self._plans: dict = {}
        self._has_out = self._index_by_edge_label(out_adj)
        self._has_in = self._index_by_edge_label(in_adj)

    @staticmethod
    def _index_by_edge_label(adj: Mapping) -> dict:
        idx: dict = {}
        for n, d in adj.items():
            for l, ts in d.items():
                if ts:
                    idx.setdefault(l, set()).add(n)
        every = set().union(*idx.values()) if idx else set()
        out = {l: frozenset(v) for l, v in idx.items()}
        out[None] = frozenset(every)
        return out

    def _having(self, idx: dict, label: str, exact: bool) -> frozenset:
        if exact:
            return idx.get(label, _EMPTY)
        if label == WILDCARD:
            return idx[None]
        return idx.get(label, _EMPTY) | idx.get(WILDCARD, _EMPTY)

    def with_out(self, label: str, exact: bool = False) -> frozenset:
        """Nodes with at least one outgoing edge matching ``label``."""
        return self._having(self._has_out, label, exact)

    def with_in(self, label: str, exact: bool = False) -> frozenset:
        return self._having(self._has_in, label, exact)

    @classmethod
    def of(cls, target) -> "TargetView":
        if isinstance(target, TargetView):
            return target
        if isinstance(target, PropertyGraph):
            cached = getattr(target, "_view", None)
            if cached is None:
                cached = cls({n: r.label for n, r in target.nodes.items()}, target.out_adj, target.in_adj)
                target._view = cached
            return cached
        if isinstance(target, GraphPattern):
            out: dict = {}
            inn: dict = {}
            for u, l, v in target.edges:
                out.setdefault(u, {}).setdefault(l, set()).add(v)
                inn.setdefault(v, {}).setdefault(l, set()).add(u)
            return cls(dict(zip(target.variables, target.node_labels)), out, inn)
        raise TypeError(f"cannot match against {type(target).__name__}")

    def __len__(self):
        return len(self._all)

    def nodes_with_label(self, label: str, exact: bool = False) -> frozenset:
        if exact:
            return self._by_label.get(label, _EMPTY)
        if label == WILDCARD:
            return self._all
        return self._by_label.get(label, _EMPTY) | self._by_label.get(WILDCARD, _EMPTY)

    def _nbrs(self, adj, cache, n, label, exact):
        d = adj.get(n)
        if not d:
            return _EMPTY
        if exact:
            return d.get(label, _EMPTY)
        if label == WILDCARD:
            s = cache.get(n)
            if s is None:
                s = frozenset().union(*d.values())
                cache[n] = s
            return s
        a = d.get(label, _EMPTY)
        b = d.get(WILDCARD, _EMPTY)
        return a | b if b else a

    def out(self, n, label, exact=False):
        return self._nbrs(self._out, self._out_all, n, label, exact)

    def inn(self, n, label, exact=False):
        return self._nbrs(self._in, self._in_all, n, label, exact)

    def labels_between(self, a, b) -> set:
        if self._pair is None:
            pair: dict = {}
            for s, d in self._out.items():
                for l, ts in d.items():
                    for t in ts:
                        pair.setdefault((s, t), set()).add(l)
            self._pair = pair
        return self._pair.get((a, b), set())


def _lmatch(a, b, exact):
    return a == b if exact else (a == b or a == WILDCARD or b == WILDCARD)


class _Plan:
    __slots__ = ("order", "checks", "loops", "domains")


_CACHE_LIMIT = 512


def _remember(cache: dict, key, value):
    if len(cache) >= _CACHE_LIMIT:
        cache.clear()
    cache[key] = value
    return value


def base_domains(Q: GraphPattern, view: TargetView, exact: bool) -> dict | None:
    """Candidates per variable after label, degree and arc-consistency filtering.

    A node survives for ``u`` only if, for every pattern edge at ``u``, it
    has a neighbour in the other end's domain.  Every embedding (injective
    or not) maps into these domains.  Results are cached on the view.
    """
    key = (Q, exact)
    if key in view._domains:
        return view._domains[key]
    out_labels: dict = {v: set() for v in Q.variables}
    in_labels: dict = {v: set() for v in Q.variables}
    for u, l, v in Q.edges:
        out_labels[u].add(l)
        in_labels[v].add(l)
    domains: dict = {}
    for var, lab in zip(Q.variables, Q.node_labels):
        dom = view.nodes_with_label(lab, exact)
        for l in out_labels[var]:
            dom = dom & view.with_out(l, exact)
        for l in in_labels[var]:
            dom = dom & view.with_in(l, exact)
        if not dom:
            return _remember(view._domains, key, None)
        domains[var] = dom
    for u, l, v in Q.edges:
        if u == v:
            domains[u] = frozenset(n for n in domains[u] if n in view.out(n, l, exact))
            if not domains[u]:
                return _remember(view._domains, key, None)
    arcs = [(u, l, v) for u, l, v in Q.edges if u != v]
    changed = True
    while changed:
        changed = False
        for u, l, v in arcs:
            # sources with an l-edge into dom[v], targets with an l-edge from dom[u]
            src = set()
            for m in domains[v]:
                src.update(view.inn(m, l, exact))
            du = domains[u] & src
            if len(du) < len(domains[u]):
                domains[u] = du
                changed = True
            dst = set()
            for m in domains[u]:
                dst.update(view.out(m, l, exact))
            dv = domains[v] & dst
            if len(dv) < len(domains[v]):
                domains[v] = dv
                changed = True
            if not domains[u] or not domains[v]:
                return _remember(view._domains, key, None)
    return _remember(view._domains, key, domains)


def _template(Q: GraphPattern, view: TargetView, exact: bool, fixed_vars: frozenset):
    """Variable order and per-step edge checks; fixed variables count as size 1."""
    key = (Q, exact, fixed_vars)
    if key in view._plans:
        return view._plans[key]
    base = base_domains(Q, view, exact)
    if base is None:
        return _remember(view._plans, key, None)
    nbrs: dict = {v: set() for v in Q.variables}
    for u, l, v in Q.edges:
        if u != v:
            nbrs[u].add(v)
            nbrs[v].add(u)
    size = {v: 1 if v in fixed_vars else len(base[v]) for v in Q.variables}
    rank = {v: i for i, v in enumerate(Q.variables)}
    order = [min(Q.variables, key=lambda v: (size[v], rank[v]))]
    placed = {order[0]}
    while len(order) < len(Q.variables):
        frontier = [v for v in Q.variables if v not in placed and nbrs[v] & placed]
        nxt = min(frontier, key=lambda v: (size[v], rank[v]))
        order.append(nxt)
        placed.add(nxt)

    pos = {v: i for i, v in enumerate(order)}
    checks = []
    loops = []
    for var in order:
        c = []
        for u, l, v in Q.edges:
            if u == v:
                continue
            if v == var and pos[u] < pos[var]:
                c.append((pos[u], l, True))   # candidates among out-neighbours of h(u)
            elif u == var and pos[v] < pos[var]:
                c.append((pos[v], l, False))  # candidates among in-neighbours of h(v)
        checks.append(c)
        loops.append([l for u, l, v in Q.edges if u == v == var])
    plan = _Plan()
    plan.order = order
    plan.checks = checks
    plan.loops = loops
    plan.domains = [base[v] for v in order]
    return _remember(view._plans, key, plan)


def _plan(Q: GraphPattern, view: TargetView, exact: bool, fixed: Mapping | None) -> _Plan | None:
    if not fixed:
        return _template(Q, view, exact, frozenset())
    t = _template(Q, view, exact, frozenset(fixed))
    if t is None:
        return None
    domains = list(t.domains)
    for i, var in enumerate(t.order):
        if var in fixed:
            n = fixed[var]
            if n not in domains[i]:
                return None
            domains[i] = (n,)
    plan = _Plan()
    plan.order, plan.checks, plan.loops, plan.domains = t.order, t.checks, t.loops, domains
    return plan


def iter_embeddings(
    Q: GraphPattern,
    target,
    *,
    injective: bool = False,
    induced: bool = False,
    exact_labels: bool = False,
    fixed: Mapping | None = None,
) -> Iterator[tuple]:
    """Yield node tuples (in ``Q.variables`` order) for every embedding of ``Q``.

    ``injective=False`` gives homomorphisms; ``injective=True`` gives
    subgraph isomorphisms, and ``induced=True`` additionally requires every
    target edge between images to be covered by a pattern edge.
    """
    view = TargetView.of(target)
    plan = _plan(Q, view, exact_labels, fixed)
    if plan is None:
        return
    order = plan.order
    k = len(order)
    var_index = [Q.variables.index(v) for v in order]
    bound: list = [None] * k
    used: set = set()

    pair_labels = None
    if induced:
        pair_labels = {}
        for u, l, v in Q.edges:
            pair_labels.setdefault((u, v), []).append(l)

    def induced_ok(i, node):
        vi = order[i]
        for j in range(i + 1):
            vj = order[j]
            nj = node if j == i else bound[j]
            for a, b, pa, pb in ((node, nj, vi, vj), (nj, node, vj, vi)):
                tl = view.labels_between(a, b)
                if not tl:
                    continue
                pl = pair_labels.get((pa, pb), ())
                for t in tl:
                    if not any(_lmatch(p, t, exact_labels) for p in pl):
                        return False
                if j == i:
                    break
        return True

    def rec(i):
        if i == k:
            out = [None] * k
            for p, vi in enumerate(var_index):
                out[vi] = bound[p]
            yield tuple(out)
            return
        dom = plan.domains[i]
        c = plan.checks[i]
        if c:
            sets = []
            for j, l, is_out in c:
                s = view.out(bound[j], l, exact_labels) if is_out else view.inn(bound[j], l, exact_labels)
                if not s:
                    return
                sets.append(s)
            sets.sort(key=len)
            cand = sets[0]
            for s in sets[1:]:
                cand = cand & s
                if not cand:
                    return
            cand = [n for n in cand if n in dom]
        else:
            cand = dom
        loops = plan.loops[i]
        for node in cand:
            if injective and node in used:
                continue
            if loops and not all(node in view.out(node, l, exact_labels) for l in loops):
                continue
            if induced and not induced_ok(i, node):
                continue
            bound[i] = node
            if injective:
                used.add(node)
            yield from rec(i + 1)
            if injective:
                used.discard(node)
        bound[i] = None

    yield from rec(0)


def exists_embedding(Q: GraphPattern, target, **kw) -> tuple | None:
    for emb in iter_embeddings(Q, target, **kw):
        return emb
    return None


def automorphisms(Q: GraphPattern) -> list[tuple[int, ...]]:
    """Index permutations ``p`` with ``Q.variables[i] -> Q.variables[p[i]]`` preserving labels exactly."""
    idx = {v: i for i, v in enumerate(Q.variables)}
    perms = []
    for emb in iter_embeddings(Q, Q, injective=True, exact_labels=True):
        perms.append(tuple(idx[v] for v in emb))
    return sorted(perms)
