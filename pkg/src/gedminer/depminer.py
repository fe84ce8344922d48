"""Level-wise search for minimal dependencies over a pattern's match table.

A literal set ``X`` partitions the match rows: rows that satisfy every
literal of ``X`` are grouped by the values the literals take, and rows that
fail ``X`` belong to no block.  ``X -> Y`` holds exactly when adding ``Y``
leaves that partition unchanged.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .graph import ID_ATTRIBUTE, GraphPattern, PropertyGraph
from .matcher import Match, MatchTable, find_matches

MODES = ("ged", "gfd", "gkey")
SEMANTICS = ("value", "satisfaction")


class SchemaError(KeyError):
    pass


@dataclass(frozen=True, order=True)
class Literal:
    """``x.A = c`` (constant), ``x.A = y.B`` (variable) or ``x.id = y.id`` (id).

    Variable and id literals are stored with their operands sorted, so both
    spellings of the same equality are one literal.
    """

    kind: str
    var: str
    attr: str
    var2: str = ""
    attr2: str = ""
    value: str = ""

    @classmethod
    def constant(cls, var: str, attr: str, value) -> "Literal":
        if attr == ID_ATTRIBUTE:
            raise ValueError("constant literals cannot use the id attribute")
        return cls("constant", var, attr, value=str(value))

    @classmethod
    def variable(cls, x: str, a: str, y: str, b: str) -> "Literal":
        if ID_ATTRIBUTE in (a, b):
            raise ValueError("variable literals cannot use the id attribute")
        (x, a), (y, b) = sorted([(x, a), (y, b)])
        return cls("variable", x, a, y, b)

    @classmethod
    def id(cls, x: str, y: str) -> "Literal":
        x, y = sorted((x, y))
        return cls("id", x, ID_ATTRIBUTE, y, ID_ATTRIBUTE)

    @property
    def touches(self) -> tuple[tuple[str, str], ...]:
        if self.kind == "constant":
            return ((self.var, self.attr),)
        return ((self.var, self.attr), (self.var2, self.attr2))

    def __str__(self):
        if self.kind == "constant":
            return f"{self.var}.{self.attr}={self.value}"
        return f"{self.var}.{self.attr}={self.var2}.{self.attr2}"

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "var": self.var, "attr": self.attr, "value": self.value}
        if self.kind == "variable":
            return {"kind": "variable", "var": self.var, "attr": self.attr,
                    "var2": self.var2, "attr2": self.attr2}
        return {"kind": "id", "var": self.var, "var2": self.var2}

    @classmethod
    def from_dict(cls, d: dict) -> "Literal":
        kind = d["kind"]
        if kind == "constant":
            return cls.constant(d["var"], d["attr"], d["value"])
        if kind == "variable":
            return cls.variable(d["var"], d["attr"], d["var2"], d["attr2"])
        if kind == "id":
            return cls.id(d["var"], d["var2"])
        raise ValueError(f"unknown literal kind {kind!r}")

    def holds(self, nodes: dict) -> bool:
        """Evaluate on ``{variable: NodeRecord}``; missing attributes never satisfy."""
        if self.kind == "id":
            return nodes[self.var].id == nodes[self.var2].id
        a = nodes[self.var].get(self.attr)
        if a is None:
            return False
        if self.kind == "constant":
            return str(a) == self.value
        b = nodes[self.var2].get(self.attr2)
        return b is not None and str(a) == str(b)


def _key(literals: Iterable[Literal]) -> tuple:
    return tuple(sorted(literals))


def permissible(literals: Iterable[Literal]) -> bool:
    """No two literals constrain the same ``x.A``."""
    seen = set()
    for w in literals:
        for t in w.touches:
            if t in seen:
                return False
            seen.add(t)
    return True


def is_trivial(lhs: Iterable[Literal], rhs: Iterable[Literal]) -> bool:
    """True when every RHS literal follows from the LHS by equality closure."""
    parent: dict = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def sides(w: Literal):
        left = ("term", w.var, w.attr)
        right = ("const", w.value) if w.kind == "constant" else ("term", w.var2, w.attr2)
        return left, right

    for w in lhs:
        a, b = sides(w)
        parent[find(a)] = find(b)
    return all(find(a) == find(b) for a, b in map(sides, rhs))


# -- partitions ---------------------------------------------------------------------

class Partition:
    """Blocks over row ids, stored as satisfied rows plus a block label per row.

    Rows absent from ``rows`` satisfy no block (stripped representation keeps
    singleton blocks; only non-satisfying rows are dropped).
    """

    __slots__ = ("rows", "labels", "n_blocks", "n_total", "_canon")

    def __init__(self, rows: np.ndarray, raw_labels: np.ndarray, n_total: int, n_blocks: int | None = None):
        self.rows = rows
        if n_blocks is None:
            if len(raw_labels):
                uniq, inv = np.unique(raw_labels, return_inverse=True)
                raw_labels = inv.astype(np.int64)
                n_blocks = len(uniq)
            else:
                n_blocks = 0
        self.labels = raw_labels
        self.n_blocks = n_blocks
        self.n_total = n_total
        self._canon = None

    @classmethod
    def full(cls, n_rows: int) -> "Partition":
        return cls(np.arange(n_rows, dtype=np.int64), np.zeros(n_rows, dtype=np.int64), n_rows,
                   1 if n_rows else 0)

    @property
    def support(self) -> int:
        return len(self.rows)

    def __len__(self):
        return self.n_blocks

    @property
    def is_empty(self) -> bool:
        return self.n_blocks == 0

    @property
    def blocks(self) -> frozenset:
        groups = defaultdict(set)
        for r, l in zip(self.rows.tolist(), self.labels.tolist()):
            groups[l].add(r)
        return frozenset(frozenset(g) for g in groups.values())

    def intersect(self, other: "Partition") -> "Partition":
        common, i1, i2 = np.intersect1d(self.rows, other.rows, assume_unique=True, return_indices=True)
        if not len(common):
            return Partition(common.astype(np.int64), np.zeros(0, dtype=np.int64), self.n_total, 0)
        if self.n_blocks == 1:
            return Partition(common, other.labels[i2], self.n_total)
        if other.n_blocks == 1:
            return Partition(common, self.labels[i1], self.n_total)
        raw = self.labels[i1] * other.n_blocks + other.labels[i2]
        return Partition(common, raw, self.n_total)

    def _canonical(self):
        if self._canon is None:
            if len(self.labels):
                _, first = np.unique(self.labels, return_index=True)
                rank = np.empty(len(first), dtype=np.int64)
                rank[np.argsort(first, kind="stable")] = np.arange(len(first))
                self._canon = rank[self.labels]
            else:
                self._canon = self.labels
        return self._canon

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (self.n_blocks == other.n_blocks and np.array_equal(self.rows, other.rows)
                and np.array_equal(self._canonical(), other._canonical()))

    def __hash__(self):
        return hash((self.n_blocks, self.rows.tobytes()))

    def __repr__(self):
        return f"Partition(blocks={self.n_blocks}, support={self.support}/{self.n_total})"


def literal_partition(w: Literal, T: MatchTable, semantics: str = "value") -> Partition:
    codes, vocab = T.encoded()
    n = T.n_rows
    try:
        i = T.column_index(w.var, w.attr)
        j = T.column_index(w.var2, w.attr2) if w.kind != "constant" else None
    except KeyError as exc:
        raise SchemaError(str(exc)) from None
    col = codes[:, i]
    if w.kind == "constant":
        c = vocab.get((False, w.value))
        if c is None:
            return Partition(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), n, 0)
        rows = np.flatnonzero(col == c)
        return Partition(rows, np.zeros(len(rows), dtype=np.int64), n, 1 if len(rows) else 0)
    other = codes[:, j]
    rows = np.flatnonzero((col >= 0) & (col == other))
    if semantics == "satisfaction":
        return Partition(rows, np.zeros(len(rows), dtype=np.int64), n, 1 if len(rows) else 0)
    return Partition(rows, col[rows], n)


def partition_of(X: Iterable[Literal], T: MatchTable, semantics: str = "value") -> Partition:
    """``pi(X)``: intersection of the single-literal partitions; ``pi({})`` is one block."""
    p = Partition.full(T.n_rows)
    for w in sorted(X):
        p = p.intersect(literal_partition(w, T, semantics))
    return p


# -- lattice ---------------------------------------------------------------------------

@dataclass(eq=False)
class LatticeNode:
    literals: frozenset
    partition: Partition
    pruned: bool = False

    @property
    def level(self) -> int:
        return len(self.literals)

    @property
    def key(self) -> tuple:
        return _key(self.literals)

    def by_variable(self) -> dict[str, list[Literal]]:
        out = defaultdict(list)
        for w in sorted(self.literals):
            out[w.var].append(w)
        return dict(out)

    def __repr__(self):
        lits = ", ".join(map(str, sorted(self.literals)))
        return f"LatticeNode({{{lits}}}, {self.partition!r})"


@dataclass(frozen=True)
class GedStats:
    support: int       # rows in pi(X u Y)
    matches: int       # |H|
    k: int             # distinct variable attributes used by X u Y
    n_attributes: int  # N: (variable, attribute) columns of the match table


@dataclass(frozen=True)
class Ged:
    pattern: GraphPattern
    lhs: frozenset
    rhs: frozenset
    stats: GedStats | None = None
    rank: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lhs", frozenset(self.lhs))
        object.__setattr__(self, "rhs", frozenset(self.rhs))
        if not self.rhs:
            raise ValueError("a dependency needs a non-empty right-hand side")
        if self.lhs & self.rhs:
            raise ValueError("left- and right-hand sides overlap")

    @property
    def n_literals(self) -> int:
        return len(self.lhs) + len(self.rhs)

    def literals(self) -> frozenset:
        return self.lhs | self.rhs

    def __str__(self):
        lhs = ", ".join(map(str, sorted(self.lhs))) or "∅"
        rhs = ", ".join(map(str, sorted(self.rhs)))
        return f"({self.pattern}, {lhs} -> {rhs})"


def _distinct_attributes(literals: Iterable[Literal]) -> int:
    return len({t for w in literals for t in w.touches})


def top_constants(T: MatchTable, col: int, k: int) -> list[str]:
    """The ``k`` most frequent values of a column; ties go to the smaller value."""
    codes, vocab = T.encoded()
    c = codes[:, col]
    c = c[c >= 0]
    if not len(c) or k <= 0:
        return []
    uniq, counts = np.unique(c, return_counts=True)
    inverse = {code: key[1] for key, code in vocab.items()}
    ranked = sorted(zip(counts.tolist(), uniq.tolist()), key=lambda t: (-t[0], inverse[t[1]]))
    return [inverse[code] for _, code in ranked[:k]]


def candidate_literals(Q: GraphPattern, T: MatchTable, top_k_constants: int = 5, mode: str = "ged") -> list[Literal]:
    """Constant, variable and id literals considered for the first lattice level."""
    out = []
    for j, (v, a) in enumerate(T.columns):
        if a == ID_ATTRIBUTE:
            continue
        out.extend(Literal.constant(v, a, c) for c in top_constants(T, j, top_k_constants))
    vs = [v for v in Q.variables]
    attrs = defaultdict(list)
    for v, a in T.attribute_columns:
        attrs[v].append(a)
    for i, x in enumerate(vs):
        for y in vs[i + 1:]:
            if not T.pair_allowed(x, y):
                continue
            for a in attrs[x]:
                for b in attrs[y]:
                    out.append(Literal.variable(x, a, y, b))
            if mode != "gfd":
                out.append(Literal.id(x, y))
    return sorted(set(out))


def generate_level1(Q: GraphPattern, T: MatchTable, top_k_constants: int = 5, mode: str = "ged",
                    semantics: str = "value") -> list[LatticeNode]:
    """Single-literal nodes whose partition is non-empty."""
    nodes = []
    for w in candidate_literals(Q, T, top_k_constants, mode):
        p = literal_partition(w, T, semantics)
        if not p.is_empty:
            nodes.append(LatticeNode(frozenset([w]), p))
    return nodes


def generate_next_level(level_nodes: Sequence[LatticeNode], i: int) -> list[LatticeNode]:
    """Permissible unions of node pairs from level ``i``.

    Any permissible union ``X`` of size ``i + 1`` with a non-empty
    partition has every ``i``-subset permissible and non-empty too, so it
    is produced by the two subsets that share its first ``i - 1`` literals.
    Joining only on that common prefix therefore yields the same set as
    trying all pairs, once per ``X``.
    """
    by_prefix = defaultdict(list)
    present = set()
    for n in level_nodes:
        if n.level != i:
            raise ValueError(f"node {n!r} is not on level {i}")
        k = n.key
        present.add(k)
        by_prefix[k[:-1]].append((k[-1], n))
    out = []
    for prefix, members in by_prefix.items():
        if len(members) < 2:
            continue
        members.sort(key=lambda t: t[0])
        for (a, n1), (b, n2) in combinations(members, 2):
            ta, tb = a.touches, b.touches
            if any(t in tb for t in ta):
                continue
            X = prefix + (a, b)
            # every i-subset must be on the level, or the union is empty/impermissible
            if i > 1 and any(X[:j] + X[j + 1:] not in present for j in range(i - 1)):
                continue
            p = n1.partition.intersect(n2.partition)
            if p.is_empty:
                continue
            out.append(LatticeNode(frozenset(X), p))
    out.sort(key=lambda n: n.key)
    return out


def _ged(Q, lhs, rhs, p: Partition, n_attributes: int) -> Ged:
    return Ged(Q, lhs, rhs, GedStats(p.support, p.n_total, _distinct_attributes(lhs | rhs), n_attributes))


def validate_dependencies(lhs_nodes: Sequence[LatticeNode], rhs_nodes: Sequence[LatticeNode], Q: GraphPattern,
                          n_attributes: int = 0) -> list[Ged]:
    """Emit ``X -> Y \\ X`` for every ``X`` in ``lhs_nodes`` and ``Y`` in ``rhs_nodes``
    with ``X`` a proper subset of ``Y`` and equal partitions.

    Every RHS node that yields a dependency is flagged ``pruned``; pruned
    nodes are never used as a left-hand side afterwards.
    """
    by_key = {n.literals: n for n in lhs_nodes}
    out = []
    for nj in rhs_nodes:
        pj = nj.partition
        for w in sorted(nj.literals):
            ni = by_key.get(nj.literals - {w})
            if ni is None:
                continue
            pi = ni.partition
            # pj refines pi on a subset of its rows: equal iff same rows and block count
            if pi.support == pj.support and pi.n_blocks == pj.n_blocks:
                out.append(_ged(Q, ni.literals, frozenset([w]), pj, n_attributes))
                nj.pruned = True
    return out


@dataclass
class MiningTrace:
    level_sizes: list[int] = field(default_factory=list)
    candidates: int = 0
    valid: int = 0


def mine_dependencies(
    Q: GraphPattern,
    T: MatchTable,
    *,
    max_lhs_size: int = 3,
    top_k_constants: int = 5,
    mode: str = "ged",
    semantics: str = "value",
    prune: bool = True,
    trace: MiningTrace | None = None,
) -> list[Ged]:
    """All minimal dependencies over ``Q``'s match table.

    Levels run up to ``N - 1`` (``N`` = number of table columns) and at
    most ``max_lhs_size + 1``.  With ``prune=False`` a node that produced
    a dependency stays usable as a left-hand side, so non-minimal rules
    are emitted too.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if semantics not in SEMANTICS:
        raise ValueError(f"semantics must be one of {SEMANTICS}")
    n_attr = len(T.columns)
    if n_attr < 1 or T.n_rows == 0:
        return []
    root = LatticeNode(frozenset(), Partition.full(T.n_rows))
    level = generate_level1(Q, T, top_k_constants, mode, semantics)
    if trace is not None:
        trace.level_sizes = [1, len(level)]
        trace.candidates += len(level)

    found: list[Ged] = []
    valid_pairs: set = set()
    blocked: set = set()  # X u {w} for every valid X -> w

    def eligible(n: LatticeNode) -> bool:
        if not prune:
            return True
        lits = sorted(n.literals)
        for r in range(1, len(lits) + 1):
            for sub in combinations(lits, r):
                if frozenset(sub) in blocked:
                    return False
        return True

    def minimal(g: Ged) -> bool:
        (w,) = g.rhs
        lits = sorted(g.lhs)
        for r in range(len(lits)):
            for sub in combinations(lits, r):
                if (frozenset(sub), w) in valid_pairs:
                    return False
        return True

    def absorb(geds):
        for g in geds:
            (w,) = g.rhs
            if prune and not minimal(g):
                continue
            if is_trivial(g.lhs, g.rhs):
                continue
            valid_pairs.add((g.lhs, w))
            found.append(g)
        for g in geds:
            blocked.add(g.lhs | g.rhs)

    absorb(validate_dependencies([root], level, Q, n_attr))
    i = 2
    top = min(n_attr - 1, max_lhs_size + 1)
    while i <= top and len(level) > 1:
        nxt = generate_next_level(level, i - 1)
        if trace is not None:
            trace.level_sizes.append(len(nxt))
            trace.candidates += len(nxt)
        lhs = [n for n in level if eligible(n)]
        absorb(validate_dependencies(lhs, nxt, Q, n_attr))
        level = nxt
        i += 1

    if mode == "gkey":
        found = [g for g in found if all(w.kind == "id" for w in g.rhs)]
    if trace is not None:
        trace.valid = len(found)
    return sorted(found, key=lambda g: (len(g.lhs), _key(g.lhs), _key(g.rhs)))


def holds_on_table(phi: Ged, T: MatchTable) -> bool:
    """Every row satisfying the LHS also satisfies the RHS."""
    lhs = partition_of(phi.lhs, T, "satisfaction")
    return lhs.support == lhs.intersect(partition_of(phi.rhs, T, "satisfaction")).support


def check_satisfaction(phi: Ged, G: PropertyGraph, *, isomorphic: bool = False,
                       matches: Sequence[Match] | None = None) -> tuple[bool, list[Match]]:
    """Matches of ``phi.pattern`` that satisfy the LHS but not the RHS."""
    if matches is None:
        matches = find_matches(phi.pattern, G, isomorphic=isomorphic, orbit_dedup=False)
    violations = []
    for m in matches:
        nodes = {v: G.node(n) for v, n in zip(m.variables, m.nodes)}
        if all(w.holds(nodes) for w in phi.lhs) and not all(w.holds(nodes) for w in phi.rhs):
            violations.append(m)
    return not violations, violations
