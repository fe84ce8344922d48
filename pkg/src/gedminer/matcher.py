"""Homomorphic matching of patterns and the pseudo-relation built from matches."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from ._engine import automorphisms, iter_embeddings
from .graph import ID_ATTRIBUTE, GraphPattern, PropertyGraph, filter_graph


class _Absent:
    """Cell marker for a missing attribute; equal to nothing but itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABSENT"

    def __reduce__(self):
        return (_Absent, ())


ABSENT = _Absent()


@dataclass(frozen=True, order=True)
class Match:
    """One match ``h(u)``: the node bound to each pattern variable."""

    variables: tuple[str, ...]
    nodes: tuple

    def __getitem__(self, var: str):
        return self.nodes[self.variables.index(var)]

    def as_dict(self) -> dict[str, Hashable]:
        return dict(zip(self.variables, self.nodes))


def _sort_key(t):
    try:
        return (0, tuple(t))
    except TypeError:
        return (1, tuple(map(str, t)))


def canonical_orbit_representatives(Q: GraphPattern, tuples: Iterable[tuple]) -> list[tuple]:
    """Keep one binding per orbit of ``Q``'s automorphism group.

    The kept binding is the lexicographically smallest permutation
    of the orbit; this matches listing symmetric matches as unordered sets.
    """
    perms = [p for p in automorphisms(Q) if p != tuple(range(len(Q.variables)))]
    tuples = list(tuples)
    if not perms:
        return tuples
    seen = set(tuples)
    out = []
    for t in tuples:
        keep = True
        for p in perms:
            # binding t composed with the automorphism p
            image = tuple(t[p[i]] for i in range(len(t)))
            if image in seen and _sort_key(image) < _sort_key(t):
                keep = False
                break
        if keep:
            out.append(t)
    return out


def find_matches(
    Q: GraphPattern,
    G: PropertyGraph,
    *,
    isomorphic: bool = False,
    orbit_dedup: bool = True,
    prefilter: bool = True,
) -> list[Match]:
    """All homomorphic (or, with ``isomorphic=True``, injective) matches of ``Q`` in ``G``.

    Output is sorted by the bound node tuple.
    """
    target = filter_graph(G, Q) if prefilter else G
    tuples = list(iter_embeddings(Q, target, injective=isomorphic))
    if orbit_dedup:
        tuples = canonical_orbit_representatives(Q, tuples)
    tuples.sort(key=_sort_key)
    return [Match(Q.variables, t) for t in tuples]


def homomorphic_matches(Q: GraphPattern, G: PropertyGraph, *, orbit_dedup: bool = True) -> list[Match]:
    return find_matches(Q, G, orbit_dedup=orbit_dedup)


def isomorphic_matches(Q: GraphPattern, G: PropertyGraph, *, orbit_dedup: bool = True) -> list[Match]:
    return find_matches(Q, G, isomorphic=True, orbit_dedup=orbit_dedup)


# -- pseudo-relation -----------------------------------------------------------

@dataclass
class MatchTable:
    """Pseudo-relation over the matches of one pattern.

    ``columns`` lists ``(variable, attribute)`` pairs; the ``(x, "id")``
    column of every variable comes first.  ``rows[i][j]`` is the constant of
    column ``j`` in match ``i`` or :data:`ABSENT`.
    """

    pattern: GraphPattern
    columns: list[tuple[str, str]]
    rows: list[tuple]
    matches: list[Match] = field(default_factory=list)
    allowed_pairs: frozenset | None = None
    _encoded: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_index(self, var: str, attr: str) -> int:
        try:
            return self.columns.index((var, attr))
        except ValueError:
            raise KeyError(f"no column {var}.{attr}") from None

    @property
    def attribute_columns(self) -> list[tuple[str, str]]:
        return [c for c in self.columns if c[1] != ID_ATTRIBUTE]

    def pair_allowed(self, x: str, y: str) -> bool:
        if self.allowed_pairs is None:
            return True
        return frozenset((x, y)) in self.allowed_pairs

    def encoded(self) -> tuple[np.ndarray, dict]:
        """Integer-code every cell; ``-1`` marks an absent value.

        All columns share one code space so that equal constants in
        different columns get equal codes.
        """
        if self._encoded is None:
            n, m = len(self.rows), len(self.columns)
            codes = np.full((n, m), -1, dtype=np.int64)
            vocab: dict = {}
            for j in range(m):
                col = codes[:, j]
                for i, row in enumerate(self.rows):
                    v = row[j]
                    if v is ABSENT:
                        continue
                    key = (True, repr(v)) if self.columns[j][1] == ID_ATTRIBUTE else (False, str(v))
                    c = vocab.get(key)
                    if c is None:
                        c = vocab[key] = len(vocab)
                    col[i] = c
            self._encoded = (codes, vocab)
        return self._encoded

    def code_of(self, value) -> int:
        _, vocab = self.encoded()
        return vocab.get((False, str(value)), -2)

    def to_records(self) -> list[dict]:
        names = [f"{v}.{a}" for v, a in self.columns]
        return [
            {k: (None if c is ABSENT else c) for k, c in zip(names, row)}
            for row in self.rows
        ]

    @classmethod
    def from_rows(cls, pattern: GraphPattern, columns: Sequence[tuple[str, str]], rows: Sequence[Sequence],
                  allowed_pairs=None) -> "MatchTable":
        """Build a table directly (no graph); ``None`` cells become absent."""
        rows = [tuple(ABSENT if c is None else c for c in r) for r in rows]
        pairs = None if allowed_pairs is None else frozenset(frozenset(p) for p in allowed_pairs)
        return cls(pattern, list(columns), rows, [], pairs)


def build_pseudo_relation(
    Q: GraphPattern,
    matches: Sequence[Match],
    G: PropertyGraph,
    attribute_selection: Mapping[str, Iterable[str]] | None = None,
    allowed_pairs: Iterable[tuple[str, str]] | None = None,
) -> MatchTable:
    """One row per match; id column per variable plus the observed attributes."""
    observed: dict[str, set] = {v: set() for v in Q.variables}
    for m in matches:
        for v, n in zip(m.variables, m.nodes):
            observed[v].update(a for a, _ in G.node(n).attributes)
    if attribute_selection is not None:
        for v in Q.variables:
            if v in attribute_selection:
                observed[v] &= set(attribute_selection[v])
    columns = [(v, ID_ATTRIBUTE) for v in Q.variables]
    for v in Q.variables:
        columns.extend((v, a) for a in sorted(observed[v]))
    pos = {v: i for i, v in enumerate(Q.variables)}
    rows = []
    for m in matches:
        attrs = [G.node(n).attribute_dict for n in m.nodes]
        row = []
        for v, a in columns:
            if a == ID_ATTRIBUTE:
                row.append(m.nodes[pos[v]])
            else:
                row.append(attrs[pos[v]].get(a, ABSENT))
        rows.append(tuple(row))
    pairs = None if allowed_pairs is None else frozenset(frozenset(p) for p in allowed_pairs)
    return MatchTable(Q, columns, rows, list(matches), pairs)


# -- preprocessing config -------------------------------------------------------

@dataclass
class Preprocessing:
    """Meta-data restricting attributes per node label and literal variable pairs.

    JSON layout::

        {"attributes": {"company": ["name", "country"]},
         "pairs": [["company", "product"]]}
    """

    attributes: dict[str, list[str]] = field(default_factory=dict)
    pairs: list[tuple[str, str]] | None = None

    @classmethod
    def from_json(cls, source) -> "Preprocessing":
        data = json.loads(source) if isinstance(source, (str, bytes)) else json.load(source)
        unknown = set(data) - {"attributes", "pairs"}
        if unknown:
            raise ValueError(f"unknown preprocessing keys: {sorted(unknown)}")
        pairs = data.get("pairs")
        return cls(
            {k: list(v) for k, v in data.get("attributes", {}).items()},
            None if pairs is None else [tuple(p) for p in pairs],
        )

    def attribute_selection(self, Q: GraphPattern) -> dict[str, list[str]] | None:
        if not self.attributes:
            return None
        return {v: self.attributes[l] for v, l in zip(Q.variables, Q.node_labels) if l in self.attributes}

    def allowed_pairs(self, Q: GraphPattern) -> list[tuple[str, str]] | None:
        if self.pairs is None:
            return None
        wanted = {frozenset(p) if p[0] != p[1] else frozenset([p[0]]) for p in self.pairs}
        out = []
        vs = Q.variables
        for i, x in enumerate(vs):
            for y in vs[i + 1:]:
                lx, ly = Q.label(x), Q.label(y)
                key = frozenset((lx, ly)) if lx != ly else frozenset([lx])
                if key in wanted:
                    out.append((x, y))
        return out
