"""Property graphs, graph patterns, file loading and pattern-driven filtering.

A :class:`PropertyGraph` is a directed, edge-labelled graph whose nodes carry a
label and a list of attribute/value pairs.  A :class:`GraphPattern` is the
same kind of object over *variables*, where any node or edge label may be the
wildcard ``"*"``.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

WILDCARD = "*"
ID_ATTRIBUTE = "id"


class GraphError(ValueError):
    """Base class for malformed graph data."""


class GraphFormatError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class DuplicateNodeError(GraphError):
    pass


class ReferentialIntegrityError(GraphError):
    def __init__(self, missing: Hashable, line: int | None = None):
        self.missing = missing
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"edge references unknown node id {missing!r}{where}")


class PatternError(ValueError):
    pass


def labels_match(l: str, l_prime: str) -> bool:
    """True iff the labels are equal or either one is the wildcard."""
    return l == l_prime or l == WILDCARD or l_prime == WILDCARD


@dataclass(frozen=True)
class NodeRecord:
    id: Hashable
    label: str
    attributes: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        names = [a for a, _ in self.attributes]
        if len(set(names)) != len(names):
            raise GraphError(f"node {self.id!r} repeats an attribute name")
        if ID_ATTRIBUTE in names:
            raise GraphError(f"node {self.id!r}: 'id' is reserved")

    def get(self, name: str, default=None):
        for a, v in self.attributes:
            if a == name:
                return v
        return default

    @property
    def attribute_dict(self) -> dict[str, str]:
        return dict(self.attributes)


class PropertyGraph:
    """Immutable directed labelled multigraph with per-node attributes.

    Parallel edges with the same ``(source, label, target)`` collapse to one.
    Indices: ``label_index`` (node label -> node ids), ``out_adj`` / ``in_adj``
    (node -> edge label -> neighbour ids).
    """

    def __init__(self, nodes: Iterable[NodeRecord] = (), edges: Iterable[tuple] = ()):
        self._nodes: dict[Hashable, NodeRecord] = {}
        for rec in nodes:
            if rec.id in self._nodes:
                raise DuplicateNodeError(f"duplicate node id {rec.id!r}")
            self._nodes[rec.id] = rec
        edge_set = set()
        for s, l, t in edges:
            for end in (s, t):
                if end not in self._nodes:
                    raise ReferentialIntegrityError(end)
            edge_set.add((s, l, t))
        self._edges = frozenset(edge_set)

        label_index = defaultdict(set)
        for nid, rec in self._nodes.items():
            label_index[rec.label].add(nid)
        self.label_index = {k: frozenset(v) for k, v in label_index.items()}

        out_adj: dict = defaultdict(lambda: defaultdict(set))
        in_adj: dict = defaultdict(lambda: defaultdict(set))
        for s, l, t in self._edges:
            out_adj[s][l].add(t)
            in_adj[t][l].add(s)
        self.out_adj = {n: {l: frozenset(v) for l, v in d.items()} for n, d in out_adj.items()}
        self.in_adj = {n: {l: frozenset(v) for l, v in d.items()} for n, d in in_adj.items()}

    @property
    def nodes(self) -> Mapping[Hashable, NodeRecord]:
        return self._nodes

    @property
    def edges(self) -> frozenset:
        return self._edges

    def node(self, nid) -> NodeRecord:
        return self._nodes[nid]

    def label(self, nid) -> str:
        return self._nodes[nid].label

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, nid):
        return nid in self._nodes

    def __eq__(self, other):
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __repr__(self):
        return f"PropertyGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"

    def edge_labels(self) -> set[str]:
        return {l for _, l, _ in self._edges}

    def subgraph(self, node_ids: Iterable) -> "PropertyGraph":
        """Induced subgraph on ``node_ids``."""
        keep = set(node_ids)
        return PropertyGraph(
            (self._nodes[n] for n in keep),
            ((s, l, t) for s, l, t in self._edges if s in keep and t in keep),
        )


@dataclass(frozen=True)
class GraphPattern:
    """Directed labelled pattern ``Q[u]`` over named variables."""

    variables: tuple[str, ...]
    node_labels: tuple[str, ...]
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "node_labels", tuple(self.node_labels))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        if not self.variables:
            raise PatternError("pattern has no variables")
        if len(self.variables) != len(self.node_labels):
            raise PatternError("one label per variable required")
        if len(set(self.variables)) != len(self.variables):
            raise PatternError("variable names must be unique")
        vs = set(self.variables)
        for u, _, v in self.edges:
            if u not in vs or v not in vs:
                raise PatternError(f"edge ({u}, {v}) uses an undeclared variable")
        if not self._connected():
            raise PatternError("pattern is not weakly connected")

    @classmethod
    def build(cls, labels: Mapping[str, str] | Sequence[tuple[str, str]], edges=()) -> "GraphPattern":
        items = list(labels.items()) if isinstance(labels, Mapping) else list(labels)
        return cls(tuple(v for v, _ in items), tuple(l for _, l in items), frozenset(edges))

    def _connected(self) -> bool:
        adj = defaultdict(set)
        for u, _, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {self.variables[0]}
        stack = [self.variables[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.variables)

    def label(self, var: str) -> str:
        return self.node_labels[self.variables.index(var)]

    @property
    def labels(self) -> dict[str, str]:
        return dict(zip(self.variables, self.node_labels))

    @property
    def size_nodes(self) -> int:
        return len(self.variables)

    @property
    def size_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[str, str, str]]:
        return sorted(self.edges)

    def to_dict(self) -> dict:
        return {
            "nodes": [{"var": v, "label": l} for v, l in zip(self.variables, self.node_labels)],
            "edges": [{"src": u, "label": l, "dst": v} for u, l, v in self.sorted_edges()],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GraphPattern":
        return cls(
            tuple(n["var"] for n in d["nodes"]),
            tuple(n["label"] for n in d["nodes"]),
            frozenset((e["src"], e["label"], e["dst"]) for e in d.get("edges", ())),
        )

    def __str__(self):
        nodes = ", ".join(f"{v}:{l}" for v, l in zip(self.variables, self.node_labels))
        edges = ", ".join(f"{u}-{l}->{v}" for u, l, v in self.sorted_edges())
        return f"Q[{nodes}]({edges})"


# -- loading -----------------------------------------------------------------

def _text_stream(source) -> io.TextIOBase:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def _parse_attribute_cells(cells: Sequence[str], line: int) -> tuple[tuple[str, str], ...]:
    attrs: list[tuple[str, str]] = []
    for cell in cells:
        cell = cell.strip()
        if not cell:
            continue
        if cell.startswith("{"):
            try:
                obj = json.loads(cell)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"bad JSON attribute cell: {exc.msg}", line) from None
            if not isinstance(obj, dict):
                raise GraphFormatError("JSON attribute cell must be an object", line)
            attrs.extend((str(k), str(v)) for k, v in obj.items())
        elif "=" in cell:
            k, v = cell.split("=", 1)
            if not k:
                raise GraphFormatError(f"empty attribute name in {cell!r}", line)
            attrs.append((k, v))
        else:
            raise GraphFormatError(f"attribute cell {cell!r} is not key=value", line)
    names = [k for k, _ in attrs]
    if len(set(names)) != len(names):
        raise GraphFormatError("attribute name repeated within a node", line)
    if ID_ATTRIBUTE in names:
        raise GraphFormatError("attribute name 'id' is reserved", line)
    return tuple(attrs)


def read_nodes(source) -> list[NodeRecord]:
    reader = csv.reader(_text_stream(source))
    header = next(reader, None)
    if header is None:
        return []
    header = [h.strip() for h in header]
    if header[:2] != ["id", "label"]:
        raise GraphFormatError("node header must start with 'id,label'", 1)
    extra = header[2:]
    if any(h != "attr" for h in extra):
        raise GraphFormatError("undeclared node column; extra columns must be named 'attr'", 1)
    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 2:
            raise GraphFormatError("node row needs id and label", line)
        if len(row) > len(header):
            raise GraphFormatError("row has more cells than declared columns", line)
        nid, label = row[0].strip(), row[1].strip()
        if not nid or not label:
            raise GraphFormatError("empty id or label", line)
        records.append((line, NodeRecord(nid, label, _parse_attribute_cells(row[2:], line))))
    seen = set()
    for line, rec in records:
        if rec.id in seen:
            raise DuplicateNodeError(f"line {line}: duplicate node id {rec.id!r}")
        seen.add(rec.id)
    return [rec for _, rec in records]


def read_edges(source) -> list[tuple[str, str, str, int]]:
    reader = csv.reader(_text_stream(source))
    header = next(reader, None)
    if header is None:
        return []
    if [h.strip() for h in header] != ["src", "label", "dst"]:
        raise GraphFormatError("edge header must be exactly 'src,label,dst'", 1)
    out = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise GraphFormatError(f"edge row needs 3 cells, got {len(row)}", line)
        s, l, t = (c.strip() for c in row)
        if not s or not l or not t:
            raise GraphFormatError("empty edge cell", line)
        out.append((s, l, t, line))
    return out


def load_graph(node_source, edge_source) -> PropertyGraph:
    """Build a graph from a nodes table and an edges table.

    Sources may be paths-opened binary/text streams, ``bytes`` or ``str``
    contents.  Node ids are kept as strings.
    """
    nodes = read_nodes(node_source)
    ids = {n.id for n in nodes}
    edges = []
    for s, l, t, line in read_edges(edge_source):
        for end in (s, t):
            if end not in ids:
                raise ReferentialIntegrityError(end, line)
        edges.append((s, l, t))
    return PropertyGraph(nodes, edges)


def load_graph_files(nodes_path, edges_path) -> PropertyGraph:
    with open(nodes_path, "rb") as fn, open(edges_path, "rb") as fe:
        return load_graph(fn, fe)


def write_graph(G: PropertyGraph, node_sink, edge_sink) -> None:
    """Write ``G`` in the loader's format (one JSON attribute cell per node)."""
    nw = csv.writer(node_sink, lineterminator="\n")
    nw.writerow(["id", "label", "attr"])
    for nid in sorted(G.nodes, key=str):
        rec = G.nodes[nid]
        cell = json.dumps(dict(rec.attributes), ensure_ascii=False) if rec.attributes else ""
        nw.writerow([nid, rec.label, cell])
    ew = csv.writer(edge_sink, lineterminator="\n")
    ew.writerow(["src", "label", "dst"])
    for s, l, t in sorted(G.edges, key=lambda e: tuple(map(str, e))):
        ew.writerow([s, l, t])


# -- simplification -----------------------------------------------------------

def filter_graph(G: PropertyGraph, Q: GraphPattern) -> PropertyGraph:
    """Drop nodes and edges whose labels cannot take part in a match of ``Q``.

    Isolated nodes are dropped as well when ``Q`` has at least one edge (every
    variable of a connected pattern with edges is incident to an edge).
    """
    node_labels = set(Q.node_labels)
    edge_labels = {l for _, l, _ in Q.edges}
    any_node = WILDCARD in node_labels
    any_edge = WILDCARD in edge_labels

    def node_ok(lab):
        return any_node or lab == WILDCARD or lab in node_labels

    def edge_ok(lab):
        return any_edge or lab == WILDCARD or lab in edge_labels

    keep = {nid for nid, rec in G.nodes.items() if node_ok(rec.label)}
    edges = [(s, l, t) for s, l, t in G.edges if s in keep and t in keep and edge_ok(l)]
    if Q.edges:
        touched = set()
        for s, _, t in edges:
            touched.add(s)
            touched.add(t)
        keep &= touched
    if len(keep) == len(G.nodes) and len(edges) == len(G.edges):
        return G
    return PropertyGraph((G.nodes[n] for n in keep), edges)
