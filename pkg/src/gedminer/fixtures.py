"""Bundled running-example graph and its query patterns."""

from __future__ import annotations

import json
from importlib import resources

from .graph import GraphPattern, PropertyGraph, load_graph

_PKG = "gedminer.data"


def _read(name: str) -> str:
    return resources.files(_PKG).joinpath(name).read_text(encoding="utf-8")


def fixture_paths() -> tuple[str, str]:
    """Filesystem paths of the node and edge CSVs."""
    base = resources.files(_PKG)
    return str(base.joinpath("running_example_nodes.csv")), str(base.joinpath("running_example_edges.csv"))


def running_example_graph() -> PropertyGraph:
    return load_graph(_read("running_example_nodes.csv"), _read("running_example_edges.csv"))


def running_example_patterns() -> dict[str, GraphPattern]:
    data = json.loads(_read("running_example_patterns.json"))
    return {name: GraphPattern.from_dict(d) for name, d in data.items()}


def running_example_preprocessing_path() -> str:
    """Names-only attribute selection, the view used by the lattice walk-through."""
    return str(resources.files(_PKG).joinpath("running_example_preprocess.json"))
