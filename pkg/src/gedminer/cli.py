"""Command-line entry point: ``discover``, ``validate``, ``match`` and ``communities``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .community import detect_communities
from .depminer import check_satisfaction
from .discovery import DiscoveryConfig, DiscoveryError, run_discovery
from .graph import GraphError, GraphPattern, load_graph_files
from .matcher import Preprocessing, build_pseudo_relation, find_matches
from .rules_io import RuleParseError, parse_rules

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"{v} is outside [0, 1]")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{v} must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be >= 1")
    return v


def _non_negative_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{v} must be >= 0")
    return v


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gedminer", description="Discover and check graph entity dependencies.")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress lines")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_args(sp):
        sp.add_argument("--nodes", required=True, help="node CSV (id,label,attr,...)")
        sp.add_argument("--edges", required=True, help="edge CSV (src,label,dst)")

    d = sub.add_parser("discover", help="mine, reduce and rank dependencies")
    graph_args(d)
    d.add_argument("--out", required=True, help="rules file (JSON lines)")
    d.add_argument("--report", help="write run statistics as JSON")
    d.add_argument("--gamma", type=_positive_float, default=1.0)
    d.add_argument("--tau", type=_positive_int, default=5000)
    d.add_argument("--alpha", type=_unit_interval, default=0.5)
    d.add_argument("--mode", choices=["ged", "gfd", "gkey"], default="ged")
    d.add_argument("--matching", choices=["auto", "homomorphic", "isomorphic"], default="auto",
                   help="override the mode's matching semantics")
    d.add_argument("--max-pattern-nodes", type=_positive_int, default=5)
    d.add_argument("--max-lhs-size", type=_non_negative_int, default=3)
    d.add_argument("--top-k-constants", type=_non_negative_int, default=5)
    d.add_argument("--top-k", type=_non_negative_int, default=20)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1)
    d.add_argument("--preprocess", help="JSON with per-label attributes and literal label pairs")
    d.add_argument("--no-orbit-dedup", action="store_true",
                   help="keep every symmetric copy of a match")

    v = sub.add_parser("validate", help="check rules against a graph and list violations")
    graph_args(v)
    v.add_argument("--rules", required=True)
    v.add_argument("--out", help="violations file (JSON lines); default stdout")
    v.add_argument("--isomorphic", action="store_true")

    m = sub.add_parser("match", help="dump the pseudo-relation of one pattern")
    graph_args(m)
    m.add_argument("--pattern", required=True, help="pattern JSON")
    m.add_argument("--out", help="CSV output; default stdout")
    m.add_argument("--isomorphic", action="store_true")
    m.add_argument("--no-orbit-dedup", action="store_true")
    m.add_argument("--preprocess")

    c = sub.add_parser("communities", help="dump the community of every node")
    graph_args(c)
    c.add_argument("--out", help="CSV output; default stdout")
    c.add_argument("--gamma", type=_positive_float, default=1.0)
    c.add_argument("--seed", type=int, default=0)
    return p


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _cmd_discover(a) -> int:
    cfg = DiscoveryConfig(
        gamma=a.gamma, tau=a.tau, alpha=a.alpha, mode=a.mode, max_pattern_nodes=a.max_pattern_nodes,
        max_lhs_size=a.max_lhs_size, top_k_constants=a.top_k_constants, top_k=a.top_k, seed=a.seed,
        workers=a.workers, nodes_path=a.nodes, edges_path=a.edges, out_path=a.out, report_path=a.report,
        preprocess_path=a.preprocess, orbit_dedup=not a.no_orbit_dedup, matching=a.matching,
    )
    report = run_discovery(cfg)
    logging.getLogger("gedminer").info("event=done rules=%d", len(report.rules))
    return EXIT_OK


def _cmd_validate(a) -> int:
    G = load_graph_files(a.nodes, a.edges)
    rules = parse_rules(Path(a.rules).read_text(encoding="utf-8"))
    fh, close = _open_out(a.out)
    bad = 0
    try:
        for i, g in enumerate(rules):
            ok, violations = check_satisfaction(g, G, isomorphic=a.isomorphic)
            bad += not ok
            for m in violations:
                fh.write(json.dumps({"rule": i, "match": m.as_dict()}, default=str) + "\n")
    finally:
        if close:
            fh.close()
    logging.getLogger("gedminer").info("event=done rules=%d violated=%d", len(rules), bad)
    return EXIT_OK


def _cmd_match(a) -> int:
    G = load_graph_files(a.nodes, a.edges)
    Q = GraphPattern.from_dict(json.loads(Path(a.pattern).read_text(encoding="utf-8")))
    prep = Preprocessing.from_json(Path(a.preprocess).read_text(encoding="utf-8")) if a.preprocess else None
    matches = find_matches(Q, G, isomorphic=a.isomorphic, orbit_dedup=not a.no_orbit_dedup)
    T = build_pseudo_relation(
        Q, matches, G,
        attribute_selection=prep.attribute_selection(Q) if prep else None,
        allowed_pairs=prep.allowed_pairs(Q) if prep else None,
    )
    fh, close = _open_out(a.out)
    try:
        w = csv.writer(fh)
        w.writerow([f"{v}.{attr}" for v, attr in T.columns])
        for rec in T.to_records():
            w.writerow(["" if x is None else x for x in rec.values()])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_communities(a) -> int:
    G = load_graph_files(a.nodes, a.edges)
    A = detect_communities(G, gamma=a.gamma, seed=a.seed)
    fh, close = _open_out(a.out)
    try:
        w = csv.writer(fh)
        w.writerow(["node", "community"])
        for i, c in enumerate(A.communities):
            for n in sorted(c, key=str):
                w.writerow([n, i])
    finally:
        if close:
            fh.close()
    return EXIT_OK


_COMMANDS = {
    "discover": _cmd_discover,
    "validate": _cmd_validate,
    "match": _cmd_match,
    "communities": _cmd_communities,
}

_DATA_ERRORS = (GraphError, RuleParseError, OSError, json.JSONDecodeError, KeyError, UnicodeDecodeError)


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logger = logging.getLogger("gedminer")
    if not logger.handlers:
        h = _StderrHandler()
        h.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(h)
    logger.setLevel(logging.WARNING if a.quiet else logging.INFO)
    try:
        return _COMMANDS[a.command](a)
    except DiscoveryError as exc:
        print(f"gedminer: {exc}", file=sys.stderr)
        return EXIT_DATA if exc.stage == "load" else EXIT_INTERNAL
    except _DATA_ERRORS as exc:
        print(f"gedminer: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"gedminer: invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"gedminer: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
