"""End-to-end discovery: communities, frequent patterns, matches, dependencies, cover, ranking."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .community import detect_communities
from .cover import RankConfig, find_cover, rank_report
from .depminer import MODES, Ged, MiningTrace, holds_on_table, mine_dependencies
from .graph import GraphPattern, PropertyGraph, load_graph_files
from .matcher import Preprocessing, build_pseudo_relation, canonical_orbit_representatives, find_matches, Match
from .patterns import FrequentPatternSet, mine_frequent_patterns, reduce_patterns
from .rules_io import serialize_rules

log = logging.getLogger("gedminer")

MATCHING = ("auto", "homomorphic", "isomorphic")


class DiscoveryError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class DiscoveryConfig:
    gamma: float = 1.0
    tau: int = 5000
    alpha: float = 0.5
    mode: str = "ged"
    max_pattern_nodes: int = 5
    max_lhs_size: int = 3
    top_k_constants: int = 5
    top_k: int = 20
    seed: int = 0
    workers: int = 1
    nodes_path: str | None = None
    edges_path: str | None = None
    out_path: str | None = None
    report_path: str | None = None
    preprocess_path: str | None = None
    orbit_dedup: bool = True
    # "auto": homomorphic for ged, isomorphic for gfd and gkey
    matching: str = "auto"

    def validate(self) -> None:
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.matching not in MATCHING:
            raise ValueError(f"matching must be one of {MATCHING}")
        if self.max_pattern_nodes < 1:
            raise ValueError("max_pattern_nodes must be >= 1")
        if self.max_lhs_size < 0:
            raise ValueError("max_lhs_size must be >= 0")
        if self.top_k_constants < 0 or self.top_k < 0:
            raise ValueError("top-k values must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def isomorphic(self) -> bool:
        if self.matching == "auto":
            return self.mode != "ged"
        return self.matching == "isomorphic"


@dataclass
class DiscoveryReport:
    rules: list[Ged] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    communities: int = 0
    frequent_patterns: int = 0
    reduced_patterns: int = 0
    matches_per_pattern: dict[str, int] = field(default_factory=dict)
    candidates_validated: int = 0
    rules_before_cover: int = 0
    rules_after_cover: int = 0
    unsound_dropped: int = 0

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("rules")
        d["rules_reported"] = len(self.rules)
        return d


# -- per-task work (module level so process pools can pickle it) ----------------

_SHARED: dict = {}


def _init_worker(G, cfg, prep):
    _SHARED.update(G=G, cfg=cfg, prep=prep)


def _mine_community(args):
    cid, node_ids = args
    G, cfg = _SHARED["G"], _SHARED["cfg"]
    sub = G.subgraph(node_ids)
    return mine_frequent_patterns(sub, cfg.tau, cfg.max_pattern_nodes, community_id=cid)


def _mine_pattern(Q: GraphPattern):
    G, cfg, prep = _SHARED["G"], _SHARED["cfg"], _SHARED["prep"]
    full = find_matches(Q, G, isomorphic=cfg.isomorphic, orbit_dedup=False, prefilter=False)
    if not full:
        return Q, 0, [], 0, 0
    rows = full
    if cfg.orbit_dedup:
        kept = canonical_orbit_representatives(Q, [m.nodes for m in full])
        rows = [Match(Q.variables, t) for t in kept]
    table = build_pseudo_relation(
        Q, rows, G,
        attribute_selection=prep.attribute_selection(Q) if prep else None,
        allowed_pairs=prep.allowed_pairs(Q) if prep else None,
    )
    trace = MiningTrace()
    geds = mine_dependencies(
        Q, table, max_lhs_size=cfg.max_lhs_size, top_k_constants=cfg.top_k_constants,
        mode=cfg.mode, trace=trace,
    )
    sound = geds
    if len(rows) < len(full):
        # rules read off orbit representatives may fail on the symmetric images
        selection = {v: [a for u, a in table.attribute_columns if u == v] for v in Q.variables}
        full_table = build_pseudo_relation(Q, full, G, selection)
        sound = [g for g in geds if holds_on_table(g, full_table)]
    return Q, len(rows), sound, trace.candidates, len(geds) - len(sound)


def _map(fn, items, G, cfg, prep):
    items = list(items)
    if cfg.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(items)),
                                 initializer=_init_worker, initargs=(G, cfg, prep)) as pool:
            return list(pool.map(fn, items))
    _init_worker(G, cfg, prep)
    try:
        return [fn(x) for x in items]
    finally:
        _SHARED.clear()


class _Stage:
    def __init__(self, name: str, report: DiscoveryReport):
        self.name = name
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        log.info("event=stage_start stage=%s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        dt = time.perf_counter() - self.t0
        self.report.timings[self.name] = dt
        if exc is not None:
            log.error("event=stage_failed stage=%s seconds=%.3f", self.name, dt)
            if not isinstance(exc, DiscoveryError):
                raise DiscoveryError(self.name, exc) from exc
            return False
        log.info("event=stage_done stage=%s seconds=%.3f", self.name, dt)
        return False


def discover_from_graph(G: PropertyGraph, cfg: DiscoveryConfig,
                        preprocessing: Preprocessing | None = None) -> DiscoveryReport:
    cfg.validate()
    report = DiscoveryReport()

    with _Stage("communities", report):
        comms = detect_communities(G, gamma=cfg.gamma, seed=cfg.seed)
        report.communities = len(comms)
    log.info("event=count stage=communities value=%d", report.communities)

    with _Stage("patterns", report):
        tasks = [(i, sorted(c, key=str)) for i, c in enumerate(comms.communities) if len(c) > 1]
        per_comm = _map(_mine_community, tasks, G, cfg, preprocessing)
        report.frequent_patterns = sum(len(s) for s in per_comm)
        merged = FrequentPatternSet.merge(per_comm)
        reduced = reduce_patterns(merged)
        report.reduced_patterns = len(reduced)
    log.info("event=count stage=patterns frequent=%d reduced=%d", report.frequent_patterns, report.reduced_patterns)

    with _Stage("dependencies", report):
        results = _map(_mine_pattern, reduced, G, cfg, preprocessing)
        sigma = []
        for Q, n_matches, geds, n_cand, n_bad in results:
            report.matches_per_pattern[str(Q)] = n_matches
            report.candidates_validated += n_cand
            report.unsound_dropped += n_bad
            sigma.extend(geds)
        report.rules_before_cover = len(sigma)

    with _Stage("cover", report):
        cover = find_cover(sigma)
        report.rules_after_cover = len(cover)
        report.rules = rank_report(cover, RankConfig(cfg.alpha), cfg.top_k)
    log.info("event=count stage=cover before=%d after=%d reported=%d",
             report.rules_before_cover, report.rules_after_cover, len(report.rules))
    return report


def run_discovery(cfg: DiscoveryConfig) -> DiscoveryReport:
    """Load the input files, run discovery, write the rule and report files."""
    cfg.validate()
    timings = {}
    t0 = time.perf_counter()
    try:
        G = load_graph_files(cfg.nodes_path, cfg.edges_path)
        prep = None
        if cfg.preprocess_path:
            prep = Preprocessing.from_json(Path(cfg.preprocess_path).read_text(encoding="utf-8"))
    except Exception as exc:
        raise DiscoveryError("load", exc) from exc
    timings["load"] = time.perf_counter() - t0
    report = discover_from_graph(G, cfg, prep)
    report.timings = {**timings, **report.timings}
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as fh:
            serialize_rules(report.rules, fh)
    if cfg.report_path:
        Path(cfg.report_path).write_text(json.dumps(report.summary(), indent=2, sort_keys=True), encoding="utf-8")
    return report
