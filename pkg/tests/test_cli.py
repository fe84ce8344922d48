import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from gedminer import cli
from gedminer.depminer import Ged, GedStats, Literal
from gedminer.discovery import DiscoveryConfig, DiscoveryError, discover_from_graph, run_discovery
from gedminer.fixtures import fixture_paths, running_example_graph, running_example_patterns, \
    running_example_preprocessing_path
from gedminer.rules_io import RuleParseError, parse_rules, rule_text, serialize_rules

NODES, EDGES = fixture_paths()
PREP = running_example_preprocessing_path()

text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=8)


def _rule(value="EA", rank=0.25):
    Q = running_example_patterns()["Q3"]
    return Ged(Q, frozenset([Literal.constant("y", "name", "F20")]),
               frozenset([Literal.constant("x", "name", value)]), GedStats(2, 4, 2, 6), rank)


# -- rule files ------------------------------------------------------------------------

@given(text, st.one_of(st.none(), st.floats(0, 1)))
def test_rule_round_trip(value, rank):
    g = _rule(value, rank)
    buf = io.StringIO()
    assert serialize_rules([g, g], buf) == 2
    assert parse_rules(buf.getvalue()) == [g, g]


def test_rule_round_trip_binary_and_variable_literals():
    Q = running_example_patterns()["Q2"]
    g = Ged(Q, frozenset(), frozenset([Literal.variable("y", "creator", "x", "name"), Literal.id("x", "y")]))
    buf = io.BytesIO()
    serialize_rules([g], buf)
    assert parse_rules(buf.getvalue()) == [g]
    assert parse_rules(io.BytesIO(buf.getvalue())) == [g]


def test_empty_rule_file():
    assert parse_rules("") == []
    assert parse_rules("\n\n") == []


def test_truncated_rule_reports_line():
    line = rule_text(_rule())
    with pytest.raises(RuleParseError) as err:
        parse_rules(line + "\n" + line[:-5] + "\n")
    assert err.value.line == 2
    with pytest.raises(RuleParseError):
        parse_rules('{"pattern": {}, "lhs": [], "rhs": []}')


# -- pipeline ----------------------------------------------------------------------------

def test_config_validation():
    for bad in (dict(gamma=0), dict(tau=0), dict(alpha=2), dict(mode="cfd"), dict(matching="fuzzy"),
                dict(workers=0), dict(max_lhs_size=-1)):
        with pytest.raises(ValueError):
            DiscoveryConfig(**bad).validate()
    assert DiscoveryConfig(mode="gfd").isomorphic and not DiscoveryConfig().isomorphic
    assert DiscoveryConfig(mode="gkey", matching="homomorphic").isomorphic is False


def test_process_pool_gives_same_rules():
    G = running_example_graph()
    one = discover_from_graph(G, DiscoveryConfig(gamma=0.01, tau=2, top_k=50))
    two = discover_from_graph(G, DiscoveryConfig(gamma=0.01, tau=2, top_k=50, workers=2))
    assert [rule_text(g) for g in one.rules] == [rule_text(g) for g in two.rules]
    assert set(one.timings) == {"communities", "patterns", "dependencies", "cover"}


def test_orbit_dedup_toggle_keeps_rules_sound():
    G = running_example_graph()
    a = discover_from_graph(G, DiscoveryConfig(gamma=0.01, tau=2, top_k=10**6))
    b = discover_from_graph(G, DiscoveryConfig(gamma=0.01, tau=2, top_k=10**6, orbit_dedup=False))
    assert a.rules and b.rules
    assert sum(a.matches_per_pattern.values()) <= sum(b.matches_per_pattern.values())


def test_load_failure_is_a_load_stage_error(tmp_path):
    bad = tmp_path / "nodes.csv"
    bad.write_text("node,label\n1,a\n")
    with pytest.raises(DiscoveryError) as err:
        run_discovery(DiscoveryConfig(nodes_path=str(bad), edges_path=EDGES))
    assert err.value.stage == "load"


# -- command line ------------------------------------------------------------------------

def run(args, capsys=None):
    return cli.main(["--quiet", *args])


def test_discover_writes_rules_and_report(tmp_path):
    out, rep = tmp_path / "rules.jsonl", tmp_path / "report.json"
    code = run(["discover", "--nodes", NODES, "--edges", EDGES, "--out", str(out), "--report", str(rep),
                "--gamma", "0.01", "--tau", "2", "--preprocess", PREP, "--workers", "1"])
    assert code == 0
    rules = parse_rules(out.read_text())
    assert 0 < len(rules) <= 20
    assert [g.rank for g in rules] == sorted(g.rank for g in rules)
    summary = json.loads(rep.read_text())
    assert summary["rules_reported"] == len(rules)
    assert summary["rules_after_cover"] <= summary["rules_before_cover"]


def test_discover_logs_stages(tmp_path, capsys):
    code = cli.main(["discover", "--nodes", NODES, "--edges", EDGES, "--out", str(tmp_path / "r"),
                     "--gamma", "0.01", "--tau", "2", "--workers", "1"])
    assert code == 0
    err = capsys.readouterr().err
    for stage in ("communities", "patterns", "dependencies", "cover"):
        assert f"event=stage_done stage={stage}" in err


def test_validate_lists_violations(tmp_path):
    Q = running_example_patterns()["Q2"]
    rules = tmp_path / "rules.jsonl"
    good = Ged(Q, frozenset([Literal.constant("y", "name", "F20")]), frozenset([Literal.constant("x", "name", "EA")]))
    bad = Ged(Q, frozenset(), frozenset([Literal.variable("y", "creator", "x", "name")]))
    with open(rules, "w") as fh:
        serialize_rules([good, bad], fh)
    out = tmp_path / "violations.jsonl"
    assert run(["validate", "--nodes", NODES, "--edges", EDGES, "--rules", str(rules), "--out", str(out)]) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert lines == [{"rule": 1, "match": {"x": "2", "y": "6"}}]


def test_match_dumps_pseudo_relation(tmp_path):
    pat = tmp_path / "q3.json"
    pat.write_text(json.dumps(running_example_patterns()["Q3"].to_dict()))
    out = tmp_path / "h3.csv"
    assert run(["match", "--nodes", NODES, "--edges", EDGES, "--pattern", str(pat), "--out", str(out),
                "--preprocess", PREP]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x.id", "y.id", "y2.id", "x.name", "y.name", "y2.name"]
    assert [r[:3] for r in rows[1:]] == [["1", "4", "5"], ["3", "7", "8"], ["3", "7", "9"], ["3", "8", "9"]]


def test_communities_command(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["communities", "--nodes", NODES, "--edges", EDGES, "--gamma", "0.01", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 15
    comm = {r["node"]: r["community"] for r in rows}
    assert sum(1 for c in comm.values() if c == comm["13"]) == 1


@pytest.mark.parametrize("args", [
    [],
    ["discover", "--nodes", NODES],
    ["discover", "--nodes", NODES, "--edges", EDGES, "--out", "x", "--alpha", "1.5"],
    ["discover", "--nodes", NODES, "--edges", EDGES, "--out", "x", "--mode", "cfd"],
    ["communities", "--nodes", NODES, "--edges", EDGES, "--gamma", "0"],
])
def test_usage_errors_exit_1(args):
    with pytest.raises(SystemExit) as exc:
        cli.main(args)
    assert exc.value.code == 1


def test_data_errors_exit_2(tmp_path):
    missing = str(tmp_path / "nope.csv")
    assert run(["communities", "--nodes", missing, "--edges", EDGES]) == 2
    assert run(["discover", "--nodes", missing, "--edges", EDGES, "--out", str(tmp_path / "r")]) == 2
    broken = tmp_path / "rules.jsonl"
    broken.write_text("{not json\n")
    assert run(["validate", "--nodes", NODES, "--edges", EDGES, "--rules", str(broken)]) == 2
    pat = tmp_path / "p.json"
    pat.write_text('{"nodes": [{"var": "x", "label": "a"}, {"var": "y", "label": "b"}], "edges": []}')
    assert run(["match", "--nodes", NODES, "--edges", EDGES, "--pattern", str(pat)]) == 2
