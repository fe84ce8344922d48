"""JSON-lines reading and writing of dependency rules."""

from __future__ import annotations

import io
import json
from typing import IO, Iterable

from .depminer import Ged, GedStats, Literal
from .graph import GraphPattern


class RuleParseError(ValueError):
    def __init__(self, msg: str, line: int):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def ged_to_dict(g: Ged) -> dict:
    d = {
        "pattern": g.pattern.to_dict(),
        "lhs": [w.to_dict() for w in sorted(g.lhs)],
        "rhs": [w.to_dict() for w in sorted(g.rhs)],
    }
    if g.stats is not None:
        s = g.stats
        d["stats"] = {"support": s.support, "matches": s.matches, "k": s.k, "N": s.n_attributes}
    d["rank"] = g.rank
    return d


def ged_from_dict(d: dict) -> Ged:
    stats = None
    if d.get("stats") is not None:
        s = d["stats"]
        stats = GedStats(int(s["support"]), int(s["matches"]), int(s["k"]), int(s["N"]))
    rank = d.get("rank")
    return Ged(
        GraphPattern.from_dict(d["pattern"]),
        frozenset(Literal.from_dict(w) for w in d["lhs"]),
        frozenset(Literal.from_dict(w) for w in d["rhs"]),
        stats,
        None if rank is None else float(rank),
    )


def rule_text(g: Ged) -> str:
    """Stable one-line serialization, also used as a sort key."""
    return json.dumps(ged_to_dict(g), sort_keys=True, ensure_ascii=False)


def serialize_rules(rules: Iterable[Ged], sink: IO) -> int:
    """Write one JSON object per rule; works on text or byte streams."""
    n = 0
    binary = isinstance(sink, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(sink, "mode", "")
    for g in rules:
        line = rule_text(g) + "\n"
        sink.write(line.encode("utf-8") if binary else line)
        n += 1
    return n


def parse_rules(source) -> list[Ged]:
    """Inverse of :func:`serialize_rules`; accepts a stream, ``str`` or ``bytes``."""
    if isinstance(source, (str, bytes)):
        text = source
    else:
        text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    out = []
    # only "\n" ends a record; str.splitlines would also split inside strings
    for i, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            out.append(ged_from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise RuleParseError(f"malformed JSON ({exc.msg})", i) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise RuleParseError(f"invalid rule ({exc})", i) from None
    return out
