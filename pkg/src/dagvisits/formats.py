"""JSON, JSON-lines and DOT encodings.

Graphs are ``{"n": int, "edges": [[u, v], ...], "meta": {...}}``. Traces
are JSON lines, one ``{"op": ..., "v": ...}`` object per step. Output is
key-sorted so that the same object always serializes to the same bytes.
"""

import json

from .dag import Dag, GraphError
from .machine import IoComputation, PebbleSchedule, step_from_json


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dag_to_json(d):
    return {"n": d.n, "edges": [list(e) for e in d.edges()], "meta": _plain(d.meta)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def dag_from_json(obj):
    if not isinstance(obj, dict) or "n" not in obj:
        raise GraphError('graph JSON must be an object with "n" and "edges"')
    try:
        n = int(obj["n"])
        edges = [(int(u), int(v)) for u, v in obj.get("edges", [])]
    except (TypeError, ValueError):
        raise GraphError("graph JSON has a malformed vertex count or edge") from None
    meta = dict(obj.get("meta") or {})
    if "coords" in meta:
        meta["coords"] = [tuple(c) for c in meta["coords"]]
    return Dag(n, edges, meta)


def dag_to_dot(d, name="G"):
    lines = [f"digraph {name} {{"]
    lines += [f"  {v};" for v in range(d.n)]
    lines += [f"  {u} -> {v};" for u, v in d.edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"


def steps_to_jsonl(steps):
    return "".join(dumps({"op": s.op, "v": s.v}) + "\n" for s in steps)


def steps_from_jsonl(text):
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            steps.append(step_from_json(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"trace line {lineno}: {exc}") from None
    return tuple(steps)


def computation_from_jsonl(text, M):
    return IoComputation(steps_from_jsonl(text), M)


def schedule_from_jsonl(text, budget):
    return PebbleSchedule(steps_from_jsonl(text), budget)


def visit_from_json(obj):
    """Accept a bare list or an object with a ``sequence`` field."""
    seq = obj.get("sequence") if isinstance(obj, dict) else obj
    if not isinstance(seq, list):
        raise ValueError('visit JSON must be a list or {"sequence": [...]}')
    return tuple(int(v) for v in seq)
