"""JSON-lines execution traces: writing, parsing, replay and shrinking.

A trace file holds one header record, one record per transition and a final
digest record. Records are written with sorted keys and no extra whitespace,
so equal traces are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Any, Callable, Iterable, Optional

from .core import DEFAULT_ALPHABET, MrdtSpec, canon
from .datatypes import JsonKey, catalog_lookup, json_compose
from .fuzz import ExecutionResult, run_execution
from .store import Apply, Configuration, CreateBranch, Merge, Query

FORMAT_VERSION = 1


class TraceError(ValueError):
    """The trace file is malformed or truncated."""


class TraceDivergence(AssertionError):
    """Replaying a trace produced answers or a final state other than those recorded."""


@dataclass
class Trace:
    spec_name: str
    transitions: list
    mode: str = "mrdt"
    seed: Any = None
    alphabet: tuple = DEFAULT_ALPHABET
    json_keys: Optional[tuple] = None  # ((id, vtype), ...) for custom JSON layouts
    digest: Optional[str] = None

    def build_spec(self) -> MrdtSpec:
        return build_spec(self.spec_name, self.alphabet, self.mode, self.json_keys)

    def with_transitions(self, transitions: list) -> "Trace":
        return replace(self, transitions=list(transitions), digest=None)

    def __len__(self) -> int:
        return len(self.transitions)


def build_spec(name: str, alphabet=DEFAULT_ALPHABET, mode: str = "mrdt", json_keys=None) -> MrdtSpec:
    if json_keys:
        comps = {JsonKey(i, t): catalog_lookup(t, alphabet, mode) for i, t in json_keys}
        return json_compose(comps, name=name)
    return catalog_lookup(name, alphabet, mode)


# -- encoding -----------------------------------------------------------------


def _untuple(x: Any) -> Any:
    """JSON lists back to the tuples used for operations and queries."""
    if isinstance(x, list):
        return tuple(_untuple(v) for v in x)
    return x


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def transition_to_json(tr) -> dict:
    if isinstance(tr, CreateBranch):
        return {"kind": "fork", "new": tr.new, "from": tr.src}
    if isinstance(tr, Apply):
        out = {"kind": "apply", "r": tr.r, "op": canon(tr.op)}
        if tr.ts is not None:
            out["ts"] = tr.ts
        return out
    if isinstance(tr, Merge):
        return {"kind": "merge", "r1": tr.r1, "r2": tr.r2}
    if isinstance(tr, Query):
        out = {"kind": "query", "r": tr.r, "q": canon(tr.q)}
        if tr.has_expected:
            out["result"] = canon(tr.expected)
        return out
    raise TypeError(f"not a transition: {tr!r}")


def transition_from_json(rec: dict):
    try:
        kind = rec["kind"]
        if kind == "fork":
            return CreateBranch(int(rec["new"]), int(rec["from"]))
        if kind == "apply":
            ts = rec.get("ts")
            return Apply(int(rec["r"]), _untuple(rec["op"]), None if ts is None else int(ts))
        if kind == "merge":
            return Merge(int(rec["r1"]), int(rec["r2"]))
        if kind == "query":
            if "result" in rec:
                return Query(int(rec["r"]), _untuple(rec["q"]), rec["result"])
            return Query(int(rec["r"]), _untuple(rec["q"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceError(f"bad transition record {rec!r}: {exc}") from None
    raise TraceError(f"unknown transition kind {kind!r}")


def final_digest(C: Configuration) -> str:
    """sha256 over the canonical states of every version."""
    body = _dumps([[v, canon(C.N[v])] for v in sorted(C.N)])
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def trace_lines(trace: Trace) -> list[str]:
    header = {
        "kind": "header",
        "format": FORMAT_VERSION,
        "spec": trace.spec_name,
        "mode": trace.mode,
        "seed": trace.seed,
        "alphabet": list(trace.alphabet),
    }
    if trace.json_keys:
        header["json_keys"] = [list(k) for k in trace.json_keys]
    lines = [_dumps(header)]
    lines.extend(_dumps(transition_to_json(t)) for t in trace.transitions)
    digest = trace.digest
    if digest is None:
        digest = final_digest(run_execution(trace.build_spec(), trace.transitions, trace.mode,
                                            check_partitions=False, check_all_versions=False).configs[-1])
    lines.append(_dumps({"kind": "digest", "sha256": digest}))
    return lines


def dumps_trace(trace: Trace) -> str:
    return "\n".join(trace_lines(trace)) + "\n"


def write_trace(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_trace(trace))


def loads_trace(text: str) -> Trace:
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: {exc.msg}") from None
    if not records or records[0].get("kind") != "header":
        raise TraceError("missing header record")
    if records[-1].get("kind") != "digest" or len(records) < 2:
        raise TraceError("missing digest record (truncated trace?)")
    head = records[0]
    if head.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        raise TraceError(f"unsupported trace format {head.get('format')!r}")
    try:
        spec_name = head["spec"]
    except KeyError:
        raise TraceError("header has no spec name") from None
    keys = head.get("json_keys")
    return Trace(
        spec_name=spec_name,
        transitions=[transition_from_json(r) for r in records[1:-1]],
        mode=head.get("mode", "mrdt"),
        seed=head.get("seed"),
        alphabet=tuple(head.get("alphabet", DEFAULT_ALPHABET)),
        json_keys=tuple(tuple(k) for k in keys) if keys else None,
        digest=records[-1].get("sha256"),
    )


def read_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return loads_trace(fh.read())


# -- replay -------------------------------------------------------------------


def replay_trace(trace: Trace, strict: bool = True, **checks) -> ExecutionResult:
    """Re-run a trace with its recorded timestamps and check every verdict.

    With ``strict`` a recorded query answer or final digest that differs from
    the replay raises :class:`TraceDivergence`.
    """
    spec = trace.build_spec()
    res = run_execution(spec, trace.transitions, trace.mode, strict_queries=strict, **checks)
    if strict:
        if res.verdicts.query_mismatches:
            idx, detail = res.verdicts.query_mismatches[0]
            raise TraceDivergence(f"transition {idx}: {detail}")
        if trace.digest is not None:
            got = final_digest(res.configs[-1])
            if got != trace.digest:
                raise TraceDivergence(f"final digest {got} differs from recorded {trace.digest}")
    return res


# -- shrinking ----------------------------------------------------------------


def well_formed(transitions: Iterable) -> bool:
    """Every transition refers to active replicas and forks to fresh ones."""
    active = {0}
    used_ts: set = set()
    for tr in transitions:
        if isinstance(tr, CreateBranch):
            if tr.src not in active or tr.new in active:
                return False
            active.add(tr.new)
        elif isinstance(tr, Apply):
            if tr.r not in active:
                return False
            if tr.ts is not None:
                if tr.ts in used_ts:
                    return False
                used_ts.add(tr.ts)
        elif isinstance(tr, Merge):
            if tr.r1 not in active or tr.r2 not in active or tr.r1 == tr.r2:
                return False
        elif isinstance(tr, Query):
            if tr.r not in active:
                return False
        else:
            return False
    return True


def _strip(transitions: list) -> list:
    """Drop recorded answers; a shrunk schedule answers its own queries."""
    return [Query(t.r, t.q) if isinstance(t, Query) else t for t in transitions]


def _without_replica(transitions: list, i: int) -> list:
    """Remove fork ``i`` together with everything that touches the forked replica."""
    r = transitions[i].new
    keep = []
    for j, t in enumerate(transitions):
        if j == i:
            continue
        touched = {getattr(t, a) for a in ("r", "r1", "r2", "new", "src") if hasattr(t, a)}
        if r in touched:
            continue
        keep.append(t)
    return keep


def execution_fails(trace: Trace) -> bool:
    return run_execution(trace.build_spec(), trace.transitions, trace.mode, stop_on_failure=True).failed


def shrink_trace(trace: Trace, failing: Optional[Callable[[Trace], bool]] = None) -> Trace:
    """Greedy delta debugging over transition subsequences.

    ``failing`` returns True while the trace still exhibits the failure. The
    result still fails and no single transition can be removed from it.
    Recorded timestamps are kept so removing an event does not renumber the rest.
    """
    failing = failing or execution_fails
    current = trace.with_transitions(_strip(trace.transitions))
    if not failing(current):
        raise ValueError("predicate does not fail on the input trace")

    def attempt(cand: list) -> bool:
        nonlocal current
        if len(cand) >= len(current.transitions) or not well_formed(cand):
            return False
        t = current.with_transitions(cand)
        if failing(t):
            current = t
            return True
        return False

    chunk = max(1, len(current.transitions) // 2)
    while chunk >= 1:
        i = 0
        while i < len(current.transitions):
            ts = current.transitions
            if not attempt(ts[:i] + ts[i + chunk:]):
                i += chunk
        if chunk == 1:
            break
        chunk //= 2

    changed = True
    while changed:
        changed = False
        for i in range(len(current.transitions)):
            ts = current.transitions
            if isinstance(ts[i], CreateBranch) and attempt(_without_replica(ts, i)):
                changed = True
                break
            if attempt(ts[:i] + ts[i + 1:]):
                changed = True
                break
    # record answers of the final schedule so the result replays strictly
    res = run_execution(current.build_spec(), current.transitions, current.mode,
                        check_partitions=False, check_all_versions=False)
    return current.with_transitions(res.transitions)


def is_locally_minimal(trace: Trace, failing: Optional[Callable[[Trace], bool]] = None) -> bool:
    failing = failing or execution_fails
    ts = _strip(trace.transitions)
    for i in range(len(ts)):
        cand = ts[:i] + ts[i + 1:]
        if well_formed(cand) and failing(trace.with_transitions(cand)):
            return False
    return True
