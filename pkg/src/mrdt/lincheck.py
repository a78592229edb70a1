"""Linearization relation, merge-event partition and linearizability verdicts.

Everything here is a pure function of a configuration. The search for a
witness sequence is exact: it explores (applied-event-set, state) pairs, so
two prefixes that reach the same state with the same events are explored
once.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterator, Optional

from .core import ConstraintViolation, Event, MrdtSpec, apply_event, rc_closure_irreflexive
from .store import Configuration, VersionId, resolve_lca, transitive_closure

FULL_ENUMERATION_BOUND = 8
DEFAULT_BUDGET = 10_000

_rc_ok: dict[int, tuple[MrdtSpec, bool]] = {}


def _require_rc_irreflexive(spec: MrdtSpec) -> None:
    hit = _rc_ok.get(id(spec))
    if hit is None or hit[0] is not spec:
        hit = (spec, rc_closure_irreflexive(spec))
        _rc_ok[id(spec)] = hit
    if not hit[1]:
        raise ConstraintViolation(f"{spec.name}: transitive closure of rc is reflexive")


@dataclass(frozen=True)
class LinRelation:
    pairs: frozenset
    over: frozenset

    def restrict(self, events) -> "LinRelation":
        events = frozenset(events)
        return LinRelation(frozenset(p for p in self.pairs if p[0] in events and p[1] in events), events)

    def preds(self) -> dict:
        out: dict = {e: set() for e in self.over}
        for a, b in self.pairs:
            out[b].add(a)
        return out


def compute_lo(C: Configuration, spec: Optional[MrdtSpec] = None, guard: bool = True) -> LinRelation:
    """Linearization relation of a configuration.

    ``e1 -> e2`` when e1 is visible to e2 and they do not commute, or when
    they are concurrent, e1 rc e2, and e2 is not visible to some later event
    that fails to commute with it. ``guard=False`` drops that last clause;
    it exists only for the partition comparison documented in the notes.
    """
    spec = spec or C.spec
    _require_rc_irreflexive(spec)
    events = sorted(C.events)
    vis = C.vis_plus()
    commutes = spec.commutes
    suppressed = set()
    if guard:
        for e2, e3 in vis:
            if not commutes(e2.op, e3.op):
                suppressed.add(e2)
    pairs = set()
    for e1 in events:
        for e2 in events:
            if e1 == e2:
                continue
            if (e1, e2) in vis:
                if not commutes(e1.op, e2.op):
                    pairs.add((e1, e2))
            elif (e2, e1) not in vis and spec.rc(e1.op, e2.op) and e2 not in suppressed:
                pairs.add((e1, e2))
    return LinRelation(frozenset(pairs), frozenset(events))


def lo_irreflexive(rel: LinRelation) -> bool:
    return all(a != b for a, b in transitive_closure(rel.pairs))


# -- merge partition ----------------------------------------------------------


@dataclass(frozen=True)
class MergePartition:
    ltop: frozenset
    l1_local: frozenset
    l2_local: frozenset
    l1b: frozenset
    l2b: frozenset
    l1a: frozenset
    l2a: frozenset
    ltop_a: frozenset
    ltop_b: frozenset
    buckets: tuple  # (e_top, L1b(e_top), L2b(e_top)) ordered by timestamp of e_top
    lo: LinRelation


def _before_top(local: frozenset, top_event: Event, pairs: frozenset) -> frozenset:
    """Local events lo-before ``top_event`` directly or through one local event."""
    direct = {e for e in local if (e, top_event) in pairs}
    via = {e for e in local for d in direct if (e, d) in pairs}
    return frozenset(direct | via)


def partition_merge_events(
    C: Configuration,
    v1: VersionId,
    v2: VersionId,
    spec: Optional[MrdtSpec] = None,
    mode: str = "guarded",
    rel: Optional[LinRelation] = None,
) -> MergePartition:
    """Split the events of a merge of v1 and v2 around their (resolved) LCA.

    The relation used is lo of the configuration restricted to the merged
    event set; merging adds no events, so the pre-merge configuration gives
    the same relation. ``mode="unguarded"`` uses the rc clause without the
    later-event guard (see :func:`compute_lo`).
    """
    if mode not in ("guarded", "unguarded"):
        raise ValueError(f"unknown partition mode {mode!r}")
    if rel is None:
        rel = compute_lo(C, spec, guard=(mode == "guarded"))
    L1, L2 = C.L[v1], C.L[v2]
    _, ltop = resolve_lca(C, v1, v2)
    lo_m = rel.restrict(L1 | L2)
    pairs = lo_m.pairs
    l1p, l2p = L1 - ltop, L2 - ltop

    def b_side(local: frozenset) -> frozenset:
        out: set = set()
        for t in ltop:
            out |= _before_top(local, t, pairs)
        return frozenset(out)

    l1b, l2b = b_side(l1p), b_side(l2p)
    ltop_a = frozenset(t for t in ltop if any((e, t) in pairs for e in l1b | l2b))
    buckets = []
    seen1: set = set()
    seen2: set = set()
    for t in sorted(ltop_a):
        b1 = _before_top(l1p, t, pairs) - seen1
        b2 = _before_top(l2p, t, pairs) - seen2
        seen1 |= b1
        seen2 |= b2
        buckets.append((t, b1, b2))
    return MergePartition(
        ltop=ltop,
        l1_local=l1p,
        l2_local=l2p,
        l1b=l1b,
        l2b=l2b,
        l1a=l1p - l1b,
        l2a=l2p - l2b,
        ltop_a=ltop_a,
        ltop_b=ltop - ltop_a,
        buckets=tuple(buckets),
        lo=lo_m,
    )


def partition_violations(p: MergePartition) -> list[str]:
    """Edges the bottom-up ordering forbids; empty when the partition is well-shaped."""
    pairs = p.lo.pairs
    out = []
    lb = p.l1b | p.l2b
    la = p.l1a | p.l2a
    for a, b in pairs:
        if a in la and b in lb:
            out.append(f"a-set event {a!r} lo-before b-set event {b!r}")
        if a in p.ltop_a and b in p.ltop_b:
            out.append(f"LCA-a event {a!r} lo-before LCA-b event {b!r}")
        if a in la and b in p.ltop:
            out.append(f"a-set event {a!r} lo-before LCA event {b!r}")
        if a in lb and b in p.ltop_b:
            out.append(f"b-set event {a!r} lo-before LCA-b event {b!r}")
        if a in p.ltop_a and b in p.ltop_a:
            out.append(f"LCA-a events {a!r} and {b!r} are lo-related")
    index = {}
    for i, (_, b1, b2) in enumerate(p.buckets):
        for e in b1 | b2:
            index[e] = i
    for a, b in pairs:
        if a in index and b in index and index[a] > index[b]:
            out.append(f"bucket {index[a]} event {a!r} lo-before bucket {index[b]} event {b!r}")
    covered = frozenset(index)
    if covered != lb:
        out.append("buckets do not cover the b-sets")
    return out


# -- extensions and witnesses -------------------------------------------------


def enumerate_extensions(events, rel: LinRelation, cap: int) -> Iterator[list[Event]]:
    """Yield topological orders of ``events`` under ``rel``, at most ``cap`` of them."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    events = sorted(events)
    rel = rel.restrict(events)
    preds = rel.preds()
    count = 0
    prefix: list = []
    placed: set = set()

    def walk():
        nonlocal count
        if count >= cap:
            return
        if len(prefix) == len(events):
            count += 1
            yield list(prefix)
            return
        for e in events:
            if e in placed or not preds[e] <= placed:
                continue
            prefix.append(e)
            placed.add(e)
            yield from walk()
            placed.discard(e)
            prefix.pop()
            if count >= cap:
                return

    yield from walk()


@dataclass(frozen=True)
class LinVerdict:
    linearizable: Optional[bool]  # None means inconclusive
    witness: Optional[tuple] = None
    violation: Optional[tuple] = None  # (version, expected state, event set)
    explored: int = 0

    @property
    def inconclusive(self) -> bool:
        return self.linearizable is None


def extends(seq, rel: LinRelation) -> bool:
    pos = {e: i for i, e in enumerate(seq)}
    return all(pos[a] < pos[b] for a, b in rel.pairs if a in pos and b in pos)


def find_witness(
    spec: MrdtSpec,
    events,
    rel: LinRelation,
    target: Any,
    node_budget: Optional[int] = None,
) -> tuple[Optional[bool], Optional[tuple], int]:
    """Search for an extension of ``rel`` over ``events`` whose fold reaches ``target``.

    Returns (found, witness, explored). ``found`` is None when the node
    budget ran out before the search space was exhausted.
    """
    events = sorted(events)
    rel = rel.restrict(events)
    preds = rel.preds()
    n = len(events)
    seen: set = set()
    explored = 0
    # iterative DFS over (applied, state); parent links rebuild the witness
    stack = [(frozenset(), spec.sigma0, ())]
    while stack:
        applied, state, path = stack.pop()
        key = (applied, state)
        if key in seen:
            continue
        seen.add(key)
        explored += 1
        if node_budget is not None and explored > node_budget:
            return None, None, explored
        if len(applied) == n:
            if state == target:
                return True, path, explored
            continue
        for e in reversed(events):
            if e in applied or not preds[e] <= applied:
                continue
            stack.append((applied | {e}, apply_event(spec, state, e), path + (e,)))
    return False, None, explored


def _sampled_witness(spec, events, rel, target, budget, rng) -> tuple[bool, Optional[tuple]]:
    events = sorted(events)
    preds = rel.restrict(events).preds()
    for _ in range(budget):
        placed: set = set()
        seq = []
        while len(seq) < len(events):
            ready = [e for e in events if e not in placed and preds[e] <= placed]
            e = rng.choice(ready)
            seq.append(e)
            placed.add(e)
        state = spec.sigma0
        for e in seq:
            state = apply_event(spec, state, e)
        if state == target:
            return True, tuple(seq)
    return False, None


def check_version_linearizable(
    C: Configuration,
    v: VersionId,
    spec: Optional[MrdtSpec] = None,
    budget: int = DEFAULT_BUDGET,
    bound: int = FULL_ENUMERATION_BOUND,
    rel: Optional[LinRelation] = None,
    seed: int = 0,
) -> LinVerdict:
    spec = spec or C.spec
    rel = rel if rel is not None else compute_lo(C, spec)
    events = C.L[v]
    target = C.N[v]
    node_budget = None if len(events) <= bound else budget
    found, witness, explored = find_witness(spec, events, rel, target, node_budget)
    if found is None:
        ok, witness = _sampled_witness(spec, events, rel, target, budget, random.Random(seed))
        found = True if ok else None
    if found:
        return LinVerdict(True, witness=witness, explored=explored)
    if found is None:
        return LinVerdict(None, explored=explored)
    return LinVerdict(False, violation=(v, target, events), explored=explored)


def check_replica_linearizable(
    C: Configuration,
    r: int,
    spec: Optional[MrdtSpec] = None,
    budget: int = DEFAULT_BUDGET,
    bound: int = FULL_ENUMERATION_BOUND,
) -> LinVerdict:
    return check_version_linearizable(C, C.head(r), spec, budget, bound)


# -- convergence and the LCA lemma --------------------------------------------


@dataclass(frozen=True)
class PairVerdict:
    ok: bool
    pair: Optional[tuple] = None
    detail: str = ""


def check_convergence(C: Configuration, only: Optional[set] = None) -> PairVerdict:
    """Versions that saw the same events must hold equal states.

    ``only`` restricts the check to pairs involving the given versions,
    which is how the fuzzer checks each new version once.
    """
    by_events: dict = {}
    for v in C.versions:
        by_events.setdefault(C.L[v], []).append(v)
    for group in by_events.values():
        for v1, v2 in combinations(group, 2):
            if only is not None and v1 not in only and v2 not in only:
                continue
            if C.N[v1] != C.N[v2]:
                return PairVerdict(False, (v1, v2), f"v{v1} and v{v2} saw the same events but differ")
    return PairVerdict(True)


def check_lca_lemma(C: Configuration, only: Optional[set] = None) -> PairVerdict:
    """The (resolved) LCA of two versions saw exactly their common events."""
    for v1, v2 in combinations(C.versions, 2):
        if only is not None and v1 not in only and v2 not in only:
            continue
        _, events = resolve_lca(C, v1, v2)
        if events != C.L[v1] & C.L[v2]:
            return PairVerdict(False, (v1, v2), f"LCA of v{v1}, v{v2} does not carry their common events")
    return PairVerdict(True)


def check_lo_stability(before: Configuration, after: Configuration, spec: Optional[MrdtSpec] = None) -> list[str]:
    """lo on the events of ``before`` may only lose rc-derived pairs when new events arrive."""
    spec = spec or after.spec
    old = compute_lo(before, spec)
    new = compute_lo(after, spec).restrict(old.over)
    vis_old = before.vis_plus()
    problems = []
    if not new.pairs <= old.pairs:
        problems.append(f"new lo pairs on old events: {sorted(new.pairs - old.pairs)!r}")
    for pair in old.pairs - new.pairs:
        if pair in vis_old:
            problems.append(f"visibility-derived pair lost: {pair!r}")
    return problems


@dataclass
class ExecutionVerdicts:
    """Running tally kept by the fuzzer while it walks an execution."""

    configs: int = 0
    versions_checked: int = 0
    non_linearizable: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)
    non_convergent: list = field(default_factory=list)
    lca_violations: list = field(default_factory=list)
    partition_violations: list = field(default_factory=list)
    stability_violations: list = field(default_factory=list)
    query_mismatches: list = field(default_factory=list)
    structure_violations: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(
            self.non_linearizable
            or self.non_convergent
            or self.lca_violations
            or self.partition_violations
            or self.stability_violations
            or self.query_mismatches
            or self.structure_violations
        )
