"""Replicated store: versions, replica heads, event sets and the four transitions.

A :class:`Configuration` is an immutable snapshot. Each transition function
returns a fresh configuration; nothing is mutated in place, so a fuzz run can
keep every intermediate snapshot around for checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional, Union

from .core import Event, MrdtSpec, Operation, QueryOp, State, apply_event, query_state

VersionId = int
ReplicaId = int


class StoreError(ValueError):
    """A transition was attempted on an inactive or already-active replica."""


@dataclass(frozen=True)
class Configuration:
    spec: MrdtSpec
    N: dict  # VersionId -> state
    H: dict  # ReplicaId -> VersionId
    L: dict  # VersionId -> frozenset[Event]
    parents: dict  # VersionId -> tuple[VersionId, ...]
    anc: dict  # VersionId -> frozenset[VersionId], reflexive
    vis: frozenset  # pairs (Event, Event) as generated
    mode: str = "mrdt"
    next_ts: int = 1
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def versions(self) -> list[VersionId]:
        return sorted(self.N)

    @property
    def events(self) -> frozenset:
        got = self._cache.get("events")
        if got is None:
            got = frozenset().union(*self.L.values())
            self._cache["events"] = got
        return got

    @property
    def edges(self) -> set[tuple[VersionId, VersionId]]:
        return {(p, v) for v, ps in self.parents.items() for p in ps}

    def head(self, r: ReplicaId) -> VersionId:
        try:
            return self.H[r]
        except KeyError:
            raise StoreError(f"replica r{r} is not active") from None

    def head_state(self, r: ReplicaId) -> State:
        return self.N[self.head(r)]

    def vis_plus(self) -> frozenset:
        """Transitive closure of vis, memoized on the snapshot."""
        got = self._cache.get("vis_plus")
        if got is None:
            got = transitive_closure(self.vis)
            self._cache["vis_plus"] = got
        return got


def transitive_closure(pairs: Iterable[tuple]) -> frozenset:
    succ: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    out = set()
    for start in list(succ):
        seen: set = set()
        stack = list(succ[start])
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(succ.get(x, ()))
        out.update((start, x) for x in seen)
    return frozenset(out)


def init_config(spec: MrdtSpec, mode: str = "mrdt") -> Configuration:
    if mode not in ("mrdt", "crdt"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "crdt" and spec.merge2 is None:
        raise StoreError(f"{spec.name} has no binary merge")
    return Configuration(
        spec=spec,
        N={0: spec.sigma0},
        H={0: 0},
        L={0: frozenset()},
        parents={0: ()},
        anc={0: frozenset({0})},
        vis=frozenset(),
        mode=mode,
    )


def _add_version(C: Configuration, state, events, parents, **changes) -> tuple[Configuration, VersionId]:
    v = max(C.N) + 1
    anc = frozenset({v}).union(*(C.anc[p] for p in parents))
    C2 = replace(
        C,
        N={**C.N, v: state},
        L={**C.L, v: events},
        parents={**C.parents, v: tuple(parents)},
        anc={**C.anc, v: anc},
        _cache={},
        **changes,
    )
    return C2, v


def create_branch(C: Configuration, r_new: ReplicaId, r_from: ReplicaId) -> Configuration:
    src = C.head(r_from)
    if r_new in C.H:
        raise StoreError(f"replica r{r_new} is already active")
    C2, v = _add_version(C, C.N[src], C.L[src], (src,))
    return replace(C2, H={**C.H, r_new: v}, _cache={})


def apply_op(C: Configuration, r: ReplicaId, op: Operation, ts: Optional[int] = None) -> tuple[Configuration, Event]:
    """Apply ``op`` at replica ``r`` with a fresh timestamp (or the given one, for replay)."""
    v0 = C.head(r)
    if ts is None:
        ts = C.next_ts
    elif any(e.ts == ts for e in C.events):
        raise StoreError(f"timestamp {ts} is already in use")
    e = Event(ts, r, op)
    state = apply_event(C.spec, C.N[v0], e)
    vis = C.vis | frozenset((x, e) for x in C.L[v0])
    C2, v = _add_version(C, state, C.L[v0] | {e}, (v0,), vis=vis, next_ts=max(C.next_ts, ts + 1))
    return replace(C2, H={**C.H, r: v}, _cache={}), e


def merge_replicas(C: Configuration, r1: ReplicaId, r2: ReplicaId) -> Configuration:
    """Merge r2's head into r1; only r1 moves to the new version."""
    v1, v2 = C.head(r1), C.head(r2)
    lca_state, _ = resolve_lca(C, v1, v2)
    state = C.spec.merge(lca_state, C.N[v1], C.N[v2], C.mode)
    C2, v = _add_version(C, state, C.L[v1] | C.L[v2], (v1, v2))
    return replace(C2, H={**C.H, r1: v}, _cache={})


def query_replica(C: Configuration, r: ReplicaId, q: QueryOp) -> Any:
    return query_state(C.spec, C.head_state(r), q)


# -- LCA ----------------------------------------------------------------------


def _check_version(C: Configuration, v: VersionId) -> None:
    if v not in C.N:
        raise StoreError(f"unknown version v{v}")


def _maximal(C: Configuration, common: frozenset) -> list[VersionId]:
    """Common ancestors not strictly below another common ancestor."""
    below: set = set()
    for c in common:
        below |= C.anc[c] - {c}
    return sorted(common - below)


def potential_lcas(C: Configuration, v1: VersionId, v2: VersionId) -> list[VersionId]:
    _check_version(C, v1)
    _check_version(C, v2)
    return _maximal(C, C.anc[v1] & C.anc[v2])


def find_lca(C: Configuration, v1: VersionId, v2: VersionId) -> Optional[VersionId]:
    cands = potential_lcas(C, v1, v2)
    return cands[0] if len(cands) == 1 else None


def _resolve(C: Configuration, anc1: frozenset, anc2: frozenset) -> tuple[State, frozenset]:
    cands = _maximal(C, anc1 & anc2)
    first = cands[0]
    state, events, anc = C.N[first], C.L[first], C.anc[first]
    for q in cands[1:]:
        lca_state, _ = _resolve(C, anc, C.anc[q])
        state = C.spec.merge(lca_state, state, C.N[q], C.mode)
        events = events | C.L[q]
        anc = anc | C.anc[q]
    return state, events


def resolve_lca(C: Configuration, v1: VersionId, v2: VersionId) -> tuple[State, frozenset]:
    """State and event set of the (possibly virtual) ancestor used to merge v1 and v2.

    With several potential LCAs they are merged pairwise in ascending version
    order, each step using the recursively resolved ancestor of the pair.
    """
    _check_version(C, v1)
    _check_version(C, v2)
    return _resolve(C, C.anc[v1], C.anc[v2])


def resolve_lca_state(C: Configuration, v1: VersionId, v2: VersionId) -> State:
    return resolve_lca(C, v1, v2)[0]


# -- transitions as data ------------------------------------------------------


@dataclass(frozen=True)
class CreateBranch:
    new: ReplicaId
    src: ReplicaId


@dataclass(frozen=True)
class Apply:
    r: ReplicaId
    op: Operation
    ts: Optional[int] = None


@dataclass(frozen=True)
class Merge:
    r1: ReplicaId
    r2: ReplicaId


_UNSET = object()


@dataclass(frozen=True)
class Query:
    r: ReplicaId
    q: QueryOp
    expected: Any = _UNSET

    @property
    def has_expected(self) -> bool:
        return self.expected is not _UNSET


Transition = Union[CreateBranch, Apply, Merge, Query]


def step(C: Configuration, tr: Transition) -> tuple[Configuration, Any]:
    """Run one transition. The result is the new event for Apply, the answer for Query."""
    if isinstance(tr, CreateBranch):
        return create_branch(C, tr.new, tr.src), None
    if isinstance(tr, Apply):
        return apply_op(C, tr.r, tr.op, tr.ts)
    if isinstance(tr, Merge):
        return merge_replicas(C, tr.r1, tr.r2), None
    if isinstance(tr, Query):
        return C, query_replica(C, tr.r, tr.q)
    raise TypeError(f"not a transition: {tr!r}")


def run(spec: MrdtSpec, transitions: Iterable[Transition], mode: str = "mrdt") -> list[Configuration]:
    """Run a schedule from the initial configuration; returns every snapshot, initial included."""
    C = init_config(spec, mode)
    out = [C]
    for tr in transitions:
        C, _ = step(C, tr)
        out.append(C)
    return out


# -- structural invariants ----------------------------------------------------


def check_structure(C: Configuration) -> list[str]:
    """Return violated structural invariants (empty when all hold)."""
    problems = []
    for v, ps in C.parents.items():
        for p in ps:
            if p >= v:
                problems.append(f"edge v{p}->v{v} does not point forward")
            if not C.L[p] <= C.L[v]:
                problems.append(f"L(v{p}) not contained in L(v{v})")
    if set(C.N) != set(C.L) or set(C.N) != set(C.parents):
        problems.append("version maps disagree on their domain")
    for r, v in C.H.items():
        if v not in C.N:
            problems.append(f"head of r{r} is not a version")
    vis_plus = C.vis_plus()
    for a, b in vis_plus:
        if a == b:
            problems.append(f"vis cycle through {a!r}")
    for v, evs in C.L.items():
        for a, b in vis_plus:
            if b in evs and a not in evs:
                problems.append(f"v{v} not causally closed: {a!r} before {b!r}")
                break
    ts = [e.ts for e in C.events]
    if len(ts) != len(set(ts)):
        problems.append("duplicate timestamps")
    if ts and max(ts) >= C.next_ts:
        problems.append("timestamp allocator behind used timestamps")
    return problems
