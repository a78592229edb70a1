"""Events, event sequences and the datatype interface shared by every catalog entry.

Operations and queries are plain tuples such as ``("add", "a")`` or
``("rd",)``; states are immutable Python values (ints, tuples, frozensets)
so structural equality and hashing come for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

Operation = tuple
QueryOp = tuple
State = Hashable

DEFAULT_ALPHABET: tuple[str, ...] = ("a", "b", "c", "d", "e")


class SpecMismatch(ValueError):
    """An operation or query does not belong to the datatype's alphabet."""


class ConstraintViolation(ValueError):
    """A datatype breaks a structural requirement (e.g. reflexive rc closure)."""


@dataclass(frozen=True, eq=False)
class Event:
    """One update-operation instance.

    Identity is the timestamp alone: two events compare equal iff their
    timestamps do, whatever replica or operation they carry.
    """

    ts: int
    rep: int
    op: Operation

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Event):
            return NotImplemented
        return self.ts == other.ts

    def __hash__(self) -> int:
        return hash(self.ts)

    def __lt__(self, other: "Event") -> bool:
        return self.ts < other.ts

    def __repr__(self) -> str:
        return f"Event(t={self.ts}, r={self.rep}, {format_op(self.op)})"


def format_op(op: Any) -> str:
    if isinstance(op, tuple) and op:
        head, *args = op
        if not args:
            return str(head)
        return f"{head}({', '.join(format_op(a) for a in args)})"
    return str(op)


@dataclass(frozen=True)
class MrdtSpec:
    """A datatype bundle: states, initial state, update, merges, queries, rc.

    ``merge2`` is only present for datatypes usable in state-based (CRDT)
    mode. ``ops`` is the finite operation alphabet used by generators and by
    the exhaustive side-condition checks.
    """

    name: str
    sigma0: State
    do: Callable[[State, Event], State]
    merge3: Callable[[State, State, State], State]
    query: Callable[[State, QueryOp], Any]
    queries: tuple[QueryOp, ...]
    ops: tuple[Operation, ...]
    rc: Callable[[Operation, Operation], bool]
    commutes: Callable[[Operation, Operation], bool]
    merge2: Optional[Callable[[State, State], State]] = None
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET
    doc: str = ""
    _opset: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_opset", frozenset(self.ops))

    def has_op(self, op: Operation) -> bool:
        return op in self._opset

    def merge(self, lca: State, a: State, b: State, mode: str = "mrdt") -> State:
        """Merge in the given mode; CRDT mode drops the ancestor argument."""
        if mode == "crdt":
            if self.merge2 is None:
                raise SpecMismatch(f"{self.name} has no binary merge")
            return self.merge2(a, b)
        return self.merge3(lca, a, b)


def apply_event(spec: MrdtSpec, sigma: State, e: Event) -> State:
    if not spec.has_op(e.op):
        raise SpecMismatch(f"{format_op(e.op)} is not an operation of {spec.name}")
    return spec.do(sigma, e)


def apply_sequence(spec: MrdtSpec, sigma: State, pi: Iterable[Event]) -> State:
    return reduce(lambda s, e: apply_event(spec, s, e), pi, sigma)


def query_state(spec: MrdtSpec, sigma: State, q: QueryOp) -> Any:
    if q not in spec.queries:
        raise SpecMismatch(f"{format_op(q)} is not a query of {spec.name}")
    return spec.query(sigma, q)


def check_sequence(pi: Sequence[Event]) -> None:
    """Reject sequences that repeat a timestamp."""
    seen = set()
    for e in pi:
        if e.ts in seen:
            raise ValueError(f"duplicate timestamp {e.ts} in event sequence")
        seen.add(e.ts)


def rc_closure_irreflexive(spec: MrdtSpec) -> bool:
    """True iff the transitive closure of rc over the op alphabet has no self-loop."""
    succ = {o: [p for p in spec.ops if spec.rc(o, p)] for o in spec.ops}
    for start in spec.ops:
        stack = list(succ[start])
        seen = set()
        while stack:
            o = stack.pop()
            if o == start:
                return False
            if o in seen:
                continue
            seen.add(o)
            stack.extend(succ[o])
    return True


def canon(value: Any) -> Any:
    """JSON-friendly canonical form: sets become sorted lists, tuples lists."""
    if isinstance(value, (frozenset, set)):
        items = [canon(v) for v in value]
        return sorted(items, key=_sort_key)
    if isinstance(value, (tuple, list)):
        return [canon(v) for v in value]
    if isinstance(value, dict):
        return [[canon(k), canon(v)] for k, v in sorted(value.items(), key=lambda kv: _sort_key(canon(kv[0])))]
    return value


def _sort_key(v: Any) -> tuple:
    if isinstance(v, bool):
        return (0, int(v), "")
    if isinstance(v, int):
        return (1, v, "")
    if isinstance(v, str):
        return (2, 0, v)
    if v is None:
        return (-1, 0, "")
    return (3, 0, repr(v))
