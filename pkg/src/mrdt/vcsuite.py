"""Property-based checking of the merge verification conditions.

Each condition is a row: a side condition over operations, an optional
pre-condition equation and a post-condition equation over merge inputs built
from a generated feasible triple (l, a, b) plus a handful of fresh events.
A case counts when the pre-condition holds; it fails when the
post-condition then does not.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Optional

from .core import Event, MrdtSpec, apply_event, apply_sequence, canon, format_op

DEFAULT_CASES = 1000
VACUITY_THRESHOLD = 0.10
DEFAULT_BOUNDS = (4, 3, 3)


# -- feasible states ----------------------------------------------------------


@dataclass(frozen=True)
class FeasibleTriple:
    """l = pi_top(sigma0), a = pi1(l), b = pi2(l)."""

    l: Any
    a: Any
    b: Any
    pi_top: tuple
    pi1: tuple
    pi2: tuple

    @property
    def max_ts(self) -> int:
        return max((e.ts for e in self.pi_top + self.pi1 + self.pi2), default=0)


def gen_feasible_triple(spec: MrdtSpec, rng_seed=None, size_bounds=(0, 0, 0), rng: Optional[random.Random] = None) -> FeasibleTriple:
    """Draw sequences of exactly the given lengths and fold them.

    LCA events come from replicas 0-2, branch a events from replica 1 and
    branch b events from replica 2, so each replica's own events stay in
    one causal chain as they would in a real execution.
    """
    if any(n < 0 for n in size_bounds):
        raise ValueError("size bounds must be non-negative")
    rng = rng or random.Random(rng_seed)
    n0, n1, n2 = size_bounds
    ts_branch = list(range(n0 + 1, n0 + n1 + n2 + 1))
    rng.shuffle(ts_branch)
    pi_top = tuple(Event(i + 1, rng.randrange(3), rng.choice(spec.ops)) for i in range(n0))
    pi1 = tuple(Event(ts_branch[i], 1, rng.choice(spec.ops)) for i in range(n1))
    pi2 = tuple(Event(ts_branch[n1 + i], 2, rng.choice(spec.ops)) for i in range(n2))
    l = apply_sequence(spec, spec.sigma0, pi_top)
    return FeasibleTriple(l, apply_sequence(spec, l, pi1), apply_sequence(spec, l, pi2), pi_top, pi1, pi2)


# -- rows ---------------------------------------------------------------------


class Ctx:
    """Evaluation context handed to row equations."""

    def __init__(self, spec: MrdtSpec, merge: Callable, triple: FeasibleTriple, events: dict):
        self.spec = spec
        self.m = merge
        self.s0 = spec.sigma0
        self.l, self.a, self.b = triple.l, triple.a, triple.b
        self.events = events

    def x(self, state, *names):
        """Apply named events as a composition: x(s, "e1", "etop") = e1(etop(s))."""
        for name in reversed(names):
            e = self.events[name]
            if e is not None:
                state = apply_event(self.spec, state, e)
        return state


Equation = Callable[[Ctx], tuple]


@dataclass(frozen=True)
class VcRow:
    id: str
    display: str
    family: str
    post: Equation
    pre: Optional[Equation] = None
    constraints: tuple = ()
    events: tuple = ()
    replicas: tuple = ()  # (name, replica) pairs
    eps_ok: bool = False
    optional: bool = False
    implicit: tuple = ()  # side conditions the printed row leaves out


RC_OR_COMM = ("rc_or_comm", "e2", "e1")


def _row(id, display, family, post, pre=None, constraints=(), events=(), replicas=None, eps_ok=False,
         optional=False, implicit=()):
    if replicas is None:
        replicas = {}
    return VcRow(id, display, family, post, pre, tuple(constraints), tuple(events),
                 tuple(sorted(replicas.items())), eps_ok, optional, tuple(implicit))


def _rows() -> list[VcRow]:
    rows = [
        _row("merge-commutativity", "MergeCommutativity", "merge",
             post=lambda c: (c.m(c.l, c.a, c.b), c.m(c.l, c.b, c.a))),
        _row("merge-idempotence", "MergeIdempotence", "merge",
             post=lambda c: (c.m(c.a, c.a, c.a), c.a)),
    ]

    # two local sides, e1 on a and e2 on b
    rep2 = {"e1": 1, "e2": 2, "e1p": 1, "e2p": 2, "etop": 0}

    def top(c):
        return c.x(c.l, "etop")

    def pre_top_2(c):
        return (c.m(top(c), c.x(c.a, "e1", "etop"), c.x(c.b, "e2", "etop")),
                c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "e2", "etop")), "e1"))

    def l1b_ind1_2(c):
        return (c.m(top(c), c.x(c.a, "e1", "etop", "eb"), c.x(c.b, "e2", "etop")),
                c.x(c.m(top(c), c.x(c.a, "etop", "eb"), c.x(c.b, "e2", "etop")), "e1"))

    def plain_2(c):
        return (c.m(c.l, c.x(c.a, "e1"), c.x(c.b, "e2")), c.x(c.m(c.l, c.a, c.x(c.b, "e2")), "e1"))

    rows += [
        _row("Ltopb-base-2op", "ψ^{L⊤ᵇ}_{base-2op}", "2op",
             post=lambda c: (c.m(c.s0, c.x(c.s0, "e1"), c.x(c.s0, "e2")),
                             c.x(c.m(c.s0, c.s0, c.x(c.s0, "e2")), "e1")),
             constraints=[RC_OR_COMM], events=("e1", "e2"), replicas=rep2),
        _row("Ltopb-ind-2op", "ψ^{L⊤ᵇ}_{ind-2op}", "2op",
             pre=lambda c: (c.m(c.l, c.x(c.l, "e1"), c.x(c.l, "e2")),
                            c.x(c.m(c.l, c.l, c.x(c.l, "e2")), "e1")),
             post=lambda c: (c.m(top(c), c.x(c.l, "e1", "etop"), c.x(c.l, "e2", "etop")),
                             c.x(c.m(top(c), top(c), c.x(c.l, "e2", "etop")), "e1")),
             constraints=[RC_OR_COMM], events=("e1", "e2", "etop"), replicas=rep2),
        _row("Ltopa-ind-2op", "ψ^{L⊤ᵃ}_{ind-2op}", "2op",
             pre=plain_2, post=pre_top_2,
             constraints=[RC_OR_COMM, ("rc_into", "etop")], events=("e1", "e2", "etop"), replicas=rep2),
        _row("L1b-ind1-2op", "ψ^{L₁ᵇ}_{ind1-2op}", "2op",
             pre=pre_top_2, post=l1b_ind1_2,
             constraints=[RC_OR_COMM, ("rc", "eb", "etop")], events=("e1", "e2", "etop", "eb"),
             replicas={**rep2, "eb": 1}),
        _row("L1b-ind2-2op", "ψ^{L₁ᵇ}_{ind2-2op}", "2op",
             pre=l1b_ind1_2,
             post=lambda c: (c.m(top(c), c.x(c.a, "e1", "etop", "eb", "e"), c.x(c.b, "e2", "etop")),
                             c.x(c.m(top(c), c.x(c.a, "etop", "eb", "e"), c.x(c.b, "e2", "etop")), "e1")),
             constraints=[RC_OR_COMM, ("rc", "eb", "etop"), ("noncomm_or_rc", "e", "eb", "etop")],
             events=("e1", "e2", "etop", "eb", "e"), replicas={**rep2, "eb": 1, "e": 1}),
        _row("L2b-ind1-2op", "ψ^{L₂ᵇ}_{ind1-2op}", "2op",
             pre=pre_top_2,
             post=lambda c: (c.m(top(c), c.x(c.a, "e1", "etop"), c.x(c.b, "e2", "etop", "eb")),
                             c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "e2", "etop", "eb")), "e1")),
             constraints=[RC_OR_COMM, ("rc", "eb", "etop")], events=("e1", "e2", "etop", "eb"),
             replicas={**rep2, "eb": 2}),
        # printed with the same shape as the first-side ind1 row; kept as printed
        _row("L2b-ind2-2op", "ψ^{L₂ᵇ}_{ind2-2op}", "2op",
             pre=pre_top_2, post=l1b_ind1_2,
             constraints=[RC_OR_COMM, ("rc", "eb", "etop")], events=("e1", "e2", "etop", "eb"),
             replicas={**rep2, "eb": 1}),
        _row("L1a-ind-2op", "ψ^{L₁ᵃ}_{ind-2op}", "2op",
             pre=plain_2,
             post=lambda c: (c.m(c.l, c.x(c.a, "e1", "e1p"), c.x(c.b, "e2")),
                             c.x(c.m(c.l, c.x(c.a, "e1p"), c.x(c.b, "e2")), "e1")),
             constraints=[RC_OR_COMM], events=("e1", "e2", "e1p"), replicas=rep2),
        _row("L2a-ind-2op", "ψ^{L₂ᵃ}_{ind-2op}", "2op",
             pre=plain_2,
             post=lambda c: (c.m(c.l, c.x(c.a, "e1"), c.x(c.b, "e2", "e2p")),
                             c.x(c.m(c.l, c.a, c.x(c.b, "e2", "e2p")), "e1")),
             constraints=[RC_OR_COMM], events=("e1", "e2", "e2p"), replicas=rep2,
             implicit=[("rc_or_comm", "e2p", "e1")]),
    ]

    # one local side: e1 on a, b carries LCA events only
    rep1 = {"e1": 1, "e1p": 1, "etop": 0, "etop2": 3}

    def pre_top_1(c):
        return (c.m(top(c), c.x(c.a, "e1", "etop"), c.x(c.b, "etop")),
                c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "etop")), "e1"))

    def l1b_ind1_1(c):
        return (c.m(top(c), c.x(c.a, "e1", "etop", "eb"), c.x(c.b, "etop")),
                c.x(c.m(top(c), c.x(c.a, "etop", "eb"), c.x(c.b, "etop")), "e1"))

    def l2b_ind1_1(c):
        return (c.m(top(c), c.x(c.a, "e1", "etop"), c.x(c.b, "etop", "eb")),
                c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "etop", "eb")), "e1"))

    def l1a_pre_1(c):
        return (c.m(top(c), c.x(c.a, "e1"), c.x(c.b, "etop")),
                c.x(c.m(top(c), c.a, c.x(c.b, "etop")), "e1"))

    rb = ("rc", "eb", "etop")
    ind2 = ("noncomm_or_rc", "e", "eb", "etop")
    rows += [
        _row("Ltopb-base-1op", "ψ^{L⊤ᵇ}_{base-1op}", "1op",
             post=lambda c: (c.m(c.s0, c.x(c.s0, "e1"), c.s0), c.x(c.m(c.s0, c.s0, c.s0), "e1")),
             events=("e1",), replicas=rep1),
        _row("Ltopb-ind-1op", "ψ^{L⊤ᵇ}_{ind-1op}", "1op",
             pre=lambda c: (c.m(c.l, c.x(c.l, "e1"), c.l), c.x(c.m(c.l, c.l, c.l), "e1")),
             post=lambda c: (c.m(top(c), c.x(c.l, "e1", "etop"), top(c)),
                             c.x(c.m(top(c), top(c), top(c)), "e1")),
             events=("e1", "etop"), replicas=rep1, eps_ok=True),
        _row("Ltopa-ind-1op", "ψ^{L⊤ᵃ}_{ind-1op}", "1op",
             pre=lambda c: (c.m(c.x(c.l, "etop2"), c.x(c.a, "e1"), c.x(c.b, "etop2")),
                            c.x(c.m(c.x(c.l, "etop2"), c.a, c.x(c.b, "etop2")), "e1")),
             post=lambda c: (c.m(c.x(c.l, "etop", "etop2"), c.x(c.a, "e1", "etop"), c.x(c.b, "etop", "etop2")),
                             c.x(c.m(c.x(c.l, "etop", "etop2"), c.x(c.a, "etop"), c.x(c.b, "etop", "etop2")), "e1")),
             constraints=[("rc_into", "etop")], events=("e1", "etop", "etop2"), replicas=rep1),
        _row("L1b-ind1-1op", "ψ^{L₁ᵇ}_{ind1-1op}", "1op",
             pre=pre_top_1, post=l1b_ind1_1,
             constraints=[rb], events=("e1", "etop", "eb"), replicas={**rep1, "eb": 1}),
        _row("L1b-ind2-1op", "ψ^{L₁ᵇ}_{ind2-1op}", "1op",
             pre=l1b_ind1_1,
             post=lambda c: (c.m(top(c), c.x(c.a, "e1", "etop", "eb", "e"), c.x(c.b, "etop")),
                             c.x(c.m(top(c), c.x(c.a, "etop", "eb", "e"), c.x(c.b, "etop")), "e1")),
             constraints=[rb, ind2], events=("e1", "etop", "eb", "e"), replicas={**rep1, "eb": 1, "e": 1}),
        _row("L2b-ind1-1op", "ψ^{L₂ᵇ}_{ind1-1op}", "1op",
             pre=pre_top_1, post=l2b_ind1_1,
             constraints=[rb], events=("e1", "etop", "eb"), replicas={**rep1, "eb": 2}),
        _row("L2b-ind2-1op", "ψ^{L₂ᵇ}_{ind2-1op}", "1op",
             pre=l2b_ind1_1,
             post=lambda c: (c.m(top(c), c.x(c.a, "e1", "etop"), c.x(c.b, "etop", "eb", "e")),
                             c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "etop", "eb", "e")), "e1")),
             constraints=[rb, ind2], events=("e1", "etop", "eb", "e"), replicas={**rep1, "eb": 2, "e": 2}),
        _row("L1a-ind-1op", "ψ^{L₁ᵃ}_{ind-1op}", "1op",
             pre=l1a_pre_1,
             post=lambda c: (c.m(top(c), c.x(c.a, "e1", "e1p"), c.x(c.b, "etop")),
                             c.x(c.m(top(c), c.x(c.a, "e1p"), c.x(c.b, "etop")), "e1")),
             events=("e1", "e1p", "etop"), replicas=rep1, eps_ok=True),
        # mirror of the row above with the local side on b; not part of the printed table
        _row("L2a-ind-1op", "ψ^{L₂ᵃ}_{ind-1op}", "1op",
             pre=lambda c: (c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "e1")),
                            c.x(c.m(top(c), c.x(c.a, "etop"), c.b), "e1")),
             post=lambda c: (c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "e1", "e1p")),
                             c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "e1p")), "e1")),
             events=("e1", "e1p", "etop"), replicas={"e1": 2, "e1p": 2, "etop": 0}, optional=True),
    ]

    # no local side: e1 is an LCA event applied to all three arguments
    rep0 = {"e1": 0, "etop": 0}

    def all_e1(c):
        return (c.m(c.x(c.l, "e1"), c.x(c.a, "e1"), c.x(c.b, "e1")), c.x(c.m(c.l, c.a, c.b), "e1"))

    def l1b_ind1_0(c):
        return (c.m(c.x(c.l, "e1"), c.x(c.a, "e1", "eb"), c.x(c.b, "e1")),
                c.x(c.m(c.l, c.x(c.a, "eb"), c.b), "e1"))

    def l2b_ind1_0(c):
        return (c.m(c.x(c.l, "e1"), c.x(c.a, "e1"), c.x(c.b, "e1", "eb")),
                c.x(c.m(c.l, c.a, c.x(c.b, "eb")), "e1"))

    ind2_0 = ("noncomm_or_rc", "e", "eb", "e1")
    rows += [
        _row("Ltopb-base-0op", "ψ^{L⊤ᵇ}_{base-0op}", "0op",
             post=lambda c: (c.m(c.x(c.s0, "e1"), c.x(c.s0, "e1"), c.x(c.s0, "e1")),
                             c.x(c.m(c.s0, c.s0, c.s0), "e1")),
             events=("e1",), replicas=rep0),
        _row("Ltopb-ind-0op", "ψ^{L⊤ᵇ}_{ind-0op}", "0op",
             pre=lambda c: (c.m(c.x(c.l, "e1"), c.x(c.l, "e1"), c.x(c.l, "e1")), c.x(c.m(c.l, c.l, c.l), "e1")),
             post=lambda c: (c.m(c.x(c.l, "e1", "etop"), c.x(c.l, "e1", "etop"), c.x(c.l, "e1", "etop")),
                             c.x(c.m(top(c), top(c), top(c)), "e1")),
             events=("e1", "etop"), replicas=rep0),
        _row("Ltopa-ind-0op", "ψ^{L⊤ᵃ}_{ind-0op}", "0op",
             pre=all_e1,
             post=lambda c: (c.m(c.x(c.l, "e1", "etop"), c.x(c.a, "e1", "etop"), c.x(c.b, "e1", "etop")),
                             c.x(c.m(top(c), c.x(c.a, "etop"), c.x(c.b, "etop")), "e1")),
             constraints=[("rc_into", "etop")], events=("e1", "etop"), replicas=rep0),
        _row("L1b-ind1-0op", "ψ^{L₁ᵇ}_{ind1-0op}", "0op",
             pre=all_e1, post=l1b_ind1_0, events=("e1", "eb"), replicas={**rep0, "eb": 1}),
        _row("L1b-ind2-0op", "ψ^{L₁ᵇ}_{ind2-0op}", "0op",
             pre=l1b_ind1_0,
             post=lambda c: (c.m(c.x(c.l, "e1"), c.x(c.a, "e1", "eb", "e"), c.x(c.b, "e1")),
                             c.x(c.m(c.l, c.x(c.a, "eb", "e"), c.b), "e1")),
             constraints=[ind2_0], events=("e1", "eb", "e"), replicas={**rep0, "eb": 1, "e": 1}),
        _row("L2b-ind1-0op", "ψ^{L₂ᵇ}_{ind1-0op}", "0op",
             pre=all_e1, post=l2b_ind1_0, events=("e1", "eb"), replicas={**rep0, "eb": 2}),
        _row("L2b-ind2-0op", "ψ^{L₂ᵇ}_{ind2-0op}", "0op",
             pre=l2b_ind1_0,
             post=lambda c: (c.m(c.x(c.l, "e1"), c.x(c.a, "e1"), c.x(c.b, "e1", "eb", "e")),
                             c.x(c.m(c.l, c.a, c.x(c.b, "eb", "e")), "e1")),
             constraints=[ind2_0], events=("e1", "eb", "e"), replicas={**rep0, "eb": 2, "e": 2}),
    ]
    return rows


ROWS: tuple[VcRow, ...] = tuple(_rows())
ROW_BY_ID: dict[str, VcRow] = {r.id: r for r in ROWS}
PRINTED_ROWS: tuple[str, ...] = tuple(r.id for r in ROWS if not r.optional)


def row_ids(include_optional: bool = False) -> list[str]:
    return [r.id for r in ROWS if include_optional or not r.optional]


# -- side conditions over operations ------------------------------------------


def _holds(spec: MrdtSpec, cons: tuple, ops: dict) -> bool:
    kind = cons[0]
    if kind == "rc_or_comm":
        o1, o2 = ops[cons[1]], ops[cons[2]]
        return spec.rc(o1, o2) or spec.commutes(o1, o2)
    if kind == "rc":
        return spec.rc(ops[cons[1]], ops[cons[2]])
    if kind == "rc_into":
        target = ops[cons[1]]
        return any(spec.rc(o, target) for o in spec.ops)
    if kind == "noncomm_or_rc":
        return not spec.commutes(ops[cons[1]], ops[cons[2]]) or spec.rc(ops[cons[1]], ops[cons[3]])
    raise ValueError(f"unknown constraint {kind!r}")


def _constraints(row: VcRow, as_printed: bool) -> tuple:
    return row.constraints if as_printed else row.constraints + row.implicit


def _components(row: VcRow, as_printed: bool = False) -> list[tuple[tuple, list]]:
    """Group constrained event names into connected components."""
    groups: list[set] = []
    constraints = _constraints(row, as_printed)
    for cons in constraints:
        names = {n for n in cons[1:]}
        merged = [g for g in groups if g & names]
        for g in merged:
            groups.remove(g)
            names |= g
        groups.append(names)
    return [(tuple(sorted(g)), [c for c in constraints if set(c[1:]) <= g]) for g in groups]


_solutions: dict = {}


def satisfying_assignments(spec: MrdtSpec, row: VcRow, as_printed: bool = False) -> Optional[list[tuple[tuple, list]]]:
    """Per component, every op tuple meeting the side condition; None if some component has none."""
    key = (id(spec), row.id, as_printed)
    hit = _solutions.get(key)
    if hit is not None and hit[0] is spec:
        return hit[1]
    out = []
    for names, cons in _components(row, as_printed):
        sols = []
        for combo in product(spec.ops, repeat=len(names)):
            ops = dict(zip(names, combo))
            if all(_holds(spec, c, ops) for c in cons):
                sols.append(combo)
        if not sols:
            out = None
            break
        out.append((names, sols))
    _solutions[key] = (spec, out)
    return out


# -- reports ------------------------------------------------------------------


@dataclass
class Counterexample:
    row: str
    triple: FeasibleTriple
    events: dict
    lhs: Any
    rhs: Any
    case: int
    seed: Any
    mode: str

    def replay(self, spec: MrdtSpec) -> tuple[Any, Any]:
        """Re-evaluate the post-condition on the recorded inputs."""
        ctx = Ctx(spec, merge_for(spec, self.mode), self.triple, self.events)
        return ROW_BY_ID[self.row].post(ctx)

    def to_json(self) -> dict:
        def ev(e):
            return None if e is None else {"ts": e.ts, "rep": e.rep, "op": canon(e.op)}

        return {
            "row": self.row,
            "case": self.case,
            "seed": self.seed,
            "mode": self.mode,
            "pi_top": [ev(e) for e in self.triple.pi_top],
            "pi1": [ev(e) for e in self.triple.pi1],
            "pi2": [ev(e) for e in self.triple.pi2],
            "l": canon(self.triple.l),
            "a": canon(self.triple.a),
            "b": canon(self.triple.b),
            "events": {k: ev(v) for k, v in sorted(self.events.items())},
            "lhs": canon(self.lhs),
            "rhs": canon(self.rhs),
        }

    @classmethod
    def from_json(cls, spec: MrdtSpec, d: dict) -> "Counterexample":
        """Rebuild from :meth:`to_json` output; states are recomputed from the recorded sequences."""

        def ev(x):
            if x is None:
                return None
            op = x["op"]
            return Event(x["ts"], x["rep"], tuple(op) if isinstance(op, list) else op)

        pi_top = tuple(ev(x) for x in d["pi_top"])
        pi1 = tuple(ev(x) for x in d["pi1"])
        pi2 = tuple(ev(x) for x in d["pi2"])
        l = apply_sequence(spec, spec.sigma0, pi_top)
        triple = FeasibleTriple(l, apply_sequence(spec, l, pi1), apply_sequence(spec, l, pi2), pi_top, pi1, pi2)
        # eps rows substitute b = l without an etop event
        if canon(triple.b) != d["b"] and d["b"] == canon(l):
            triple = FeasibleTriple(l, triple.a, l, pi_top, pi1, ())
        for k in ("l", "a", "b"):
            if canon(getattr(triple, k)) != d[k]:
                raise ValueError(f"recorded state {k} does not match its event sequence")
        events = {k: ev(v) for k, v in d["events"].items()}
        return cls(d["row"], triple, events, d.get("lhs"), d.get("rhs"), d.get("case", 0), d.get("seed"),
                   d.get("mode", "mrdt"))

    def describe(self) -> str:
        evs =", ".join(f"{k}={'ε' if v is None else format_op(v.op)}" for k, v in sorted(self.events.items()))
        return f"l={canon(self.triple.l)} a={canon(self.triple.a)} b={canon(self.triple.b)} {evs}: {canon(self.lhs)} != {canon(self.rhs)}"


@dataclass
class VcReport:
    vc_name: str
    display: str = ""
    cases_run: int = 0
    cases_pre_satisfied: int = 0
    cases_failed: int = 0
    vacuous: bool = False  # side condition unsatisfiable over the alphabet
    first_counterexample: Optional[Counterexample] = None
    note: str = ""
    threshold: float = VACUITY_THRESHOLD

    @property
    def pre_rate(self) -> float:
        return self.cases_pre_satisfied / self.cases_run if self.cases_run else 0.0

    @property
    def low_coverage(self) -> bool:
        return not self.vacuous and self.cases_run > 0 and self.pre_rate < self.threshold

    @property
    def passed(self) -> bool:
        return self.cases_failed == 0 and not self.low_coverage

    def to_json(self) -> dict:
        out = {
            "vc": self.vc_name,
            "display": self.display or self.vc_name,
            "passed": self.passed,
            "cases_run": self.cases_run,
            "cases_pre_satisfied": self.cases_pre_satisfied,
            "cases_failed": self.cases_failed,
            "pre_rate": round(self.pre_rate, 4),
            "vacuous": self.vacuous,
            "low_coverage": self.low_coverage,
        }
        if self.note:
            out["note"] = self.note
        if self.first_counterexample is not None:
            out["counterexample"] = self.first_counterexample.to_json()
        return out


def merge_for(spec: MrdtSpec, mode: str) -> Callable:
    if mode == "crdt":
        if spec.merge2 is None:
            raise ValueError(f"{spec.name} has no binary merge")
        m2 = spec.merge2
        return lambda l, a, b: m2(a, b)
    if mode != "mrdt":
        raise ValueError(f"unknown mode {mode!r}")
    return spec.merge3


def _random_bounds(rng: random.Random, bounds: tuple) -> tuple:
    return tuple(rng.randint(0, n) for n in bounds)


def _draw_events(spec: MrdtSpec, row: VcRow, sols, rng: random.Random, first_ts: int) -> dict:
    ops: dict = {}
    for names, choices in sols:
        ops.update(zip(names, rng.choice(choices)))
    for name in row.events:
        if name not in ops:
            ops[name] = rng.choice(spec.ops)
    reps = dict(row.replicas)
    stamps = list(range(first_ts, first_ts + len(row.events)))
    rng.shuffle(stamps)
    return {name: Event(ts, reps.get(name, 0), ops[name]) for name, ts in zip(row.events, stamps)}


def run_vc(
    spec: MrdtSpec,
    vc_name: str,
    mode: str = "mrdt",
    cases: int = DEFAULT_CASES,
    rng_seed: Any = 0,
    bounds: tuple = DEFAULT_BOUNDS,
    threshold: float = VACUITY_THRESHOLD,
    as_printed: bool = False,
) -> VcReport:
    """Run one row for ``cases`` generated cases.

    ``as_printed=True`` drops the side conditions the printed table leaves
    implicit (see ``VcRow.implicit``).
    """
    try:
        row = ROW_BY_ID[vc_name]
    except KeyError:
        raise KeyError(f"unknown verification condition {vc_name!r}") from None
    merge = merge_for(spec, mode)
    report = VcReport(vc_name, row.display, threshold=threshold)
    sols = satisfying_assignments(spec, row, as_printed)
    if sols is None:
        report.vacuous = True
        report.note = "side condition unsatisfiable over the operation alphabet"
        return report
    rng = random.Random(f"{spec.name}:{mode}:{vc_name}:{rng_seed}")
    for case in range(cases):
        triple = gen_feasible_triple(spec, size_bounds=_random_bounds(rng, bounds), rng=rng)
        events = _draw_events(spec, row, sols, rng, triple.max_ts + 1)
        if row.eps_ok and rng.random() < 0.25:
            # the empty-LCA-event sub-case: no e_top and b coincides with l
            events["etop"] = None
            triple = FeasibleTriple(triple.l, triple.a, triple.l, triple.pi_top, triple.pi1, ())
        ctx = Ctx(spec, merge, triple, events)
        report.cases_run += 1
        if row.pre is not None:
            lhs, rhs = row.pre(ctx)
            if lhs != rhs:
                continue
        report.cases_pre_satisfied += 1
        lhs, rhs = row.post(ctx)
        if lhs != rhs:
            report.cases_failed += 1
            if report.first_counterexample is None:
                report.first_counterexample = Counterexample(row.id, triple, events, lhs, rhs, case, rng_seed, mode)
    return report


# -- datatype side conditions -------------------------------------------------


def _sample_state(spec: MrdtSpec, rng: random.Random, n: int = 4) -> tuple[Any, int]:
    pi = [Event(i + 1, rng.randrange(3), rng.choice(spec.ops)) for i in range(rng.randint(0, n))]
    return apply_sequence(spec, spec.sigma0, pi), len(pi) + 1


def check_rc_non_comm(spec: MrdtSpec, cases: int = DEFAULT_CASES, rng_seed: Any = 0) -> VcReport:
    """Non-commuting pairs are exactly the pairs rc orders in one direction.

    Declared commutativity is cross-checked on sampled states: commuting
    pairs must agree in both orders, and each declared non-commuting pair
    needs at least one observed disagreement.
    """
    rng = random.Random(f"{spec.name}:rc-non-comm:{rng_seed}")
    report = VcReport("rc-non-comm", "rc-non-comm")
    problems = []
    pairs = [(o1, o2) for o1 in spec.ops for o2 in spec.ops]
    for o1, o2 in pairs:
        r12, r21 = spec.rc(o1, o2), spec.rc(o2, o1)
        if spec.commutes(o1, o2) != spec.commutes(o2, o1):
            problems.append(f"commutes not symmetric on {format_op(o1)}, {format_op(o2)}")
        if spec.commutes(o1, o2):
            if r12 or r21:
                problems.append(f"rc relates commuting {format_op(o1)}, {format_op(o2)}")
        elif r12 == r21:
            problems.append(f"non-commuting {format_op(o1)}, {format_op(o2)} not ordered by rc in exactly one direction")
    witnessed: set = set()
    for i in range(cases):
        o1, o2 = pairs[i % len(pairs)] if i < len(pairs) else rng.choice(pairs)
        sigma, ts = _sample_state(spec, rng)
        e1 = Event(ts, rng.randrange(3), o1)
        e2 = Event(ts + 1, rng.randrange(3), o2)
        if rng.random() < 0.5:
            e1, e2 = Event(ts + 1, e1.rep, o1), Event(ts, e2.rep, o2)
        same = apply_event(spec, apply_event(spec, sigma, e2), e1) == apply_event(spec, apply_event(spec, sigma, e1), e2)
        report.cases_run += 1
        report.cases_pre_satisfied += 1
        if spec.commutes(o1, o2) and not same:
            report.cases_failed += 1
            problems.append(f"{format_op(o1)}, {format_op(o2)} declared commuting but differ on {canon(sigma)}")
        if not same:
            witnessed.add((o1, o2))
    # give every declared non-commuting pair a fair chance to show a witness
    for o1, o2 in pairs:
        if spec.commutes(o1, o2) or (o1, o2) in witnessed or (o2, o1) in witnessed:
            continue
        for _ in range(200):
            sigma, ts = _sample_state(spec, rng)
            e1, e2 = Event(ts, rng.randrange(3), o1), Event(ts + 1, rng.randrange(3), o2)
            if apply_event(spec, apply_event(spec, sigma, e2), e1) != apply_event(spec, apply_event(spec, sigma, e1), e2):
                witnessed.add((o1, o2))
                break
        else:
            problems.append(f"{format_op(o1)}, {format_op(o2)} declared non-commuting but never observed to differ")
    if problems:
        report.cases_failed = max(report.cases_failed, len(problems))
        report.note = "; ".join(dict.fromkeys(problems))
    return report


def check_cond_comm(spec: MrdtSpec, cases: int = DEFAULT_CASES, pi_bound: int = 3, rng_seed: Any = 0) -> VcReport:
    """o1 rc o2 and o2 not commuting with o3 imply o1, o2 commute when o3 follows."""
    if pi_bound < 0:
        raise ValueError("pi_bound must be non-negative")
    report = VcReport("cond-comm", "cond-comm")
    triples = [
        (o1, o2, o3)
        for o1 in spec.ops
        for o2 in spec.ops
        if spec.rc(o1, o2)
        for o3 in spec.ops
        if not spec.commutes(o2, o3)
    ]
    if not triples:
        report.vacuous = True
        report.note = "rc is empty"
        return report
    rng = random.Random(f"{spec.name}:cond-comm:{rng_seed}")
    for i in range(cases):
        o1, o2, o3 = triples[i % len(triples)] if i < len(triples) else rng.choice(triples)
        sigma, ts = _sample_state(spec, rng)
        stamps = list(range(ts, ts + 3 + pi_bound))
        rng.shuffle(stamps)
        e1 = Event(stamps[0], rng.randrange(3), o1)
        e2 = Event(stamps[1], rng.randrange(3), o2)
        e3 = Event(stamps[2], rng.randrange(3), o3)
        pi = [Event(stamps[3 + k], rng.randrange(3), rng.choice(spec.ops)) for k in range(rng.randint(0, pi_bound))]
        left = apply_event(spec, apply_sequence(spec, apply_event(spec, apply_event(spec, sigma, e2), e1), pi), e3)
        right = apply_event(spec, apply_sequence(spec, apply_event(spec, apply_event(spec, sigma, e1), e2), pi), e3)
        report.cases_run += 1
        report.cases_pre_satisfied += 1
        if left != right:
            report.cases_failed += 1
            if not report.note:
                report.note = (f"{format_op(o1)}, {format_op(o2)} w.r.t. {format_op(o3)} differ from "
                               f"{canon(sigma)} with {[format_op(e.op) for e in pi]}")
    return report


def check_no_rc_chain(spec: MrdtSpec) -> VcReport:
    """Exhaustively: no o1 rc o2 rc o3, and the closure of rc is irreflexive."""
    from .core import rc_closure_irreflexive

    report = VcReport("no-rc-chain", "no-rc-chain")
    succ = {o: [p for p in spec.ops if spec.rc(o, p)] for o in spec.ops}
    for o1 in spec.ops:
        for o2 in succ[o1]:
            report.cases_run += 1
            report.cases_pre_satisfied += 1
            if succ[o2]:
                report.cases_failed += 1
                if not report.note:
                    report.note = f"rc chain {format_op(o1)} -> {format_op(o2)} -> {format_op(succ[o2][0])}"
    if not rc_closure_irreflexive(spec):
        report.cases_failed += 1
        report.note = (report.note + "; " if report.note else "") + "rc closure is reflexive"
    if report.cases_run == 0:
        report.cases_run = report.cases_pre_satisfied = 1
    return report


# -- whole suite --------------------------------------------------------------


@dataclass
class SuiteResult:
    spec_name: str
    mode: str
    reports: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failing(self) -> list[str]:
        return [r.vc_name for r in self.reports if not r.passed]

    def to_json(self) -> dict:
        return {
            "datatype": self.spec_name,
            "mode": self.mode,
            "passed": self.passed,
            "failing": self.failing,
            "reports": [r.to_json() for r in self.reports],
        }


def run_full_suite(
    spec: MrdtSpec,
    mode: str = "mrdt",
    cases: int = DEFAULT_CASES,
    rng_seed: Any = 0,
    include_optional: bool = False,
    bounds: tuple = DEFAULT_BOUNDS,
) -> SuiteResult:
    result = SuiteResult(spec.name, mode)
    result.reports.append(check_rc_non_comm(spec, cases, rng_seed))
    result.reports.append(check_cond_comm(spec, cases, rng_seed=rng_seed))
    result.reports.append(check_no_rc_chain(spec))
    for vc in row_ids(include_optional):
        result.reports.append(run_vc(spec, vc, mode, cases, rng_seed, bounds))
    return result
