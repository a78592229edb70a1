"""Catalog of concrete datatypes.

Every entry is built by a small factory taking the element alphabet, so the
same datatype can be instantiated over a narrower alphabet for exhaustive
checks. States are frozensets or tuples of plain values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .core import DEFAULT_ALPHABET, Event, MrdtSpec, SpecMismatch


def _never(o1, o2) -> bool:
    return False


def _always(o1, o2) -> bool:
    return True


def _bad_op(name: str, op) -> SpecMismatch:
    return SpecMismatch(f"{name}: unknown operation {op!r}")


def orset_merge(lca: frozenset, a: frozenset, b: frozenset) -> frozenset:
    """Keep what survived on both sides plus what either side added."""
    return (lca & a & b) | (a - lca) | (b - lca)


# -- counters -----------------------------------------------------------------


def counter(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    def do(s, e):
        if e.op == ("inc",):
            return s + 1
        raise _bad_op("counter", e.op)

    return MrdtSpec(
        name="counter",
        sigma0=0,
        do=do,
        merge3=lambda l, a, b: a + b - l,
        query=lambda s, q: s,
        queries=(("rd",),),
        ops=(("inc",),),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def _vec_inc(vec: tuple, rep: int) -> tuple:
    d = dict(vec)
    d[rep] = d.get(rep, 0) + 1
    return tuple(sorted(d.items()))


def _vec_max(x: tuple, y: tuple) -> tuple:
    d = dict(x)
    for r, c in y:
        d[r] = max(d.get(r, 0), c)
    return tuple(sorted(d.items()))


def gcounter(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Grow-only counter as a per-replica vector; usable in both modes."""

    def do(s, e):
        if e.op == ("inc",):
            return _vec_inc(s, e.rep)
        raise _bad_op("gcounter", e.op)

    return MrdtSpec(
        name="gcounter",
        sigma0=(),
        do=do,
        merge3=lambda l, a, b: _vec_max(a, b),
        merge2=_vec_max,
        query=lambda s, q: sum(c for _, c in s),
        queries=(("rd",),),
        ops=(("inc",),),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def pn_counter(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    def do(s, e):
        p, n = s
        if e.op == ("inc",):
            return (p + 1, n)
        if e.op == ("dec",):
            return (p, n + 1)
        raise _bad_op("pn-counter", e.op)

    def merge3(l, a, b):
        return (a[0] + b[0] - l[0], a[1] + b[1] - l[1])

    return MrdtSpec(
        name="pn-counter",
        sigma0=(0, 0),
        do=do,
        merge3=merge3,
        query=lambda s, q: s[0] - s[1],
        queries=(("rd",),),
        ops=(("inc",), ("dec",)),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def pn_counter_crdt(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """PN-counter as a pair of per-replica vectors (state-based form)."""

    def do(s, e):
        p, n = s
        if e.op == ("inc",):
            return (_vec_inc(p, e.rep), n)
        if e.op == ("dec",):
            return (p, _vec_inc(n, e.rep))
        raise _bad_op("pn-counter", e.op)

    def merge2(a, b):
        return (_vec_max(a[0], b[0]), _vec_max(a[1], b[1]))

    return MrdtSpec(
        name="pn-counter",
        sigma0=((), ()),
        do=do,
        merge3=lambda l, a, b: merge2(a, b),
        merge2=merge2,
        query=lambda s, q: sum(c for _, c in s[0]) - sum(c for _, c in s[1]),
        queries=(("rd",),),
        ops=(("inc",), ("dec",)),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


# -- sets ---------------------------------------------------------------------


def gset(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    def do(s, e):
        if e.op[0] == "add":
            return s | {e.op[1]}
        raise _bad_op("gset", e.op)

    return MrdtSpec(
        name="gset",
        sigma0=frozenset(),
        do=do,
        merge3=lambda l, a, b: a | b,
        merge2=lambda a, b: a | b,
        query=lambda s, q: tuple(sorted(s)),
        queries=(("rd",),),
        ops=tuple(("add", x) for x in alphabet),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def two_phase_set(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Two-phase set: once removed, an element never comes back."""

    def do(s, e):
        added, removed = s
        kind, x = e.op
        if kind == "add":
            return (added | {x}, removed)
        if kind == "rem":
            return (added, removed | {x})
        raise _bad_op("2p-set", e.op)

    def merge2(a, b):
        return (a[0] | b[0], a[1] | b[1])

    ops = tuple(("add", x) for x in alphabet) + tuple(("rem", x) for x in alphabet)
    return MrdtSpec(
        name="2p-set",
        sigma0=(frozenset(), frozenset()),
        do=do,
        merge3=lambda l, a, b: merge2(a, b),
        merge2=merge2,
        query=lambda s, q: tuple(sorted(s[0] - s[1])),
        queries=(("rd",),),
        ops=ops,
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def _same_elem_add_rem(first: str, second: str):
    def rc(o1, o2) -> bool:
        return o1[0] == first and o2[0] == second and o1[1] == o2[1]

    return rc


def _add_rem_commute(o1, o2) -> bool:
    return not ({o1[0], o2[0]} == {"add", "rem"} and o1[1] == o2[1])


def orset(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Add-wins observed-remove set over (element, timestamp) pairs."""

    def do(s, e):
        kind, x = e.op
        if kind == "add":
            return s | {(x, e.ts)}
        if kind == "rem":
            return frozenset(p for p in s if p[0] != x)
        raise _bad_op("orset", e.op)

    ops = tuple(("add", x) for x in alphabet) + tuple(("rem", x) for x in alphabet)
    return MrdtSpec(
        name="orset",
        sigma0=frozenset(),
        do=do,
        merge3=orset_merge,
        query=lambda s, q: tuple(sorted({x for x, _ in s})),
        queries=(("rd",),),
        ops=ops,
        rc=_same_elem_add_rem("rem", "add"),
        commutes=_add_rem_commute,
        alphabet=tuple(alphabet),
    )


def orset_crdt(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """State-based OR-set: live tags plus tombstones of observed-removed tags."""

    def do(s, e):
        live, tomb = s
        kind, x = e.op
        if kind == "add":
            return (live | {(x, e.ts)}, tomb)
        if kind == "rem":
            gone = frozenset(p for p in live if p[0] == x)
            return (live - gone, tomb | gone)
        raise _bad_op("orset", e.op)

    def merge2(a, b):
        tomb = a[1] | b[1]
        return ((a[0] | b[0]) - tomb, tomb)

    ops = tuple(("add", x) for x in alphabet) + tuple(("rem", x) for x in alphabet)
    return MrdtSpec(
        name="orset",
        sigma0=(frozenset(), frozenset()),
        do=do,
        merge3=lambda l, a, b: merge2(a, b),
        merge2=merge2,
        query=lambda s, q: tuple(sorted({x for x, _ in s[0]})),
        queries=(("rd",),),
        ops=ops,
        rc=_same_elem_add_rem("rem", "add"),
        commutes=_add_rem_commute,
        alphabet=tuple(alphabet),
    )


def orset_efficient(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """OR-set keeping one (element, replica, counter) triple per replica.

    The second component remembers the highest counter ever issued per
    (element, replica) so a re-add after a remove is never confused with the
    copy still sitting in the ancestor.
    """

    def do(s, e):
        live, maxc = s
        kind, x = e.op
        if kind == "add":
            key = (x, e.rep)
            c = dict(((k0, k1), c) for k0, k1, c in maxc).get(key, 0) + 1
            live = frozenset(t for t in live if (t[0], t[1]) != key) | {(x, e.rep, c)}
            maxc = frozenset(t for t in maxc if (t[0], t[1]) != key) | {(x, e.rep, c)}
            return (live, maxc)
        if kind == "rem":
            return (frozenset(t for t in live if t[0] != x), maxc)
        raise _bad_op("orset-efficient", e.op)

    def newest(triples) -> frozenset:
        best: dict = {}
        for x, r, c in triples:
            if best.get((x, r), 0) < c:
                best[(x, r)] = c
        return frozenset((x, r, c) for (x, r), c in best.items())

    def merge3(l, a, b):
        live = newest(orset_merge(l[0], a[0], b[0]))
        return (live, newest(a[1] | b[1]))

    ops = tuple(("add", x) for x in alphabet) + tuple(("rem", x) for x in alphabet)
    return MrdtSpec(
        name="orset-efficient",
        sigma0=(frozenset(), frozenset()),
        do=do,
        merge3=merge3,
        query=lambda s, q: tuple(sorted({t[0] for t in s[0]})),
        queries=(("rd",),),
        ops=ops,
        rc=_same_elem_add_rem("rem", "add"),
        commutes=_add_rem_commute,
        alphabet=tuple(alphabet),
    )


def rwset(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Remove-wins set.

    An element carries either a presence marker ``("+", x)`` or a set of
    remove tokens ``("-", x, t)``. Tokens are merged like OR-set entries and
    any surviving remove token suppresses presence.
    """

    def do(s, e):
        kind, x = e.op
        if kind == "add":
            return frozenset(p for p in s if not (p[0] == "-" and p[1] == x)) | {("+", x)}
        if kind == "rem":
            return (s - {("+", x)}) | {("-", x, e.ts)}
        raise _bad_op("rwset", e.op)

    def merge3(l, a, b):
        tokens = orset_merge(
            frozenset(p for p in l if p[0] == "-"),
            frozenset(p for p in a if p[0] == "-"),
            frozenset(p for p in b if p[0] == "-"),
        )
        blocked = {p[1] for p in tokens}
        present = {p[1] for p in a | b if p[0] == "+"} - blocked
        return tokens | frozenset(("+", x) for x in present)

    ops = tuple(("add", x) for x in alphabet) + tuple(("rem", x) for x in alphabet)
    return MrdtSpec(
        name="rwset",
        sigma0=frozenset(),
        do=do,
        merge3=merge3,
        query=lambda s, q: tuple(sorted(p[1] for p in s if p[0] == "+")),
        queries=(("rd",),),
        ops=ops,
        rc=_same_elem_add_rem("add", "rem"),
        commutes=_add_rem_commute,
        alphabet=tuple(alphabet),
    )


# -- flags --------------------------------------------------------------------


def _flag_commutes(o1, o2) -> bool:
    return o1 == o2


def ewflag_buggy(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """The published counter-and-flag enable-wins flag, kept bug for bug."""

    def do(s, e):
        if e.op == ("enable",):
            return (s[0] + 1, True)
        if e.op == ("disable",):
            return (s[0], False)
        raise _bad_op("ewflag-buggy", e.op)

    def merge_flag(l, a, b):
        (lc, _), (ac, af), (bc, bf) = l, a, b
        if af and bf:
            return True
        if not af and not bf:
            return False
        if af:
            return ac > lc
        return bc > lc

    def merge3(l, a, b):
        return (a[0] + b[0] - l[0], merge_flag(l, a, b))

    return MrdtSpec(
        name="ewflag-buggy",
        sigma0=(0, False),
        do=do,
        merge3=merge3,
        query=lambda s, q: s[1],
        queries=(("rd",),),
        ops=(("enable",), ("disable",)),
        rc=lambda o1, o2: o1 == ("disable",) and o2 == ("enable",),
        commutes=_flag_commutes,
        alphabet=tuple(alphabet),
    )


def ewflag(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Enable-wins flag with one (counter, flag) entry per replica.

    Only replica r ever bumps r's counter, so entries for one replica are
    totally ordered and can be merged pointwise.
    """

    def do(s, e):
        if e.op == ("enable",):
            entries = dict((r, (c, f)) for r, c, f in s)
            c, _ = entries.get(e.rep, (0, False))
            entries[e.rep] = (c + 1, True)
            return frozenset((r, c, f) for r, (c, f) in entries.items())
        if e.op == ("disable",):
            return frozenset((r, c, False) for r, c, _ in s)
        raise _bad_op("ewflag", e.op)

    def merge3(l, a, b):
        le = {r: (c, f) for r, c, f in l}
        ae = {r: (c, f) for r, c, f in a}
        be = {r: (c, f) for r, c, f in b}
        out = set()
        for r in set(ae) | set(be):
            ac, af = ae.get(r, (0, False))
            bc, bf = be.get(r, (0, False))
            lc, _ = le.get(r, (0, False))
            if ac != bc:
                out.add((r, ac, af) if ac > bc else (r, bc, bf))
                continue
            if af == bf:
                flag = af
            elif af:
                flag = ac > lc
            else:
                flag = bc > lc
            out.add((r, ac, flag))
        return frozenset(out)

    return MrdtSpec(
        name="ewflag",
        sigma0=frozenset(),
        do=do,
        merge3=merge3,
        query=lambda s, q: any(f for _, _, f in s),
        queries=(("rd",),),
        ops=(("enable",), ("disable",)),
        rc=lambda o1, o2: o1 == ("disable",) and o2 == ("enable",),
        commutes=_flag_commutes,
        alphabet=tuple(alphabet),
    )


def dwflag(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Disable-wins flag: (enabled, remove tokens of live disables)."""

    def do(s, e):
        if e.op == ("enable",):
            return (True, frozenset())
        if e.op == ("disable",):
            return (False, s[1] | {e.ts})
        raise _bad_op("dwflag", e.op)

    def merge3(l, a, b):
        tokens = orset_merge(l[1], a[1], b[1])
        return ((a[0] or b[0]) and not tokens, tokens)

    return MrdtSpec(
        name="dwflag",
        sigma0=(False, frozenset()),
        do=do,
        merge3=merge3,
        query=lambda s, q: s[0],
        queries=(("rd",),),
        ops=(("enable",), ("disable",)),
        rc=lambda o1, o2: o1 == ("enable",) and o2 == ("disable",),
        commutes=_flag_commutes,
        alphabet=tuple(alphabet),
    )


# -- maps and registers -------------------------------------------------------

MAP_VALUES = (0, 1)


def _latest_per(entries, key) -> frozenset:
    """Keep, per key, only the entry with the largest timestamp (last field)."""
    best: dict = {}
    for ent in entries:
        k = key(ent)
        if k not in best or best[k][-1] < ent[-1]:
            best[k] = ent
    return frozenset(best.values())


def gmap(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Grow-only map; each key holds the value of its latest put."""

    def do(s, e):
        if e.op[0] == "put":
            _, k, v = e.op
            return _latest_per(s | {(k, v, e.ts)}, lambda t: t[0])
        raise _bad_op("gmap", e.op)

    def merge2(a, b):
        return _latest_per(a | b, lambda t: t[0])

    def query(s, q):
        if q == ("rd",):
            return tuple(sorted(k for k, _, _ in s))
        k = q[1]
        return next((v for kk, v, _ in s if kk == k), None)

    return MrdtSpec(
        name="gmap",
        sigma0=frozenset(),
        do=do,
        merge3=lambda l, a, b: merge2(a, b),
        merge2=merge2,
        query=query,
        queries=(("rd",),) + tuple(("get", k) for k in alphabet),
        ops=tuple(("put", k, v) for k in alphabet for v in MAP_VALUES),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def swmap(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Set-wins map: (key, value, timestamp) entries, delete drops a key."""

    def do(s, e):
        if e.op[0] == "set":
            _, k, v = e.op
            return s | {(k, v, e.ts)}
        if e.op[0] == "del":
            return frozenset(t for t in s if t[0] != e.op[1])
        raise _bad_op("swmap", e.op)

    def query(s, q):
        if q == ("rd",):
            return tuple(sorted({k for k, _, _ in s}))
        live = [t for t in s if t[0] == q[1]]
        return max(live, key=lambda t: t[2])[1] if live else None

    def rc(o1, o2) -> bool:
        return o1[0] == "del" and o2[0] == "set" and o1[1] == o2[1]

    def commutes(o1, o2) -> bool:
        return not ({o1[0], o2[0]} == {"set", "del"} and o1[1] == o2[1])

    ops = tuple(("set", k, v) for k in alphabet for v in MAP_VALUES) + tuple(("del", k) for k in alphabet)
    return MrdtSpec(
        name="swmap",
        sigma0=frozenset(),
        do=do,
        merge3=orset_merge,
        query=query,
        queries=(("rd",),) + tuple(("get", k) for k in alphabet),
        ops=ops,
        rc=rc,
        commutes=commutes,
        alphabet=tuple(alphabet),
    )


def mvr(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Multi-valued register holding the latest write of every replica."""

    def do(s, e):
        if e.op[0] == "wr":
            return _latest_per(s | {(e.rep, e.op[1], e.ts)}, lambda t: t[0])
        raise _bad_op("mvr", e.op)

    def merge2(a, b):
        return _latest_per(a | b, lambda t: t[0])

    return MrdtSpec(
        name="mvr",
        sigma0=frozenset(),
        do=do,
        merge3=lambda l, a, b: merge2(a, b),
        merge2=merge2,
        query=lambda s, q: tuple(sorted({v for _, v, _ in s})),
        queries=(("rd",),),
        ops=tuple(("wr", x) for x in alphabet),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


def optreg(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Optional register: every (value, timestamp) written since the last unset.

    A read returns the value with the newest timestamp, so writes commute
    as state updates while the register still reads like last-writer-wins.
    """

    def do(s, e):
        if e.op[0] == "set":
            return s | {(e.op[1], e.ts)}
        if e.op == ("unset",):
            return frozenset()
        raise _bad_op("optreg", e.op)

    def query(s, q):
        return max(s, key=lambda p: p[1])[0] if s else None

    def rc(o1, o2) -> bool:
        return o1 == ("unset",) and o2[0] == "set"

    def commutes(o1, o2) -> bool:
        return (o1[0] == "set") == (o2[0] == "set")

    return MrdtSpec(
        name="optreg",
        sigma0=frozenset(),
        do=do,
        merge3=orset_merge,
        query=query,
        queries=(("rd",),),
        ops=tuple(("set", x) for x in alphabet) + (("unset",),),
        rc=rc,
        commutes=commutes,
        alphabet=tuple(alphabet),
    )


RGA_PARENTS = (0, 1, 2, 3)


def rga(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    """Replicated growable array without deletes.

    Nodes are (id, parent, element) with the inserting event's timestamp as
    id; siblings are read newest first. A node whose parent is not (yet)
    present stays invisible.
    """

    def do(s, e):
        if e.op[0] == "ins":
            _, parent, x = e.op
            return s | {(e.ts, parent, x)}
        raise _bad_op("rga", e.op)

    def query(s, q):
        children: dict = {}
        for node in s:
            children.setdefault(node[1], []).append(node)
        out = []
        stack = sorted(children.get(0, []))
        while stack:
            node = stack.pop()
            out.append(node[2])
            stack.extend(sorted(children.get(node[0], [])))
        return tuple(out)

    return MrdtSpec(
        name="rga",
        sigma0=frozenset(),
        do=do,
        merge3=lambda l, a, b: a | b,
        merge2=lambda a, b: a | b,
        query=query,
        queries=(("rd",),),
        ops=tuple(("ins", p, x) for p in RGA_PARENTS for x in alphabet),
        rc=_never,
        commutes=_always,
        alphabet=tuple(alphabet),
    )


# -- JSON composite -----------------------------------------------------------


@dataclass(frozen=True)
class JsonKey:
    id: str
    vtype: str


def json_compose(components: dict, name: str = "json") -> MrdtSpec:
    """Compose component datatypes under typed keys.

    ``components`` maps JsonKey -> MrdtSpec. Operations are
    ``("set", id, vtype, inner_op)`` and queries ``("get", id, vtype, q)``.
    The state is a tuple of component states in key order, so every key is
    always present with its component's initial state.
    """
    keys = sorted(components, key=lambda k: (k.id, k.vtype))
    index = {(k.id, k.vtype): i for i, k in enumerate(keys)}
    specs = [components[k] for k in keys]

    def slot(op_or_q) -> int:
        try:
            return index[(op_or_q[1], op_or_q[2])]
        except (KeyError, IndexError):
            raise SpecMismatch(f"{name}: unregistered key in {op_or_q!r}") from None

    def do(s, e):
        if e.op[0] != "set":
            raise _bad_op(name, e.op)
        i = slot(e.op)
        inner = Event(e.ts, e.rep, e.op[3])
        return s[:i] + (specs[i].do(s[i], inner),) + s[i + 1:]

    def merge3(l, a, b):
        return tuple(sp.merge3(x, y, z) for sp, x, y, z in zip(specs, l, a, b))

    merge2: Optional[Callable] = None
    if all(sp.merge2 is not None for sp in specs):
        def merge2(a, b):
            return tuple(sp.merge2(y, z) for sp, y, z in zip(specs, a, b))

    def query(s, q):
        if q[0] != "get":
            raise SpecMismatch(f"{name}: unknown query {q!r}")
        i = slot(q)
        return specs[i].query(s[i], q[3])

    def rc(o1, o2) -> bool:
        return o1[1:3] == o2[1:3] and specs[slot(o1)].rc(o1[3], o2[3])

    def commutes(o1, o2) -> bool:
        return o1[1:3] != o2[1:3] or specs[slot(o1)].commutes(o1[3], o2[3])

    ops = tuple(("set", k.id, k.vtype, o) for k, sp in zip(keys, specs) for o in sp.ops)
    queries = tuple(("get", k.id, k.vtype, q) for k, sp in zip(keys, specs) for q in sp.queries)
    return MrdtSpec(
        name=name,
        sigma0=tuple(sp.sigma0 for sp in specs),
        do=do,
        merge3=merge3,
        merge2=merge2,
        query=query,
        queries=queries,
        ops=ops,
        rc=rc,
        commutes=commutes,
        alphabet=specs[0].alphabet if specs else DEFAULT_ALPHABET,
    )


JSON_DEFAULT_KEYS = (("n", "counter"), ("s", "orset"), ("f", "ewflag"))


def json_default(alphabet=DEFAULT_ALPHABET) -> MrdtSpec:
    return json_compose({JsonKey(i, t): catalog_lookup(t, alphabet) for i, t in JSON_DEFAULT_KEYS})


# -- catalog ------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    mrdt: Optional[Callable[..., MrdtSpec]]
    crdt: Optional[Callable[..., MrdtSpec]]
    rc_policy_doc: str

    @property
    def mode(self) -> str:
        if self.mrdt and self.crdt:
            return "both"
        return "mrdt" if self.mrdt else "crdt"


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry("counter", counter, None, "none"),
        CatalogEntry("gcounter", gcounter, gcounter, "none"),
        CatalogEntry("pn-counter", pn_counter, pn_counter_crdt, "none"),
        CatalogEntry("gset", gset, gset, "none"),
        CatalogEntry("2p-set", two_phase_set, two_phase_set, "none"),
        CatalogEntry("gmap", gmap, gmap, "none"),
        CatalogEntry("orset", orset, orset_crdt, "rem_a rc add_a"),
        CatalogEntry("orset-efficient", orset_efficient, None, "rem_a rc add_a"),
        CatalogEntry("rwset", rwset, None, "add_a rc rem_a"),
        CatalogEntry("ewflag", ewflag, None, "disable rc enable"),
        CatalogEntry("ewflag-buggy", ewflag_buggy, None, "disable rc enable"),
        CatalogEntry("dwflag", dwflag, None, "enable rc disable"),
        CatalogEntry("swmap", swmap, None, "del_k rc set_k"),
        CatalogEntry("mvr", mvr, mvr, "none"),
        CatalogEntry("optreg", optreg, None, "unset rc set"),
        CatalogEntry("rga", rga, rga, "none"),
        CatalogEntry("json", json_default, None, "set(k,o1) rc set(k,o2) iff o1 rc o2 for the component at k"),
    ]
}


def catalog_lookup(name: str, alphabet=None, mode: str = "mrdt") -> MrdtSpec:
    """Return the datatype registered under ``name`` for the given mode."""
    try:
        entry = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown datatype {name!r}; known: {', '.join(sorted(CATALOG))}") from None
    factory = entry.crdt if mode == "crdt" else entry.mrdt
    if factory is None:
        raise KeyError(f"datatype {name!r} has no {mode} form")
    return factory(tuple(alphabet) if alphabet else DEFAULT_ALPHABET)
