import itertools

import pytest
from hypothesis import given, settings, strategies as st

from mrdt.core import Event, apply_sequence, canon, query_state, rc_closure_irreflexive
from mrdt.datatypes import (
    CATALOG,
    JsonKey,
    catalog_lookup,
    json_compose,
    orset_merge,
)
from mrdt.store import apply_op, create_branch, init_config, merge_replicas, query_replica

from conftest import ROSTER


def concurrent(spec, prefix, left, right, q=("rd",), mode="mrdt"):
    """Run prefix at r0, fork r1, apply left at r0 and right at r1, merge r1 into r0."""
    C = init_config(spec, mode)
    for op in prefix:
        C, _ = apply_op(C, 0, op)
    C = create_branch(C, 1, 0)
    for op in left:
        C, _ = apply_op(C, 0, op)
    for op in right:
        C, _ = apply_op(C, 1, op)
    C = merge_replicas(C, 0, 1)
    return query_replica(C, 0, q)


def test_catalog_names_and_modes():
    assert set(ROSTER) <= set(CATALOG)
    for name, entry in CATALOG.items():
        spec = catalog_lookup(name)
        assert spec.name == name
        assert entry.mrdt is not None
    assert catalog_lookup("gset", mode="crdt").merge2 is not None
    with pytest.raises(KeyError):
        catalog_lookup("nope")
    with pytest.raises(KeyError):
        catalog_lookup("counter", mode="crdt")


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_rc_closure_irreflexive_and_commutes_symmetric(name):
    spec = catalog_lookup(name)
    assert rc_closure_irreflexive(spec)
    for o1, o2 in itertools.product(spec.ops, repeat=2):
        assert spec.commutes(o1, o2) == spec.commutes(o2, o1)
        assert not (spec.rc(o1, o2) and spec.rc(o2, o1))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_non_rc_pairs_commute_on_reachable_states(name):
    spec = catalog_lookup(name)
    starts = [spec.sigma0, apply_sequence(spec, spec.sigma0, [Event(t + 1, t % 3, op) for t, op in enumerate(spec.ops)])]
    for sigma in starts:
        for o1, o2 in itertools.product(spec.ops, repeat=2):
            if spec.rc(o1, o2) or spec.rc(o2, o1):
                continue
            e1, e2 = Event(100, 1, o1), Event(101, 2, o2)
            assert canon(apply_sequence(spec, sigma, [e1, e2])) == canon(apply_sequence(spec, sigma, [e2, e1])), (o1, o2)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_merge_with_self_is_identity(name):
    spec = catalog_lookup(name)
    sigma = apply_sequence(spec, spec.sigma0, [Event(t + 1, t % 2, op) for t, op in enumerate(spec.ops[:5])])
    assert canon(spec.merge3(sigma, sigma, sigma)) == canon(sigma)
    assert canon(spec.merge3(spec.sigma0, sigma, spec.sigma0)) == canon(sigma)


def test_orset_add_wins():
    s = catalog_lookup("orset")
    assert concurrent(s, [], [("rem", "a")], [("add", "a")]) == ("a",)
    assert concurrent(s, [("add", "a")], [("rem", "a")], []) == ()
    assert concurrent(s, [("add", "a")], [("rem", "a")], [("add", "a")]) == ("a",)
    assert concurrent(s, [("add", "a")], [("rem", "a")], [("rem", "a")]) == ()


def test_orset_merge_formula():
    l = frozenset({("a", 1), ("b", 2)})
    a = frozenset({("a", 1), ("c", 3)})
    b = frozenset({("a", 1), ("b", 2), ("d", 4)})
    assert orset_merge(l, a, b) == {("a", 1), ("c", 3), ("d", 4)}


@pytest.mark.parametrize("name", ["orset", "orset-efficient"])
def test_orset_variants_agree(name):
    s = catalog_lookup(name)
    assert concurrent(s, [("add", "b")], [("rem", "b"), ("add", "a")], [("add", "b")]) == ("a", "b")
    assert concurrent(s, [("add", "b"), ("add", "b")], [("rem", "b")], []) == ()


def test_rwset_remove_wins():
    s = catalog_lookup("rwset")
    assert concurrent(s, [], [("rem", "a")], [("add", "a")]) == ()
    assert concurrent(s, [], [("add", "a")], [("add", "b")]) == ("a", "b")
    assert concurrent(s, [("add", "a")], [], [("rem", "a"), ("add", "a")]) == ("a",)


def test_gset_and_two_phase():
    assert concurrent(catalog_lookup("gset"), [("add", "a")], [("add", "b")], [("add", "c")]) == ("a", "b", "c")
    tp = catalog_lookup("2p-set")
    assert concurrent(tp, [("add", "a")], [("rem", "a")], [("add", "a")]) == ()
    assert concurrent(tp, [], [("add", "a")], [("add", "b")]) == ("a", "b")


def test_flags():
    ew = catalog_lookup("ewflag")
    dw = catalog_lookup("dwflag")
    assert concurrent(ew, [], [("enable",)], [("disable",)]) is True
    assert concurrent(dw, [], [("enable",)], [("disable",)]) is False
    assert concurrent(ew, [("enable",)], [("disable",)], []) is False
    assert concurrent(dw, [("disable",)], [("enable",)], []) is True


def test_counters():
    assert concurrent(catalog_lookup("counter"), [("inc",)] * 2, [("inc",)] * 2, [("inc",)] * 3) == 7
    assert concurrent(catalog_lookup("pn-counter"), [("inc",)], [("dec",)] * 2, [("inc",)]) == 0
    assert concurrent(catalog_lookup("gcounter"), [], [("inc",)], [("inc",)]) == 2
    assert concurrent(catalog_lookup("gcounter", mode="crdt"), [], [("inc",)], [("inc",)] * 2, mode="crdt") == 3


def test_mvr_keeps_concurrent_writes():
    s = catalog_lookup("mvr")
    assert concurrent(s, [("wr", "a")], [("wr", "b")], [("wr", "c")]) == ("b", "c")
    assert concurrent(s, [("wr", "a")], [("wr", "b")], []) == ("b",)


def test_optreg_newest_set_and_unset():
    s = catalog_lookup("optreg")
    # unset is rc-before set, so a concurrent set survives
    assert concurrent(s, [("set", "a")], [("unset",)], [("set", "b")]) == "b"
    assert concurrent(s, [("set", "a")], [("unset",)], []) is None
    assert concurrent(s, [], [("set", "a")], [("set", "b")]) == "b"  # newer timestamp


def test_maps():
    g = catalog_lookup("gmap")
    assert concurrent(g, [], [("put", "a", 0)], [("put", "a", 1)], q=("get", "a")) == 1
    sw = catalog_lookup("swmap")
    got = concurrent(sw, [("set", "a", 0)], [("del", "a")], [("set", "a", 1)], q=("get", "a"))
    assert got == 1


def test_rga_interleaving_is_deterministic():
    s = catalog_lookup("rga")
    x = concurrent(s, [("ins", 0, "a")], [("ins", 1, "b")], [("ins", 1, "c")])
    y = concurrent(s, [("ins", 0, "a")], [("ins", 1, "b")], [("ins", 1, "c")])
    assert x == y
    assert x[0] == "a" and sorted(x[1:]) == ["b", "c"]


def test_json_keys_are_independent():
    s = catalog_lookup("json")
    inc = ("set", "n", "counter", ("inc",))
    add = ("set", "s", "orset", ("add", "a"))
    en = ("set", "f", "ewflag", ("enable",))
    assert concurrent(s, [inc], [inc, add], [en], q=("get", "n", "counter", ("rd",))) == 2
    assert concurrent(s, [inc], [inc, add], [en], q=("get", "s", "orset", ("rd",))) == ("a",)
    assert concurrent(s, [inc], [inc, add], [en], q=("get", "f", "ewflag", ("rd",))) is True


def test_json_custom_components():
    s = json_compose({JsonKey("x", "gset"): catalog_lookup("gset"), JsonKey("x", "counter"): catalog_lookup("counter")})
    op = ("set", "x", "gset", ("add", "a"))
    sigma = apply_sequence(s, s.sigma0, [Event(1, 0, op), Event(2, 0, ("set", "x", "counter", ("inc",)))])
    assert query_state(s, sigma, ("get", "x", "gset", ("rd",))) == ("a",)
    assert query_state(s, sigma, ("get", "x", "counter", ("rd",))) == 1


def test_buggy_flag_diverges_on_equal_event_sets():
    s = catalog_lookup("ewflag-buggy")
    # v3 and v5 as in the intermediate merge example
    v1 = (1, True)
    v3 = (1, False)
    v4 = (1, False)
    v5 = s.merge3((0, False), v4, v1)
    assert s.merge3(v1, v3, v5) == (2, True)
    assert s.merge3((0, False), v3, v4) == (2, False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(sorted(CATALOG)), min_size=1, max_size=1), st.data())
def test_merge_commutes_in_arguments(names, data):
    spec = catalog_lookup(names[0])
    ops = st.sampled_from(spec.ops)
    pre = data.draw(st.lists(ops, max_size=3))
    left = data.draw(st.lists(ops, max_size=3))
    right = data.draw(st.lists(ops, max_size=3))
    ts = iter(range(1, 100))
    l = apply_sequence(spec, spec.sigma0, [Event(next(ts), 0, o) for o in pre])
    a = apply_sequence(spec, l, [Event(next(ts), 1, o) for o in left])
    b = apply_sequence(spec, l, [Event(next(ts), 2, o) for o in right])
    assert canon(spec.merge3(l, a, b)) == canon(spec.merge3(l, b, a))
