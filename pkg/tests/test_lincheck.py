import random

import pytest
from hypothesis import given, settings, strategies as st

from mrdt import fixture_path
from mrdt.core import ConstraintViolation, Event, MrdtSpec, apply_sequence
from mrdt.datatypes import catalog_lookup
from mrdt.fuzz import generate_schedule
from mrdt.lincheck import (
    LinRelation,
    check_convergence,
    check_lca_lemma,
    check_lo_stability,
    check_replica_linearizable,
    check_version_linearizable,
    compute_lo,
    enumerate_extensions,
    extends,
    find_witness,
    lo_irreflexive,
    partition_merge_events,
    partition_violations,
)
from mrdt.store import Merge, apply_op, create_branch, init_config, merge_replicas, run
from mrdt.trace import read_trace


def _fig4():
    t = read_trace(fixture_path("fig4"))
    configs = run(t.build_spec(), t.transitions)
    return configs


def _ev(C, ts):
    return next(e for e in C.events if e.ts == ts)


def test_intermediate_merge_partition_matches_worked_example():
    configs = _fig4()
    C_before, C_after = configs[-3], configs[-2]
    v3, v4 = C_before.H[0], C_before.H[1]
    e1, e2, e3 = (_ev(C_after, t) for t in (1, 2, 3))
    p = partition_merge_events(C_after, v3, v4, mode="unguarded")
    assert p.ltop == {e1}
    assert p.l1_local == {e3} and p.l2_local == {e2}
    assert p.l1b == set() and p.l2b == {e2} and p.ltop_a == {e1}
    assert p.l1a == {e3} and p.l2a == set()
    assert partition_violations(p) == []


def test_guarded_partition_drops_suppressed_rc_pair():
    configs = _fig4()
    C_before, C_after = configs[-3], configs[-2]
    p = partition_merge_events(C_after, C_before.H[0], C_before.H[1], mode="guarded")
    assert p.l2b == set() and p.ltop_a == set()
    assert partition_violations(p) == []


def test_intermediate_merge_witness():
    C = _fig4()[-2]
    spec = C.spec
    v = C.H[0]
    e1, e2, e3 = (_ev(C, t) for t in (1, 2, 3))
    loose = compute_lo(C, guard=False).restrict(C.L[v])
    found, witness, _ = find_witness(spec, C.L[v], loose, C.N[v])
    assert found and list(witness) == [e2, e1, e3]
    guarded = compute_lo(C).restrict(C.L[v])
    reach = [x for x in enumerate_extensions(C.L[v], guarded, 50) if apply_sequence(spec, spec.sigma0, x) == C.N[v]]
    assert [e2, e1, e3] in reach
    verdict = check_version_linearizable(C, v)
    assert verdict.linearizable and extends(verdict.witness, guarded)


def test_lo_for_two_concurrent_add_remove_chains(orset):
    C = init_config(orset)
    C = create_branch(C, 1, 0)
    C, a1 = apply_op(C, 0, ("add", "a"))
    C, a2 = apply_op(C, 1, ("add", "a"))
    C, a3 = apply_op(C, 0, ("rem", "a"))
    C, a4 = apply_op(C, 1, ("rem", "a"))
    C = merge_replicas(C, 0, 1)
    lo = compute_lo(C)
    assert lo.pairs == {(a1, a3), (a2, a4)}
    exts = list(enumerate_extensions(C.events, lo, 100))
    assert len(exts) == 6
    assert [a1, a3, a2, a4] in exts and [a2, a4, a1, a3] in exts
    assert check_replica_linearizable(C, 0).linearizable


def test_buggy_flag_version_not_linearizable():
    t = read_trace(fixture_path("fig12"))
    configs = run(t.build_spec(), t.transitions)
    C = configs[9]  # after the merge producing the flag-true version
    v6 = C.H[0]
    assert C.N[v6] == (2, True)
    verdict = check_version_linearizable(C, v6)
    assert verdict.linearizable is False and verdict.violation[0] == v6
    C = configs[10]
    conv = check_convergence(C)
    assert not conv.ok
    a, b = conv.pair
    assert C.L[a] == C.L[b] and C.N[a] != C.N[b]


def test_fixed_flag_same_schedule_is_fine():
    t = read_trace(fixture_path("fig12"))
    C = run(catalog_lookup("ewflag"), t.transitions)[-1]
    assert check_convergence(C).ok and check_lca_lemma(C).ok
    for v in C.N:
        assert check_version_linearizable(C, v).linearizable


def test_reflexive_rc_closure_rejected():
    ops = (("a",), ("b",))
    rc = lambda x, y: x != y  # a->b->a
    spec = MrdtSpec("cyc", 0, lambda s, e: s, lambda l, a, b: a, lambda s, q: s, (("rd",),), ops, rc,
                    lambda x, y: x == y)
    with pytest.raises(ConstraintViolation):
        compute_lo(init_config(spec), spec)


def test_relation_helpers():
    es = [Event(t, 0, ("x",)) for t in (1, 2, 3)]
    rel = LinRelation(frozenset({(es[0], es[1])}), frozenset(es))
    assert extends(es, rel) and not extends([es[1], es[0], es[2]], rel)
    assert lo_irreflexive(rel)
    assert len(list(enumerate_extensions(es, rel, 100))) == 3
    assert len(list(enumerate_extensions(es, rel, 2))) == 2
    with pytest.raises(ValueError):
        list(enumerate_extensions(es, rel, 0))
    assert rel.restrict(es[1:]).pairs == frozenset()


def test_budget_exhaustion_is_inconclusive(orset):
    es = [Event(t, t % 3, ("add", "abcde"[t % 5])) for t in range(1, 8)]
    rel = LinRelation(frozenset(), frozenset(es))
    found, _, explored = find_witness(orset, es, rel, frozenset({("zz", 1)}), node_budget=5)
    assert found is None and explored > 5
    found, _, _ = find_witness(orset, es, rel, frozenset({("zz", 1)}))
    assert found is False


def test_lo_stability_helper(orset):
    C = init_config(orset)
    C = create_branch(C, 1, 0)
    C, _ = apply_op(C, 0, ("add", "a"))
    C1, _ = apply_op(C, 1, ("rem", "a"))
    C2, _ = apply_op(C1, 0, ("rem", "a"))
    assert check_lo_stability(C1, C2) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(["orset", "rwset", "ewflag", "dwflag", "optreg", "swmap", "json"]))
def test_partitions_and_lo_on_random_merges(seed, name):
    spec = catalog_lookup(name)
    sched = generate_schedule(spec, random.Random(seed), replicas=4, events=7)
    configs = run(spec, sched)
    for i, tr in enumerate(sched):
        before, after = configs[i], configs[i + 1]
        lo = compute_lo(after)
        assert lo_irreflexive(lo)
        assert check_lo_stability(before, after) == []
        if isinstance(tr, Merge):
            p = partition_merge_events(after, before.H[tr.r1], before.H[tr.r2], rel=lo)
            assert partition_violations(p) == []
            covered = set().union(*[set(b) | set(c) for _, b, c in p.buckets]) if p.buckets else set()
            assert covered == set(p.l1b | p.l2b)
    C = configs[-1]
    assert check_convergence(C).ok and check_lca_lemma(C).ok


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(["orset", "ewflag-buggy", "optreg", "mvr", "rwset"]))
def test_witness_search_agrees_with_brute_force(seed, name):
    spec = catalog_lookup(name)
    C = run(spec, generate_schedule(spec, random.Random(seed), replicas=3, events=5))[-1]
    lo = compute_lo(C)
    for v in C.N:
        rel = lo.restrict(C.L[v])
        brute = any(apply_sequence(spec, spec.sigma0, x) == C.N[v]
                    for x in enumerate_extensions(C.L[v], rel, 10_000))
        found, witness, _ = find_witness(spec, C.L[v], rel, C.N[v])
        assert found == brute
        if found:
            assert extends(witness, rel) and apply_sequence(spec, spec.sigma0, witness) == C.N[v]
