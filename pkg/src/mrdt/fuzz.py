"""Random schedules over the replicated store and per-transition verdicts."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Optional

from .core import MrdtSpec, apply_sequence, canon, query_state
from .lincheck import (
    ExecutionVerdicts,
    check_convergence,
    check_lca_lemma,
    check_version_linearizable,
    compute_lo,
    extends,
    partition_merge_events,
    partition_violations,
)
from .store import Apply, CreateBranch, Merge, Query, check_structure, init_config, step

DEFAULT_WEIGHTS = {"apply": 50, "merge": 25, "fork": 15, "query": 10}


@dataclass
class Finding:
    kind: str
    transition: int  # index into the schedule, -1 for the initial configuration
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "transition": self.transition, "detail": self.detail}


def generate_schedule(
    spec: MrdtSpec,
    rng: random.Random,
    replicas: int = 3,
    events: int = 8,
    weights: Optional[dict] = None,
) -> list:
    """Draw a well-formed schedule with exactly ``events`` Apply transitions.

    Any two active replicas may be merged at any point, which produces
    intermediate merges of the kind that put local events before LCA events.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    w = dict(DEFAULT_WEIGHTS, **(weights or {}))
    active = [0]
    out: list = []
    applied = 0
    limit = 6 * events + 8
    while applied < events and len(out) < limit:
        kinds = ["apply", "query"]
        if len(active) >= 2:
            kinds.append("merge")
        if len(active) < replicas:
            kinds.append("fork")
        kind = rng.choices(kinds, [w[k] for k in kinds])[0]
        if kind == "apply":
            out.append(Apply(rng.choice(active), rng.choice(spec.ops)))
            applied += 1
        elif kind == "query":
            out.append(Query(rng.choice(active), rng.choice(spec.queries)))
        elif kind == "merge":
            r1, r2 = rng.sample(active, 2)
            out.append(Merge(r1, r2))
        else:
            new = len(active)
            out.append(CreateBranch(new, rng.choice(active)))
            active.append(new)
    # a closing round of merges so the final heads have seen everything
    if len(active) >= 2 and rng.random() < 0.5:
        for r in active[1:]:
            out.append(Merge(0, r))
    return out


@dataclass
class ExecutionResult:
    verdicts: ExecutionVerdicts
    transitions: list  # with timestamps and query answers filled in
    configs: list
    findings: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(self.findings)

    @property
    def first_failure(self) -> Optional[Finding]:
        return self.findings[0] if self.findings else None


class ExecutionChecker:
    """Walks a schedule and checks every intermediate configuration.

    Versions are immutable, so each version's witness is cached and only
    re-validated when new events change lo.
    """

    def __init__(self, spec: MrdtSpec, mode: str = "mrdt", check_partitions: bool = True,
                 check_all_versions: bool = True, stop_on_failure: bool = False):
        self.spec = spec
        self.mode = mode
        self.check_partitions = check_partitions
        self.check_all_versions = check_all_versions
        self.stop_on_failure = stop_on_failure

    def run(self, transitions: list, strict_queries: bool = False) -> ExecutionResult:
        spec = self.spec
        C = init_config(spec, self.mode)
        verdicts = ExecutionVerdicts()
        result = ExecutionResult(verdicts, [], [C])
        witnesses: dict = {}
        lo = compute_lo(C, spec)
        bad_versions: set = set()

        def report(kind, idx, detail, bucket):
            bucket.append((idx, detail))
            result.findings.append(Finding(kind, idx, detail))

        for idx, tr in enumerate(transitions):
            before = C
            C, out = step(C, tr)
            if isinstance(tr, Apply):
                tr = Apply(tr.r, tr.op, out.ts)
                lo_new = compute_lo(C, spec)
                old_pairs = lo_new.restrict(lo.over).pairs
                vis_old = before.vis_plus()
                if not old_pairs <= lo.pairs or any(p in vis_old and p not in old_pairs for p in lo.pairs):
                    report("lo-stability", idx, "lo changed on existing events beyond dropped rc pairs",
                           verdicts.stability_violations)
                lo = lo_new
            elif isinstance(tr, Query):
                if strict_queries and tr.has_expected and canon(tr.expected) != canon(out):
                    report("query-mismatch", idx,
                           f"r{tr.r} {tr.q!r}: recorded {canon(tr.expected)!r}, got {canon(out)!r}",
                           verdicts.query_mismatches)
                tr = Query(tr.r, tr.q, out)
            result.transitions.append(tr)
            result.configs.append(C)
            verdicts.configs += 1

            new_versions = set(C.N) - set(before.N)
            problems = check_structure(C)
            if problems:
                report("structure", idx, problems[0], verdicts.structure_violations)
            if new_versions:
                conv = check_convergence(C, only=new_versions)
                if not conv.ok:
                    report("convergence", idx, conv.detail, verdicts.non_convergent)
                lca = check_lca_lemma(C, only=new_versions)
                if not lca.ok:
                    report("lca-lemma", idx, lca.detail, verdicts.lca_violations)
            if isinstance(tr, Merge) and self.check_partitions:
                v1, v2 = before.H[tr.r1], before.H[tr.r2]
                part = partition_merge_events(C, v1, v2, spec, rel=lo)
                bad = partition_violations(part)
                if bad:
                    report("partition", idx, bad[0], verdicts.partition_violations)

            heads = set(C.H.values())
            targets = sorted(C.N) if self.check_all_versions else sorted(heads)
            for v in targets:
                if v in bad_versions:
                    continue
                rel = lo.restrict(C.L[v])
                w = witnesses.get(v)
                if w is not None and extends(w, rel):
                    continue
                verdict = check_version_linearizable(C, v, spec, rel=rel)
                verdicts.versions_checked += 1
                if verdict.linearizable:
                    witnesses[v] = verdict.witness
                elif verdict.inconclusive:
                    verdicts.inconclusive.append((idx, v))
                else:
                    bad_versions.add(v)
                    level = "head" if v in heads else "version"
                    report("linearizability", idx,
                           f"v{v} ({level}) state {canon(C.N[v])!r} is not reachable by any extension of lo",
                           verdicts.non_linearizable)
            if isinstance(tr, Query):
                v = C.H[tr.r]
                w = witnesses.get(v)
                if w is not None:
                    expect = query_state(spec, apply_sequence(spec, spec.sigma0, w), tr.q)
                    if canon(expect) != canon(tr.expected):
                        report("query-lemma", idx, f"answer {canon(tr.expected)!r} differs from witness answer",
                               verdicts.query_mismatches)
            if self.stop_on_failure and result.findings:
                break
        return result


def run_execution(spec: MrdtSpec, transitions: list, mode: str = "mrdt", **kwargs) -> ExecutionResult:
    strict = kwargs.pop("strict_queries", False)
    return ExecutionChecker(spec, mode, **kwargs).run(transitions, strict_queries=strict)


def iteration_rng(seed: Any, iteration: int) -> random.Random:
    return random.Random(f"fuzz:{seed}:{iteration}")


@dataclass
class FuzzSummary:
    datatype: str
    mode: str
    seed: Any
    iters: int
    replicas: int
    events: int
    executions: int = 0
    configs: int = 0
    versions_checked: int = 0
    non_linearizable: int = 0
    non_convergent: int = 0
    lca_violations: int = 0
    partition_violations: int = 0
    stability_violations: int = 0
    query_mismatches: int = 0
    structure_violations: int = 0
    inconclusive: int = 0
    failing_iterations: list = field(default_factory=list)
    first_failure: Optional[dict] = None

    @property
    def failed(self) -> bool:
        return bool(self.failing_iterations)

    def add(self, iteration: int, res: ExecutionResult, trace_lines: Optional[list] = None) -> None:
        v = res.verdicts
        self.executions += 1
        self.configs += v.configs
        self.versions_checked += v.versions_checked
        self.non_linearizable += len(v.non_linearizable)
        self.non_convergent += len(v.non_convergent)
        self.lca_violations += len(v.lca_violations)
        self.partition_violations += len(v.partition_violations)
        self.stability_violations += len(v.stability_violations)
        self.query_mismatches += len(v.query_mismatches)
        self.structure_violations += len(v.structure_violations)
        self.inconclusive += len(v.inconclusive)
        if res.failed:
            self.failing_iterations.append(iteration)
            if self.first_failure is None:
                self.first_failure = {
                    "iteration": iteration,
                    "finding": res.first_failure.to_json(),
                    "trace": trace_lines,
                }

    def to_json(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "datatype", "mode", "seed", "iters", "replicas", "events", "executions", "configs",
            "versions_checked", "non_linearizable", "non_convergent", "lca_violations",
            "partition_violations", "stability_violations", "query_mismatches",
            "structure_violations", "inconclusive", "failing_iterations", "first_failure")}
        out["passed"] = not self.failed
        return out
