"""Command-line front end: fuzz, vc, replay and shrink.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from .core import DEFAULT_ALPHABET
from .datatypes import CATALOG
from .fuzz import FuzzSummary, generate_schedule, iteration_rng, run_execution
from .trace import (
    Trace,
    TraceDivergence,
    TraceError,
    build_spec,
    read_trace,
    replay_trace,
    shrink_trace,
    trace_lines,
    write_trace,
)
from .vcsuite import DEFAULT_CASES, run_full_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _alphabet(text: Optional[str]) -> tuple:
    if not text:
        return DEFAULT_ALPHABET
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    if not items:
        raise UsageError("--alphabet needs at least one element")
    return items


def _spec(name: str, alphabet: tuple, mode: str):
    try:
        return build_spec(name, alphabet, mode)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _emit(obj: dict, out: Optional[str]) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- fuzz ---------------------------------------------------------------------


def fuzz_iteration(name: str, alphabet: tuple, mode: str, seed, i: int, replicas: int, events: int):
    """One fuzz iteration; returns (iteration, result, trace lines or None). Picklable for workers."""
    spec = build_spec(name, alphabet, mode)
    schedule = generate_schedule(spec, iteration_rng(seed, i), replicas, events)
    res = run_execution(spec, schedule, mode)
    lines = None
    if res.failed:
        lines = trace_lines(Trace(name, res.transitions, mode, seed, alphabet))
    return i, res, lines


def _fuzz_chunk(args):
    name, alphabet, mode, seed, indices, replicas, events = args
    out = []
    for i in indices:
        _, res, lines = fuzz_iteration(name, alphabet, mode, seed, i, replicas, events)
        res.configs = []  # snapshots hold closures; keep only verdicts across processes
        out.append((i, res, lines))
    return out


def cmd_fuzz(datatype: str, replicas: int = 3, events: int = 8, iters: int = 100, seed=0,
             mode: str = "mrdt", alphabet: tuple = DEFAULT_ALPHABET, jobs: int = 1) -> FuzzSummary:
    _spec(datatype, alphabet, mode)
    if iters <= 0:
        raise UsageError("--iters must be positive")
    if replicas < 1:
        raise UsageError("--replicas must be at least 1")
    if events < 0:
        raise UsageError("--events must be non-negative")
    summary = FuzzSummary(datatype, mode, seed, iters, replicas, events)
    if jobs <= 1:
        for i in range(iters):
            _, res, lines = fuzz_iteration(datatype, alphabet, mode, seed, i, replicas, events)
            summary.add(i, res, lines)
        return summary
    chunks = [(datatype, alphabet, mode, seed, list(range(k, iters, jobs)), replicas, events) for k in range(jobs)]
    results = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_fuzz_chunk, chunks):
            results.extend(part)
    for i, res, lines in sorted(results, key=lambda t: t[0]):
        summary.add(i, res, lines)
    return summary


# -- vc -----------------------------------------------------------------------


def cmd_vc(datatype: str, mode: str = "mrdt", cases: int = DEFAULT_CASES, seed=0,
           alphabet: tuple = DEFAULT_ALPHABET, include_optional: bool = False):
    spec = _spec(datatype, alphabet, mode)
    if cases <= 0:
        raise UsageError("--cases must be positive")
    return run_full_suite(spec, mode=mode, cases=cases, rng_seed=seed, include_optional=include_optional)


# -- argparse -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mrdt", description="Check mergeable replicated datatypes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, datatype=True):
        if datatype:
            sp.add_argument("--datatype", required=True, help=f"one of: {', '.join(sorted(CATALOG))}")
            sp.add_argument("--mode", choices=("mrdt", "crdt"), default="mrdt")
            sp.add_argument("--alphabet", default=None, help="comma separated element names")
        sp.add_argument("--seed", default="0")
        sp.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    f = sub.add_parser("fuzz", help="random executions checked after every transition")
    common(f)
    f.add_argument("--replicas", type=int, default=3)
    f.add_argument("--events", type=int, default=8)
    f.add_argument("--iters", type=int, default=100)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--trace-out", default=None, help="write the first failing trace here")

    v = sub.add_parser("vc", help="run the verification-condition suite")
    common(v)
    v.add_argument("--cases", type=int, default=DEFAULT_CASES)
    v.add_argument("--optional", action="store_true", help="include optional mirrored rows")

    r = sub.add_parser("replay", help="re-run a trace file and check its verdicts")
    r.add_argument("trace")
    r.add_argument("--out", default=None)

    s = sub.add_parser("shrink", help="minimise a failing trace")
    s.add_argument("trace")
    s.add_argument("--out", default=None, help="write the shrunk trace here instead of stdout")
    return p


def _seed(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _report_from_result(res, trace: Trace) -> dict:
    v = res.verdicts
    return {
        "spec": trace.spec_name,
        "mode": trace.mode,
        "transitions": len(trace.transitions),
        "configs": v.configs,
        "non_linearizable": len(v.non_linearizable),
        "non_convergent": len(v.non_convergent),
        "lca_violations": len(v.lca_violations),
        "partition_violations": len(v.partition_violations),
        "stability_violations": len(v.stability_violations),
        "query_mismatches": len(v.query_mismatches),
        "structure_violations": len(v.structure_violations),
        "inconclusive": len(v.inconclusive),
        "findings": [f.to_json() for f in res.findings],
        "passed": not res.failed,
    }


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "fuzz":
            summary = cmd_fuzz(args.datatype, args.replicas, args.events, args.iters, _seed(args.seed),
                               args.mode, _alphabet(args.alphabet), args.jobs)
            _emit(summary.to_json(), args.out)
            if summary.failed and args.trace_out:
                with open(args.trace_out, "w", encoding="utf-8") as fh:
                    fh.write("\n".join(summary.first_failure["trace"]) + "\n")
            if summary.failed:
                return EXIT_FAIL
            return EXIT_INCONCLUSIVE if summary.inconclusive else EXIT_OK
        if args.command == "vc":
            result = cmd_vc(args.datatype, args.mode, args.cases, _seed(args.seed), _alphabet(args.alphabet),
                            args.optional)
            _emit(result.to_json(), args.out)
            return EXIT_OK if result.passed else EXIT_FAIL
        if args.command == "replay":
            trace = read_trace(args.trace)
            res = replay_trace(trace)
            _emit(_report_from_result(res, trace), args.out)
            if res.failed:
                return EXIT_FAIL
            return EXIT_INCONCLUSIVE if res.verdicts.inconclusive else EXIT_OK
        if args.command == "shrink":
            trace = read_trace(args.trace)
            try:
                small = shrink_trace(trace)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            if args.out:
                write_trace(small, args.out)
            else:
                sys.stdout.write("\n".join(trace_lines(small)) + "\n")
            print(f"shrunk {len(trace)} -> {len(small)} transitions", file=sys.stderr)
            return EXIT_OK
    except (UsageError, TraceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceDivergence as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
