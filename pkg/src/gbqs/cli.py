"""Command-line surface: validate quorum specs, build and dump span
programs, enumerate quorums, microbenchmark the encodings, and run
simulated consensus experiments.

Exit codes: 0 on success, 1 when a verdict fails (not a quorum, or a
safety/liveness violation), 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from gbqs.config import SpecError, emit_spec, parse_spec_document
from gbqs.formula import (
    Formula,
    Literal,
    Threshold,
    enumerate_minimal_quorums,
    evaluate,
    parties as formula_parties,
)
from gbqs.msp import LupChecker, Msp, UnfactorableError, accepts, build_msp, predicted_dims
from gbqs.simulate import check_liveness, check_safety, load_experiment, run_simulation


@dataclass(frozen=True)
class BenchReport:
    encoding: str
    memory_bytes: int
    median_ns: int
    mean_ns: int
    trials: int
    seed: int


def _deep_sizeof(obj, seen=None) -> int:
    """Recursive in-memory footprint estimate (shared objects counted once)."""
    if seen is None:
        seen = set()
    oid = id(obj)
    if oid in seen:
        return 0
    seen.add(oid)
    size = sys.getsizeof(obj)
    if isinstance(obj, dict):
        size += sum(_deep_sizeof(k, seen) + _deep_sizeof(v, seen) for k, v in obj.items())
    elif isinstance(obj, (list, tuple, set, frozenset)):
        size += sum(_deep_sizeof(x, seen) for x in obj)
    elif hasattr(obj, "__dataclass_fields__"):
        for name in obj.__dataclass_fields__:
            size += _deep_sizeof(getattr(obj, name), seen)
    elif hasattr(obj, "__slots__"):
        for name in obj.__slots__:
            if hasattr(obj, name):
                size += _deep_sizeof(getattr(obj, name), seen)
    return size


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _write_out(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(headers)
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)))


def _plain_threshold(formula: Formula) -> tuple[int, int] | None:
    """(n, k) when the formula is one threshold over bare literals."""
    if isinstance(formula, Threshold) and all(
        isinstance(c, Literal) for c in formula.children
    ):
        return (len(formula.children), formula.k)
    return None


# --- check -------------------------------------------------------------------


def cmd_check(args) -> int:
    doc = parse_spec_document(_read(args.spec))
    universe = set(doc.universe)
    subset = [p.strip() for p in args.subset.split(",") if p.strip()] if args.subset else []
    unknown = set(subset) - universe
    if unknown:
        raise SpecError(f"unknown parties in subset: {sorted(unknown)}")
    members = frozenset(subset)
    encodings = args.encoding or ["mbf"]
    verdicts = {}
    for enc in encodings:
        if enc == "mbf":
            verdicts[enc] = (evaluate(doc.formula, members), None)
        elif enc in ("msp", "msp-lup"):
            msp = build_msp(doc.formula)
            if enc == "msp-lup":
                try:
                    witness = LupChecker(msp).accepts(members)
                except UnfactorableError:
                    witness = accepts(msp, members)
            else:
                witness = accepts(msp, members)
            verdicts[enc] = (witness.accepted, witness.redundant)
        elif enc == "counting":
            nk = _plain_threshold(doc.formula)
            if nk is None:
                raise SpecError("counting encoding needs a plain threshold spec")
            verdicts[enc] = (len(members) >= nk[1], None)
    agreed = {v for v, _ in verdicts.values()}
    for enc, (ok, redundant) in verdicts.items():
        line = f"{enc}: {'quorum' if ok else 'not-quorum'}"
        if ok and redundant:
            line += f" (redundant: {','.join(sorted(redundant))})"
        print(line)
    if len(agreed) > 1:
        print("error: encodings disagree", file=sys.stderr)
        return 1
    return 0 if agreed == {True} else 1


# --- enumerate -----------------------------------------------------------------


def cmd_enumerate(args) -> int:
    doc = parse_spec_document(_read(args.spec))
    qs = enumerate_minimal_quorums(doc.formula, max_universe=args.max_universe)
    lines = [",".join(sorted(q)) for q in qs.quorums]
    print(f"universe={len(qs.universe)} minimal_quorums={len(qs.quorums)}")
    if not args.count_only:
        for line in lines:
            print(line)
    _write_out(args, "\n".join(lines) + "\n")
    return 0


# --- build-msp -----------------------------------------------------------------


def cmd_build_msp(args) -> int:
    doc = parse_spec_document(_read(args.spec))
    msp = build_msp(doc.formula)
    pm, pd = predicted_dims(doc.formula)
    print(f"rows={msp.m} cols={msp.d} predicted_rows={pm} predicted_cols={pd}")
    dump = msp.dump()
    if args.out:
        _write_out(args, dump)
    else:
        sys.stdout.write(dump)
    return 0


# --- microbench ----------------------------------------------------------------


def _bench_encodings(formula: Formula, requested: list[str] | None) -> list[str]:
    if requested:
        return requested
    encodings = ["mbf", "msp", "msp-lup"]
    if _plain_threshold(formula) is not None:
        encodings.insert(0, "counting")
    return encodings


def run_microbench(
    formula: Formula, trials: int, seed: int, encodings: list[str] | None = None,
    warmup: int = 100,
) -> list[BenchReport]:
    """Time quorum checks over seeded uniformly random subsets.

    The same subset sequence is replayed for every encoding; the first
    ``warmup`` checks are discarded.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    universe = sorted(formula_parties(formula))
    rng = random.Random(seed)
    subsets = [
        frozenset(p for p in universe if rng.random() < 0.5)
        for _ in range(warmup + trials)
    ]
    reports = []
    for enc in _bench_encodings(formula, encodings):
        if enc == "counting":
            nk = _plain_threshold(formula)
            if nk is None:
                raise SpecError("counting encoding needs a plain threshold spec")
            k = nk[1]
            checker = lambda s: len(s) >= k
            memory = len(f"{nk[0]} {nk[1]}".encode()) + _deep_sizeof(nk)
        elif enc == "mbf":
            checker = lambda s: evaluate(formula, s)
            memory = len(emit_spec(formula)) + _deep_sizeof(formula)
        elif enc == "msp":
            msp = build_msp(formula)
            checker = lambda s, m=msp: accepts(m, s).accepted
            memory = len(msp.dump().encode()) + _deep_sizeof(msp)
        elif enc == "msp-lup":
            msp = build_msp(formula)
            try:
                lup = LupChecker(msp)
                checker = lambda s, c=lup: c.accepts(s).accepted
                memory = len(msp.dump().encode()) + _deep_sizeof(msp) + _deep_sizeof(
                    lup.factors
                )
            except UnfactorableError:
                checker = lambda s, m=msp: accepts(m, s).accepted
                memory = len(msp.dump().encode()) + _deep_sizeof(msp)
        else:
            raise SpecError(f"unknown encoding {enc!r}")
        samples = []
        for i, subset in enumerate(subsets):
            t0 = time.perf_counter_ns()
            checker(subset)
            dt = time.perf_counter_ns() - t0
            if i >= warmup:
                samples.append(dt)
        reports.append(
            BenchReport(
                encoding=enc,
                memory_bytes=memory,
                median_ns=int(statistics.median(samples)),
                mean_ns=int(statistics.fmean(samples)),
                trials=trials,
                seed=seed,
            )
        )
    return reports


def cmd_microbench(args) -> int:
    doc = parse_spec_document(_read(args.spec))
    reports = run_microbench(doc.formula, args.trials, args.seed, args.encoding)
    rows = [
        [
            r.encoding,
            str(r.memory_bytes),
            str(r.median_ns),
            str(r.mean_ns),
            str(r.trials),
            str(r.seed),
        ]
        for r in reports
    ]
    _print_table(
        ["encoding", "memory_bytes", "median_ns", "mean_ns", "trials", "seed"], rows
    )
    for r in reports:
        print(
            f"microbench encoding={r.encoding} memory={r.memory_bytes} "
            f"median_ns={r.median_ns} mean_ns={r.mean_ns} trials={r.trials} seed={r.seed}"
        )
    _write_out(
        args,
        "\n".join("\t".join(row) for row in rows) + "\n",
    )
    return 0


# --- simulate ------------------------------------------------------------------


def cmd_simulate(args) -> int:
    base = load_experiment(_read(args.config))
    failures = 0
    last_trace = None
    failing_trace = None
    for offset in range(args.seeds):
        cfg = base if args.seeds == 1 else _reseed(base, base.seed + offset)
        trace = run_simulation(cfg)
        last_trace = trace
        safety = check_safety(trace)
        liveness = check_liveness(trace, cfg)
        verdict = "ok" if safety.ok and liveness.ok else "VIOLATION"
        print(
            f"seed={cfg.seed} decisions={trace.metrics['decisions']} "
            f"views={trace.metrics['max_view']} messages={trace.metrics['messages']} "
            f"safety={'ok' if safety.ok else 'violated'} "
            f"liveness={'ok' if liveness.ok else 'stalled'} -> {verdict}"
        )
        if not safety.ok:
            print(f"  {safety}")
        if not liveness.ok:
            print(f"  {liveness}")
        elif not liveness.premise_met:
            print("  note: liveness premise never met in this run")
        if not (safety.ok and liveness.ok):
            failures += 1
            if failing_trace is None:
                failing_trace = trace
    trace_to_write = failing_trace or last_trace
    if args.out and trace_to_write is not None:
        Path(args.out).write_text(trace_to_write.serialize())
    if args.seeds > 1:
        print(f"sweep: {args.seeds - failures}/{args.seeds} runs clean")
    return 1 if failures else 0


def _reseed(cfg, seed):
    from dataclasses import replace

    return replace(cfg, seed=seed)


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbqs",
        description="Generalized Byzantine quorum systems and HotStuff simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check whether a subset is a quorum")
    p.add_argument("spec", help="quorum specification file")
    p.add_argument("--subset", default="", help="comma-separated party ids")
    p.add_argument(
        "--encoding",
        action="append",
        choices=["mbf", "msp", "msp-lup", "counting"],
        help="encoding(s) to check with (default: mbf)",
    )
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("enumerate", help="enumerate the minimal quorums")
    p.add_argument("spec")
    p.add_argument("--max-universe", type=int, default=24)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("build-msp", help="build and dump the span program")
    p.add_argument("spec")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_msp)

    p = sub.add_parser("microbench", help="time quorum checks per encoding")
    p.add_argument("spec")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--encoding",
        action="append",
        choices=["mbf", "msp", "msp-lup", "counting"],
        help="encoding(s) to bench (default: all applicable)",
    )
    p.add_argument("--out")
    p.set_defaults(func=cmd_microbench)

    p = sub.add_parser("simulate", help="run a consensus experiment")
    p.add_argument("config", help="experiment config file")
    p.add_argument("--seeds", type=int, default=1, help="sweep this many seeds")
    p.add_argument("--out", help="write the trace (first failing, else last)")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
