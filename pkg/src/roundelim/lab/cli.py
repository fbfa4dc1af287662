"""Command line entry point: ``lab run``, ``lab report`` and ``lab trace``."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .suites import SUITES, ExperimentConfig, emit_report, run_suite


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lab", description="Round elimination verification lab")
    sub = ap.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("--suite", required=True, help=f"one of: {', '.join(SUITES)}")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True, help="JSON-lines output path")
    run.add_argument("--cap-qubits", type=int, default=None)
    run.add_argument("--cap-branches", type=int, default=None)
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--tolerance", type=float, default=None)
    run.add_argument("--timings", action="store_true", help="add per-record wall time (breaks byte identity)")

    rep = sub.add_parser("report", help="summarise a JSON-lines record file as CSV")
    rep.add_argument("--in", dest="inp", required=True)
    rep.add_argument("--out", default=None, help="CSV path (default: stdout)")

    tr = sub.add_parser("trace", help="parameter ledgers of the lower-bound iterations")
    tsub = tr.add_subparsers(dest="which", required=True)
    gt = tsub.add_parser("gt")
    gt.add_argument("--n", type=int, required=True)
    gt.add_argument("--l", required=True, help="comma-separated message lengths l_1..l_t")
    gt.add_argument("--out", default=None)
    pred = tsub.add_parser("pred")
    pred.add_argument("--m-exp", type=int, required=True, help="log log m")
    pred.add_argument("--c2", type=int, default=1)
    pred.add_argument("--c3", type=int, default=1)
    pred.add_argument("--t", type=int, default=None, help="override the round count")
    pred.add_argument("--delta", default="97/300")
    pred.add_argument("--out", default=None)
    return ap


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "run":
            cfg = ExperimentConfig.from_env(args.suite, seed=args.seed, out=args.out, cap_qubits=args.cap_qubits,
                                            cap_branches=args.cap_branches, trials=args.trials,
                                            tolerance=args.tolerance, timings=args.timings)
            records = run_suite(cfg)
            failures = sum(not r["pass"] for r in records)
            print(f"{cfg.suite}: {len(records)} records, {failures} failures -> {cfg.out}", file=sys.stderr)
            return 1 if failures else 0
        if args.cmd == "report":
            _emit(emit_report(args.inp), args.out)
            return 0
        from ..problems.tracers import trace_gt_bound, trace_predecessor_bound
        if args.which == "gt":
            ls = [int(v) for v in args.l.split(",") if v.strip()]
            tr = trace_gt_bound(args.n, ls)
            _emit(tr.to_csv(), args.out)
            print(f"eps_t = {tr.eps_final}, n_t = {tr.n_final}, failure = {tr.failure_stage}, "
                  f"contradiction = {tr.contradiction}", file=sys.stderr)
            return 0 if tr.failure_stage is None else 1
        tr = trace_predecessor_bound(args.m_exp, args.c2, args.c3, Fraction(args.delta), args.t)
        _emit(tr.to_csv(), args.out)
        print(f"t = {tr.t}, eps_final = {tr.eps_final}, collapse = {tr.collapse_stage}, "
              f"witness = {tr.witness_ok}, contradiction = {tr.contradiction}", file=sys.stderr)
        return 0 if tr.contradiction else 1
    except (KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"lab: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
