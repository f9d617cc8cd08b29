"""Command-line entry point.

Exit codes: 0 success, 1 a bound or acceptance check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys
from pathlib import Path

from .adversary import random_label_stream, random_stream
from .core import ClassFormatError, format_class, parse_bit_table, write_stream
from .dims import CapExceeded, DimensionReport, dimension_report, eq_query_complexity, mb_exact
from .experiment import ADVERSARIES, LEARNERS, ConfigError, ExperimentConfig, load_class, run_experiment
from .games import GameMatrix, ToleranceNotReached, class_matrix, game_value, triangular_dim


class InputError(Exception):
    pass


@contextlib.contextmanager
def _output(path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _write_rows(args, header, rows) -> None:
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if v == float("inf") else f"{v:.6g}"
    return str(v)


def read_matrix(path: str) -> GameMatrix:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"matrix file {path} not found")
    rows = parse_bit_table(p.read_text(), str(p), rows_first=True)
    if not rows:
        raise InputError(f"{path}: empty matrix")
    return GameMatrix.from_rows(rows)


def cmd_dims(args) -> int:
    C = load_class(args.class_ref)
    H = load_class(args.hypotheses) if args.hypotheses else None
    rep = dimension_report(C, H)
    _write_rows(args, DimensionReport.FIELDS, [rep.row()])
    return 0


def cmd_game(args) -> int:
    if args.matrix:
        G = read_matrix(args.matrix)
    elif args.class_ref:
        G = class_matrix(load_class(args.class_ref))
    else:
        raise InputError("give --matrix FILE or --class")
    if args.what == "tridim":
        _write_rows(args, ["triangular_dim"], [[triangular_dim(G)]])
        return 0
    sol = game_value(G, mode=args.mode, tol=args.tol)
    strat = lambda s: " ".join(f"{i}:{_fmt(float(w))}" for i, w in zip(s.support, s.weights))
    _write_rows(args, ["value", "duality_gap", "iterations", "row_strategy", "col_strategy"],
                [[sol.value if args.mode == "exact" else _fmt(float(sol.value)),
                  _fmt(float(sol.duality_gap)), sol.iterations,
                  strat(sol.row_strategy), strat(sol.col_strategy)]])
    return 0


def cmd_mb_exact(args) -> int:
    C = load_class(args.class_ref)
    H = load_class(args.hypotheses) if args.hypotheses else C
    res = mb_exact(C, H, cap=args.cap)
    first = "".join(map(str, res.optimal_first_hypothesis)) if res.optimal_first_hypothesis else ""
    _write_rows(args, ["mb", "optimal_first_hypothesis", "states"], [[_fmt(res.value), first, res.states]])
    return 0


def cmd_eq(args) -> int:
    C = load_class(args.class_ref)
    H = load_class(args.hypotheses) if args.hypotheses else C
    eq = eq_query_complexity(C, H, cap=args.cap)
    mb = mb_exact(C, H, cap=args.cap).value
    _write_rows(args, ["eq_queries", "mb"], [[_fmt(eq), _fmt(mb)]])
    return 0


def cmd_gen(args) -> int:
    C = load_class(args.spec)
    if args.what == "class":
        with _output(args.out) as fh:
            fh.write(format_class(C))
        return 0
    if args.labels == "realizable":
        stream = random_stream(C, args.T, args.seed)
    else:
        stream = random_label_stream(C.n, args.T, args.seed)
    if args.out:
        write_stream(stream, args.out)
    else:
        sys.stdout.write("".join(f"{x},{y}\n" for x, y in stream))
    return 0


def cmd_run(args) -> int:
    adversary = args.adversary or ("replay" if args.stream else "worst")
    if args.learner == "agnostic" and adversary == "worst":
        adversary = "random"
    cfg = ExperimentConfig(
        learner=args.learner, class_ref=args.class_ref, hypotheses_ref=args.hypotheses,
        adversary=adversary, T=args.T, eps=args.eps, seed=args.seed, stream=args.stream,
        out=args.out, ledger=args.ledger,
    )
    rec = run_experiment(cfg)
    if not args.out:
        rec.write_csv(sys.stdout)
    summary = " ".join(f"{k}={_fmt(v)}" for k, v in rec.summary.items())
    print(f"config={rec.config_hash} {summary}", file=sys.stderr)
    return 0 if rec.passed else 1


def cmd_verify(args) -> int:
    from .verify import verify_suite

    only = [int(c) for c in args.criteria.split(",")] if args.criteria else None
    report = verify_suite(args.level, only=only, progress=lambda line: print(line, flush=True))
    for line in report.lines()[len(report.results):]:
        print(line)
    if args.out:
        rows = [[r.number, r.name, "pass" if r.passed else "fail", r.measured, r.bound,
                 f"{r.seconds:.2f}", r.limit] for r in report.results]
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["criterion", "name", "status", "measured", "bound", "seconds", "limit"])
            w.writerows(rows)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write CSV output here instead of stdout")
    common.add_argument("--format", choices=["csv"], default=argparse.SUPPRESS, help="output format")

    p = argparse.ArgumentParser(prog="mistakebound", parents=[common],
                                description="Mistake bounds and online learners for finite concept classes.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=func)
        return sp

    def class_args(sp, hyp=True, required=True):
        sp.add_argument("--class", dest="class_ref", required=required,
                        help="class file, or a generator such as singletons:3 or random:5:8:1")
        if hyp:
            sp.add_argument("--hypotheses", help="hypothesis class file (defaults to the class itself)")

    sp = add("dims", cmd_dims, "dimension report as one CSV row")
    class_args(sp)

    sp = add("game", cmd_game, "value or triangular dimension of a 0/1 matrix game")
    sp.add_argument("what", choices=["value", "tridim"])
    sp.add_argument("--matrix", help='matrix file: "r c" then r lines of c bits')
    class_args(sp, hyp=False, required=False)
    sp.add_argument("--mode", choices=["exact", "iter", "iterative"], default="exact")
    sp.add_argument("--tol", type=float, default=1e-4)

    for name, func, help in (("mb-exact", cmd_mb_exact, "optimal mistake bound with restricted hypotheses"),
                             ("eq", cmd_eq, "equivalence-query complexity")):
        sp = add(name, func, help)
        class_args(sp)
        sp.add_argument("--cap", type=int, default=10**6, help="state budget for the exact search")

    sp = add("gen", cmd_gen, "write a generated class or example stream")
    sp.add_argument("what", choices=["class", "stream"])
    sp.add_argument("spec", help="generator (singletons:N, thresholds:N, powerset:D, random:N:M:SEED) or class file")
    sp.add_argument("--T", type=int, default=16)
    sp.add_argument("--labels", choices=["realizable", "random"], default="realizable")

    sp = add("run", cmd_run, "run a learner against an adversary and write the per-round trace")
    sp.add_argument("--learner", choices=LEARNERS, required=True)
    class_args(sp)
    sp.add_argument("--adversary", choices=ADVERSARIES)
    sp.add_argument("--stream", help="example stream file (x,y per line)")
    sp.add_argument("--T", type=int, default=64)
    sp.add_argument("--eps", help="margin for the vote learner, e.g. 0.25 or 1/3")
    sp.add_argument("--ledger", help="append a summary row to this results CSV")

    sp = add("verify", cmd_verify, "run the acceptance suite")
    sp.add_argument("--level", choices=["quick", "full"], default="quick")
    sp.add_argument("--criteria", help="comma-separated criterion numbers to run")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", 0), ("out", None), ("format", "csv")):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except (InputError, ConfigError, ClassFormatError, FileNotFoundError, ValueError,
            CapExceeded, ToleranceNotReached) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
