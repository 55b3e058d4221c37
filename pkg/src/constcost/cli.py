"""Command-line entry point: ``constcost <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance
from .domino import delta_type, domino_set, find_shuffle_violation, tally, verify_two_tally
from .matrix import DEFAULT_BUDGET, BudgetExceeded, QsSpecError, contains_pattern, dumps, loads
from .problems import ProblemSpec
from .protocol import (
    PartitionNotFound,
    ProtocolError,
    ThresholdInstance,
    bounded_diameter_threshold,
    eq_gt_protocol,
    naive_thd_protocol,
    threshold_distance,
)
from .protocol.threshold import planted_instance
from .ramsey import NoHomogeneousSet, find_homogeneous, read_coloring
from .reduction import BLOCKY, dumps_witness, is_blocky, loads_witness, search_reduction, verify_witness
from .structure import max_gt_size, shattered_columns

FAMILY_NAMES = {
    "eq": "EQ",
    "gt": "GT",
    "ehd": "EHD",
    "thd": "THD",
    "iip": "IIP",
    "shattered": "SHATTERED_TWO_TALLY",
    "gadget": "EHD2_GADGET",
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    out: str | None = None
    verbose: bool = False

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def read_matrix(path: str, partial: bool | None = None):
    return loads(_read(path), partial)


def read_sets(path: str) -> tuple[list[str], list[str]]:
    """String sets from a matrix file (row and column labels, or the rows themselves),
    or from a plain file with one bitstring per line."""
    text = _read(path)
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = lines[0].split() if lines else []
    if len(head) in (2, 3) and all(h.isdigit() for h in head) and len(lines) > 1 and set(lines[1]) <= set("01*"):
        M = loads(text)
        if M.labeled:
            return list(M.row_labels), list(M.col_labels)
        rows = ["".join("1" if v else "0" for v in r) for r in np.asarray(M.entries, dtype=bool)]
        return rows, rows
    if any(set(ln) - set("01") for ln in lines):
        raise ValueError(f"{path}: not a matrix file or a list of bitstrings")
    return lines, lines


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args, cfg: RunConfig) -> int:
    spec = ProblemSpec(FAMILY_NAMES[args.family], n=args.n, k=args.k, t=args.t, d=args.d)
    _emit(cfg, dumps(spec.build()))
    return 0


def cmd_analyze(args, cfg: RunConfig) -> int:
    M = read_matrix(args.matrix, partial=False)
    lines = [f"shape {M.rows}x{M.cols}"]
    cols = shattered_columns(M, cap=args.vc_cap, budget=cfg.budget)
    lines.append(f"vc_dimension {len(cols)} columns {list(cols)}")
    rep = max_gt_size(M, cap=args.gt_cap, budget=cfg.budget)
    mark = lambda v: f"{v}+" if v >= rep.cap else str(v)
    lines.append(f"max_gt {mark(rep.max_gt)} max_negated_gt {mark(rep.max_negated_gt)}")
    if args.pattern:
        P = read_matrix(args.pattern)
        emb = contains_pattern(M, P, require_distinct=args.distinct, budget=cfg.budget)
        lines.append("pattern NONE" if emb is None else f"pattern rows {list(emb.rows)} cols {list(emb.cols)}")
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_domino(args, cfg: RunConfig) -> int:
    if args.action == "tally":
        t = tally(args.x, args.y)
        text = f"00={t.t00} 01={t.t01} 10={t.t10} 11={t.t11}\n"
    elif args.action == "type":
        dt = delta_type(args.x, args.y, args.delta)
        text = f"signature {' '.join(dt.signature) or '-'} tally {tuple(dt.tally)}\n"
    else:
        Q = read_matrix(args.x, partial=False)
        v = find_shuffle_violation(Q, domino_set(args.delta))
        text = "INVARIANT\n" if v is None else "VIOLATION " + " ".join(v) + "\n"
        _emit(cfg, text)
        return 0 if v is None else 1
    _emit(cfg, text)
    return 0


def cmd_check(args, cfg: RunConfig) -> int:
    M = read_matrix(args.matrix, partial=None if args.what == "two-tally" else False)
    if args.what == "two-tally":
        rep = verify_two_tally(M, args.k)
        text = "PASS\n" if rep.passed else f"FAIL {rep.violation}\n"
        ok = rep.passed
    elif args.what == "blocky":
        lab = is_blocky(M)
        ok = lab is not None
        text = f"BLOCKY a={list(lab.a)} b={list(lab.b)}\n" if ok else "NOT BLOCKY\n"
    elif args.what == "invariance":
        v = find_shuffle_violation(M, domino_set(args.delta))
        ok = v is None
        text = "INVARIANT\n" if ok else "VIOLATION " + " ".join(v) + "\n"
    else:
        rep = max_gt_size(M, cap=args.t, budget=cfg.budget)
        ok = rep.max_gt < args.t and rep.max_negated_gt < args.t
        text = f"{'STABLE' if ok else 'UNSTABLE'} max_gt {rep.max_gt} max_negated_gt {rep.max_negated_gt}\n"
    _emit(cfg, text)
    return 0 if ok else 1


def cmd_run(args, cfg: RunConfig) -> int:
    p = args.protocol
    if p == "gt":
        out, tr = eq_gt_protocol(args.N, args.i, args.j)
    elif p == "naive-thd":
        out, tr = naive_thd_protocol(len(args.x), args.k, args.x, args.y)
    else:
        if args.sets:
            X, Y = read_sets(args.sets)
        elif args.rows and args.cols:
            X, Y = read_sets(args.rows)[0], read_sets(args.cols)[0]
        else:
            raise ValueError("give --sets, or --rows and --cols")
        if p == "bounded-diameter":
            out, tr = bounded_diameter_threshold(sorted(set(X) | set(Y)), args.x, args.y, args.k, debug=True)
        else:
            if args.x not in X or args.y not in Y:
                raise ValueError("x must be a row string and y a column string")
            out, tr = threshold_distance(X, Y, args.x, args.y, args.k, seed=cfg.seed)
    text = f"{out}, queries={tr.queries}\n"
    if args.transcript:
        text += tr.format() + "\n"
    _emit(cfg, text)
    return 0


def sweep_rows(sizes, dims, ks, trials: int, seed: int):
    """One row per (N, d, k): max and mean queries over ``trials`` planted pairs."""
    rows = []
    for run, N in enumerate(sizes):
        for d in dims or [4 * N]:
            rng = np.random.default_rng([seed, run, d])
            X, Y = planted_instance(rng, N // 2, d, near=1.0, max_flips=6)
            inst = ThresholdInstance(X, Y, seed=seed)
            pairs = rng.integers(0, N // 2, size=trials)
            for k in ks:
                counts = [len(threshold_distance(None, None, X[i], Y[i], k, instance=inst)[1]) for i in pairs]
                rows.append((len(inst.Z), d, k, max(counts), round(float(np.mean(counts)), 3), seed))
    return rows


def cmd_sweep(args, cfg: RunConfig) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "d", "k", "max_queries", "mean_queries", "seed"])
    w.writerows(sweep_rows(args.sizes, args.dims, args.k, args.trials, cfg.seed))
    _emit(cfg, buf.getvalue())
    return 0


def cmd_ramsey(args, cfg: RunConfig) -> int:
    coloring = read_coloring(_read(args.coloring), N=args.N)
    T = find_homogeneous(coloring, args.sigma, budget=cfg.budget)
    _emit(cfg, "NONE\n" if T is None else " ".join(map(str, T)) + "\n")
    return 0


def cmd_reduce(args, cfg: RunConfig) -> int:
    target = read_matrix(args.target, partial=False)
    if args.action == "search":
        w = search_reduction(target, BLOCKY, c=args.c, budget=cfg.budget, allow_c2=args.allow_c2)
        _emit(cfg, "NONE\n" if w is None else dumps_witness(w))
        return 0
    w = loads_witness(_read(args.witness))
    ok = verify_witness(target, w)
    _emit(cfg, "VALID\n" if ok else "INVALID\n")
    return 0 if ok else 1


def cmd_accept(args, cfg: RunConfig) -> int:
    results = acceptance.run_all(echo=None)
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} criteria passed")
    _emit(cfg, "\n".join(lines) + "\n")
    return 0 if passed == len(results) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search budget")
    common.add_argument("--out", help="write results here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="constcost", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("gen", help="generate a problem matrix")
    p.add_argument("family", choices=sorted(FAMILY_NAMES))
    for name in ("n", "k", "t", "d"):
        p.add_argument(f"--{name}", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = add("analyze", help="VC dimension, largest GT, optional pattern search")
    p.add_argument("matrix")
    p.add_argument("--vc-cap", type=int, default=20)
    p.add_argument("--gt-cap", type=int, default=8)
    p.add_argument("--pattern")
    p.add_argument("--distinct", action="store_true", help="pattern rows/columns must be distinct vectors")
    p.set_defaults(func=cmd_analyze)

    p = add("domino", help="tallies, types and shuffle invariance")
    p.add_argument("action", choices=("tally", "type", "shuffle"))
    p.add_argument("x", help="first string, or the matrix file for 'shuffle'")
    p.add_argument("y", nargs="?", default="")
    p.add_argument("--delta", default="all", help="dominoes, e.g. '00,11' or 'all'")
    p.set_defaults(func=cmd_domino)

    p = add("check", help="two-tally, blocky, shuffle-invariance or stability checks")
    p.add_argument("what", choices=("two-tally", "blocky", "invariance", "stable"))
    p.add_argument("matrix")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--t", type=int, default=4)
    p.add_argument("--delta", default="all", help="dominoes for 'invariance'")
    p.set_defaults(func=cmd_check)

    p = add("run", help="run a protocol on one input pair")
    p.add_argument("protocol", choices=("gt", "naive-thd", "bounded-diameter", "threshold-distance"))
    p.add_argument("--N", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--sets", help="shared set file (both sides)")
    p.add_argument("--rows", help="row set file")
    p.add_argument("--cols", help="column set file")
    p.add_argument("--transcript", action="store_true")
    p.set_defaults(func=cmd_run)

    p = add("sweep", help="CSV of query counts over planted instances")
    p.add_argument("--sizes", type=_ints, default=[64, 256])
    p.add_argument("--dims", type=_ints, default=None, help="default d = 4N")
    p.add_argument("--k", type=_ints, default=[1, 2, 3])
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_sweep)

    p = add("ramsey", help="homogeneous subset search")
    p.add_argument("action", choices=("find",))
    p.add_argument("coloring", help="lines: subset indices then color")
    p.add_argument("--sigma", type=int, required=True)
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_ramsey)

    p = add("reduce", help="search or verify reductions to blocky queries")
    p.add_argument("action", choices=("search", "verify"))
    p.add_argument("target")
    p.add_argument("witness", nargs="?")
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--allow-c2", action="store_true")
    p.set_defaults(func=cmd_reduce)

    p = add("accept", help="run the acceptance suite")
    p.set_defaults(func=cmd_accept)
    return parser


def _require(args, parser):
    if args.command == "run":
        need = {"gt": ("N", "i", "j")}.get(args.protocol, ("x", "y"))
        missing = [n for n in need if getattr(args, n) is None]
        if missing:
            parser.error(f"run {args.protocol} needs --" + ", --".join(missing))
    if args.command == "domino" and args.action != "shuffle" and not args.y:
        parser.error(f"domino {args.action} needs two strings")
    if args.command == "reduce" and args.action == "verify" and not args.witness:
        parser.error("reduce verify needs a witness file")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _require(args, parser)
    try:
        params = {k: v for k, v in vars(args).items() if k not in ("func", "seed", "budget", "out", "verbose")}
        cfg = RunConfig(args.command, params=params, seed=args.seed, budget=args.budget, out=args.out, verbose=args.verbose)
        return args.func(args, cfg)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 2
    except (ValueError, QsSpecError, ProtocolError, PartitionNotFound, NoHomogeneousSet, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
