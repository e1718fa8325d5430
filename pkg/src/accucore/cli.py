"""Command line interface: ``accucore compress | verify | bench``.

Input is a comma separated UTF-8 file of numbers. A first row containing
anything that does not parse as a number is taken as a header. Columns are
named by header name or by zero-based index.

Exit codes: 0 success, 1 verification failed, 2 bad usage or input,
3 file could not be read or written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .caratheodory import caratheodory, fast_caratheodory, streaming_caratheodory
from .core import CoresetError, WeightedSet
from .coresets import BOUNDED_KINDS, KINDS, MomentSummary, build
from .verify import REL_TOL, make_rng, max_relative_error

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
VARIANTS = {
    "plain": caratheodory,
    "streaming": streaming_caratheodory,
    "fast": fast_caratheodory,
}
MOMENT_COLUMNS = ("sq_norm_moment", "weight_moment")


class UsageError(Exception):
    """Bad flags or malformed input; exit code 2."""


class IOFailure(Exception):
    """A file could not be read or written; exit code 3."""


@dataclass
class Table:
    names: List[str]
    values: np.ndarray
    has_header: bool

    @property
    def first_data_line(self) -> int:
        return 2 if self.has_header else 1


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_table(path: str) -> Table:
    """Parse a numeric CSV file, detecting an optional header row."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    rows = []
    for line_no, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if row and any(cell.strip() for cell in row):
            rows.append((line_no, [cell.strip() for cell in row]))
    if not rows:
        raise UsageError(f"{path}: no data")
    has_header = not all(_is_number(c) for c in rows[0][1])
    width = len(rows[0][1])
    if has_header:
        names = rows[0][1]
        if len(set(names)) != len(names):
            raise UsageError(f"{path}: duplicate column names in header")
        rows = rows[1:]
    else:
        names = [f"c{j}" for j in range(width)]
    if not rows:
        raise UsageError(f"{path}: header but no data rows")
    values = np.empty((len(rows), width))
    for i, (line_no, row) in enumerate(rows):
        if len(row) != width:
            raise UsageError(f"{path}: row {line_no} has {len(row)} fields, expected {width}")
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise UsageError(
                    f"{path}: row {line_no}, column {names[j]!r}: {cell!r} is not a number"
                ) from None
            if not np.isfinite(v):
                raise UsageError(f"{path}: row {line_no}, column {names[j]!r}: {cell!r} is not finite")
            values[i, j] = v
    return Table(names, values, has_header)


def _column(table: Table, ref: str, flag: str, path: str) -> int:
    if ref in table.names:
        return table.names.index(ref)
    try:
        j = int(ref)
    except ValueError:
        raise UsageError(f"{path}: {flag} column {ref!r} not found") from None
    if not 0 <= j < len(table.names):
        raise UsageError(f"{path}: {flag} index {j} out of range (file has {len(table.names)} columns)")
    return j


def load_dataset(path, kind, weights_col=None, time_col=None, label_col=None):
    """Read ``path`` and lay out its columns for ``kind``.

    Time goes first for one-segment and the label goes last for lms.

    Returns
    -------
    P : WeightedSet
    names : list of str
        Column names in the order of ``P.points``.
    """
    table = read_table(path)
    if kind == "one-segment" and time_col is None:
        raise UsageError("one-segment needs --time-col")
    if kind != "one-segment" and time_col is not None:
        raise UsageError("--time-col only applies to --kind one-segment")
    if kind == "lms" and label_col is None:
        raise UsageError("lms needs --label-col")
    if kind != "lms" and label_col is not None:
        raise UsageError("--label-col only applies to --kind lms")

    used = {}
    for flag, ref in (("--weights-col", weights_col), ("--time-col", time_col), ("--label-col", label_col)):
        if ref is not None:
            j = _column(table, ref, flag, path)
            if j in used.values():
                raise UsageError(f"{path}: column {table.names[j]!r} given to two flags")
            used[flag] = j
    rest = [j for j in range(len(table.names)) if j not in used.values()]
    if "--time-col" in used:
        order = [used["--time-col"]] + rest
    elif "--label-col" in used:
        order = rest + [used["--label-col"]]
    else:
        order = rest
    if not rest:
        raise UsageError(f"{path}: no point columns left after removing weight/time/label columns")

    if "--weights-col" in used:
        weights = table.values[:, used["--weights-col"]]
        if kind in BOUNDED_KINDS and np.any(weights < 0):
            i = int(np.flatnonzero(weights < 0)[0])
            raise UsageError(
                f"{path}: row {i + table.first_data_line}, column "
                f"{table.names[used['--weights-col']]!r}: weight {weights[i]!r} is negative "
                f"but {kind} needs nonnegative weights"
            )
    else:
        weights = np.ones(table.values.shape[0])
    P = WeightedSet(table.values[:, order], weights)
    return P, [table.names[j] for j in order]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def coreset_rows(summary, names):
    """Header and rows of the CSV written for ``summary``."""
    if isinstance(summary, MomentSummary):
        header = list(MOMENT_COLUMNS) + list(names)
        row = [summary.sq_norm_moment, summary.weight_moment] + list(summary.mean_moment)
        return header, [row]
    if "weight" in names:
        raise UsageError("a data column is named 'weight'; pass it as --weights-col or rename it")
    header = list(names) + ["weight"]
    rows = [list(p) + [w] for p, w in zip(summary.points, summary.weights)]
    return header, rows


def write_csv(path: Optional[str], header, rows, stdout):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _emit(path, buf.getvalue(), stdout)


def _emit(path: Optional[str], text: str, stream):
    if path is None:
        stream.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def _report(args, payload: dict, stderr):
    text = json.dumps({"schema": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True) + "\n"
    _emit(args.report, text, stderr)


def load_coreset(path, kind, d):
    """Read a CSV written by ``compress`` back into a summary."""
    table = read_table(path)
    if not table.has_header:
        raise UsageError(f"{path}: coreset file needs a header row")
    if kind == "one-mean-1":
        if tuple(table.names[:2]) != MOMENT_COLUMNS or table.values.shape[0] != 1:
            raise UsageError(f"{path}: expected one row with columns {', '.join(MOMENT_COLUMNS)}, ...")
        row = table.values[0]
        if row.size - 2 != d:
            raise UsageError(f"{path}: moments have dimension {row.size - 2}, data has {d}")
        return MomentSummary(float(row[0]), float(row[1]), row[2:].copy())
    if "weight" not in table.names:
        raise UsageError(f"{path}: coreset file has no 'weight' column")
    wj = table.names.index("weight")
    cols = [j for j in range(len(table.names)) if j != wj]
    if len(cols) != d:
        raise UsageError(f"{path}: coreset has {len(cols)} data columns, original has {d}")
    return WeightedSet(table.values[:, cols], table.values[:, wj])


def cmd_compress(args, stdout, stderr) -> int:
    P, names = load_dataset(args.input, args.kind, args.weights_col, args.time_col, args.label_col)
    summary, report = build(args.kind, P, method=args.variant)
    code = EXIT_OK
    if args.verify is not None:
        report.max_query_rel_error = max_relative_error(args.kind, P, summary, args.verify, args.seed)
        if not report.max_query_rel_error <= REL_TOL:
            code = EXIT_VERIFY
    header, rows = coreset_rows(summary, names)
    write_csv(args.out, header, rows, stdout)
    payload = {"command": "compress", "input": args.input, "n": P.n, "columns": P.d,
               "variant": args.variant, **report.as_dict()}
    if args.verify is not None:
        payload.update({"queries": args.verify, "seed": args.seed, "tolerance": REL_TOL})
    _report(args, payload, stderr)
    return code


def cmd_verify(args, stdout, stderr) -> int:
    P, _ = load_dataset(args.original, args.kind, args.weights_col, args.time_col, args.label_col)
    C = load_coreset(args.coreset, args.kind, P.d)
    err = max_relative_error(args.kind, P, C, args.queries, args.seed)
    passed = err <= REL_TOL
    _report(args, {"command": "verify", "kind": args.kind, "original": args.original,
                   "coreset": args.coreset, "queries": args.queries, "seed": args.seed,
                   "tolerance": REL_TOL, "max_query_rel_error": err, "passed": bool(passed)}, stderr)
    return EXIT_OK if passed else EXIT_VERIFY


def bench_points(n: int, d: int, seed: int) -> WeightedSet:
    """Uniform points in the unit cube with equal weights ``1/n``."""
    return WeightedSet(make_rng(seed).random((n, d)), np.full(n, 1.0 / n))


def cmd_bench(args, stdout, stderr) -> int:
    if args.d < 1:
        raise UsageError(f"--d must be >= 1, got {args.d}")
    if args.n < args.d + 2:
        raise UsageError(f"--n must be at least d + 2 = {args.d + 2}, got {args.n}")
    P = bench_points(args.n, args.d, args.seed)
    start = time.perf_counter()
    result = VARIANTS[args.variant](P)
    seconds = time.perf_counter() - start
    _report(args, {"command": "bench", "n": args.n, "d": args.d, "variant": args.variant,
                   "seed": args.seed, "seconds": seconds, "output_size": len(result)}, stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="accucore", description="Exact coresets for weighted point sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    def columns(p):
        p.add_argument("--kind", required=True, choices=KINDS)
        p.add_argument("--weights-col", help="weight column (name or 0-based index); default all ones")
        p.add_argument("--time-col", help="time column, one-segment only")
        p.add_argument("--label-col", help="label column, lms only")
        p.add_argument("--seed", type=int, default=0, help="seed for the query generator (default 0)")
        p.add_argument("--report", help="write the JSON report here instead of stderr")

    p = sub.add_parser("compress", help="build a coreset from a CSV file")
    p.add_argument("input")
    columns(p)
    p.add_argument("--out", help="coreset CSV path (default stdout)")
    p.add_argument("--verify", type=int, metavar="N", help="check the result on N random queries")
    p.add_argument("--variant", choices=sorted(VARIANTS), default="fast",
                   help="Caratheodory schedule for the bounded kinds (default fast)")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("verify", help="compare a coreset CSV against its original")
    p.add_argument("original")
    p.add_argument("coreset")
    columns(p)
    p.add_argument("--queries", type=int, default=50, help="number of random queries (default 50)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time one Caratheodory variant on random data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--variant", choices=sorted(VARIANTS), default="fast")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name in ("verify", "queries"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            print(f"accucore: error: --{name} must be >= 1", file=stderr)
            return EXIT_USAGE
    try:
        return args.func(args, stdout, stderr)
    except IOFailure as exc:
        print(f"accucore: error: {exc}", file=stderr)
        return EXIT_IO
    except (UsageError, CoresetError) as exc:
        print(f"accucore: error: {exc}", file=stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
