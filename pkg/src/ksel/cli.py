"""Batch command-line front end.

Three subcommands: ``select`` runs one feature-selection job and emits a
JSON (or CSV) run report, ``bench-synth`` reproduces the synthetic
recovery benchmark as a CSV table, and ``path`` emits the coefficient
path over a log-spaced penalty grid.  ``--plot FILE`` renders the
matching figure next to any of those outputs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 completed with a
flag (solver non-convergence or support size outside the search window).
Output files are written in a single operation after the run finishes,
so failures never leave partial output.  The ``KSEL_THREADS`` environment
variable caps worker threads; it affects speed only, never values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from .dataset import TASKS, Dataset, gen_data1, gen_data2, load_csv
from .errors import DataError, KselError
from .kernels import DEFAULT_NOCCO_EPSILON, load_precomputed_gram
from .parallel import parallel_map, thread_count
from .selection import (
    FHSIC,
    HSIC_LASSO,
    NOCCO_LASSO,
    SELECTORS,
    build_feature_grams,
    build_output_gram,
    fhsic_forward_select,
    fraction_correct,
    hsic_lasso_select,
    nocco_lasso_select,
    redundancy_rate,
)
from .dependence import HSIC_METHOD, NOCCO_METHOD, assemble_problem
from .solver import SolverConfig, lambda_max, reg_path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_FLAGGED = 3

_GENERATORS = {"data1": (gen_data1, 4), "data2": (gen_data2, 3)}


class _UsageError(Exception):
    """Bad flag combination detected after parsing."""


class _Parser(argparse.ArgumentParser):
    # exit-code contract wants 1 for usage errors, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cell(value) -> str:
    """Lossless cell formatting: floats keep full round-trip precision."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _write_output(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _resolve_dataset(args) -> tuple[Dataset, dict]:
    if args.input and args.data:
        raise _UsageError("--input and --data are mutually exclusive")
    if args.input:
        if args.output_col is None:
            raise _UsageError("--output-col is required with --input")
        if args.task is None:
            raise _UsageError("--task is required with --input")
        data = load_csv(args.input, args.output_col, args.task)
        descriptor = {
            "source": str(args.input),
            "task": args.task,
            "d": data.d,
            "n": data.n,
        }
        return data, descriptor
    if args.data:
        generator, _ = _GENERATORS[args.data]
        data = generator(args.n, args.seed)
        descriptor = {
            "source": args.data,
            "task": data.task,
            "d": data.d,
            "n": data.n,
            "seed": args.seed,
        }
        return data, descriptor
    raise _UsageError("one of --input or --data is required")


def _run_method(method, data, k, lam, epsilon, output_gram):
    if method == HSIC_LASSO:
        return hsic_lasso_select(data, k, output_gram=output_gram, lam=lam)
    if method == NOCCO_LASSO:
        return nocco_lasso_select(
            data, k, epsilon=epsilon, output_gram=output_gram, lam=lam
        )
    if lam is not None:
        raise _UsageError("--lambda is not applicable to fhsic")
    return fhsic_forward_select(data, k, output_gram=output_gram)


def _is_flagged(result, k) -> bool:
    if result.method == FHSIC:
        return False
    diag = result.diagnostics
    if not diag.get("converged", True):
        return True
    if diag.get("in_window") is False:
        return True
    return len(result.ranked) < k


def _ranked_entries(data, result) -> list[dict]:
    feature_bw = result.diagnostics.get("feature_bandwidths")
    step_bw = result.diagnostics.get("step_bandwidths")
    entries = []
    for rank, (j, score) in enumerate(zip(result.ranked, result.scores), start=1):
        if feature_bw is not None:
            bw = feature_bw[j]
        elif step_bw is not None:
            bw = step_bw[rank - 1]
        else:
            bw = None
        entries.append(
            {
                "rank": rank,
                "feature": j + 1,  # 1-based in all user-facing output
                "name": data.name_of(j),
                "score": score,
                "bandwidth": bw,
            }
        )
    return entries


def cmd_select(args) -> int:
    data, descriptor = _resolve_dataset(args)
    output_gram = (
        load_precomputed_gram(args.output_gram, data.n) if args.output_gram else None
    )
    epsilon = args.epsilon if args.epsilon is not None else DEFAULT_NOCCO_EPSILON
    started = time.perf_counter()
    result = _run_method(args.method, data, args.k, args.lam, epsilon, output_gram)
    total = time.perf_counter() - started

    red = None
    if len(result.ranked) >= 2:
        red = redundancy_rate(data, result.ranked)
    flagged = _is_flagged(result, args.k)
    diag = dict(result.diagnostics)
    stage_seconds = diag.pop("stage_seconds", {})
    stage_seconds["total"] = total
    diag.pop("feature_bandwidths", None)  # per-feature list lives in `ranked`
    report = {
        "method": result.method,
        "k": args.k,
        "lambda": result.lam,
        "epsilon": epsilon if result.method == NOCCO_LASSO else None,
        "dataset": descriptor,
        "ranked": _ranked_entries(data, result),
        "redundancy_rate": red,
        "diagnostics": diag,
        "flagged": flagged,
        "timings_sec": stage_seconds,
        "config": {
            "method": args.method,
            "k": args.k,
            "lambda": args.lam,
            "epsilon": epsilon if args.method == NOCCO_LASSO else None,
            "seed": getattr(args, "seed", None),
            "output_gram": args.output_gram,
            "format": args.format,
            "threads": thread_count(),
        },
    }
    report = _jsonable(report)

    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        header = [
            "rank",
            "feature",
            "name",
            "score",
            "bandwidth",
            "lambda",
            "method",
            "converged",
            "in_window",
        ]
        rows = [
            [
                e["rank"],
                e["feature"],
                e["name"],
                e["score"],
                e["bandwidth"],
                result.lam,
                result.method,
                diag.get("converged"),
                diag.get("in_window"),
            ]
            for e in report["ranked"]
        ]
        text = _csv_text(header, rows)
    _write_output(text, args.out)
    if args.plot:
        from . import plotting

        plotting.save_selection_plot(report, args.plot)
    return EXIT_FLAGGED if flagged else EXIT_OK


_BENCH_COLUMNS = [
    "kind",
    "method",
    "data",
    "n",
    "trial",
    "seed",
    "k",
    "lambda",
    "support_size",
    "in_window",
    "converged",
    "fraction_correct",
    "wall_clock_sec",
]


def cmd_bench(args) -> int:
    try:
        n_list = [int(tok) for tok in str(args.n).split(",") if tok.strip()]
    except ValueError:
        raise _UsageError(f"--n expects comma-separated integers, got {args.n!r}")
    if not n_list or any(n < 2 for n in n_list):
        raise _UsageError("--n values must be integers >= 2")
    methods = [tok.strip() for tok in args.methods.split(",") if tok.strip()]
    unknown = [m for m in methods if m not in SELECTORS]
    if unknown or not methods:
        raise _UsageError(f"--methods must be drawn from {', '.join(SELECTORS)}")
    if args.trials < 1:
        raise _UsageError("--trials must be at least 1")
    generator, truth_size = _GENERATORS[args.data]
    k = args.k if args.k is not None else truth_size
    epsilon = args.epsilon if args.epsilon is not None else DEFAULT_NOCCO_EPSILON

    jobs = [
        (method, n, trial)
        for method in methods
        for n in n_list
        for trial in range(args.trials)
    ]

    def run(job):
        method, n, trial = job
        seed = args.seed + trial  # trial r uses seed base+r
        data = generator(n, seed)
        started = time.perf_counter()
        result = _run_method(method, data, k, None, epsilon, None)
        wall = time.perf_counter() - started
        try:
            frac = fraction_correct(result, data.truth)
        except ValueError:
            top = set(result.ranked[: len(data.truth)])
            frac = len(top & data.truth) / len(data.truth)
        diag = result.diagnostics
        return {
            "kind": "trial",
            "method": method,
            "data": args.data,
            "n": n,
            "trial": trial,
            "seed": seed,
            "k": k,
            "lambda": result.lam,
            "support_size": diag.get("support_size"),
            "in_window": diag.get("in_window"),
            "converged": diag.get("converged"),
            "fraction_correct": frac,
            "wall_clock_sec": wall,
            "flagged": _is_flagged(result, k),
        }

    trial_rows = parallel_map(run, jobs)

    rows = []
    any_flagged = False
    index = 0
    for method in methods:
        for n in n_list:
            group = trial_rows[index : index + args.trials]
            index += args.trials
            rows.extend(group)
            any_flagged = any_flagged or any(r["flagged"] for r in group)
            rows.append(
                {
                    "kind": "summary",
                    "method": method,
                    "data": args.data,
                    "n": n,
                    "trial": None,
                    "seed": None,
                    "k": k,
                    "lambda": None,
                    "support_size": None,
                    "in_window": None,
                    "converged": None,
                    "fraction_correct": sum(r["fraction_correct"] for r in group)
                    / len(group),
                    "wall_clock_sec": sum(r["wall_clock_sec"] for r in group)
                    / len(group),
                }
            )

    if args.no_timing:
        for row in rows:
            row["wall_clock_sec"] = None
    text = _csv_text(
        _BENCH_COLUMNS, [[row[col] for col in _BENCH_COLUMNS] for row in rows]
    )
    _write_output(text, args.out)
    if args.plot:
        from . import plotting

        plotting.save_benchmark_plot([r for r in rows if r["kind"] == "summary"], args.plot)
    return EXIT_FLAGGED if any_flagged else EXIT_OK


def cmd_path(args) -> int:
    data, _ = _resolve_dataset(args)
    output_gram = (
        load_precomputed_gram(args.output_gram, data.n) if args.output_gram else None
    )
    if args.grid < 1:
        raise _UsageError("--grid must be at least 1")
    if not 0.0 < args.lambda_min_ratio < 1.0:
        raise _UsageError("--lambda-min-ratio must lie in (0, 1)")
    epsilon = None
    if args.method == NOCCO_LASSO:
        epsilon = args.epsilon if args.epsilon is not None else DEFAULT_NOCCO_EPSILON

    grams, _ = build_feature_grams(data, epsilon)
    lgram, _ = build_output_gram(data, output_gram, epsilon)
    problem = assemble_problem(
        grams, lgram, NOCCO_METHOD if epsilon else HSIC_METHOD
    )
    lmax = lambda_max(problem)
    if lmax <= 0:
        raise DataError("all dependence scores are zero; the path is empty")
    grid = np.geomspace(lmax, lmax * args.lambda_min_ratio, args.grid)
    grid[0] = lmax
    solutions = reg_path(problem, grid, SolverConfig())

    header = [
        "lambda_index",
        "lambda",
        "support_size",
        "feature",
        "name",
        "coefficient",
    ]
    rows = []
    for gi, sol in enumerate(solutions):
        size = sol.support_size
        for j in range(data.d):
            rows.append([gi, sol.lam, size, j + 1, data.name_of(j), sol.alpha[j]])
    text = _csv_text(header, rows)
    _write_output(text, args.out)
    if args.plot:
        from . import plotting

        coefs = np.stack([sol.alpha for sol in solutions])
        names = [data.name_of(j) for j in range(data.d)]
        plotting.save_path_plot(grid, coefs, names, args.plot)
    return EXIT_FLAGGED if any(not s.converged for s in solutions) else EXIT_OK


def _add_dataset_flags(parser) -> None:
    parser.add_argument("--input", help="CSV table with a header row")
    parser.add_argument(
        "--output-col",
        dest="output_col",
        help="output column: header name, or 0-based index",
    )
    parser.add_argument("--task", choices=TASKS, help="required with --input")
    parser.add_argument(
        "--data", choices=sorted(_GENERATORS), help="synthetic benchmark dataset"
    )
    parser.add_argument(
        "--n", type=int, default=300, help="sample count for synthetic data"
    )
    parser.add_argument("--seed", type=int, default=0, help="generator seed")
    parser.add_argument(
        "--output-gram",
        dest="output_gram",
        help="precomputed n x n output gram (headerless CSV)",
    )


def build_parser() -> _Parser:
    parser = _Parser(
        prog="ksel",
        description="Kernel-based non-redundant feature selection.",
        epilog="KSEL_THREADS caps worker threads (speed only, never values).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    select = sub.add_parser("select", help="run one selection job, emit a run report")
    _add_dataset_flags(select)
    select.add_argument("--method", choices=SELECTORS, default=HSIC_LASSO)
    select.add_argument("--k", type=int, required=True, help="features to select")
    select.add_argument(
        "--lambda", dest="lam", type=float, help="fixed penalty (skips the search)"
    )
    select.add_argument("--epsilon", type=float, help="nocco-lasso regularizer")
    select.add_argument("--format", choices=("json", "csv"), default="json")
    select.add_argument("--out", help="output file (default: stdout)")
    select.add_argument("--plot", help="render the ranked scores to this image file")
    select.set_defaults(func=cmd_select)

    bench = sub.add_parser("bench-synth", help="synthetic recovery benchmark table")
    bench.add_argument("--data", choices=sorted(_GENERATORS), required=True)
    bench.add_argument("--n", default="100,200,300", help="comma-separated sample counts")
    bench.add_argument("--trials", type=int, default=20)
    bench.add_argument(
        "--methods",
        default=f"{HSIC_LASSO},{NOCCO_LASSO}",
        help=f"comma-separated subset of: {', '.join(SELECTORS)}",
    )
    bench.add_argument("--k", type=int, help="default: number of true features")
    bench.add_argument("--seed", type=int, default=0, help="base seed; trial r uses base+r")
    bench.add_argument("--epsilon", type=float, help="nocco-lasso regularizer")
    bench.add_argument(
        "--no-timing",
        action="store_true",
        help="blank wall-clock cells so identical seeds give identical bytes",
    )
    bench.add_argument("--out", help="output file (default: stdout)")
    bench.add_argument("--plot", help="render mean fractions to this image file")
    bench.set_defaults(func=cmd_bench)

    path = sub.add_parser("path", help="coefficient path over a penalty grid")
    _add_dataset_flags(path)
    path.add_argument("--method", choices=(HSIC_LASSO, NOCCO_LASSO), default=HSIC_LASSO)
    path.add_argument("--epsilon", type=float, help="nocco-lasso regularizer")
    path.add_argument("--grid", type=int, default=30, help="number of penalty values")
    path.add_argument(
        "--lambda-min-ratio",
        dest="lambda_min_ratio",
        type=float,
        default=1e-3,
        help="grid floor as a fraction of lambda_max",
    )
    path.add_argument("--out", help="output file (default: stdout)")
    path.add_argument("--plot", help="render coefficient paths to this image file")
    path.set_defaults(func=cmd_path)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"ksel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"ksel: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KselError as exc:
        print(f"ksel: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
