"""Command-line interface: ``sasclust {cluster,tune,simulate,bench,eval}``.

Feature indices in every output are 1-based.

Exit codes: 0 success, 2 usage error, 3 unreadable or malformed input,
4 contract violation (for example more clusters than items), 130 interrupted.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .bench import BenchCell, BenchSettings, run_bench, write_table, write_trace
from .estimator import SASClustering
from .exceptions import InputError, SASError
from .io import (
    GAP_COLUMNS,
    ResultRecord,
    load_csv,
    load_labels,
    write_gap_csv,
    write_labels_csv,
    write_matrix_csv,
)
from .metrics import classification_error, rand_index
from .simgen import FAMILIES, SimulationSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONTRACT = 4
EXIT_INTERRUPT = 130

DEFAULT_SIGNAL = {
    "identity": 1.0,
    "same_cov": 1.0,
    "diff_cov": 1.0,
    "categorical": 0.8,
    "varying_kappa": 0.0,
}

log = logging.getLogger("sasclust")


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_run_options(sub, kappa_many=False):
    if kappa_many:
        sub.add_argument("--kappa", type=_positive, nargs="+", default=[3],
                         help="number(s) of clusters")
    else:
        sub.add_argument("--kappa", type=_positive, required=True,
                         help="number of clusters")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--restarts", type=_positive, default=10,
                     help="backend restarts per clustering")
    sub.add_argument("--max-iter", type=_positive, default=20,
                     help="cap on the number of alternations")


def _add_data_options(sub):
    sub.add_argument("input", help="CSV file, one row per item")
    sub.add_argument("--standardize", action=argparse.BooleanOptionalAction,
                     default=None,
                     help="standardize numeric columns (default: on for numeric data)")
    sub.add_argument("--categorical", action="store_true",
                     help="treat cells as categories and use the Hamming mismatch")
    sub.add_argument("--labels-col", action="store_true",
                     help="the first column holds truth labels")
    sub.add_argument("--header", action=argparse.BooleanOptionalAction, default=None,
                     help="whether the first row is a header (default: detect)")
    sub.add_argument("--drop-constant", action="store_true",
                     help="drop features that do not vary instead of failing")
    sub.add_argument("--out", help="result record (JSON); default: stdout")
    sub.add_argument("--labels-out", help="write the cluster labels as CSV")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sasclust",
        description="Sparse clustering by alternating feature selection.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("cluster", help="cluster with a fixed number of features")
    _add_data_options(sub)
    _add_run_options(sub)
    sub.add_argument("--s", type=_positive, required=True,
                     help="number of features to select")

    sub = commands.add_parser("tune", help="choose s with the gap statistic, then cluster")
    _add_data_options(sub)
    _add_run_options(sub)
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--grid-step", type=_positive, default=None,
                      help="grid search over s = 1, 1+h, ... (default h=1)")
    mode.add_argument("--golden", action="store_true", help="golden-section search")
    sub.add_argument("--refine", action="store_true",
                     help="rescan every s near the coarse grid maximum")
    sub.add_argument("--perms", type=_positive, default=25,
                     help="number of permuted reference datasets")
    sub.add_argument("--gap-out", help="gap profile CSV")

    sub = commands.add_parser("simulate", help="write a synthetic dataset as CSV")
    sub.add_argument("--family", choices=FAMILIES, default="identity")
    sub.add_argument("--p", type=_positive, default=500)
    sub.add_argument("--kappa", type=_positive, default=3)
    sub.add_argument("--m", type=_positive, default=30, help="items per cluster")
    sub.add_argument("--signal", type=float, default=None,
                     help="mean shift or success probability, by family")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True, help="data CSV with a leading label column")
    sub.add_argument("--meta-out", help="JSON with the generator settings and true features")

    sub = commands.add_parser("bench", help="seeded benchmark over synthetic cells")
    sub.add_argument("--family", choices=FAMILIES, default="identity")
    sub.add_argument("--signal", type=float, nargs="+", default=None)
    sub.add_argument("--p", type=_positive, nargs="+", default=[500])
    _add_run_options(sub, kappa_many=True)
    sub.add_argument("--m", type=_positive, default=30)
    sub.add_argument("--repeats", type=_positive, default=50)
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--s", type=_positive, default=None,
                      help="fixed s (default: the true number of signal features)")
    mode.add_argument("--grid-step", type=_positive, default=None)
    mode.add_argument("--golden", action="store_true")
    sub.add_argument("--refine", action="store_true")
    sub.add_argument("--perms", type=_positive, default=25)
    sub.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub.add_argument("--out", required=True, help="summary table CSV")
    sub.add_argument("--raw-out", help="per-repeat JSON lines (default: <out>.raw.jsonl)")
    sub.add_argument("--trace-out", help="per-alternation summary (default: <out>.trace.csv)")

    sub = commands.add_parser("eval", help="compare a label file with the truth")
    sub.add_argument("labels", help="predicted labels, one per line")
    sub.add_argument("truth", help="true labels, one per line")
    sub.add_argument("--kappa", type=_positive, default=None,
                     help="maximum number of groups allowed on either side")
    sub.add_argument("--out", help="result record (JSON); default: stdout")
    return parser


def _config_echo(args, drop=("out", "labels_out", "gap_out", "meta_out",
                             "raw_out", "trace_out", "verbose")):
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


def _emit(record, path):
    if path:
        record.save(path)
    else:
        sys.stdout.write(record.dumps())


def _truth_metrics(labels, truth):
    if truth is None:
        return None
    return {
        "rand_index": rand_index(labels, truth),
        "classification_error": classification_error(labels, truth),
    }


def _fit(args, n_features):
    kind = "categorical" if args.categorical else "numeric"
    table = load_csv(args.input, kind, header=args.header, labels_col=args.labels_col)
    standardize = (not args.categorical) if args.standardize is None else args.standardize
    tuned = n_features is None
    est = SASClustering(
        n_clusters=args.kappa,
        n_features=n_features,
        tuning="golden" if tuned and args.golden else "grid",
        grid_step=(args.grid_step or 1) if tuned else 1,
        refine=args.refine if tuned else False,
        n_perms=args.perms if tuned else 25,
        metric="hamming" if args.categorical else "euclidean",
        standardize=standardize,
        drop_constant=args.drop_constant,
        restarts=args.restarts,
        max_alt_iter=args.max_iter,
        random_state=args.seed,
    )
    start = time.perf_counter()
    est.fit(table.X)
    runtime = time.perf_counter() - start
    profile = None
    if est.gap_profile_ is not None:
        rows = est.gap_profile_.rows()
        profile = {col: [row[i] for row in rows] for i, col in enumerate(GAP_COLUMNS)}
    record = ResultRecord(
        command=args.command,
        seed=args.seed,
        config=_config_echo(args),
        s_hat=est.n_selected_,
        features=est.features_ + 1,
        labels=est.labels_,
        objective=est.objective_,
        iterations=est.n_iter_,
        converged=est.converged_,
        gap_profile=profile,
        metrics=_truth_metrics(est.labels_, table.labels),
        runtime_seconds=runtime,
    )
    _emit(record, args.out)
    if args.labels_out:
        write_labels_csv(args.labels_out, est.labels_)
    if getattr(args, "gap_out", None) and est.gap_profile_ is not None:
        write_gap_csv(args.gap_out, est.gap_profile_)
    log.info("selected %d features; objective %.6g", est.n_selected_, est.objective_)
    return EXIT_OK


def cmd_cluster(args):
    return _fit(args, args.s)


def cmd_tune(args):
    return _fit(args, None)


def cmd_simulate(args):
    signal = DEFAULT_SIGNAL[args.family] if args.signal is None else args.signal
    spec = SimulationSpec(args.family, args.p, args.kappa, args.m, signal, args.seed)
    data = generate(spec)
    write_matrix_csv(args.out, data.X, labels=data.truth)
    if args.meta_out:
        meta = {
            "family": spec.family, "p": spec.p, "kappa": spec.n_clusters,
            "m": spec.m, "signal": spec.signal, "seed": spec.seed,
            "true_features": [int(a) + 1 for a in data.true_features],
        }
        with open(args.meta_out, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def cmd_bench(args):
    if args.s is not None:
        settings = BenchSettings("fixed", s=args.s)
    elif args.golden:
        settings = BenchSettings("golden")
    elif args.grid_step is not None:
        settings = BenchSettings("grid", grid_step=args.grid_step, refine=args.refine)
    else:
        settings = BenchSettings("known")
    settings = BenchSettings(
        settings.mode, settings.s, settings.grid_step, settings.refine,
        args.perms, args.restarts, args.max_iter,
    )
    signals = args.signal or [DEFAULT_SIGNAL[args.family]]
    cells = [
        BenchCell(args.family, p, float(signal), kappa, args.m)
        for signal in signals for p in args.p for kappa in args.kappa
    ]
    out = Path(args.out)
    raw = args.raw_out or str(out.with_suffix(".raw.jsonl"))
    trace = args.trace_out or str(out.with_suffix(".trace.csv"))
    outcome = run_bench(cells, settings, args.repeats, args.seed, args.jobs, raw)
    write_table(out, outcome.table)
    write_trace(trace, outcome.trace)
    if outcome.interrupted:
        log.warning("interrupted; %d finished repeats written", len(outcome.records))
        return EXIT_INTERRUPT
    return EXIT_OK


def cmd_eval(args):
    labels = load_labels(args.labels)
    truth = load_labels(args.truth)
    metrics = {
        "rand_index": rand_index(labels, truth),
        "classification_error": classification_error(labels, truth, args.kappa),
    }
    record = ResultRecord(
        command="eval", seed=0, config=_config_echo(args), metrics=metrics
    )
    _emit(record, args.out)
    return EXIT_OK


COMMANDS = {
    "cluster": cmd_cluster,
    "tune": cmd_tune,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "eval": cmd_eval,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="sasclust: %(levelname)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"sasclust: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SASError, ValueError) as exc:
        print(f"sasclust: error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except KeyboardInterrupt:
        print("sasclust: interrupted", file=sys.stderr)
        return EXIT_INTERRUPT


if __name__ == "__main__":
    sys.exit(main())
