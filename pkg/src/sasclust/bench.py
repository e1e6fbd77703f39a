"""Seeded benchmark campaigns over the synthetic families.

A campaign is a list of cells (family and generator parameters) times a
number of repeats. Each repeat draws its own dataset and clusterer seed from
the master seed, the cell parameters and the repeat index, so results do not
depend on scheduling or on which other cells are run.
"""

import csv
import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from .backend import derive_seed
from .estimator import SASClustering
from .metrics import rand_index, symmetric_difference
from .simgen import FAMILIES, SimulationSpec, generate

__all__ = [
    "BenchCell",
    "BenchSettings",
    "BenchOutcome",
    "TABLE_COLUMNS",
    "TRACE_COLUMNS",
    "run_repeat",
    "run_bench",
    "summarize",
    "trace_summary",
    "write_table",
    "write_trace",
]

TABLE_COLUMNS = (
    "family", "p", "signal", "kappa", "m", "mode", "repeats",
    "rand_mean", "rand_sd", "symdiff_mean", "symdiff_sd",
    "s_hat_mean", "iterations_mean", "converged_frac", "runtime_mean_s",
)
TRACE_COLUMNS = (
    "family", "p", "signal", "kappa", "m", "iteration",
    "rand_mean", "symdiff_mean", "running",
)


@dataclass(frozen=True)
class BenchCell:
    family: str
    p: int
    signal: float
    kappa: int = 3
    m: int = 30


@dataclass(frozen=True)
class BenchSettings:
    """How each repeat picks ``s``.

    ``mode`` is ``"known"`` (the true number of signal features), ``"fixed"``
    (``s``), ``"grid"`` or ``"golden"`` (gap statistic).
    """

    mode: str = "known"
    s: int = None
    grid_step: int = 1
    refine: bool = False
    perms: int = 25
    restarts: int = 10
    max_alt_iter: int = 20

    def __post_init__(self):
        if self.mode not in ("known", "fixed", "grid", "golden"):
            raise ValueError(f"unknown bench mode {self.mode!r}")
        if (self.mode == "fixed") != (self.s is not None):
            raise ValueError("a fixed s goes with mode='fixed' and only with it")


@dataclass
class BenchOutcome:
    records: list
    table: list
    trace: list
    interrupted: bool = False


def _signal_key(signal):
    return int(round(signal * 1_000_000))


def repeat_seed(seed, cell, repeat):
    return derive_seed(
        seed, FAMILIES.index(cell.family), cell.p, _signal_key(cell.signal),
        cell.kappa, cell.m, repeat,
    )


def run_repeat(cell, settings, seed, repeat):
    """Generate one dataset, cluster it and score it against the truth."""
    data_seed = repeat_seed(seed, cell, repeat)
    data = generate(
        SimulationSpec(cell.family, cell.p, cell.kappa, cell.m, cell.signal, data_seed)
    )
    categorical = cell.family == "categorical"
    if settings.mode == "known":
        s = int(data.true_features.size)
    elif settings.mode == "fixed":
        s = settings.s
    else:
        s = None
    est = SASClustering(
        n_clusters=cell.kappa,
        n_features=s,
        tuning="golden" if settings.mode == "golden" else "grid",
        grid_step=settings.grid_step,
        refine=settings.refine,
        n_perms=settings.perms,
        metric="hamming" if categorical else "euclidean",
        drop_constant=True,
        restarts=settings.restarts,
        max_alt_iter=settings.max_alt_iter,
        random_state=derive_seed(data_seed, 1),
    )
    start = time.perf_counter()
    est.fit(data.X)
    runtime = time.perf_counter() - start
    kept = est.kept_features_
    trace = [
        [rand_index(labels, data.truth),
         symmetric_difference(kept[features], data.true_features)]
        for features, labels in est.result_.history
    ]
    return {
        **asdict(cell),
        "repeat": repeat,
        "seed": data_seed,
        "s_hat": est.n_selected_,
        "rand": rand_index(est.labels_, data.truth),
        "symdiff": symmetric_difference(est.features_, data.true_features),
        "iterations": est.n_iter_,
        "converged": bool(est.converged_),
        "runtime_seconds": runtime,
        "trace": trace,
    }


def _mean_sd(values):
    values = np.asarray(values, dtype=np.float64)
    sd = float(values.std(ddof=1)) if values.size > 1 else None
    return float(values.mean()), sd


def _by_cell(records):
    cells = {}
    for rec in records:
        key = tuple(rec[k] for k in BenchCell.__dataclass_fields__)
        cells.setdefault(key, []).append(rec)
    return cells


def summarize(records, settings):
    """One table row per cell, in order of first appearance."""
    rows = []
    for key, recs in _by_cell(records).items():
        cell = BenchCell(*key)
        recs = sorted(recs, key=lambda r: r["repeat"])
        rand_mean, rand_sd = _mean_sd([r["rand"] for r in recs])
        sym_mean, sym_sd = _mean_sd([r["symdiff"] for r in recs])
        rows.append({
            **asdict(cell),
            "mode": settings.mode,
            "repeats": len(recs),
            "rand_mean": rand_mean,
            "rand_sd": rand_sd,
            "symdiff_mean": sym_mean,
            "symdiff_sd": sym_sd,
            "s_hat_mean": float(np.mean([r["s_hat"] for r in recs])),
            "iterations_mean": float(np.mean([r["iterations"] for r in recs])),
            "converged_frac": float(np.mean([r["converged"] for r in recs])),
            "runtime_mean_s": float(np.mean([r["runtime_seconds"] for r in recs])),
        })
    return rows


def trace_summary(records):
    """Mean Rand index and symmetric difference after each alternation.

    Runs that stopped earlier contribute their final values to later
    iterations; ``running`` counts the runs still alternating.
    """
    rows = []
    for key, recs in _by_cell(records).items():
        horizon = max(len(r["trace"]) for r in recs)
        for t in range(horizon):
            at = [r["trace"][min(t, len(r["trace"]) - 1)] for r in recs]
            rows.append({
                **dict(zip(BenchCell.__dataclass_fields__, key)),
                "iteration": t + 1,
                "rand_mean": float(np.mean([a[0] for a in at])),
                "symdiff_mean": float(np.mean([a[1] for a in at])),
                "running": sum(len(r["trace"]) > t for r in recs),
            })
    return rows


def _cell_text(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(columns)
        for row in rows:
            out.writerow([_cell_text(row[c]) for c in columns])


def write_table(path, rows):
    """Write the per-cell table; a missing standard deviation is left blank."""
    _write_rows(path, TABLE_COLUMNS, rows)


def write_trace(path, rows):
    _write_rows(path, TRACE_COLUMNS, rows)


def _json_line(record):
    def clean(x):
        return None if isinstance(x, float) and not math.isfinite(x) else x

    return json.dumps({k: clean(v) for k, v in record.items()}, sort_keys=True)


def run_bench(cells, settings, repeats, seed=0, jobs=1, raw_path=None):
    """Run every cell ``repeats`` times.

    Per-repeat records are appended to ``raw_path`` (JSON lines) as they
    finish, in task order. On ``KeyboardInterrupt`` the completed records are
    summarized and returned with ``interrupted=True``.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    tasks = [(cell, r) for cell in cells for r in range(repeats)]
    records = []
    interrupted = False
    raw = open(raw_path, "w", encoding="utf-8") if raw_path else None
    try:
        results = Parallel(n_jobs=jobs, return_as="generator")(
            delayed(run_repeat)(cell, settings, seed, r) for cell, r in tasks
        )
        for rec in results:
            records.append(rec)
            if raw:
                raw.write(_json_line(rec) + "\n")
                raw.flush()
    except KeyboardInterrupt:
        interrupted = True
    finally:
        if raw:
            raw.close()
    return BenchOutcome(
        records, summarize(records, settings), trace_summary(records), interrupted
    )
