"""CSV ingestion and result records.

Feature indices written by this module are 1-based; arrays held in memory
elsewhere in the package are 0-based.
"""

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dissim import encode_categories
from .exceptions import NonNumericCell, ParseError, RaggedRows

__all__ = [
    "ParsedTable",
    "load_csv",
    "load_labels",
    "write_matrix_csv",
    "write_gap_csv",
    "write_labels_csv",
    "ResultRecord",
    "GAP_COLUMNS",
]

GAP_COLUMNS = ("s", "obs_wcd", "gap", "perm_log_mean", "perm_log_sd", "obs")


@dataclass
class ParsedTable:
    X: np.ndarray
    labels: np.ndarray = None
    feature_names: list = None


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [
                (lineno, [cell.strip() for cell in row])
                for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(cell.strip() for cell in row)
            ]
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from exc
    except csv.Error as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows


def load_csv(path, kind="numeric", header=None, labels_col=False):
    """Read a data file whose rows are items and columns are features.

    Parameters
    ----------
    path : str or path-like
    kind : {"numeric", "categorical"}
        Categorical cells are kept as strings and encoded per column as
        integer codes in sorted order of their values.
    header : bool or None
        Whether the first row holds column names. ``None`` treats the first
        row as a header when one of its feature cells is not a number while
        every feature cell of the second row is. Categorical files with
        non-numeric categories need an explicit ``header``.
    labels_col : bool
        Whether the first column holds truth labels.

    Returns
    -------
    ParsedTable
    """
    if kind not in ("numeric", "categorical"):
        raise ValueError(f"unknown data kind {kind!r}")
    rows = _read_rows(path)
    skip = 1 if labels_col else 0
    if header is None:
        first = rows[0][1][skip:]
        second = rows[1][1][skip:] if len(rows) > 1 else []
        header = not all(_is_number(c) for c in first) and (
            kind == "numeric" or (second and all(_is_number(c) for c in second))
        )
    names = None
    if header:
        names = rows[0][1][skip:]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header but no data rows")
    width = len(rows[0][1])
    if names is not None and len(names) + skip != width:
        raise RaggedRows(
            f"{path}: header has {len(names) + skip} cells, data has {width}",
            line=rows[0][0],
        )
    if width <= skip:
        raise ParseError(f"{path}: no feature columns", line=rows[0][0])
    for lineno, row in rows:
        if len(row) != width:
            raise RaggedRows(
                f"{path}: {len(row)} cells, expected {width}",
                line=lineno,
            )

    labels = np.array([row[0] for _, row in rows]) if labels_col else None
    if labels is not None and all(_is_int(v) for v in labels):
        labels = labels.astype(np.int64)
    cells = [row[skip:] for _, row in rows]
    if kind == "categorical":
        X = encode_categories(np.array(cells, dtype=object))
    else:
        X = np.empty((len(cells), width - skip))
        for r, (lineno, row) in enumerate(rows):
            for c, cell in enumerate(row[skip:]):
                try:
                    X[r, c] = float(cell)
                except ValueError:
                    raise NonNumericCell(
                        f"{path}: {cell!r} is not a number",
                        line=lineno,
                        column=c + skip + 1,
                    ) from None
                if not math.isfinite(X[r, c]):
                    raise NonNumericCell(
                        f"{path}: {cell!r} is not finite",
                        line=lineno,
                        column=c + skip + 1,
                    )
    return ParsedTable(X, labels, names)


def _is_int(text):
    try:
        int(text)
    except ValueError:
        return False
    return True


def load_labels(path):
    """Read a one-column label file, with or without a header row."""
    rows = _read_rows(path)
    for lineno, row in rows:
        if len(row) != 1:
            raise RaggedRows(f"{path}: expected a single label", line=lineno)
    values = [row[0] for _, row in rows]
    if not _is_int(values[0]) and len(values) > 1 and all(_is_int(v) for v in values[1:]):
        values = values[1:]
    labels = np.array(values)
    if all(_is_int(v) for v in values):
        labels = labels.astype(np.int64)
    return labels


def _fmt(x):
    return repr(float(x))


def write_matrix_csv(path, X, labels=None):
    """Write a data matrix, optionally with a leading ``label`` column."""
    X = np.asarray(X)
    integral = np.issubdtype(X.dtype, np.integer)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        head = [f"x{a + 1}" for a in range(X.shape[1])]
        out.writerow((["label"] if labels is not None else []) + head)
        for i, row in enumerate(X):
            cells = [str(v) for v in row] if integral else [_fmt(v) for v in row]
            out.writerow(([str(labels[i])] if labels is not None else []) + cells)


def write_gap_csv(path, profile):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(GAP_COLUMNS)
        for s, *rest in profile.rows():
            out.writerow([s] + [_fmt(v) for v in rest])


def write_labels_csv(path, labels):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["label"])
        out.writerows([int(v)] for v in labels)


def _plain(value):
    # JSON-ready copy; numpy scalars and arrays become Python values
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


@dataclass
class ResultRecord:
    """One run, serialized as a JSON object.

    ``features`` are 1-based. ``gap_profile`` maps each column of the gap
    table to a list of values. ``content_hash`` covers every field except
    ``runtime_seconds`` so two runs with the same configuration and seed hash
    identically.
    """

    command: str
    seed: int
    config: dict = field(default_factory=dict)
    s_hat: int = None
    features: list = None
    labels: list = None
    objective: float = None
    iterations: int = None
    converged: bool = None
    gap_profile: dict = None
    metrics: dict = None
    runtime_seconds: float = None

    def __post_init__(self):
        for name, value in list(vars(self).items()):
            setattr(self, name, _plain(value))

    def to_dict(self):
        return asdict(self)

    def content_hash(self):
        content = self.to_dict()
        content.pop("runtime_seconds")
        text = json.dumps(content, sort_keys=True, allow_nan=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def dumps(self):
        payload = {"format": "sasclust-result/1", **self.to_dict()}
        payload["content_hash"] = self.content_hash()
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text):
        payload = json.loads(text)
        payload.pop("format", None)
        stored = payload.pop("content_hash", None)
        record = cls(**payload)
        if stored is not None and stored != record.content_hash():
            raise ParseError("result record does not match its content hash")
        return record

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def __eq__(self, other):
        if not isinstance(other, ResultRecord):
            return NotImplemented
        return json.dumps(self.to_dict(), sort_keys=True) == json.dumps(
            other.to_dict(), sort_keys=True
        )
