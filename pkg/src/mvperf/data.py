"""Multi-view datasets and the manifest / sparse view-file format.

A dataset is ``m`` views over the same ``n`` points. Each view is stored as a
CSR matrix of shape ``(n, d_j)``; labels are a length-``n`` int8 array over
{+1, -1}.

On disk a dataset is a JSON manifest::

    {"version": 1,
     "labels": "labels.txt",            # or an inline list of +1/-1
     "views": ["view1.txt", {"path": "view2.txt", "dim": 40}]}

plus one sparse text file per view, one point per line, ``index:value`` pairs
with 1-based indices. Relative paths resolve against the manifest directory.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DataError

MANIFEST_VERSION = 1


@dataclass(frozen=True, eq=False)
class MultiViewDataset:
    views: tuple
    labels: np.ndarray

    def __post_init__(self):
        views = tuple(sp.csr_matrix(v, dtype=np.float64) for v in self.views)
        for v in views:
            v.sort_indices()
        labels = np.asarray(self.labels)
        if labels.ndim == 1 and np.all(np.isin(labels, (1, -1))):
            labels = labels.astype(np.int8)
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def m(self) -> int:
        return len(self.views)

    @property
    def dims(self) -> list[int]:
        return [int(v.shape[1]) for v in self.views]

    def dense_view(self, j: int) -> np.ndarray:
        return self.views[j].toarray()

    def same_as(self, other: "MultiViewDataset") -> bool:
        """Value-for-value equality (dense semantics)."""
        if self.dims != other.dims or self.n != other.n:
            return False
        if not np.array_equal(self.labels, other.labels):
            return False
        return all((a != b).nnz == 0 for a, b in zip(self.views, other.views))


def from_arrays(views: Sequence, labels: Sequence) -> MultiViewDataset:
    """Build and validate a dataset from dense or sparse per-view arrays."""
    ds = MultiViewDataset(tuple(views), np.asarray(labels))
    validate(ds)
    return ds


def validate(ds: MultiViewDataset) -> None:
    """Raise DataError naming the first broken invariant; return None otherwise."""
    if ds.labels.ndim != 1:
        raise DataError("labels must be a flat sequence")
    n = ds.n
    if n < 1:
        raise DataError("dataset has no points (n must be >= 1)")
    if ds.m < 1:
        raise DataError("dataset has no views (m must be >= 1)")
    for i, y in enumerate(ds.labels.tolist()):
        if y not in (1, -1):
            raise DataError(f"label at row {i + 1} is {y!r}, expected +1 or -1")
    for j, v in enumerate(ds.views):
        if v.shape[0] != n:
            raise DataError(f"view {j + 1} has {v.shape[0]} rows, expected {n}")
        if v.shape[1] < 1:
            raise DataError(f"view {j + 1} has dimension {v.shape[1]}, expected >= 1")
        if not np.all(np.isfinite(v.data)):
            bad = int(np.flatnonzero(~np.isfinite(v.data))[0])
            row = int(np.searchsorted(v.indptr, bad, side="right")) - 1
            raise DataError(f"non-finite value in view {j + 1} at row {row + 1}")


def parse_view_lines(lines: Sequence[str], source: str = "<view>") -> tuple[list, list, list, int]:
    """Parse ``index:value`` rows into COO triplets plus the max 1-based index."""
    rows, cols, vals = [], [], []
    max_index = 0
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            raise DataError(f"{source}:{lineno}: blank line")
        seen = set()
        for tok in tokens:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise DataError(f"{source}:{lineno}: malformed pair {tok!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise DataError(f"{source}:{lineno}: malformed pair {tok!r}") from None
            if idx < 1:
                raise DataError(f"{source}:{lineno}: feature index {idx} is not 1-based")
            if idx in seen:
                raise DataError(f"{source}:{lineno}: duplicate feature index {idx}")
            if not math.isfinite(val):
                raise DataError(f"{source}:{lineno}: non-finite value {val_s!r}")
            seen.add(idx)
            max_index = max(max_index, idx)
            rows.append(lineno - 1)
            cols.append(idx - 1)
            vals.append(val)
    return rows, cols, vals, max_index


def read_view_file(path, dim: int | None = None) -> sp.csr_matrix:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"view file not found: {path}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    rows, cols, vals, max_index = parse_view_lines(lines, source=str(path))
    if dim is None:
        dim = max_index
    elif dim < max_index:
        raise DataError(f"{path}: declared dimension {dim} < max feature index {max_index}")
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(len(lines), dim), dtype=np.float64)
    mat.eliminate_zeros()
    mat.sort_indices()
    return mat


def read_labels_file(path) -> list[int]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"label file not found: {path}") from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s:
            raise DataError(f"{path}:{lineno}: blank line")
        try:
            val = float(s)
        except ValueError:
            raise DataError(f"{path}:{lineno}: label {s!r} is not a number") from None
        out.append(int(val) if val.is_integer() else val)
    return out


def load_manifest(path) -> MultiViewDataset:
    """Load and validate a dataset described by a JSON manifest."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid manifest ({exc})") from None
    if not isinstance(doc, dict) or "views" not in doc or "labels" not in doc:
        raise DataError(f"{path}: manifest needs 'version', 'labels' and 'views'")
    if doc.get("version") != MANIFEST_VERSION:
        raise DataError(f"{path}: unsupported manifest version {doc.get('version')!r}")
    base = path.parent

    labels = doc["labels"]
    if isinstance(labels, str):
        labels = read_labels_file(base / labels)
    elif not isinstance(labels, list):
        raise DataError(f"{path}: 'labels' must be a file path or a list")

    entries = doc["views"]
    if not isinstance(entries, list) or not entries:
        raise DataError(f"{path}: 'views' must be a non-empty list")
    views = []
    for entry in entries:
        if isinstance(entry, str):
            vpath, dim = entry, None
        elif isinstance(entry, dict) and "path" in entry:
            vpath, dim = entry["path"], entry.get("dim")
        else:
            raise DataError(f"{path}: bad view entry {entry!r}")
        views.append(read_view_file(base / vpath, dim))

    for j, v in enumerate(views):
        if v.shape[0] != len(labels):
            raise DataError(
                f"row-count mismatch: view {j + 1} has {v.shape[0]} rows, "
                f"labels have {len(labels)}"
            )
    ds = MultiViewDataset(tuple(views), np.asarray(labels))
    validate(ds)
    return ds


def format_row(row: sp.csr_matrix) -> str:
    if row.nnz == 0:
        return "1:0"
    return " ".join(f"{c + 1}:{v!r}" for c, v in zip(row.indices.tolist(), row.data.tolist()))


def write_dataset(ds: MultiViewDataset, directory, stem: str = "data") -> Path:
    """Write ``ds`` as manifest + label file + view files; return the manifest path.

    Dimensions are always declared so trailing all-zero columns survive the
    round trip.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    label_name = f"{stem}.labels"
    (directory / label_name).write_text(
        "".join(f"{int(y):+d}\n" for y in ds.labels.tolist()), encoding="utf-8"
    )
    view_entries = []
    for j, v in enumerate(ds.views):
        name = f"{stem}.view{j + 1}"
        v = sp.csr_matrix(v)
        v.eliminate_zeros()
        lines = [format_row(v[i]) for i in range(v.shape[0])]
        (directory / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
        view_entries.append({"path": name, "dim": int(v.shape[1])})
    manifest = {"version": MANIFEST_VERSION, "labels": label_name, "views": view_entries}
    out = directory / f"{stem}.json"
    out.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return out
