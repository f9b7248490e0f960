"""Contingency tables and the losses of the supported multivariate measures.

Every loss is ``1 - score`` on a [0, 1] scale. PRBEP and the @k measures are
only defined on part of the table space; ``admissible`` reports which tables
qualify, and the constraint search restricts itself to those.

The ``*_grid`` helpers evaluate the same formulas elementwise over numpy
arrays of counts; the scalar API is a thin wrapper around them so both paths
share one definition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, MeasureError

KINDS = ("err", "f1", "prbep", "prec", "rec")


class ContingencyTable(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Measure:
    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MeasureError(f"unknown measure kind {self.kind!r}")
        if self.kind in ("prec", "rec"):
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise MeasureError(f"{self.kind}@k needs a positive integer k, got {self.k!r}")
        elif self.k is not None:
            raise MeasureError(f"measure {self.kind!r} takes no k")

    @property
    def name(self) -> str:
        return f"{self.kind}@{self.k}" if self.k is not None else self.kind

    @property
    def restricted(self) -> bool:
        return self.kind in ("prbep", "prec", "rec")

    def __str__(self):
        return self.name


ERROR_RATE = Measure("err")
F1 = Measure("f1")
PRBEP = Measure("prbep")


def precision_at(k: int) -> Measure:
    return Measure("prec", k)


def recall_at(k: int) -> Measure:
    return Measure("rec", k)


_NAME_RE = re.compile(r"^(err|f1|prbep|prec@(\d+)|rec@(\d+))$")


def parse_measure(name: str) -> Measure:
    """Parse ``err | f1 | prbep | prec@K | rec@K``."""
    match = _NAME_RE.match(name.strip().lower())
    if not match:
        raise MeasureError(f"unknown measure {name!r}; expected err, f1, prbep, prec@K or rec@K")
    head = match.group(1)
    if head.startswith("prec@"):
        return Measure("prec", int(match.group(2)))
    if head.startswith("rec@"):
        return Measure("rec", int(match.group(3)))
    return Measure(head)


def contingency(pred, truth) -> ContingencyTable:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise DimensionMismatch(f"tuple lengths differ: {pred.shape} vs {truth.shape}")
    pp = pred > 0
    tp_mask = truth > 0
    tp = int(np.count_nonzero(pp & tp_mask))
    fp = int(np.count_nonzero(pp & ~tp_mask))
    fn = int(np.count_nonzero(~pp & tp_mask))
    tn = int(np.count_nonzero(~pp & ~tp_mask))
    return ContingencyTable(tp, fp, fn, tn)


def admissible_grid(measure: Measure, tp, fp, fn, tn) -> np.ndarray:
    tp, fp, fn, tn = np.broadcast_arrays(*(np.asarray(a) for a in (tp, fp, fn, tn)))
    if measure.kind in ("err", "f1"):
        return np.ones(tp.shape, dtype=bool)
    if measure.kind == "prbep":
        return fp == fn
    return (tp + fp) == measure.k


def loss_grid(measure: Measure, tp, fp, fn, tn) -> np.ndarray:
    """Elementwise loss; entries for inadmissible tables are NaN."""
    tp, fp, fn, tn = (np.asarray(a, dtype=np.float64) for a in (tp, fp, fn, tn))
    tp, fp, fn, tn = np.broadcast_arrays(tp, fp, fn, tn)
    kind = measure.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "err":
            out = (fp + fn) / (tp + fp + fn + tn)
        elif kind == "f1":
            denom = 2.0 * tp + fp + fn
            # no positives anywhere: perfect agreement
            out = np.where(denom == 0, 0.0, 1.0 - 2.0 * tp / denom)
        elif kind == "prbep":
            pos = tp + fp
            out = np.where(pos == 0, 0.0, 1.0 - tp / pos)
        elif kind == "prec":
            out = 1.0 - tp / measure.k
        else:
            pos = tp + fn
            out = np.where(pos == 0, 0.0, 1.0 - tp / pos)
    ok = admissible_grid(measure, tp, fp, fn, tn)
    return np.where(ok, out, np.nan)


def admissible(measure: Measure, table: ContingencyTable) -> bool:
    _check_table(table)
    return bool(admissible_grid(measure, *table))


def loss(measure: Measure, table: ContingencyTable) -> float:
    """Loss in [0, 1] of ``table`` under ``measure``."""
    _check_table(table)
    if not admissible(measure, table):
        raise MeasureError(f"table {tuple(table)} is not admissible for {measure.name}")
    if table.n == 0:
        raise MeasureError("empty contingency table")
    return float(loss_grid(measure, *table))


def tuple_loss(measure: Measure, pred, truth) -> float:
    return loss(measure, contingency(pred, truth))


def _check_table(table):
    if any(int(c) != c or c < 0 for c in table):
        raise MeasureError(f"contingency counts must be non-negative integers: {tuple(table)}")
