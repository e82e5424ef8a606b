"""Dataset container and CSV I/O for right-censored survival data.

A :class:`Dataset` holds observed times (possibly log-transformed), event
indicators (1 = event observed, 0 = right-censored), and an ``n x p`` block of
numeric covariates.  Covariates may carry min-max scaling metadata; kernel
code requires it, and the original values can always be reconstructed from it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyTransformed,
    DataError,
    EmptyFile,
    MissingColumn,
    NonPositiveTime,
    UnparsableCell,
)

IDENTITY = "identity"
LOG = "log"


@dataclass(frozen=True)
class Observation:
    """One row: observed time, event status (1 event / 0 censored), covariates."""

    time: float
    status: int
    covariates: tuple[float, ...]


@dataclass(frozen=True)
class Dataset:
    """Immutable column store for a right-censored sample.

    ``scaling`` is either None (raw covariates) or a per-column tuple of
    ``(min, max)`` pairs; when present every stored covariate value lies in
    [0, 1].  ``degenerate_columns`` lists 0-based covariate columns whose
    observed range was a single point (scaled to 0).
    """

    times: np.ndarray
    status: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple[str, ...] = ()
    response_transform: str = IDENTITY
    scaling: tuple[tuple[float, float], ...] | None = None
    degenerate_columns: tuple[int, ...] = ()

    def __post_init__(self):
        times = np.array(self.times, dtype=float, order="C")
        status = np.array(self.status, dtype=np.int8, order="C")
        covs = np.array(self.covariates, dtype=float, order="C")
        if covs.ndim == 1:
            covs = covs.reshape(len(covs), 1) if covs.size else covs.reshape(0, 0)
        if covs.size == 0:
            covs = covs.reshape(len(times), 0)
        covs = np.ascontiguousarray(covs)

        n = len(times)
        if n < 2:
            raise ValueError("a dataset needs at least 2 observations")
        if status.shape != (n,) or covs.shape[0] != n:
            raise ValueError("times, status, and covariates disagree on length")
        if not np.all(np.isfinite(times)):
            raise ValueError("times must be finite")
        if covs.size and not np.all(np.isfinite(covs)):
            raise ValueError("covariates must be finite")
        if not np.all((status == 0) | (status == 1)):
            raise ValueError("status values must be 0 or 1")
        names = tuple(str(c) for c in self.covariate_names)
        if len(names) != covs.shape[1]:
            raise ValueError("covariate_names must match the number of columns")
        if self.response_transform not in (IDENTITY, LOG):
            raise ValueError(f"unknown response_transform {self.response_transform!r}")
        if self.scaling is not None:
            scaling = tuple((float(a), float(b)) for a, b in self.scaling)
            if len(scaling) != covs.shape[1]:
                raise ValueError("scaling must provide one (min, max) pair per column")
            if covs.size and (covs.min() < 0.0 or covs.max() > 1.0):
                raise ValueError("scaled covariates must lie in [0, 1]")
            object.__setattr__(self, "scaling", scaling)

        for arr in (times, status, covs):
            arr.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "covariates", covs)
        object.__setattr__(self, "covariate_names", names)
        object.__setattr__(
            self, "degenerate_columns", tuple(int(j) for j in self.degenerate_columns)
        )

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    def observation(self, i: int) -> Observation:
        return Observation(
            float(self.times[i]),
            int(self.status[i]),
            tuple(float(v) for v in self.covariates[i]),
        )

    def observations(self):
        return [self.observation(i) for i in range(self.n)]

    def original_covariates(self) -> np.ndarray:
        """Covariates on their original scale (undoes min-max scaling)."""
        if self.scaling is None:
            return np.array(self.covariates, dtype=float)
        out = np.array(self.covariates, dtype=float)
        for j, (lo, hi) in enumerate(self.scaling):
            out[:, j] = lo + out[:, j] * (hi - lo)
        return out


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise UnparsableCell(row, column, text) from None
    if not math.isfinite(value):
        raise UnparsableCell(row, column, text)
    return value


def load_csv(
    path,
    time_col: str,
    status_col: str,
    covariate_cols: tuple[str, ...] = (),
) -> Dataset:
    """Read a CSV file into a Dataset.

    Times must parse to strictly positive finite reals, status cells to
    exactly 0 or 1.  Row numbers in errors are 1-based data rows (the header
    is row 0).  Guarantees row order is preserved.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        index: dict[str, int] = {}
        for pos, name in enumerate(header):
            index.setdefault(name, pos)
        for needed in (time_col, status_col, *covariate_cols):
            if needed not in index:
                raise MissingColumn(needed)

        times: list[float] = []
        status: list[int] = []
        covs: list[list[float]] = []
        row_no = 0
        for raw in reader:
            if not raw:
                continue
            row_no += 1

            def cell(col: str) -> str:
                pos = index[col]
                if pos >= len(raw):
                    raise UnparsableCell(row_no, col)
                return raw[pos].strip()

            t = _parse_float(cell(time_col), row_no, time_col)
            if t <= 0.0:
                raise NonPositiveTime(row_no, t)
            s = _parse_float(cell(status_col), row_no, status_col)
            if s not in (0.0, 1.0):
                raise UnparsableCell(row_no, status_col, cell(status_col))
            times.append(t)
            status.append(int(s))
            covs.append([_parse_float(cell(c), row_no, c) for c in covariate_cols])

    if row_no < 2:
        raise EmptyFile(f"{path}: need at least 2 data rows, found {row_no}")
    return Dataset(
        times=np.array(times),
        status=np.array(status),
        covariates=np.array(covs) if covariate_cols else np.empty((row_no, 0)),
        covariate_names=tuple(covariate_cols),
    )


def format_number(x: float) -> str:
    """Decimal text at 17 significant digits (round-trips float64 exactly)."""
    return format(float(x), ".17g")


def write_csv(d: Dataset, path, time_col: str = "time", status_col: str = "status"):
    """Write the dataset back to CSV with 17-significant-digit numbers.

    ``load_csv(write_csv(d))`` reproduces times/status/covariates bitwise for
    raw (untransformed, unscaled) datasets; transform and scaling metadata are
    not stored in the CSV.
    """
    path = Path(path)
    lines = [",".join([time_col, status_col, *d.covariate_names])]
    for i in range(d.n):
        fields = [format_number(d.times[i]), str(int(d.status[i]))]
        fields.extend(format_number(v) for v in d.covariates[i])
        lines.append(",".join(fields))
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def log_transform(d: Dataset) -> Dataset:
    """Return a copy with times replaced by their natural log."""
    if d.response_transform != IDENTITY:
        raise AlreadyTransformed("dataset response is already log-transformed")
    bad = np.nonzero(d.times <= 0.0)[0]
    if bad.size:
        row = int(bad[0]) + 1
        raise NonPositiveTime(row, float(d.times[bad[0]]))
    return replace(d, times=np.log(d.times), response_transform=LOG)


def scale_covariates(
    d: Dataset, bounds: tuple[tuple[float, float], ...] | None = None
) -> Dataset:
    """Min-max scale every covariate column to [0, 1].

    Degenerate columns (observed range is a single point) scale to 0 and are
    flagged in ``degenerate_columns``.  ``bounds`` optionally pins the (min,
    max) pair per column, e.g. when the population range is known; observed
    values must lie inside it.  Applying the operation twice yields the same
    stored values as applying it once.
    """
    if d.p < 1:
        raise ValueError("scale_covariates requires at least one covariate")
    covs = np.array(d.covariates, dtype=float)
    if bounds is not None:
        bounds = tuple((float(a), float(b)) for a, b in bounds)
        if len(bounds) != d.p:
            raise ValueError("bounds must provide one (min, max) pair per column")
    scaling: list[tuple[float, float]] = []
    degenerate: list[int] = []
    for j in range(d.p):
        col = covs[:, j]
        if bounds is None:
            lo, hi = float(col.min()), float(col.max())
        else:
            lo, hi = bounds[j]
            if lo > hi or col.min() < lo or col.max() > hi:
                raise ValueError(f"column {j} has values outside the given bounds")
        if hi > lo:
            covs[:, j] = (col - lo) / (hi - lo)
        else:
            covs[:, j] = 0.0
            degenerate.append(j)
        scaling.append((lo, hi))
    return replace(
        d,
        covariates=covs,
        scaling=tuple(scaling),
        degenerate_columns=tuple(degenerate),
    )
