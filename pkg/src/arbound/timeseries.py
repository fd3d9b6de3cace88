"""Loading raw level series from CSV and turning them into log-growth samples."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

DEFAULT_MISSING_TOKENS = frozenset({"", "."})


class DataError(ValueError):
    """Raised when an input series cannot be parsed or transformed."""


@dataclass(frozen=True)
class RawSeries:
    """Dated observations of a level series; ``None`` marks a missing value."""

    dates: tuple[date, ...]
    values: tuple[float | None, ...]
    source_id: str = ""

    def __post_init__(self):
        if len(self.dates) != len(self.values):
            raise DataError("dates and values differ in length")
        for k in range(1, len(self.dates)):
            if self.dates[k] <= self.dates[k - 1]:
                raise DataError(
                    f"dates not strictly increasing at observation {k + 1} ({self.dates[k]})"
                )

    def __len__(self):
        return len(self.values)

    @property
    def n_present(self) -> int:
        return sum(v is not None for v in self.values)


@dataclass(frozen=True)
class GrowthSeries:
    """Natural-log growth rates ``ln(raw[t+1] / raw[t])`` over present raw values."""

    values: np.ndarray
    provenance: str = ""
    dates: tuple[date, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise DataError("growth series must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise DataError("growth series contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n


def _parse_date(text: str, row: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"row {row}: cannot parse date {text!r}") from None


def load_csv(
    path,
    value_column: str,
    missing_tokens=DEFAULT_MISSING_TOKENS,
    date_column: str | None = None,
) -> RawSeries:
    """Read a dated series from a CSV file with a header row.

    The date column defaults to the first column of the header. Fields equal
    to one of ``missing_tokens`` (after stripping whitespace) become ``None``.
    Row numbers in error messages count the header as row 1.
    """
    path = Path(path)
    missing = {t.strip() for t in missing_tokens}
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if value_column not in header:
            raise DataError(f"row 1: value column {value_column!r} not in header {header}")
        vcol = header.index(value_column)
        if date_column is None:
            dcol = 0
        elif date_column in header:
            dcol = header.index(date_column)
        else:
            raise DataError(f"row 1: date column {date_column!r} not in header {header}")

        dates: list[date] = []
        values: list[float | None] = []
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(vcol, dcol):
                raise DataError(f"row {row_no}: expected at least {max(vcol, dcol) + 1} fields")
            d = _parse_date(row[dcol], row_no)
            if dates and d <= dates[-1]:
                raise DataError(
                    f"row {row_no}: date {d} does not increase on previous date {dates[-1]}"
                )
            token = row[vcol].strip()
            if token in missing:
                v = None
            else:
                try:
                    v = float(token)
                except ValueError:
                    raise DataError(f"row {row_no}: cannot parse value {token!r}") from None
            dates.append(d)
            values.append(v)
    return RawSeries(tuple(dates), tuple(values), source_id=f"{path.name}:{value_column}")


def log_growth(raw: RawSeries) -> GrowthSeries:
    """Drop missing values, then take log ratios of consecutive survivors."""
    present = [(d, v) for d, v in zip(raw.dates, raw.values) if v is not None]
    if len(present) < 2:
        raise DataError(f"need at least 2 present values, got {len(present)}")
    for d, v in present:
        if not v > 0 or not math.isfinite(v):
            raise DataError(f"value {v!r} on {d} is not strictly positive and finite")
    levels = np.array([v for _, v in present], dtype=float)
    growth = np.log(levels[1:]) - np.log(levels[:-1])
    return GrowthSeries(
        growth,
        provenance=f"log-growth of {raw.source_id or 'raw series'}",
        dates=tuple(d for d, _ in present[1:]),
    )


def cumulative_levels(series: GrowthSeries, start: float = 1.0) -> np.ndarray:
    """Inverse of :func:`log_growth`: levels whose log ratios are ``series``."""
    return start * np.exp(np.concatenate([[0.0], np.cumsum(series.values)]))


def summary(series: GrowthSeries) -> dict[str, float]:
    """Sample moments with the divide-by-n variance convention."""
    x = series.values
    if x.size == 0:
        raise DataError("summary of an empty series")
    return {
        "n": int(x.size),
        "mean": float(np.mean(x)),
        "variance": float(np.var(x)),
        "min": float(np.min(x)),
        "max": float(np.max(x)),
        "max_squared_value": float(np.max(x * x)),
    }
