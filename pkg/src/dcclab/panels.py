"""Price/return panels: CSV ingestion, log returns, calendar alignment.

A panel couples an ascending list of calendar dates with a T x N value
matrix, one column per asset.  The input CSV format is UTF-8 with a header
row, one date column (default name ``date``, format ``YYYY-MM-DD``) and one
numeric column per asset; panels serialize back to the same shape.

Crypto assets trade every day while traditional assets trade weekdays only,
so joining the two requires reducing the daily panel to the weekday
calendar.  ``align_calendars`` does this on the intersection of dates and
can recompute the daily panel's returns over the calendar gaps (log returns
add across days, so a Monday return becomes the Friday-to-Monday return).
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    AlignmentError,
    FormatError,
    InsufficientDataError,
    ValidationError,
)

__all__ = [
    "PricePanel",
    "ReturnPanel",
    "load_price_csv",
    "load_return_csv",
    "log_returns",
    "align_calendars",
    "panel_to_csv",
]


def _check_panel(dates, assets, values, positive: bool) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValidationError(f"panel values must be 2-D, got shape {values.shape}")
    if values.shape != (len(dates), len(assets)):
        raise ValidationError(
            f"panel shape {values.shape} inconsistent with "
            f"{len(dates)} dates x {len(assets)} assets"
        )
    if len(set(assets)) != len(assets):
        raise ValidationError("duplicate asset identifiers")
    for prev, cur in zip(dates, dates[1:]):
        if cur <= prev:
            raise ValidationError(f"dates not strictly increasing at {cur}")
    if not np.all(np.isfinite(values)):
        raise ValidationError("panel contains non-finite entries")
    if positive and np.any(values <= 0.0):
        t, i = np.argwhere(values <= 0.0)[0]
        raise ValidationError(
            f"non-positive price {values[t, i]} at row {t + 1}, column {assets[i]}"
        )
    return values


@dataclass
class PricePanel:
    """Date-indexed matrix of strictly positive price levels."""

    dates: list[dt.date]
    assets: list[str]
    prices: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.prices = _check_panel(self.dates, self.assets, self.prices, positive=True)

    @property
    def shape(self) -> tuple[int, int]:
        return self.prices.shape


@dataclass
class ReturnPanel:
    """Date-indexed matrix of log returns (percent by convention)."""

    dates: list[dt.date]
    assets: list[str]
    returns: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.returns = _check_panel(self.dates, self.assets, self.returns, positive=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.returns.shape


def _load_csv(path, date_column: str, date_format: str, drop_incomplete: bool):
    """Shared CSV reader.  Row numbers in messages count data rows from 1."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if date_column not in header:
            raise FormatError(f"{path}: no column named {date_column!r} in header")
        date_idx = header.index(date_column)
        assets = [h for k, h in enumerate(header) if k != date_idx]
        if not assets:
            raise FormatError(f"{path}: header has no asset columns")

        rows: list[tuple[int, dt.date, list[float]]] = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != len(header):
                raise FormatError(
                    f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}"
                )
            try:
                date = dt.datetime.strptime(row[date_idx].strip(), date_format).date()
            except ValueError:
                raise FormatError(
                    f"{path}: row {row_no}: cannot parse date {row[date_idx]!r} "
                    f"with format {date_format!r}"
                ) from None
            value_cells = [c for j, c in enumerate(row) if j != date_idx]
            values = []
            complete = True
            for k, text in enumerate(cell.strip() for cell in value_cells):
                try:
                    value = float(text)
                except ValueError:
                    value = float("nan")
                if not np.isfinite(value):
                    if drop_incomplete:
                        complete = False
                        break
                    raise ValidationError(
                        f"{path}: row {row_no}, column {assets[k]}: "
                        f"missing or non-numeric value {text!r}"
                    )
                values.append(value)
            if complete:
                rows.append((row_no, date, values))

    if not rows:
        raise FormatError(f"{path}: no usable data rows")
    seen: dict[dt.date, int] = {}
    for row_no, date, _ in rows:
        if date in seen:
            raise ValidationError(f"{path}: row {row_no}: duplicate date {date}")
        seen[date] = row_no
    rows.sort(key=lambda item: item[1])
    dates = [date for _, date, _ in rows]
    values = np.array([vals for _, _, vals in rows], dtype=float)
    return dates, assets, values, {date: row_no for row_no, date, _ in rows}


def load_price_csv(
    path,
    date_column: str = "date",
    date_format: str = "%Y-%m-%d",
    drop_incomplete: bool = False,
) -> PricePanel:
    """Read a price CSV into a :class:`PricePanel`, sorted ascending by date.

    Rows with missing or non-numeric prices raise unless ``drop_incomplete``
    is set, in which case they are dropped whole.  Non-positive prices are
    always an error, reported with their row number and column.
    """
    dates, assets, values, row_of = _load_csv(path, date_column, date_format, drop_incomplete)
    bad = np.argwhere(values <= 0.0)
    if bad.size:
        t, i = bad[0]
        raise ValidationError(
            f"{path}: row {row_of[dates[t]]}, column {assets[i]}: "
            f"non-positive price {values[t, i]}"
        )
    return PricePanel(dates=dates, assets=assets, prices=values)


def load_return_csv(
    path,
    date_column: str = "date",
    date_format: str = "%Y-%m-%d",
    drop_incomplete: bool = False,
) -> ReturnPanel:
    """Read a return CSV (same layout as prices, values unrestricted in sign)."""
    dates, assets, values, _ = _load_csv(path, date_column, date_format, drop_incomplete)
    return ReturnPanel(dates=dates, assets=assets, returns=values)


def log_returns(panel: PricePanel, scale: float = 100.0) -> ReturnPanel:
    """Log returns of consecutive observations, in percent by default.

    ``returns[t, i] = scale * ln(P[t+1, i] / P[t, i])``; the output has one
    fewer row than the price panel and each return is dated by the later
    observation.
    """
    if len(panel.dates) < 2:
        raise InsufficientDataError("log returns need at least 2 price rows")
    log_prices = np.log(panel.prices)
    returns = scale * (log_prices[1:] - log_prices[:-1])
    return ReturnPanel(dates=list(panel.dates[1:]), assets=list(panel.assets), returns=returns)


def align_calendars(
    left: ReturnPanel,
    right: ReturnPanel,
    gap_mode: str = "recompute",
) -> ReturnPanel:
    """Join two return panels on the intersection of their dates.

    Columns are left assets followed by right assets; asset names must not
    overlap.  With ``gap_mode="recompute"`` (default) the left panel's
    return on each retained date is the sum of its returns since the
    previous retained date, i.e. the return between consecutive retained
    observations (log returns are additive over time).  The first retained
    return keeps its original one-step span.  ``gap_mode="filter"`` keeps
    the left rows as they are.  The right panel is always row-filtered: its
    own calendar defines the reduced sample.
    """
    if gap_mode not in ("recompute", "filter"):
        raise ValidationError(f"unknown gap_mode {gap_mode!r}")
    if not left.dates or not right.dates:
        raise ValidationError("both panels must be non-empty")
    overlap = set(left.assets) & set(right.assets)
    if overlap:
        raise ValidationError(f"asset names appear in both panels: {sorted(overlap)}")

    joint_dates = sorted(set(left.dates) & set(right.dates))
    if not joint_dates:
        raise AlignmentError("panels share no dates")

    right_pos = {d: k for k, d in enumerate(right.dates)}
    right_rows = right.returns[[right_pos[d] for d in joint_dates]]

    left_pos = {d: k for k, d in enumerate(left.dates)}
    if gap_mode == "filter":
        left_rows = left.returns[[left_pos[d] for d in joint_dates]]
    else:
        left_rows = np.empty((len(joint_dates), len(left.assets)))
        cumulative = np.vstack([np.zeros(len(left.assets)), np.cumsum(left.returns, axis=0)])
        left_rows[0] = left.returns[left_pos[joint_dates[0]]]
        for k in range(1, len(joint_dates)):
            lo = left_pos[joint_dates[k - 1]]
            hi = left_pos[joint_dates[k]]
            # sum of left returns over dates in (previous retained, current]
            left_rows[k] = cumulative[hi + 1] - cumulative[lo + 1]

    return ReturnPanel(
        dates=joint_dates,
        assets=list(left.assets) + list(right.assets),
        returns=np.hstack([left_rows, right_rows]),
    )


def panel_to_csv(dates, assets, values, date_column: str = "date", fmt=None) -> str:
    """Serialize a panel to CSV text (same shape the loaders read).

    ``fmt`` maps a float to its printed form; default is ``repr`` (shortest
    round-trip representation).
    """
    fmt = fmt or repr
    lines = [",".join([date_column] + list(assets))]
    for date, row in zip(dates, np.asarray(values)):
        lines.append(",".join([date.isoformat()] + [fmt(float(v)) for v in row]))
    return "\n".join(lines) + "\n"
