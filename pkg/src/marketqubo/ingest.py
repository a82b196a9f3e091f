"""Price loading, log returns and calendar-year slicing.

Two CSV layouts are accepted:

* long: header ``date,ticker,close``, one quote per row;
* wide: header ``date,<ticker1>,<ticker2>,...``, an empty cell is a missing quote.

Dates are ISO-8601 (``YYYY-MM-DD``).
"""
from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    InsufficientDataError,
    MalformedInputError,
    NoDataForYearError,
    ValidationError,
)

MISSING_POLICIES = ("drop-asset", "forward-fill", "drop-date")


def _as_dates(dates) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]")


def years_of(dates: np.ndarray) -> np.ndarray:
    """Calendar year of each ``datetime64[D]`` entry."""
    return dates.astype("datetime64[Y]").astype(np.int64) + 1970


def _check_axes(assets: Sequence[str], dates: np.ndarray, values: np.ndarray) -> None:
    if len(set(assets)) != len(assets):
        raise ValidationError("duplicate asset identifiers")
    if values.shape != (len(assets), len(dates)):
        raise ValidationError(
            f"matrix shape {values.shape} does not match {len(assets)} assets x {len(dates)} dates"
        )
    if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
        raise ValidationError("dates must be strictly increasing")


@dataclass(frozen=True)
class PricePanel:
    """Close prices, ``prices[i, t]`` for asset ``i`` on ``dates[t]``; NaN marks a hole."""

    assets: tuple[str, ...]
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "dates", _as_dates(self.dates))
        prices = np.array(self.prices, dtype=float)
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        _check_axes(self.assets, self.dates, prices)
        bad = ~np.isnan(prices) & ~(prices > 0)
        if bad.any():
            i, t = np.argwhere(bad)[0]
            raise ValidationError(
                f"non-positive price {prices[i, t]!r} for {self.assets[i]} on {self.dates[t]}"
            )


@dataclass(frozen=True)
class ReturnsPanel:
    """Hole-free daily log returns, ``returns[i, t]`` dated at the later of the two closes."""

    assets: tuple[str, ...]
    dates: np.ndarray
    returns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "dates", _as_dates(self.dates))
        returns = np.array(self.returns, dtype=float)
        if returns.ndim == 1 and len(self.assets) == 1:
            returns = returns[None, :]
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)
        _check_axes(self.assets, self.dates, returns)
        if not np.all(np.isfinite(returns)):
            raise ValidationError("returns panel contains missing or non-finite entries")

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    @property
    def window(self) -> tuple[np.datetime64, np.datetime64]:
        return self.dates[0], self.dates[-1]

    def index_of(self, tickers: Sequence[str]) -> list[int]:
        lookup = {a: i for i, a in enumerate(self.assets)}
        missing = [t for t in tickers if t not in lookup]
        if missing:
            raise KeyError(missing)
        return [lookup[t] for t in tickers]

    def select(self, tickers: Sequence[str]) -> "ReturnsPanel":
        idx = self.index_of(tickers)
        return ReturnsPanel(tuple(tickers), self.dates, self.returns[idx])


def _parse_date(text: str, lineno: int, path) -> np.datetime64:
    try:
        return np.datetime64(dt.date.fromisoformat(text.strip()), "D")
    except ValueError:
        raise MalformedInputError(f"{path}:{lineno}: bad date {text!r}") from None


def _parse_price(text: str, lineno: int, path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedInputError(f"{path}:{lineno}: bad price {text!r}") from None
    if not np.isfinite(value):
        raise MalformedInputError(f"{path}:{lineno}: non-finite price {text!r}")
    return value


def load_prices(path: str | Path) -> PricePanel:
    """Read a long or wide price CSV into a :class:`PricePanel`.

    The date axis is the union of all quoted dates; assets missing a quote on a
    date get NaN there.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedInputError(f"{path}:1: empty file")
    header = [h.strip() for h in rows[0]]
    lowered = [h.lower() for h in header]
    if not lowered or lowered[0] != "date":
        raise MalformedInputError(f"{path}:1: first column must be 'date'")

    quotes: dict[tuple[str, np.datetime64], float] = {}
    if lowered == ["date", "ticker", "close"]:
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedInputError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            date = _parse_date(row[0], lineno, path)
            ticker = row[1].strip()
            if not ticker:
                raise MalformedInputError(f"{path}:{lineno}: empty ticker")
            key = (ticker, date)
            if key in quotes:
                raise MalformedInputError(f"{path}:{lineno}: duplicate quote for {ticker} on {date}")
            quotes[key] = _parse_price(row[2], lineno, path)
        tickers = list(dict.fromkeys(t for t, _ in quotes))
    else:
        tickers = header[1:]
        if not tickers or any(not t for t in tickers):
            raise MalformedInputError(f"{path}:1: wide header needs non-empty ticker columns")
        if len(set(tickers)) != len(tickers):
            raise MalformedInputError(f"{path}:1: duplicate ticker column")
        seen = set()
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedInputError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            date = _parse_date(row[0], lineno, path)
            if date in seen:
                raise MalformedInputError(f"{path}:{lineno}: duplicate date {date}")
            seen.add(date)
            for ticker, cell in zip(tickers, row[1:]):
                if cell.strip():
                    quotes[(ticker, date)] = _parse_price(cell, lineno, path)

    dates = np.array(sorted({d for _, d in quotes}), dtype="datetime64[D]")
    prices = np.full((len(tickers), len(dates)), np.nan)
    row_of = {t: i for i, t in enumerate(tickers)}
    col_of = {d: j for j, d in enumerate(dates)}
    for (ticker, date), value in quotes.items():
        prices[row_of[ticker], col_of[date]] = value
    return PricePanel(tuple(tickers), dates, prices)


def _forward_fill(prices: np.ndarray) -> np.ndarray:
    filled = prices.copy()
    for t in range(1, filled.shape[1]):
        hole = np.isnan(filled[:, t])
        filled[hole, t] = filled[hole, t - 1]
    return filled


def compute_log_returns(panel: PricePanel, policy: str = "drop-asset") -> ReturnsPanel:
    """Daily log returns ``ln(P[t+1] / P[t])`` after resolving holes.

    ``policy`` picks how holes are resolved:

    drop-asset
        drop every asset that is not quoted on every date.
    forward-fill
        carry the last quote forward; leading holes (before an asset's first
        quote) are then removed by dropping those dates.
    drop-date
        keep only dates on which every asset is quoted.

    Dates where no retained asset has a quote are dropped in every case.
    """
    if policy not in MISSING_POLICIES:
        raise ValidationError(f"unknown missing-data policy {policy!r}; expected one of {MISSING_POLICIES}")
    prices = np.array(panel.prices)
    assets = list(panel.assets)
    dates = panel.dates

    if policy == "drop-asset":
        keep = ~np.isnan(prices).any(axis=1)
        prices = prices[keep]
        assets = [a for a, k in zip(assets, keep) if k]
    elif policy == "forward-fill":
        prices = _forward_fill(prices)
    if assets:
        full = ~np.isnan(prices).any(axis=0)
        prices, dates = prices[:, full], dates[full]

    if not assets or len(dates) < 2:
        raise InsufficientDataError(
            f"fewer than 2 aligned prices per asset remain after {policy!r} "
            f"({len(assets)} assets, {len(dates)} dates)"
        )
    returns = np.log(prices[:, 1:] / prices[:, :-1])
    return ReturnsPanel(tuple(assets), dates[1:], returns)


def slice_year(panel: ReturnsPanel, year: int) -> ReturnsPanel:
    """Restrict ``panel`` to dates whose calendar year is ``year``."""
    mask = years_of(panel.dates) == year
    if not mask.any():
        raise NoDataForYearError(f"no return observations in {year}")
    return ReturnsPanel(panel.assets, panel.dates[mask], panel.returns[:, mask])


def load_index_returns(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read an index return CSV with header ``date,return``."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip().lower() for h in rows[0]] != ["date", "return"]:
        raise MalformedInputError(f"{path}:1: expected header 'date,return'")
    dates, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedInputError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        dates.append(_parse_date(row[0], lineno, path))
        try:
            values.append(float(row[1]))
        except ValueError:
            raise MalformedInputError(f"{path}:{lineno}: bad return {row[1]!r}") from None
    dates = np.array(dates, dtype="datetime64[D]")
    if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
        raise MalformedInputError(f"{path}: dates must be strictly increasing")
    return dates, np.array(values)


def write_returns_csv(panel: ReturnsPanel, path: str | Path) -> None:
    """Wide CSV ``date,<tickers>``; floats use ``repr`` so a re-read is exact."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", *panel.assets])
        for t, date in enumerate(panel.dates):
            writer.writerow([str(date), *(repr(float(v)) for v in panel.returns[:, t])])


def read_returns_csv(path: str | Path) -> ReturnsPanel:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0][0].strip().lower() != "date":
        raise MalformedInputError(f"{path}:1: expected header 'date,<tickers>'")
    assets = [h.strip() for h in rows[0][1:]]
    dates, cols = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(assets) + 1:
            raise MalformedInputError(f"{path}:{lineno}: expected {len(assets) + 1} fields")
        dates.append(_parse_date(row[0], lineno, path))
        try:
            cols.append([float(x) for x in row[1:]])
        except ValueError:
            raise MalformedInputError(f"{path}:{lineno}: bad return value") from None
    return ReturnsPanel(tuple(assets), np.array(dates, dtype="datetime64[D]"), np.array(cols).T.reshape(len(assets), len(dates)))
