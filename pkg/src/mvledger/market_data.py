"""Quotes, distributions, adjusted closing prices and date-aligned panels.

Adjusted closing prices are built with a running "adjusted closing shares"
multiplier: on every ex-dividend day the shares grow by ``c0 / (c0 - d1)``
where ``c0`` is the previous market day's close and ``d1`` the cash
distribution, and the adjusted price is ``close * shares``.  Any two
adjusted series for the same instrument differ by a positive constant, so
the result is rescaled to a base value (100 by default) at an anchor date.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import DomainError, ParseError

__all__ = [
    "Anchor",
    "RawQuote",
    "DistributionEvent",
    "SplitEvent",
    "PriceSeries",
    "PricePanel",
    "parse_quote_csv",
    "parse_distribution_csv",
    "parse_split_csv",
    "adjusted_shares",
    "build_adjusted_closes",
    "series_from_quotes",
    "normalize",
    "align_panel",
    "read_panel_csv",
    "write_panel_csv",
]

DEFAULT_BASE = 100.0


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Anchor:
    """Normalization date and the value every series carries on it."""

    date: Hashable
    base: float = DEFAULT_BASE

    def __post_init__(self):
        if not self.base > 0:
            raise DomainError(f"anchor base must be positive, got {self.base!r}")


@dataclass(frozen=True)
class RawQuote:
    date: dt.date
    close: float
    adj_close: float | None = None

    def __post_init__(self):
        if not self.close > 0:
            raise DomainError(f"non-positive close {self.close!r} on {self.date}")
        if self.adj_close is not None and not self.adj_close > 0:
            raise DomainError(f"non-positive adjusted close {self.adj_close!r} on {self.date}")


@dataclass(frozen=True)
class DistributionEvent:
    """Cash distribution per share paid to holders of record before ``ex_date``."""

    ex_date: dt.date
    amount: float

    def __post_init__(self):
        if not self.amount > 0:
            raise DomainError(f"distribution amount must be positive, got {self.amount!r}")


@dataclass(frozen=True)
class SplitEvent:
    """Share split effective on ``ex_date``; ``ratio`` new shares per old (3.0 for 3:1)."""

    ex_date: dt.date
    ratio: float

    def __post_init__(self):
        if not self.ratio > 0:
            raise DomainError(f"split ratio must be positive, got {self.ratio!r}")


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Dated, strictly positive prices for one instrument.

    A long-short portfolio path may dip to zero or below; such a series is
    only constructible with ``"nonpositive"`` in ``flags``.
    """

    label: str
    dates: tuple
    values: np.ndarray
    anchor: Anchor | None = None
    flags: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "flags", frozenset(self.flags))
        if self.values.ndim != 1 or len(self.dates) != len(self.values):
            raise DomainError("dates and values must be 1-d and of equal length")
        if len(self.values) < 2:
            raise DomainError(f"series {self.label!r} needs at least 2 values")
        if not np.all(np.isfinite(self.values)):
            raise DomainError(f"series {self.label!r} has non-finite values")
        if "nonpositive" not in self.flags and not np.all(self.values > 0):
            raise DomainError(f"series {self.label!r} has non-positive values")
        if self.anchor is not None and self.anchor.date not in self.dates:
            raise DomainError(f"anchor {self.anchor.date} is not a date of {self.label!r}")

    def __len__(self):
        return len(self.values)

    def index_of(self, date) -> int:
        try:
            return self.dates.index(date)
        except ValueError:
            raise DomainError(f"date {date} not in series {self.label!r}") from None


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Date-aligned matrix of prices, one column per instrument.

    ``values[i, j]`` is the price of ``labels[j]`` on ``dates[i]``.
    """

    dates: tuple
    labels: tuple
    values: np.ndarray
    anchor: Anchor | None = None

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "labels", tuple(self.labels))
        values = _frozen(self.values)
        if values.ndim == 1:
            values = _frozen(values.reshape(-1, 1))
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.dates), len(self.labels)):
            raise DomainError(
                f"panel shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.labels)} labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise DomainError(f"duplicate column labels in {self.labels}")
        if len(self.dates) < 1 or len(self.labels) < 1:
            raise DomainError("panel needs at least one date and one column")
        if self.anchor is not None and self.anchor.date not in self.dates:
            raise DomainError(f"anchor {self.anchor.date} is not a panel date")

    @property
    def shape(self):
        return self.values.shape

    def index_of(self, date) -> int:
        try:
            return self.dates.index(date)
        except ValueError:
            raise DomainError(f"date {date} not in panel") from None

    def column_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown label {label!r}; panel has {list(self.labels)}") from None

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.column_index(label)]

    def series(self, label: str) -> PriceSeries:
        return PriceSeries(label, self.dates, self.column(label), self.anchor)

    def select(self, labels: Sequence[str]) -> "PricePanel":
        idx = [self.column_index(lab) for lab in labels]
        return PricePanel(self.dates, tuple(labels), self.values[:, idx], self.anchor)

    def with_column(self, label: str, values) -> "PricePanel":
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        return PricePanel(
            self.dates,
            self.labels + (label,),
            np.hstack([self.values, values]),
            self.anchor,
        )


# ---------------------------------------------------------------------------
# CSV parsing


def _parse_date(text: str, row: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise ParseError(f"row {row}: malformed date {text!r}") from None


def _parse_float(text: str, row: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"row {row}: unparsable {what} {text!r}") from None


def _rows(text: str):
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        yield lineno, [cell.strip() for cell in row]


def _check_increasing(dates: Sequence[dt.date], rows: Sequence[int]) -> None:
    for k in range(1, len(dates)):
        if dates[k] == dates[k - 1]:
            raise DomainError(f"row {rows[k]}: duplicate date {dates[k]}")
        if dates[k] < dates[k - 1]:
            raise DomainError(f"row {rows[k]}: date {dates[k]} is not after {dates[k - 1]}")


def parse_quote_csv(text: str) -> list[RawQuote]:
    """Parse daily quotes.

    Accepts the seven-column download layout
    ``Date,Open,High,Low,Close,Adj Close,Volume`` (only Date, Close and
    Adj Close are kept) or a two-column ``date,close`` / ``date,value``
    layout.
    """
    rows = _rows(text)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError("missing header row") from None
    names = [h.lower() for h in header]
    if names[0] != "date":
        raise ParseError(f"first header column must be 'date', got {header[0]!r}")
    if "adj close" in names and "close" in names:
        i_close, i_adj = names.index("close"), names.index("adj close")
    elif len(names) == 2:
        i_close, i_adj = 1, None
    else:
        raise ParseError(f"unrecognised quote header {header}")

    quotes, lines = [], []
    for lineno, row in rows:
        if len(row) != len(names):
            raise ParseError(f"row {lineno}: expected {len(names)} fields, got {len(row)}")
        date = _parse_date(row[0], lineno)
        close = _parse_float(row[i_close], lineno, "close")
        adj = _parse_float(row[i_adj], lineno, "adjusted close") if i_adj is not None else None
        if close <= 0 or (adj is not None and adj <= 0):
            raise DomainError(f"row {lineno}: non-positive price")
        quotes.append(RawQuote(date, close, adj))
        lines.append(lineno)
    _check_increasing([q.date for q in quotes], lines)
    return quotes


def _parse_dated_amounts(text: str, kind: str):
    rows = _rows(text)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError(f"missing header row in {kind} file") from None
    if len(header) != 2:
        raise ParseError(f"{kind} header must have 2 columns, got {header}")
    out = []
    for lineno, row in rows:
        if len(row) != 2:
            raise ParseError(f"row {lineno}: expected 2 fields, got {len(row)}")
        out.append((_parse_date(row[0], lineno), _parse_float(row[1], lineno, kind), lineno))
    return out


def parse_distribution_csv(text: str) -> list[DistributionEvent]:
    """Parse an ``ex_date,amount`` file."""
    out = []
    for date, amount, lineno in _parse_dated_amounts(text, "amount"):
        if amount <= 0:
            raise DomainError(f"row {lineno}: non-positive distribution {amount}")
        out.append(DistributionEvent(date, amount))
    return out


def parse_split_csv(text: str) -> list[SplitEvent]:
    """Parse an ``ex_date,ratio`` file (ratio 3 for a 3:1 split)."""
    out = []
    for date, ratio, lineno in _parse_dated_amounts(text, "ratio"):
        if ratio <= 0:
            raise DomainError(f"row {lineno}: non-positive split ratio {ratio}")
        out.append(SplitEvent(date, ratio))
    return out


# ---------------------------------------------------------------------------
# Adjusted closing prices


def adjusted_shares(
    quotes: Sequence[RawQuote],
    events: Iterable[DistributionEvent] = (),
    splits: Iterable[SplitEvent] = (),
    seed: float = 1.0,
) -> np.ndarray:
    """Running adjusted-closing-shares multiplier, one entry per quote.

    The multiplier starts at ``seed`` and is constant except on ex-dates,
    where a dividend ``d1`` multiplies it by ``c0 / (c0 - d1)`` (``c0`` is
    the prior market day's close) and a split multiplies it by its ratio.
    """
    if not seed > 0:
        raise DomainError(f"seed must be positive, got {seed!r}")
    dates = [q.date for q in quotes]
    _check_increasing(dates, list(range(1, len(dates) + 1)))
    position = {d: i for i, d in enumerate(dates)}

    factors = np.ones(len(quotes))
    split_ratio = np.ones(len(quotes))
    for ev in splits:
        i = position.get(ev.ex_date)
        if i is None:
            raise DomainError(f"split ex-date {ev.ex_date} is not a quote date")
        if i == 0:
            raise DomainError(f"split on first quote date {ev.ex_date} has no prior close")
        split_ratio[i] *= ev.ratio
    factors *= split_ratio

    for ev in events:
        i = position.get(ev.ex_date)
        if i is None:
            raise DomainError(f"distribution ex-date {ev.ex_date} is not a quote date")
        if i == 0:
            raise DomainError(f"distribution on first quote date {ev.ex_date} has no prior close")
        # prior close restated in post-split shares when a split lands the same day
        c0 = quotes[i - 1].close / split_ratio[i]
        if ev.amount >= c0:
            raise DomainError(
                f"distribution {ev.amount} on {ev.ex_date} is not below prior close {c0}"
            )
        factors[i] *= c0 / (c0 - ev.amount)

    return seed * np.cumprod(factors)


def build_adjusted_closes(
    quotes: Sequence[RawQuote],
    events: Iterable[DistributionEvent] = (),
    anchor: dt.date | None = None,
    base: float = DEFAULT_BASE,
    *,
    splits: Iterable[SplitEvent] = (),
    label: str = "",
    seed: float = 1.0,
) -> PriceSeries:
    """Adjusted closing prices from raw closes and distributions, normalized at ``anchor``.

    ``anchor`` defaults to the first quote date.  The output does not depend
    on ``seed``.
    """
    if len(quotes) < 2:
        raise DomainError("need at least 2 quotes")
    shares = adjusted_shares(quotes, events, splits, seed)
    closes = np.array([q.close for q in quotes])
    dates = tuple(q.date for q in quotes)
    anchor = dates[0] if anchor is None else anchor
    if anchor not in dates:
        raise DomainError(f"anchor {anchor} is not a quote date")
    raw = PriceSeries(label, dates, closes * shares)
    return normalize(raw, anchor, base)


def series_from_quotes(
    quotes: Sequence[RawQuote],
    label: str = "",
    anchor: dt.date | None = None,
    base: float = DEFAULT_BASE,
    use_adjusted: bool = True,
) -> PriceSeries:
    """Normalized series straight from externally adjusted (or plain) closes."""
    if use_adjusted and any(q.adj_close is None for q in quotes):
        raise DomainError("quotes carry no adjusted closes")
    vals = [q.adj_close if use_adjusted else q.close for q in quotes]
    dates = tuple(q.date for q in quotes)
    raw = PriceSeries(label, dates, vals)
    return normalize(raw, dates[0] if anchor is None else anchor, base)


def normalize(series: PriceSeries, anchor, base: float = DEFAULT_BASE) -> PriceSeries:
    """Rescale so the value on ``anchor`` equals ``base``."""
    if not base > 0:
        raise DomainError(f"base must be positive, got {base!r}")
    i = series.index_of(anchor)
    values = series.values * (base / series.values[i])
    values[i] = base
    return PriceSeries(series.label, series.dates, values, Anchor(anchor, float(base)))


# ---------------------------------------------------------------------------
# Panels


def align_panel(series_list: Sequence[PriceSeries]) -> PricePanel:
    """Restrict series to their common dates and stack them as columns."""
    if not series_list:
        raise DomainError("align_panel needs at least one series")
    anchor = series_list[0].anchor
    for s in series_list[1:]:
        if s.anchor != anchor:
            raise DomainError(f"mismatched anchors: {anchor} vs {s.anchor} ({s.label!r})")
    common = set(series_list[0].dates)
    for s in series_list[1:]:
        common &= set(s.dates)
    dates = tuple(d for d in series_list[0].dates if d in common)
    if not dates:
        raise DomainError("empty date intersection")
    if anchor is not None and anchor.date not in common:
        raise DomainError(f"date intersection drops the anchor {anchor.date}")
    cols = []
    for s in series_list:
        pos = {d: i for i, d in enumerate(s.dates)}
        cols.append(s.values[[pos[d] for d in dates]])
    return PricePanel(dates, tuple(s.label for s in series_list), np.column_stack(cols), anchor)


def read_panel_csv(text: str, anchor=None, base: float | None = None) -> PricePanel:
    """Read a ``date,<label1>,...`` panel.

    Without an explicit ``anchor`` the first date becomes the anchor when
    every column carries the same value there (the usual normalized case);
    otherwise the panel is left unanchored.
    """
    rows = _rows(text)
    try:
        _, header = next(rows)
    except StopIteration:
        raise ParseError("missing header row") from None
    if len(header) < 2 or header[0].lower() != "date":
        raise ParseError(f"panel header must be 'date,<label>,...', got {header}")
    labels = tuple(header[1:])
    dates, values, lines = [], [], []
    for lineno, row in rows:
        if len(row) != len(header):
            raise ParseError(f"row {lineno}: expected {len(header)} fields, got {len(row)}")
        dates.append(_parse_date(row[0], lineno))
        values.append([_parse_float(x, lineno, "value") for x in row[1:]])
        lines.append(lineno)
    if not dates:
        raise ParseError("panel has no data rows")
    _check_increasing(dates, lines)
    values = np.array(values)
    if anchor is not None:
        i = dates.index(anchor) if anchor in dates else None
        if i is None:
            raise DomainError(f"anchor {anchor} is not a panel date")
        if base is None:
            base = float(values[i, 0])
        anc = Anchor(anchor, base)
    elif np.all(values[0] == values[0, 0]) and values[0, 0] > 0:
        anc = Anchor(dates[0], float(values[0, 0]))
    else:
        anc = None
    return PricePanel(tuple(dates), labels, values, anc)


def write_panel_csv(panel: PricePanel, precision: int = 5) -> str:
    """Fixed-point CSV with LF line endings."""
    out = io.StringIO()
    out.write(",".join(("date",) + panel.labels) + "\n")
    for d, row in zip(panel.dates, panel.values):
        out.write(",".join([str(d)] + [f"{v:.{precision}f}" for v in row]) + "\n")
    return out.getvalue()
