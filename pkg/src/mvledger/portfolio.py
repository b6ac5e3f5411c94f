"""Portfolio price histories.

An *unattended* portfolio is bought at the anchor close and left alone, so
its price path is the fixed affine combination ``sum_j p_j a_j`` of the
component prices.  A *continually reallocated* portfolio is rebalanced to
the proportions ``p`` at every close, so its period returns (not its
prices) are the affine combination ``sum_j p_j r_j``.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ParseError
from .market_data import DEFAULT_BASE, Anchor, PricePanel, PriceSeries

__all__ = [
    "Weights",
    "RiskCoordinates",
    "parse_weights",
    "read_weights_csv",
    "unattended_path",
    "reallocated_path",
    "holdings_proportions",
    "reconstruct_from_risk",
]

SUM_TOL = 1e-12
FILE_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Weights:
    """Portfolio proportions at the anchor close.

    With ``long_only`` every proportion must lie in [0, 1]; otherwise
    negative (short) entries are allowed.  Proportions always sum to 1.
    """

    labels: tuple
    p: np.ndarray
    long_only: bool = True

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        p = np.array(self.p, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        if p.shape != (len(self.labels),):
            raise DomainError(f"{len(self.labels)} labels but {p.size} proportions")
        if len(set(self.labels)) != len(self.labels):
            raise DomainError(f"duplicate labels in weights {self.labels}")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise DomainError(f"proportions sum to {p.sum()!r}, not 1")
        if self.long_only and (np.any(p < 0) or np.any(p > 1)):
            raise DomainError(f"long-only proportions must lie in [0, 1], got {p.tolist()}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float], long_only: bool = True) -> "Weights":
        return cls(tuple(mapping), np.array(list(mapping.values()), dtype=float), long_only)

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.p.tolist()))


def _renormalized(labels, values, long_only, tol=FILE_SUM_TOL) -> Weights:
    p = np.array(values, dtype=float)
    if abs(p.sum() - 1.0) > tol:
        raise DomainError(f"proportions sum to {p.sum()!r}, not 1 (tolerance {tol})")
    return Weights(tuple(labels), p / p.sum(), long_only)


def parse_weights(text: str, labels: Sequence[str] | None = None, long_only: bool = True) -> Weights:
    """Inline weights: ``"FBT=0.75,XBI=0.25"`` or ``"0.75,0.25"`` with ``labels``."""
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if parts and all("=" in s for s in parts):
        pairs = [s.split("=", 1) for s in parts]
        names = [k.strip() for k, _ in pairs]
        raw = [v for _, v in pairs]
    else:
        if labels is None or len(labels) < len(parts):
            raise ParseError(f"cannot assign labels to weights {text!r}")
        names, raw = list(labels[: len(parts)]), parts
    try:
        values = [float(v) for v in raw]
    except ValueError:
        raise ParseError(f"unparsable weights {text!r}") from None
    return _renormalized(names, values, long_only)


def read_weights_csv(text: str, long_only: bool = True) -> Weights:
    """Weights file with a ``label,proportion`` header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows or [c.strip().lower() for c in rows[0]] != ["label", "proportion"]:
        raise ParseError("weights file must start with header 'label,proportion'")
    names, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ParseError(f"row {lineno}: expected 2 fields, got {len(row)}")
        try:
            values.append(float(row[1]))
        except ValueError:
            raise ParseError(f"row {lineno}: unparsable proportion {row[1]!r}") from None
        names.append(row[0].strip())
    return _renormalized(names, values, long_only)


def _component_prices(panel: PricePanel, w: Weights) -> np.ndarray:
    return panel.select(w.labels).values


def _flagged_series(label, dates, values, anchor) -> PriceSeries:
    flags = frozenset()
    if np.any(values <= 0):
        warnings.warn(f"portfolio path {label!r} is not strictly positive", RuntimeWarning)
        flags = frozenset({"nonpositive"})
    return PriceSeries(label, dates, values, anchor, flags)


def unattended_path(panel: PricePanel, w: Weights, label: str = "P") -> PriceSeries:
    """Buy-and-hold path: the pointwise combination ``sum_j p_j a_j(t)``."""
    values = _component_prices(panel, w) @ w.p
    return _flagged_series(label, panel.dates, values, panel.anchor)


def reallocated_path(
    panel: PricePanel, w: Weights, start: float | None = None, label: str = "P"
) -> PriceSeries:
    """Path of a portfolio rebalanced to ``w`` at every close.

    Each period's return is ``sum_j p_j r_j``; the value compounds from
    ``start`` on the first panel date.  Without ``start`` the path is scaled
    to the anchor base when the panel is anchored, else it starts at the
    unattended value on the first date.
    """
    a = _component_prices(panel, w)
    if len(a) < 2:
        raise DomainError("reallocated path needs at least 2 dates")
    if np.any(a <= 0):
        raise DomainError("component prices must be strictly positive")
    r = a[1:] / a[:-1] - 1.0
    growth = np.concatenate([[1.0], np.cumprod(1.0 + r @ w.p)])
    if start is not None:
        values = start * growth
    elif panel.anchor is not None:
        i = panel.index_of(panel.anchor.date)
        values = growth * (panel.anchor.base / growth[i])
        values[i] = panel.anchor.base
    else:
        values = float(a[0] @ w.p) * growth
    anchor = panel.anchor if start is None else None
    return _flagged_series(label, panel.dates, values, anchor)


def holdings_proportions(panel: PricePanel, w: Weights, date) -> np.ndarray:
    """Drifted proportions ``p_j a_j(t) / a_P(t)`` of an unattended portfolio."""
    i = panel.index_of(date)
    held = w.p * _component_prices(panel, w)[i]
    return held / held.sum()


@dataclass(frozen=True, eq=False)
class RiskCoordinates:
    """Total return ``e0`` over a window and its pure-risk vector ``z0``."""

    e0: float
    z0: np.ndarray

    def __post_init__(self):
        z = np.array(self.z0, dtype=float)
        z.setflags(write=False)
        object.__setattr__(self, "z0", z)
        object.__setattr__(self, "e0", float(self.e0))
        if z.ndim != 1 or z.size == 0:
            raise DomainError("z0 must be a non-empty vector")
        if abs(z.sum()) > SUM_TOL * max(1.0, np.abs(z).sum()):
            raise DomainError(f"risk vector must sum to zero, sums to {z.sum()!r}")

    @property
    def n(self) -> int:
        return self.z0.size


def reconstruct_from_risk(
    rc: RiskCoordinates, base: float = DEFAULT_BASE, dates=None, label: str = ""
) -> PriceSeries:
    """Rebuild a price path from its total return and risk vector.

    Period increments are ``z0 + e0 / n`` (in units of the starting price),
    accumulated from ``base``; the last value is ``base * (1 + e0)``.
    Without ``dates`` the path is indexed by period number 0..n.
    """
    r0 = rc.z0 + rc.e0 / rc.n
    values = base * np.concatenate([[1.0], 1.0 + np.cumsum(r0)])
    if np.any(values <= 0):
        raise DomainError("path crosses zero")
    dates = tuple(range(rc.n + 1)) if dates is None else tuple(dates)
    if len(dates) != rc.n + 1:
        raise DomainError(f"need {rc.n + 1} dates, got {len(dates)}")
    return PriceSeries(label, dates, values, Anchor(dates[0], float(base)))
