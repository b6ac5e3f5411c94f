"""Periodic returns and discounts, anchored increments and interest identities.

All quantities are dimensionless fractions.  Standard deviations are the
population form (divide by ``n``), not the sample form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError
from .market_data import PriceSeries

__all__ = [
    "PeriodicSeries",
    "periodic_returns",
    "periodic_discounts",
    "effective_return",
    "effective_discount",
    "anchored_increments",
    "annualized_mean",
    "annualized_std",
    "IdentityReport",
    "interest_identity_report",
]

KINDS = ("return", "discount", "anchored_start", "anchored_end")


@dataclass(frozen=True, eq=False)
class PeriodicSeries:
    kind: str
    values: np.ndarray
    periods_per_year: float = 252

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown periodic series kind {self.kind!r}")
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.kind == "return" and np.any(values <= -1):
            raise DomainError("periodic returns must exceed -1")
        if self.kind == "discount" and np.any(values >= 1):
            raise DomainError("periodic discounts must be below 1")
        if not self.periods_per_year > 0:
            raise DomainError("periods_per_year must be positive")

    def __len__(self):
        return len(self.values)


def _prices(series) -> np.ndarray:
    a = np.asarray(series.values if isinstance(series, PriceSeries) else series, dtype=float)
    if a.ndim != 1 or len(a) < 2:
        raise DomainError("need a 1-d price vector with at least 2 values")
    if np.any(a <= 0):
        raise DomainError("prices must be strictly positive")
    return a


def periodic_returns(series, periods_per_year: float = 252) -> PeriodicSeries:
    """``r_i = a_i / a_{i-1} - 1``."""
    a = _prices(series)
    return PeriodicSeries("return", a[1:] / a[:-1] - 1.0, periods_per_year)


def periodic_discounts(series, periods_per_year: float = 252) -> PeriodicSeries:
    """``d_i = 1 - a_{i-1} / a_i``."""
    a = _prices(series)
    return PeriodicSeries("discount", 1.0 - a[:-1] / a[1:], periods_per_year)


def effective_return(a0: float, a1: float) -> float:
    if not (a0 > 0 and a1 > 0):
        raise DomainError("prices must be strictly positive")
    return (a1 - a0) / a0


def effective_discount(a0: float, a1: float) -> float:
    if not (a0 > 0 and a1 > 0):
        raise DomainError("prices must be strictly positive")
    return (a1 - a0) / a1


def anchored_increments(
    series, anchor: Literal["start", "end"] = "start", periods_per_year: float = 252
) -> PeriodicSeries:
    """Price increments divided by the first (``start``) or last (``end``) price.

    The start-anchored increments sum to the effective return over the
    window, the end-anchored ones to the effective discount.
    """
    a = _prices(series)
    if anchor == "start":
        return PeriodicSeries("anchored_start", np.diff(a) / a[0], periods_per_year)
    if anchor == "end":
        return PeriodicSeries("anchored_end", np.diff(a) / a[-1], periods_per_year)
    raise DomainError(f"anchor must be 'start' or 'end', got {anchor!r}")


def annualized_mean(ps: PeriodicSeries) -> float:
    if len(ps) == 0:
        raise DomainError("empty periodic series")
    return float(ps.periods_per_year * np.mean(ps.values))


def annualized_std(ps: PeriodicSeries) -> float:
    """Population standard deviation scaled by ``sqrt(periods_per_year)``."""
    if len(ps) == 0:
        raise DomainError("empty periodic series")
    return float(math.sqrt(ps.periods_per_year) * np.std(ps.values, ddof=0))


@dataclass(frozen=True)
class IdentityReport:
    e_r: float
    e_d: float
    e0: float
    e1: float
    product_r_d: float
    product_0_1: float

    def as_dict(self) -> dict:
        return {
            "e_r": self.e_r,
            "e_d": self.e_d,
            "e0": self.e0,
            "e1": self.e1,
            "product_r_d": self.product_r_d,
            "product_0_1": self.product_0_1,
        }


def interest_identity_report(series, periods_per_year: float = 252) -> IdentityReport:
    """Compare mean periodic return/discount against total return/discount.

    ``e0`` and ``e1`` are the sums of the start- and end-anchored increments,
    so ``(1 + e0)(1 - e1)`` telescopes to 1.  ``e_r`` and ``e_d`` are the
    annualized means of the periodic returns and discounts, whose product
    ``(1 + e_r)(1 - e_d)`` generally is not 1.
    """
    a = _prices(series)
    e_r = annualized_mean(periodic_returns(a, periods_per_year))
    e_d = annualized_mean(periodic_discounts(a, periods_per_year))
    e0 = float(np.sum(anchored_increments(a, "start").values))
    e1 = float(np.sum(anchored_increments(a, "end").values))
    return IdentityReport(
        e_r=e_r,
        e_d=e_d,
        e0=e0,
        e1=e1,
        product_r_d=(1 + e_r) * (1 - e_d),
        product_0_1=(1 + e0) * (1 - e1),
    )
