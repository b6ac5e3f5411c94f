"""Traditional mean-variance model on periodic returns.

Moments are annualized means and population covariances of periodic
returns.  The long-only efficient frontier is solved exactly by
enumerating supports: on each candidate support the equality-constrained
problem ``min p'Vp s.t. Ep = t, sum(p) = 1`` is solved through its KKT
system, infeasible (negative) solutions are discarded and the best
remaining objective wins.  This is exhaustive, so it is limited to at most
16 assets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .market_data import PricePanel
from .portfolio import Weights

__all__ = [
    "MomentTable",
    "FrontierResult",
    "estimate_moments",
    "portfolio_stats",
    "min_variance_portfolio",
    "efficient_frontier",
    "unattended_esig_path",
    "reallocated_esig_path",
]

MAX_ASSETS = 16
PSD_TOL = 1e-10
FEAS_TOL = 1e-9
TIE_RTOL = 1e-10
TIE_ATOL = 1e-14
SUPPORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MomentTable:
    labels: tuple
    E: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        m = len(self.labels)
        for name in ("E", "sigma", "V"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.E.shape != (m,) or self.sigma.shape != (m,) or self.V.shape != (m, m):
            raise DomainError("moment table shapes do not match the labels")
        if not np.allclose(self.V, self.V.T, rtol=0, atol=1e-12):
            raise DomainError("covariance matrix is not symmetric")

    @classmethod
    def from_moments(cls, labels, E, V) -> "MomentTable":
        """Build from means and covariances; deviations come from the diagonal."""
        V = np.asarray(V, dtype=float)
        V = (V + V.T) / 2
        return cls(labels, E, np.sqrt(np.clip(np.diag(V), 0, None)), V)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown label {label!r}") from None

    def subset(self, labels) -> "MomentTable":
        idx = [self.index(lab) for lab in labels]
        return MomentTable(labels, self.E[idx], self.sigma[idx], self.V[np.ix_(idx, idx)])


@dataclass(frozen=True, eq=False)
class FrontierResult:
    labels: tuple
    targets: np.ndarray
    weights: np.ndarray  # k x m, one row per target
    achieved: np.ndarray  # k x 2, columns (e, sigma)

    def __len__(self):
        return len(self.targets)


def estimate_moments(panel: PricePanel, periods_per_year: float = 252) -> MomentTable:
    """Annualized mean and population covariance of periodic returns."""
    a = panel.values
    if a.shape[0] < 3:
        raise DomainError("need at least 2 periods (3 dates) to estimate moments")
    if np.any(a <= 0):
        raise DomainError("prices must be strictly positive")
    r = a[1:] / a[:-1] - 1.0
    mean = r.mean(axis=0)
    dev = r - mean
    V = periods_per_year * (dev.T @ dev) / r.shape[0]
    return MomentTable.from_moments(panel.labels, periods_per_year * mean, V)


def _as_vector(mt: MomentTable, p) -> np.ndarray:
    if isinstance(p, Weights):
        vec = np.zeros(len(mt.labels))
        for lab, x in zip(p.labels, p.p):
            vec[mt.index(lab)] = x
        return vec
    vec = np.asarray(p, dtype=float)
    if vec.shape != (len(mt.labels),):
        raise DomainError(f"weight vector of length {vec.size} for {len(mt.labels)} assets")
    return vec


def portfolio_stats(mt: MomentTable, p) -> tuple[float, float]:
    """``(E p, sqrt(p' V p))`` for a weight vector or :class:`Weights`."""
    vec = _as_vector(mt, p)
    v = float(vec @ mt.V @ vec)
    return float(mt.E @ vec), math.sqrt(max(v, 0.0))


# ---------------------------------------------------------------------------
# Frontier


def _checked_psd(V: np.ndarray) -> np.ndarray:
    lam, Q = np.linalg.eigh(V)
    if lam.min() < -PSD_TOL:
        raise DomainError(f"covariance matrix is not positive semidefinite (eigenvalue {lam.min():.3g})")
    if lam.min() < 0:
        V = (Q * np.clip(lam, 0, None)) @ Q.T
        V = (V + V.T) / 2
    return V


def _candidates(V, E, targets):
    """Yield (support, weights[k, m]) for every support and target.

    ``targets`` None means the minimum-variance problem without a mean
    constraint.  Rows that violate a constraint are NaN.
    """
    m = len(E)
    k = 1 if targets is None else len(targets)
    for size in range(1, m + 1):
        for S in itertools.combinations(range(m), size):
            S = list(S)
            s = len(S)
            rows = [np.ones(s)] if targets is None else [E[S], np.ones(s)]
            A = np.vstack(rows)
            c = A.shape[0]
            K = np.zeros((s + c, s + c))
            K[:s, :s] = 2 * V[np.ix_(S, S)]
            K[:s, s:] = A.T
            K[s:, :s] = A
            rhs = np.zeros((s + c, k))
            if targets is None:
                rhs[s] = 1.0
            else:
                rhs[s] = targets
                rhs[s + 1] = 1.0
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0][:s].T  # k x s
            full = np.zeros((k, m))
            full[:, S] = sol
            ok = np.all(sol >= -FEAS_TOL, axis=1) & (np.abs(sol.sum(axis=1) - 1) <= FEAS_TOL)
            if targets is not None:
                ok &= np.abs(full @ E - targets) <= FEAS_TOL * np.maximum(1, np.abs(targets))
            full[~ok] = np.nan
            yield tuple(S), full


def _clean(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    p[p < SUPPORT_TOL] = 0.0
    return p / p.sum()


def _select(entries, labels, prefer_high_mean=False):
    """Pick the best (variance, mean, p) entry with the degeneracy tie-break.

    Among entries whose variance ties the minimum, prefer the highest mean
    when requested, then the smallest support, then the lexicographically
    smallest sorted label set.
    """
    best_v = min(v for v, _, _ in entries)
    tied = [e for e in entries if e[0] <= best_v + TIE_ATOL + TIE_RTOL * abs(best_v)]

    def key(entry):
        support = tuple(sorted(labels[i] for i in np.flatnonzero(entry[2] > SUPPORT_TOL)))
        return (len(support), support)

    if prefer_high_mean:
        top = max(e[1] for e in tied)
        tied = [e for e in tied if e[1] >= top - FEAS_TOL * max(1.0, abs(top))]
    return min(tied, key=key)


def _solve(V, E, targets, labels, prefer_high_mean=False):
    per_target = [[] for _ in range(1 if targets is None else len(targets))]
    for _, full in _candidates(V, E, targets):
        for i, p in enumerate(full):
            if np.isnan(p[0]):
                continue
            p = _clean(p)
            per_target[i].append((float(p @ V @ p), float(E @ p), p))
    out = []
    for i, entries in enumerate(per_target):
        if not entries:
            raise DomainError("infeasible frontier target")
        out.append(_select(entries, labels, prefer_high_mean)[2])
    return out


def _check_size(mt: MomentTable):
    if len(mt.labels) > MAX_ASSETS:
        raise DomainError(f"support enumeration is limited to {MAX_ASSETS} assets")


def min_variance_portfolio(mt: MomentTable) -> np.ndarray:
    """Long-only minimum-variance weights (highest mean among ties)."""
    _check_size(mt)
    V = _checked_psd(mt.V)
    return _solve(V, mt.E, None, mt.labels, prefer_high_mean=True)[0]


def efficient_frontier(mt: MomentTable, k: int) -> FrontierResult:
    """``k`` long-only frontier portfolios at equally spaced mean levels.

    Targets run from the mean of the long-only minimum-variance portfolio
    to the largest asset mean.
    """
    if k < 2:
        raise DomainError("need k >= 2 frontier points")
    _check_size(mt)
    V = _checked_psd(mt.V)
    p_min = _solve(V, mt.E, None, mt.labels, prefer_high_mean=True)[0]
    lo, hi = float(mt.E @ p_min), float(mt.E.max())
    targets = np.linspace(lo, hi, k)
    targets[0], targets[-1] = lo, hi
    weights = np.array(_solve(V, mt.E, targets, mt.labels))
    # the lowest target is attained by the minimum-variance portfolio itself
    weights[0] = p_min
    achieved = np.array([portfolio_stats(mt, p) for p in weights])
    return FrontierResult(mt.labels, targets, weights, achieved)


# ---------------------------------------------------------------------------
# (e, sigma) paths between two assets


def unattended_esig_path(
    panel: PricePanel, from_label: str, to_label: str, nT: int, periods_per_year: float = 252
) -> list[tuple[float, float, float]]:
    """(t, e, sigma) of buy-and-hold blends ``t a_from + (1 - t) a_to``.

    Moments are taken from the returns of each blended price path, which is
    not the same as evaluating :func:`portfolio_stats` at ``(t, 1 - t)``.
    """
    if nT < 2:
        raise DomainError("need nT >= 2")
    a_from, a_to = panel.column(from_label), panel.column(to_label)
    T = np.linspace(0.0, 1.0, nT)
    AT = np.outer(a_from, T) + np.outer(a_to, 1.0 - T)
    RT = AT[1:] / AT[:-1] - 1.0
    ET = periods_per_year * RT.mean(axis=0)
    SigT = math.sqrt(periods_per_year) * RT.std(axis=0, ddof=0)
    return [(float(t), float(e), float(s)) for t, e, s in zip(T, ET, SigT)]


def reallocated_esig_path(
    mt: MomentTable, i: str, j: str, nT: int
) -> list[tuple[float, float, float]]:
    """(t, e, sigma) of rebalanced blends ``t`` of asset ``i`` and ``1 - t`` of ``j``."""
    if nT < 2:
        raise DomainError("need nT >= 2")
    ii, jj = mt.index(i), mt.index(j)
    out = []
    for t in np.linspace(0.0, 1.0, nT):
        p = np.zeros(len(mt.labels))
        p[ii] += t
        p[jj] += 1.0 - t
        e, s = portfolio_stats(mt, p)
        out.append((float(t), e, s))
    return out
