"""Linear total-return / pure-risk model.

For prices ``a_0..a_n`` the anchored increments ``(a_i - a_{i-1}) / a_0``
sum to the total return ``e0``.  Removing their mean leaves a risk vector
``z0`` that sums to zero, and the pair ``(e0, z0)`` determines the price
path completely.  Stacking risk vectors gives ``Z0``, whose Gram matrix
``Z0' Z0`` plays the role of the covariance matrix and whose column norms
are the risk magnitudes.
"""

from __future__ import annotations

import datetime as dt
import io
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import DomainError, ParseError
from .market_data import DEFAULT_BASE, Anchor, PricePanel, PriceSeries
from .portfolio import RiskCoordinates, reconstruct_from_risk

__all__ = [
    "RiskTable",
    "OrthoBasis",
    "Bundle",
    "linear_moments",
    "gram",
    "risk_coordinates",
    "default_pivots",
    "orthogonalize",
    "save_bundle",
    "load_bundle",
    "reconstruct_panel",
]

Pivot = Union[str, tuple, Mapping[str, float]]


def _ro(arr) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RiskTable:
    """Total returns ``E0``, risk matrix ``Z0`` (periods x instruments) and ``sigma0``."""

    labels: tuple
    E0: np.ndarray
    sigma0: np.ndarray
    Z0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        for name in ("E0", "sigma0", "Z0"):
            object.__setattr__(self, name, _ro(getattr(self, name)))
        m = len(self.labels)
        if self.E0.shape != (m,) or self.sigma0.shape != (m,) or self.Z0.ndim != 2 or self.Z0.shape[1] != m:
            raise DomainError("risk table shapes do not match the labels")
        scale = np.maximum(1.0, np.abs(self.Z0).sum(axis=0))
        if np.any(np.abs(self.Z0.sum(axis=0)) > 1e-10 * scale):
            raise DomainError("risk matrix columns must sum to zero")

    @property
    def n(self) -> int:
        return self.Z0.shape[0]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"unknown label {label!r}") from None

    def column(self, label: str) -> np.ndarray:
        return self.Z0[:, self.index(label)]

    def subset(self, labels: Sequence[str]) -> "RiskTable":
        idx = [self.index(lab) for lab in labels]
        return RiskTable(tuple(labels), self.E0[idx], self.sigma0[idx], self.Z0[:, idx])


@dataclass(frozen=True, eq=False)
class OrthoBasis:
    """Orthonormal risk directions ``U`` (n x k) and coordinates ``Ztilde`` (k x m)."""

    U: np.ndarray
    Ztilde: np.ndarray
    labels: tuple
    skipped: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "U", _ro(self.U))
        object.__setattr__(self, "Ztilde", _ro(self.Ztilde))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "skipped", tuple(self.skipped))
        n, k = self.U.shape
        if self.Ztilde.shape != (k, len(self.labels)):
            raise DomainError(f"Ztilde shape {self.Ztilde.shape} does not match U ({n}x{k})")

    @property
    def k(self) -> int:
        return self.U.shape[1]

    def risk_matrix(self) -> np.ndarray:
        return self.U @ self.Ztilde

    def orthonormality_error(self) -> float:
        return float(np.linalg.norm(self.U.T @ self.U - np.eye(self.k), 2)) if self.k else 0.0

    def column_means(self) -> np.ndarray:
        return self.U.mean(axis=0)


def linear_moments(panel: PricePanel) -> RiskTable:
    """Total returns and pure-risk matrix of every panel column.

    The window starts at the first panel date, which must be the anchor when
    the panel carries one.
    """
    if panel.anchor is not None and panel.anchor.date != panel.dates[0]:
        raise DomainError(
            f"linear model window must start at the anchor; anchor {panel.anchor.date} "
            f"is not the first date {panel.dates[0]}"
        )
    a = panel.values
    if a.shape[0] < 2:
        raise DomainError("need at least 2 dates")
    if np.any(a[0] <= 0):
        raise DomainError("starting prices must be positive")
    R0 = np.diff(a, axis=0) / a[0]
    E0 = (a[-1] - a[0]) / a[0]
    Z0 = R0 - R0.mean(axis=0)
    return RiskTable(panel.labels, E0, np.linalg.norm(Z0, axis=0), Z0)


def gram(rt: RiskTable) -> np.ndarray:
    """``Z0' Z0``."""
    V0 = rt.Z0.T @ rt.Z0
    return (V0 + V0.T) / 2


def risk_coordinates(source, label: str | None = None) -> RiskCoordinates:
    """``(e0, z0)`` for one column of a :class:`RiskTable` or a price series."""
    if isinstance(source, RiskTable):
        j = source.index(label) if label is not None else 0
        return RiskCoordinates(source.E0[j], source.Z0[:, j])
    values = source.values if isinstance(source, PriceSeries) else np.asarray(source, dtype=float)
    panel = PricePanel(tuple(range(len(values))), ("x",), values.reshape(-1, 1))
    rt = linear_moments(panel)
    return RiskCoordinates(rt.E0[0], rt.Z0[:, 0])


# ---------------------------------------------------------------------------
# Orthogonal factorization


def default_pivots(labels: Sequence[str]) -> list[Pivot]:
    """Difference of the first two funds, the first fund, then every other column."""
    labels = list(labels)
    if len(labels) < 2:
        return labels
    return [(labels[0], labels[1]), labels[0], *labels[2:]]


def _pivot_vector(rt: RiskTable, pivot: Pivot) -> np.ndarray:
    if isinstance(pivot, str):
        return rt.column(pivot).copy()
    if isinstance(pivot, tuple) and len(pivot) == 2 and all(isinstance(p, str) for p in pivot):
        return rt.column(pivot[0]) - rt.column(pivot[1])
    if isinstance(pivot, Mapping):
        return sum(coef * rt.column(lab) for lab, coef in pivot.items())
    raise DomainError(f"unrecognised pivot {pivot!r}")


def _describe(pivot: Pivot) -> str:
    if isinstance(pivot, str):
        return pivot
    if isinstance(pivot, tuple):
        return f"{pivot[0]}-{pivot[1]}"
    return "+".join(f"{c:g}*{lab}" for lab, c in pivot.items())


def orthogonalize(
    rt: RiskTable, pivots: Sequence[Pivot] | None = None, tol: float = 1e-12
) -> OrthoBasis:
    """Gram-Schmidt on caller-chosen risk directions.

    Each pivot is a column label, a pair ``(a, b)`` meaning ``z_a - z_b``,
    or a ``{label: coefficient}`` mapping.  Every pivot is deflated against
    the directions accepted so far (classical Gram-Schmidt, applied twice);
    a pivot whose remainder is at most ``tol`` times its original norm is
    skipped and recorded in ``skipped``.
    """
    pivots = default_pivots(rt.labels) if pivots is None else list(pivots)
    basis: list[np.ndarray] = []
    skipped = []
    for pivot in pivots:
        v = _pivot_vector(rt, pivot)
        norm0 = np.linalg.norm(v)
        if basis:
            Q = np.column_stack(basis)
            for _ in range(2):
                v = v - Q @ (Q.T @ v)
        norm = np.linalg.norm(v)
        if norm0 == 0 or norm <= tol * norm0:
            skipped.append(f"pivot {_describe(pivot)} is dependent (remainder {norm:.3g})")
            continue
        basis.append(v / norm)
    U = np.column_stack(basis) if basis else np.zeros((rt.n, 0))
    return OrthoBasis(U, U.T @ rt.Z0, rt.labels, tuple(skipped))


# ---------------------------------------------------------------------------
# Bundle persistence


class Bundle(NamedTuple):
    basis: OrthoBasis
    E0: np.ndarray
    labels: tuple
    dates: tuple
    legend: str


DEFAULT_LEGEND = (
    "U: orthonormal risk directions, one column per direction, each summing to 0\n"
    "E0: total return per fund over the window\n"
    "Ztilde: risk coordinates, one row per direction, one column per fund\n"
    "dates: market days of the window, anchor first\n"
    "labels: fund symbols"
)

def _fmt_row(row) -> str:
    return ",".join(repr(float(x)) for x in row)


def save_bundle(basis: OrthoBasis, E0, labels=None, dates=(), legend: str = DEFAULT_LEGEND) -> str:
    """Serialize a decomposition as sectioned CSV text.

    Floats are written in shortest round-trip form, so loading reproduces
    them bit for bit.
    """
    labels = tuple(basis.labels if labels is None else labels)
    E0 = np.asarray(E0, dtype=float)
    n, k = basis.U.shape
    if E0.shape != (len(labels),) or len(labels) != basis.Ztilde.shape[1]:
        raise DomainError("E0, labels and Ztilde disagree on the number of funds")
    if dates and len(dates) != n + 1:
        raise DomainError(f"expected {n + 1} dates (anchor plus {n} periods), got {len(dates)}")
    out = io.StringIO()
    out.write(f"#U,{n},{k}\n")
    for row in basis.U:
        out.write(_fmt_row(row) + "\n")
    out.write(f"#E0,1,{len(labels)}\n{_fmt_row(E0)}\n")
    out.write(f"#Ztilde,{k},{len(labels)}\n")
    for row in basis.Ztilde:
        out.write(_fmt_row(row) + "\n")
    out.write(f"#dates,{len(dates)}\n")
    for d in dates:
        out.write(f"{d}\n")
    out.write(f"#labels,{len(labels)}\n{','.join(labels)}\n")
    legend_lines = legend.splitlines()
    out.write(f"#legend,{len(legend_lines)}\n")
    for line in legend_lines:
        out.write(line + "\n")
    return out.getvalue()


def _matrix(lines, rows, cols, name) -> np.ndarray:
    if cols == 0 or rows == 0:
        return np.zeros((rows, cols))
    try:
        data = [[float(x) for x in line.split(",")] for line in lines]
    except ValueError as exc:
        raise ParseError(f"section {name}: {exc}") from None
    if any(len(r) != cols for r in data):
        raise ParseError(f"section {name}: ragged rows (expected {cols} columns)")
    return np.array(data, dtype=float).reshape(rows, cols)


def load_bundle(text: str) -> Bundle:
    """Inverse of :func:`save_bundle`."""
    lines = text.split("\n")
    pos = 0

    def section(name, ndims):
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise ParseError(f"bundle ends before section {name}")
        head = lines[pos].split(",")
        if head[0] != name or len(head) != ndims + 1:
            raise ParseError(f"expected section header {name} with {ndims} sizes, got {lines[pos]!r}")
        try:
            dims = [int(x) for x in head[1:]]
        except ValueError:
            raise ParseError(f"bad section header {lines[pos]!r}") from None
        pos += 1
        return dims

    def take(count):
        nonlocal pos
        if pos + count > len(lines):
            raise ParseError("bundle is truncated")
        chunk = lines[pos : pos + count]
        pos += count
        return chunk

    n, k = section("#U", 2)
    U = _matrix(take(n), n, k, "#U")
    _, m = section("#E0", 2)
    E0 = _matrix(take(1), 1, m, "#E0")[0]
    kz, mz = section("#Ztilde", 2)
    if kz != k or mz != m:
        raise ParseError("Ztilde dimensions disagree with U and E0")
    Z = _matrix(take(k), k, m, "#Ztilde")
    (nd,) = section("#dates", 1)
    dates = tuple(_parse_key(d) for d in take(nd))
    (nl,) = section("#labels", 1)
    row = take(1)[0]
    labels = tuple(row.split(",")) if nl else ()
    if len(labels) != m:
        raise ParseError(f"expected {m} labels, got {len(labels)}")
    (ng,) = section("#legend", 1)
    legend = "\n".join(take(ng))
    return Bundle(OrthoBasis(U, Z, labels), E0, labels, dates, legend)


def _parse_key(text: str):
    text = text.strip()
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        pass
    try:
        return int(text)
    except ValueError:
        return text


def reconstruct_panel(bundle: Bundle, base: float = DEFAULT_BASE) -> PricePanel:
    """Rebuild the stored funds' price paths from ``E0`` and ``U Ztilde``."""
    Z0 = bundle.basis.risk_matrix()
    n = Z0.shape[0]
    dates = bundle.dates if bundle.dates else tuple(range(n + 1))
    cols = []
    for j, label in enumerate(bundle.labels):
        z = Z0[:, j] - Z0[:, j].mean()
        s = reconstruct_from_risk(RiskCoordinates(bundle.E0[j], z), base, dates, label)
        cols.append(s.values)
    return PricePanel(dates, bundle.labels, np.column_stack(cols), Anchor(dates[0], float(base)))
