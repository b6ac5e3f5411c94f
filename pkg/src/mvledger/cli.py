"""Command-line entry point: ``mvledger <subcommand> ...``.

Data goes to standard output (or ``--out``); diagnostics go to standard
error.  Relative input paths that do not exist are looked up under
``$MVLEDGER_DATA_DIR``.
"""

from __future__ import annotations

import argparse
import datetime as dt
import io
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import linear, market_data, portfolio, returns, svg, traditional
from .errors import MVLedgerError, ParseError
from .market_data import PricePanel, PriceSeries

DATA_DIR_ENV = "MVLEDGER_DATA_DIR"
_GENERIC_VALUE_HEADERS = {"close", "value", "adj close", "adj_close"}


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    root = os.environ.get(DATA_DIR_ENV)
    if root and (Path(root) / p).exists():
        return Path(root) / p
    return p


def _read(path: str) -> str:
    p = _resolve(path)
    try:
        return p.read_text(encoding="utf-8")
    except OSError as exc:
        raise MVLedgerError(f"cannot read {p}: {exc.strerror}") from None


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _fmt(x: float, precision: int) -> str:
    s = f"{x:.{precision}f}"
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def _csv(header, rows, precision) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for name, values in rows:
        out.write(",".join([name] + [_fmt(v, precision) for v in values]) + "\n")
    return out.getvalue()


def _load_panel(args, path: str) -> PricePanel:
    return market_data.read_panel_csv(_read(path), getattr(args, "anchor", None), getattr(args, "base", None))


def _weights(args, labels, long_only: bool) -> portfolio.Weights:
    if args.weights is None:
        raise MVLedgerError("--weights is required")
    p = _resolve(args.weights)
    if p.is_file():
        return portfolio.read_weights_csv(p.read_text(encoding="utf-8"), long_only)
    return portfolio.parse_weights(args.weights, labels, long_only)


def _panel_from_series(series: PriceSeries) -> PricePanel:
    return PricePanel(series.dates, (series.label,), series.values.reshape(-1, 1), series.anchor)


# ---------------------------------------------------------------------------
# subcommands


def cmd_adjust(args) -> str:
    quotes = market_data.parse_quote_csv(_read(args.quotes))
    events = market_data.parse_distribution_csv(_read(args.distributions)) if args.distributions else []
    splits = market_data.parse_split_csv(_read(args.splits)) if args.splits else []
    label = args.label or Path(args.quotes).stem
    base = 100.0 if args.base is None else args.base
    if not events and not splits and quotes and all(q.adj_close is not None for q in quotes):
        series = market_data.series_from_quotes(quotes, label, args.anchor, base)
    else:
        series = market_data.build_adjusted_closes(quotes, events, args.anchor, base, splits=splits, label=label)
    return market_data.write_panel_csv(_panel_from_series(series), args.precision or 5)


def cmd_normalize(args) -> str:
    panel = market_data.read_panel_csv(_read(args.panel))
    anchor = args.anchor or panel.dates[0]
    base = 100.0 if args.base is None else args.base
    cols = [market_data.normalize(panel.series(lab), anchor, base) for lab in panel.labels]
    return market_data.write_panel_csv(market_data.align_panel(cols), args.precision or 5)


def _series_from_file(path: str, anchor, base) -> list[PriceSeries]:
    text = _read(path)
    first = text.lstrip().split("\n", 1)[0]
    header = [h.strip() for h in first.split(",")]
    if len(header) == 2 and header[1].lower() not in _GENERIC_VALUE_HEADERS or len(header) > 2 and "adj close" not in [h.lower() for h in header]:
        panel = market_data.read_panel_csv(text)
        series = [panel.series(lab) for lab in panel.labels]
    else:
        quotes = market_data.parse_quote_csv(text)
        use_adj = all(q.adj_close is not None for q in quotes)
        vals = [q.adj_close if use_adj else q.close for q in quotes]
        series = [PriceSeries(Path(path).stem, tuple(q.date for q in quotes), vals)]
    if anchor is not None:
        series = [market_data.normalize(s, anchor, base) for s in series]
    return series


def cmd_panel(args) -> str:
    base = 100.0 if args.base is None else args.base
    series = [s for path in args.inputs for s in _series_from_file(path, args.anchor, base)]
    if args.anchor is None:
        # anchor every series at the first common date so the columns line up
        common = set(series[0].dates)
        for s in series[1:]:
            common &= set(s.dates)
        if not common:
            raise MVLedgerError("empty date intersection")
        first = min(common)
        series = [market_data.normalize(s, first, base) for s in series]
    return market_data.write_panel_csv(market_data.align_panel(series), args.precision or 5)


def cmd_paths(args) -> str:
    panel = market_data.read_panel_csv(_read(args.panel))
    long_only = args.mode != "longshort"
    w = _weights(args, panel.labels, long_only)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.mode == "reallocated":
            path = portfolio.reallocated_path(panel, w, args.start, args.name)
        else:
            path = portfolio.unattended_path(panel, w, args.name)
    for warning in caught:
        print(f"warning: {warning.message}", file=sys.stderr)
    return market_data.write_panel_csv(panel.with_column(args.name, path.values), args.precision or 5)


def cmd_moments(args) -> str:
    panel = market_data.read_panel_csv(_read(args.panel))
    prec = args.precision or 4
    header = ["stat", *panel.labels]
    if args.model == "traditional":
        mt = traditional.estimate_moments(panel, args.ppy)
        rows = [("E", mt.E), ("sigma", mt.sigma)]
        rows += [(lab, mt.V[i]) for i, lab in enumerate(panel.labels)]
    else:
        rt = linear.linear_moments(panel)
        V0 = linear.gram(rt)
        rows = [("E0", rt.E0), ("sigma0", rt.sigma0)]
        rows += [(lab, V0[i]) for i, lab in enumerate(panel.labels)]
    return _csv(header, rows, prec)


def cmd_frontier(args) -> str:
    panel = market_data.read_panel_csv(_read(args.panel))
    mt = traditional.estimate_moments(panel, args.ppy)
    fr = traditional.efficient_frontier(mt, args.k)
    prec = args.precision or 4
    out = io.StringIO()
    out.write(",".join(["target", *fr.labels, "e", "sigma"]) + "\n")
    for t, p, (e, s) in zip(fr.targets, fr.weights, fr.achieved):
        out.write(",".join(_fmt(x, prec) for x in [t, *p, e, s]) + "\n")
    return out.getvalue()


def _parse_pivots(text: str | None, labels):
    if not text:
        return None
    pivots = []
    for item in (s.strip() for s in text.split(",") if s.strip()):
        if item in labels:
            pivots.append(item)
        elif "-" in item:
            a, b = item.split("-", 1)
            pivots.append((a.strip(), b.strip()))
        else:
            raise ParseError(f"unknown pivot {item!r}")
    return pivots


def _decompose(panel: PricePanel, pivots_text, funds_text, tol):
    rt = linear.linear_moments(panel)
    basis = linear.orthogonalize(rt, _parse_pivots(pivots_text, panel.labels), tol)
    for note in basis.skipped:
        print(f"note: {note}", file=sys.stderr)
    if funds_text:
        funds = tuple(s.strip() for s in funds_text.split(",") if s.strip())
        idx = [rt.index(f) for f in funds]
        basis = linear.OrthoBasis(basis.U, basis.Ztilde[:, idx], funds, basis.skipped)
        return basis, rt.E0[idx]
    return basis, rt.E0


def cmd_decompose(args) -> str:
    panel = market_data.read_panel_csv(_read(args.panel))
    basis, E0 = _decompose(panel, args.pivots, args.funds, args.tol)
    return linear.save_bundle(basis, E0, basis.labels, panel.dates)


def cmd_reconstruct(args) -> str:
    bundle = linear.load_bundle(_read(args.bundle))
    base = 100.0 if args.base is None else args.base
    return market_data.write_panel_csv(linear.reconstruct_panel(bundle, base), args.precision or 5)


def cmd_identity_check(args) -> str:
    panel = market_data.read_panel_csv(_read(args.panel))
    prec = args.precision or 4
    rows = []
    for lab in panel.labels:
        rep = returns.interest_identity_report(panel.column(lab), args.ppy)
        rows.append((lab, list(rep.as_dict().values())))
    return _csv(["label", "e_r", "e_d", "e0", "e1", "product_r_d", "product_0_1"], rows, prec)


def cmd_plot(args) -> str:
    text = _read(args.input)
    if args.kind == "prices":
        return svg.plot_prices(market_data.read_panel_csv(text))
    if args.kind == "esig":
        panel = market_data.read_panel_csv(text)
        mt = traditional.estimate_moments(panel, args.ppy)
        points = {lab: (float(mt.E[i]), float(mt.sigma[i])) for i, lab in enumerate(mt.labels)}
        paths = {}
        if len(panel.labels) >= 2:
            a = args.from_label or panel.labels[0]
            b = args.to_label or panel.labels[1]
            paths["unattended path"] = [(e, s) for _, e, s in traditional.unattended_esig_path(panel, a, b, args.nT, args.ppy)]
            paths["continually reallocated"] = [(e, s) for _, e, s in traditional.reallocated_esig_path(mt, a, b, args.nT)]
            if args.k:
                fr = traditional.efficient_frontier(mt, args.k)
                paths["efficient frontier"] = [tuple(x) for x in fr.achieved]
        return svg.plot_esig(points, paths)
    if args.kind == "riskplane":
        if text.startswith("#U"):
            basis = linear.load_bundle(text).basis
        else:
            basis, _ = _decompose(market_data.read_panel_csv(text), args.pivots, None, args.tol)
        return svg.plot_riskplane(basis)
    raise MVLedgerError(f"unknown plot kind {args.kind!r}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvledger", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", help="write output here instead of standard output")
        p.add_argument("--precision", type=int, help="decimal places in numeric output")
        return p

    p = add("adjust", cmd_adjust, "adjusted closing prices from quotes and distributions")
    p.add_argument("quotes")
    p.add_argument("--distributions", help="CSV with ex_date,amount")
    p.add_argument("--splits", help="CSV with ex_date,ratio")
    p.add_argument("--anchor", type=_date)
    p.add_argument("--base", type=float)
    p.add_argument("--label")

    p = add("normalize", cmd_normalize, "rescale every panel column to --base at --anchor")
    p.add_argument("panel")
    p.add_argument("--anchor", type=_date)
    p.add_argument("--base", type=float)

    p = add("panel", cmd_panel, "align quote or panel files into one normalized panel")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--anchor", type=_date)
    p.add_argument("--base", type=float)

    p = add("paths", cmd_paths, "append a portfolio column to a panel")
    p.add_argument("panel")
    p.add_argument("--weights", help="label,proportion CSV file or inline FBT=0.75,XBI=0.25")
    p.add_argument("--mode", choices=("unattended", "reallocated", "longshort"), default="unattended")
    p.add_argument("--name", default="P")
    p.add_argument("--start", type=float, help="reallocated value on the first date")

    p = add("moments", cmd_moments, "traditional or linear moment table")
    p.add_argument("panel")
    p.add_argument("--model", choices=("traditional", "linear"), default="traditional")
    p.add_argument("--ppy", type=float, default=252)

    p = add("frontier", cmd_frontier, "long-only efficient frontier at k equally spaced means")
    p.add_argument("panel")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--ppy", type=float, default=252)

    p = add("decompose", cmd_decompose, "orthogonal risk decomposition bundle")
    p.add_argument("panel")
    p.add_argument("--pivots", help="comma list of labels or A-B differences")
    p.add_argument("--funds", help="columns to store in the bundle (default all)")
    p.add_argument("--tol", type=float, default=1e-12)

    p = add("reconstruct", cmd_reconstruct, "rebuild prices from a decomposition bundle")
    p.add_argument("bundle")
    p.add_argument("--base", type=float)

    p = add("identity-check", cmd_identity_check, "return/discount identity diagnostics per column")
    p.add_argument("panel")
    p.add_argument("--ppy", type=float, default=252)

    p = add("plot", cmd_plot, "SVG chart")
    p.add_argument("kind", choices=svg.PLOT_KINDS)
    p.add_argument("input")
    p.add_argument("--ppy", type=float, default=252)
    p.add_argument("--nT", type=int, default=41)
    p.add_argument("--k", type=int, default=0, help="also draw a k-point efficient frontier")
    p.add_argument("--from", dest="from_label")
    p.add_argument("--to", dest="to_label")
    p.add_argument("--pivots")
    p.add_argument("--tol", type=float, default=1e-12)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _emit(args, args.func(args))
    except MVLedgerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
