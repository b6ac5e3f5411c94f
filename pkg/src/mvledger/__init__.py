"""Price-history ledger for mean-variance analysis of funds.

Adjusted closing prices, portfolio price paths, return diagnostics, the
traditional mean-variance model on periodic returns and a linear model on
price increments anchored at a fixed close.
"""

from .errors import DomainError, MVLedgerError, ParseError
from .linear import (
    Bundle,
    OrthoBasis,
    RiskTable,
    linear_moments,
    load_bundle,
    orthogonalize,
    reconstruct_panel,
    risk_coordinates,
    save_bundle,
)
from .market_data import (
    Anchor,
    DistributionEvent,
    PricePanel,
    PriceSeries,
    RawQuote,
    SplitEvent,
    align_panel,
    build_adjusted_closes,
    normalize,
    parse_distribution_csv,
    parse_quote_csv,
    read_panel_csv,
    write_panel_csv,
)
from .portfolio import (
    RiskCoordinates,
    Weights,
    holdings_proportions,
    reallocated_path,
    reconstruct_from_risk,
    unattended_path,
)
from .returns import interest_identity_report, periodic_discounts, periodic_returns
from .traditional import MomentTable, efficient_frontier, estimate_moments, portfolio_stats

__version__ = "0.1.0"
