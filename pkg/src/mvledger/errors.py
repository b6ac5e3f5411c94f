"""Exception types shared across the package."""


class MVLedgerError(ValueError):
    """Base class for all errors raised by mvledger."""


class ParseError(MVLedgerError):
    """Malformed input text (CSV rows, dates, numbers)."""


class DomainError(MVLedgerError):
    """Input is well formed but violates a numerical or structural invariant."""
