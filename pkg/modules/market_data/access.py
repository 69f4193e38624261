"""
Windowed access over loaded series
All window logic is ordinal over available observations (halted days are simply absent)
"""
import pandas as pd

from modules.market_data.models import WindowResult
from modules.shared.errors import DataError, EmptyWindowError


def window(series, as_of, n):
    """Last n observations dated at or before as_of, most recent last"""
    if n < 1:
        raise ValueError("window length must be at least 1")
    observations = series.upto(as_of, n)
    if not observations:
        raise EmptyWindowError(f"{series.name}: no observation at or before {as_of.isoformat()}")
    return WindowResult(observations=tuple(observations), short_history=len(observations) < n)


def daily_returns(bars):
    """Simple daily returns r_t = close_t / close_{t-1} - 1, indexed by the later date"""
    bars = list(bars)
    if len(bars) < 2:
        raise DataError("daily returns need at least 2 bars")
    closes = pd.Series([b.close for b in bars], index=[b.date for b in bars], dtype=float)
    return (closes / closes.shift(1) - 1.0).iloc[1:].rename('r')


def eligible_funds(funds, as_of, min_days=365):
    """Funds listed for at least min_days natural days at as_of"""
    return [f for f in funds if (as_of - f.listing_date).days >= min_days]
