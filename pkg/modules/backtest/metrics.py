"""
Performance metrics
Cumulative return, annualized Sharpe and maximum drawdown over a NAV series
"""
import numpy as np
import pandas as pd

from modules.backtest.models import Metrics
from modules.shared.errors import CalendarMismatchError, DataError

ZERO_STD = 1e-12


def compute_metrics(nav, trading_days_per_year=252, rf=0.0, initial=None):
    """Metrics for a NAV sequence; Sharpe is None when undefined (fewer than 2 returns or zero std)

    initial, when given, is the capital before the first mark and serves as the base of CR and MDD.
    """
    nav = list(nav)
    if nav and isinstance(nav[0], tuple):
        nav = [v for _, v in nav]
    if initial is not None:
        nav = [initial] + nav
    values = np.asarray(nav, dtype=float)
    if len(values) == 0:
        raise DataError("metrics need at least one NAV point")
    cr = float(values[-1] / values[0] - 1.0)
    mdd = float(np.min(values / np.maximum.accumulate(values) - 1.0))

    sharpe = None
    returns = values[1:] / values[:-1] - 1.0
    if len(returns) >= 2:
        excess = returns - rf / trading_days_per_year
        std = float(np.std(excess, ddof=1))
        if std > ZERO_STD:
            sharpe = float(np.mean(excess) / std * np.sqrt(trading_days_per_year))
    return Metrics(cr=cr, sharpe=sharpe, mdd=mdd)


def nav_frame(nav_series_by_name):
    """Align named (date, nav) series on the union of dates, forward-filling gaps

    Dates before an account's first mark stay NaN; no value is carried backwards.
    """
    columns = {}
    for name, series in nav_series_by_name.items():
        if isinstance(series, pd.Series):
            columns[name] = series
        else:
            columns[name] = pd.Series([v for _, v in series], index=[d for d, _ in series], dtype=float)
    frame = pd.DataFrame(columns).sort_index()
    return frame.ffill()


def aggregate_nav(nav_series_by_name):
    """Total NAV per date across single-fund accounts

    An account joins the sum from its first mark on.
    """
    if not nav_series_by_name:
        raise DataError("no accounts to aggregate")
    date_sets = [set(s.index) if isinstance(s, pd.Series) else {d for d, _ in s}
                 for s in nav_series_by_name.values()]
    if len(date_sets) > 1 and not set.intersection(*date_sets):
        raise CalendarMismatchError("account NAV calendars are disjoint")
    return nav_frame(nav_series_by_name).sum(axis=1).rename('nav')
