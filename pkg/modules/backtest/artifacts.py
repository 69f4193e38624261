"""
Backtest artifacts
out/backtest/<strategy>/<fund>/{trades.csv, nav.csv, metrics.json}
"""
import json
from dataclasses import asdict
from pathlib import Path

import pandas as pd

from modules.backtest.models import Metrics
from modules.shared.errors import DataError

TRADE_COLUMNS = ('date', 'side', 'shares', 'price', 'fee', 'cash_after', 'shares_after')


def result_dir(out_dir, strategy, fund_code):
    return Path(out_dir) / 'backtest' / strategy / fund_code


def write_trades(trades, path):
    rows = [asdict(t) for t in trades]
    frame = pd.DataFrame(rows, columns=list(TRADE_COLUMNS))
    frame['date'] = frame['date'].map(lambda d: d.isoformat())
    frame.to_csv(path, index=False, lineterminator='\n')


def write_nav(nav_series, path):
    frame = pd.DataFrame({'date': [d.isoformat() for d, _ in nav_series],
                          'nav': [v for _, v in nav_series]})
    frame.to_csv(path, index=False, lineterminator='\n')


def write_metrics(metrics, path):
    Path(path).write_text(json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')


def write_result(result, out_dir):
    target = result_dir(out_dir, result.strategy, result.fund_code)
    target.mkdir(parents=True, exist_ok=True)
    write_trades(result.account.trades, target / 'trades.csv')
    write_nav(result.account.nav_series, target / 'nav.csv')
    write_metrics(result.metrics, target / 'metrics.json')
    return target


def read_metrics(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"metrics artifact not found: {path}")
    return Metrics.from_dict(json.loads(path.read_text(encoding='utf-8')))


def read_nav(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"NAV artifact not found: {path}")
    frame = pd.read_csv(path, parse_dates=['date'])
    return pd.Series(frame['nav'].to_numpy(dtype=float), index=frame['date'].dt.date, name='nav')
