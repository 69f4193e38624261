"""
Backtest report
Per-fund and summary tables of CR / Sharpe / MDD across strategies, win rates
against Buy & Hold and the aggregate NAV curve, built from artifacts only
"""
import json
import logging
from pathlib import Path

import pandas as pd

from modules.backtest.artifacts import read_metrics, read_nav
from modules.backtest.metrics import aggregate_nav
from modules.backtest.models import Strategy
from modules.shared.errors import DataError

METRIC_NAMES = ('cr', 'sharpe', 'mdd')
DEFAULT_STRATEGIES = tuple(s.value for s in Strategy)


def discover_funds(out_dir, strategies):
    funds = set()
    for strategy in strategies:
        folder = Path(out_dir) / 'backtest' / strategy
        if folder.exists():
            funds.update(p.name for p in folder.iterdir() if (p / 'metrics.json').exists())
    return sorted(funds)


def per_fund_table(out_dir, strategies=DEFAULT_STRATEGIES, funds=None):
    """One row per fund, columns <strategy>_<metric>"""
    funds = funds or discover_funds(out_dir, strategies)
    if not funds:
        raise DataError(f"no backtest artifacts under {Path(out_dir) / 'backtest'}")
    rows = []
    for fund in funds:
        row = {'fund': fund}
        for strategy in strategies:
            metrics = read_metrics(Path(out_dir) / 'backtest' / strategy / fund / 'metrics.json')
            for name in METRIC_NAMES:
                row[f"{strategy}_{name}"] = getattr(metrics, name)
        rows.append(row)
    return pd.DataFrame(rows).set_index('fund')


def summary_table(per_fund, strategies=DEFAULT_STRATEGIES):
    """Mean / Max / Min of every metric per strategy"""
    rows = []
    for strategy in strategies:
        for name in METRIC_NAMES:
            column = pd.to_numeric(per_fund[f"{strategy}_{name}"], errors='coerce')
            rows.append({'strategy': strategy, 'metric': name,
                         'mean': column.mean(), 'max': column.max(), 'min': column.min()})
    return pd.DataFrame(rows)


def win_rates(per_fund, strategies=DEFAULT_STRATEGIES, benchmark=Strategy.BUY_AND_HOLD.value):
    """Share of funds where each agent strategy beats the benchmark on each metric

    Higher CR and Sharpe win; a shallower (greater) MDD wins. Funds with an
    undefined Sharpe on either side are left out of the Sharpe rate.
    """
    rates = {}
    for strategy in strategies:
        if strategy == benchmark:
            continue
        rates[strategy] = {}
        for name in METRIC_NAMES:
            mine = pd.to_numeric(per_fund[f"{strategy}_{name}"], errors='coerce')
            theirs = pd.to_numeric(per_fund[f"{benchmark}_{name}"], errors='coerce')
            valid = mine.notna() & theirs.notna()
            rates[strategy][name] = float((mine[valid] > theirs[valid]).mean()) if valid.any() else None
    return rates


def aggregate_nav_table(out_dir, strategies=DEFAULT_STRATEGIES, funds=None):
    funds = funds or discover_funds(out_dir, strategies)
    columns = {}
    for strategy in strategies:
        navs = {fund: read_nav(Path(out_dir) / 'backtest' / strategy / fund / 'nav.csv') for fund in funds}
        columns[strategy] = aggregate_nav(navs)
    frame = pd.DataFrame(columns)
    frame.index.name = 'date'
    return frame


def _markdown(frame):
    # undefined metrics render as blank cells
    cells = frame.astype(object).where(frame.notna(), None)
    return cells.to_markdown(index=False, floatfmt='.4f', missingval='')


def build_report(out_dir, strategies=DEFAULT_STRATEGIES, funds=None):
    """Write the report files under <out_dir>/report and return their paths"""
    per_fund = per_fund_table(out_dir, strategies, funds)
    summary = summary_table(per_fund, strategies)
    rates = win_rates(per_fund, strategies)
    aggregate = aggregate_nav_table(out_dir, strategies, list(per_fund.index))

    target = Path(out_dir) / 'report'
    target.mkdir(parents=True, exist_ok=True)
    paths = {
        'summary': target / 'summary.csv',
        'per_fund': target / 'per_fund.csv',
        'markdown': target / 'report.md',
        'win_rates': target / 'win_rates.json',
        'aggregate_nav': target / 'aggregate_nav.csv',
    }
    summary.to_csv(paths['summary'], index=False, lineterminator='\n')
    per_fund.to_csv(paths['per_fund'], lineterminator='\n')
    aggregate.to_csv(paths['aggregate_nav'], lineterminator='\n')
    paths['win_rates'].write_text(json.dumps(rates, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    paths['markdown'].write_text(
        '# Strategy performance summary\n\n' + _markdown(summary) + '\n\n'
        '# Per-fund performance\n\n' + _markdown(per_fund.reset_index()) + '\n',
        encoding='utf-8')
    logging.info(f"📊 Report for {len(per_fund)} funds written to {target}")
    return paths
