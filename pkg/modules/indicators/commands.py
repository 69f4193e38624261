"""
Indicator commands
"""
import json
import logging
from datetime import date
from pathlib import Path

import click
from flask import Blueprint

from modules.indicators.engine import compute_snapshot
from modules.shared.cli import exit_codes, open_store, period_dates, resolve_config, run_options, write_jsonl
from modules.shared.errors import InsufficientHistoryError

indicators_bp = Blueprint('indicators', __name__, cli_group=None)


def fund_snapshots(store, code, dates, params):
    """Snapshots for every trading date of the fund in dates; short history is skipped"""
    traded = set(store.fund_series(code).dates)
    rows = []
    skipped = 0
    for day in dates:
        if day not in traded:
            continue
        try:
            snapshot = compute_snapshot(store.as_of(day).fund_bars(code), day, code, params)
        except InsufficientHistoryError:
            skipped += 1
            continue
        rows.append(snapshot.to_dict())
    if skipped:
        logging.info(f"{code}: {skipped} dates skipped for short history")
    return rows


@indicators_bp.cli.command('indicators')
@run_options
@click.option('--date', 'as_of', default=None, help='Print a single snapshot for this date (YYYY-MM-DD)')
@exit_codes
def indicators(config_path, mode, jobs, funds, period, output_dir, as_of):
    """Technical indicator snapshots per fund, as JSONL under <out>/indicators"""
    config = resolve_config(config_path, mode, jobs, funds, period, output_dir)
    store = open_store(config)

    if as_of:
        day = date.fromisoformat(as_of)
        for code in sorted(store.funds):
            snapshot = compute_snapshot(store.as_of(day).fund_bars(code), day, code, config.indicators)
            click.echo(json.dumps(snapshot.to_dict(), sort_keys=True))
        return

    dates = period_dates(store, config)
    target = Path(config.output_dir) / 'indicators'
    for code in sorted(store.funds):
        rows = fund_snapshots(store, code, dates, config.indicators)
        write_jsonl(rows, target / f"{code}.jsonl")
        logging.info(f"📈 {code}: {len(rows)} snapshots")
    click.echo(f"Indicator snapshots for {len(store.funds)} funds -> {target}")
