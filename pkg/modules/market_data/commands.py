"""
Market data commands
ingest: load and validate every configured input, then write normalized copies
and an inventory under <out>/ingest
"""
import logging
from pathlib import Path

import click
from flask import Blueprint

from modules.market_data.access import eligible_funds
from modules.market_data.loader import write_series
from modules.shared.cli import exit_codes, open_store, resolve_config, run_options, write_json

market_data_bp = Blueprint('market_data', __name__, cli_group=None)


@market_data_bp.cli.command('ingest')
@run_options
@exit_codes
def ingest(config_path, mode, jobs, funds, period, output_dir):
    """Validate inputs and write the normalized series"""
    config = resolve_config(config_path, mode, jobs, funds, period, output_dir)
    store = open_store(config)
    target = Path(config.output_dir) / 'ingest'

    for code, series in sorted(store.funds.items()):
        write_series(series, target / 'funds' / f"{code}.csv")
    for name in ('reits_index', 'sse_index', 'dividend_index', 'yields', 'activity'):
        series = getattr(store, name)
        if series is not None:
            write_series(series, target / f"{name}.csv")

    as_of = config.period[0] if config.period else store.calendar.dates[-1]
    eligible = {f.code for f in eligible_funds(store.fund_meta.values(), as_of, config.min_listing_days)}
    inventory = {
        'calendar': {'sessions': len(store.calendar.dates),
                     'first': store.calendar.dates[0].isoformat(),
                     'last': store.calendar.dates[-1].isoformat()},
        'eligible_as_of': as_of.isoformat(),
        'funds': {},
        'announcements': sum(len(v) for v in store.announcements.values()),
        'news': len(store.news),
        'reports': sum(len(v) for v in store.reports.values()),
    }
    for code, series in sorted(store.funds.items()):
        meta = store.fund_meta.get(code)
        inventory['funds'][code] = {
            'bars': len(series),
            'first': series.dates[0].isoformat() if len(series) else None,
            'last': series.dates[-1].isoformat() if len(series) else None,
            'listing_date': meta.listing_date.isoformat() if meta else None,
            'eligible': code in eligible,
        }
    write_json(inventory, target / 'inventory.json')
    logging.info(f"✅ Ingested {len(store.funds)} funds into {target}")
    click.echo(f"{len(store.funds)} funds, {len(eligible)} eligible at {as_of.isoformat()} -> {target}")
