"""
Macro state commands
"""
import logging
from datetime import date
from pathlib import Path

import click
from flask import Blueprint

from modules.macro_state.snapshot import market_snapshot
from modules.shared.cli import exit_codes, open_store, period_dates, resolve_config, run_options, write_jsonl

macro_state_bp = Blueprint('macro_state', __name__, cli_group=None)


@macro_state_bp.cli.command('quadrant')
@run_options
@click.option('--date', 'as_of', default=None, help='Classify a single date (YYYY-MM-DD)')
@exit_codes
def quadrant(config_path, mode, jobs, funds, period, output_dir, as_of):
    """Four-quadrant macro regime per trading date, written to <out>/macro/snapshots.jsonl"""
    config = resolve_config(config_path, mode, jobs, funds, period, output_dir)
    store = open_store(config)

    if as_of:
        snapshot = market_snapshot(store.as_of(date.fromisoformat(as_of)), config.macro)
        click.echo(f"{snapshot.as_of.isoformat()}: {snapshot.quadrant.value} - {snapshot.rationale}")
        return

    dates = period_dates(store, config)
    snapshots = [market_snapshot(store.as_of(day), config.macro) for day in dates]
    path = write_jsonl([s.to_layers() for s in snapshots], Path(config.output_dir) / 'macro' / 'snapshots.jsonl')
    logging.info(f"🧭 {len(snapshots)} market snapshots written to {path}")
    if snapshots:
        last = snapshots[-1]
        click.echo(f"{last.as_of.isoformat()}: {last.quadrant.value} - {last.rationale}")
