"""
Labeling commands
"""
import logging
from pathlib import Path

import click
from flask import Blueprint

from modules.shared.cli import exit_codes, open_store, resolve_config, run_options, write_json, write_jsonl
from modules.shared.errors import InsufficientHistoryError
from modules.threshold_labeler.thresholds import annotate, sideways_fraction

labeler_bp = Blueprint('threshold_labeler', __name__, cli_group=None)


def in_period(samples, period):
    if period is None:
        return samples
    start, end = period
    return [s for s in samples if start <= s.date <= end]


@labeler_bp.cli.command('label')
@run_options
@exit_codes
def label(config_path, mode, jobs, funds, period, output_dir):
    """Dynamic-threshold direction labels per fund under <out>/labels"""
    config = resolve_config(config_path, mode, jobs, funds, period, output_dir)
    store = open_store(config)
    target = Path(config.output_dir) / 'labels'
    summary = {}

    for code in sorted(store.funds):
        bars = list(store.fund_series(code))
        meta = store.fund_meta.get(code)
        samples = annotate(bars, config.thresholds, code,
                           listing_date=meta.listing_date if meta else None,
                           min_listing_days=config.min_listing_days)
        samples = in_period(samples, config.period)
        write_jsonl([s.to_dict() for s in samples], target / f"{code}.jsonl")

        try:
            fraction = sideways_fraction(bars, config.thresholds)
        except InsufficientHistoryError as e:
            logging.warning(f"⚠️ {code}: {e}")
            fraction = None
        summary[code] = {
            'samples': len(samples),
            'complete': sum(1 for s in samples if s.complete),
            'sideways_fraction': fraction,
        }

    write_json(summary, target / 'summary.json')
    click.echo(f"Labels for {len(summary)} funds -> {target}")
