"""
Backtest commands
backtest: strategy A (primary gateway), strategy B (alternate gateway) and the
Buy & Hold control for every fund; report: summary tables from the artifacts
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
from flask import Blueprint, current_app

from modules.backtest.artifacts import write_result
from modules.backtest.engine import buy_and_hold, run_backtest
from modules.backtest.models import Strategy
from modules.backtest.report import DEFAULT_STRATEGIES, build_report
from modules.backtest.strategy import PAYLOAD_CACHE
from modules.market_data.access import eligible_funds
from modules.market_data.store import AccessAudit
from modules.shared.cli import (
    GatewayFactory, build_strategy, exit_codes, open_store, prompt_library, resolve_config, run_options,
)
from modules.shared.errors import DataError, InvariantError
from run_config import parse_funds

backtest_bp = Blueprint('backtest', __name__, cli_group=None)


def backtest_fund(store, code, config, strategies):
    """Every requested strategy for one fund; artifacts written as each finishes"""
    period = config.require_period()
    results = []
    for name, strategy in strategies.items():
        if strategy is None:
            result = buy_and_hold(store, code, period, config.risk)
        else:
            result = run_backtest(store, code, period, strategy, config.risk, strategy_name=name)
        write_result(result, config.output_dir)
        results.append(result)
    store.forget(PAYLOAD_CACHE, code)
    return results


@backtest_bp.cli.command('backtest')
@run_options
@click.option('--strategy', 'selected', multiple=True, type=click.Choice([s.value for s in Strategy]),
              help='Restrict to these strategies (default: all three)')
@exit_codes
def backtest(config_path, mode, jobs, funds, period, output_dir, selected):
    """Daily backtests under <out>/backtest/<strategy>/<fund>"""
    config = resolve_config(config_path, mode, jobs, funds, period, output_dir)
    start = config.require_period()[0]
    audit = AccessAudit()
    store = open_store(config, audit)
    prompts = prompt_library(config)
    factory = GatewayFactory()

    strategies = {}
    for name in selected or [s.value for s in Strategy]:
        if name == Strategy.AGENT_A.value:
            strategies[name] = build_strategy(config, factory.gateway(config.gateway), prompts)
        elif name == Strategy.AGENT_B.value:
            strategies[name] = build_strategy(config, factory.gateway(config.gateway_b), prompts)
        else:
            strategies[name] = None

    eligible = {f.code for f in eligible_funds(store.fund_meta.values(), start, config.min_listing_days)}
    excluded = sorted(c for c in store.funds if c not in eligible)
    if excluded:
        logging.warning(f"⚠️ Skipping {len(excluded)} fund(s) listed for fewer than {config.min_listing_days} days "
                        f"at {start.isoformat()}: {', '.join(excluded)}")
    codes = sorted(c for c in store.funds if c in eligible)
    if not codes:
        raise DataError(f"no fund is eligible for a backtest starting {start.isoformat()}")
    logging.info(f"🚀 Backtesting {len(codes)} funds x {len(strategies)} strategies with {config.jobs} jobs")
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        results = [r for fund in pool.map(lambda c: backtest_fund(store, c, config, strategies), codes)
                   for r in fund]

    violations = audit.violations()
    if violations:
        as_of, served = violations[0]
        raise InvariantError(f"lookahead: data dated {served.isoformat()} served at {as_of.isoformat()}")

    for result in results:
        sharpe = 'n/a' if result.metrics.sharpe is None else f"{result.metrics.sharpe:.2f}"
        click.echo(f"{result.strategy:<13} {result.fund_code}: CR {result.metrics.cr:+.2%} "
                   f"Sharpe {sharpe} MDD {result.metrics.mdd:.2%}")


@backtest_bp.cli.command('report')
@click.option('--out', 'output_dir', type=click.Path(file_okay=False), default=None,
              help='Directory holding the backtest artifacts')
@click.option('--funds', default=None, help='Comma-separated fund codes (default: all found)')
@exit_codes
def report(output_dir, funds):
    """Per-fund and summary tables, win rates and aggregate NAV under <out>/report"""
    output_dir = output_dir or current_app.config['REITS_OUTPUT_DIR']
    paths = build_report(Path(output_dir), DEFAULT_STRATEGIES, list(parse_funds(funds)) if funds else None)
    click.echo(paths['markdown'].read_text(encoding='utf-8'))
