"""
Shared command-line plumbing
Common flags, run-config resolution, exit-code mapping and gateway wiring
used by every module's command group
"""
import functools
import json
import logging
import sys

import click
from flask import current_app

from llm_integration import Cassette, GatewayMode, LLMGateway, PromptLibrary
from modules.agent_context.runner import AgentRunner
from modules.backtest.strategy import build_agent_strategy
from modules.market_data.store import load_store
from modules.shared.errors import ReitsError
from run_config import load_run_config


def run_options(command):
    """--config, --mode, --jobs, --funds, --period and --out"""
    options = [
        click.option('--config', 'config_path', default='config.json', show_default=True,
                     type=click.Path(dir_okay=False), help='Run configuration JSON document'),
        click.option('--mode', type=click.Choice([m.value for m in GatewayMode]), default=None,
                     help='LLM gateway mode (overrides the configuration)'),
        click.option('--jobs', type=int, default=None, help='Funds processed in parallel'),
        click.option('--funds', default=None, help='Comma-separated fund codes'),
        click.option('--period', default=None, help='START:END (ISO dates)'),
        click.option('--out', 'output_dir', type=click.Path(file_okay=False), default=None,
                     help='Output directory'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def exit_codes(command):
    """Map ReitsError to its exit code; anything unexpected exits 4"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ReitsError as e:
            logging.error(f"❌ {type(e).__name__}: {e}")
            sys.exit(e.exit_code)
        except (SystemExit, click.exceptions.Exit, click.Abort):
            raise
        except Exception as e:
            logging.exception(f"❌ Unexpected failure: {e}")
            sys.exit(4)

    return wrapper


def resolve_config(config_path, mode=None, jobs=None, funds=None, period=None, output_dir=None):
    config = load_run_config(config_path, current_app.config)
    return config.with_overrides(mode=mode, funds=funds, period=period, output_dir=output_dir, jobs=jobs)


class GatewayFactory:
    """Builds gateways for a run; gateways recording to the same file share one cassette"""

    def __init__(self):
        self._cassettes = {}

    def cassette(self, gateway_config):
        if gateway_config.mode not in (GatewayMode.REPLAY, GatewayMode.RECORD):
            return None
        path = gateway_config.cassette_path
        if path not in self._cassettes:
            self._cassettes[path] = Cassette(path)
        return self._cassettes[path]

    def gateway(self, gateway_config):
        return LLMGateway(gateway_config, cassette=self.cassette(gateway_config))


def prompt_library(config):
    return PromptLibrary(config.prompt_dir) if config.prompt_dir else None


def build_runner(config, gateway, prompts):
    return AgentRunner(gateway, prompts, config.thresholds, config.context, config.macro, config.indicators)


def build_strategy(config, gateway, prompts):
    runner = build_runner(config, gateway, prompts)
    return build_agent_strategy(runner, gateway, prompts, config.validation, config.format_retries)


def write_jsonl(rows, path):
    """One sorted-key JSON object per line, LF endings, overwriting path"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + '\n')
    return path


def write_json(data, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8')
    return path


def period_dates(store, config):
    """Trading dates inside the configured period (every calendar date when unset)"""
    if config.period is None:
        return list(store.calendar.dates)
    start, end = config.period
    return store.calendar.within(start, end)


def open_store(config, audit=None):
    return load_store(config.data, config.funds or None, audit)
