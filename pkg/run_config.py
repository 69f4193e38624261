"""
Run configuration
A single JSON document describing data paths, the fund universe, the backtest
period and every tunable parameter. String values may reference environment
variables as ${VAR} or ${VAR:-default}.
"""
import json
import logging
import os
import re
from dataclasses import dataclass, field, fields, replace
from datetime import date
from pathlib import Path
from typing import Optional

from llm_integration import GatewayConfig
from modules.agent_context.models import ContextParams
from modules.backtest.models import RiskConfig
from modules.indicators.models import IndicatorParams
from modules.macro_state.models import MacroParams
from modules.prediction.models import ValidationPolicy
from modules.reward.models import RewardWeights
from modules.shared.errors import ConfigError, ReitsError
from modules.threshold_labeler.models import ThresholdParams

_ENV_PATTERN = re.compile(r'\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^}]*))?\}')

REQUIRED_PATHS = ('fund_meta', 'funds_dir', 'trading_calendar')


@dataclass(frozen=True)
class DataPaths:
    fund_meta: Optional[str] = None
    funds_dir: Optional[str] = None
    trading_calendar: Optional[str] = None
    reits_index: Optional[str] = None
    sse_index: Optional[str] = None
    dividend_index: Optional[str] = None
    yields: Optional[str] = None
    market_activity: Optional[str] = None
    announcements: Optional[str] = None
    news: Optional[str] = None
    reports: Optional[str] = None
    release_calendar: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    data: DataPaths
    funds: tuple = ()
    period: Optional[tuple] = None
    thresholds: ThresholdParams = field(default_factory=ThresholdParams)
    validation: ValidationPolicy = field(default_factory=ValidationPolicy)
    reward: RewardWeights = field(default_factory=RewardWeights)
    risk: RiskConfig = field(default_factory=RiskConfig)
    indicators: IndicatorParams = field(default_factory=IndicatorParams)
    context: ContextParams = field(default_factory=ContextParams)
    macro: MacroParams = field(default_factory=MacroParams)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    gateway_b: GatewayConfig = field(default_factory=GatewayConfig)
    output_dir: str = 'out'
    prompt_dir: Optional[str] = None
    reward_candidates: int = 4
    format_retries: int = 2
    min_listing_days: int = 365
    jobs: int = 1

    def with_overrides(self, mode=None, funds=None, period=None, output_dir=None, jobs=None):
        """Command-line flags take precedence over the document"""
        config = self
        if mode:
            config = replace(config, gateway=config.gateway.with_mode(mode),
                             gateway_b=config.gateway_b.with_mode(mode))
        if funds:
            config = replace(config, funds=parse_funds(funds))
        if period:
            config = replace(config, period=parse_period(period))
        if output_dir:
            config = replace(config, output_dir=str(output_dir))
        if jobs is not None:
            if jobs < 1:
                raise ConfigError('jobs', "must be >= 1")
            config = replace(config, jobs=jobs)
        return config

    def require_period(self):
        if self.period is None:
            raise ConfigError('period', "a backtest period is required (config or --period START:END)")
        return self.period


def interpolate(value, path='config'):
    """Expand ${VAR} and ${VAR:-default} in every string of a JSON value"""
    if isinstance(value, dict):
        return {k: interpolate(v, f"{path}.{k}") for k, v in value.items()}
    if isinstance(value, list):
        return [interpolate(v, f"{path}[{i}]") for i, v in enumerate(value)]
    if not isinstance(value, str):
        return value

    def expand(match):
        name, default = match.group(1), match.group(2)
        if name in os.environ:
            return os.environ[name]
        if default is not None:
            return default
        raise ConfigError(path, f"environment variable {name} is not set")

    return _ENV_PATTERN.sub(expand, value)


def _parse_date(text, field_name):
    try:
        return date.fromisoformat(str(text))
    except ValueError:
        raise ConfigError(field_name, f"invalid date {text!r}, expected YYYY-MM-DD")


def parse_period(value):
    """'START:END' or {'start': ..., 'end': ...} -> (start, end) with start < end"""
    if isinstance(value, str):
        parts = value.split(':')
        if len(parts) != 2:
            raise ConfigError('period', f"expected START:END, got {value!r}")
        value = {'start': parts[0], 'end': parts[1]}
    if not isinstance(value, dict) or set(value) != {'start', 'end'}:
        raise ConfigError('period', "expected an object with start and end")
    start = _parse_date(value['start'], 'period.start')
    end = _parse_date(value['end'], 'period.end')
    if start >= end:
        raise ConfigError('period', f"start {start.isoformat()} is not before end {end.isoformat()}")
    return start, end


def parse_funds(value):
    if isinstance(value, str):
        value = [v for v in value.split(',')]
    codes = tuple(str(v).strip() for v in value if str(v).strip())
    if len(set(codes)) != len(codes):
        raise ConfigError('funds', "duplicate fund codes")
    return codes


def _section(cls, raw, name, **extra):
    """Build a parameter dataclass from a JSON object, rejecting unknown keys"""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown field")
    values = dict(raw)
    for key, value in values.items():
        if isinstance(value, list):
            values[key] = tuple(value)
    values.update(extra)
    try:
        return cls(**values)
    except ConfigError:
        raise
    except ReitsError as e:
        raise ConfigError(name, str(e))
    except (TypeError, ValueError) as e:
        raise ConfigError(name, str(e))


def _data_paths(raw, base_dir):
    paths = _section(DataPaths, raw, 'data')
    resolved = {}
    for f in fields(DataPaths):
        value = getattr(paths, f.name)
        if value is None:
            if f.name in REQUIRED_PATHS:
                raise ConfigError(f"data.{f.name}", "required path is missing")
            continue
        path = Path(value)
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"data.{f.name}", f"path does not exist: {path}")
        resolved[f.name] = str(path)
    return DataPaths(**resolved)


def _gateway(raw, name, app_config, base=None):
    raw = dict(raw or {})
    known = {f.name for f in fields(GatewayConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown field")
    try:
        if base is not None:
            return replace(base, **raw)
        if app_config is not None:
            return GatewayConfig.from_app_config(app_config, **raw)
        return GatewayConfig(**raw)
    except ConfigError as e:
        raise ConfigError(f"{name}.{e.field.split('.', 1)[-1]}", e.detail)
    except (TypeError, ValueError) as e:
        raise ConfigError(name, str(e))


def build_run_config(document, base_dir='.', app_config=None):
    if not isinstance(document, dict):
        raise ConfigError('config', "top level must be a JSON object")
    document = interpolate(document)
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(document) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    if 'data' not in document:
        raise ConfigError('data', "required section is missing")
    base_dir = Path(base_dir)

    gateway = _gateway(document.get('gateway'), 'gateway', app_config)
    # Strategy B runs on its own gateway settings layered over strategy A's
    gateway_b = _gateway(document.get('gateway_b'), 'gateway_b', app_config, base=gateway)

    output_dir = document.get('output_dir') or (app_config or {}).get('REITS_OUTPUT_DIR', 'out')
    prompt_dir = document.get('prompt_dir') or (app_config or {}).get('REITS_PROMPT_DIR')
    if prompt_dir and not Path(prompt_dir).is_absolute():
        prompt_dir = str(base_dir / prompt_dir)

    scalars = {}
    for name in ('reward_candidates', 'format_retries', 'min_listing_days', 'jobs'):
        if name in document:
            value = document[name]
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ConfigError(name, f"expected a non-negative integer, got {value!r}")
            scalars[name] = value
    if scalars.get('reward_candidates', 1) < 1:
        raise ConfigError('reward_candidates', "must be >= 1")
    if scalars.get('jobs', 1) < 1:
        raise ConfigError('jobs', "must be >= 1")

    config = RunConfig(
        data=_data_paths(document['data'], base_dir),
        funds=parse_funds(document.get('funds', ())),
        period=parse_period(document['period']) if document.get('period') else None,
        thresholds=_section(ThresholdParams, document.get('thresholds'), 'thresholds'),
        validation=_section(ValidationPolicy, document.get('validation'), 'validation'),
        reward=_section(RewardWeights, document.get('reward'), 'reward'),
        risk=_section(RiskConfig, document.get('risk'), 'risk'),
        indicators=_section(IndicatorParams, document.get('indicators'), 'indicators'),
        context=_section(ContextParams, document.get('context'), 'context'),
        macro=_section(MacroParams, document.get('macro'), 'macro'),
        gateway=gateway,
        gateway_b=gateway_b,
        output_dir=str(output_dir),
        prompt_dir=prompt_dir,
        **scalars,
    )
    return config


def load_run_config(path, app_config=None):
    """Read and validate the RunConfig JSON document at path"""
    path = Path(path)
    if not path.exists():
        raise ConfigError('config', f"file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except ValueError as e:
        raise ConfigError('config', f"invalid JSON in {path}: {e}")
    config = build_run_config(document, base_dir=path.parent, app_config=app_config)
    logging.info(f"⚙️ Run config loaded from {path} (gateway mode {config.gateway.mode.value})")
    return config
