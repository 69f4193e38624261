"""
Backtest Models
Action signals, risk settings, single-fund accounts and performance metrics
"""
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional

from modules.shared.errors import ConfigError


class ActionSignal(str, Enum):
    CLOSE_POSITION = 'close_position'
    REDUCE_40 = 'reduce_40'
    REDUCE_20 = 'reduce_20'
    HOLD = 'hold'
    INCREASE_20 = 'increase_20'
    INCREASE_40 = 'increase_40'
    INCREASE_TO_LIMIT = 'increase_to_limit'

    @property
    def steps(self):
        """Signed number of fixed-amount steps (None for close / to-limit)"""
        return {
            ActionSignal.REDUCE_40: -2, ActionSignal.REDUCE_20: -1, ActionSignal.HOLD: 0,
            ActionSignal.INCREASE_20: 1, ActionSignal.INCREASE_40: 2,
        }.get(self)

    @property
    def is_increase(self):
        return self in (ActionSignal.INCREASE_20, ActionSignal.INCREASE_40, ActionSignal.INCREASE_TO_LIMIT)


class Strategy(str, Enum):
    AGENT_A = 'agent_a'
    AGENT_B = 'agent_b'
    BUY_AND_HOLD = 'buy_and_hold'


@dataclass(frozen=True)
class RiskConfig:
    initial_capital: float = 1_000_000.0
    fee_rate: float = 0.0003
    lot_size: int = 100
    step_fraction: float = 0.20
    max_position_fraction: float = 1.0
    building_phase_days: int = 10
    building_max_daily_steps: int = 1
    execute_next_day: bool = True
    # Account-level drawdown stop (fraction, e.g. 0.08); off when None
    drawdown_stop: Optional[float] = None
    max_gap_sessions: int = 10

    def __post_init__(self):
        if self.initial_capital <= 0:
            raise ConfigError('risk.initial_capital', "must be positive")
        if self.fee_rate < 0:
            raise ConfigError('risk.fee_rate', "must be >= 0")
        if self.lot_size < 1:
            raise ConfigError('risk.lot_size', "must be >= 1")
        if not 0 < self.step_fraction <= 1:
            raise ConfigError('risk.step_fraction', "must lie in (0, 1]")
        if not 0 < self.max_position_fraction <= 1:
            raise ConfigError('risk.max_position_fraction', "must lie in (0, 1]")
        if self.drawdown_stop is not None and not 0 < self.drawdown_stop < 1:
            raise ConfigError('risk.drawdown_stop', "must lie in (0, 1)")

    @property
    def step_notional(self):
        return self.step_fraction * self.initial_capital


@dataclass(frozen=True)
class Trade:
    date: date
    side: str
    shares: int
    price: float
    fee: float
    cash_after: float
    shares_after: int


@dataclass
class Account:
    fund_code: str
    cash: float
    shares: int = 0
    trades: list = field(default_factory=list)
    nav_series: list = field(default_factory=list)

    def nav(self, price):
        return self.cash + self.shares * price

    def mark(self, day, price):
        value = self.nav(price)
        self.nav_series.append((day, value))
        return value


@dataclass(frozen=True)
class Metrics:
    cr: float
    sharpe: Optional[float]
    mdd: float

    def to_dict(self):
        return {'cr': self.cr, 'sharpe': self.sharpe, 'mdd': self.mdd}

    @classmethod
    def from_dict(cls, data):
        return cls(cr=data['cr'], sharpe=data.get('sharpe'), mdd=data['mdd'])


@dataclass
class BacktestResult:
    strategy: str
    fund_code: str
    account: Account
    metrics: Metrics
    signals: list = field(default_factory=list)
