"""
Threshold Labeler Models
Dynamic volatility threshold, horizon thresholds and labeled samples
"""
import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional

from modules.shared.errors import ConfigError
from modules.shared.models import Direction


class ClampState(str, Enum):
    FLOOR = 'floor'
    CEILING = 'ceiling'
    NONE = 'none'


@dataclass(frozen=True)
class ThresholdParams:
    n_v: int = 30
    n_short: int = 10
    n_long: int = 60
    n_b: int = 120
    q_lo_pct: float = 0.30
    q_hi_pct: float = 0.70
    tau_high: float = 1.4
    tau_low: float = 0.7
    m0: float = 0.45
    a_high: float = 1.2
    a_low: float = 0.8

    def __post_init__(self):
        for name in ('n_v', 'n_short', 'n_long', 'n_b'):
            if getattr(self, name) < 2:
                raise ConfigError(f"thresholds.{name}", "window must be at least 2")
        if not 0 < self.q_lo_pct < self.q_hi_pct < 1:
            raise ConfigError('thresholds.q_lo_pct', "need 0 < q_lo_pct < q_hi_pct < 1")
        if not self.tau_low < 1 < self.tau_high:
            raise ConfigError('thresholds.tau_low', "need tau_low < 1 < tau_high")
        for name in ('m0', 'a_high', 'a_low'):
            if getattr(self, name) <= 0:
                raise ConfigError(f"thresholds.{name}", "must be positive")

    @property
    def min_returns(self):
        """Returns needed before a threshold can be computed"""
        return max(self.n_v, self.n_short, self.n_long, self.n_b)


@dataclass(frozen=True)
class ThresholdValue:
    theta: float
    sigma: float
    sigma_short: float
    sigma_long: float
    multiplier: float
    q_lo: float
    q_hi: float
    clamped: ClampState
    ratio_undefined: bool = False
    as_of: Optional[date] = None

    def to_dict(self):
        return {
            'as_of': self.as_of.isoformat() if self.as_of else None,
            'theta': self.theta,
            'sigma': self.sigma,
            'sigma_short': self.sigma_short,
            'sigma_long': self.sigma_long,
            'multiplier': self.multiplier,
            'q_lo': self.q_lo,
            'q_hi': self.q_hi,
            'clamped': self.clamped.value,
            'ratio_undefined': self.ratio_undefined,
        }


@dataclass(frozen=True)
class HorizonThresholds:
    eps1: float
    eps5: float
    eps20: float

    @classmethod
    def from_theta(cls, theta):
        return cls(eps1=theta, eps5=math.sqrt(5) * theta, eps20=math.sqrt(20) * theta)

    def for_horizon(self, k):
        return {1: self.eps1, 5: self.eps5, 20: self.eps20}[k]


@dataclass(frozen=True)
class LabeledSample:
    fund_code: str
    date: date
    theta: float
    eps1: float
    eps5: float
    eps20: float
    r_fwd_1: Optional[float] = None
    r_fwd_5: Optional[float] = None
    r_fwd_20: Optional[float] = None
    label_1: Optional[Direction] = None
    label_5: Optional[Direction] = None
    label_20: Optional[Direction] = None
    # Horizons without enough forward bars to be labeled
    missing_horizons: tuple = field(default=())

    def label(self, k):
        return getattr(self, f"label_{k}")

    @property
    def complete(self):
        return not self.missing_horizons

    def to_dict(self):
        return {
            'fund_code': self.fund_code,
            'date': self.date.isoformat(),
            'theta': self.theta,
            'eps1': self.eps1,
            'eps5': self.eps5,
            'eps20': self.eps20,
            'r_fwd_1': self.r_fwd_1,
            'r_fwd_5': self.r_fwd_5,
            'r_fwd_20': self.r_fwd_20,
            'label_1': self.label_1.value if self.label_1 else None,
            'label_5': self.label_5.value if self.label_5 else None,
            'label_20': self.label_20.value if self.label_20 else None,
            'missing_horizons': list(self.missing_horizons),
        }

    @classmethod
    def from_dict(cls, data):
        def label(value):
            return Direction(value) if value else None

        return cls(
            fund_code=data['fund_code'],
            date=date.fromisoformat(data['date']),
            theta=data['theta'],
            eps1=data['eps1'],
            eps5=data['eps5'],
            eps20=data['eps20'],
            r_fwd_1=data.get('r_fwd_1'),
            r_fwd_5=data.get('r_fwd_5'),
            r_fwd_20=data.get('r_fwd_20'),
            label_1=label(data.get('label_1')),
            label_5=label(data.get('label_5')),
            label_20=label(data.get('label_20')),
            missing_horizons=tuple(data.get('missing_horizons', ())),
        )
