"""
Macro State Models
Rate trend, equity state, four-quadrant result and the market snapshot
"""
from dataclasses import asdict, dataclass, field
from datetime import date
from enum import Enum
from typing import Optional


class RateTrend(str, Enum):
    CLEARLY_DOWN = 'clearly_down'
    SLOWLY_DOWN = 'slowly_down'
    SIDEWAYS = 'sideways'
    SLOWLY_UP = 'slowly_up'
    CLEARLY_UP = 'clearly_up'


class EquityState(str, Enum):
    BULL = 'bull'
    OSC_STRONG = 'osc_strong'
    OSCILLATION = 'oscillation'
    OSC_WEAK = 'osc_weak'
    BEAR = 'bear'
    INDETERMINATE = 'indeterminate'


class Quadrant(str, Enum):
    Q1 = 'Q1'
    Q2 = 'Q2'
    Q3 = 'Q3'
    Q4 = 'Q4'
    TRANSITION = 'transition'


RATE_DOWN = frozenset({RateTrend.CLEARLY_DOWN, RateTrend.SLOWLY_DOWN})
RATE_UP = frozenset({RateTrend.SLOWLY_UP, RateTrend.CLEARLY_UP})
EQUITY_UP = frozenset({EquityState.BULL, EquityState.OSC_STRONG})


@dataclass(frozen=True)
class MacroQuadrant:
    value: Quadrant
    rationale: str
    rate: RateTrend
    equity: EquityState


@dataclass(frozen=True)
class MacroParams:
    lookback: int = 250
    rsi_window: int = 14
    corr_window: int = 60
    quantile_high: float = 0.8
    quantile_low: float = 0.2
    momentum_strong: float = 0.6
    momentum_weak: float = 0.4
    turnover_sluggish_q: float = 0.3


@dataclass(frozen=True)
class MarketSnapshot:
    as_of: date
    reits_price_quantile_1y: float
    reits_chg_5d: float
    reits_chg_20d: float
    reits_chg_60d: float
    reits_rsi: float
    reits_macd_state: str
    vol_quantile_1y: float
    up_day_ratio_20d: float
    rate_level_pct: float
    rate_quantile_1y: float
    rate_bp_chg_20d: float
    rate_ma_dev_pct: float
    rate_reits_corr_60d: Optional[float]
    sse_chg_20d: float
    sse_rsi: float
    div_chg_20d: float
    div_rsi: float
    rel_strength_reits_vs_div_20d: float
    market_turnover: Optional[float]
    market_volume: Optional[float]
    pv_label: str
    rate_trend: RateTrend
    equity_state: EquityState
    quadrant: Quadrant
    rationale: str
    interpretation_labels: tuple = field(default=())

    RAW_FIELDS = (
        'reits_price_quantile_1y', 'reits_chg_5d', 'reits_chg_20d', 'reits_chg_60d', 'reits_rsi',
        'reits_macd_state', 'vol_quantile_1y', 'up_day_ratio_20d', 'rate_level_pct',
        'rate_quantile_1y', 'rate_bp_chg_20d', 'rate_ma_dev_pct', 'rate_reits_corr_60d',
        'sse_chg_20d', 'sse_rsi', 'div_chg_20d', 'div_rsi', 'rel_strength_reits_vs_div_20d',
        'market_turnover', 'market_volume', 'pv_label',
    )

    def to_layers(self):
        """Three-layer document: state summary, interpretation tags, raw indicators"""
        data = asdict(self)
        return {
            'as_of': self.as_of.isoformat(),
            'state': {
                'rate_trend': self.rate_trend.value,
                'rate_bp_chg_20d': self.rate_bp_chg_20d,
                'equity_state': self.equity_state.value,
                'equity_chg_20d': self.sse_chg_20d,
                'equity_rsi': self.sse_rsi,
                'quadrant': self.quadrant.value,
                'rationale': self.rationale,
            },
            'interpretation': list(self.interpretation_labels),
            'raw': {name: data[name] for name in self.RAW_FIELDS},
        }
