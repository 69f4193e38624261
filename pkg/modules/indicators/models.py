"""
Indicator Models
The price-momentum agent's technical battery for one fund-date
"""
from dataclasses import asdict, dataclass
from datetime import date
from enum import Enum
from typing import Optional


class MaAlignment(str, Enum):
    BULLISH = 'bullish'
    BEARISH = 'bearish'
    CHAOTIC = 'chaotic'


class RsiState(str, Enum):
    OVERBOUGHT = 'overbought'
    OVERSOLD = 'oversold'
    NORMAL = 'normal'


class MacdCross(str, Enum):
    GOLDEN = 'golden'
    DEATH = 'death'
    NONE = 'none'


class BollPosition(str, Enum):
    BREAK_UPPER = 'break_upper'
    BREAK_LOWER = 'break_lower'
    BIASED_UP = 'biased_up'
    BIASED_DOWN = 'biased_down'
    MIDDLE = 'middle'


class PvLabel(str, Enum):
    PRICE_UP_VOL_UP = 'price_up_vol_up'
    PRICE_UP_VOL_DOWN = 'price_up_vol_down'
    PRICE_DOWN_VOL_UP = 'price_down_vol_up'
    PRICE_DOWN_VOL_DOWN = 'price_down_vol_down'
    FLAT = 'flat'


@dataclass(frozen=True)
class IndicatorParams:
    rsi_overbought: float = 70.0
    rsi_oversold: float = 30.0
    boll_window: int = 20
    boll_k: float = 2.0
    boll_biased_up: float = 0.8
    boll_biased_down: float = 0.2
    atr_window: int = 14
    cluster_tolerance: float = 0.005


# Bars needed by each indicator (closes, counting today)
REQUIRED_BARS = {
    'ma5': 5, 'ma10': 10, 'ma20': 20, 'ma60': 60,
    'chg_1d': 2, 'chg_5d': 6, 'chg_20d': 21, 'chg_60d': 61,
    'rsi6': 7, 'rsi12': 13, 'rsi24': 25,
    'macd': 2, 'momentum_10d': 11,
    'bollinger': 20, 'vol20': 21, 'atr_simplified': 15,
    'volume_ratio': 6, 'vol_ma20': 20,
    'support_resistance': 60, 'up_down_days_20': 21, 'last5_chg': 6,
}

MIN_SNAPSHOT_BARS = max(REQUIRED_BARS.values())


@dataclass(frozen=True)
class IndicatorSnapshot:
    fund_code: str
    date: date
    close: float
    ma5: float
    ma10: float
    ma20: float
    ma60: float
    ma5_deviation_pct: float
    ma10_deviation_pct: float
    ma20_deviation_pct: float
    ma60_deviation_pct: float
    ma_alignment: MaAlignment
    chg_1d: float
    chg_5d: float
    chg_20d: float
    chg_60d: float
    rsi6: float
    rsi12: float
    rsi24: float
    rsi6_state: RsiState
    rsi12_state: RsiState
    rsi24_state: RsiState
    macd_dif: float
    macd_dea: float
    macd_hist: float
    macd_cross: MacdCross
    momentum_10d: float
    boll_mid: float
    boll_upper: float
    boll_lower: float
    boll_position: BollPosition
    vol20: float
    atr_simplified: float
    vol_ma5: float
    vol_ma10: float
    vol_ma20: float
    volume_ratio: Optional[float]
    pv_label: PvLabel
    support: float
    resistance: float
    consec_streak: int
    up_days_20: int
    down_days_20: int
    avg_amp_20: float
    max_amp_20: float
    last5_chg: tuple

    def to_dict(self):
        """Flat JSON-ready mapping with the snapshot's field names"""
        data = asdict(self)
        data['date'] = self.date.isoformat()
        data['last5_chg'] = list(self.last5_chg)
        for key, value in data.items():
            if isinstance(value, Enum):
                data[key] = value.value
        return data
