"""
Indicator engine
Trend, momentum, volatility, volume and structural levels from daily closes
"""
import logging

import numpy as np
import pandas as pd

from modules.indicators.models import (
    BollPosition, IndicatorParams, IndicatorSnapshot, MIN_SNAPSHOT_BARS, MacdCross,
    MaAlignment, PvLabel, REQUIRED_BARS, RsiState,
)
from modules.shared.errors import DataError, InsufficientHistoryError, UndefinedRatioError

MA_WINDOWS = (5, 10, 20, 60)
RSI_WINDOWS = (6, 12, 24)
LEVEL_WINDOWS = (5, 10, 20, 60)


def ema(values, span):
    return pd.Series(values, dtype=float).ewm(span=span, adjust=False).mean().to_numpy()


def wilder_rsi(closes, window):
    """RSI with Wilder smoothing; 50 when the window holds no movement at all"""
    delta = np.diff(np.asarray(closes, dtype=float))
    gains = pd.Series(np.where(delta > 0, delta, 0.0))
    losses = pd.Series(np.where(delta < 0, -delta, 0.0))
    avg_gain = gains.ewm(alpha=1.0 / window, adjust=False).mean().iloc[-1]
    avg_loss = losses.ewm(alpha=1.0 / window, adjust=False).mean().iloc[-1]
    if avg_gain + avg_loss == 0:
        return 50.0
    return float(100.0 * avg_gain / (avg_gain + avg_loss))


def macd(closes, fast=12, slow=26, signal=9):
    """Return (dif, dea, hist) arrays; hist = dif - dea"""
    dif = ema(closes, fast) - ema(closes, slow)
    dea = ema(dif, signal)
    return dif, dea, dif - dea


def indicator_columns(bars):
    """Close, volume, RSI and MACD columns over a whole bar sequence

    Every column is causal: row t equals the value computed from bars[:t + 1],
    so a point-in-time prefix matches the indicators of the truncated series.
    """
    closes = np.asarray([b.close for b in bars], dtype=float)
    columns = {'close': closes, 'volume': np.asarray([b.volume for b in bars], dtype=float)}
    delta = np.diff(closes)
    gains = pd.Series(np.where(delta > 0, delta, 0.0))
    losses = pd.Series(np.where(delta < 0, -delta, 0.0))
    for n in RSI_WINDOWS:
        avg_gain = gains.ewm(alpha=1.0 / n, adjust=False).mean().to_numpy()
        avg_loss = losses.ewm(alpha=1.0 / n, adjust=False).mean().to_numpy()
        total = avg_gain + avg_loss
        with np.errstate(divide='ignore', invalid='ignore'):
            rsi = np.where(total == 0, 50.0, 100.0 * avg_gain / total)
        # the first bar has no move yet
        columns[f"rsi{n}"] = np.concatenate(([np.nan], rsi))
    dif, dea, _ = macd(closes)
    columns['macd_dif'] = dif
    columns['macd_dea'] = dea
    return columns


def bollinger(closes, window=20, k=2.0):
    """(mid, upper, lower) over the last `window` closes, sample std"""
    recent = np.asarray(closes[-window:], dtype=float)
    mid = float(np.mean(recent))
    sigma = float(np.std(recent, ddof=1))
    return mid, mid + k * sigma, mid - k * sigma


def volume_ratio(bars):
    """Today's volume over the mean volume of the 5 prior bars"""
    bars = list(bars)
    if len(bars) < 6:
        raise InsufficientHistoryError("volume ratio needs 6 bars", missing=['volume_ratio'])
    prior = np.mean([b.volume for b in bars[-6:-1]])
    if prior == 0:
        raise UndefinedRatioError(f"zero mean prior volume at {bars[-1].date.isoformat()}")
    return float(bars[-1].volume / prior)


def _rsi_state(value, params):
    if value >= params.rsi_overbought:
        return RsiState.OVERBOUGHT
    if value <= params.rsi_oversold:
        return RsiState.OVERSOLD
    return RsiState.NORMAL


def _alignment(mas):
    ma5, ma10, ma20, ma60 = mas
    if ma5 > ma10 > ma20 > ma60:
        return MaAlignment.BULLISH
    if ma5 < ma10 < ma20 < ma60:
        return MaAlignment.BEARISH
    return MaAlignment.CHAOTIC


def _cross(dif, dea):
    if dif[-2] <= dea[-2] and dif[-1] > dea[-1]:
        return MacdCross.GOLDEN
    if dif[-2] >= dea[-2] and dif[-1] < dea[-1]:
        return MacdCross.DEATH
    return MacdCross.NONE


def _boll_position(close, upper, lower, params):
    width = upper - lower
    if width <= 0:
        return BollPosition.MIDDLE
    pct_b = (close - lower) / width
    if pct_b > 1:
        return BollPosition.BREAK_UPPER
    if pct_b < 0:
        return BollPosition.BREAK_LOWER
    if pct_b >= params.boll_biased_up:
        return BollPosition.BIASED_UP
    if pct_b <= params.boll_biased_down:
        return BollPosition.BIASED_DOWN
    return BollPosition.MIDDLE


def price_volume_label(last_return, ratio):
    if last_return == 0 or ratio is None or ratio == 1:
        return PvLabel.FLAT
    if last_return > 0:
        return PvLabel.PRICE_UP_VOL_UP if ratio > 1 else PvLabel.PRICE_UP_VOL_DOWN
    return PvLabel.PRICE_DOWN_VOL_UP if ratio > 1 else PvLabel.PRICE_DOWN_VOL_DOWN


def _streak(returns):
    streak = 0
    for r in reversed(returns):
        if r > 0 and streak >= 0:
            streak += 1
        elif r < 0 and streak <= 0:
            streak -= 1
        else:
            break
    return streak


def _pct_change(closes, k):
    return float((closes[-1] / closes[-1 - k] - 1.0) * 100.0)


def _nearest_cluster(levels, tolerance):
    """Mean of the chain of levels within tolerance of each other, starting at the nearest"""
    cluster = [levels[0]]
    for level in levels[1:]:
        if abs(level - cluster[-1]) <= tolerance * min(level, cluster[-1]):
            cluster.append(level)
        else:
            break
    return float(np.mean(cluster))


def support_resistance(bars, mas, boll, close, tolerance=0.005):
    """Nearest structural levels below and above the close

    Candidates are rolling lows/highs over 5/10/20/60 closes, the moving
    averages and both Bollinger bands, restricted to the 60-bar range.
    Falls back to the 60-bar low (high) when nothing lies below (above).
    """
    closes = np.asarray([b.close for b in bars], dtype=float)
    if len(closes) < 60:
        raise InsufficientHistoryError("support/resistance needs 60 bars", missing=['support_resistance'])
    low60 = float(closes[-60:].min())
    high60 = float(closes[-60:].max())

    candidates = set()
    for n in LEVEL_WINDOWS:
        candidates.add(float(closes[-n:].min()))
        candidates.add(float(closes[-n:].max()))
    candidates.update(float(m) for m in mas)
    candidates.update(float(b) for b in boll)
    candidates = {c for c in candidates if low60 <= c <= high60 and c != close}

    below = sorted((c for c in candidates if c < close), reverse=True)
    above = sorted(c for c in candidates if c > close)
    support = _nearest_cluster(below, tolerance) if below else low60
    resistance = _nearest_cluster(above, tolerance) if above else high60
    return support, resistance


def missing_indicators(bar_count):
    return [name for name, need in REQUIRED_BARS.items() if bar_count < need]


def compute_snapshot(bars, as_of, fund_code='', params=None, columns=None):
    """Full technical battery for one fund-date from bars dated at or before as_of

    columns, when given, are indicator_columns of the same bars and stand in for
    recomputing the smoothed indicators over the whole history.
    """
    params = params or IndicatorParams()
    bars = [b for b in bars if b.date <= as_of]
    if len(bars) < MIN_SNAPSHOT_BARS:
        raise InsufficientHistoryError(
            f"{fund_code or 'series'} has {len(bars)} bars at {as_of.isoformat()}, "
            f"need {MIN_SNAPSHOT_BARS}",
            missing=missing_indicators(len(bars)))

    if columns is None:
        closes = np.asarray([b.close for b in bars], dtype=float)
        volumes = np.asarray([b.volume for b in bars], dtype=float)
        rsis = [wilder_rsi(closes, n) for n in RSI_WINDOWS]
        dif, dea, hist = macd(closes)
    else:
        if len(columns['close']) != len(bars):
            raise DataError(f"{fund_code or 'series'}: {len(columns['close'])} indicator rows "
                            f"for {len(bars)} bars at {as_of.isoformat()}")
        closes, volumes = columns['close'], columns['volume']
        rsis = [float(columns[f"rsi{n}"][-1]) for n in RSI_WINDOWS]
        dif, dea = columns['macd_dif'], columns['macd_dea']
        hist = dif[-1:] - dea[-1:]
    returns = closes[1:] / closes[:-1] - 1.0
    close = float(closes[-1])

    mas = [float(np.mean(closes[-n:])) for n in MA_WINDOWS]
    mid, upper, lower = bollinger(closes, params.boll_window, params.boll_k)

    try:
        ratio = volume_ratio(bars)
    except UndefinedRatioError:
        logging.debug(f"Volume ratio undefined for {fund_code} at {as_of.isoformat()}")
        ratio = None

    support, resistance = support_resistance(bars, mas, (upper, lower), close, params.cluster_tolerance)
    last20 = returns[-20:]
    amplitudes = np.abs(last20) * 100.0

    return IndicatorSnapshot(
        fund_code=fund_code,
        date=bars[-1].date,
        close=close,
        ma5=mas[0], ma10=mas[1], ma20=mas[2], ma60=mas[3],
        ma5_deviation_pct=(close - mas[0]) / mas[0] * 100.0,
        ma10_deviation_pct=(close - mas[1]) / mas[1] * 100.0,
        ma20_deviation_pct=(close - mas[2]) / mas[2] * 100.0,
        ma60_deviation_pct=(close - mas[3]) / mas[3] * 100.0,
        ma_alignment=_alignment(mas),
        chg_1d=_pct_change(closes, 1),
        chg_5d=_pct_change(closes, 5),
        chg_20d=_pct_change(closes, 20),
        chg_60d=_pct_change(closes, 60),
        rsi6=rsis[0], rsi12=rsis[1], rsi24=rsis[2],
        rsi6_state=_rsi_state(rsis[0], params),
        rsi12_state=_rsi_state(rsis[1], params),
        rsi24_state=_rsi_state(rsis[2], params),
        macd_dif=float(dif[-1]),
        macd_dea=float(dea[-1]),
        macd_hist=float(hist[-1]),
        macd_cross=_cross(dif, dea),
        momentum_10d=_pct_change(closes, 10),
        boll_mid=mid, boll_upper=upper, boll_lower=lower,
        boll_position=_boll_position(close, upper, lower, params),
        vol20=float(np.std(last20, ddof=1)),
        atr_simplified=float(np.mean(np.abs(returns[-params.atr_window:]))),
        vol_ma5=float(np.mean(volumes[-5:])),
        vol_ma10=float(np.mean(volumes[-10:])),
        vol_ma20=float(np.mean(volumes[-20:])),
        volume_ratio=ratio,
        pv_label=price_volume_label(float(returns[-1]), ratio),
        support=support,
        resistance=resistance,
        consec_streak=_streak(returns),
        up_days_20=int(np.sum(last20 > 0)),
        down_days_20=int(np.sum(last20 < 0)),
        avg_amp_20=float(np.mean(amplitudes)),
        max_amp_20=float(np.max(amplitudes)),
        last5_chg=tuple(float(r * 100.0) for r in returns[-5:]),
    )
