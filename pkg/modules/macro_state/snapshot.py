"""
Market snapshot construction
Index, yield and activity indicators plus the interpretation tags for the market agent
"""
import logging

import numpy as np
import pandas as pd

from modules.indicators.engine import macd, price_volume_label, volume_ratio, wilder_rsi
from modules.macro_state.classifier import classify_equity_state, classify_rate_trend, quadrant
from modules.macro_state.models import MacroParams, MarketSnapshot, Quadrant
from modules.shared.errors import InsufficientHistoryError, UndefinedRatioError


def _closes(bars):
    return pd.Series([b.close for b in bars], index=[b.date for b in bars], dtype=float)


def _pct_change(values, k):
    return float((values.iloc[-1] / values.iloc[-1 - k] - 1.0) * 100.0)


def _rank_pct(values):
    """Percentile rank of the latest value within the series (1.0 at the maximum)"""
    return float(values.rank(pct=True).iloc[-1])


def _require(name, bars, needed):
    if len(bars) < needed:
        raise InsufficientHistoryError(
            f"market snapshot needs {needed} bars of {name}, got {len(bars)}", missing=[name])


def _macd_state(closes):
    dif, dea, _ = macd(closes)
    if dif[-2] <= dea[-2] and dif[-1] > dea[-1]:
        return 'golden'
    if dif[-2] >= dea[-2] and dif[-1] < dea[-1]:
        return 'death'
    return 'dif_above_dea' if dif[-1] > dea[-1] else 'dif_below_dea'


def _rate_reits_corr(yields, reits, window):
    """Correlation of daily yield changes (bp) with daily REITs returns (%) over common dates"""
    frame = pd.concat({'rate_bp': yields.diff() * 100.0, 'reits_pct': reits.pct_change() * 100.0},
                      axis=1, join='inner').dropna().tail(window)
    if len(frame) < 2:
        return None
    corr = frame['rate_bp'].corr(frame['reits_pct'])
    return None if pd.isna(corr) else float(corr)


def _labels(params, raw):
    labels = []

    def quantile_label(value, subject):
        if value >= params.quantile_high:
            labels.append(f"{subject} relatively high")
        elif value <= params.quantile_low:
            labels.append(f"{subject} relatively low")

    quantile_label(raw['rate_quantile_1y'], 'interest rate')
    quantile_label(raw['reits_price_quantile_1y'], 'REITs price')
    quantile_label(raw['vol_quantile_1y'], 'volatility')
    if raw['up_day_ratio_20d'] >= params.momentum_strong:
        labels.append('momentum relatively strong')
    elif raw['up_day_ratio_20d'] <= params.momentum_weak:
        labels.append('momentum relatively weak')
    if raw['turnover_sluggish']:
        labels.append('turnover rate sluggish')
    if raw['rel_strength_reits_vs_div_20d'] > 0:
        labels.append('REITs outperforming dividend stocks')
    elif raw['rel_strength_reits_vs_div_20d'] < 0:
        labels.append('REITs underperforming dividend stocks')
    return tuple(labels)


def build_market_snapshot(reits_index, sse, dividend, yields, activity, as_of, params=None):
    """Snapshot of the REITs market, equities and rates from data dated at or before as_of

    activity may be empty, leaving the turnover fields unset.
    """
    params = params or MacroParams()

    def upto(items):
        return [o for o in items if o.date <= as_of][-params.lookback:]

    reits_bars, sse_bars, div_bars = upto(reits_index), upto(sse), upto(dividend)
    yield_points, activity_bars = upto(yields), upto(activity or ())
    for name, bars in (('reits_index', reits_bars), ('sse_index', sse_bars),
                       ('dividend_index', div_bars), ('yields', yield_points)):
        _require(name, bars, params.lookback)

    reits = _closes(reits_bars)
    reits_returns = reits.pct_change().dropna()
    rolling_vol = reits_returns.rolling(20).std().dropna()
    rates = pd.Series([p.yield_pct for p in yield_points], index=[p.date for p in yield_points], dtype=float)
    sse_closes = _closes(sse_bars)
    div_closes = _closes(div_bars)

    reits_chg_20d = _pct_change(reits, 20)
    div_chg_20d = _pct_change(div_closes, 20)
    sse_chg_20d = _pct_change(sse_closes, 20)
    sse_rsi = wilder_rsi(sse_closes.to_numpy(), params.rsi_window)

    market_turnover = market_volume = None
    turnover_sluggish = False
    ratio = None
    if activity_bars:
        market_turnover = activity_bars[-1].turnover_rate
        market_volume = activity_bars[-1].volume
        turnovers = np.asarray([a.turnover_rate for a in activity_bars], dtype=float)
        turnover_sluggish = bool(market_turnover < np.quantile(turnovers, params.turnover_sluggish_q))
        try:
            ratio = volume_ratio(activity_bars)
        except (UndefinedRatioError, InsufficientHistoryError):
            ratio = None

    raw = {
        'reits_price_quantile_1y': _rank_pct(reits),
        'reits_chg_5d': _pct_change(reits, 5),
        'reits_chg_20d': reits_chg_20d,
        'reits_chg_60d': _pct_change(reits, 60),
        'reits_rsi': wilder_rsi(reits.to_numpy(), params.rsi_window),
        'reits_macd_state': _macd_state(reits.to_numpy()),
        'vol_quantile_1y': _rank_pct(rolling_vol),
        'up_day_ratio_20d': float((reits_returns.tail(20) > 0).mean()),
        'rate_level_pct': float(rates.iloc[-1]),
        'rate_quantile_1y': _rank_pct(rates),
        'rate_bp_chg_20d': float((rates.iloc[-1] - rates.iloc[-21]) * 100.0),
        'rate_ma_dev_pct': float((rates.iloc[-1] / rates.tail(20).mean() - 1.0) * 100.0),
        'rate_reits_corr_60d': _rate_reits_corr(rates, reits, params.corr_window),
        'sse_chg_20d': sse_chg_20d,
        'sse_rsi': sse_rsi,
        'div_chg_20d': div_chg_20d,
        'div_rsi': wilder_rsi(div_closes.to_numpy(), params.rsi_window),
        'rel_strength_reits_vs_div_20d': reits_chg_20d - div_chg_20d,
        'market_turnover': market_turnover,
        'market_volume': market_volume,
        'pv_label': price_volume_label(float(reits_returns.iloc[-1]), ratio).value,
        'turnover_sluggish': turnover_sluggish,
    }

    rate_trend = classify_rate_trend(raw['rate_bp_chg_20d'])
    equity_state = classify_equity_state(sse_chg_20d, sse_rsi)
    macro = quadrant(rate_trend, equity_state)
    labels = _labels(params, raw)
    if macro.value is Quadrant.Q3:
        labels += ('allocation window',)
    del raw['turnover_sluggish']

    logging.debug(f"Market snapshot {as_of.isoformat()}: {macro.value.value} ({rate_trend.value}, {equity_state.value})")
    return MarketSnapshot(as_of=as_of, rate_trend=rate_trend, equity_state=equity_state,
                          quadrant=macro.value, rationale=macro.rationale,
                          interpretation_labels=labels, **raw)


def market_snapshot(view, params=None):
    """Snapshot for a point-in-time view, cached per date on the store"""
    params = params or MacroParams()
    n = params.lookback
    return view.store.memo(
        ('market_snapshot', view.as_of, params),
        lambda: build_market_snapshot(view.index_bars('reits', n), view.index_bars('sse', n),
                                      view.index_bars('dividend', n), view.yields(n), view.activity(n),
                                      view.as_of, params))
