"""
Agent payload builders
Momentum, announcement, event and market payloads for one fund-date
"""
from bisect import bisect_right
from datetime import timedelta

import numpy as np

from modules.agent_context.models import (
    AgentKind, AgentReport, AnnouncementImpactStats, ContextParams, QuarterlyWarning,
)
from modules.market_data.models import NewsImpact, ReportKind
from modules.macro_state.models import Quadrant
from modules.shared.errors import DataError, InsufficientHistoryError
from modules.shared.models import HORIZONS, Sentiment
from modules.threshold_labeler.models import ThresholdParams
from modules.threshold_labeler.thresholds import classify, compute_theta, horizon_thresholds


def build_momentum_context(snapshot, theta_history, breach_flags):
    """Momentum agent payload grouped as trend, momentum, bollinger, price-volume,
    volatility, levels and threshold breaches"""
    if not theta_history:
        raise DataError(f"{snapshot.fund_code}: momentum context needs threshold history")
    latest = theta_history[-1]
    if latest.as_of is not None and latest.as_of != snapshot.date:
        raise DataError(f"{snapshot.fund_code}: threshold dated {latest.as_of.isoformat()} "
                        f"does not match snapshot {snapshot.date.isoformat()}")

    s = snapshot.to_dict()
    eps = horizon_thresholds(latest.theta) if latest.theta > 0 else None
    payload = {
        'trend': {k: s[k] for k in (
            'close', 'ma5', 'ma10', 'ma20', 'ma60', 'ma5_deviation_pct', 'ma10_deviation_pct',
            'ma20_deviation_pct', 'ma60_deviation_pct', 'ma_alignment',
            'chg_1d', 'chg_5d', 'chg_20d', 'chg_60d')},
        'momentum': {k: s[k] for k in (
            'rsi6', 'rsi12', 'rsi24', 'rsi6_state', 'rsi12_state', 'rsi24_state',
            'macd_dif', 'macd_dea', 'macd_hist', 'macd_cross', 'momentum_10d')},
        'bollinger': {k: s[k] for k in ('boll_mid', 'boll_upper', 'boll_lower', 'boll_position')},
        'price_volume': {k: s[k] for k in ('vol_ma5', 'vol_ma10', 'vol_ma20', 'volume_ratio', 'pv_label')},
        'volatility': {k: s[k] for k in (
            'vol20', 'atr_simplified', 'avg_amp_20', 'max_amp_20', 'consec_streak',
            'up_days_20', 'down_days_20', 'last5_chg')},
        'levels': {'support': s['support'], 'resistance': s['resistance']},
        'threshold': {
            'theta': latest.theta,
            'eps1': eps.eps1 if eps else 0.0,
            'eps5': eps.eps5 if eps else 0.0,
            'eps20': eps.eps20 if eps else 0.0,
            'clamped': latest.clamped.value,
            'theta_history': [v.theta for v in theta_history],
            'breach_flags': list(breach_flags),
            'breaches_recent': int(sum(breach_flags)),
        },
    }
    return AgentReport(agent=AgentKind.MOMENTUM, fund_code=snapshot.fund_code,
                       as_of=snapshot.date, payload=payload)


def announcement_impact_table(history, bars, ann_types, as_of, params=None, theta_at=None):
    """announcement_impact_stats for several announcement types over one pass of the prices

    theta_at(t), when given, returns the threshold at bars[t] (None when it is not
    computable) in place of recomputing it from the returns r[:t].
    """
    params = params or ThresholdParams()
    bars = [b for b in bars if b.date <= as_of]
    dates = [b.date for b in bars]
    closes = np.asarray([b.close for b in bars], dtype=float)
    returns = closes[1:] / closes[:-1] - 1.0

    if theta_at is None:
        def theta_at(t):
            try:
                return compute_theta(params, returns[:t]).theta
            except InsufficientHistoryError:
                return None

    return {ann_type: _impact_stats(history, dates, closes, ann_type, as_of, theta_at)
            for ann_type in ann_types}


def announcement_impact_stats(history, bars, ann_type, as_of, params=None, theta_at=None):
    """Post-announcement price behaviour of one announcement type, per sentiment group

    Only announcements published strictly before as_of count, and only forward
    bars dated at or before as_of are used.
    """
    return announcement_impact_table(history, bars, (ann_type,), as_of, params, theta_at)[ann_type]


def _impact_stats(history, dates, closes, ann_type, as_of, theta_at):
    samples = {s: {k: [] for k in HORIZONS} for s in Sentiment}
    significant = {s: {k: [] for k in HORIZONS} for s in Sentiment}
    counts = {s: 0 for s in Sentiment}
    for ann in history:
        if ann.ann_type != ann_type or ann.published >= as_of:
            continue
        counts[ann.sentiment] += 1
        base = bisect_right(dates, ann.published) - 1
        if base < 0:
            continue
        theta = theta_at(base)
        for k in HORIZONS:
            if base + k >= len(dates):
                continue
            cum = float(closes[base + k] / closes[base] - 1.0)
            samples[ann.sentiment][k].append(cum)
            if theta is not None and theta > 0:
                significant[ann.sentiment][k].append(abs(cum) > horizon_thresholds(theta).for_horizon(k))

    stats = {}
    for sentiment in Sentiment:
        fields = {}
        for k in HORIZONS:
            values = samples[sentiment][k]
            if values:
                fields[f"p_up_{k}"] = float(np.mean([v > 0 for v in values]))
                fields[f"avg_chg_{k}"] = float(np.mean(values))
            if significant[sentiment][k]:
                fields[f"sig_freq_{k}"] = float(np.mean(significant[sentiment][k]))
        stats[sentiment] = AnnouncementImpactStats(ann_type=ann_type, sentiment_group=sentiment,
                                                   n=counts[sentiment], **fields)
    return stats


def recent_trend_summary(bars, theta):
    """5 and 20 day price trend with the sideways state under the horizon thresholds"""
    closes = [b.close for b in bars]
    if len(closes) < 21:
        raise InsufficientHistoryError("trend summary needs 21 bars", missing=['recent_trend'])
    eps5 = horizon_thresholds(theta).eps5 if theta > 0 else 0.0
    eps20 = horizon_thresholds(theta).eps20 if theta > 0 else 0.0
    chg5 = closes[-1] / closes[-6] - 1.0
    chg20 = closes[-1] / closes[-21] - 1.0
    return {
        'chg_5d_pct': chg5 * 100.0,
        'chg_20d_pct': chg20 * 100.0,
        'state_5d': classify(chg5, eps5).value,
        'state_20d': classify(chg20, eps20).value,
        'eps5': eps5,
        'eps20': eps20,
    }


def build_announcement_context(fund_code, announcements, impact_stats, recent_trend, as_of, params=None):
    """Announcements published in [as_of - window, as_of) with historical impact stats"""
    params = params or ContextParams()
    start = as_of - timedelta(days=params.announcement_window_days)
    recent = sorted((a for a in announcements if a.fund_code == fund_code and start <= a.published < as_of),
                    key=lambda a: (a.published, a.ann_type))
    payload = {
        'window': {'start': start.isoformat(), 'end_exclusive': as_of.isoformat()},
        'no_recent_disclosures': not recent,
        'announcements': [
            {'published': a.published.isoformat(), 'ann_type': a.ann_type,
             'sentiment': a.sentiment.value, 'summary': a.summary}
            for a in recent
        ],
        'impact_stats': {
            ann_type: {s.value: stats.to_dict() for s, stats in impact_stats[ann_type].items()}
            for ann_type in sorted({a.ann_type for a in recent})
            if ann_type in params.key_announcement_types and ann_type in impact_stats
        },
        'recent_trend': recent_trend,
    }
    return AgentReport(agent=AgentKind.ANNOUNCEMENT, fund_code=fund_code, as_of=as_of, payload=payload)


def quarterly_warning(as_of, release_calendar, window_days=10):
    """Warning active when the next quarterly report release is within window_days"""
    if not release_calendar:
        raise DataError("quarterly release calendar is empty")
    upcoming = sorted(d for d in release_calendar if d >= as_of)
    if not upcoming:
        return QuarterlyWarning(active=False, next_release=None, days_until=None)
    days_until = (upcoming[0] - as_of).days
    return QuarterlyWarning(active=days_until <= window_days, next_release=upcoming[0], days_until=days_until)


def recency_weight(age_days):
    return 1.0 / (1.0 + age_days)


def build_event_context(fund_code, news, reports, warning, as_of, window_days=14):
    """High-impact news with recency weights, latest quarterly report and later operating data"""
    recent_news = []
    for item in news:
        age = (as_of - item.date).days
        if item.impact is NewsImpact.HIGH and 0 <= age <= window_days:
            recent_news.append({'date': item.date.isoformat(), 'age_days': age,
                                'weight': recency_weight(age), 'sentiment': item.sentiment.value,
                                'summary': item.summary})
    recent_news.sort(key=lambda n: (n['age_days'], n['summary']))

    available = [r for r in reports if r.fund_code == fund_code and r.available_from <= as_of]
    quarterly = [r for r in available if r.kind is ReportKind.QUARTERLY_REPORT]
    latest = max(quarterly, key=lambda r: r.period_end) if quarterly else None
    operational = sorted(
        (r for r in available if r.kind is ReportKind.OPERATIONAL_DATA
         and (latest is None or r.period_end > latest.period_end)),
        key=lambda r: r.period_end)

    def report_dict(r):
        return {'period_end': r.period_end.isoformat(), 'kind': r.kind.value,
                'sentiment': r.sentiment.value, 'summary': r.summary, 'reasoning': r.reasoning}

    payload = {
        'news': recent_news,
        'no_high_impact_news': not recent_news,
        'latest_quarterly_report': report_dict(latest) if latest else None,
        'no_quarterly_report': latest is None,
        'operational_reports': [report_dict(r) for r in operational],
        'quarterly_warning': warning.to_dict() if warning else None,
    }
    return AgentReport(agent=AgentKind.EVENT, fund_code=fund_code, as_of=as_of, payload=payload)


def build_market_context(snapshot, fund_code=''):
    """Three-layer market payload with the quadrant stated in the summary"""
    layers = snapshot.to_layers()
    tags = []
    if snapshot.quadrant is Quadrant.TRANSITION:
        tags.append('transition zone')
    if snapshot.quadrant is Quadrant.Q3:
        tags.append('allocation window')
    summary = dict(layers['state'])
    summary['tags'] = tags
    payload = {
        'summary': summary,
        'interpretation': layers['interpretation'],
        'raw': layers['raw'],
    }
    return AgentReport(agent=AgentKind.MARKET, fund_code=fund_code, as_of=snapshot.as_of, payload=payload)
