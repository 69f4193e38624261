"""
Agent context tests
"""
from dataclasses import replace
from datetime import date, timedelta
from pathlib import Path

import pytest

from conftest import build_store, make_bars
from llm_integration import GatewayMode, canonical_json
from modules.agent_context.builders import (
    announcement_impact_stats, build_announcement_context, build_event_context, build_market_context,
    build_momentum_context, quarterly_warning, recency_weight, recent_trend_summary,
)
from modules.agent_context.models import AGENT_ORDER, AgentKind, QuarterlyWarning
from modules.agent_context.runner import AgentRunner
from modules.indicators.engine import compute_snapshot
from modules.indicators.models import BollPosition, IndicatorSnapshot, MacdCross, MaAlignment, PvLabel, RsiState
from modules.macro_state.models import EquityState, MarketSnapshot, Quadrant, RateTrend
from modules.macro_state.snapshot import market_snapshot
from modules.market_data.models import Announcement, NewsImpact, NewsItem, OperationalReport, ReportKind
from modules.market_data.store import AccessAudit
from modules.shared.errors import DataError, InsufficientHistoryError
from modules.shared.models import Sentiment
from modules.threshold_labeler.models import ClampState, ThresholdParams, ThresholdValue
from modules.threshold_labeler.thresholds import theta_series

AS_OF = date(2024, 6, 14)
GOLDEN = Path(__file__).parent / 'fixtures' / 'golden'


def announcement(published, ann_type='distribution', sentiment=Sentiment.POSITIVE, code='508000'):
    return Announcement(fund_code=code, published=published, ann_type=ann_type,
                        summary=f"{ann_type} on {published.isoformat()}", sentiment=sentiment)


def report(period_end, kind=ReportKind.OPERATIONAL_DATA, published=None, code='508000'):
    return OperationalReport(fund_code=code, period_end=period_end, kind=kind, summary=kind.value,
                             sentiment=Sentiment.NEUTRAL, reasoning='stable', published=published)


def test_announcement_window_is_half_open():
    items = [announcement(AS_OF - timedelta(days=8)), announcement(AS_OF - timedelta(days=7)),
             announcement(AS_OF - timedelta(days=1), 'expansion'), announcement(AS_OF),
             announcement(AS_OF - timedelta(days=2), code='180101')]
    ctx = build_announcement_context('508000', items, {}, {}, AS_OF)
    published = [a['published'] for a in ctx.payload['announcements']]
    assert published == [(AS_OF - timedelta(days=7)).isoformat(), (AS_OF - timedelta(days=1)).isoformat()]
    assert not ctx.payload['no_recent_disclosures']
    assert ctx.agent is AgentKind.ANNOUNCEMENT


def test_announcement_context_flags_empty_window():
    ctx = build_announcement_context('508000', [], {}, {'chg_5d_pct': 0.0}, AS_OF)
    assert ctx.payload['no_recent_disclosures']
    assert ctx.payload['announcements'] == [] and ctx.payload['impact_stats'] == {}


def rising_bars(n=200):
    return make_bars([4.0 + 0.01 * i for i in range(n)])


def test_impact_stats_on_a_rising_series():
    bars = rising_bars()
    dates = [b.date for b in bars]
    closes = [b.close for b in bars]
    history = [announcement(dates[130]), announcement(dates[150]),
               announcement(dates[160], 'expansion'), announcement(dates[199])]
    stats = announcement_impact_stats(history, bars, 'distribution', dates[199])
    positive = stats[Sentiment.POSITIVE]
    assert positive.n == 2
    assert positive.p_up_1 == 1.0 and positive.p_up_20 == 1.0
    expected = (closes[131] / closes[130] - 1 + closes[151] / closes[150] - 1) / 2
    assert positive.avg_chg_1 == pytest.approx(expected, abs=1e-12)
    assert 0.0 <= positive.sig_freq_20 <= 1.0
    assert stats[Sentiment.NEGATIVE].n == 0
    assert set(stats[Sentiment.NEGATIVE].to_dict()) == {'ann_type', 'sentiment_group', 'n'}


def test_impact_stats_ignore_bars_after_as_of():
    bars = rising_bars()
    dates = [b.date for b in bars]
    history = [announcement(dates[125]), announcement(dates[140], sentiment=Sentiment.NEGATIVE)]
    as_of = dates[150]
    full = announcement_impact_stats(history, bars, 'distribution', as_of)
    cut = announcement_impact_stats(history, bars[:151], 'distribution', as_of)
    assert full == cut
    # 140 + 20 lies past as_of
    assert full[Sentiment.NEGATIVE].p_up_20 is None
    assert full[Sentiment.NEGATIVE].p_up_5 == 1.0


def test_recent_trend_summary():
    bars = rising_bars(40)
    closes = [b.close for b in bars]
    trend = recent_trend_summary(bars, 0.004)
    assert trend['chg_5d_pct'] == pytest.approx((closes[-1] / closes[-6] - 1) * 100)
    assert trend['state_20d'] == 'up'
    assert recent_trend_summary(make_bars([4.0] * 30), 0.0)['state_5d'] == 'side'
    with pytest.raises(InsufficientHistoryError):
        recent_trend_summary(bars[:20], 0.004)


@pytest.mark.parametrize('offset, active', [(0, True), (10, True), (11, False)])
def test_quarterly_warning_window(offset, active):
    warning = quarterly_warning(AS_OF, [AS_OF + timedelta(days=offset), AS_OF + timedelta(days=100)])
    assert warning.active is active
    assert warning.days_until == offset


def test_quarterly_warning_after_last_release_and_empty_calendar():
    assert quarterly_warning(AS_OF, [AS_OF - timedelta(days=3)]) == QuarterlyWarning(False, None, None)
    with pytest.raises(DataError):
        quarterly_warning(AS_OF, [])


def test_event_context_news_filter_and_weights():
    news = [NewsItem(AS_OF, NewsImpact.HIGH, 'today', Sentiment.NEGATIVE),
            NewsItem(AS_OF - timedelta(days=3), NewsImpact.HIGH, 'three days', Sentiment.POSITIVE),
            NewsItem(AS_OF - timedelta(days=1), NewsImpact.MEDIUM, 'medium', Sentiment.POSITIVE),
            NewsItem(AS_OF - timedelta(days=15), NewsImpact.HIGH, 'stale', Sentiment.POSITIVE),
            NewsItem(AS_OF + timedelta(days=1), NewsImpact.HIGH, 'future', Sentiment.POSITIVE)]
    ctx = build_event_context('508000', news, [], None, AS_OF)
    assert [n['summary'] for n in ctx.payload['news']] == ['today', 'three days']
    assert [n['weight'] for n in ctx.payload['news']] == [1.0, 0.25]
    assert ctx.payload['no_quarterly_report'] and ctx.payload['quarterly_warning'] is None
    assert recency_weight(1) == 0.5


def test_event_context_reports():
    reports = [
        report(date(2023, 12, 31), ReportKind.QUARTERLY_REPORT, published=date(2024, 3, 20)),
        report(date(2023, 11, 30)),
        report(date(2024, 4, 30), published=date(2024, 5, 15)),
        report(date(2024, 3, 31), ReportKind.QUARTERLY_REPORT, published=date(2024, 7, 20)),
        report(date(2024, 5, 31), published=date(2024, 6, 20)),
        report(date(2024, 5, 15), code='180101'),
    ]
    warning = quarterly_warning(AS_OF, [date(2024, 6, 20)])
    ctx = build_event_context('508000', [], reports, warning, AS_OF)
    assert ctx.payload['latest_quarterly_report']['period_end'] == '2023-12-31'
    assert [r['period_end'] for r in ctx.payload['operational_reports']] == ['2024-04-30']
    assert ctx.payload['quarterly_warning'] == {'active': True, 'next_release': '2024-06-20', 'days_until': 6}
    assert ctx.payload['no_high_impact_news']


def test_momentum_context_groups_and_threshold_history(store):
    bars = list(store.fund_series('508000').observations)
    params = ThresholdParams()
    snapshot = compute_snapshot(bars, bars[-1].date, '508000')
    thetas = theta_series(bars, params, last=5)
    ctx = build_momentum_context(snapshot, thetas, [True, False, False, True, False])
    payload = ctx.payload
    assert set(payload) == {'trend', 'momentum', 'bollinger', 'price_volume', 'volatility', 'levels', 'threshold'}
    assert payload['threshold']['theta'] == thetas[-1].theta
    assert payload['threshold']['theta_history'] == [t.theta for t in thetas]
    assert payload['threshold']['breaches_recent'] == 2
    assert payload['trend']['close'] == bars[-1].close
    assert ctx.as_of == bars[-1].date


def test_momentum_context_rejects_misdated_threshold(store):
    bars = list(store.fund_series('508000').observations)
    snapshot = compute_snapshot(bars, bars[-1].date, '508000')
    stale = theta_series(bars[:-1], ThresholdParams(), last=2)
    with pytest.raises(DataError):
        build_momentum_context(snapshot, stale, [False, False])
    with pytest.raises(DataError):
        build_momentum_context(snapshot, [], [])


def test_market_context_tags(store):
    snapshot = market_snapshot(store.as_of(store.calendar.dates[-1]))
    q3 = build_market_context(replace(snapshot, quadrant=Quadrant.Q3), '508000')
    assert q3.payload['summary']['tags'] == ['allocation window']
    transition = build_market_context(replace(snapshot, quadrant=Quadrant.TRANSITION))
    assert transition.payload['summary']['tags'] == ['transition zone']
    assert q3.payload['raw'] == snapshot.to_layers()['raw']


def test_runner_reports_in_fixed_order_without_lookahead():
    audit = AccessAudit()
    store = build_store(audit=audit)
    day = store.calendar.dates[-20]
    reports = AgentRunner().run(store.as_of(day), '508000')
    assert tuple(r.agent for r in reports) == AGENT_ORDER
    assert all(r.as_of == day and r.narrative is None for r in reports)
    assert audit.violations() == []


class EchoGateway:
    mode = GatewayMode.REPLAY

    def __init__(self):
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        return f"narrative for {request.tag}"


class Prompts:
    def render(self, name, **context):
        return f"system prompt {name}"


def test_runner_narrates_outside_stub_mode(store):
    gateway = EchoGateway()
    day = store.calendar.dates[-1]
    reports = AgentRunner(gateway=gateway, prompts=Prompts()).run(store.as_of(day), '180101')
    assert [r.narrative for r in reports] == [
        f"narrative for {kind.value}|180101|{day.isoformat()}" for kind in AGENT_ORDER]
    assert sorted(r.system for r in gateway.requests) == sorted(f"system prompt {k.value}" for k in AGENT_ORDER)


def test_report_to_dict(store):
    reports = AgentRunner().run(store.as_of(store.calendar.dates[-1]), '508000')
    document = reports[-1].to_dict()
    assert document['agent'] == 'market'
    assert document['schema_version'] == '1.0'
    assert document['narrative'] is None


def golden_bytes(name):
    return (GOLDEN / name).read_bytes()


def encoded(payload):
    return (canonical_json(payload) + '\n').encode('utf-8')


def fixed_snapshot():
    return IndicatorSnapshot(
        fund_code='508000', date=AS_OF, close=4.12, ma5=4.1, ma10=4.08, ma20=4.05, ma60=3.98,
        ma5_deviation_pct=0.4878, ma10_deviation_pct=0.9804, ma20_deviation_pct=1.7284,
        ma60_deviation_pct=3.5176, ma_alignment=MaAlignment.BULLISH,
        chg_1d=0.49, chg_5d=1.23, chg_20d=2.75, chg_60d=4.56,
        rsi6=64.5, rsi12=58.25, rsi24=55.125,
        rsi6_state=RsiState.NORMAL, rsi12_state=RsiState.NORMAL, rsi24_state=RsiState.NORMAL,
        macd_dif=0.0215, macd_dea=0.0183, macd_hist=0.0032, macd_cross=MacdCross.NONE, momentum_10d=1.98,
        boll_mid=4.05, boll_upper=4.16, boll_lower=3.94, boll_position=BollPosition.BIASED_UP,
        vol20=0.0065, atr_simplified=0.0051,
        vol_ma5=1250000.0, vol_ma10=1180000.0, vol_ma20=1100000.0, volume_ratio=1.35,
        pv_label=PvLabel.PRICE_UP_VOL_UP, support=4.08, resistance=4.16,
        consec_streak=3, up_days_20=12, down_days_20=7, avg_amp_20=0.52, max_amp_20=1.43,
        last5_chg=(0.12, -0.24, 0.37, 0.25, 0.49),
    )


def fixed_theta(theta, as_of=None):
    return ThresholdValue(theta=theta, sigma=theta, sigma_short=theta, sigma_long=theta, multiplier=1.0,
                          q_lo=0.0, q_hi=1.0, clamped=ClampState.NONE, as_of=as_of)


def test_momentum_context_matches_golden_bytes():
    history = [fixed_theta(t) for t in (0.0048, 0.0046, 0.0045, 0.0047)] + [fixed_theta(0.0042, AS_OF)]
    ctx = build_momentum_context(fixed_snapshot(), history, [False, False, False, False, True])
    assert encoded(ctx.payload) == golden_bytes('momentum_context.json')


def test_market_context_matches_golden_bytes():
    snapshot = MarketSnapshot(
        as_of=AS_OF, reits_price_quantile_1y=0.35, reits_chg_5d=0.8, reits_chg_20d=1.6, reits_chg_60d=-2.1,
        reits_rsi=56.5, reits_macd_state='golden', vol_quantile_1y=0.45, up_day_ratio_20d=0.55,
        rate_level_pct=2.28, rate_quantile_1y=0.15, rate_bp_chg_20d=-12.5, rate_ma_dev_pct=-1.25,
        rate_reits_corr_60d=-0.42, sse_chg_20d=-3.4, sse_rsi=43.5, div_chg_20d=-0.9, div_rsi=44.0,
        rel_strength_reits_vs_div_20d=2.5, market_turnover=0.0075, market_volume=21000000.0,
        pv_label='price_up_vol_up', rate_trend=RateTrend.SLOWLY_DOWN, equity_state=EquityState.OSC_WEAK,
        quadrant=Quadrant.Q3, rationale='rates down, equities weak: best allocation window for REITs',
        interpretation_labels=('interest rate relatively low', 'REITs outperforming dividend stocks',
                               'allocation window'),
    )
    ctx = build_market_context(snapshot, '508000')
    assert encoded(ctx.payload) == golden_bytes('market_context.json')
