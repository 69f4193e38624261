"""
Shared synthetic data for the test suite
Random-walk funds and indices on a business-day calendar, plus announcements,
news, operational reports and a run configuration written to disk for the
command tests
"""
import json
from datetime import date

import numpy as np
import pandas as pd
import pytest

from modules.market_data.loader import write_series
from modules.market_data.models import (
    ActivityBar, Announcement, DailyBar, FundMeta, IndexBar, MarketSeries, NewsImpact, NewsItem,
    OperationalReport, ReportKind, SeriesKind, YieldPoint,
)
from modules.market_data.store import MarketStore
from modules.shared.models import Sentiment

FUNDS = ('508000', '180101')
HISTORY = 330
START = date(2023, 1, 2)
SENTIMENTS = (Sentiment.POSITIVE, Sentiment.NEUTRAL, Sentiment.NEGATIVE)


def make_dates(n, start=START):
    return [d.date() for d in pd.bdate_range(start, periods=n)]


def random_walk(n, seed=7, sigma=0.006, drift=0.0002, start=4.0):
    rng = np.random.default_rng(seed)
    returns = rng.normal(drift, sigma, n - 1)
    return list(start * np.cumprod(np.concatenate([[1.0], 1.0 + returns])))


def make_bars(closes, dates=None, volumes=None, turnover=0.01):
    dates = dates or make_dates(len(closes))
    volumes = volumes if volumes is not None else [1_000_000.0] * len(closes)
    return [DailyBar(date=d, close=float(c), volume=float(v), turnover_rate=turnover)
            for d, c, v in zip(dates, closes, volumes)]


def series(kind, name, observations):
    return MarketSeries(kind=SeriesKind(kind), name=name, observations=tuple(observations))


def synthetic_inputs(n=HISTORY, funds=FUNDS, seed=11):
    """Every input of a market store, deterministic for a seed"""
    dates = make_dates(n)
    rng = np.random.default_rng(seed)
    fund_series = {}
    for i, code in enumerate(funds):
        closes = random_walk(n, seed=seed + i, sigma=0.007)
        volumes = list(rng.uniform(5e5, 2e6, n))
        fund_series[code] = series('bars', code, make_bars(closes, dates, volumes, turnover=0.008))

    def index(name, s, start):
        return series('index', name, [IndexBar(date=d, close=c)
                                      for d, c in zip(dates, random_walk(n, seed=s, sigma=0.01, start=start))])

    yields = np.cumsum(rng.normal(0.0, 0.01, n)) + 2.6
    announcements = []
    for code in funds:
        for j, t in enumerate(range(15, n, 18)):
            announcements.append(Announcement(
                fund_code=code, published=dates[t], ann_type=('distribution', 'quarterly_report', 'expansion')[j % 3],
                summary=f"{code} announcement {j}", sentiment=SENTIMENTS[j % 3]))
    news = [NewsItem(date=dates[t], impact=(NewsImpact.HIGH, NewsImpact.MEDIUM)[j % 2],
                     summary=f"sector news {j}", sentiment=SENTIMENTS[j % 3])
            for j, t in enumerate(range(5, n, 9))]
    reports = []
    release = {}
    for code in funds:
        release[code] = tuple(dates[t] for t in range(60, n, 63))
        for t in range(40, n, 63):
            reports.append(OperationalReport(
                fund_code=code, period_end=dates[t], kind=ReportKind.OPERATIONAL_DATA,
                summary=f"{code} traffic data", sentiment=Sentiment.POSITIVE,
                reasoning='occupancy stable', published=dates[min(t + 15, n - 1)]))

    return {
        'dates': dates,
        'funds': fund_series,
        'fund_meta': {code: FundMeta(code=code, listing_date=date(2021, 6, 21)) for code in funds},
        'reits_index': index('reits_index', seed + 100, 1000.0),
        'sse_index': index('sse_index', seed + 101, 3100.0),
        'dividend_index': index('dividend_index', seed + 102, 5000.0),
        'yields': series('yield', 'yield_10y', [YieldPoint(date=d, yield_pct=float(y))
                                                for d, y in zip(dates, yields)]),
        'activity': series('activity', 'market_activity', [
            ActivityBar(date=d, volume=float(v), turnover_rate=float(tr))
            for d, v, tr in zip(dates, rng.uniform(1e7, 3e7, n), rng.uniform(0.004, 0.012, n))]),
        'announcements': announcements,
        'news': news,
        'reports': reports,
        'release_calendar': release,
    }


def build_store(n=HISTORY, funds=FUNDS, seed=11, audit=None):
    data = synthetic_inputs(n, funds, seed)

    def by_fund(items):
        grouped = {}
        for item in items:
            grouped.setdefault(item.fund_code, []).append(item)
        return {k: tuple(v) for k, v in grouped.items()}

    return MarketStore(
        funds=data['funds'], fund_meta=data['fund_meta'], reits_index=data['reits_index'],
        sse_index=data['sse_index'], dividend_index=data['dividend_index'], yields=data['yields'],
        activity=data['activity'], announcements=by_fund(data['announcements']), news=tuple(data['news']),
        reports=by_fund(data['reports']), release_calendar=data['release_calendar'], audit=audit)


def _write_jsonl(path, rows):
    path.write_text(''.join(json.dumps(r, sort_keys=True) + '\n' for r in rows), encoding='utf-8')


def write_dataset(root, n=HISTORY, funds=FUNDS, seed=11):
    """Write the synthetic inputs as CSV / JSONL files under root/data"""
    data = synthetic_inputs(n, funds, seed)
    folder = root / 'data'
    (folder / 'funds').mkdir(parents=True, exist_ok=True)
    for code, s in data['funds'].items():
        write_series(s, folder / 'funds' / f"{code}.csv")
    for name in ('reits_index', 'sse_index', 'dividend_index', 'yields'):
        write_series(data[name], folder / f"{name}.csv")
    write_series(data['activity'], folder / 'market_activity.csv')

    (folder / 'fund_meta.csv').write_text(
        'code,listing_date\n' + ''.join(f"{m.code},{m.listing_date.isoformat()}\n"
                                         for m in data['fund_meta'].values()), encoding='utf-8')
    (folder / 'trading_calendar.csv').write_text(
        'date\n' + ''.join(f"{d.isoformat()}\n" for d in data['dates']), encoding='utf-8')
    (folder / 'release_calendar.csv').write_text(
        'fund_code,release_date\n' + ''.join(f"{code},{d.isoformat()}\n"
                                              for code, days in data['release_calendar'].items() for d in days),
        encoding='utf-8')
    _write_jsonl(folder / 'announcements.jsonl', [
        {'fund_code': a.fund_code, 'published': a.published.isoformat(), 'ann_type': a.ann_type,
         'summary': a.summary, 'sentiment': a.sentiment.value} for a in data['announcements']])
    _write_jsonl(folder / 'news.jsonl', [
        {'date': x.date.isoformat(), 'impact': x.impact.value, 'summary': x.summary,
         'sentiment': x.sentiment.value} for x in data['news']])
    _write_jsonl(folder / 'reports.jsonl', [
        {'fund_code': r.fund_code, 'period_end': r.period_end.isoformat(), 'kind': r.kind.value,
         'summary': r.summary, 'sentiment': r.sentiment.value, 'reasoning': r.reasoning,
         'published': r.published.isoformat()} for r in data['reports']])
    return data


def write_config(root, period, **extra):
    document = {
        'data': {
            'fund_meta': 'data/fund_meta.csv',
            'funds_dir': 'data/funds',
            'trading_calendar': 'data/trading_calendar.csv',
            'reits_index': 'data/reits_index.csv',
            'sse_index': 'data/sse_index.csv',
            'dividend_index': 'data/dividend_index.csv',
            'yields': 'data/yields.csv',
            'market_activity': 'data/market_activity.csv',
            'announcements': 'data/announcements.jsonl',
            'news': 'data/news.jsonl',
            'reports': 'data/reports.jsonl',
            'release_calendar': 'data/release_calendar.csv',
        },
        'period': {'start': period[0].isoformat(), 'end': period[1].isoformat()},
        'output_dir': str(root / 'out'),
        'gateway': {'mode': 'stub'},
    }
    document.update(extra)
    path = root / 'config.json'
    path.write_text(json.dumps(document, indent=2), encoding='utf-8')
    return path


@pytest.fixture(scope='session')
def store():
    return build_store()


@pytest.fixture
def dataset(tmp_path):
    """Synthetic dataset on disk with a config whose period covers the last 25 sessions"""
    data = write_dataset(tmp_path)
    period = (data['dates'][-25], data['dates'][-1])
    return {'root': tmp_path, 'dates': data['dates'], 'period': period,
            'config': write_config(tmp_path, period)}


@pytest.fixture
def cli_runner():
    from app import app

    return app.test_cli_runner()
