"""
Market data tests
Loading, validation, windowed access, eligibility and the point-in-time view
"""
from datetime import date

import numpy as np
import pytest

from conftest import START, build_store, make_bars, series, write_dataset
from modules.market_data.access import daily_returns, eligible_funds, window
from modules.market_data.loader import load_announcements, load_series, load_trading_calendar, write_series
from modules.market_data.models import FundMeta, SeriesKind, TradingCalendar
from modules.market_data.store import AccessAudit, MarketStore, load_store
from modules.shared.errors import (
    CalendarMismatchError, DataError, DuplicateDateError, EmptyWindowError, RowValidationError,
)
from run_config import DataPaths


def write_csv(path, text):
    path.write_text(text, encoding='utf-8')
    return path


def test_load_series_sorts_rows(tmp_path):
    """Rows arrive in any order and come back sorted by date"""
    path = write_csv(tmp_path / 'f.csv', 'date,close,volume,turnover_rate\n'
                                         '2024-01-04,10.2,100,0.01\n'
                                         '2024-01-02,10.0,100,0.01\n'
                                         '2024-01-03,10.1,100,0.01\n')
    loaded = load_series(path, SeriesKind.BARS)
    assert len(loaded) == 3
    assert [b.date.day for b in loaded] == [2, 3, 4]
    assert loaded.name == 'f'


def test_load_series_rejects_duplicate_date(tmp_path):
    path = write_csv(tmp_path / 'f.csv', 'date,close,volume,turnover_rate\n'
                                         '2024-01-02,10.0,100,0.01\n'
                                         '2024-01-02,10.1,100,0.01\n')
    with pytest.raises(DuplicateDateError) as excinfo:
        load_series(path, SeriesKind.BARS)
    assert excinfo.value.date == date(2024, 1, 2)
    assert '2024-01-02' in str(excinfo.value)


def test_load_series_rejects_zero_close_with_line_number(tmp_path):
    path = write_csv(tmp_path / 'f.csv', 'date,close,volume,turnover_rate\n'
                                         '2024-01-02,10.0,100,0.01\n'
                                         '2024-01-03,0,100,0.01\n')
    with pytest.raises(RowValidationError) as excinfo:
        load_series(path, SeriesKind.BARS)
    assert excinfo.value.line == 3


@pytest.mark.parametrize('row, message', [
    ('2024-13-01,10.0', 'invalid ISO date'),
    ('2024-01-02,abc', 'not a number'),
    ('2024-01-02,nan', 'non-finite'),
])
def test_load_series_reports_malformed_rows(tmp_path, row, message):
    path = write_csv(tmp_path / 'i.csv', f"date,close\n{row}\n")
    with pytest.raises(RowValidationError, match=message):
        load_series(path, SeriesKind.INDEX)


def test_load_series_missing_columns_and_file(tmp_path):
    path = write_csv(tmp_path / 'y.csv', 'date,close\n2024-01-02,2.5\n')
    with pytest.raises(RowValidationError, match='missing columns'):
        load_series(path, SeriesKind.YIELD)
    with pytest.raises(DataError):
        load_series(tmp_path / 'absent.csv', SeriesKind.BARS)


def test_write_series_reload_is_exact(tmp_path):
    original = series('bars', 'x', make_bars([4.0, 4.0123456789012345, 3.99, 4.1]))
    write_series(original, tmp_path / 'x.csv')
    reloaded = load_series(tmp_path / 'x.csv', SeriesKind.BARS, name='x')
    assert reloaded == original


def test_window_returns_last_n():
    s = series('bars', 'x', make_bars([10.0 + i for i in range(10)]))
    result = window(s, s.dates[-1], 5)
    assert [b.close for b in result.observations] == [15.0, 16.0, 17.0, 18.0, 19.0]
    assert not result.short_history


def test_window_short_history_flag():
    s = series('bars', 'x', make_bars([10.0 + i for i in range(10)]))
    result = window(s, s.dates[-1], 20)
    assert len(result) == 10
    assert result.short_history


def test_window_before_first_bar_is_empty():
    s = series('bars', 'x', make_bars([10.0, 11.0]))
    with pytest.raises(EmptyWindowError):
        window(s, date(2000, 1, 1), 5)


def test_window_never_looks_ahead():
    s = series('bars', 'x', make_bars([10.0 + i for i in range(40)]))
    for as_of in s.dates:
        assert all(b.date <= as_of for b in window(s, as_of, 7).observations)


@pytest.mark.parametrize('closes, expected', [
    ([10.0, 10.1], [0.01]),
    ([5.0, 5.0, 5.0], [0.0, 0.0]),
    ([10.0, 9.5, 10.45], [-0.05, 0.1]),
])
def test_daily_returns(closes, expected):
    returns = daily_returns(make_bars(closes))
    assert list(returns) == pytest.approx(expected, abs=1e-12)
    assert returns.index[0] == make_bars(closes)[1].date


def test_daily_returns_needs_two_bars():
    with pytest.raises(DataError):
        daily_returns(make_bars([10.0]))


def test_eligible_funds_natural_days():
    funds = [FundMeta('A', date(2023, 9, 1)), FundMeta('B', date(2024, 5, 1))]
    assert [f.code for f in eligible_funds(funds, date(2024, 10, 1))] == ['A']


def test_eligible_funds_monotone_in_as_of():
    funds = [FundMeta(str(i), date(2023, 1, 1 + i)) for i in range(20)]
    previous = set()
    for offset in range(340, 400):
        day = date(2023, 1, 1).toordinal() + offset
        current = {f.code for f in eligible_funds(funds, date.fromordinal(day))}
        assert previous <= current
        previous = current


def test_trading_calendar_sessions_between():
    cal = TradingCalendar(dates=tuple(date(2024, 1, d) for d in (2, 3, 4, 5, 8, 9)))
    assert cal.sessions_between(date(2024, 1, 2), date(2024, 1, 9)) == 4
    assert cal.sessions_between(date(2024, 1, 5), date(2024, 1, 8)) == 0
    assert list(cal.within(date(2024, 1, 4), date(2024, 1, 8))) == [date(2024, 1, 4), date(2024, 1, 5),
                                                                      date(2024, 1, 8)]


def test_trading_calendar_loader(tmp_path):
    path = write_csv(tmp_path / 'cal.csv', 'date\n2024-01-03\n2024-01-02\n2024-01-03\n')
    assert load_trading_calendar(path).dates == (date(2024, 1, 2), date(2024, 1, 3))


def test_calendar_must_cover_bar_dates():
    bars = series('bars', 'x', make_bars([1.0, 2.0, 3.0]))
    calendar = TradingCalendar(dates=bars.dates[:2])
    with pytest.raises(CalendarMismatchError):
        MarketStore(funds={'x': bars}, calendar=calendar)


def test_announcement_sentiment_validated(tmp_path):
    path = write_csv(tmp_path / 'a.jsonl',
                     '{"fund_code": "508000", "published": "2024-01-02", "ann_type": "distribution", '
                     '"summary": "s", "sentiment": "bullish"}\n')
    with pytest.raises(RowValidationError, match='sentiment'):
        load_announcements(path)


def test_point_in_time_view_hides_the_future():
    audit = AccessAudit()
    store = build_store(n=80, audit=audit)
    day = store.calendar.dates[50]
    view = store.as_of(day)
    assert view.fund_bars('508000')[-1].date == day
    assert all(a.published <= day for a in view.announcements('508000'))
    assert all(n.date <= day for n in view.news())
    assert all(r.available_from <= day for r in view.reports('508000'))
    assert view.index_bars('sse', n=5)[-1].date == day
    assert audit.violations() == []


def test_store_memo_computes_once():
    store = build_store(n=30)
    calls = []
    for _ in range(3):
        store.memo(('k', 1), lambda: calls.append(1) or 'value')
    assert len(calls) == 1


def test_store_forget_drops_only_matching_keys():
    store = build_store(n=30)
    store.memo(('payload', '508000', 1), lambda: 'a')
    store.memo(('payload', '180101', 1), lambda: 'b')
    store.memo('plain', lambda: 'c')
    assert store.forget('payload', '508000') == 1
    assert store.memo(('payload', '180101', 1), lambda: 'other') == 'b'
    assert store.memo(('payload', '508000', 1), lambda: 'rebuilt') == 'rebuilt'


def test_fund_columns_are_cut_at_as_of():
    audit = AccessAudit()
    store = build_store(n=80, audit=audit)
    day = store.calendar.dates[49]
    builds = []

    def closes(bars):
        builds.append(len(bars))
        return {'close': np.asarray([b.close for b in bars])}

    early = store.as_of(day).fund_columns('508000', 'close', closes)
    late = store.as_of(store.calendar.dates[-1]).fund_columns('508000', 'close', closes)
    assert builds == [80]
    assert len(early['close']) == 50 and len(late['close']) == 80
    assert early['close'][-1] == store.fund_series('508000')[49].close
    assert audit.violations() == []


def listed_dataset(tmp_path, listing):
    write_dataset(tmp_path, n=30)
    (tmp_path / 'data' / 'fund_meta.csv').write_text(
        f"code,listing_date\n508000,{listing}\n180101,2021-06-21\n", encoding='utf-8')
    data = tmp_path / 'data'
    return DataPaths(fund_meta=str(data / 'fund_meta.csv'), funds_dir=str(data / 'funds'),
                     trading_calendar=str(data / 'trading_calendar.csv'))


def test_load_store_accepts_bars_from_the_listing_date(tmp_path):
    store = load_store(listed_dataset(tmp_path, START.isoformat()))
    assert store.fund_series('508000').dates[0] == START


def test_load_store_rejects_bars_before_listing(tmp_path):
    with pytest.raises(DataError, match='listing date 2023-01-03'):
        load_store(listed_dataset(tmp_path, '2023-01-03'))
