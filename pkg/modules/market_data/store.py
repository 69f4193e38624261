"""
Market store
Bundles every loaded input and hands out point-in-time views
"""
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from modules.market_data.loader import (
    load_announcements, load_fund_meta, load_news, load_release_calendar, load_reports,
    load_series, load_trading_calendar,
)
from modules.market_data.models import MarketSeries, SeriesKind, TradingCalendar
from modules.shared.errors import CalendarMismatchError, DataError


class AccessAudit:
    """Records the latest observation date each point-in-time view handed out"""

    def __init__(self):
        self._lock = threading.Lock()
        self.latest_served = {}

    def observe(self, as_of, served):
        with self._lock:
            current = self.latest_served.get(as_of)
            if current is None or served > current:
                self.latest_served[as_of] = served

    def violations(self):
        with self._lock:
            return sorted((a, s) for a, s in self.latest_served.items() if s > a)


@dataclass
class MarketStore:
    funds: dict
    fund_meta: dict = field(default_factory=dict)
    reits_index: Optional[MarketSeries] = None
    sse_index: Optional[MarketSeries] = None
    dividend_index: Optional[MarketSeries] = None
    yields: Optional[MarketSeries] = None
    activity: Optional[MarketSeries] = None
    announcements: dict = field(default_factory=dict)
    news: tuple = ()
    reports: dict = field(default_factory=dict)
    release_calendar: dict = field(default_factory=dict)
    calendar: Optional[TradingCalendar] = None
    audit: Optional[AccessAudit] = None

    def __post_init__(self):
        self._memo = {}
        self._memo_lock = threading.Lock()
        all_bar_dates = set()
        for series in self.funds.values():
            all_bar_dates.update(series.dates)
        if self.calendar is None:
            for series in (self.reits_index, self.sse_index, self.dividend_index):
                if series is not None:
                    all_bar_dates.update(series.dates)
            self.calendar = TradingCalendar(dates=tuple(sorted(all_bar_dates)))
        else:
            missing = sorted(d for d in all_bar_dates if d not in self.calendar)
            if missing:
                raise CalendarMismatchError(
                    f"trading calendar lacks {len(missing)} bar dates (first: {missing[0].isoformat()})")

    def fund_series(self, code):
        try:
            return self.funds[code]
        except KeyError:
            raise DataError(f"no price series loaded for fund {code}")

    def as_of(self, day):
        return PointInTimeView(self, day)

    def memo(self, key, factory):
        """Cache a derived value shared across funds (e.g. the market snapshot of a date)"""
        with self._memo_lock:
            if key in self._memo:
                return self._memo[key]
        value = factory()
        with self._memo_lock:
            return self._memo.setdefault(key, value)

    def forget(self, *prefix):
        """Drop cached values whose tuple key starts with prefix"""
        n = len(prefix)
        with self._memo_lock:
            stale = [k for k in self._memo if isinstance(k, tuple) and k[:n] == prefix]
            for key in stale:
                del self._memo[key]
        return len(stale)


class PointInTimeView:
    """Read access restricted to observations dated at or before as_of"""

    def __init__(self, store, as_of):
        self.store = store
        self.as_of = as_of

    def _served(self, items, date_of):
        if items:
            self._observe(max(date_of(i) for i in items))
        return items

    def _observe(self, served):
        if self.store.audit is not None:
            self.store.audit.observe(self.as_of, served)

    def _series(self, series, n):
        if series is None:
            return ()
        items = series.upto(self.as_of, n)
        if items:
            # series are date-sorted
            self._observe(items[-1].date)
        return items

    def fund_bars(self, code, n=None):
        return self._series(self.store.fund_series(code), n)

    def fund_columns(self, code, name, builder):
        """Per-bar columns of a fund cut at as_of

        builder maps the full bar tuple to a dict of arrays aligned with it, row t
        depending on bars[:t + 1] only. Columns are built once per fund and name.
        """
        series = self.store.fund_series(code)
        columns = self.store.memo(('fund_columns', code, name), lambda: builder(series.observations))
        end = series.position(self.as_of)
        if end:
            self._observe(series.dates[end - 1])
        return {key: values[:end] for key, values in columns.items()}

    def index_bars(self, which, n=None):
        series = {'reits': self.store.reits_index,
                  'sse': self.store.sse_index,
                  'dividend': self.store.dividend_index}[which]
        return self._series(series, n)

    def yields(self, n=None):
        return self._series(self.store.yields, n)

    def activity(self, n=None):
        return self._series(self.store.activity, n)

    def announcements(self, code):
        items = tuple(a for a in self.store.announcements.get(code, ()) if a.published <= self.as_of)
        return self._served(items, lambda a: a.published)

    def news(self):
        items = tuple(n for n in self.store.news if n.date <= self.as_of)
        return self._served(items, lambda n: n.date)

    def reports(self, code):
        items = tuple(r for r in self.store.reports.get(code, ()) if r.available_from <= self.as_of)
        return self._served(items, lambda r: r.available_from)

    def release_dates(self, code):
        # The release schedule is published in advance; not market data
        return self.store.release_calendar.get(code, ())


def _group_by_fund(items):
    grouped = {}
    for item in items:
        grouped.setdefault(item.fund_code, []).append(item)
    return {code: tuple(values) for code, values in grouped.items()}


def load_store(data, fund_codes=None, audit=None):
    """Load every configured input into a MarketStore

    Args:
        data: DataPaths section of the run configuration
        fund_codes: restrict loaded fund series (default: every fund in fund_meta)
    """
    fund_meta = {f.code: f for f in load_fund_meta(data.fund_meta)} if data.fund_meta else {}
    codes = list(fund_codes) if fund_codes else sorted(fund_meta)
    funds = {}
    for code in codes:
        funds[code] = load_series(Path(data.funds_dir) / f"{code}.csv", SeriesKind.BARS, name=code)
        meta = fund_meta.get(code)
        if meta is not None and funds[code].dates and funds[code].dates[0] < meta.listing_date:
            raise DataError(f"fund {code} has a bar on {funds[code].dates[0].isoformat()}, "
                            f"before its listing date {meta.listing_date.isoformat()}")

    def optional_series(path, kind, name):
        return load_series(path, kind, name=name) if path else None

    store = MarketStore(
        funds=funds,
        fund_meta=fund_meta,
        reits_index=optional_series(data.reits_index, SeriesKind.INDEX, 'reits_index'),
        sse_index=optional_series(data.sse_index, SeriesKind.INDEX, 'sse_index'),
        dividend_index=optional_series(data.dividend_index, SeriesKind.INDEX, 'dividend_index'),
        yields=optional_series(data.yields, SeriesKind.YIELD, 'yield_10y'),
        activity=optional_series(data.market_activity, SeriesKind.ACTIVITY, 'market_activity'),
        announcements=_group_by_fund(load_announcements(data.announcements)) if data.announcements else {},
        news=tuple(load_news(data.news)) if data.news else (),
        reports=_group_by_fund(load_reports(data.reports)) if data.reports else {},
        release_calendar=load_release_calendar(data.release_calendar) if data.release_calendar else {},
        calendar=load_trading_calendar(data.trading_calendar) if data.trading_calendar else None,
        audit=audit,
    )
    logging.info(f"✅ Market store loaded: {len(funds)} funds, {len(store.calendar.dates)} trading dates")
    return store
