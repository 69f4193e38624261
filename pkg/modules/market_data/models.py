"""
Market Data Models
Typed observations for funds, indices, yields and disclosures
"""
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional

from modules.shared.models import Sentiment


class SeriesKind(str, Enum):
    BARS = 'bars'
    INDEX = 'index'
    YIELD = 'yield'
    ACTIVITY = 'activity'


# Declared CSV header per series kind
SERIES_COLUMNS = {
    SeriesKind.BARS: ('date', 'close', 'volume', 'turnover_rate'),
    SeriesKind.INDEX: ('date', 'close'),
    SeriesKind.YIELD: ('date', 'yield_pct'),
    SeriesKind.ACTIVITY: ('date', 'volume', 'turnover_rate'),
}


class NewsImpact(str, Enum):
    HIGH = 'high'
    MEDIUM = 'medium'
    LOW = 'low'


class ReportKind(str, Enum):
    QUARTERLY_REPORT = 'quarterly_report'
    OPERATIONAL_DATA = 'operational_data'


@dataclass(frozen=True, slots=True)
class DailyBar:
    date: date
    close: float
    volume: float
    turnover_rate: float


@dataclass(frozen=True, slots=True)
class IndexBar:
    date: date
    close: float


@dataclass(frozen=True, slots=True)
class YieldPoint:
    date: date
    yield_pct: float


@dataclass(frozen=True, slots=True)
class ActivityBar:
    """Whole-market REITs activity for one day"""
    date: date
    volume: float
    turnover_rate: float


@dataclass(frozen=True, slots=True)
class Announcement:
    fund_code: str
    published: date
    ann_type: str
    summary: str
    sentiment: Sentiment


@dataclass(frozen=True, slots=True)
class NewsItem:
    date: date
    impact: NewsImpact
    summary: str
    sentiment: Sentiment


@dataclass(frozen=True, slots=True)
class OperationalReport:
    fund_code: str
    period_end: date
    kind: ReportKind
    summary: str
    sentiment: Sentiment
    reasoning: str
    # Release date; reports without one are treated as released at period end
    published: Optional[date] = None

    @property
    def available_from(self):
        return self.published or self.period_end


@dataclass(frozen=True, slots=True)
class FundMeta:
    code: str
    listing_date: date


@dataclass(frozen=True)
class MarketSeries:
    """Immutable, date-sorted observation series of one kind"""
    kind: SeriesKind
    name: str
    observations: tuple
    _dates: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, '_dates', tuple(o.date for o in self.observations))

    def __len__(self):
        return len(self.observations)

    def __iter__(self):
        return iter(self.observations)

    def __getitem__(self, item):
        return self.observations[item]

    @property
    def dates(self):
        return self._dates

    def position(self, as_of):
        """Number of observations dated at or before as_of"""
        return bisect_right(self._dates, as_of)

    def upto(self, as_of, n=None):
        end = self.position(as_of)
        start = 0 if n is None else max(0, end - n)
        return self.observations[start:end]


@dataclass(frozen=True)
class WindowResult:
    observations: tuple
    short_history: bool

    def __len__(self):
        return len(self.observations)


@dataclass(frozen=True)
class TradingCalendar:
    dates: tuple

    def __post_init__(self):
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValueError(f"trading calendar not strictly increasing at {cur.isoformat()}")

    def __contains__(self, day):
        i = bisect_right(self.dates, day)
        return i > 0 and self.dates[i - 1] == day

    def sessions_between(self, start, end):
        """Count trading dates strictly between start and end"""
        lo = bisect_right(self.dates, start)
        hi = bisect_right(self.dates, end)
        if hi > 0 and self.dates[hi - 1] == end:
            hi -= 1
        return max(0, hi - lo)

    def within(self, start, end):
        lo = bisect_right(self.dates, start)
        if lo > 0 and self.dates[lo - 1] == start:
            lo -= 1
        hi = bisect_right(self.dates, end)
        return self.dates[lo:hi]
