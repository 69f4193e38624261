"""
Market data ingestion
CSV series with declared header schemas, JSON-lines disclosures
"""
import csv
import json
import logging
import math
from datetime import date
from pathlib import Path

from modules.market_data.models import (
    ActivityBar, Announcement, DailyBar, FundMeta, IndexBar, MarketSeries, NewsImpact,
    NewsItem, OperationalReport, ReportKind, SERIES_COLUMNS, SeriesKind, TradingCalendar,
    YieldPoint,
)
from modules.shared.errors import DataError, DuplicateDateError, RowValidationError
from modules.shared.models import Sentiment


def _parse_date(text, path, line):
    try:
        return date.fromisoformat(text.strip())
    except (AttributeError, ValueError):
        raise RowValidationError(path, line, f"invalid ISO date {text!r}")


def _parse_float(text, column, path, line):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise RowValidationError(path, line, f"column {column}: not a number ({text!r})")
    if not math.isfinite(value):
        raise RowValidationError(path, line, f"column {column}: non-finite value")
    return value


def _build_observation(kind, row, path, line):
    day = _parse_date(row['date'], path, line)
    if kind is SeriesKind.YIELD:
        return YieldPoint(date=day, yield_pct=_parse_float(row['yield_pct'], 'yield_pct', path, line))

    if kind in (SeriesKind.BARS, SeriesKind.INDEX):
        close = _parse_float(row['close'], 'close', path, line)
        if close <= 0:
            raise RowValidationError(path, line, f"non-positive price {close}")
        if kind is SeriesKind.INDEX:
            return IndexBar(date=day, close=close)

    volume = _parse_float(row['volume'], 'volume', path, line)
    turnover = _parse_float(row['turnover_rate'], 'turnover_rate', path, line)
    if volume < 0:
        raise RowValidationError(path, line, f"negative volume {volume}")
    if turnover < 0:
        raise RowValidationError(path, line, f"negative turnover rate {turnover}")
    if kind is SeriesKind.ACTIVITY:
        return ActivityBar(date=day, volume=volume, turnover_rate=turnover)
    return DailyBar(date=day, close=close, volume=volume, turnover_rate=turnover)


def load_series(path, kind, name=None):
    """Load and validate one CSV series; result is sorted by date"""
    path = Path(path)
    kind = SeriesKind(kind)
    if not path.exists():
        raise DataError(f"series file not found: {path}")

    expected = SERIES_COLUMNS[kind]
    observations = []
    with path.open(newline='', encoding='utf-8') as handle:
        reader = csv.DictReader(handle)
        header = tuple(reader.fieldnames or ())
        missing = [c for c in expected if c not in header]
        if missing:
            raise RowValidationError(path, 1, f"missing columns {missing} for {kind.value} series")
        for row in reader:
            if None in row or any(row.get(c) is None for c in expected):
                raise RowValidationError(path, reader.line_num, "wrong number of fields")
            observations.append(_build_observation(kind, row, path, reader.line_num))

    observations.sort(key=lambda o: o.date)
    for prev, cur in zip(observations, observations[1:]):
        if prev.date == cur.date:
            raise DuplicateDateError(path, cur.date)

    logging.debug(f"Loaded {len(observations)} {kind.value} rows from {path}")
    return MarketSeries(kind=kind, name=name or path.stem, observations=tuple(observations))


def write_series(series, path):
    """Write a series back to CSV; floats use repr so a reload is exact"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = SERIES_COLUMNS[series.kind]
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(columns)
        for obs in series:
            row = [obs.date.isoformat()]
            row.extend(repr(float(getattr(obs, c))) for c in columns[1:])
            writer.writerow(row)


def _read_jsonl(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"JSON-lines file not found: {path}")
    with path.open(encoding='utf-8') as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise RowValidationError(path, line_no, f"invalid JSON: {e.msg}")
            if not isinstance(record, dict):
                raise RowValidationError(path, line_no, "record is not a JSON object")
            yield line_no, record


def _field(record, name, path, line):
    if name not in record:
        raise RowValidationError(path, line, f"missing field {name}")
    return record[name]


def _enum(enum_cls, value, name, path, line):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ', '.join(m.value for m in enum_cls)
        raise RowValidationError(path, line, f"field {name}={value!r} not in {{{allowed}}}")


def load_announcements(path):
    items = []
    for line, rec in _read_jsonl(path):
        items.append(Announcement(
            fund_code=str(_field(rec, 'fund_code', path, line)),
            published=_parse_date(_field(rec, 'published', path, line), path, line),
            ann_type=str(_field(rec, 'ann_type', path, line)),
            summary=str(rec.get('summary', '')),
            sentiment=_enum(Sentiment, _field(rec, 'sentiment', path, line), 'sentiment', path, line),
        ))
    return sorted(items, key=lambda a: (a.fund_code, a.published))


def load_news(path):
    items = []
    for line, rec in _read_jsonl(path):
        items.append(NewsItem(
            date=_parse_date(_field(rec, 'date', path, line), path, line),
            impact=_enum(NewsImpact, _field(rec, 'impact', path, line), 'impact', path, line),
            summary=str(rec.get('summary', '')),
            sentiment=_enum(Sentiment, _field(rec, 'sentiment', path, line), 'sentiment', path, line),
        ))
    return sorted(items, key=lambda n: n.date)


def load_reports(path):
    items = []
    for line, rec in _read_jsonl(path):
        published = rec.get('published')
        items.append(OperationalReport(
            fund_code=str(_field(rec, 'fund_code', path, line)),
            period_end=_parse_date(_field(rec, 'period_end', path, line), path, line),
            kind=_enum(ReportKind, _field(rec, 'kind', path, line), 'kind', path, line),
            summary=str(rec.get('summary', '')),
            sentiment=_enum(Sentiment, _field(rec, 'sentiment', path, line), 'sentiment', path, line),
            reasoning=str(rec.get('reasoning', '')),
            published=_parse_date(published, path, line) if published else None,
        ))
    return sorted(items, key=lambda r: (r.fund_code, r.period_end))


def _read_csv_rows(path, columns):
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with path.open(newline='', encoding='utf-8') as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in columns if c not in (reader.fieldnames or ())]
        if missing:
            raise RowValidationError(path, 1, f"missing columns {missing}")
        for row in reader:
            yield reader.line_num, row


def load_fund_meta(path):
    funds = []
    for line, row in _read_csv_rows(path, ('code', 'listing_date')):
        funds.append(FundMeta(code=row['code'].strip(),
                              listing_date=_parse_date(row['listing_date'], path, line)))
    return sorted(funds, key=lambda f: f.code)


def load_release_calendar(path):
    """Quarterly report release dates per fund"""
    calendar = {}
    for line, row in _read_csv_rows(path, ('fund_code', 'release_date')):
        calendar.setdefault(row['fund_code'].strip(), []).append(
            _parse_date(row['release_date'], path, line))
    return {code: tuple(sorted(set(dates))) for code, dates in calendar.items()}


def load_trading_calendar(path):
    dates = [_parse_date(row['date'], path, line) for line, row in _read_csv_rows(path, ('date',))]
    return TradingCalendar(dates=tuple(sorted(set(dates))))
