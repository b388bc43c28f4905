"""Online Age, active articles, growth series and platform shares."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from onlineage.ingest import ArticleRecord, has_dated_mentions
from onlineage.platforms import N_PLATFORMS

DEFAULT_HORIZON = 2018
DEFAULT_MIN_PLATFORMS = 3


@dataclass(frozen=True)
class LongevityRecord:
    article_id: str
    first_online_mention: dt.date
    last_online_mention: dt.date
    online_age_months: int
    active: bool


def _all_dates(record: ArticleRecord) -> list[dt.date]:
    dates = [d for d in record.first_seen if d is not None]
    dates += [d for d in record.last_seen if d is not None]
    dates += [d for _, d in record.events]
    return dates


def first_last_mention(record: ArticleRecord) -> tuple[dt.date, dt.date] | None:
    """Earliest and latest mention date over every platform, or ``None``."""
    dates = _all_dates(record)
    if not dates:
        return None
    return min(dates), max(dates)


def online_age(first: dt.date, last: dt.date) -> int:
    """Whole calendar months between two dates; the day of month is ignored."""
    if first > last:
        raise ValueError(f"first mention {first} is after last mention {last}")
    return (last.year * 12 + last.month) - (first.year * 12 + first.month)


def platform_year_coverage(record: ArticleRecord) -> list[set[int]]:
    """Calendar years covered by each platform.

    A platform with events covers exactly the years of its events. Without
    events it covers the closed year interval between its first and last seen
    dates (a single bound counts as a one-year interval).
    """
    coverage: list[set[int]] = [set() for _ in range(N_PLATFORMS)]
    with_events = set()
    for idx, day in record.events:
        coverage[idx].add(day.year)
        with_events.add(idx)
    for idx in range(N_PLATFORMS):
        if idx in with_events:
            continue
        lo, hi = record.first_seen[idx], record.last_seen[idx]
        if lo is None and hi is None:
            continue
        lo = lo or hi
        hi = hi or lo
        coverage[idx].update(range(lo.year, hi.year + 1))
    return coverage


def is_active(
    record: ArticleRecord,
    horizon_year: int = DEFAULT_HORIZON,
    min_platforms: int = DEFAULT_MIN_PLATFORMS,
) -> bool:
    """True if every year from the first mention through ``horizon_year`` is
    covered by at least ``min_platforms`` distinct platforms.

    A first mention after the horizon leaves nothing to cover and counts as
    inactive.
    """
    if min_platforms < 1:
        raise ValueError("min_platforms must be >= 1")
    bounds = first_last_mention(record)
    if bounds is None:
        raise ValueError(f"record {record.article_id!r} has no dated mentions")
    start = bounds[0].year
    if start > horizon_year:
        return False
    coverage = platform_year_coverage(record)
    for year in range(start, horizon_year + 1):
        if sum(1 for years in coverage if year in years) < min_platforms:
            return False
    return True


def longevity_record(
    record: ArticleRecord,
    horizon_year: int = DEFAULT_HORIZON,
    min_platforms: int = DEFAULT_MIN_PLATFORMS,
) -> LongevityRecord | None:
    bounds = first_last_mention(record)
    if bounds is None:
        return None
    first, last = bounds
    return LongevityRecord(
        article_id=record.article_id,
        first_online_mention=first,
        last_online_mention=last,
        online_age_months=online_age(first, last),
        active=is_active(record, horizon_year, min_platforms),
    )


def longevity_table(
    records: Iterable[ArticleRecord],
    horizon_year: int = DEFAULT_HORIZON,
    min_platforms: int = DEFAULT_MIN_PLATFORMS,
) -> list[LongevityRecord]:
    """Longevity rows for every record with dated mentions, in input order."""
    out = []
    for record in records:
        row = longevity_record(record, horizon_year, min_platforms)
        if row is not None:
            out.append(row)
    return out


def active_set(
    records: Iterable[ArticleRecord],
    horizon_year: int = DEFAULT_HORIZON,
    min_platforms: int = DEFAULT_MIN_PLATFORMS,
    pub_window: tuple[int, int] = (1920, 2016),
) -> list[tuple[ArticleRecord, LongevityRecord]]:
    start, end = pub_window
    out = []
    for record in records:
        if not start <= record.publication_year <= end:
            continue
        if not has_dated_mentions(record):
            continue
        row = longevity_record(record, horizon_year, min_platforms)
        if row.active:
            out.append((record, row))
    return out


@dataclass
class YearlySeries:
    years: np.ndarray
    published: np.ndarray
    with_dates: np.ndarray
    total_mentions: np.ndarray

    def rows(self):
        for i, year in enumerate(self.years):
            yield int(year), int(self.published[i]), int(self.with_dates[i]), int(self.total_mentions[i])


def _year_range(records: Sequence[ArticleRecord], years: tuple[int, int] | None):
    if years is not None:
        return years
    if not records:
        return None
    ys = [r.publication_year for r in records]
    return min(ys), max(ys)


def yearly_series(
    records: Sequence[ArticleRecord], years: tuple[int, int] | None = None
) -> YearlySeries:
    """Per publication year: articles, articles with dates, summed counts.

    Years are contiguous over ``years`` (default: observed min..max), with
    explicit zero rows for empty years.
    """
    span = _year_range(records, years)
    if span is None:
        empty = np.zeros(0, dtype=np.int64)
        return YearlySeries(empty, empty.copy(), empty.copy(), empty.copy())
    lo, hi = span
    n = hi - lo + 1
    published = np.zeros(n, dtype=np.int64)
    with_dates = np.zeros(n, dtype=np.int64)
    totals = np.zeros(n, dtype=np.int64)
    for r in records:
        i = r.publication_year - lo
        if not 0 <= i < n:
            continue
        published[i] += 1
        with_dates[i] += has_dated_mentions(r)
        totals[i] += r.total_mentions
    return YearlySeries(np.arange(lo, hi + 1), published, with_dates, totals)


@dataclass
class PlatformShareMatrix:
    years: np.ndarray
    raw_counts: np.ndarray
    shares: np.ndarray


def minmax_rows(raw: np.ndarray) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    lo = raw.min(axis=1, keepdims=True)
    span = raw.max(axis=1, keepdims=True) - lo
    out = np.zeros_like(raw)
    ok = span[:, 0] > 0
    out[ok] = (raw[ok] - lo[ok]) / span[ok]
    return out


def platform_share_matrix(
    records: Sequence[ArticleRecord], years: tuple[int, int] | None = None
) -> PlatformShareMatrix:
    span = _year_range(records, years)
    if span is None:
        return PlatformShareMatrix(
            np.zeros(0, dtype=np.int64),
            np.zeros((0, N_PLATFORMS), dtype=np.int64),
            np.zeros((0, N_PLATFORMS)),
        )
    lo, hi = span
    raw = np.zeros((hi - lo + 1, N_PLATFORMS), dtype=np.int64)
    for r in records:
        i = r.publication_year - lo
        if 0 <= i < len(raw):
            raw[i] += r.counts
    return PlatformShareMatrix(np.arange(lo, hi + 1), raw, minmax_rows(raw))


@dataclass
class MedianLabeling:
    median_months: float
    labels: np.ndarray


def lower_median(values) -> float:
    ordered = np.sort(np.asarray(values))
    return ordered[(len(ordered) - 1) // 2]


def median_threshold_labels(ages) -> MedianLabeling:
    """Label 1 iff the age is at or above the (lower) median age."""
    ages = np.asarray(ages)
    if ages.size == 0:
        raise ValueError("cannot label an empty list of ages")
    median = lower_median(ages)
    return MedianLabeling(median.item(), (ages >= median).astype(np.int64))
