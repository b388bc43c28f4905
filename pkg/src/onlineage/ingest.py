"""Parsing and filtering of altmetric-style JSON-lines mention records.

One JSON object per line::

    {"article_id": "a1", "pubyear": 2015, "pubdate": "2015-03-02",
     "counts": {"twitter": 3, "mendeley": 10},
     "first_seen": {"twitter": "2015-03-05"}, "last_seen": {"twitter": 1451606400},
     "events": [{"source": "twitter", "date": "2015-03-05"}]}

Dates are ISO-8601 calendar dates (a full timestamp is reduced to its UTC date)
or integer epoch seconds. Year-only or year-month dates are rejected.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from onlineage.platforms import N_PLATFORMS, PLATFORM_INDEX, PLATFORMS

log = logging.getLogger(__name__)

Date = dt.date


class RecordError(ValueError):
    """Base class for a rejected input line."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class ParseError(RecordError):
    pass


class SchemaError(RecordError):
    pass


class ValidationError(RecordError):
    pass


@dataclass(frozen=True)
class ArticleRecord:
    """One article. Per-platform fields are tuples in canonical platform order."""

    article_id: str
    publication_year: int
    counts: tuple[int, ...]
    first_seen: tuple[Date | None, ...] = (None,) * N_PLATFORMS
    last_seen: tuple[Date | None, ...] = (None,) * N_PLATFORMS
    events: tuple[tuple[int, Date], ...] = ()
    publication_date: Date | None = None

    def count(self, platform: str) -> int:
        return self.counts[PLATFORM_INDEX[platform]]

    def first(self, platform: str) -> Date | None:
        return self.first_seen[PLATFORM_INDEX[platform]]

    def last(self, platform: str) -> Date | None:
        return self.last_seen[PLATFORM_INDEX[platform]]

    @property
    def total_mentions(self) -> int:
        return sum(self.counts)


@dataclass
class CorpusStats:
    n_total: int = 0
    n_kept: int = 0
    n_with_dates: int = 0
    n_dropped_window: int = 0
    n_malformed: int = 0
    n_unknown_platform_keys: int = 0
    errors: list[str] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_kept": self.n_kept,
            "n_with_dates": self.n_with_dates,
            "n_dropped_window": self.n_dropped_window,
            "n_malformed": self.n_malformed,
            "n_unknown_platform_keys": self.n_unknown_platform_keys,
        }


_EPOCH = dt.date(1970, 1, 1)


def parse_date(value) -> Date:
    """Normalize an ISO date/timestamp string or epoch seconds to a UTC date."""
    if isinstance(value, bool):
        raise SchemaError(f"bad date {value!r}")
    if isinstance(value, int):
        return dt.datetime.fromtimestamp(value, tz=dt.timezone.utc).date()
    if not isinstance(value, str):
        raise SchemaError(f"bad date {value!r}")
    text = value.strip()
    # 'YYYY-MM-DD' is the shortest acceptable form
    if len(text) < 10 or text[4:5] != "-" or text[7:8] != "-":
        raise SchemaError(f"ambiguous or partial date {value!r}")
    if len(text) == 10:
        try:
            return dt.date.fromisoformat(text)
        except ValueError:
            raise SchemaError(f"bad date {value!r}") from None
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        stamp = dt.datetime.fromisoformat(text)
    except ValueError:
        raise SchemaError(f"bad date {value!r}") from None
    if stamp.tzinfo is not None:
        stamp = stamp.astimezone(dt.timezone.utc)
    return stamp.date()


def _platform_map(obj, what: str, unknown: list[str]) -> dict[int, object]:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise SchemaError(f"{what} must be an object")
    out = {}
    for key, value in obj.items():
        idx = PLATFORM_INDEX.get(key)
        if idx is None:
            unknown.append(key)
            continue
        out[idx] = value
    return out


def _parse_object(obj, line_no=None) -> tuple[ArticleRecord, int]:
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object", line_no)
    unknown: list[str] = []
    try:
        article_id = obj.get("article_id")
        if not isinstance(article_id, str) or not article_id:
            raise SchemaError("missing article_id")
        year = obj.get("pubyear")
        if isinstance(year, bool) or not isinstance(year, int):
            raise SchemaError("missing or non-integer pubyear")
        pubdate = obj.get("pubdate")
        pubdate = parse_date(pubdate) if pubdate is not None else None

        counts = [0] * N_PLATFORMS
        for idx, value in _platform_map(obj.get("counts"), "counts", unknown).items():
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError(f"count for {PLATFORMS[idx]} is not an integer")
            if value < 0:
                raise ValidationError(f"negative count for {PLATFORMS[idx]}")
            counts[idx] = value

        first: list[Date | None] = [None] * N_PLATFORMS
        last: list[Date | None] = [None] * N_PLATFORMS
        for idx, value in _platform_map(obj.get("first_seen"), "first_seen", unknown).items():
            first[idx] = parse_date(value) if value is not None else None
        for idx, value in _platform_map(obj.get("last_seen"), "last_seen", unknown).items():
            last[idx] = parse_date(value) if value is not None else None

        events: list[tuple[int, Date]] = []
        raw_events = obj.get("events")
        if raw_events is not None:
            if not isinstance(raw_events, list):
                raise SchemaError("events must be an array")
            for ev in raw_events:
                if not isinstance(ev, dict) or "source" not in ev or "date" not in ev:
                    raise SchemaError("event needs 'source' and 'date'")
                idx = PLATFORM_INDEX.get(ev["source"])
                if idx is None:
                    unknown.append(str(ev["source"]))
                    continue
                events.append((idx, parse_date(ev["date"])))
        events.sort()

        # event extremes define, or must agree with, the per-platform bounds
        by_platform: dict[int, list[Date]] = {}
        for idx, day in events:
            by_platform.setdefault(idx, []).append(day)
        for idx, days in by_platform.items():
            lo, hi = days[0], days[-1]
            if first[idx] is None:
                first[idx] = lo
            elif first[idx] != lo:
                raise ValidationError(f"{PLATFORMS[idx]} first_seen disagrees with events")
            if last[idx] is None:
                last[idx] = hi
            elif last[idx] != hi:
                raise ValidationError(f"{PLATFORMS[idx]} last_seen disagrees with events")
        for idx in range(N_PLATFORMS):
            if first[idx] is not None and last[idx] is not None and first[idx] > last[idx]:
                raise ValidationError(f"{PLATFORMS[idx]} first_seen after last_seen")
    except RecordError as exc:
        if exc.line_no is None and line_no is not None:
            raise type(exc)(str(exc), line_no) from None
        raise

    record = ArticleRecord(
        article_id=article_id,
        publication_year=year,
        counts=tuple(counts),
        first_seen=tuple(first),
        last_seen=tuple(last),
        events=tuple(events),
        publication_date=pubdate,
    )
    return record, len(unknown)


def parse_record(line: str, line_no: int | None = None) -> ArticleRecord:
    """Parse one JSON line into a validated :class:`ArticleRecord`.

    Raises :class:`ParseError` for malformed JSON, :class:`SchemaError` for
    missing/mistyped fields and :class:`ValidationError` for values that break
    record invariants (negative counts, inverted date bounds).
    """
    return _parse_line(line, line_no)[0]


def _parse_line(line: str, line_no=None) -> tuple[ArticleRecord, int]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON ({exc.msg})", line_no) from None
    return _parse_object(obj, line_no)


def record_to_dict(record: ArticleRecord) -> dict:
    out: dict = {"article_id": record.article_id, "pubyear": record.publication_year}
    if record.publication_date is not None:
        out["pubdate"] = record.publication_date.isoformat()
    out["counts"] = {PLATFORMS[i]: c for i, c in enumerate(record.counts) if c}
    first = {PLATFORMS[i]: d.isoformat() for i, d in enumerate(record.first_seen) if d}
    last = {PLATFORMS[i]: d.isoformat() for i, d in enumerate(record.last_seen) if d}
    if first:
        out["first_seen"] = first
    if last:
        out["last_seen"] = last
    if record.events:
        out["events"] = [{"source": PLATFORMS[i], "date": d.isoformat()} for i, d in record.events]
    return out


def serialize_record(record: ArticleRecord) -> str:
    """Canonical single-line JSON for a record (stable key order)."""
    return json.dumps(record_to_dict(record), separators=(",", ":"))


def has_dated_mentions(record: ArticleRecord) -> bool:
    if record.events:
        return True
    return any(d is not None for d in record.first_seen) or any(
        d is not None for d in record.last_seen
    )


def iter_lines(path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line.strip():
                yield line_no, line


def load_corpus(
    path, window: tuple[int, int] = (1920, 2016)
) -> tuple[list[ArticleRecord], CorpusStats]:
    """Stream a JSON-lines file, keeping records published inside ``window``.

    Malformed lines are tallied in the returned stats and skipped; only I/O
    failures abort.
    """
    start, end = window
    if start > end:
        raise ValueError(f"empty publication window {window}")
    stats = CorpusStats()
    records: list[ArticleRecord] = []
    for line_no, line in iter_lines(path):
        stats.n_total += 1
        try:
            record, n_unknown = _parse_line(line, line_no)
        except RecordError as exc:
            stats.n_malformed += 1
            if len(stats.errors) < 100:
                stats.errors.append(str(exc))
            log.debug("skipping %s", exc)
            continue
        stats.n_unknown_platform_keys += n_unknown
        if not start <= record.publication_year <= end:
            stats.n_dropped_window += 1
            continue
        records.append(record)
        stats.n_kept += 1
        if has_dated_mentions(record):
            stats.n_with_dates += 1
    if stats.n_malformed:
        log.warning("%s: skipped %d malformed line(s)", path, stats.n_malformed)
    return records, stats


def write_records(path, records: Iterable[ArticleRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(serialize_record(record))
            fh.write("\n")


def read_records(path) -> list[ArticleRecord]:
    """Read a canonical records file strictly (any bad line is an error)."""
    return [_parse_line(line, line_no)[0] for line_no, line in iter_lines(path)]
