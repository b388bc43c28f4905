"""Hypothesis strategies and seeded builders for article records."""

import datetime as dt
import json

import numpy as np
from hypothesis import strategies as st

from onlineage.ingest import ArticleRecord
from onlineage.platforms import N_PLATFORMS, PLATFORMS

dates = st.dates(min_value=dt.date(1990, 1, 1), max_value=dt.date(2018, 12, 31))


@st.composite
def record_lines(draw):
    """A valid JSON line in the canonical input format."""
    obj = {"article_id": draw(st.text("abcdef0123456789", min_size=1, max_size=12)),
           "pubyear": draw(st.integers(1900, 2020))}
    if draw(st.booleans()):
        obj["pubdate"] = draw(dates).isoformat()
    names = draw(st.lists(st.sampled_from(PLATFORMS), unique=True, max_size=6))
    obj["counts"] = {p: draw(st.integers(0, 500)) for p in names}
    bounded = draw(st.lists(st.sampled_from(PLATFORMS), unique=True, max_size=4))
    first, last = {}, {}
    for p in bounded:
        a, b = sorted((draw(dates), draw(dates)))
        first[p], last[p] = a.isoformat(), b.isoformat()
    if first:
        obj["first_seen"], obj["last_seen"] = first, last
    evp = [p for p in draw(st.lists(st.sampled_from(PLATFORMS), unique=True, max_size=3))
           if p not in bounded]
    events = []
    for p in evp:
        for d in draw(st.lists(dates, min_size=1, max_size=4)):
            events.append({"source": p, "date": d.isoformat()})
    if events:
        obj["events"] = events
    return json.dumps(obj)


def random_dated_record(rng: np.random.Generator, i: int, with_events: bool = False):
    """Seeded record with a random mix of bounds and events over 2000-2018."""
    first = [None] * N_PLATFORMS
    last = [None] * N_PLATFORMS
    events = []
    k = int(rng.integers(1, 7))
    for p in rng.choice(N_PLATFORMS, size=k, replace=False):
        p = int(p)
        days = sorted(
            dt.date(2000, 1, 1) + dt.timedelta(days=int(rng.integers(0, 6940)))
            for _ in range(int(rng.integers(1, 6)))
        )
        if with_events or rng.random() < 0.3:
            events += [(p, d) for d in days]
            first[p], last[p] = days[0], days[-1]
        else:
            first[p], last[p] = days[0], days[-1]
    counts = tuple(int(c) for c in rng.integers(0, 20, size=N_PLATFORMS))
    return ArticleRecord(f"r{i}", 2000, counts, tuple(first), tuple(last), tuple(sorted(events)))


def dense_event_record(rng: np.random.Generator, i: int):
    """Event-list record whose platforms mostly cover every year from a start
    year through 2019, so activity at various thresholds is common."""
    start = int(rng.integers(2005, 2020))
    first = [None] * N_PLATFORMS
    last = [None] * N_PLATFORMS
    events = []
    for p in rng.choice(N_PLATFORMS, size=int(rng.integers(1, 7)), replace=False):
        p = int(p)
        days = [dt.date(year, int(rng.integers(1, 13)), int(rng.integers(1, 29)))
                for year in range(start, 2020) if rng.random() > 0.08]
        if not days:
            continue
        days = sorted(set(days))
        events += [(p, d) for d in days]
        first[p], last[p] = days[0], days[-1]
    if not events:
        d = dt.date(start, 6, 1)
        events, first[0], last[0] = [(0, d)], d, d
    counts = tuple(int(c) for c in rng.integers(0, 20, size=N_PLATFORMS))
    return ArticleRecord(f"d{i}", 2005, counts, tuple(first), tuple(last), tuple(sorted(events)))
