"""Seeded generators of altmetric-like data with planted ground truth.

Article ``i`` of a corpus is drawn entirely from stream (seed, i), so any
single article can be regenerated without the rest.
"""

from __future__ import annotations

import calendar
import datetime as dt
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from onlineage.ingest import ArticleRecord, write_records
from onlineage.models.base import CLASSIFICATION, REGRESSION, Dataset
from onlineage.platforms import N_PLATFORMS, PLATFORM_INDEX, PLATFORMS
from onlineage.rng import stream


@dataclass
class Era:
    start: int
    end: int
    # relative mention share per platform; unlisted platforms get `background`
    weights: dict[str, float]
    # months of Online Age added per log(1 + count) on each platform
    age_coef: dict[str, float]
    mean_mentions: float = 10.0
    background: float = 0.05

    def weight_vector(self) -> np.ndarray:
        w = np.full(N_PLATFORMS, self.background)
        for name, v in self.weights.items():
            w[PLATFORM_INDEX[name]] = v
        return w / w.sum()

    def coef_vector(self) -> np.ndarray:
        c = np.zeros(N_PLATFORMS)
        for name, v in self.age_coef.items():
            c[PLATFORM_INDEX[name]] = v
        return c


def default_eras() -> list[Era]:
    return [
        Era(1920, 1970,
            {"mendeley": 10, "syllabi": 5, "patent": 2.5, "wikipedia": 1, "twitter": 1,
             "citeulike": 0.6, "blogs": 0.4, "policy": 0.4},
            {"patent": 14.0, "syllabi": 2.0, "mendeley": 1.0},
            mean_mentions=6.0),
        Era(1971, 2009,
            {"mendeley": 10, "patent": 5, "twitter": 2.5, "citeulike": 1, "wikipedia": 0.6,
             "facebook": 0.6, "news": 0.5, "blogs": 0.5, "policy": 0.4},
            {"patent": 9.0, "twitter": 7.0, "mendeley": 1.0},
            mean_mentions=15.0),
        Era(2010, 2016,
            {"mendeley": 10, "twitter": 7, "facebook": 1.5, "news": 1.2, "blogs": 1,
             "patent": 0.6, "reddit": 0.4, "wikipedia": 0.4, "googleplus": 0.4},
            {"twitter": 4.0, "mendeley": 3.0, "facebook": 1.0},
            mean_mentions=25.0),
    ]


@dataclass
class SynthConfig:
    n_articles: int = 10_000
    year_start: int = 1920
    year_end: int = 2016
    growth: float = 0.05
    eras: list[Era] = field(default_factory=default_eras)
    base_age_months: float = 4.0
    noise_sigma: float = 3.0
    active_fraction: float = 0.3
    dated_fraction: float = 0.6
    active_platforms: int = 3
    min_platforms: int = 3
    horizon_year: int = 2018
    snapshot: dt.date = dt.date(2018, 6, 30)
    dispersion: float = 2.0
    emit_events: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.n_articles < 0:
            raise ValueError("n_articles must be >= 0")
        if self.year_start > self.year_end:
            raise ValueError("empty year range")
        if self.year_end >= self.horizon_year:
            raise ValueError("publication years must end before the horizon year")
        if self.snapshot.year != self.horizon_year:
            raise ValueError("snapshot date must fall in the horizon year")
        if self.noise_sigma < 0 or self.dispersion <= 0:
            raise ValueError("noise_sigma must be >= 0 and dispersion > 0")
        if not 0 <= self.active_fraction <= 1 or not 0 <= self.dated_fraction <= 1:
            raise ValueError("fractions must lie in [0, 1]")
        if self.active_fraction > 0 and self.active_platforms < self.min_platforms:
            raise ValueError(
                f"active articles need >= {self.min_platforms} platforms, "
                f"config provides {self.active_platforms}"
            )
        if self.active_platforms > N_PLATFORMS:
            raise ValueError("more active platforms than platforms")
        years = []
        for era in self.eras:
            if era.start > era.end:
                raise ValueError(f"bad era {era.start}-{era.end}")
            if any(v < 0 for v in era.weights.values()) or era.background < 0:
                raise ValueError("era weights must be non-negative")
            years.extend(range(era.start, era.end + 1))
        if sorted(years) != list(range(self.year_start, self.year_end + 1)):
            raise ValueError("eras must partition the year range")

    def era_of(self, year: int) -> int:
        for i, era in enumerate(self.eras):
            if era.start <= year <= era.end:
                return i
        raise ValueError(f"year {year} outside every era")

    def year_probabilities(self) -> np.ndarray:
        t = np.arange(self.year_end - self.year_start + 1)
        w = (1.0 + self.growth) ** t
        return w / w.sum()


@dataclass
class GroundTruth:
    article_ids: list[str]
    true_age: np.ndarray  # planted Online Age before noise and clipping (nan if undated)
    designated_active: np.ndarray
    era: np.ndarray
    informative: dict[int, list[str]]
    year_labels: dict[int, int]

    def to_json(self) -> dict:
        return {
            "article_ids": self.article_ids,
            "true_age": [None if np.isnan(a) else round(float(a), 6) for a in self.true_age],
            "designated_active": [bool(a) for a in self.designated_active],
            "era": [int(e) for e in self.era],
            "informative": {str(k): v for k, v in self.informative.items()},
            "year_labels": {str(k): v for k, v in self.year_labels.items()},
        }


def _month_index(day: dt.date) -> int:
    return day.year * 12 + day.month - 1


def _from_month_index(mi: int, rng) -> dt.date:
    year, month = divmod(mi, 12)
    last_day = calendar.monthrange(year, month + 1)[1]
    return dt.date(year, month + 1, int(rng.integers(1, last_day + 1)))


def _random_date(lo: dt.date, hi: dt.date, rng) -> dt.date:
    span = (hi - lo).days
    return lo + dt.timedelta(days=int(rng.integers(0, span + 1)))


def _events_for(idx, lo, hi, rng, extra):
    days = {lo, hi}
    for year in range(lo.year + 1, hi.year):
        days.add(_random_date(dt.date(year, 1, 1), dt.date(year, 12, 31), rng))
    for _ in range(extra):
        days.add(_random_date(lo, hi, rng))
    return [(idx, d) for d in sorted(days)]


def generate_article(config: SynthConfig, index: int):
    """Article ``index`` of the corpus and its (true_age, active, era) truth."""
    rng = stream(config.seed, index)
    probs = config.year_probabilities()
    year = config.year_start + int(rng.choice(len(probs), p=probs))
    era_i = config.era_of(year)
    era = config.eras[era_i]
    weights = era.weight_vector()

    intensity = era.mean_mentions * rng.gamma(config.dispersion, 1.0 / config.dispersion)
    counts = rng.poisson(intensity * weights)
    active = rng.random() < config.active_fraction
    dated = active or rng.random() < config.dated_fraction
    pubdate = _random_date(dt.date(year, 1, 1), dt.date(year, 12, 31), rng)

    first_seen = [None] * N_PLATFORMS
    last_seen = [None] * N_PLATFORMS
    events = []
    true_age = np.nan
    if dated:
        if active:
            spans = rng.choice(N_PLATFORMS, size=config.active_platforms, replace=False,
                               p=weights)
        else:
            positive = np.flatnonzero(counts > 0)
            if len(positive) == 0:
                positive = np.array([int(rng.choice(N_PLATFORMS, p=weights))])
            k = min(len(positive), int(rng.integers(1, 5)))
            spans = rng.choice(positive, size=k, replace=False)
        counts[spans] = np.maximum(counts[spans], 1)
        true_age = config.base_age_months + float(era.coef_vector() @ np.log1p(counts))
        age = int(round(true_age + rng.normal(0.0, config.noise_sigma)))

        if active:
            last = _random_date(dt.date(config.horizon_year, 1, 1), config.snapshot, rng)
        else:
            last_year = int(rng.integers(max(year, config.horizon_year - 12), config.horizon_year))
            last = _random_date(dt.date(last_year, 1, 1), dt.date(last_year, 12, 31), rng)
            last = max(last, pubdate)
        earliest = _month_index(dt.date(year, 1, 1))
        age = min(max(age, 0), _month_index(last) - earliest)
        first_mi = _month_index(last) - age
        first = _from_month_index(first_mi, rng)
        if first > last:
            first = last.replace(day=1)

        for j, idx in enumerate(spans):
            idx = int(idx)
            if j == 0 or active:
                lo, hi = first, last
            else:
                a, b = sorted((_random_date(first, last, rng), _random_date(first, last, rng)))
                lo, hi = a, b
            first_seen[idx], last_seen[idx] = lo, hi
            if config.emit_events:
                events += _events_for(idx, lo, hi, rng, min(int(counts[idx]), 3))

    record = ArticleRecord(
        article_id=f"A{index:07d}",
        publication_year=year,
        counts=tuple(int(c) for c in counts),
        first_seen=tuple(first_seen),
        last_seen=tuple(last_seen),
        events=tuple(sorted(events)),
        publication_date=pubdate,
    )
    return record, true_age, bool(active), era_i


def generate_corpus(config: SynthConfig | None = None) -> tuple[list[ArticleRecord], GroundTruth]:
    config = config or SynthConfig()
    config.validate()
    records, ages, active, eras = [], [], [], []
    for i in range(config.n_articles):
        record, age, act, era = generate_article(config, i)
        records.append(record)
        ages.append(age)
        active.append(act)
        eras.append(era)
    informative = {
        i: [PLATFORMS[j] for j in np.flatnonzero(e.coef_vector() > 0)]
        for i, e in enumerate(config.eras)
    }
    year_labels = {y: config.era_of(y) for y in range(config.year_start, config.year_end + 1)}
    truth = GroundTruth(
        [r.article_id for r in records],
        np.array(ages, dtype=float),
        np.array(active, dtype=bool),
        np.array(eras, dtype=np.int64),
        informative,
        year_labels,
    )
    return records, truth


def write_corpus(out_dir, records, truth: GroundTruth, config: SynthConfig | None = None) -> Path:
    """Write ``corpus.jsonl`` and the ``ground_truth.json`` sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records(out / "corpus.jsonl", records)
    payload = truth.to_json()
    if config is not None:
        cfg = asdict(config)
        cfg["snapshot"] = config.snapshot.isoformat()
        payload["config"] = cfg
    with open(out / "ground_truth.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return out / "corpus.jsonl"


def generate_planted_clusters(k: int, n_per_cluster: int, separation: float, seed: int = 0,
                              sigma: float = 1.0):
    """1-D Gaussian blobs with centres ``separation * sigma`` apart."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if separation < 0:
        raise ValueError("separation must be >= 0")
    rng = stream(seed, 0)
    labels = np.repeat(np.arange(k), n_per_cluster)
    points = labels * separation * sigma + rng.normal(0.0, sigma, size=len(labels))
    return points[:, None], labels


@dataclass
class PlantedTruth:
    informative: list[str]
    relation: str
    coefficients: np.ndarray
    intercept: float
    clean_target: np.ndarray


_COLUMN_MEANS = np.linspace(1.0, 12.0, N_PLATFORMS)


def generate_planted_supervised(n: int, informative=("patent",), relation: str = "linear",
                                noise: float = 0.0, seed: int = 0,
                                cluster_id: str = "synthetic") -> tuple[Dataset, PlantedTruth]:
    """Count-like features with a target planted on ``informative`` columns.

    ``linear``: y = 3 + sum_j b_j x_j; ``smooth``: y = sum_j 10 sqrt(x_j) +
    4 sin(x_j / 3); ``threshold``: label 1 iff the informative sum plus noise
    exceeds its expectation (a classification dataset). Gaussian noise with
    standard deviation ``noise`` is added to the regression targets. The other
    columns are independent nuisance draws.
    """
    unknown = set(informative) - set(PLATFORMS)
    if unknown:
        raise ValueError(f"unknown platforms {sorted(unknown)}")
    rng = stream(seed, 1)
    lam = rng.gamma(2.0, _COLUMN_MEANS / 2.0, size=(n, N_PLATFORMS))
    X = rng.poisson(lam).astype(float)
    cols = [PLATFORM_INDEX[p] for p in informative]
    coef = np.zeros(N_PLATFORMS)
    coef[cols] = np.arange(1, len(cols) + 1, dtype=float)
    eps = rng.normal(0.0, 1.0, size=n) * noise
    if relation == "linear":
        clean = 3.0 + X @ coef
        y, task = clean + eps, REGRESSION
        intercept = 3.0
    elif relation == "smooth":
        sub = X[:, cols]
        clean = np.sum(10.0 * np.sqrt(sub) + 4.0 * np.sin(sub / 3.0), axis=1)
        y, task, intercept = clean + eps, REGRESSION, 0.0
    elif relation == "threshold":
        clean = X[:, cols].sum(axis=1)
        cut = float(_COLUMN_MEANS[cols].sum())
        y = (clean + eps > cut).astype(float)
        task, intercept = CLASSIFICATION, cut
    else:
        raise ValueError(f"unknown relation {relation!r}")
    data = Dataset(X, y, task, cluster_id)
    return data, PlantedTruth(list(informative), relation, coef, intercept, clean)
