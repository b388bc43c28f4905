"""k-means over publication years and elbow selection of k."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from onlineage.ingest import ArticleRecord
from onlineage.longevity import LongevityRecord, yearly_series
from onlineage.rng import stream

log = logging.getLogger(__name__)


@dataclass
class KMeansModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    seed: int
    n_iterations: int
    history: list[float] = field(default_factory=list)
    # inertia trace of every restart, in restart order
    run_histories: list[list[float]] = field(default_factory=list, repr=False)


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("points must be a non-empty list of vectors")
    if not np.all(np.isfinite(x)):
        raise ValueError("points contain non-finite values")
    return x


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _assign(x, centroids):
    d = _sq_dists(x, centroids)
    # argmin returns the first minimum: ties go to the lowest centroid index
    labels = np.argmin(d, axis=1)
    return labels, d[np.arange(len(x)), labels]


def _plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centroids = [x[rng.integers(n)]]
    closest = _sq_dists(x, centroids[0][None])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centroids.append(x[idx])
        closest = np.minimum(closest, _sq_dists(x, x[idx][None])[:, 0])
    return np.array(centroids)


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int):
    k = len(centroids)
    centroids = centroids.copy()
    labels, d = _assign(x, centroids)
    history = [float(d.sum())]
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        for j in range(k):
            members = labels == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
        # empty cluster: move its centroid onto the point farthest from its own centroid
        empty = [j for j in range(k) if not np.any(labels == j)]
        if empty:
            diff = x - centroids[labels]
            d = np.einsum("nd,nd->n", diff, diff)
        for j in empty:
            far = int(np.argmax(d))
            centroids[j] = x[far]
            labels[far] = j
            d[far] = 0.0
        new_labels, d = _assign(x, centroids)
        history.append(float(d.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return centroids, labels, float(d.sum()), n_iter, history


def _hartigan_pass(x: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, bool]:
    """Best-improvement single-point transfers until none lowers the inertia.

    Moving point i from cluster a to b changes the inertia by
    n_b/(n_b+1)|x_i-c_b|^2 - n_a/(n_a-1)|x_i-c_a|^2. Each step makes the most
    negative such move. Lloyd fixed points can still admit these moves.
    """
    labels = labels.copy()
    idx = np.arange(len(x))
    counts = np.bincount(labels, minlength=k).astype(float)
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    moved = False
    for _ in range(10 * len(x) * k):
        means = sums / np.maximum(counts, 1)[:, None]
        d = _sq_dists(x, means)
        own = counts[labels]
        with np.errstate(divide="ignore", invalid="ignore"):
            remove = np.where(own > 1, own / (own - 1) * d[idx, labels], -np.inf)
        add = counts / (counts + 1) * d
        add[idx, labels] = np.inf
        best_b = np.argmin(add, axis=1)
        gain = remove - add[idx, best_b]
        i = int(np.argmax(gain))
        if not gain[i] > 1e-12 * max(remove[i], 1e-300):
            break
        a, b = labels[i], best_b[i]
        counts[a] -= 1
        counts[b] += 1
        sums[a] -= x[i]
        sums[b] += x[i]
        labels[i] = b
        moved = True
    return labels, moved


def _local_search(x: np.ndarray, centroids: np.ndarray, max_iter: int):
    """Lloyd iterations, then Hartigan transfers with Lloyd polishing until
    neither changes anything. Every step lowers (or keeps) the inertia."""
    k = len(centroids)
    centroids, labels, inertia, n_iter, history = _lloyd(x, centroids, max_iter)
    while k > 1:
        new_labels, moved = _hartigan_pass(x, labels, k)
        if not moved:
            break
        means = np.array([x[new_labels == j].mean(axis=0) for j in range(k)])
        centroids, labels, inertia, more, h = _lloyd(x, means, max_iter)
        n_iter += more
        history += h
    return centroids, labels, inertia, n_iter, history


def _relocate(x: np.ndarray, best, max_iter: int, traces: list):
    """Drop one centroid, reseed it on the point farthest from the others and
    search again; keep the first strict improvement and repeat until none of
    the k relocations helps. Each attempt is a full run whose inertia trace is
    appended to ``traces``."""
    k = len(best[0])
    improved = k > 1
    while improved:
        improved = False
        for j in range(k):
            rest = np.delete(best[0], j, axis=0)
            _, d = _assign(x, rest)
            init = np.insert(rest, j, x[int(np.argmax(d))], axis=0)
            run = _local_search(x, init, max_iter)
            traces.append(run[4])
            if run[2] < best[2] - 1e-12 * max(best[2], 1e-300):
                best, improved = run, True
                break
    return best


def lloyd_kmeans(
    points, k: int, seed: int = 0, restarts: int = 10, max_iter: int = 300
) -> KMeansModel:
    """Best of ``restarts`` k-means++ seeded Lloyd runs (lowest inertia,
    earliest restart on ties). Restart ``r`` draws from stream (seed, k, r).

    Each run finishes with Hartigan single-point transfers, and the winner is
    then refined by centroid relocation (see ``_relocate``). Both escape Lloyd
    fixed points that are not optimal; the result is still a Lloyd fixed point.
    """
    x = _as_points(points)
    if not 1 <= k <= len(x):
        raise ValueError(f"k={k} must be between 1 and the number of points ({len(x)})")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    traces = []
    for r in range(restarts):
        init = _plusplus(x, k, stream(seed, k, r))
        run = _local_search(x, init, max_iter)
        traces.append(run[4])
        if best is None or run[2] < best[2]:
            best = run
    best = _relocate(x, best, max_iter, traces)
    centroids, labels, inertia, n_iter, history = best
    return KMeansModel(k, centroids, labels, inertia, seed, n_iter, history, traces)


@dataclass
class ElbowResult:
    k_values: list[int]
    inertias: list[float]
    chosen_k: int | None = None
    models: list[KMeansModel] = field(default_factory=list, repr=False)


def _split_widest(x: np.ndarray, model: KMeansModel) -> np.ndarray:
    """Centroids for k+1 clusters: the highest-SSE cluster split at the median
    of its widest coordinate."""
    sse = np.array(
        [((x[model.assignments == j] - model.centroids[j]) ** 2).sum() for j in range(model.k)]
    )
    j = int(np.argmax(sse))
    members = x[model.assignments == j]
    axis = int(np.argmax(members.max(axis=0) - members.min(axis=0)))
    order = np.argsort(members[:, axis], kind="stable")
    half = max(1, len(order) // 2)
    lo, hi = members[order[:half]], members[order[half:]]
    centroids = [c for i, c in enumerate(model.centroids) if i != j]
    centroids.append(lo.mean(axis=0))
    centroids.append(hi.mean(axis=0) if len(hi) else lo.mean(axis=0))
    return np.array(centroids)


def inertia_curve(
    points, k_max: int, seed: int = 0, restarts: int = 10, max_iter: int = 300
) -> ElbowResult:
    """Best inertia for k = 1..k_max, forced non-increasing in k.

    When k+1 lands above k (unlucky seeding) one extra run starts from the k
    solution with its widest cluster split in two; that start cannot be worse
    than the k solution.
    """
    x = _as_points(points)
    if not 1 <= k_max <= len(x):
        raise ValueError(f"k_max={k_max} must be between 1 and {len(x)}")
    models: list[KMeansModel] = []
    for k in range(1, k_max + 1):
        model = lloyd_kmeans(x, k, seed, restarts, max_iter)
        if models and model.inertia > models[-1].inertia:
            prev = models[-1]
            centroids, labels, inertia, n_iter, history = _local_search(x, _split_widest(x, prev), max_iter)
            if inertia <= prev.inertia:
                model = KMeansModel(k, centroids, labels, inertia, seed, n_iter, history)
            else:
                model = KMeansModel(k, model.centroids, model.assignments, prev.inertia, seed,
                                    model.n_iterations, model.history)
        models.append(model)
    return ElbowResult(list(range(1, k_max + 1)), [m.inertia for m in models], None, models)


def chord_distances(inertias: Sequence[float]) -> np.ndarray:
    """Distance of each normalized curve point below the chord joining the
    first and last points (positive = below the chord)."""
    y = np.asarray(inertias, dtype=float)
    n = len(y)
    xs = np.linspace(0.0, 1.0, n)
    span = y.max() - y.min()
    ys = (y - y.min()) / span if span > 0 else np.zeros(n)
    x0, y0, x1, y1 = xs[0], ys[0], xs[-1], ys[-1]
    # signed perpendicular distance to the line through (x0,y0)-(x1,y1)
    num = (y1 - y0) * xs - (x1 - x0) * ys + x1 * y0 - y1 * x0
    norm = np.hypot(x1 - x0, y1 - y0)
    return num / norm if norm > 0 else np.zeros(n)


def detect_elbow(curve: ElbowResult | Sequence[float], k_values: Sequence[int] | None = None) -> int:
    """k of the interior curve point farthest from the end-to-end chord.

    Both axes are min-max scaled first; ties go to the smaller k.
    """
    if isinstance(curve, ElbowResult):
        inertias, k_values = curve.inertias, curve.k_values
    else:
        inertias = list(curve)
        if k_values is None:
            k_values = list(range(1, len(inertias) + 1))
    if len(inertias) < 3:
        raise ValueError("elbow detection needs at least 3 curve points")
    dist = chord_distances(inertias)[1:-1]
    best = 0
    for i in range(1, len(dist)):
        if dist[i] > dist[best] + 1e-12:
            best = i
    return int(k_values[best + 1])


@dataclass
class ClusterSpec:
    cluster_id: int
    year_min: int
    year_max: int
    n_articles: int
    n_online_mentions: int
    n_active: int
    contiguous: bool = True


@dataclass
class YearClustering:
    specs: list[ClusterSpec]
    article_cluster: dict[str, int]
    year_cluster: dict[int, int]
    elbow: ElbowResult | None
    kmeans: KMeansModel
    points: np.ndarray
    warnings: list[str] = field(default_factory=list)


def year_points(years: np.ndarray, totals: np.ndarray, with_year: bool = False) -> np.ndarray:
    """Clustering features: min-max scaled yearly totals (and scaled year)."""
    def scale(v):
        v = np.asarray(v, dtype=float)
        span = v.max() - v.min()
        return (v - v.min()) / span if span > 0 else np.zeros_like(v)

    cols = [scale(totals)]
    if with_year:
        cols.append(scale(years))
    return np.column_stack(cols)


def assign_year_clusters(
    records: Sequence[ArticleRecord],
    longevity: Sequence[LongevityRecord],
    k: int | None = None,
    k_max: int = 10,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
    with_year: bool = False,
) -> YearClustering:
    """Cluster publication years by their total online mentions.

    ``k`` fixes the number of clusters; otherwise it is chosen by elbow
    detection over k = 1..k_max. Clusters are renumbered 1..k by their first
    year and every article inherits its publication year's cluster.
    """
    if not records:
        raise ValueError("no records to cluster")
    series = yearly_series(records)
    years = series.years
    points = year_points(years, series.total_mentions, with_year)
    elbow = None
    if k is None:
        k_max = min(k_max, len(points))
        elbow = inertia_curve(points, k_max, seed, restarts, max_iter)
        elbow.chosen_k = detect_elbow(elbow)
        model = elbow.models[elbow.chosen_k - 1]
    else:
        model = lloyd_kmeans(points, k, seed, restarts, max_iter)

    raw = model.assignments
    first_year = {}
    for year, c in zip(years, raw):
        first_year.setdefault(int(c), int(year))
    order = sorted(first_year, key=first_year.get)
    relabel = {c: i + 1 for i, c in enumerate(order)}
    year_cluster = {int(y): relabel[int(c)] for y, c in zip(years, raw)}

    active = {row.article_id for row in longevity if row.active}
    specs = []
    warnings = []
    for cid in range(1, len(order) + 1):
        ys = sorted(y for y, c in year_cluster.items() if c == cid)
        contiguous = ys == list(range(ys[0], ys[-1] + 1))
        if not contiguous:
            warnings.append(f"cluster {cid} covers non-contiguous years")
        specs.append(ClusterSpec(cid, ys[0], ys[-1], 0, 0, 0, contiguous))
    article_cluster = {}
    for r in records:
        cid = year_cluster[r.publication_year]
        article_cluster[r.article_id] = cid
        spec = specs[cid - 1]
        spec.n_articles += 1
        spec.n_online_mentions += r.total_mentions
        spec.n_active += r.article_id in active
    for w in warnings:
        log.warning(w)
    return YearClustering(specs, article_cluster, year_cluster, elbow, model, points, warnings)
