"""Stage orchestration: ingest -> metrics -> cluster -> train -> evaluate -> report.

Each stage reads the artifacts of earlier stages from the run directory and
writes its own, so stages can be run one at a time or all at once with the
same results. Randomness for a stage comes from ``derive_seed(run_seed,
stage)``. ``manifest.json`` records the config, per-stage seeds, input and
output digests and timings.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
import logging
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from onlineage import __version__
from onlineage.clustering import (
    ClusterSpec,
    assign_year_clusters,
    chord_distances,
    inertia_curve,
)
from onlineage.evaluation import (
    classification_metrics,
    gini_importance,
    leading_features,
    regression_metrics,
    roc_auc,
    top_k_features,
)
from onlineage.ingest import RecordError, load_corpus, read_records, write_records
from onlineage.longevity import (
    LongevityRecord,
    longevity_table,
    median_threshold_labels,
    platform_share_matrix,
    yearly_series,
)
from onlineage.models.base import CLASSIFICATION, REGRESSION, Dataset
from onlineage.models.persistence import ModelFormatError, load_model, save_model
from onlineage.models.preprocessing import train_test_split
from onlineage.models.selection import (
    CLASSIFICATION_MODELS,
    FAMILIES,
    REGRESSION_MODELS,
    kfold_grid_search,
)
from onlineage.platforms import N_PLATFORMS, PLATFORMS
from onlineage.rng import derive_seed
from onlineage.tables import file_digest, read_table, write_json, write_table

log = logging.getLogger(__name__)

STAGES = ("ingest", "metrics", "cluster", "train", "evaluate", "report")
TREE_FAMILIES = ("tree_reg", "forest_reg", "tree_clf", "forest_clf")


class PipelineError(Exception):
    exit_code = 4


class ConfigError(PipelineError):
    exit_code = 2


class DataError(PipelineError):
    exit_code = 3


class DependencyError(DataError):
    pass


@dataclass
class RunConfig:
    input: Path | None = None
    out: Path = Path("run")
    seed: int = 0
    pub_start: int = 1920
    pub_end: int = 2016
    horizon: int = 2018
    min_platforms: int = 3
    k: int | None = None
    k_max: int = 10
    restarts: int = 10
    cluster_with_year: bool = False
    models: tuple[str, ...] = REGRESSION_MODELS + CLASSIFICATION_MODELS
    grids: dict = field(default_factory=dict)
    split_ratio: float = 0.8
    folds: int = 5
    min_group_size: int = 30

    def validate(self) -> None:
        if self.pub_start > self.pub_end:
            raise ConfigError(f"pub_start {self.pub_start} is after pub_end {self.pub_end}")
        if self.min_platforms < 1:
            raise ConfigError("min_platforms must be >= 1")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.k is None and self.k_max < 3:
            raise ConfigError("k_max must be >= 3 for elbow detection")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if not 0 < self.split_ratio < 1:
            raise ConfigError("split_ratio must lie in (0, 1)")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        unknown = [m for m in self.models if m not in FAMILIES]
        if unknown:
            raise ConfigError(f"unknown model(s) {unknown}; choose from {sorted(FAMILIES)}")
        for name, grid in self.grids.items():
            if name not in FAMILIES:
                raise ConfigError(f"grid given for unknown model {name!r}")
            if any(len(v) == 0 for v in grid.values()):
                raise ConfigError(f"empty grid list for {name}")

    def grid_for(self, family: str) -> dict:
        grid = dict(FAMILIES[family].grid)
        grid.update(self.grids.get(family, {}))
        return grid

    def echo(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Path):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


# config file ---------------------------------------------------------------

_INT_KEYS = {"seed", "pub_start", "pub_end", "horizon", "min_platforms", "k_max",
             "restarts", "folds", "min_group_size"}


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _parse_bool(key, text) -> bool:
    v = _parse_scalar(str(text))
    if isinstance(v, bool):
        return v
    if v in (0, 1):
        return bool(v)
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def parse_config_text(text: str, base_dir: Path | None = None) -> dict:
    """Parse ``key = value`` lines into RunConfig keyword overrides.

    ``#`` starts a comment. ``models`` takes a comma list. Grid entries use
    ``grid.<model>.<param> = v1, v2``. Relative paths resolve against
    ``base_dir``.
    """
    values: dict = {}
    grids: dict = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key.startswith("grid."):
                parts = key.split(".")
                if len(parts) != 3:
                    raise ConfigError(f"config line {n}: grid keys look like grid.model.param")
                items = [_parse_scalar(v.strip()) for v in value.split(",")]
                grids.setdefault(parts[1], {})[parts[2]] = items
            elif key in ("input", "out"):
                p = Path(value)
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                values[key] = p
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key == "k":
                values[key] = None if value.lower() in ("none", "auto", "") else int(value)
            elif key == "split_ratio":
                values[key] = float(value)
            elif key == "cluster_with_year":
                values[key] = _parse_bool(key, value)
            elif key == "models":
                values[key] = tuple(m.strip() for m in value.split(",") if m.strip())
            else:
                raise ConfigError(f"config line {n}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"config line {n}: {exc}") from None
    if grids:
        values["grids"] = grids
    return values


def load_config(path=None, **overrides) -> RunConfig:
    """File values first, then non-None keyword overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values.update(parse_config_text(text, path.parent))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if "input" in values and values["input"] is not None:
        values["input"] = Path(values["input"])
    if "out" in values:
        values["out"] = Path(values["out"])
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# manifest -------------------------------------------------------------------

class Run:
    """The run directory and its manifest."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.root = Path(config.out)
        self.manifest_path = self.root / "manifest.json"

    def path(self, *parts) -> Path:
        return self.root.joinpath(*parts)

    def rel(self, p: Path) -> str:
        return Path(p).relative_to(self.root).as_posix()

    def read_manifest(self) -> dict:
        if self.manifest_path.exists():
            try:
                return json.loads(self.manifest_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                log.warning("ignoring unreadable manifest %s", self.manifest_path)
        return {"tool": "onlineage", "stages": {}}

    def write_manifest(self, manifest: dict) -> None:
        manifest["tool"] = "onlineage"
        manifest["version"] = __version__
        manifest["config"] = self.config.echo()
        write_json(self.manifest_path, manifest)

    def stage_seed(self, stage: str) -> int:
        return derive_seed(self.config.seed, stage)

    def require(self, *paths: Path) -> None:
        """Fail with a dependency error if an upstream artifact is missing or
        differs from what the manifest recorded for it."""
        manifest = self.read_manifest()
        recorded = {}
        for info in manifest.get("stages", {}).values():
            recorded.update(info.get("outputs", {}))
        for p in paths:
            if not p.exists():
                raise DependencyError(f"missing upstream artifact: {p}")
            rel = self.rel(p)
            if rel in recorded and recorded[rel] != file_digest(p):
                raise DependencyError(f"stale upstream artifact (digest changed): {p}")


# shared artifact readers ------------------------------------------------------

def _records_path(run):
    return run.path("ingest", "records.jsonl")


def _load_records(run):
    path = _records_path(run)
    run.require(path)
    try:
        return read_records(path)
    except RecordError as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_longevity(run) -> list[LongevityRecord]:
    path = run.path("metrics", "longevity.csv")
    run.require(path)
    rows = []
    for r in read_table(path):
        rows.append(LongevityRecord(
            r["article_id"],
            dt.date.fromisoformat(r["first_online_mention"]),
            dt.date.fromisoformat(r["last_online_mention"]),
            int(r["online_age_months"]),
            r["active"] == "1",
        ))
    return rows


def _load_clusters(run):
    specs_path = run.path("cluster", "clusters.csv")
    art_path = run.path("cluster", "article_clusters.csv")
    run.require(specs_path, art_path)
    specs = [
        ClusterSpec(int(r["cluster"]), int(r["year_min"]), int(r["year_max"]),
                    int(r["n_articles"]), int(r["n_online_mentions"]), int(r["n_active"]),
                    r["contiguous"] == "1")
        for r in read_table(specs_path)
    ]
    article_cluster = {r["article_id"]: int(r["cluster"]) for r in read_table(art_path)}
    return specs, article_cluster


@dataclass
class Group:
    name: str  # "all" or the cluster id as text
    task: str
    dataset: Dataset | None  # None when the group has no active articles
    article_ids: list[str]
    median: float | None = None


def build_groups(records, longevity, specs, article_cluster, config: RunConfig) -> list[Group]:
    """Training sets over active articles: whole-data regression plus, per
    cluster, regression on Online Age and classification on the median label."""
    age = {row.article_id: row.online_age_months for row in longevity if row.active}
    active = [r for r in records if r.article_id in age]
    groups = []

    def make(name, members, task, y):
        if not members:
            return Group(name, task, None, [])
        X = np.array([r.counts for r in members], dtype=float).reshape(len(members), N_PLATFORMS)
        return Group(name, task, Dataset(X, np.asarray(y, dtype=float), task, name),
                     [r.article_id for r in members])

    if any(FAMILIES[m].task == REGRESSION for m in config.models):
        groups.append(make("all", active, REGRESSION, [age[r.article_id] for r in active]))
    for spec in specs:
        members = [r for r in active if article_cluster[r.article_id] == spec.cluster_id]
        name = str(spec.cluster_id)
        ages = [age[r.article_id] for r in members]
        groups.append(make(name, members, REGRESSION, ages))
        if members:
            labeling = median_threshold_labels(ages)
            g = make(name, members, CLASSIFICATION, labeling.labels)
            g.median = labeling.median_months
        else:
            g = make(name, members, CLASSIFICATION, [])
        groups.append(g)
    return groups


def _trainable(group: Group, config: RunConfig) -> str | None:
    """Reason the group cannot be trained, or None."""
    n = len(group.article_ids)
    if n < max(config.min_group_size, 5):
        return f"only {n} active articles (minimum {config.min_group_size})"
    if group.task == CLASSIFICATION:
        counts = np.bincount(group.dataset.y.astype(np.int64), minlength=2)
        need = int(np.ceil(config.folds / config.split_ratio)) + 1
        if counts.min() < need:
            return f"class sizes {counts.tolist()} too small for {config.folds}-fold search"
    return None


def _group_models(group: Group, config: RunConfig) -> list[str]:
    return [m for m in config.models if FAMILIES[m].task == group.task]


def _tag(group_name: str) -> str:
    return "all" if group_name == "all" else f"c{group_name}"


def _split_for(group: Group, seed: int, ratio: float):
    stratify = group.dataset.y if group.task == CLASSIFICATION else None
    return train_test_split(len(group.dataset), ratio, derive_seed(seed, group.name, group.task),
                            stratify)


def _params_text(params: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in params.items()) or "default"


# stages ---------------------------------------------------------------------

def stage_ingest(run: Run, seed: int) -> tuple[list[Path], list[Path], dict]:
    cfg = run.config
    if cfg.input is None:
        raise ConfigError("no input file given")
    src = Path(cfg.input)
    records, stats = load_corpus(src, (cfg.pub_start, cfg.pub_end))
    out_records = _records_path(run)
    write_records(out_records, records)
    info = stats.as_dict()
    out_stats = write_json(run.path("ingest", "stats.json"), info)
    log.info("ingest: kept %d of %d records (%d malformed, %d outside window)",
             stats.n_kept, stats.n_total, stats.n_malformed, stats.n_dropped_window)
    return [src], [out_records, out_stats], {}


def stage_metrics(run: Run, seed: int):
    cfg = run.config
    records = _load_records(run)
    rows = longevity_table(records, cfg.horizon, cfg.min_platforms)
    out = []
    out.append(write_table(
        run.path("metrics", "longevity.csv"),
        ["article_id", "first_online_mention", "last_online_mention", "online_age_months", "active"],
        [(r.article_id, r.first_online_mention.isoformat(), r.last_online_mention.isoformat(),
          r.online_age_months, r.active) for r in rows],
    ))
    window = (cfg.pub_start, cfg.pub_end)
    series = yearly_series(records, window)
    out.append(write_table(
        run.path("metrics", "yearly_series.csv"),
        ["year", "published", "with_dates", "total_mentions"],
        list(series.rows()),
    ))
    shares = platform_share_matrix(records, window)
    out.append(write_table(
        run.path("metrics", "platform_shares.csv"),
        ["year", *PLATFORMS],
        [(int(y), *row) for y, row in zip(shares.years, shares.shares)],
    ))
    out.append(write_table(
        run.path("metrics", "platform_counts.csv"),
        ["year", *PLATFORMS],
        [(int(y), *row) for y, row in zip(shares.years, shares.raw_counts)],
    ))
    n_active = sum(r.active for r in rows)
    log.info("metrics: %d dated articles, %d active", len(rows), n_active)
    outputs = []
    for p in out:
        outputs += [p, p.with_suffix(".json")]
    return [_records_path(run)], outputs, {"n_dated": len(rows), "n_active": n_active}


def stage_cluster(run: Run, seed: int):
    cfg = run.config
    records = _load_records(run)
    longevity = _load_longevity(run)
    if not records:
        raise DataError("no records to cluster")
    result = assign_year_clusters(records, longevity, k=cfg.k, k_max=cfg.k_max, seed=seed,
                                  restarts=cfg.restarts, with_year=cfg.cluster_with_year)
    elbow = result.elbow
    if elbow is None and len(result.points) >= 3:
        # a fixed k still gets the curve as plot data
        elbow = inertia_curve(result.points, min(cfg.k_max, len(result.points)), seed, cfg.restarts)
        elbow.chosen_k = cfg.k
    written = []
    written.append(write_table(
        run.path("cluster", "clusters.csv"),
        ["cluster", "year_min", "year_max", "n_articles", "n_online_mentions", "n_active",
         "contiguous"],
        [(s.cluster_id, s.year_min, s.year_max, s.n_articles, s.n_online_mentions, s.n_active,
          s.contiguous) for s in result.specs],
    ))
    if elbow is not None:
        dist = chord_distances(elbow.inertias)
        written.append(write_table(
            run.path("cluster", "elbow.csv"),
            ["k", "inertia", "chord_distance", "chosen"],
            [(int(k), float(i), float(d), int(k) == elbow.chosen_k)
             for k, i, d in zip(elbow.k_values, elbow.inertias, dist)],
        ))
    years = sorted(result.year_cluster)
    written.append(write_table(
        run.path("cluster", "year_clusters.csv"),
        ["year", "point", "cluster"],
        [(y, float(result.points[i, 0]), result.year_cluster[y]) for i, y in enumerate(years)],
    ))
    written.append(write_table(
        run.path("cluster", "article_clusters.csv"),
        ["article_id", "publication_year", "cluster"],
        [(r.article_id, r.publication_year, result.article_cluster[r.article_id]) for r in records],
        mirror=False,
    ))
    outputs = []
    for p in written:
        outputs.append(p)
        if p.with_suffix(".json").exists() and p.name != "article_clusters.csv":
            outputs.append(p.with_suffix(".json"))
    log.info("cluster: k=%d, clusters %s", len(result.specs),
             [(s.year_min, s.year_max) for s in result.specs])
    info = {"k": len(result.specs), "warnings": result.warnings}
    return ([_records_path(run), run.path("metrics", "longevity.csv")], outputs, info)


def _cluster_inputs(run):
    return [_records_path(run), run.path("metrics", "longevity.csv"),
            run.path("cluster", "clusters.csv"), run.path("cluster", "article_clusters.csv")]


def _load_groups(run):
    records = _load_records(run)
    longevity = _load_longevity(run)
    specs, article_cluster = _load_clusters(run)
    return specs, build_groups(records, longevity, specs, article_cluster, run.config)


def stage_train(run: Run, seed: int):
    cfg = run.config
    specs, groups = _load_groups(run)
    outputs = []
    plan = []
    cv_rows = []
    median_rows = []
    by_id = {str(s.cluster_id): s for s in specs}
    for group in groups:
        if group.task == CLASSIFICATION and group.name in by_id:
            s = by_id[group.name]
            n1 = int(group.dataset.y.sum()) if group.dataset is not None else 0
            median_rows.append((s.cluster_id, s.year_min, s.year_max, len(group.article_ids),
                                group.median, n1))
        families = _group_models(group, cfg)
        if not families:
            continue
        reason = _trainable(group, cfg)
        entry = {"group": group.name, "task": group.task, "n": len(group.article_ids),
                 "models": [], "skipped": reason}
        plan.append(entry)
        if reason:
            log.warning("skipping %s %s: %s", group.task, _tag(group.name), reason)
            continue
        split = _split_for(group, seed, cfg.split_ratio)
        split_path = write_json(run.path("train", "splits", f"{_tag(group.name)}_{group.task}.json"), {
            "group": group.name, "task": group.task, "seed": int(split.seed),
            "train": [group.article_ids[i] for i in split.train],
            "test": [group.article_ids[i] for i in split.test],
        })
        outputs.append(split_path)
        train = group.dataset.subset(split.train)
        for family in families:
            t0 = time.perf_counter()
            fam_seed = derive_seed(seed, group.name, family)
            cv = kfold_grid_search(family, cfg.grid_for(family), train, cfg.folds, fam_seed)
            path = run.path("train", "models", f"{_tag(group.name)}_{family}.json")
            save_model(cv.model, path)
            outputs.append(path)
            entry["models"].append(family)
            for i, combo in enumerate(cv.combos):
                cv_rows.append((group.name, family, _params_text(combo), float(cv.mean_scores[i]),
                                float(np.std(cv.fold_scores[i])), i == cv.best_index))
            log.info("train %s %s: best %s (%.1fs)", _tag(group.name), family,
                     _params_text(cv.best_params), time.perf_counter() - t0)
    medians = write_table(
        run.path("train", "medians.csv"),
        ["cluster", "year_min", "year_max", "n_active", "median_months", "n_label_1"],
        median_rows,
    )
    cvp = write_table(
        run.path("train", "cv_results.csv"),
        ["group", "model", "params", "mean_score", "std_score", "chosen"],
        cv_rows,
    )
    planp = write_json(run.path("train", "plan.json"), plan)
    outputs += [medians, medians.with_suffix(".json"), cvp, cvp.with_suffix(".json"), planp]
    return _cluster_inputs(run), outputs, {}


def stage_evaluate(run: Run, seed: int):
    cfg = run.config
    plan_path = run.path("train", "plan.json")
    run.require(plan_path)
    plan = json.loads(plan_path.read_text(encoding="utf-8"))
    specs, groups = _load_groups(run)
    lookup = {(g.name, g.task): g for g in groups}
    inputs = _cluster_inputs(run) + [plan_path]
    reg_rows, clf_rows = [], []
    written = []
    for entry in plan:
        if entry["skipped"]:
            continue
        group = lookup.get((entry["group"], entry["task"]))
        if group is None:
            raise DependencyError(f"plan.json names group {entry['group']!r} that no longer exists")
        tag = _tag(group.name)
        split_path = run.path("train", "splits", f"{tag}_{group.task}.json")
        run.require(split_path)
        inputs.append(split_path)
        split = json.loads(split_path.read_text(encoding="utf-8"))
        pos = {a: i for i, a in enumerate(group.article_ids)}
        try:
            train_idx = np.array([pos[a] for a in split["train"]], dtype=np.int64)
            test_idx = np.array([pos[a] for a in split["test"]], dtype=np.int64)
        except KeyError as exc:
            raise DependencyError(f"{split_path} names unknown article {exc}") from None
        X_test = group.dataset.X[test_idx]
        y_test = group.dataset.y[test_idx]
        for family in entry["models"]:
            path = run.path("train", "models", f"{tag}_{family}.json")
            run.require(path)
            inputs.append(path)
            try:
                model = load_model(path)
            except (ModelFormatError, KeyError, ValueError) as exc:
                raise DataError(f"{path}: {exc}") from None
            label = FAMILIES[family].label
            params = _params_text(model.params)
            if group.task == REGRESSION:
                m = regression_metrics(y_test, model.predict(X_test))
                reg_rows.append((group.name, family, label, params, len(train_idx),
                                 len(test_idx), m.mae, m.rmse, m.r_squared))
            else:
                m = classification_metrics(y_test, model.predict(X_test))
                auc = float("nan")
                if len(np.unique(y_test)) == 2:
                    roc = roc_auc(y_test, model.predict_score(X_test))
                    auc = roc.auc
                    written.append(write_table(
                        run.path("evaluate", f"roc_{tag}_{family}.csv"),
                        ["threshold", "fpr", "tpr"],
                        list(zip(roc.thresholds, roc.fpr, roc.tpr)),
                    ))
                clf_rows.append((group.name, family, label, params, len(train_idx),
                                 len(test_idx), m.accuracy, m.weighted_precision,
                                 m.weighted_recall, m.weighted_f1, auc, "; ".join(m.flags)))
            if family in TREE_FAMILIES:
                imp = gini_importance(model)
                ranked = top_k_features(imp, N_PLATFORMS)
                written.append(write_table(
                    run.path("evaluate", f"importance_{tag}_{family}.csv"),
                    ["rank", "platform", "weight", "uniform_fallback"],
                    [(i + 1, name, w, imp.uniform_fallback) for i, (name, w) in enumerate(ranked)],
                ))
    written.append(write_table(
        run.path("evaluate", "regression_results.csv"),
        ["cluster", "model", "label", "params", "n_train", "n_test", "mae", "rmse", "r_squared"],
        reg_rows,
    ))
    written.append(write_table(
        run.path("evaluate", "classification_results.csv"),
        ["cluster", "model", "label", "params", "n_train", "n_test", "accuracy",
         "weighted_precision", "weighted_recall", "weighted_f1", "auc", "flags"],
        clf_rows,
    ))
    outputs = []
    for p in written:
        outputs += [p, p.with_suffix(".json")]
    return inputs, outputs, {}


_REPORT_COPIES = [
    (("evaluate", "regression_results.csv"), "regression_results.csv"),
    (("evaluate", "classification_results.csv"), "classification_results.csv"),
    (("cluster", "clusters.csv"), "clusters.csv"),
    (("train", "medians.csv"), "medians.csv"),
    (("metrics", "yearly_series.csv"), "growth.csv"),
    (("metrics", "platform_shares.csv"), "platform_shares.csv"),
]


def _summary_features(run, tag, families) -> str:
    for family in families:
        path = run.path("evaluate", f"importance_{tag}_{family}.csv")
        if path.exists():
            rows = read_table(path)
            weights = np.zeros(N_PLATFORMS)
            for r in rows:
                weights[PLATFORMS.index(r["platform"])] = float(r["weight"])
            return " + ".join(leading_features(weights))
    return ""


def stage_report(run: Run, seed: int):
    inputs, outputs = [], []
    for src_parts, name in _REPORT_COPIES:
        src = run.path(*src_parts)
        run.require(src, src.with_suffix(".json"))
        for s, d in ((src, name), (src.with_suffix(".json"), Path(name).with_suffix(".json").name)):
            dst = run.path("report", d)
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(s, dst)
            inputs.append(s)
            outputs.append(dst)
    optional = [run.path("cluster", "elbow.csv")]
    optional += sorted(run.path("evaluate").glob("importance_*.csv"))
    optional += sorted(run.path("evaluate").glob("roc_*.csv"))
    for src in optional:
        if not src.exists():
            continue
        for s in (src, src.with_suffix(".json")):
            dst = run.path("report", s.name)
            shutil.copyfile(s, dst)
            inputs.append(s)
            outputs.append(dst)
    specs, _ = _load_clusters(run)
    rows = []
    for s in specs:
        tag = _tag(str(s.cluster_id))
        rows.append((s.cluster_id, f"{s.year_min}-{s.year_max}",
                     _summary_features(run, tag, ("forest_reg", "tree_reg")),
                     _summary_features(run, tag, ("forest_clf", "tree_clf"))))
    summary = write_table(
        run.path("report", "summary.csv"),
        ["cluster", "years", "regression_features", "classification_features"],
        rows,
    )
    outputs += [summary, summary.with_suffix(".json")]
    return inputs, outputs, {}


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "metrics": stage_metrics,
    "cluster": stage_cluster,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "report": stage_report,
}


def _digests(run: Run, paths) -> dict:
    out = {}
    for p in paths:
        p = Path(p)
        try:
            key = run.rel(p)
        except ValueError:
            key = str(p)
        out[key] = file_digest(p)
    return dict(sorted(out.items()))


def run_stage(config: RunConfig, stage: str) -> dict:
    """Run one stage and record it in the manifest."""
    if stage not in STAGE_FUNCS:
        raise ConfigError(f"unknown stage {stage!r}")
    run = Run(config)
    if stage == "ingest":
        if config.input is None:
            raise ConfigError("no input file given")
        if not Path(config.input).is_file():
            raise ConfigError(f"input file not found: {config.input}")
    run.root.mkdir(parents=True, exist_ok=True)
    manifest = run.read_manifest()
    manifest.setdefault("stages", {})
    seed = run.stage_seed(stage)
    t0 = time.perf_counter()
    try:
        inputs, outputs, info = STAGE_FUNCS[stage](run, seed)
    except Exception as exc:
        manifest["status"] = "FAILED"
        manifest["failed_stage"] = stage
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        manifest["stages"][stage] = {"seed": seed, "status": "FAILED"}
        run.write_manifest(manifest)
        raise
    # removing a previous record of this stage and everything after it
    for later in STAGES[STAGES.index(stage):]:
        manifest["stages"].pop(later, None)
    manifest["stages"][stage] = {
        "seed": seed,
        "status": "ok",
        "inputs": _digests(run, inputs),
        "outputs": _digests(run, outputs),
        "seconds": round(time.perf_counter() - t0, 3),
        "finished_at": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        **({"info": info} if info else {}),
    }
    manifest["status"] = "ok"
    manifest.pop("failed_stage", None)
    manifest.pop("error", None)
    run.write_manifest(manifest)
    return manifest["stages"][stage]


def run_pipeline(config: RunConfig) -> dict:
    """All stages in order; returns the final manifest."""
    if config.input is None or not Path(config.input).is_file():
        raise ConfigError(f"input file not found: {config.input}")
    for stage in STAGES:
        run_stage(config, stage)
    return Run(config).read_manifest()
