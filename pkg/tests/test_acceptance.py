"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json
import time

import numpy as np
import pytest

from criteria import criterion
from onlineage.clustering import detect_elbow, inertia_curve, lloyd_kmeans
from onlineage.evaluation import (
    classification_metrics,
    gini_importance,
    regression_metrics,
    roc_auc,
)
from onlineage.longevity import first_last_mention, is_active, online_age
from onlineage.models.base import CLASSIFICATION, REGRESSION
from onlineage.models.forest import fit_random_forest
from onlineage.models.linear import fit_linear_regression
from onlineage.models.mlp import fit_mlp_regressor
from onlineage.models.preprocessing import apply_standardizer, fit_standardizer
from onlineage.models.tree import fit_decision_tree
from onlineage.pipeline import STAGES, load_config, run_pipeline, run_stage
from onlineage.synth import (
    SynthConfig,
    generate_corpus,
    generate_planted_clusters,
    generate_planted_supervised,
    write_corpus,
)
from onlineage.tables import file_digest, read_table
from oracles import (
    brute_active,
    confusion_report,
    exhaustive_kmeans,
    flattened_bounds,
    month_index_age,
    pairwise_auc,
)
from strategies import dense_event_record, random_dated_record
from test_evaluation import FIXED_CASES
from test_mlp_logistic_nb import logistic_gradient_error, mlp_gradient_error
from test_tree_forest import exhaustive_root_split, random_small

# tree-family models fitted anywhere in this module, for the importance-sum check
FITTED_TREES = []


def test_criterion_01_online_age_oracle():
    with criterion(1, "online age oracle") as c:
        rng = np.random.default_rng(2024)
        records = [random_dated_record(rng, i) for i in range(1000)]
        t0 = time.perf_counter()
        got = []
        for r in records:
            first, last = first_last_mention(r)
            got.append((first, last, online_age(first, last)))
        elapsed = time.perf_counter() - t0
        mismatches = 0
        for r, (first, last, age) in zip(records, got):
            expected = flattened_bounds(dict(enumerate(r.first_seen)),
                                        dict(enumerate(r.last_seen)), list(r.events))
            if (first, last) != expected or age != month_index_age(*expected):
                mismatches += 1
        c.expect(mismatches == 0, f"{mismatches}/1000 mismatches")
        c.expect(elapsed < 1.0, f"runtime {elapsed:.3f}s < 1s")


def test_criterion_02_active_filter_oracle():
    with criterion(2, "active-filter oracle") as c:
        rng = np.random.default_rng(2025)
        records = [random_dated_record(rng, i, with_events=True) if i % 2 else
                   dense_event_record(rng, i) for i in range(500)]
        mismatches, monotone_breaks = 0, 0
        n_active = np.zeros(5, dtype=int)
        for r in records:
            flags = [is_active(r, 2018, m) for m in range(1, 6)]
            n_active += flags
            for m, flag in zip(range(1, 6), flags):
                mismatches += flag != brute_active(list(r.events), 2018, m)
            monotone_breaks += any(b and not a for a, b in zip(flags, flags[1:]))
        c.expect(mismatches == 0, f"{mismatches} mismatches over 500 records x m=1..5")
        c.expect(monotone_breaks == 0, f"{monotone_breaks} monotonicity breaks")
        c.expect(n_active[2] > 0, f"active counts for m=1..5: {n_active.tolist()}")


def _kmeans_instances():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(3, 9))
        d = int(rng.integers(1, 3))
        k = int(rng.integers(1, 4))
        yield rng.normal(size=(n, d)) * rng.uniform(0.5, 5.0), k, int(rng.integers(1 << 30))


def test_criterion_03_kmeans_small_n_optimal():
    with criterion(3, "k-means exhaustive optimum") as c:
        instances = list(_kmeans_instances())
        t0 = time.perf_counter()
        models = [lloyd_kmeans(x, k, seed=s, restarts=10) for x, k, s in instances]
        elapsed = time.perf_counter() - t0
        misses = sum(
            not np.isclose(m.inertia, exhaustive_kmeans(x, k), rtol=1e-9, atol=1e-12)
            for m, (x, k, _) in zip(models, instances)
        )
        rises = sum(
            np.any(np.diff(h) > 1e-12 * max(h[0], 1.0))
            for m in models for h in m.run_histories
        )
        n_runs = sum(len(m.run_histories) for m in models)
        c.expect(misses == 0, f"{misses}/100 above exhaustive minimum")
        c.expect(rises == 0 and n_runs >= 1000, f"{rises} of {n_runs} runs with an inertia rise")
        c.expect(elapsed < 10, f"runtime {elapsed:.2f}s < 10s")


def test_criterion_04_elbow_recovery():
    with criterion(4, "elbow recovers k=3") as c:
        hits = 0
        for trial in range(100):
            x, _ = generate_planted_clusters(3, 30, separation=10.0, seed=trial)
            hits += detect_elbow(inertia_curve(x, 10, seed=trial)) == 3
        c.expect(hits >= 95, f"{hits}/100 trials >= 95")


def test_criterion_05_ols_exact():
    with criterion(5, "OLS exactness") as c:
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 3))
        beta = np.array([2.5, -1.25, 0.75])
        y = X @ beta + 4.0
        m = fit_linear_regression(X, y)
        err = max(np.max(np.abs(m.weights - beta)), abs(m.intercept - 4.0))
        r2 = regression_metrics(y, m.predict(X)).r_squared
        c.expect(err <= 1e-6, f"coef error {err:.2e} <= 1e-6")
        c.expect(abs(r2 - 1) <= 1e-9, f"|R2-1| = {abs(r2 - 1):.2e} <= 1e-9")


def test_criterion_06_cart_root_oracle():
    with criterion(6, "CART root split oracle") as c:
        rng = np.random.default_rng(66)
        bad = 0
        for i in range(100):
            classify = i % 2 == 0
            X, y = random_small(rng, classify, integer=bool(i % 4 < 2))
            task = CLASSIFICATION if classify else REGRESSION
            tree = fit_decision_tree(X, y, task, max_depth=1)
            FITTED_TREES.append(tree)
            expected = exhaustive_root_split(X, y, classify)
            if expected is None:
                bad += tree.n_nodes != 1
                continue
            f, t, gain = expected
            bad += not (tree.feature[0] == f and tree.threshold[0] == t
                        and abs(tree.gain[0] - float(gain)) <= 1e-12)
        c.expect(bad == 0, f"{bad}/100 differ from oracle (gain compared within 1e-12)")


def test_criterion_07_gradient_checks():
    with criterion(7, "gradient checks") as c:
        mlp = [e for e in (mlp_gradient_error(s) for s in range(40)) if e is not None]
        logit = [logistic_gradient_error(s) for s in range(20)]
        c.expect(len(mlp) >= 10, f"{len(mlp)} usable MLP instances")
        c.expect(max(mlp) < 1e-4, f"MLP max rel err {max(mlp):.2e} < 1e-4")
        c.expect(max(logit) < 1e-5, f"logistic max rel err {max(logit):.2e} < 1e-5")


def test_criterion_08_planted_signal():
    with criterion(8, "planted-signal learning") as c:
        t0 = time.perf_counter()
        data, _ = generate_planted_supervised(5000, relation="threshold", seed=81)
        tr, te = slice(0, 4000), slice(4000, None)
        forest = fit_random_forest(data.X[tr], data.y[tr], CLASSIFICATION, n_trees=100, seed=0)
        FITTED_TREES.append(forest)
        acc = classification_metrics(data.y[te], forest.predict(data.X[te])).accuracy
        imp = gini_importance(forest)
        patent = data.feature_names.index("patent")

        reg, _ = generate_planted_supervised(5000, relation="smooth", noise=0.5, seed=82)
        sc = fit_standardizer(reg.X[tr])
        mlp = fit_mlp_regressor(apply_standardizer(sc, reg.X[tr]), reg.y[tr], seed=0)
        r2 = regression_metrics(reg.y[te], mlp.predict(apply_standardizer(sc, reg.X[te]))).r_squared

        rforest = fit_random_forest(reg.X[tr], reg.y[tr], REGRESSION, n_trees=50, seed=0)
        FITTED_TREES.append(rforest)
        rimp = gini_importance(rforest)
        elapsed = time.perf_counter() - t0

        c.expect(acc >= 0.95, f"forest accuracy {acc:.4f} >= 0.95")
        c.expect(r2 >= 0.9, f"MLP R2 {r2:.4f} >= 0.9")
        for name, w in (("classifier", imp.weights), ("regressor", rimp.weights)):
            c.expect(int(np.argmax(w)) == patent and w[patent] > 0.5,
                     f"{name} importance patent first, weight {w[patent]:.3f} > 0.5")
        c.expect(elapsed < 120, f"runtime {elapsed:.1f}s < 120s")


def test_criterion_09_metric_oracles():
    with criterion(9, "metric oracles") as c:
        bad = 0
        for y, y_hat in FIXED_CASES:
            m = classification_metrics(y, y_hat)
            e = confusion_report(y, y_hat)
            bad += not all(abs(a - b) <= 1e-12 for a, b in (
                (m.weighted_precision, e["precision"]), (m.weighted_recall, e["recall"]),
                (m.weighted_f1, e["f1"])))
        c.expect(bad == 0 and len(FIXED_CASES) == 20, f"{bad}/{len(FIXED_CASES)} fixed cases off")

        rng = np.random.default_rng(9)
        off = 0
        for _ in range(1000):
            n = int(rng.integers(1, 60))
            y, y_hat = rng.integers(0, 2, n), rng.integers(0, 2, n)
            m = classification_metrics(y, y_hat)
            off += m.weighted_recall != m.accuracy
        c.expect(off == 0, f"weighted recall != accuracy in {off}/1000")

        worst = 0.0
        for n in range(2, 201, 3):
            y = rng.integers(0, 2, n)
            y[:2] = (0, 1)
            s = rng.integers(0, max(2, n // 4), n) / 7.0
            worst = max(worst, abs(roc_auc(y, s).auc - pairwise_auc(y, s)))
        c.expect(worst <= 1e-12, f"max |AUC - pair statistic| {worst:.1e} <= 1e-12")

        # a few more tree-family fits on top of those from criteria 6 and 8
        data, _ = generate_planted_supervised(300, ("patent", "news"), "linear", noise=2.0, seed=9)
        FITTED_TREES.append(fit_decision_tree(data.X, data.y, REGRESSION, max_depth=5))
        FITTED_TREES.append(fit_random_forest(data.X, data.y, REGRESSION, n_trees=20, seed=3))
        lab = (data.y > np.median(data.y)).astype(float)
        FITTED_TREES.append(fit_decision_tree(data.X, lab, CLASSIFICATION, min_samples_leaf=5))
        FITTED_TREES.append(fit_random_forest(data.X, lab, CLASSIFICATION, n_trees=20, seed=4))
        sums = [gini_importance(t).weights.sum() for t in FITTED_TREES]
        dev = max(abs(s - 1) for s in sums)
        c.expect(dev <= 1e-9, f"{len(sums)} tree-family importances sum to 1 (max dev {dev:.1e})")


# end-to-end ------------------------------------------------------------------

def _report_digests(root):
    return {p.relative_to(root).as_posix(): file_digest(p)
            for p in sorted((root / "report").rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def e2e(tmp_path_factory):
    base = tmp_path_factory.mktemp("e2e")
    scfg = SynthConfig(n_articles=10_000, seed=0)
    corpus = write_corpus(base / "corpus", *generate_corpus(scfg), scfg)
    times = {}
    for name in ("runA", "runB"):
        t0 = time.perf_counter()
        run_pipeline(load_config(None, input=corpus, out=base / name, seed=0))
        times[name] = time.perf_counter() - t0
    return base, corpus, times


def test_criterion_10_end_to_end(e2e):
    base, _, times = e2e
    with criterion(10, "end-to-end run") as c:
        a = base / "runA"
        c.expect(times["runA"] < 300, f"runtime {times['runA']:.1f}s < 300s")
        clusters = read_table(a / "report" / "clusters.csv")
        c.expect(len(clusters) == 3, f"{len(clusters)} clusters")
        reg = read_table(a / "report" / "regression_results.csv")
        clf = read_table(a / "report" / "classification_results.csv")
        for s in clusters:
            cid = s["cluster"]
            n_reg = sorted(r["model"] for r in reg if r["cluster"] == cid)
            n_clf = sorted(r["model"] for r in clf if r["cluster"] == cid)
            c.expect(len(n_reg) == 4 and len(n_clf) == 4,
                     f"cluster {cid}: {len(n_reg)} regression + {len(n_clf)} classification")
        c.expect(len([r for r in reg if r["cluster"] == "all"]) == 4, "whole-data regression x4")
        expected = ["regression_results", "classification_results", "clusters", "medians",
                    "summary", "growth", "platform_shares", "elbow"]
        missing = [n for n in expected for ext in (".csv", ".json")
                   if not (a / "report" / (n + ext)).exists()]
        c.expect(not missing, f"report tables present (missing {missing})")
        c.expect(_report_digests(a) == _report_digests(base / "runB"),
                 "rerun report directory byte-identical")


def test_criterion_11_stage_slices(e2e):
    base, corpus, _ = e2e
    with criterion(11, "stage-slice equivalence") as c:
        cfg = load_config(None, input=corpus, out=base / "runC", seed=0)
        for stage in STAGES:
            run_stage(cfg, stage)
        whole = json.loads((base / "runA" / "manifest.json").read_text())["stages"]
        sliced = json.loads((base / "runC" / "manifest.json").read_text())["stages"]
        differ = [s for s in STAGES if whole[s]["outputs"] != sliced[s]["outputs"]]
        n_files = sum(len(whole[s]["outputs"]) for s in STAGES)
        c.expect(not differ, f"{n_files} artifact digests compared, differing stages {differ}")
