"""Benchmark harness: config parsing, report emission, determinism, audit
of the score dumps, figure files."""

import csv
import json
import os

import numpy as np
import pytest

from survbench.bench import (
    MODEL_ORDER,
    BenchConfig,
    bench_config_from_dict,
    emit_km_figures,
    emit_weight_figure,
    run_benchmark,
    write_text_atomic,
)
from survbench.data import encode
from survbench.datagen import GeneratorConfig, HazardSpec, generate
from survbench.metrics import concordance_index
from survbench.mtlr import fit_mtlr, make_grid
from survbench.nonparametric import fit_km


def small_config(out_dir, models=("cox", "rsf"), **kw):
    opts = {"rsf": {"b": 10, "min_leaf": 10}}
    opts.update(kw.pop("model_options", {}))
    return BenchConfig(
        generator=GeneratorConfig(n=120, seed=5),
        models=tuple(models),
        model_options=opts,
        out_dir=str(out_dir),
        seed=5,
        **kw,
    )


def read_report(out_dir):
    with open(os.path.join(str(out_dir), "report.csv"), newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["model", "train_cindex", "test_cindex", "status", "converged"]
    return {r[0]: r for r in rows[1:]}


def test_config_requires_exactly_one_source(tmp_path):
    with pytest.raises(ValueError, match="exactly one"):
        BenchConfig()
    with pytest.raises(ValueError, match="exactly one"):
        BenchConfig(csv_path="x.csv", generator=GeneratorConfig())


def test_config_validation():
    with pytest.raises(ValueError, match="test_fraction"):
        BenchConfig(generator=GeneratorConfig(), test_fraction=1.0)
    with pytest.raises(ValueError, match="unknown models"):
        BenchConfig(generator=GeneratorConfig(), models=("cox", "gbm"))


def test_config_from_dict_with_generator():
    doc = {
        "input": {
            "generator": {
                "n": 50,
                "hazard": {"kind": "proportional", "beta": [0.5, -0.5]},
                "baseline_rate": 0.1,
            }
        },
        "seed": 9,
        "models": ["cox", "mtlr"],
        "test_fraction": 0.25,
    }
    config = bench_config_from_dict(doc)
    assert config.csv_path is None
    assert config.generator.n == 50
    assert config.generator.seed == 9  # inherited from the top-level seed
    assert config.generator.hazard == HazardSpec("proportional", (0.5, -0.5))
    assert config.models == ("cox", "mtlr")
    assert config.test_fraction == 0.25


def test_config_from_dict_with_csv():
    config = bench_config_from_dict({"input": {"csv": "cohort.csv"}})
    assert config.csv_path == "cohort.csv"
    assert config.generator is None
    assert config.models == tuple(MODEL_ORDER)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config keys"):
        bench_config_from_dict({"input": {"csv": "x.csv"}, "bootstraps": 10})


def test_run_benchmark_small(tmp_path):
    config = small_config(tmp_path / "out")
    report = run_benchmark(config)
    assert [r.name for r in report.rows] == ["cox", "rsf"]
    assert report.all_ok
    assert report.train_n + report.test_n == report.n == 120
    for r in report.rows:
        assert 0.0 <= r.train_cindex <= 1.0
        assert 0.0 <= r.test_cindex <= 1.0
        assert r.wall_time_ms > 0
    rows = read_report(tmp_path / "out")
    assert set(rows) == {"cox", "rsf"}
    assert rows["cox"][3] == "ok"


def test_model_order_is_fixed_regardless_of_request_order(tmp_path):
    config = small_config(tmp_path / "out", models=("rsf", "cox"))
    report = run_benchmark(config)
    assert [r.name for r in report.rows] == ["cox", "rsf"]


def test_scores_csv_audit(tmp_path):
    # the dumped per-record scores must reproduce the reported C-indexes
    out = tmp_path / "out"
    report = run_benchmark(small_config(out))
    reported = {r.name: r for r in report.rows}
    for name in ("cox", "rsf"):
        with open(out / f"scores_{name}.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["split", "index", "time", "event", "score"]
        for split_name, attr in (("train", "train_cindex"), ("test", "test_cindex")):
            sub = [r for r in rows[1:] if r[0] == split_name]
            times = np.array([float(r[2]) for r in sub])
            events = np.array([int(r[3]) for r in sub])
            scores = np.array([float(r[4]) for r in sub])
            recomputed = concordance_index(times, events, scores).cindex
            assert abs(recomputed - getattr(reported[name], attr)) < 1e-12


def test_reruns_are_byte_identical_except_timings(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_benchmark(small_config(out_a))
    run_benchmark(small_config(out_b))
    names_a = sorted(os.listdir(out_a))
    assert names_a == sorted(os.listdir(out_b))
    for name in names_a:
        with open(out_a / name, "rb") as fh:
            blob_a = fh.read()
        with open(out_b / name, "rb") as fh:
            blob_b = fh.read()
        if name == "report.json":
            doc_a, doc_b = json.loads(blob_a), json.loads(blob_b)
            for doc in (doc_a, doc_b):
                for row in doc["rows"]:
                    row.pop("wall_time_ms")
            assert doc_a == doc_b
        else:
            assert blob_a == blob_b, f"{name} differs between reruns"


def test_error_row_is_isolated(tmp_path):
    # a bad option for one model must not take down the others
    out = tmp_path / "out"
    config = small_config(
        out, models=("cox", "mtlr"), model_options={"mtlr": {"l2": 0.0}}
    )
    report = run_benchmark(config)
    by_name = {r.name: r for r in report.rows}
    assert by_name["cox"].status == "ok"
    assert by_name["mtlr"].status.startswith("error:")
    assert not by_name["mtlr"].converged
    assert np.isnan(by_name["mtlr"].test_cindex)
    assert not report.all_ok
    rows = read_report(out)
    assert rows["mtlr"][1] == rows["mtlr"][2] == "nan"
    assert os.path.exists(out / "scores_cox.csv")
    assert not os.path.exists(out / "scores_mtlr.csv")


def test_unknown_model_option_is_reported_per_model(tmp_path):
    config = small_config(
        tmp_path / "out", models=("cox",), model_options={"cox": {"step": 2}}
    )
    report = run_benchmark(config)
    assert "unknown cox options" in report.rows[0].status


def test_report_json_environment(tmp_path):
    out = tmp_path / "out"
    run_benchmark(small_config(out))
    with open(out / "report.json") as fh:
        doc = json.load(fh)
    env = doc["environment"]
    assert env["seed"] == 5
    assert env["n"] == 120
    assert env["train_n"] + env["test_n"] == 120
    assert 0.0 <= env["censoring_rate"] <= 1.0
    assert {row["model"] for row in doc["rows"]} == {"cox", "rsf"}
    assert all(row["wall_time_ms"] >= 0 for row in doc["rows"])


def test_km_figures_match_library_fits(tmp_path):
    out = tmp_path / "out"
    run_benchmark(small_config(out))
    cohort, _ = generate(GeneratorConfig(n=120, seed=5))
    km, _ = fit_km(cohort)
    with open(out / "km_overall.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time", "value"]
    times = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([float(r[1]) for r in rows[1:]])
    assert np.array_equal(times, km.times)
    assert np.array_equal(values, km.values)
    # default grouping covariates
    for name in ("OnlineBehavior", "Gender"):
        assert os.path.exists(out / f"km_{name}.csv")
        assert os.path.exists(out / f"km_{name}.svg")


def test_km_grouped_csv_lists_levels(tmp_path):
    cohort, _ = generate(GeneratorConfig(n=150, seed=2))
    emit_km_figures(cohort, ["Gender"], str(tmp_path))
    with open(tmp_path / "km_Gender.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["group", "time", "value"]
    assert {r[0] for r in rows[1:]} == {"Female", "Male"}


def test_km_numeric_group_uses_median_split(tmp_path):
    cohort, _ = generate(GeneratorConfig(n=150, seed=2))
    emit_km_figures(cohort, ["Age"], str(tmp_path))
    with open(tmp_path / "km_Age.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    labels = {r[0] for r in rows[1:]}
    assert len(labels) == 2
    assert all("Age" in lab and ("<=" in lab or ">" in lab) for lab in labels)


def test_km_figures_unknown_column(tmp_path):
    cohort, _ = generate(GeneratorConfig(n=50, seed=1))
    with pytest.raises(KeyError):
        emit_km_figures(cohort, ["Blood"], str(tmp_path))


def test_weight_figure_lists_every_encoded_column(tmp_path):
    cohort, _ = generate(GeneratorConfig(n=100, seed=4))
    design = encode(cohort, standardize=True)
    model = fit_mtlr(design, make_grid(design, 3), l2=1.0, max_iter=50)
    paths = emit_weight_figure(model, str(tmp_path))
    assert sorted(os.path.basename(p) for p in paths) == ["weights.csv", "weights.svg"]
    with open(tmp_path / "weights.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["variable", "aggregate_weight", "w1", "w2", "w3"]
    assert {r[0] for r in rows[1:]} == set(design.names)
    mags = [abs(float(r[1])) for r in rows[1:]]
    assert mags == sorted(mags, reverse=True)


def test_weights_emitted_only_when_mtlr_runs(tmp_path):
    out = tmp_path / "cox_only"
    run_benchmark(small_config(out, models=("cox",)))
    assert not os.path.exists(out / "weights.csv")
    out2 = tmp_path / "with_mtlr"
    run_benchmark(
        small_config(out2, models=("mtlr",), model_options={"mtlr": {"max_iter": 60}})
    )
    assert os.path.exists(out2 / "weights.csv")
    assert os.path.exists(out2 / "weights.svg")


def test_write_text_atomic_overwrites(tmp_path):
    path = tmp_path / "x.txt"
    write_text_atomic(str(path), "one")
    write_text_atomic(str(path), "two")
    with open(path) as fh:
        assert fh.read() == "two"
    assert os.listdir(tmp_path) == ["x.txt"]


def test_csv_input_round_trip(tmp_path):
    cohort, _ = generate(GeneratorConfig(n=90, seed=8))
    from survbench.data import write_cohort_csv

    csv_path = tmp_path / "cohort.csv"
    write_cohort_csv(cohort, str(csv_path))
    config = BenchConfig(
        csv_path=str(csv_path),
        models=("cox",),
        out_dir=str(tmp_path / "out"),
        seed=8,
    )
    report = run_benchmark(config)
    assert report.all_ok
    assert report.n == 90
