"""Benchmark harness: fit the five models on one cohort, score a held-out
split, emit the comparison report and the survival-curve/weight figures.

Determinism contract: report.csv and every data CSV depend only on the
config (seed included); wall-clock timings are confined to report.json.
All files are written atomically (temp then rename).
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import cox, deepsurv, ksvm, mtlr, rsf
from .data import Cohort, encode, encode_like, ingest_csv, split
from .datagen import GeneratorConfig, HazardSpec, generate
from .metrics import concordance_index
from .nonparametric import fit_km, fit_km_grouped, kaplan_meier
from .rng import derive_seed
from .svg import bar_chart, step_chart

MODEL_ORDER = ["cox", "mtlr", "rsf", "deepsurv", "ksvm"]

# gradient-trained models get standardized designs; trees split raw values
_STANDARDIZE = {"cox": True, "mtlr": True, "rsf": False, "deepsurv": True, "ksvm": True}

_DEFAULT_OPTIONS: dict[str, dict] = {
    "cox": {"max_iter": 100, "tol": 1e-8, "ridge": 0.0},
    "mtlr": {"k": 10, "l2": 1.0, "max_iter": 1000, "tol": 1e-3},
    "rsf": {"b": 200, "mtry": None, "min_leaf": 15, "max_depth": None},
    "deepsurv": {
        "hidden": [32],
        "activation": "relu",
        "dropout_rate": 0.0,
        "epochs": 300,
        "batch_size": 64,
        "learning_rate": 1e-3,
        "l2": 1e-4,
    },
    "ksvm": {
        "kind": "rbf",
        "gamma": None,
        "degree": 3,
        "coef0": 1.0,
        "c": 1.0,
        "max_iter": 30,
        "tol": 1e-3,
        "max_pairs": 10_000,
    },
}


@dataclass(frozen=True)
class BenchConfig:
    csv_path: str | None = None
    generator: GeneratorConfig | None = None
    test_fraction: float = 0.3
    seed: int = 0
    out_dir: str = "bench_out"
    models: tuple[str, ...] = tuple(MODEL_ORDER)
    model_options: dict = field(default_factory=dict)
    km_groups: tuple[str, ...] = ("OnlineBehavior", "Gender")

    def __post_init__(self):
        if (self.csv_path is None) == (self.generator is None):
            raise ValueError("exactly one of csv_path / generator is required")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")
        unknown = set(self.models) - set(MODEL_ORDER)
        if unknown:
            raise ValueError(f"unknown models: {sorted(unknown)}")


@dataclass
class ModelRow:
    name: str
    train_cindex: float
    test_cindex: float
    wall_time_ms: float
    status: str  # "ok" or "error: ..."
    converged: bool


@dataclass
class BenchReport:
    rows: list[ModelRow]
    seed: int
    n: int
    n_events: int
    censoring_rate: float
    train_n: int
    test_n: int

    @property
    def all_ok(self) -> bool:
        return all(r.status == "ok" for r in self.rows)


def bench_config_from_dict(doc: dict) -> BenchConfig:
    doc = dict(doc)
    gen = None
    csv_path = None
    source = doc.pop("input", {})
    if "csv" in source:
        csv_path = source["csv"]
    if "generator" in source:
        g = dict(source["generator"])
        hz = g.pop("hazard", None)
        if hz is not None:
            g["hazard"] = HazardSpec(kind=hz.get("kind", "nonlinear"),
                                     beta=tuple(hz.get("beta", ())))
        g.setdefault("seed", doc.get("seed", 0))
        gen = GeneratorConfig(**g)
    allowed = {f.name for f in fields(BenchConfig)} - {"csv_path", "generator"}
    extra = set(doc) - allowed
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    for key in ("models", "km_groups"):
        if key in doc:
            doc[key] = tuple(doc[key])
    return BenchConfig(csv_path=csv_path, generator=gen, **doc)


def write_text_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt6(v: float) -> str:
    return format(float(v), ".6g")


def _options(config: BenchConfig, name: str) -> dict:
    merged = dict(_DEFAULT_OPTIONS[name])
    overrides = config.model_options.get(name, {})
    unknown = set(overrides) - set(merged)
    if unknown:
        raise ValueError(f"unknown {name} options: {sorted(unknown)}")
    merged.update(overrides)
    return merged


def fit_model(name: str, design, opts: dict, seed: int):
    """Dispatch one model fit; opts follows _DEFAULT_OPTIONS[name]."""
    if name == "cox":
        return cox.fit_cox(design, **opts)
    if name == "mtlr":
        opts = dict(opts)
        grid = mtlr.make_grid(design, opts.pop("k"))
        return mtlr.fit_mtlr(design, grid, **opts)
    if name == "rsf":
        return rsf.fit_forest(design, seed=seed, **opts)
    if name == "deepsurv":
        opts = dict(opts)
        spec = deepsurv.MlpSpec(
            layer_widths=(design.p, *opts.pop("hidden"), 1),
            activation=opts.pop("activation"),
            dropout_rate=opts.pop("dropout_rate"),
            weight_init_seed=derive_seed(seed, 1),
        )
        return deepsurv.fit_deepsurv(design, spec, seed=seed, **opts)
    if name == "ksvm":
        opts = dict(opts)
        kernel = ksvm.KernelSpec(
            kind=opts.pop("kind"),
            gamma=opts.pop("gamma"),
            degree=opts.pop("degree"),
            coef0=opts.pop("coef0"),
        )
        return ksvm.fit_ksvm(design, kernel, seed=seed, **opts)
    raise ValueError(f"unknown model {name!r}")


_RISK_FN = {
    "cox": cox.predict_risk,
    "mtlr": mtlr.mtlr_risk,
    "rsf": rsf.rsf_risk,
    "deepsurv": deepsurv.predict_log_risk,
    "ksvm": ksvm.ksvm_risk,
}

_TO_DICT = {
    "cox": cox.cox_to_dict,
    "mtlr": mtlr.mtlr_to_dict,
    "rsf": rsf.forest_to_dict,
    "deepsurv": deepsurv.deepsurv_to_dict,
    "ksvm": ksvm.ksvm_to_dict,
}

_FROM_DICT = {
    "cox": cox.cox_from_dict,
    "mtlr": mtlr.mtlr_from_dict,
    "rsf": rsf.forest_from_dict,
    "deepsurv": deepsurv.deepsurv_from_dict,
    "ksvm": ksvm.ksvm_from_dict,
}


def model_risk(name: str, model, design) -> np.ndarray:
    return _RISK_FN[name](model, design)


def model_converged(name: str, model) -> bool:
    conv = getattr(model, "convergence", None)
    return True if conv is None else conv.converged


def _scores_csv(train_design, test_design, risk_train, risk_test) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["split", "index", "time", "event", "score"])
    for split_name, design, scores in (
        ("train", train_design, risk_train),
        ("test", test_design, risk_test),
    ):
        for i in range(design.n):
            w.writerow(
                [
                    split_name,
                    i,
                    repr(float(design.times[i])),
                    int(design.events[i]),
                    repr(float(scores[i])),
                ]
            )
    return buf.getvalue()


def load_cohort(config: BenchConfig) -> Cohort:
    if config.csv_path is not None:
        return ingest_csv(config.csv_path)
    cohort, _ = generate(config.generator)
    return cohort


def run_benchmark(config: BenchConfig) -> BenchReport:
    os.makedirs(config.out_dir, exist_ok=True)
    cohort = load_cohort(config)
    train, test = split(cohort, config.test_fraction, config.seed)
    rows = []
    fitted = {}
    for name in MODEL_ORDER:
        if name not in config.models:
            continue
        model_seed = derive_seed(config.seed, MODEL_ORDER.index(name))
        started = time.perf_counter()
        try:
            opts = _options(config, name)
            train_design = encode(train, standardize=_STANDARDIZE[name])
            test_design = encode_like(test, train_design)
            model = fit_model(name, train_design, opts, model_seed)
            risk_train = model_risk(name, model, train_design)
            risk_test = model_risk(name, model, test_design)
            converged = model_converged(name, model)
            elapsed = (time.perf_counter() - started) * 1000.0
            row = ModelRow(
                name=name,
                train_cindex=concordance_index(
                    train_design.times, train_design.events, risk_train
                ).cindex,
                test_cindex=concordance_index(
                    test_design.times, test_design.events, risk_test
                ).cindex,
                wall_time_ms=elapsed,
                status="ok",
                converged=converged,
            )
            fitted[name] = model
            write_text_atomic(
                os.path.join(config.out_dir, f"scores_{name}.csv"),
                _scores_csv(train_design, test_design, risk_train, risk_test),
            )
        except Exception as exc:
            elapsed = (time.perf_counter() - started) * 1000.0
            row = ModelRow(
                name=name,
                train_cindex=float("nan"),
                test_cindex=float("nan"),
                wall_time_ms=elapsed,
                status=f"error: {exc}",
                converged=False,
            )
        rows.append(row)
    report = BenchReport(
        rows=rows,
        seed=config.seed,
        n=cohort.n,
        n_events=cohort.n_events,
        censoring_rate=cohort.censoring_rate,
        train_n=train.n,
        test_n=test.n,
    )
    _write_report(config, report)
    emit_km_figures(cohort, list(config.km_groups), config.out_dir)
    if "mtlr" in fitted:
        emit_weight_figure(fitted["mtlr"], config.out_dir)
    return report


def _write_report(config: BenchConfig, report: BenchReport) -> None:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["model", "train_cindex", "test_cindex", "status", "converged"])
    for r in report.rows:
        w.writerow(
            [r.name, _fmt6(r.train_cindex), _fmt6(r.test_cindex), r.status, r.converged]
        )
    write_text_atomic(os.path.join(config.out_dir, "report.csv"), buf.getvalue())
    doc = {
        "environment": {
            "seed": report.seed,
            "n": report.n,
            "n_events": report.n_events,
            "censoring_rate": float(_fmt6(report.censoring_rate)),
            "train_n": report.train_n,
            "test_n": report.test_n,
        },
        "rows": [
            {
                "model": r.name,
                "train_cindex": float(_fmt6(r.train_cindex)) if np.isfinite(r.train_cindex) else None,
                "test_cindex": float(_fmt6(r.test_cindex)) if np.isfinite(r.test_cindex) else None,
                "wall_time_ms": round(r.wall_time_ms, 3),
                "status": r.status,
                "converged": r.converged,
            }
            for r in report.rows
        ],
    }
    write_text_atomic(
        os.path.join(config.out_dir, "report.json"), json.dumps(doc, indent=2) + "\n"
    )
    ranked = sorted(
        (r for r in report.rows if np.isfinite(r.test_cindex)),
        key=lambda r: (-r.test_cindex, r.name),
    )
    svg = bar_chart(
        [(r.name, float(_fmt6(r.test_cindex))) for r in ranked],
        title="Test C-index by model",
        xlabel="C-index",
    )
    write_text_atomic(os.path.join(config.out_dir, "report.svg"), svg)


def _curve_csv(curves: list[tuple[str, object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    if len(curves) == 1:
        w.writerow(["time", "value"])
        _, f = curves[0]
        for t, v in zip(f.times, f.values):
            w.writerow([repr(float(t)), repr(float(v))])
    else:
        w.writerow(["group", "time", "value"])
        for label, f in curves:
            for t, v in zip(f.times, f.values):
                w.writerow([label, repr(float(t)), repr(float(v))])
    return buf.getvalue()


def emit_km_figures(cohort: Cohort, group_specs: list[str], out_dir: str) -> list[str]:
    """One CSV + SVG pair overall and per grouping covariate. Numeric
    covariates are split at the cohort median; the group labels carry the
    binning rule so the output is self-describing."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    km, _ = fit_km(cohort)
    specs = [("overall", [("all", km)], "Kaplan-Meier survival")]
    for name in group_specs:
        col = cohort.schema.column(name)  # raises KeyError on unknown names
        if col.kind == "categorical":
            curves = list(fit_km_grouped(cohort, name).items())
            title = f"Survival by {name}"
        else:
            vals = cohort.covariates[name]
            med = float(np.median(vals))
            curves = []
            for label, mask in (
                (f"{name} <= {_fmt6(med)}", vals <= med),
                (f"{name} > {_fmt6(med)}", vals > med),
            ):
                if mask.any():
                    curves.append(
                        (label, kaplan_meier(cohort.time[mask], cohort.event[mask]))
                    )
            title = f"Survival by {name} (median split)"
        specs.append((name, curves, title))
    for name, curves, title in specs:
        csv_path = os.path.join(out_dir, f"km_{name}.csv")
        svg_path = os.path.join(out_dir, f"km_{name}.svg")
        write_text_atomic(csv_path, _curve_csv(curves))
        write_text_atomic(svg_path, step_chart(curves, title=title))
        paths.extend([csv_path, svg_path])
    return paths


def emit_weight_figure(model, out_dir: str) -> list[str]:
    """Per-variable weight chart for a fitted sequence model, largest
    magnitude first."""
    os.makedirs(out_dir, exist_ok=True)
    rows = mtlr.feature_weights(model)
    buf = io.StringIO()
    w = csv.writer(buf)
    k = model.grid.k
    w.writerow(["variable", "aggregate_weight"] + [f"w{i + 1}" for i in range(k)])
    for r in rows:
        w.writerow(
            [r["variable"], repr(r["aggregate_weight"])]
            + [repr(float(v)) for v in r["per_interval"]]
        )
    csv_path = os.path.join(out_dir, "weights.csv")
    svg_path = os.path.join(out_dir, "weights.svg")
    write_text_atomic(csv_path, buf.getvalue())
    write_text_atomic(
        svg_path,
        bar_chart(
            [(r["variable"], r["aggregate_weight"]) for r in rows],
            title="MTLR variable weights",
            xlabel="mean weight across intervals",
        ),
    )
    return [csv_path, svg_path]
