"""Command-line interface.

Subcommands: datagen, fit, eval, bench, km, weights. Global flags
--seed/--out/--config; the config file is a JSON document mirroring the
benchmark configuration. All printed numbers use 6 significant digits.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .bench import (
    _DEFAULT_OPTIONS,
    _FROM_DICT,
    _STANDARDIZE,
    _TO_DICT,
    MODEL_ORDER,
    BenchConfig,
    bench_config_from_dict,
    emit_km_figures,
    emit_weight_figure,
    fit_model,
    model_risk,
    run_benchmark,
    write_text_atomic,
)
from .data import DesignMatrix, encode, ingest_csv
from .datagen import (
    GeneratorConfig,
    HazardSpec,
    calibrate_censoring,
    generate,
    write_ground_truth_csv,
)
from .mtlr import fit_mtlr, make_grid
from .data import write_cohort_csv


def _fmt6(v: float) -> str:
    return format(float(v), ".6g")


def _ensure_parent(path: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _add_globals(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--out", default=None, help="output file or directory")
    p.add_argument("--config", default=None, help="JSON config file")


def _cmd_datagen(args) -> int:
    hazard = HazardSpec(
        kind=args.hazard,
        beta=tuple(float(b) for b in args.beta.split(",")) if args.beta else (),
    )
    cfg = GeneratorConfig(
        n=args.n,
        seed=args.seed if args.seed is not None else 0,
        hazard=hazard,
        baseline_rate=args.baseline_rate,
        censor_rate=args.censor_rate,
        censor_horizon=args.censor_horizon,
    )
    if args.target_censoring is not None:
        cfg = calibrate_censoring(cfg, args.target_censoring)
    cohort, truth = generate(cfg)
    out = args.out or "cohort.csv"
    _ensure_parent(out)
    write_cohort_csv(cohort, out)
    stem, ext = os.path.splitext(out)
    write_ground_truth_csv(truth, f"{stem}_truth{ext or '.csv'}")
    print(
        f"wrote {out}: n={cohort.n}, events={cohort.n_events}, "
        f"censoring={_fmt6(cohort.censoring_rate)}"
    )
    return 0


def _standardized_design(cohort, model_name):
    return encode(cohort, standardize=_STANDARDIZE[model_name])


def _cmd_fit(args) -> int:
    cohort = ingest_csv(args.input)
    seed = args.seed if args.seed is not None else 0
    opts = dict(_DEFAULT_OPTIONS[args.model])
    overrides = _load_config(args.config).get("model_options", {}).get(args.model, {})
    unknown = set(overrides) - set(opts)
    if unknown:
        raise SystemExit(f"unknown {args.model} options: {sorted(unknown)}")
    opts.update(overrides)
    design = _standardized_design(cohort, args.model)
    model = fit_model(args.model, design, opts, seed)
    doc = _TO_DICT[args.model](model)
    doc["standardization"] = {
        "means": None if design.means is None else design.means.tolist(),
        "sds": None if design.sds is None else design.sds.tolist(),
    }
    out = args.out or f"{args.model}.json"
    _ensure_parent(out)
    write_text_atomic(out, json.dumps(doc) + "\n")
    if args.model == "deepsurv" and model.training_log:
        log_lines = ["epoch,loss"] + [
            f"{i},{repr(v)}" for i, v in enumerate(model.training_log)
        ]
        write_text_atomic(f"{os.path.splitext(out)[0]}_training_log.csv",
                          "\n".join(log_lines) + "\n")
    print(f"wrote {out}")
    return 0


def _cmd_eval(args) -> int:
    with open(args.model_file) as fh:
        doc = json.load(fh)
    name = doc["model"]
    std = doc.pop("standardization", {"means": None, "sds": None})
    model = _FROM_DICT[name](doc)
    cohort = ingest_csv(args.input)
    design = encode(cohort, standardize=False)
    if std["means"] is not None:
        means = np.asarray(std["means"])
        sds = np.asarray(std["sds"])
        design = DesignMatrix(
            X=(design.X - means) / sds,
            names=design.names,
            times=design.times,
            events=design.events,
            schema=design.schema,
            means=means,
            sds=sds,
        )
    scores = model_risk(name, model, design)
    from .metrics import concordance_index

    res = concordance_index(design.times, design.events, scores)
    print(f"{name} C-index: {_fmt6(res.cindex)} ({res.comparable} comparable pairs)")
    return 0


def _cmd_bench(args) -> int:
    doc = _load_config(args.config)
    if args.input is not None:
        doc["input"] = {"csv": args.input}
    if "input" not in doc:
        doc["input"] = {"generator": {}}
    if args.seed is not None:
        doc["seed"] = args.seed
        gen = doc["input"].get("generator")
        if gen is not None and "seed" not in gen:
            gen["seed"] = args.seed
    if args.out is not None:
        doc["out_dir"] = args.out
    if args.models is not None:
        doc["models"] = args.models.split(",")
    if args.test_fraction is not None:
        doc["test_fraction"] = args.test_fraction
    config = bench_config_from_dict(doc)
    report = run_benchmark(config)
    width = max(len(r.name) for r in report.rows)
    print(f"n={report.n} events={report.n_events} "
          f"censoring={_fmt6(report.censoring_rate)} "
          f"split={report.train_n}/{report.test_n} seed={report.seed}")
    for r in report.rows:
        print(
            f"{r.name:<{width}}  train={_fmt6(r.train_cindex):<9} "
            f"test={_fmt6(r.test_cindex):<9} "
            f"[{r.status}{'' if r.converged else ', not converged'}]"
        )
    print(f"report written to {config.out_dir}/")
    return 0 if report.all_ok else 1


def _cmd_km(args) -> int:
    cohort = ingest_csv(args.input)
    out = args.out or "km_out"
    try:
        paths = emit_km_figures(cohort, args.by or [], out)
    except KeyError as exc:
        raise SystemExit(f"unknown covariate: {exc}")
    for p in paths:
        print(f"wrote {p}")
    return 0


def _cmd_weights(args) -> int:
    cohort = ingest_csv(args.input)
    design = encode(cohort, standardize=True)
    grid = make_grid(design, args.k)
    model = fit_mtlr(design, grid, l2=args.l2)
    paths = emit_weight_figure(model, args.out or "weights_out")
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="survbench",
        description="Survival-model benchmark harness for right-censored cohorts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datagen", help="generate a synthetic cohort CSV")
    _add_globals(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--hazard", choices=["nonlinear", "proportional"], default="nonlinear")
    p.add_argument("--beta", default=None, help="comma-separated proportional betas")
    p.add_argument("--baseline-rate", type=float, default=GeneratorConfig().baseline_rate)
    p.add_argument("--censor-rate", type=float, default=GeneratorConfig().censor_rate)
    p.add_argument("--censor-horizon", type=float, default=GeneratorConfig().censor_horizon)
    p.add_argument("--target-censoring", type=float, default=None,
                   help="calibrate the horizon to this censored fraction first")
    p.set_defaults(func=_cmd_datagen)

    p = sub.add_parser("fit", help="fit one model on a cohort CSV")
    _add_globals(p)
    p.add_argument("--model", choices=MODEL_ORDER, required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("eval", help="C-index of a saved model on a cohort CSV")
    _add_globals(p)
    p.add_argument("--model-file", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bench", help="fit and compare models on one cohort")
    _add_globals(p)
    p.add_argument("--input", default=None, help="cohort CSV (default: generator)")
    p.add_argument("--models", default=None, help="comma-separated subset")
    p.add_argument("--test-fraction", type=float, default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("km", help="Kaplan-Meier curves (overall and grouped)")
    _add_globals(p)
    p.add_argument("--input", required=True)
    p.add_argument("--by", action="append", default=None,
                   help="grouping covariate (repeatable; numeric split at median)")
    p.set_defaults(func=_cmd_km)

    p = sub.add_parser("weights", help="MTLR variable-weight report")
    _add_globals(p)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--l2", type=float, default=1.0)
    p.set_defaults(func=_cmd_weights)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
