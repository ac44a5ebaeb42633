"""Reproduce the headline comparison: five models on the default
nonlinear synthetic cohort (n=1000, ~48% censored), test C-index table
plus report/figure files.

    python3 scripts/run_benchmark.py
    python3 scripts/run_benchmark.py --n 2000 --seed 3 --models cox,rsf,deepsurv
"""

import argparse
import sys

from survbench.bench import BenchConfig, run_benchmark
from survbench.datagen import GeneratorConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--models", default=None, help="comma-separated subset")
    ap.add_argument("--out", default="bench_out")
    args = ap.parse_args(argv)

    config = BenchConfig(
        generator=GeneratorConfig(n=args.n, seed=args.seed),
        seed=args.seed,
        out_dir=args.out,
        **({"models": tuple(args.models.split(","))} if args.models else {}),
    )
    report = run_benchmark(config)
    print(
        f"n={report.n} events={report.n_events} "
        f"censoring={report.censoring_rate:.3f} split={report.train_n}/{report.test_n}"
    )
    for r in report.rows:
        note = "" if r.converged else "  (not converged)"
        print(
            f"{r.name:<8} train={r.train_cindex:.4f} test={r.test_cindex:.4f} "
            f"[{r.status}]{note}"
        )
    print(f"files in {config.out_dir}/")
    return 0 if report.all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
