"""Cohort container, CSV round-trip, and design-matrix encoding.

A cohort is a fixed covariate schema plus aligned columns: one array per
covariate, an observed time, and an event indicator (1 = purchase seen,
0 = right-censored). Time is unitless; everything downstream only ranks
or integrates over it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .rng import CounterRng


class SchemaError(ValueError):
    """Header or column layout does not match the expected schema."""


class ParseError(ValueError):
    """A cell failed to parse; the message names the offending row."""


class DegenerateColumnError(ValueError):
    """A design column is constant and was asked to be standardized."""


@dataclass(frozen=True)
class Column:
    """One covariate. Categorical columns carry their level vocabulary;
    the first level is the reference dropped during one-hot encoding."""

    name: str
    kind: str
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise ValueError(f"unknown column kind: {self.kind!r}")
        if self.kind == "categorical" and len(self.levels) < 2:
            raise ValueError(f"categorical column {self.name!r} needs >= 2 levels")
        if self.kind == "numeric" and self.levels:
            raise ValueError(f"numeric column {self.name!r} cannot have levels")


@dataclass(frozen=True)
class CovariateSchema:
    columns: tuple[Column, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names) or "" in names:
            raise ValueError("column names must be unique and non-empty")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)


class Cohort:
    """Aligned covariate columns plus (time, event)."""

    def __init__(self, schema: CovariateSchema, covariates: dict, time, event):
        self.schema = schema
        self.time = np.asarray(time, dtype=np.float64)
        self.event = np.asarray(event, dtype=np.int64)
        n = self.time.size
        if self.event.shape != (n,) or self.time.ndim != 1:
            raise ValueError("time and event must be 1-d and equal length")
        if not np.all(np.isfinite(self.time)) or np.any(self.time < 0):
            raise ValueError("times must be finite and nonnegative")
        if not np.all((self.event == 0) | (self.event == 1)):
            raise ValueError("event must be 0 or 1")
        self.covariates = {}
        for col in schema.columns:
            if col.name not in covariates:
                raise ValueError(f"missing covariate column {col.name!r}")
            vals = covariates[col.name]
            if col.kind == "numeric":
                arr = np.asarray(vals, dtype=np.float64)
                if not np.all(np.isfinite(arr)):
                    raise ValueError(f"non-finite values in {col.name!r}")
            else:
                arr = np.asarray(vals, dtype=object)
                bad = set(arr) - set(col.levels)
                if bad:
                    raise ValueError(f"unknown levels in {col.name!r}: {sorted(bad)}")
            if arr.shape != (n,):
                raise ValueError(f"column {col.name!r} has wrong length")
            self.covariates[col.name] = arr

    @property
    def n(self) -> int:
        return self.time.size

    @property
    def n_events(self) -> int:
        return int(self.event.sum())

    @property
    def censoring_rate(self) -> float:
        return float((self.event == 0).sum()) / self.n

    def subset(self, idx) -> "Cohort":
        idx = np.asarray(idx, dtype=np.int64)
        cov = {name: arr[idx] for name, arr in self.covariates.items()}
        return Cohort(self.schema, cov, self.time[idx], self.event[idx])

    def equals(self, other: "Cohort") -> bool:
        return (
            self.schema == other.schema
            and np.array_equal(self.time, other.time)
            and np.array_equal(self.event, other.event)
            and all(
                np.array_equal(self.covariates[c], other.covariates[c])
                for c in self.schema.names
            )
        )


@dataclass
class DesignMatrix:
    """Numeric encoding of a cohort: numeric columns as-is, categoricals
    one-hot with the reference (first) level dropped. Carries the outcome
    vectors so fitters need nothing else.

    When standardized, `means`/`sds` hold the encoding-cohort statistics
    so the identical affine map can be replayed on new data (or inverted).
    """

    X: np.ndarray
    names: list[str]
    times: np.ndarray
    events: np.ndarray
    schema: CovariateSchema
    means: np.ndarray | None = None
    sds: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def standardized(self) -> bool:
        return self.means is not None


def _raw_design(cohort: Cohort) -> tuple[np.ndarray, list[str]]:
    cols, names = [], []
    for col in cohort.schema.columns:
        vals = cohort.covariates[col.name]
        if col.kind == "numeric":
            cols.append(np.asarray(vals, dtype=np.float64))
            names.append(col.name)
        else:
            for lv in col.levels[1:]:
                cols.append((vals == lv).astype(np.float64))
                names.append(f"{col.name}={lv}")
    X = np.column_stack(cols) if cols else np.empty((cohort.n, 0))
    return X, names


def encode(cohort: Cohort, standardize: bool = False) -> DesignMatrix:
    """Encode a cohort, optionally centering/scaling every design column
    to sample mean 0 and (population) sd 1."""
    X, names = _raw_design(cohort)
    if not standardize:
        return DesignMatrix(
            X=X, names=names, times=cohort.time, events=cohort.event,
            schema=cohort.schema,
        )
    means = X.mean(axis=0)
    sds = X.std(axis=0)
    flat = np.nonzero(sds < 1e-12)[0]
    if flat.size:
        raise DegenerateColumnError(
            f"constant design column(s) cannot be standardized: "
            f"{[names[j] for j in flat]}"
        )
    return DesignMatrix(
        X=(X - means) / sds, names=names, times=cohort.time,
        events=cohort.event, schema=cohort.schema, means=means, sds=sds,
    )


def encode_like(cohort: Cohort, template: DesignMatrix) -> DesignMatrix:
    """Encode with the template's column layout and (if any) its affine map."""
    if cohort.schema != template.schema:
        raise ValueError("cohort schema does not match template design")
    X, names = _raw_design(cohort)
    if template.standardized:
        X = (X - template.means) / template.sds
    return DesignMatrix(
        X=X, names=names, times=cohort.time, events=cohort.event,
        schema=cohort.schema, means=template.means, sds=template.sds,
    )


def split(cohort: Cohort, test_fraction: float, seed: int) -> tuple[Cohort, Cohort]:
    """Deterministic train/test split stratified on the event indicator.

    The test part gets round(test_fraction * n) rows, apportioned to the
    two strata by largest remainder so the total is exact. Within each
    stratum rows are ordered by seeded uniforms. Row order inside each
    part follows the original cohort order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = CounterRng(seed)
    keys = rng.uniform(cohort.n)
    total_test = int(round(test_fraction * cohort.n))
    strata = [np.nonzero(cohort.event == flag)[0] for flag in (1, 0)]
    quotas = [test_fraction * s.size for s in strata]
    counts = [int(np.floor(q)) for q in quotas]
    # hand leftover seats to the largest fractional remainders (event
    # stratum wins ties, so the result is deterministic)
    leftover = total_test - sum(counts)
    order = sorted(range(2), key=lambda s: (-(quotas[s] - counts[s]), s))
    for s in order[:leftover]:
        counts[s] += 1
    test_idx = []
    for s, stratum in enumerate(strata):
        shuffled = stratum[np.argsort(keys[stratum], kind="stable")]
        test_idx.extend(shuffled[: counts[s]].tolist())
    mask = np.zeros(cohort.n, dtype=bool)
    mask[test_idx] = True
    train = cohort.subset(np.nonzero(~mask)[0])
    test = cohort.subset(np.nonzero(mask)[0])
    if train.n_events == 0 or test.n_events == 0:
        raise ValueError("split left a partition with zero events")
    return train, test


def write_cohort_csv(cohort: Cohort, path) -> None:
    """Header is covariate names + time + event; floats via repr so the
    file round-trips bit-exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cohort.schema.names + ["time", "event"])
        for i in range(cohort.n):
            row = []
            for col in cohort.schema.columns:
                v = cohort.covariates[col.name][i]
                row.append(repr(float(v)) if col.kind == "numeric" else str(v))
            row.append(repr(float(cohort.time[i])))
            row.append(str(int(cohort.event[i])))
            w.writerow(row)


def infer_schema(names: list[str], rows: list[list[str]]) -> CovariateSchema:
    """Columns where every value parses as float are numeric; the rest are
    categorical with levels sorted lexicographically."""
    cols = []
    for j, name in enumerate(names):
        vals = [r[j] for r in rows]
        try:
            for v in vals:
                float(v)
            cols.append(Column(name=name, kind="numeric"))
        except ValueError:
            cols.append(
                Column(name=name, kind="categorical", levels=tuple(sorted(set(vals))))
            )
    return CovariateSchema(columns=tuple(cols))


_EVENT_TOKENS = {"0": 0, "1": 1, "false": 0, "true": 1}


def ingest_csv(
    path,
    schema: CovariateSchema | None = None,
    time_col: str = "time",
    event_col: str = "event",
) -> Cohort:
    """Read a cohort CSV. The event column accepts {0, 1, true, false}.

    Covariate columns are the header minus `time_col`/`event_col`, in
    header order; they must match `schema` when one is supplied, and are
    type-inferred otherwise. Parse failures name the offending data row.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty CSV") from None
        rows = [r for r in reader if r]
    for required in (time_col, event_col):
        if required not in header:
            raise SchemaError(f"missing column {required!r}")
    t_j, e_j = header.index(time_col), header.index(event_col)
    cov_js = [j for j in range(len(header)) if j not in (t_j, e_j)]
    cov_names = [header[j] for j in cov_js]
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise ParseError(f"row {i + 1}: expected {len(header)} fields, got {len(r)}")
    if schema is None:
        schema = infer_schema(cov_names, [[r[j] for j in cov_js] for r in rows])
    elif schema.names != cov_names:
        raise SchemaError(
            f"CSV covariate columns {cov_names} do not match schema {schema.names}"
        )
    time = np.empty(len(rows))
    event = np.empty(len(rows), dtype=np.int64)
    for i, r in enumerate(rows):
        try:
            time[i] = float(r[t_j])
        except ValueError:
            raise ParseError(f"row {i + 1}: non-numeric time {r[t_j]!r}") from None
        if not np.isfinite(time[i]) or time[i] < 0:
            raise ParseError(f"row {i + 1}: time must be finite and >= 0, got {r[t_j]!r}")
        tok = r[e_j].strip().lower()
        if tok not in _EVENT_TOKENS:
            raise ParseError(f"row {i + 1}: bad event value {r[e_j]!r}")
        event[i] = _EVENT_TOKENS[tok]
    cov = {}
    for j, col in zip(cov_js, schema.columns):
        raw = [r[j] for r in rows]
        if col.kind == "numeric":
            vals = np.empty(len(raw))
            for i, v in enumerate(raw):
                try:
                    vals[i] = float(v)
                except ValueError:
                    raise ParseError(
                        f"row {i + 1}: non-numeric value {v!r} in {col.name!r}"
                    ) from None
            cov[col.name] = vals
        else:
            known = set(col.levels)
            for i, v in enumerate(raw):
                if v not in known:
                    raise ParseError(f"row {i + 1}: unknown level {v!r} in {col.name!r}")
            cov[col.name] = np.array(raw, dtype=object)
    return Cohort(schema, cov, time, event)
