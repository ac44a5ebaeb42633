"""Multi-task logistic regression on a discretized time grid.

Boundaries t_1 < ... < t_K cut time into K+1 intervals (the last is
open-ended). A record's outcome is the interval holding its event time;
each candidate interval m has pattern score G_m = sum of the first m task
scores s_k = w_k.x + b_k, with G_0 = 0, and P(interval m | x) =
softmax(G)_m. A censored record contributes the total mass of intervals
at or after the one containing its censoring time.

Sign convention: a positive task-k score raises the probability of every
interval at or after boundary k, i.e. pushes mass toward later events.

The penalized log-likelihood (L2 on weights only, biases free) is concave
and maximized by full-batch gradient ascent with backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import Convergence
from .data import DesignMatrix
from .stepfun import StepFunction


@dataclass(frozen=True)
class TimeGrid:
    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.float64)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("need at least 2 boundaries")
        if not np.all(np.diff(b) > 0):
            raise ValueError("boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", b)

    @property
    def k(self) -> int:
        return self.boundaries.size

    def interval_of(self, t) -> np.ndarray:
        """0-based interval index; boundary times belong to the interval
        they open."""
        return np.searchsorted(self.boundaries, np.asarray(t, dtype=np.float64), side="right")


def make_grid(cohort_or_design, k: int) -> TimeGrid:
    """Boundaries at the k equally spaced empirical quantiles (1/k ... 1)
    of the observed event times."""
    if k < 2:
        raise ValueError("k must be >= 2")
    times = np.asarray(cohort_or_design.times if hasattr(cohort_or_design, "times") else cohort_or_design.time)
    events = np.asarray(cohort_or_design.events if hasattr(cohort_or_design, "events") else cohort_or_design.event)
    etimes = times[events == 1]
    if np.unique(etimes).size < k:
        raise ValueError(
            f"only {np.unique(etimes).size} distinct event times; use a smaller k"
        )
    bounds = np.quantile(etimes, np.arange(1, k + 1) / k)
    if not np.all(np.diff(bounds) > 0):
        raise ValueError("duplicate quantile boundaries; use a smaller k")
    return TimeGrid(boundaries=bounds)


@dataclass(frozen=True)
class MtlrModel:
    weights: np.ndarray
    biases: np.ndarray
    grid: TimeGrid
    l2: float
    column_names: list[str]
    convergence: Convergence


def _pattern_scores(X, weights, biases):
    """G: n x (K+1) pattern scores, column m = sum of first m task scores."""
    s = X @ weights.T + biases
    return np.concatenate([np.zeros((X.shape[0], 1)), np.cumsum(s, axis=1)], axis=1)


def _log_softmax(G):
    shifted = G - G.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _objective_and_grad(X, interval, is_event, weights, biases, l2):
    """Penalized log-likelihood and its gradient in (weights, biases).

    The per-record gradient in task score k is [tail indicator or
    censoring-renormalized tail] minus the model tail mass past k.
    """
    n, k = X.shape[0], weights.shape[0]
    G = _pattern_scores(X, weights, biases)
    logp = _log_softmax(G)
    p = np.exp(logp)
    # tail[:, m] = P(interval >= m); column 0 is 1 by construction
    tail = np.cumsum(p[:, ::-1], axis=1)[:, ::-1]
    rows = np.arange(n)
    ll_event = logp[rows, interval]
    with np.errstate(divide="ignore"):
        ll_cens = np.log(tail[rows, interval])
    loglik = float(np.where(is_event, ll_event, ll_cens).sum())
    # d loglik / d s_k for task columns k = 0..K-1 (score index k+1 in G)
    ks = np.arange(1, k + 1)
    model_tail = tail[:, 1:]
    target_event = (interval[:, None] >= ks[None, :]).astype(np.float64)
    cut = np.maximum(interval[:, None], ks[None, :])
    target_cens = tail[rows[:, None], cut] / tail[rows, interval][:, None]
    dscore = np.where(is_event[:, None], target_event, target_cens) - model_tail
    grad_w = dscore.T @ X - l2 * weights
    grad_b = dscore.sum(axis=0)
    objective = loglik - 0.5 * l2 * float((weights * weights).sum())
    return objective, grad_w, grad_b


def fit_mtlr(
    design: DesignMatrix,
    grid: TimeGrid,
    l2: float = 1.0,
    max_iter: int = 1000,
    tol: float = 1e-3,
) -> MtlrModel:
    if l2 <= 0.0:
        raise ValueError("l2 must be positive (identifiability)")
    if design.events.sum() < 1:
        raise ValueError("need at least one event to fit")
    X = design.X
    interval = grid.interval_of(design.times)
    is_event = design.events == 1
    k = grid.k
    weights = np.zeros((k, design.p))
    biases = np.zeros(k)
    obj, gw, gb = _objective_and_grad(X, interval, is_event, weights, biases, l2)
    step = 1.0 / max(design.n, 1)
    iterations, converged = 0, False
    for iterations in range(1, max_iter + 1):
        gnorm = max(np.abs(gw).max(), np.abs(gb).max())
        if gnorm <= tol:
            converged = True
            iterations -= 1
            break
        gsq = float((gw * gw).sum() + (gb * gb).sum())
        step = min(step * 2.0, 1.0)
        accepted = False
        for _ in range(40):
            cw, cb = weights + step * gw, biases + step * gb
            cobj, cgw, cgb = _objective_and_grad(X, interval, is_event, cw, cb, l2)
            if cobj >= obj + 1e-4 * step * gsq:
                weights, biases, obj, gw, gb = cw, cb, cobj, cgw, cgb
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    gnorm = float(max(np.abs(gw).max(), np.abs(gb).max()))
    return MtlrModel(
        weights=weights,
        biases=biases,
        grid=grid,
        l2=l2,
        column_names=list(design.names),
        convergence=Convergence(converged or gnorm <= tol, iterations, gnorm),
    )


def predict_pmf(model: MtlrModel, X) -> np.ndarray:
    """Interval PMF per row, shape (n, K+1).

    Softmax is taken directly (shift, exponentiate, normalize) so the
    all-zero model returns exactly 1/(K+1) per interval.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    G = _pattern_scores(X, model.weights, model.biases)
    e = np.exp(G - G.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def predict_survival_mtlr(model: MtlrModel, x) -> StepFunction:
    """S at boundary t_k = mass of intervals at or after k."""
    p = predict_pmf(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]
    tail = np.cumsum(p[::-1])[::-1]
    return StepFunction(times=model.grid.boundaries, values=tail[1:], initial=1.0)


def mtlr_risk(model: MtlrModel, design: DesignMatrix) -> np.ndarray:
    """Risk score for ranking: negative expected event-interval index."""
    if design.names != model.column_names:
        raise ValueError("design columns do not match the fitted model")
    p = predict_pmf(model, design.X)
    return -(p @ np.arange(model.grid.k + 1, dtype=np.float64))


def feature_weights(model: MtlrModel) -> list[dict]:
    """Per design column: per-interval weights and their mean, sorted by
    absolute mean, largest first."""
    rows = []
    for j, name in enumerate(model.column_names):
        per_interval = model.weights[:, j]
        rows.append(
            {
                "variable": name,
                "aggregate_weight": float(per_interval.mean()),
                "per_interval": per_interval.tolist(),
            }
        )
    rows.sort(key=lambda r: (-abs(r["aggregate_weight"]), r["variable"]))
    return rows


def mtlr_to_dict(model: MtlrModel) -> dict:
    return {
        "model": "mtlr",
        "column_names": model.column_names,
        "boundaries": model.grid.boundaries.tolist(),
        "weights": model.weights.tolist(),
        "biases": model.biases.tolist(),
        "l2": model.l2,
        "convergence": model.convergence.to_dict(),
    }


def mtlr_from_dict(doc: dict) -> MtlrModel:
    return MtlrModel(
        weights=np.asarray(doc["weights"], dtype=np.float64),
        biases=np.asarray(doc["biases"], dtype=np.float64),
        grid=TimeGrid(boundaries=np.asarray(doc["boundaries"])),
        l2=float(doc["l2"]),
        column_names=list(doc["column_names"]),
        convergence=Convergence.from_dict(doc["convergence"]),
    )
