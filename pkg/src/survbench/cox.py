"""Cox proportional hazards: Breslow-tie partial likelihood, Newton
fitting with step-halving, Breslow baseline hazard.

The model is h(t|x) = h0(t) * exp(beta.x). Fitting maximizes the Breslow
log partial likelihood, optionally ridge-penalized; the reported gradient
norm is for the penalized objective (they coincide at ridge = 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import Convergence
from .data import DesignMatrix
from .stepfun import StepFunction

_BETA_BOUND = 50.0


class MonotoneLikelihoodError(RuntimeError):
    """The likelihood keeps improving as some coefficient diverges
    (separation). Refit with ridge > 0."""


class SingularHessianError(RuntimeError):
    """Newton system is singular. Refit with ridge > 0."""


@dataclass(frozen=True)
class CoxModel:
    beta: np.ndarray
    baseline_cum_hazard: StepFunction
    column_names: list[str]
    convergence: Convergence


def _groups(times, events):
    """Risk-set bookkeeping under an ascending time sort.

    Returns (order, distinct times, group start offsets into the sorted
    arrays, event counts per distinct time). The risk set of a distinct
    time is the sorted suffix starting at its first occurrence.
    """
    order = np.argsort(times, kind="stable")
    uniq, starts = np.unique(times[order], return_index=True)
    d = np.add.reduceat(events[order].astype(np.float64), starts)
    return order, uniq, starts, d


def cox_loglik_grad_hess(design: DesignMatrix, beta) -> tuple[float, np.ndarray, np.ndarray]:
    """Breslow partial log-likelihood and its exact first two derivatives.

    Risk-set sums are suffix sums over the time-sorted cohort, so ties
    share one risk set; exp is stabilized by the max linear predictor.
    """
    beta = np.asarray(beta, dtype=np.float64)
    X, times, events = design.X, design.times, design.events
    order, _, starts, d = _groups(times, events)
    Xs, evs = X[order], events[order]
    eta = Xs @ beta
    m = eta.max() if eta.size else 0.0
    w = np.exp(eta - m)
    # suffix sums: W[i] = sum_{j >= i} w_j, and likewise for w*x, w*x*x^T
    W = np.cumsum(w[::-1])[::-1]
    Wx = np.cumsum((w[:, None] * Xs)[::-1], axis=0)[::-1]
    Wxx = np.cumsum(np.einsum("i,ij,ik->ijk", w, Xs, Xs)[::-1], axis=0)[::-1]
    loglik, grad = 0.0, np.zeros(design.p)
    hess = np.zeros((design.p, design.p))
    for g in np.nonzero(d > 0)[0]:
        i = starts[g]
        stop = starts[g + 1] if g + 1 < starts.size else len(evs)
        in_group = np.nonzero(evs[i:stop] == 1)[0] + i
        s = Xs[in_group].sum(axis=0)
        dg = d[g]
        loglik += eta[in_group].sum() - dg * (m + np.log(W[i]))
        xbar = Wx[i] / W[i]
        grad += s - dg * xbar
        hess -= dg * (Wxx[i] / W[i] - np.outer(xbar, xbar))
    return float(loglik), grad, hess


def _penalized(design, beta, ridge):
    ll, g, H = cox_loglik_grad_hess(design, beta)
    if ridge > 0.0:
        ll -= 0.5 * ridge * float(beta @ beta)
        g = g - ridge * beta
        H = H - ridge * np.eye(beta.size)
    return ll, g, H


def fit_cox(
    design: DesignMatrix,
    max_iter: int = 100,
    tol: float = 1e-8,
    ridge: float = 0.0,
) -> CoxModel:
    """Newton-Raphson with step-halving; gradient-ascent step whenever the
    Newton direction is not an ascent direction."""
    if design.events.sum() < 1:
        raise ValueError("need at least one event to fit")
    spans = design.X.max(axis=0) - design.X.min(axis=0) if design.n else np.array([])
    flat = np.nonzero(spans <= 0)[0]
    if flat.size:
        raise ValueError(
            f"constant design column(s): {[design.names[j] for j in flat]}"
        )
    beta = np.zeros(design.p)
    ll, grad, hess = _penalized(design, beta, ridge)
    iterations, converged = 0, False
    for iterations in range(1, max_iter + 1):
        gnorm = float(np.abs(grad).max())
        if gnorm <= tol:
            converged = True
            iterations -= 1
            break
        try:
            delta = np.linalg.solve(-hess, grad)
        except np.linalg.LinAlgError:
            raise SingularHessianError(
                "singular Hessian; refit with ridge > 0"
            ) from None
        if grad @ delta <= 0.0:
            delta = grad.copy()
        step, improved = 1.0, False
        for _ in range(30):
            cand = beta + step * delta
            cll, cgrad, chess = _penalized(design, cand, ridge)
            if cll > ll or (cll == ll and float(np.abs(cgrad).max()) < gnorm):
                beta, ll, grad, hess = cand, cll, cgrad, chess
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        if np.abs(beta).max() > _BETA_BOUND:
            raise MonotoneLikelihoodError(
                "coefficients diverging (monotone likelihood); refit with ridge > 0"
            )
    gnorm = float(np.abs(grad).max())
    converged = converged or gnorm <= tol
    return CoxModel(
        beta=beta,
        baseline_cum_hazard=_breslow_baseline(design, beta),
        column_names=list(design.names),
        convergence=Convergence(converged, iterations, gnorm),
    )


def _breslow_baseline(design: DesignMatrix, beta) -> StepFunction:
    """Jump at each distinct event time: d_g / sum of exp(eta) over its
    risk set (no stabilization needed at the fitted beta's scale)."""
    order, uniq, starts, d = _groups(design.times, design.events)
    eta = (design.X @ beta)[order]
    m = eta.max() if eta.size else 0.0
    W = np.cumsum(np.exp(eta - m)[::-1])[::-1]
    keep = d > 0
    jumps = d[keep] / (W[starts[keep]] * np.exp(m))
    return StepFunction(times=uniq[keep], values=np.cumsum(jumps), initial=0.0)


def predict_risk(model: CoxModel, design: DesignMatrix) -> np.ndarray:
    """Per-row log-risk beta.x."""
    if design.p != model.beta.size or design.names != model.column_names:
        raise ValueError("design columns do not match the fitted model")
    return design.X @ model.beta


def predict_survival(model: CoxModel, x) -> StepFunction:
    """S(t|x) = exp(-H0(t) * exp(beta.x))."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.beta.shape:
        raise ValueError("row arity does not match the fitted model")
    h0 = model.baseline_cum_hazard
    return StepFunction(
        times=h0.times,
        values=np.exp(-h0.values * np.exp(float(model.beta @ x))),
        initial=1.0,
    )


def cox_to_dict(model: CoxModel) -> dict:
    return {
        "model": "cox",
        "column_names": model.column_names,
        "beta": model.beta.tolist(),
        "baseline_times": model.baseline_cum_hazard.times.tolist(),
        "baseline_values": model.baseline_cum_hazard.values.tolist(),
        "convergence": model.convergence.to_dict(),
    }


def cox_from_dict(doc: dict) -> CoxModel:
    return CoxModel(
        beta=np.asarray(doc["beta"], dtype=np.float64),
        baseline_cum_hazard=StepFunction(
            times=np.asarray(doc["baseline_times"]),
            values=np.asarray(doc["baseline_values"]),
            initial=0.0,
        ),
        column_names=list(doc["column_names"]),
        convergence=Convergence.from_dict(doc["convergence"]),
    )
