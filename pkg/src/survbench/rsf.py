"""Random survival forest: log-rank splits, bootstrap ensemble, averaged
Nelson-Aalen leaf estimates.

Per-tree randomness comes from a child seed mixed out of (master seed,
tree index), so any tree is reproducible in isolation. Within a node the
draw order is fixed: column subset first, then (for wide columns) the
candidate-threshold subsample, column by column. Candidate thresholds
are midpoints of consecutive distinct in-node values, capped at 32 per
column; consumption depends only on counts, never on values, which keeps
tree structure invariant under monotone transforms of a column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DesignMatrix
from .nonparametric import nelson_aalen
from .rng import CounterRng, derive_seed
from .stepfun import StepFunction, average_step_functions

_MAX_THRESHOLDS = 32


@dataclass
class TreeNode:
    column: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    chf: StepFunction | None = None

    @property
    def is_leaf(self) -> bool:
        return self.chf is not None


@dataclass
class SurvivalTree:
    seed: int
    inbag: np.ndarray
    root: TreeNode


@dataclass
class Forest:
    trees: list[SurvivalTree]
    mtry: int
    min_leaf: int
    max_depth: int | None
    seed: int
    event_grid: np.ndarray
    column_names: list[str]


def _logrank_parts(times, events, left_masks):
    """Vectorized two-sample log-rank over candidate left-memberships.

    times must be sorted ascending; left_masks is (C, n). Returns the
    statistic |O-E|/sqrt(V) per candidate, with nan where V = 0.
    """
    uniq, starts = np.unique(times, return_index=True)
    d = np.add.reduceat(events.astype(np.float64), starts)
    n_total = times.size - starts
    has_event = d > 0
    M = left_masks.astype(np.float64)
    n_left = np.cumsum(M[:, ::-1], axis=1)[:, ::-1][:, starts]
    d_left = np.add.reduceat(M * events, starts, axis=1)
    frac = n_left[:, has_event] / n_total[has_event]
    dd = d[has_event]
    nn = n_total[has_event]
    observed = d_left[:, has_event].sum(axis=1)
    expected = (dd * frac).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        var_terms = np.where(
            nn > 1, dd * frac * (1.0 - frac) * (nn - dd) / (nn - 1.0), 0.0
        )
    variance = var_terms.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(
            variance > 0.0, np.abs(observed - expected) / np.sqrt(variance), np.nan
        )


def logrank_score(times, events, column_values, threshold) -> float:
    """Absolute standardized two-sample log-rank statistic for the split
    column <= threshold vs >."""
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=np.int64)
    x = np.asarray(column_values, dtype=np.float64)
    left = x <= threshold
    if not left.any() or left.all():
        raise ValueError("split leaves one side empty; score undefined")
    if events.sum() < 1:
        raise ValueError("no events; score undefined")
    order = np.argsort(times, kind="stable")
    score = _logrank_parts(times[order], events[order], left[order][None, :])[0]
    if np.isnan(score):
        raise ValueError("zero log-rank variance; score undefined")
    return float(score)


def _grow(rng, X, times, events, order, min_leaf, max_depth, mtry, depth):
    """order sorts the node's rows by time; X/times/events are the node
    sample (bootstrap rows)."""
    n = times.size
    if (
        n < 2 * min_leaf
        or events.sum() < 1
        or (max_depth is not None and depth >= max_depth)
    ):
        return TreeNode(chf=nelson_aalen(times, events))
    p = X.shape[1]
    cols = np.argsort(rng.uniform(p), kind="stable")[:mtry]
    ts, es = times[order], events[order]
    best = (0.0, None, None)  # score, column, threshold
    for j in cols:
        x = X[:, j]
        distinct = np.unique(x)
        if distinct.size < 2:
            continue
        mids = 0.5 * (distinct[:-1] + distinct[1:])
        if mids.size > _MAX_THRESHOLDS:
            pick = np.argsort(rng.uniform(mids.size), kind="stable")[:_MAX_THRESHOLDS]
            mids = mids[np.sort(pick)]
        masks = x[order][None, :] <= mids[:, None]
        sizes = masks.sum(axis=1)
        valid = (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not valid.any():
            continue
        scores = _logrank_parts(ts, es, masks)
        scores = np.where(valid, scores, np.nan)
        with np.errstate(invalid="ignore"):
            ok = np.nonzero(~np.isnan(scores) & (scores > best[0]))[0]
        if ok.size:
            c = ok[np.argmax(scores[ok])] if ok.size > 1 else ok[0]
            # argmax returns the first maximum, keeping ties deterministic
            best = (float(scores[c]), int(j), float(mids[c]))
    if best[1] is None:
        return TreeNode(chf=nelson_aalen(times, events))
    _, j, thr = best
    go_left = X[:, j] <= thr
    left_idx = np.nonzero(go_left)[0]
    right_idx = np.nonzero(~go_left)[0]
    children = []
    for idx in (left_idx, right_idx):
        sub_t, sub_e = times[idx], events[idx]
        children.append(
            _grow(
                rng,
                X[idx],
                sub_t,
                sub_e,
                np.argsort(sub_t, kind="stable"),
                min_leaf,
                max_depth,
                mtry,
                depth + 1,
            )
        )
    return TreeNode(column=j, threshold=thr, left=children[0], right=children[1])


def fit_forest(
    design: DesignMatrix,
    b: int = 200,
    mtry: int | None = None,
    min_leaf: int = 15,
    max_depth: int | None = None,
    seed: int = 0,
) -> Forest:
    if design.events.sum() < 1:
        raise ValueError("need at least one event to fit")
    if b < 1:
        raise ValueError("b must be >= 1")
    p = design.p
    if mtry is None:
        mtry = int(np.ceil(np.sqrt(p)))
    mtry = max(1, min(mtry, p))
    n = design.n
    trees = []
    for i in range(b):
        tree_seed = derive_seed(seed, i)
        rng = CounterRng(tree_seed)
        inbag = rng.integers(n, n)
        times, events = design.times[inbag], design.events[inbag]
        root = _grow(
            rng,
            design.X[inbag],
            times,
            events,
            np.argsort(times, kind="stable"),
            min_leaf,
            max_depth,
            mtry,
            depth=0,
        )
        trees.append(SurvivalTree(seed=tree_seed, inbag=inbag, root=root))
    return Forest(
        trees=trees,
        mtry=mtry,
        min_leaf=min_leaf,
        max_depth=max_depth,
        seed=seed,
        event_grid=np.unique(design.times[design.events == 1]),
        column_names=list(design.names),
    )


def _leaf_of(node: TreeNode, x) -> StepFunction:
    while not node.is_leaf:
        node = node.left if x[node.column] <= node.threshold else node.right
    return node.chf


def predict_chf(forest: Forest, x) -> StepFunction:
    """Ensemble cumulative hazard: arithmetic mean of the B leaf curves on
    the union of their knots."""
    x = np.asarray(x, dtype=np.float64)
    leaves = [_leaf_of(t.root, x) for t in forest.trees]
    return average_step_functions(leaves, initial=0.0)


def mortality_score(forest: Forest, x) -> float:
    """Sum of the ensemble CHF over the training event-time grid; higher
    means earlier predicted purchase."""
    chf = predict_chf(forest, x)
    return float(np.sum(chf(forest.event_grid)))


def rsf_risk(forest: Forest, design: DesignMatrix) -> np.ndarray:
    if design.names != forest.column_names:
        raise ValueError("design columns do not match the fitted forest")
    return np.array([mortality_score(forest, row) for row in design.X])


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {
            "chf_times": node.chf.times.tolist(),
            "chf_values": node.chf.values.tolist(),
        }
    return {
        "column": node.column,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(doc: dict) -> TreeNode:
    if "chf_times" in doc:
        return TreeNode(
            chf=StepFunction(
                times=np.asarray(doc["chf_times"]),
                values=np.asarray(doc["chf_values"]),
                initial=0.0,
            )
        )
    return TreeNode(
        column=int(doc["column"]),
        threshold=float(doc["threshold"]),
        left=_node_from_dict(doc["left"]),
        right=_node_from_dict(doc["right"]),
    )


def forest_to_dict(forest: Forest) -> dict:
    return {
        "model": "rsf",
        "column_names": forest.column_names,
        "mtry": forest.mtry,
        "min_leaf": forest.min_leaf,
        "max_depth": forest.max_depth,
        "seed": forest.seed,
        "event_grid": forest.event_grid.tolist(),
        "trees": [
            {"seed": t.seed, "inbag": t.inbag.tolist(), "root": _node_to_dict(t.root)}
            for t in forest.trees
        ],
    }


def forest_from_dict(doc: dict) -> Forest:
    return Forest(
        trees=[
            SurvivalTree(
                seed=int(t["seed"]),
                inbag=np.asarray(t["inbag"], dtype=np.int64),
                root=_node_from_dict(t["root"]),
            )
            for t in doc["trees"]
        ],
        mtry=int(doc["mtry"]),
        min_leaf=int(doc["min_leaf"]),
        max_depth=doc["max_depth"],
        seed=int(doc["seed"]),
        event_grid=np.asarray(doc["event_grid"]),
        column_names=list(doc["column_names"]),
    )
