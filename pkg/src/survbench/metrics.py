"""Concordance index for right-censored data.

A pair (i, j) is comparable when T_i < T_j and subject i had the event:
the model should rank i as higher risk. Concordant means score_i >
score_j; equal scores count half. Pairs tied on time are not comparable.

`concordance_index` counts pairs in O(n log n) with a Fenwick tree over
score ranks; `concordance_brute` is the quadratic reference. Both return
exact integer pair counts and must agree on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UndefinedMetricError(ValueError):
    """No comparable pairs (e.g. all subjects censored)."""


@dataclass(frozen=True)
class ConcordanceResult:
    concordant: int
    discordant: int
    tied_risk: int
    comparable: int

    @property
    def cindex(self) -> float:
        return (self.concordant + 0.5 * self.tied_risk) / self.comparable


def _check(time, event, score):
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event, dtype=np.int64)
    score = np.asarray(score, dtype=np.float64)
    if not (time.shape == event.shape == score.shape) or time.ndim != 1:
        raise ValueError("time, event, score must be 1-d and aligned")
    if not np.all(np.isfinite(score)):
        raise ValueError("scores must be finite")
    return time, event, score


class _Fenwick:
    def __init__(self, n: int):
        self.n = n
        self.tree = [0] * (n + 1)

    def add(self, i: int) -> None:
        i += 1
        while i <= self.n:
            self.tree[i] += 1
            i += i & (-i)

    def prefix(self, i: int) -> int:
        """Count of inserted ranks <= i."""
        i += 1
        total = 0
        while i > 0:
            total += self.tree[i]
            i -= i & (-i)
        return total


def concordance_index(time, event, score) -> ConcordanceResult:
    """Fenwick-tree pair counting.

    Subjects are processed by strictly decreasing time so that the tree
    always holds exactly the set {j : T_j > current time}; every event
    subject in the current tie group is queried before the group is
    inserted, which keeps time-tied pairs out of the counts.
    """
    time, event, score = _check(time, event, score)
    order = np.argsort(-time, kind="stable")
    uniq = np.unique(score)
    rank = np.searchsorted(uniq, score)
    tree = _Fenwick(uniq.size)
    concordant = tied = comparable = 0
    inserted = 0
    i = 0
    n = time.size
    while i < n:
        j = i
        while j < n and time[order[j]] == time[order[i]]:
            j += 1
        for k in order[i:j]:
            if event[k] == 1 and inserted:
                below = tree.prefix(int(rank[k]) - 1)
                at = tree.prefix(int(rank[k])) - below
                concordant += below
                tied += at
                comparable += inserted
        for k in order[i:j]:
            tree.add(rank[k])
            inserted += 1
        i = j
    if comparable == 0:
        raise UndefinedMetricError("no comparable pairs")
    return ConcordanceResult(
        concordant=concordant,
        discordant=comparable - concordant - tied,
        tied_risk=tied,
        comparable=comparable,
    )


def concordance_brute(time, event, score) -> ConcordanceResult:
    """Quadratic reference: examine every ordered pair directly."""
    time, event, score = _check(time, event, score)
    n = time.size
    concordant = discordant = tied = comparable = 0
    for i in range(n):
        if event[i] != 1:
            continue
        for j in range(n):
            if time[i] < time[j]:
                comparable += 1
                if score[i] > score[j]:
                    concordant += 1
                elif score[i] < score[j]:
                    discordant += 1
                else:
                    tied += 1
    if comparable == 0:
        raise UndefinedMetricError("no comparable pairs")
    return ConcordanceResult(
        concordant=concordant,
        discordant=discordant,
        tied_risk=tied,
        comparable=comparable,
    )
