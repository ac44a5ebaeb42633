"""Right-continuous step functions on [0, inf).

Survival and cumulative-hazard curves are step functions with jumps at
observed event times. The value at t is the value of the last jump at or
before t; before the first jump the function takes `initial`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StepFunction:
    """y(t) = values[i] for the largest i with times[i] <= t, else initial.

    `times` must be strictly increasing.
    """

    times: np.ndarray
    values: np.ndarray
    initial: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d and equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.times.size == 0:
            out = np.full(t.shape, self.initial)
            return out if out.ndim else float(out)
        idx = np.searchsorted(self.times, t, side="right") - 1
        out = np.where(idx >= 0, self.values[np.clip(idx, 0, None)], self.initial)
        return out if out.ndim else float(out)


def average_step_functions(funcs: list[StepFunction], initial: float) -> StepFunction:
    """Pointwise mean on the union of knots.

    Each knot value is accumulated with math.fsum so the result does not
    depend on the order of `funcs`.
    """
    if not funcs:
        raise ValueError("need at least one step function")
    grid = np.unique(np.concatenate([f.times for f in funcs]))
    cols = [np.asarray(f(grid), dtype=np.float64) for f in funcs]
    n = len(funcs)
    mean = np.array(
        [math.fsum(col[i] for col in cols) / n for i in range(grid.size)]
    )
    return StepFunction(times=grid, values=mean, initial=initial)
