"""Small records shared by the fitters."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Convergence:
    """How an iterative fit ended: the criterion is a max-norm gradient
    (or projected gradient) threshold; `iterations` counts accepted steps."""

    converged: bool
    iterations: int
    gradient_norm: float

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
        }

    @staticmethod
    def from_dict(doc: dict) -> "Convergence":
        return Convergence(
            bool(doc["converged"]), int(doc["iterations"]), float(doc["gradient_norm"])
        )
