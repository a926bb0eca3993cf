"""Picard iterations for x' = f(x, t) as a repetitive process in shifted coordinates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .engine import BoundarySpec, RunRecord, run_drp
from .passop import BLOWUP_RADIUS, DRPSystem, integrate_pass
from .signals import DomainError, Signal, TimeGrid, VectorSequence

REFINE = 10


@dataclass(frozen=True, eq=False)
class PicardProblem:
    """Initial value problem x' = f(x, t), x(0) = x_star0 on a grid.

    The reference solution is RK4 on a grid ``REFINE`` times finer,
    downsampled to ``grid``; the fine solution is kept for half-step lookups.
    """

    field: Callable[[np.ndarray, float], np.ndarray]
    x_star0: np.ndarray
    grid: TimeGrid
    fine_solution: Signal = field(init=False, repr=False)
    reference_solution: Signal = field(init=False, repr=False)

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x_star0, dtype=float))
        object.__setattr__(self, "x_star0", x0)
        n = x0.size
        fine = self.grid.refine(REFINE)
        free = DRPSystem(lambda x, u, t: np.asarray(self.field(x, t), dtype=float),
                         lambda x, u, t: x, n, n, fine, origin_anchored=False)
        sol = integrate_pass(free, x0, Signal.zeros(fine, n)).state
        object.__setattr__(self, "fine_solution", sol)
        object.__setattr__(self, "reference_solution", Signal(self.grid, sol.samples[::REFINE]))

    @property
    def n(self) -> int:
        return self.x_star0.size

    def x_star(self, t: float) -> np.ndarray:
        return self.fine_solution.at(t)


def picard_drp(prob: PicardProblem) -> DRPSystem:
    """Shifted process: x_{k+1}' = f(y_k + x*(t), t) - f(x*(t), t), y_{k+1} = x_{k+1}.

    x*' is evaluated as f(x*(t), t), which is exact on the solution.
    """
    fld, xs = prob.field, prob.x_star
    n = prob.n
    eye = np.eye(n)

    def f(chi, u, t):
        ref = xs(t)
        return np.asarray(fld(u + ref, t), dtype=float) - np.asarray(fld(ref, t), dtype=float)

    return DRPSystem(f, lambda chi, u, t: chi, n, n, prob.grid,
                     dfdx=lambda chi, u, t: np.zeros((n, n)),
                     dgdx=lambda chi, u, t: eye,
                     dgdu=lambda chi, u, t: np.zeros((n, n)),
                     name="picard")


@dataclass
class PicardRun:
    record: RunRecord

    @property
    def errors(self) -> list[float]:
        """||y_k - x*||, k = 0..K."""
        return self.record.output_norms


def run_picard(prob: PicardProblem, K: int, x0_seq: VectorSequence | None = None,
               y0: Signal | None = None, blowup_radius: float = BLOWUP_RADIUS) -> PicardRun:
    """Picard iterates from y0 (default: the constant x_star0) with initial states x0_seq.

    ``x0_seq`` lists x_1(0), ..., x_K(0); it defaults to the constant x_star0.
    """
    n = prob.n
    if x0_seq is None:
        x0_seq = VectorSequence.constant(K, prob.x_star0)
    if x0_seq.dim != n:
        raise DomainError("initial-state sequence has the wrong dimension")
    if y0 is None:
        y0 = Signal.constant(prob.grid, prob.x_star0)
    limit = None if x0_seq.limit is None else x0_seq.limit - prob.x_star0
    shifted = BoundarySpec(y0 - prob.reference_solution,
                           VectorSequence(x0_seq.items - prob.x_star0, x0_seq.kind, x0_seq.lam,
                                          x0_seq.norm_bound, limit),
                           description="picard")
    return PicardRun(run_drp(picard_drp(prob), shifted, K, blowup_radius))
