"""Iterative learning control with static update laws, viewed as a repetitive process.

The update is u_{k+1}(t) = Q(t) u_k(t) + l(e_k(t), t). The pass-to-pass
carried vector is (e_k, u_k), so an ILC scheme is itself a DRP with input and
output dimension 2m and the plant state as pass state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .engine import BoundarySpec, RunRecord, run_drp
from .linearize import fd_jacobians
from .ltv import spectral_radius
from .passop import BLOWUP_RADIUS, DRPSystem, Field, Jacobian, integrate_pass
from .signals import DomainError, Signal, VectorSequence, vec_norm


@dataclass(frozen=True, eq=False)
class ILCProblem:
    """Plant, reference and update law.

    ``learning_output`` psi(chi, u, t) replaces the measured output in the
    error fed to the update (e.g. the second derivative of the output for a
    relative-degree-two plant); its reference is ``learning_reference``.
    ``Q`` is None (identity), a scalar, an m x m matrix or a callable of t.
    """

    plant: DRPSystem
    y_des: Signal
    update: Callable[[np.ndarray, float], np.ndarray]
    x_star0: np.ndarray
    update_jacobian: Optional[Callable[[float], np.ndarray]] = None
    learning_output: Optional[Field] = None
    learning_output_du: Optional[Jacobian] = None
    learning_reference: Optional[Signal] = None
    Q: object = None
    u_star: Optional[Signal] = None
    x_star: Optional[Callable[[float], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        m = self.plant.m
        if self.y_des.dim != m or self.y_des.grid != self.plant.grid:
            raise DomainError("y_des must live on the plant grid with the plant output dimension")
        if self.learning_output is not None and self.learning_reference is None:
            raise DomainError("a learning output needs its reference signal")
        if self.learning_reference is not None and self.learning_reference.dim != m:
            raise DomainError("learning reference has the wrong dimension")
        if self.u_star is not None and self.u_star.dim != m:
            raise DomainError("u_star has the wrong dimension")
        for t in self.plant.grid.points:
            if vec_norm(self.update(np.zeros(m), t)) > 1e-12:
                raise DomainError(f"update law must vanish at zero error (fails at t={t})")
        x0 = np.asarray(self.x_star0, dtype=float)
        if x0.shape != (self.plant.n,):
            raise DomainError("x_star0 has the wrong dimension")

    @property
    def m(self) -> int:
        return self.plant.m

    def q_matrix(self, t: float) -> np.ndarray:
        Q = self.Q
        if Q is None:
            return np.eye(self.m)
        if callable(Q):
            return np.atleast_2d(np.asarray(Q(t), dtype=float))
        Q = np.asarray(Q, dtype=float)
        return Q * np.eye(self.m) if Q.ndim == 0 else Q

    def learning_error(self, chi, u, t: float) -> np.ndarray:
        if self.learning_output is None:
            return self.plant.g(chi, u, t) - self.y_des.at(t)
        return np.asarray(self.learning_output(chi, u, t)) - self.learning_reference.at(t)

    def tracking_error(self, chi, u, t: float) -> np.ndarray:
        return self.plant.g(chi, u, t) - self.y_des.at(t)

    def plant_input(self, e, u, t: float) -> np.ndarray:
        return self.q_matrix(t) @ u + np.asarray(self.update(e, t), dtype=float)


def reference_state(prob: ILCProblem, refine: int = 10) -> Callable[[float], np.ndarray]:
    """x*(t): the analytic reference when given, else RK4 with u* on a finer grid."""
    if prob.x_star is not None:
        return prob.x_star
    if prob.u_star is None:
        raise DomainError("reference state needs u_star or an analytic x_star")
    fine = prob.plant.grid.refine(refine)
    u_fine = Signal.from_function(fine, prob.u_star.at)
    sol = integrate_pass(prob.plant.with_grid(fine), prob.x_star0, u_fine).state
    return sol.at


def compose_ilc(prob: ILCProblem, shifted: bool = True) -> DRPSystem:
    """The ILC scheme as a DRP carrying (e_k, u_k) from pass to pass.

    With ``shifted=True`` coordinates are moved to the reference (x*, u*), so
    the composed process is origin-anchored when Q = I; this form is the one
    to linearize. ``shifted=False`` keeps raw (e, u) coordinates and needs no
    reference solution.
    """
    plant, m = prob.plant, prob.m

    if not shifted:
        def f(chi, v, t):
            return plant.f(chi, prob.plant_input(v[:m], v[m:], t), t)

        def g(chi, v, t):
            w = prob.plant_input(v[:m], v[m:], t)
            return np.concatenate([prob.learning_error(chi, w, t), w])

        return DRPSystem(f, g, plant.n, 2 * m, plant.grid, origin_anchored=False,
                         name=f"ilc({plant.name})")

    if prob.u_star is None:
        raise DomainError("shifted composition needs u_star")
    x_star = reference_state(prob)
    u_star = prob.u_star.at

    def f_shift(chi, v, t):
        xs, us = x_star(t), u_star(t)
        w = prob.plant_input(v[:m], v[m:] + us, t)
        return plant.f(chi + xs, w, t) - plant.f(xs, us, t)

    def g_shift(chi, v, t):
        xs, us = x_star(t), u_star(t)
        w = prob.plant_input(v[:m], v[m:] + us, t)
        return np.concatenate([prob.learning_error(chi + xs, w, t), w - us])

    return DRPSystem(f_shift, g_shift, plant.n, 2 * m, plant.grid, origin_anchored=prob.Q is None,
                     name=f"ilc-shifted({plant.name})")


@dataclass(frozen=True)
class ILCCertificate:
    per_time_rho: np.ndarray
    block_form_rho: np.ndarray
    alpha: float
    times: np.ndarray

    @property
    def certified(self) -> bool:
        return self.alpha < 1.0

    @property
    def verdict(self) -> str:
        return "certified_stable" if self.certified else "not_certified"

    @property
    def margin(self) -> float:
        return 1.0 - self.alpha

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(np.abs(self.per_time_rho - self.block_form_rho)))

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "margin": self.margin,
            "verdict": self.verdict,
            "argmax_time": float(self.times[int(np.argmax(self.per_time_rho))]),
            "block_form_max_discrepancy": self.max_discrepancy,
        }


def block_form(D, L, Q=None) -> np.ndarray:
    """[[D], [I]] @ [[L, Q]]: the linearized pass-to-pass matrix acting on (e, u)."""
    D, L = np.atleast_2d(D), np.atleast_2d(L)
    m = D.shape[0]
    Q = np.eye(m) if Q is None else np.atleast_2d(Q)
    return np.vstack([D, np.eye(m)]) @ np.hstack([L, Q])


def iteration_rhos(D, L, Q=None) -> tuple[float, float]:
    """(rho(Q + L D), rho of the block form)."""
    D, L = np.atleast_2d(D), np.atleast_2d(L)
    Q = np.eye(D.shape[0]) if Q is None else np.atleast_2d(Q)
    return spectral_radius(Q + L @ D), spectral_radius(block_form(D, L, Q))


def _update_gain(prob: ILCProblem, t: float) -> np.ndarray:
    if prob.update_jacobian is not None:
        return np.atleast_2d(np.asarray(prob.update_jacobian(t), dtype=float))
    m = prob.m
    L = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = 1e-6
        L[:, j] = (np.asarray(prob.update(e, t)) - np.asarray(prob.update(-e, t))) / 2e-6
    return L


def _feedthrough(prob: ILCProblem, chi, u, t: float) -> np.ndarray:
    if prob.learning_output is None:
        if prob.plant.dgdu is not None:
            return np.atleast_2d(prob.plant.dgdu(chi, u, t))
        return fd_jacobians(prob.plant, chi, u, t)[3]
    if prob.learning_output_du is not None:
        return np.atleast_2d(prob.learning_output_du(chi, u, t))
    m = prob.m
    D = np.empty((m, m))
    for j in range(m):
        eps = max(1e-6, 1e-6 * abs(u[j]))
        du = np.zeros(m)
        du[j] = eps
        D[:, j] = (np.asarray(prob.learning_output(chi, u + du, t))
                   - np.asarray(prob.learning_output(chi, u - du, t))) / (2 * eps)
    return D


def ilc_certificate(prob: ILCProblem) -> ILCCertificate:
    """Per-time rho(Q + L D) with D = d(learning output)/du along the reference, L = dl/de(0, t).

    Without u_star the feedthrough is evaluated along the free response
    (u = 0) from x_star0.
    """
    grid = prob.plant.grid
    if prob.u_star is not None:
        x_star, u_star = reference_state(prob), prob.u_star.at
    else:
        zero = Signal.zeros(grid, prob.m)
        x_star = integrate_pass(prob.plant, prob.x_star0, zero).state.at
        u_star = zero.at
    rho, block = [], []
    for t in grid.points:
        D = _feedthrough(prob, x_star(t), u_star(t), t)
        a, b = iteration_rhos(D, _update_gain(prob, t), prob.q_matrix(t))
        rho.append(a)
        block.append(b)
    rho, block = np.array(rho), np.array(block)
    return ILCCertificate(rho, block, float(rho.max()), grid.points)


@dataclass
class ILCRun:
    record: RunRecord
    learning_error_norms: list[float]
    u_final: Signal

    @property
    def tracking_error_norms(self) -> list[float]:
        return self.record.output_norms


def run_ilc(prob: ILCProblem, K: int, x0_seq: VectorSequence, u0: Signal | None = None,
            blowup_radius: float = BLOWUP_RADIUS) -> ILCRun:
    """Run K learning passes; ``x0_seq`` holds the plant initial states of passes 0..K.

    Pass 0 is the plant under ``u0`` (default zero). The record stores the
    tracking-error sup-norms ||y_k - y_des||.
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    if len(x0_seq) < K + 1:
        raise DomainError(f"need {K + 1} initial states (passes 0..K), got {len(x0_seq)}")
    plant, grid, m = prob.plant, prob.plant.grid, prob.m
    u0 = Signal.zeros(grid, m) if u0 is None else u0
    first = integrate_pass(plant, x0_seq.items[0], u0, blowup_radius)
    ts = grid.points
    e0 = np.array([prob.learning_error(first.state.samples[i], u0.samples[i], t) for i, t in enumerate(ts)])
    track0 = max(vec_norm(prob.tracking_error(first.state.samples[i], u0.samples[i], t))
                 for i, t in enumerate(ts))
    learning_norms = [vec_norm(e0)]

    def measure(k, out, state):
        if state is None:
            return track0
        learning_norms.append(vec_norm(out.samples[:, :m]))
        return max(vec_norm(prob.tracking_error(state.samples[i], out.samples[i, m:], t))
                   for i, t in enumerate(ts))

    boundary = BoundarySpec(Signal(grid, np.hstack([e0, u0.samples])), x0_seq.drop(1),
                            description="ilc initial states")
    rec = run_drp(compose_ilc(prob, shifted=False), boundary, K, blowup_radius, measure=measure)
    u_final = rec.signals[-1].component(slice(m, 2 * m))
    return ILCRun(rec, learning_norms, u_final)
