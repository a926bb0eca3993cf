"""Stability analysis of linear time-varying repetitive processes.

Covers the zero-initial-state pass map G0 (as a lifted matrix on the grid's
hat-function basis), the initial-state response H, the spectral certificate
alpha = max_t rho(D(t)), Gelfand root sequences, the superposition solution
and the explicit (K_G, gamma_G) exponential bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linearize import LTVQuadruple, ltv_system
from .passop import integrate_pass
from .signals import DomainError, Signal, TimeGrid, VectorSequence


class NumericalError(ArithmeticError):
    pass


def spectral_radius(M) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise DomainError(f"spectral radius needs a square matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix has non-finite entries")
    if M.shape == (1, 1):
        return float(abs(M[0, 0]))
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation did not converge: {exc}") from exc
    return float(np.max(np.abs(ev))) if ev.size else 0.0


def induced_norm(M) -> float:
    """Induced infinity norm: max absolute row sum."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return float(np.max(np.sum(np.abs(M), axis=1)))


@dataclass(frozen=True)
class StabilityCertificate:
    alpha: float
    per_time_rho: np.ndarray
    grid: TimeGrid

    @property
    def margin(self) -> float:
        return 1.0 - self.alpha

    @property
    def certified(self) -> bool:
        return self.alpha < 1.0

    @property
    def verdict(self) -> str:
        return "certified_stable" if self.certified else "not_certified"

    @property
    def argmax_time(self) -> float:
        return float(self.grid.points[int(np.argmax(self.per_time_rho))])

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "margin": self.margin,
            "verdict": self.verdict,
            "argmax_time": self.argmax_time,
        }


def alpha_from_samples(D: np.ndarray, grid: TimeGrid) -> StabilityCertificate:
    rho = np.array([spectral_radius(Di) for Di in D])
    return StabilityCertificate(float(rho.max()), rho, grid)


def alpha_certificate(quad: LTVQuadruple) -> StabilityCertificate:
    return alpha_from_samples(quad.D, quad.grid)


@dataclass(frozen=True, eq=False)
class LiftedOperator:
    """Matrix of a pass map on the grid, row/column index i*dim + component."""

    grid: TimeGrid
    out_dim: int
    in_dim: int
    matrix: np.ndarray

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def norm(self) -> float:
        return induced_norm(self.matrix)

    def causality_leak(self) -> float:
        """Largest |entry| in blocks (i, j) with j > i."""
        size = self.grid.size
        M = self.matrix.reshape(size, self.out_dim, size, self.in_dim)
        leak = 0.0
        for i in range(size - 1):
            leak = max(leak, float(np.max(np.abs(M[i, :, i + 1:, :]))))
        return leak


def _linear_pass_batch(quad: LTVQuadruple, X0: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Many passes of the linear DRP at once, same RK4 scheme as integrate_pass.

    X0 has shape (n, B), U shape (N+1, m, B); returns outputs of shape (N+1, m, B).
    """
    grid = quad.grid
    h = grid.step
    A, B, C, D = quad.A, quad.B, quad.C, quad.D
    Am, Bm = 0.5 * (A[:-1] + A[1:]), 0.5 * (B[:-1] + B[1:])
    X = np.array(X0, dtype=float)
    W = np.empty((grid.size, quad.m, X.shape[1]))
    W[0] = C[0] @ X + D[0] @ U[0]
    for i in range(grid.intervals):
        um = 0.5 * (U[i] + U[i + 1])
        k1 = A[i] @ X + B[i] @ U[i]
        k2 = Am[i] @ (X + 0.5 * h * k1) + Bm[i] @ um
        k3 = Am[i] @ (X + 0.5 * h * k2) + Bm[i] @ um
        k4 = A[i + 1] @ (X + h * k3) + B[i + 1] @ U[i + 1]
        X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        W[i + 1] = C[i + 1] @ X + D[i + 1] @ U[i + 1]
    return W


def build_lifted_G0(quad: LTVQuadruple) -> LiftedOperator:
    """Column j*m + c is the zero-initial-state response to a unit hat input at node j, component c."""
    size, m = quad.grid.size, quad.m
    cols = size * m
    U = np.zeros((size, m, cols))
    for j in range(size):
        for c in range(m):
            U[j, c, j * m + c] = 1.0
    W = _linear_pass_batch(quad, np.zeros((quad.n, cols)), U)
    return LiftedOperator(quad.grid, m, m, W.reshape(cols, cols))


def build_lifted_H(quad: LTVQuadruple) -> LiftedOperator:
    """Natural (zero-input) output response to unit initial states."""
    size, m, n = quad.grid.size, quad.m, quad.n
    W = _linear_pass_batch(quad, np.eye(n), np.zeros((size, m, n)))
    return LiftedOperator(quad.grid, m, n, W.reshape(size * m, n))


def power_norms(G0: LiftedOperator, k_max: int) -> np.ndarray:
    """log ||G0^k|| for k = 0..k_max, renormalising each product to avoid overflow."""
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    M = G0.matrix
    logs = np.empty(k_max + 1)
    logs[0] = 0.0
    P = np.eye(M.shape[0])
    log_scale = 0.0
    for k in range(1, k_max + 1):
        P = M @ P
        nrm = induced_norm(P)
        if nrm == 0.0:
            logs[k:] = -np.inf
            break
        if not np.isfinite(nrm):
            logs[k:] = np.inf
            break
        log_scale += np.log(nrm)
        P = P / nrm
        logs[k] = log_scale
    return logs


def gelfand_estimate(G0: LiftedOperator, k_max: int) -> np.ndarray:
    """Roots ||G0^k||^(1/k), k = 1..k_max; the last entry estimates rho(G0)."""
    logs = power_norms(G0, k_max)
    k = np.arange(1, k_max + 1)
    with np.errstate(over="ignore"):
        return np.exp(logs[1:] / k)


def fit_power_bound(G0: LiftedOperator, k_max: int, zeta: float | None = None) -> tuple[float, float]:
    """(M_bar, zeta) with ||G0^k|| <= M_bar zeta^k for k = 0..k_max, M_bar >= 1.

    Without an explicit ``zeta``, it is placed a quarter of the way from the
    Gelfand estimate to 1.
    """
    logs = power_norms(G0, k_max)
    if zeta is None:
        rho = float(np.exp(logs[-1] / k_max)) if np.isfinite(logs[-1]) else 0.0
        if rho >= 1.0:
            raise DomainError(f"operator does not look contractive (root estimate {rho:.3g})")
        zeta = max(rho + 0.25 * (1.0 - rho), 1e-3)
    if not (0.0 < zeta < 1.0):
        raise DomainError("zeta must lie in (0, 1)")
    k = np.arange(k_max + 1)
    finite = np.isfinite(logs)
    M_bar = max(1.0, float(np.exp(np.max(logs[finite] - k[finite] * np.log(zeta)))))
    return M_bar, zeta


def kg_gamma_bound(M_bar: float, zeta: float, H_norm: float, lam: float) -> tuple[float, float]:
    """K_G = M max(1, 2||H||/(1 - lam_bar)), gamma_G = (1 + lam_bar)/2, lam_bar = max(zeta, lam)."""
    if M_bar < 1.0:
        raise DomainError("M_bar must be >= 1")
    if not (0.0 < zeta < 1.0) or not (0.0 < lam < 1.0):
        raise DomainError("zeta and lambda must lie in (0, 1)")
    if H_norm < 0.0:
        raise DomainError("H norm must be nonnegative")
    lam_bar = max(zeta, lam)
    return M_bar * max(1.0, 2.0 * H_norm / (1.0 - lam_bar)), (1.0 + lam_bar) / 2.0


def superposition_solution(quad: LTVQuadruple, y0: Signal, x0_seq: VectorSequence, K: int) -> list[Signal]:
    """y_k = G0^k y0 + sum_{i=1}^k G0^(k-i) H x_i(0), each term built from separate passes."""
    if len(x0_seq) < K:
        raise DomainError(f"need {K} initial states, got {len(x0_seq)}")
    if y0.dim != quad.m or x0_seq.dim != quad.n or y0.grid != quad.grid:
        raise DomainError("boundary dimensions do not match the quadruple")
    sys = ltv_system(quad)
    zero_state = np.zeros(quad.n)
    zero_input = Signal.zeros(quad.grid, quad.m)

    def G0(y: Signal) -> Signal:
        return integrate_pass(sys, zero_state, y).output

    def H(x) -> Signal:
        return integrate_pass(sys, x, zero_input).output

    free = y0
    forced: list[Signal] = []
    out = [y0]
    for k in range(1, K + 1):
        free = G0(free)
        forced = [G0(term) for term in forced]
        forced.append(H(x0_seq.items[k - 1]))
        total = free
        for term in forced:
            total = total + term
        out.append(total)
    return out

