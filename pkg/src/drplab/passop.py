"""Single-pass operator: integrate chi' = f(chi, u, t), w = g(chi, u, t) over one pass."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .signals import DomainError, Signal, TimeGrid, sup_norm, vec_norm

BLOWUP_RADIUS = 1e6

Field = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
Jacobian = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


class PassEscapeError(RuntimeError):
    """The pass state left the blow-up ball or became non-finite."""

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"pass escaped at grid index {index}")


@dataclass(frozen=True, eq=False)
class DRPSystem:
    """The pair (f, g) of a differential repetitive process on a fixed grid.

    ``f(chi, u, t)`` returns the state derivative (length n) and
    ``g(chi, u, t)`` the pass output (length m); the output of one pass is the
    input of the next. Optional ``dfdx``, ``dfdu``, ``dgdx``, ``dgdu`` return
    analytic Jacobians at an arbitrary point (chi, u, t).
    """

    f: Field
    g: Field
    n: int
    m: int
    grid: TimeGrid
    dfdx: Optional[Jacobian] = None
    dfdu: Optional[Jacobian] = None
    dgdx: Optional[Jacobian] = None
    dgdu: Optional[Jacobian] = None
    origin_anchored: bool = True
    name: str = ""

    def __post_init__(self):
        chi, u = np.zeros(self.n), np.zeros(self.m)
        fz = np.asarray(self.f(chi, u, 0.0), dtype=float)
        gz = np.asarray(self.g(chi, u, 0.0), dtype=float)
        if fz.shape != (self.n,) or gz.shape != (self.m,):
            raise DomainError(
                f"f/g return shapes {fz.shape}/{gz.shape}, expected ({self.n},)/({self.m},)"
            )

    @property
    def has_analytic_jacobians(self) -> bool:
        return None not in (self.dfdx, self.dfdu, self.dgdx, self.dgdu)

    def with_grid(self, grid: TimeGrid) -> "DRPSystem":
        return DRPSystem(self.f, self.g, self.n, self.m, grid, self.dfdx, self.dfdu,
                         self.dgdx, self.dgdu, self.origin_anchored, self.name)

    def check_origin_anchored(self, tol: float = 1e-12) -> bool:
        chi, u = np.zeros(self.n), np.zeros(self.m)
        return all(
            vec_norm(self.f(chi, u, t)) <= tol and vec_norm(self.g(chi, u, t)) <= tol
            for t in self.grid.points
        )


@dataclass(frozen=True, eq=False)
class PassResult:
    state: Signal
    output: Signal
    escape_flag: bool = False
    escape_index: Optional[int] = None


def integrate_pass(sys: DRPSystem, chi0, u: Signal, blowup_radius: float = BLOWUP_RADIUS,
                   on_escape: str = "raise") -> PassResult:
    """Classical RK4 with step h = grid step; u at half-steps is the mean of adjacent samples.

    With ``on_escape="flag"`` an escaping pass returns a PassResult whose
    samples from the first bad index on are frozen at the last good values and
    ``escape_flag`` is set; the default raises PassEscapeError.
    """
    grid = sys.grid
    if u.grid != grid:
        raise DomainError("input signal is not on the system grid")
    if u.dim != sys.m:
        raise DomainError(f"input has dimension {u.dim}, system expects {sys.m}")
    chi = np.asarray(chi0, dtype=float).reshape(sys.n)
    if not np.all(np.isfinite(chi)):
        raise DomainError("initial state must be finite")

    h = grid.step
    ts = grid.points
    us = u.samples
    f, g = sys.f, sys.g
    X = np.empty((grid.size, sys.n))
    X[0] = chi
    bad = None
    for i in range(grid.intervals):
        t, x, u0, u1 = ts[i], X[i], us[i], us[i + 1]
        um = 0.5 * (u0 + u1)
        k1 = f(x, u0, t)
        k2 = f(x + 0.5 * h * k1, um, t + 0.5 * h)
        k3 = f(x + 0.5 * h * k2, um, t + 0.5 * h)
        k4 = f(x + h * k3, u1, t + h)
        nxt = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > blowup_radius:
            bad = i + 1
            break
        X[i + 1] = nxt

    if bad is not None:
        if on_escape == "raise":
            raise PassEscapeError(bad)
        X[bad:] = X[bad - 1]

    W = np.empty((grid.size, sys.m))
    for i in range(grid.size):
        W[i] = g(X[i], us[i], ts[i])
    if bad is None and (not np.all(np.isfinite(W)) or np.max(np.abs(W)) > blowup_radius):
        bad = int(np.argmax(~np.isfinite(W).all(axis=1) | (np.abs(W) > blowup_radius).any(axis=1)))
        if on_escape == "raise":
            raise PassEscapeError(bad, f"pass output escaped at grid index {bad}")
        W[bad:] = W[bad - 1] if bad > 0 else 0.0
    return PassResult(Signal(grid, X), Signal(grid, W), bad is not None, bad)


def random_polynomial_signal(grid: TimeGrid, dim: int, rng: np.random.Generator,
                             degree: int = 3, noise: float = 0.0) -> Signal:
    """Random degree-<=3 polynomial in t/T per component, sup-norm exactly 1.

    ``noise`` adds uniform grid noise of that relative amplitude before
    normalisation.
    """
    tau = grid.points / grid.horizon
    coeffs = rng.uniform(-1.0, 1.0, size=(degree + 1, dim))
    s = np.polynomial.polynomial.polyval(tau, coeffs).T
    if noise:
        s = s + noise * vec_norm(s) * rng.uniform(-1.0, 1.0, size=s.shape)
    nrm = vec_norm(s)
    if nrm == 0.0:
        s = np.ones_like(s)
        nrm = 1.0
    return Signal(grid, s / nrm)


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.uniform(-1.0, 1.0, size=dim)
    nrm = vec_norm(v)
    return v / nrm if nrm > 0 else np.ones(dim)


def random_ball_point(sys: DRPSystem, radius: float, rng: np.random.Generator) -> tuple[np.ndarray, Signal]:
    """(chi0, u) with ||chi0|| + sup||u|| uniform in (0, radius)."""
    total = radius * rng.uniform(0.05, 0.999)
    split = rng.uniform(0.0, 1.0)
    chi0 = split * total * random_unit_vector(sys.n, rng)
    u = random_polynomial_signal(sys.grid, sys.m, rng) * ((1.0 - split) * total)
    return chi0, u


@dataclass(frozen=True)
class LipschitzEstimate:
    state: float
    output: float
    state_ratios: np.ndarray
    output_ratios: np.ndarray

    def __iter__(self):
        return iter((self.state, self.output))


def random_sign_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random vertex of the max-abs unit sphere."""
    return rng.choice([-1.0, 1.0], size=dim)


def estimate_lipschitz(sys: DRPSystem, delta_bar: float, probes: int, seed: int,
                       blowup_radius: float = BLOWUP_RADIUS) -> LipschitzEstimate:
    """Empirical Lipschitz constants of the pass operator on a small ball.

    Each probe pair is a base point in the ball of radius delta_bar/2 and a
    perturbation of size at most delta_bar/2, so both ends lie in the ball.
    The first three pairs sit at the centre (the origin) with the smallest
    perturbation size: the gain of a system with an unstable linearization
    peaks there, before saturation sets in.
    Perturbations cycle through input-only (random polynomial), state-only
    (random vertex of the max-abs sphere, where induced max-abs gains of
    near-linear maps peak) and joint. Each ratio is sup||d chi|| (or
    sup||d w||) divided by sup||d u|| + ||d chi0||.
    """
    if probes < 2:
        raise DomainError("need at least two probes")
    if delta_bar <= 0:
        raise DomainError("delta_bar must be positive")
    rng = np.random.default_rng(seed)
    half = 0.5 * delta_bar
    rs, ro = [], []
    for p in range(probes):
        if p < 3:
            chi_a, u_a = np.zeros(sys.n), Signal.zeros(sys.grid, sys.m)
            size = 0.05 * half
        else:
            chi_a, u_a = random_ball_point(sys, half, rng)
            size = half * rng.uniform(0.05, 0.999)
        kind = p % 3
        split = 1.0 if kind == 1 else 0.0 if kind == 0 else rng.uniform(0.0, 1.0)
        d_chi = split * size * random_sign_vector(sys.n, rng)
        d_u = random_polynomial_signal(sys.grid, sys.m, rng) * ((1.0 - split) * size)
        ra = integrate_pass(sys, chi_a, u_a, blowup_radius)
        rb = integrate_pass(sys, chi_a + d_chi, u_a + d_u, blowup_radius)
        denom = sup_norm(d_u) + vec_norm(d_chi)
        if denom == 0.0:
            continue
        rs.append(sup_norm(ra.state - rb.state) / denom)
        ro.append(sup_norm(ra.output - rb.output) / denom)
    rs, ro = np.array(rs), np.array(ro)
    est = LipschitzEstimate(float(rs.max()), float(ro.max()), rs, ro)
    assert np.all(est.state_ratios <= est.state) and np.all(est.output_ratios <= est.output)
    return est
