"""Multi-pass simulation, convergence-rate fitting, exponential-bound checks and Lyapunov functionals."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .passop import BLOWUP_RADIUS, DRPSystem, PassEscapeError, integrate_pass, random_polynomial_signal
from .signals import DomainError, Signal, VectorSequence, e_lambda_norm, sup_norm

Measure = Callable[[int, Signal, Optional[Signal]], float]


@dataclass(frozen=True, eq=False)
class BoundarySpec:
    """Initial pass profile y0 and initial states x_1(0), x_2(0), ..."""

    y0: Signal
    x0: VectorSequence
    description: str = "deterministic"

    def size(self, lam: float | None = None) -> float:
        """||y0|| + ||x(0)||_{e_lam}; lam defaults to the generator's rate (or 1)."""
        if lam is None:
            lam = self.x0.lam if self.x0.kind == "e_lambda" else 1.0
        return sup_norm(self.y0) + e_lambda_norm(self.x0, lam)

    def check_generator(self, tol: float = 1e-12) -> bool:
        """Spot-check the e_lambda declaration against the stored items."""
        x0 = self.x0
        if x0.kind != "e_lambda":
            return True
        off = x0.offsets()
        return e_lambda_norm(off, x0.lam) <= x0.norm_bound * (1.0 + tol) + tol


@dataclass
class RunRecord:
    output_norms: list[float] = field(default_factory=list)
    state_norms: list[float] = field(default_factory=list)
    signals: deque = field(default_factory=lambda: deque(maxlen=3))
    escape_pass: Optional[int] = None
    boundary_size: float = 0.0
    K_hat: Optional[float] = None
    gamma_hat: Optional[float] = None
    deadbeat: bool = False

    @property
    def passes(self) -> int:
        return len(self.output_norms) - 1

    @property
    def escaped(self) -> bool:
        return self.escape_pass is not None

    def rows(self):
        for k, y in enumerate(self.output_norms):
            s = self.state_norms[k] if k < len(self.state_norms) else float("nan")
            yield k, y, s

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "output_sup_norm", "state_sup_norm"])
            for k, y, s in self.rows():
                w.writerow([k, f"{y:.17g}", "" if np.isnan(s) else f"{s:.17g}"])


def run_drp(sys: DRPSystem, boundary: BoundarySpec, K: int, blowup_radius: float = BLOWUP_RADIUS,
            keep: int = 3, measure: Optional[Measure] = None) -> RunRecord:
    """Iterate the process: pass k integrates from x_k(0) with input y_{k-1}.

    An escaping pass is recorded in ``escape_pass`` and stops the run. A
    custom ``measure(k, output, state)`` replaces the default output
    sup-norm; it sees ``state=None`` for k = 0.
    """
    if len(boundary.x0) < K:
        raise DomainError(f"boundary holds {len(boundary.x0)} initial states, need {K}")
    if boundary.y0.grid != sys.grid or boundary.y0.dim != sys.m or boundary.x0.dim != sys.n:
        raise DomainError("boundary does not match the system dimensions/grid")
    measure = measure or (lambda k, out, state: sup_norm(out))
    rec = RunRecord(signals=deque(maxlen=max(keep, 1)), boundary_size=boundary.size())
    y = boundary.y0
    rec.output_norms.append(measure(0, y, None))
    rec.state_norms.append(float("nan"))
    rec.signals.append(y)
    for k in range(1, K + 1):
        try:
            res = integrate_pass(sys, boundary.x0.items[k - 1], y, blowup_radius)
        except PassEscapeError:
            rec.escape_pass = k
            break
        y = res.output
        rec.output_norms.append(measure(k, y, res.state))
        rec.state_norms.append(sup_norm(res.state))
        rec.signals.append(y)
    fit = estimate_rate(rec) if _fittable(rec) else None
    if fit is not None:
        rec.K_hat, rec.gamma_hat = fit
        rec.deadbeat = fit[1] == 0.0
    return rec


def _fittable(rec: RunRecord, tail_fraction: float = 0.5) -> bool:
    return len(_tail(rec.output_norms, tail_fraction)) >= 5


def _tail(norms, tail_fraction):
    norms = np.asarray(norms, dtype=float)
    count = max(int(np.ceil(tail_fraction * norms.size)), 1)
    return norms[norms.size - count:]


def estimate_rate(rec: RunRecord, tail_fraction: float = 0.5) -> tuple[float, float]:
    """Least-squares fit of log||y_k|| = log c + k log gamma over the tail.

    Returns (K_hat, gamma_hat) with K_hat = c / boundary size. A tail
    containing an exact zero is deadbeat: (0.0, 0.0).
    """
    norms = np.asarray(rec.output_norms, dtype=float)
    tail = _tail(norms, tail_fraction)
    ks = np.arange(norms.size - tail.size, norms.size)
    if tail.size < 5 or not np.all(np.isfinite(tail)):
        raise DomainError("rate fit needs at least five finite tail points")
    if np.any(tail == 0.0):
        return 0.0, 0.0
    if np.any(tail <= 1e-300):
        raise DomainError("tail norms underflow the log fit")
    slope, intercept = np.polyfit(ks, np.log(tail), 1)
    size = rec.boundary_size if rec.boundary_size > 0 else 1.0
    return float(np.exp(intercept) / size), float(np.exp(slope))


def check_exp_bound(rec: RunRecord, boundary: BoundarySpec, K_fn, gamma_fn, lam: float,
                    rtol: float = 1e-12) -> bool:
    """||y_k|| <= K(lam) gamma(lam)^k (||y0|| + ||x(0)||_{e_lam}) for every recorded k.

    ``K_fn``/``gamma_fn`` may be numbers or callables of lam; ``rtol`` only
    absorbs floating-point rounding.
    """
    K = K_fn(lam) if callable(K_fn) else float(K_fn)
    gamma = gamma_fn(lam) if callable(gamma_fn) else float(gamma_fn)
    if K < 1.0 or not (0.0 < gamma < 1.0):
        raise DomainError("need K >= 1 and gamma in (0, 1)")
    size = boundary.size(lam)
    norms = np.asarray(rec.output_norms, dtype=float)
    bound = K * gamma ** np.arange(norms.size) * size
    return bool(np.all(norms <= bound * (1.0 + rtol)))


class LyapunovFunctional:
    """V(y) = sum_{i<N} sup||F0^i(y)|| for a zero-initial-state pass map F0."""

    def __init__(self, pass_map: Callable[[Signal], Signal], N: int):
        if N < 1:
            raise DomainError("N must be >= 1")
        self.pass_map = pass_map
        self.N = N

    def __call__(self, y: Signal) -> float:
        total = 0.0
        for i in range(self.N):
            if i:
                y = self.pass_map(y)
            total += sup_norm(y)
        return total


def build_lyapunov_functional(pass_map: Callable[[Signal], Signal], N: int) -> LyapunovFunctional:
    return LyapunovFunctional(pass_map, N)


def lyapunov_horizon(M_bar: float, zeta: float) -> int:
    """Smallest N >= 1 with M_bar zeta^N < 1, from a fitted bound ||F0^k|| <= M_bar zeta^k."""
    if M_bar < 1.0 or not (0.0 < zeta < 1.0):
        raise DomainError("need M_bar >= 1 and zeta in (0, 1)")
    return max(1, int(np.floor(np.log(M_bar) / -np.log(zeta))) + 1)


@dataclass(frozen=True)
class LyapunovCheck:
    c1: float
    c2: float
    c3: float
    passed: bool


def lyapunov_decrease_check(V: LyapunovFunctional, pass_map, samples: int, radius: float, seed: int,
                            grid=None, dim: int | None = None) -> LyapunovCheck:
    """Estimate c1, c2, c3 over random signals in the ball of the given radius.

    Samples are random degree-<=3 polynomials with 10% grid noise, scaled to
    a sup-norm uniform in [radius/10, radius]. The grid and dimension are
    taken from ``pass_map.sys`` when not given.
    """
    if grid is None or dim is None:
        sys = getattr(pass_map, "sys", None)
        if sys is None:
            raise DomainError("pass map carries no system; pass grid and dim explicitly")
        grid, dim = sys.grid, sys.m
    rng = np.random.default_rng(seed)
    c1, c2, c3 = np.inf, 0.0, np.inf
    for _ in range(samples):
        y = random_polynomial_signal(grid, dim, rng, noise=0.1) * (radius * rng.uniform(0.1, 1.0))
        ny = sup_norm(y)
        try:
            v = V(y)
            dv = V(pass_map(y)) - v
        except PassEscapeError as exc:
            raise DomainError(f"Lyapunov sample escaped at grid index {exc.index}; shrink the radius") from exc
        c1, c2, c3 = min(c1, v / ny), max(c2, v / ny), min(c3, -dv / ny)
    return LyapunovCheck(float(c1), float(c2), float(c3), bool(c3 > 0 and c2 > c3))


class PassMap:
    """Zero-initial-state pass map that remembers its system (for sampling)."""

    def __init__(self, sys: DRPSystem, blowup_radius: float = BLOWUP_RADIUS):
        self.sys = sys
        self._zero = np.zeros(sys.n)
        self.blowup_radius = blowup_radius

    def __call__(self, y: Signal) -> Signal:
        return integrate_pass(self.sys, self._zero, y, self.blowup_radius).output


def zero_state_pass_map(sys: DRPSystem, blowup_radius: float = BLOWUP_RADIUS) -> PassMap:
    return PassMap(sys, blowup_radius)
