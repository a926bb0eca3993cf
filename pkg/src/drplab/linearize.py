"""Linearization at the origin and the nonlinear residual (b, d)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .passop import BLOWUP_RADIUS, DRPSystem, integrate_pass, random_ball_point
from .signals import DomainError, Signal, TimeGrid, sup_norm, vec_norm


class LinearizationError(ArithmeticError):
    def __init__(self, t: float, entry: str):
        self.t = t
        self.entry = entry
        super().__init__(f"non-finite Jacobian entry {entry} at t={t}")


@dataclass(frozen=True, eq=False)
class LTVQuadruple:
    """Sampled (A, B, C, D) with arrays of shape (N+1, rows, cols)."""

    grid: TimeGrid
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        size = self.grid.size
        arrs = {}
        for name in "ABCD":
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 3 or a.shape[0] != size:
                raise DomainError(f"{name} must have shape ({size}, rows, cols), got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise DomainError(f"{name} has non-finite entries")
            a.setflags(write=False)
            arrs[name] = a
            object.__setattr__(self, name, a)
        n, m = arrs["A"].shape[1], arrs["D"].shape[1]
        expected = {"A": (n, n), "B": (n, m), "C": (m, n), "D": (m, m)}
        for name, shp in expected.items():
            if arrs[name].shape[1:] != shp:
                raise DomainError(f"{name} blocks are {arrs[name].shape[1:]}, expected {shp}")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @classmethod
    def constant(cls, grid: TimeGrid, A, B, C, D) -> "LTVQuadruple":
        mats = [np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C, D)]
        return cls(grid, *(np.broadcast_to(x, (grid.size,) + x.shape) for x in mats))

    @classmethod
    def from_functions(cls, grid: TimeGrid, A, B, C, D) -> "LTVQuadruple":
        """Sample callables t -> matrix on the grid nodes."""
        ts = grid.points
        return cls(grid, *(np.array([np.atleast_2d(fn(t)) for t in ts]) for fn in (A, B, C, D)))

    def at(self, t: float):
        """(A, B, C, D) at time t, linearly interpolated between nodes."""
        s = t / self.grid.step
        i = min(max(int(np.floor(s)), 0), self.grid.intervals - 1)
        w = s - i
        if w == 0.0:
            return self.A[i], self.B[i], self.C[i], self.D[i]
        if w == 1.0:
            return self.A[i + 1], self.B[i + 1], self.C[i + 1], self.D[i + 1]
        return tuple((1.0 - w) * M[i] + w * M[i + 1] for M in (self.A, self.B, self.C, self.D))


def ltv_system(quad: LTVQuadruple, name: str = "ltv") -> DRPSystem:
    """The linear DRP chi' = A chi + B u, w = C chi + D u (coefficients interpolated at half-steps)."""

    def f(chi, u, t):
        A, B, _, _ = quad.at(t)
        return A @ chi + B @ u

    def g(chi, u, t):
        _, _, C, D = quad.at(t)
        return C @ chi + D @ u

    return DRPSystem(
        f, g, quad.n, quad.m, quad.grid,
        dfdx=lambda chi, u, t: quad.at(t)[0],
        dfdu=lambda chi, u, t: quad.at(t)[1],
        dgdx=lambda chi, u, t: quad.at(t)[2],
        dgdu=lambda chi, u, t: quad.at(t)[3],
        name=name,
    )


def _fd_steps(z):
    return np.maximum(1e-6, 1e-6 * np.abs(z))


def fd_jacobians(sys: DRPSystem, chi, u, t: float):
    """Central-difference (df/dchi, df/du, dg/dchi, dg/du) at (chi, u, t)."""
    chi = np.asarray(chi, dtype=float).reshape(sys.n)
    u = np.asarray(u, dtype=float).reshape(sys.m)
    out = []
    for fn in (sys.f, sys.g):
        rows = sys.n if fn is sys.f else sys.m
        for base, other, first in ((chi, u, True), (u, chi, False)):
            J = np.empty((rows, base.size))
            eps = _fd_steps(base)
            for j in range(base.size):
                e = np.zeros(base.size)
                e[j] = eps[j]
                if first:
                    fp, fm = fn(base + e, other, t), fn(base - e, other, t)
                else:
                    fp, fm = fn(other, base + e, t), fn(other, base - e, t)
                J[:, j] = (np.asarray(fp) - np.asarray(fm)) / (2.0 * eps[j])
            out.append(J)
    return tuple(out)


def analytic_jacobians(sys: DRPSystem, chi, u, t: float):
    return tuple(
        np.atleast_2d(np.asarray(J(chi, u, t), dtype=float))
        for J in (sys.dfdx, sys.dfdu, sys.dgdx, sys.dgdu)
    )


def jacobians_at(sys: DRPSystem, chi, u, t: float, method: str = "auto"):
    if method == "analytic" or (method == "auto" and sys.has_analytic_jacobians):
        mats = analytic_jacobians(sys, chi, u, t)
    else:
        mats = fd_jacobians(sys, chi, u, t)
    for name, M in zip(("A", "B", "C", "D"), mats):
        bad = np.argwhere(~np.isfinite(M))
        if bad.size:
            raise LinearizationError(t, f"{name}{tuple(int(i) for i in bad[0])}")
    return mats


def linearize_at_origin(sys: DRPSystem, method: str = "auto") -> LTVQuadruple:
    """Jacobians of f and g at (0, 0, t) on every grid node.

    ``method`` is ``"auto"`` (analytic callbacks when all four exist),
    ``"analytic"`` or ``"fd"``.
    """
    chi, u = np.zeros(sys.n), np.zeros(sys.m)
    mats = [jacobians_at(sys, chi, u, t, method) for t in sys.grid.points]
    A, B, C, D = (np.array([m[j] for m in mats]) for j in range(4))
    return LTVQuadruple(sys.grid, A.reshape(-1, sys.n, sys.n), B.reshape(-1, sys.n, sys.m),
                        C.reshape(-1, sys.m, sys.n), D.reshape(-1, sys.m, sys.m))


def residual_phi(sys: DRPSystem, quad: LTVQuadruple, chi: Signal, u: Signal) -> Signal:
    """Pointwise (b, d) = (f - A chi - B u, g - C chi - D u) on the grid nodes."""
    if chi.grid != u.grid or chi.grid != quad.grid:
        raise DomainError("signals and quadruple must share one grid")
    if chi.dim != quad.n or u.dim != quad.m:
        raise DomainError("signal dimensions do not match the quadruple")
    out = np.empty((quad.grid.size, quad.n + quad.m))
    for i, t in enumerate(quad.grid.points):
        x, v = chi.samples[i], u.samples[i]
        out[i, :quad.n] = sys.f(x, v, t) - quad.A[i] @ x - quad.B[i] @ v
        out[i, quad.n:] = sys.g(x, v, t) - quad.C[i] @ x - quad.D[i] @ v
    return Signal(quad.grid, out)


def check_residual_asymptotics(sys: DRPSystem, quad: LTVQuadruple, scales, probes: int, seed: int,
                               blowup_radius: float = BLOWUP_RADIUS) -> list[tuple[float, float]]:
    """Max of sup||phi|| / (sup||u|| + ||chi0||) over random probes at each scale."""
    scales = [float(s) for s in scales]
    if any(s <= 0 for s in scales):
        raise DomainError("scales must be positive")
    rng = np.random.default_rng(seed)
    table = []
    for scale in scales:
        worst = 0.0
        for _ in range(probes):
            chi0, u = random_ball_point(sys, scale, rng)
            res = integrate_pass(sys, chi0, u, blowup_radius)
            phi = residual_phi(sys, quad, res.state, u)
            worst = max(worst, sup_norm(phi) / (sup_norm(u) + vec_norm(chi0)))
        table.append((scale, worst))
    return table
