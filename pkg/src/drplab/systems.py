"""Ready-made processes: memoryless and LTI families, cubic perturbations, Van der Pol."""

from __future__ import annotations

import numpy as np

from .ilc import ILCProblem
from .linearize import LTVQuadruple, ltv_system
from .passop import DRPSystem
from .signals import Signal, TimeGrid


def d_only(grid: TimeGrid, d) -> DRPSystem:
    """Memoryless process y_{k+1} = D y_k (A = B = C = 0, one dummy state)."""
    D = np.atleast_2d(np.asarray(d, dtype=float))
    m = D.shape[0]
    return ltv_system(LTVQuadruple.constant(grid, np.zeros((1, 1)), np.zeros((1, m)),
                                            np.zeros((m, 1)), D), name=f"d-only({d})")


def lti(grid: TimeGrid, A, B, C, D) -> DRPSystem:
    return ltv_system(LTVQuadruple.constant(grid, A, B, C, D), name="lti")


def cubic_family(grid: TimeGrid, A, B, C, D, c_state: float = 0.5, c_out: float = 0.5) -> DRPSystem:
    """LTI process plus componentwise cubic terms: f += c_state chi^3, g += c_out u^3.

    The cubic terms have zero derivative at the origin, so the linearization
    is (A, B, C, D) exactly.
    """
    A, B, C, D = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C, D))
    n, m = A.shape[0], D.shape[0]

    def f(chi, u, t):
        return A @ chi + B @ u + c_state * chi**3

    def g(chi, u, t):
        return C @ chi + D @ u + c_out * u**3

    return DRPSystem(
        f, g, n, m, grid,
        dfdx=lambda chi, u, t: A + np.diag(3 * c_state * chi**2),
        dfdu=lambda chi, u, t: B,
        dgdx=lambda chi, u, t: C,
        dgdu=lambda chi, u, t: D + np.diag(3 * c_out * u**2),
        name="cubic",
    )


def vdp_damping(t: float) -> float:
    return 4.0 + 0.5 * np.sin(2.0 * np.pi * 10.0 * t)


def vdp_accel(q, t: float) -> float:
    """Unforced part of the second state equation: -q1 + Xi(t) (1 - q1^2) q2."""
    return -q[0] + vdp_damping(t) * (1.0 - q[0] ** 2) * q[1]


def van_der_pol(grid: TimeGrid, damping=vdp_damping) -> DRPSystem:
    """Actuated Van der Pol oscillator with input u and output q1, as a process."""

    def f(q, u, t):
        return np.array([q[1], -q[0] + damping(t) * (1.0 - q[0] ** 2) * q[1] + u[0]])

    def dfdx(q, u, t):
        xi = damping(t)
        return np.array([[0.0, 1.0], [-1.0 - 2.0 * xi * q[0] * q[1], xi * (1.0 - q[0] ** 2)]])

    return DRPSystem(
        f, lambda q, u, t: np.array([q[0]]), 2, 1, grid,
        dfdx=dfdx,
        dfdu=lambda q, u, t: np.array([[0.0], [1.0]]),
        dgdx=lambda q, u, t: np.array([[1.0, 0.0]]),
        dgdu=lambda q, u, t: np.zeros((1, 1)),
        name="van-der-pol",
    )


def vdp_reference(t: float) -> np.ndarray:
    """(y_des, y_des', y_des'') for y_des = 0.1 cos(2 pi t)."""
    w = 2.0 * np.pi
    return np.array([0.1 * np.cos(w * t), -0.1 * w * np.sin(w * t), -0.1 * w * w * np.cos(w * t)])


def vdp_ilc_problem(grid: TimeGrid | None = None) -> ILCProblem:
    """Tracking y_des = 0.1 cos(2 pi t) on [0, 2] with u_{k+1} = u_k - (y_k'' - y_des'').

    The learning output is the second state derivative, which equals y''
    exactly, so its input Jacobian is 1.
    """
    grid = grid or TimeGrid(2.0, 2000)
    plant = van_der_pol(grid)
    y_des = Signal.from_function(grid, lambda t: vdp_reference(t)[0])
    ydd_des = Signal.from_function(grid, lambda t: vdp_reference(t)[2])

    def u_star(t):
        r = vdp_reference(t)
        return r[2] - vdp_accel(r[:2], t)

    return ILCProblem(
        plant=plant,
        y_des=y_des,
        update=lambda e, t: -e,
        update_jacobian=lambda t: -np.eye(1),
        learning_output=lambda q, u, t: np.array([vdp_accel(q, t) + u[0]]),
        learning_output_du=lambda q, u, t: np.eye(1),
        learning_reference=ydd_des,
        x_star0=np.array([0.1, 0.0]),
        u_star=Signal.from_function(grid, u_star),
        x_star=lambda t: vdp_reference(t)[:2],
        name="vanderpol-ilc",
    )
