"""Time grids, sampled signals, boundary sequences and the e_lambda norm family.

All vector norms in the package are max-abs (infinity) norms, so induced
operator norms of lifted matrices reduce to max absolute row sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


def vec_norm(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x)))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i*h, i = 0..N, on the pass horizon [0, T]."""

    horizon: float
    intervals: int

    def __post_init__(self):
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise DomainError(f"horizon must be positive and finite, got {self.horizon}")
        if int(self.intervals) != self.intervals or self.intervals < 1:
            raise DomainError(f"intervals must be an integer >= 1, got {self.intervals}")
        object.__setattr__(self, "intervals", int(self.intervals))

    @property
    def step(self) -> float:
        return self.horizon / self.intervals

    @property
    def size(self) -> int:
        return self.intervals + 1

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.size) * self.step

    def refine(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.horizon, self.intervals * factor)


@dataclass(frozen=True, eq=False)
class Signal:
    """Vector-valued trajectory sampled on every node of a TimeGrid.

    ``samples`` has shape (N+1, dim) and is stored read-only.
    """

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim == 1:
            s = s.reshape(-1, 1)
        if s.ndim != 2 or s.shape[0] != self.grid.size:
            raise DomainError(
                f"expected {self.grid.size} samples, got array of shape {np.shape(self.samples)}"
            )
        if not np.all(np.isfinite(s)):
            raise DomainError("signal samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @classmethod
    def zeros(cls, grid: TimeGrid, dim: int) -> "Signal":
        return cls(grid, np.zeros((grid.size, dim)))

    @classmethod
    def constant(cls, grid: TimeGrid, value) -> "Signal":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(grid, np.tile(value, (grid.size, 1)))

    @classmethod
    def from_function(cls, grid: TimeGrid, fn: Callable[[float], Sequence[float]]) -> "Signal":
        return cls(grid, np.array([np.atleast_1d(fn(t)) for t in grid.points], dtype=float))

    def __add__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.grid, self.samples - other.samples)

    def __mul__(self, c: float) -> "Signal":
        return Signal(self.grid, self.samples * float(c))

    __rmul__ = __mul__

    def at(self, t: float) -> np.ndarray:
        """Value at time t, linear between nodes (exact on nodes)."""
        s = t / self.grid.step
        i = min(max(int(np.floor(s)), 0), self.grid.intervals - 1)
        w = s - i
        if w == 0.0:
            return self.samples[i]
        if w == 1.0:
            return self.samples[i + 1]
        return (1.0 - w) * self.samples[i] + w * self.samples[i + 1]

    def component(self, sl) -> "Signal":
        """Sub-signal made of the columns selected by ``sl``."""
        return Signal(self.grid, self.samples[:, sl])

    def flat(self) -> np.ndarray:
        """Node-major stacking, index i*dim + c; matches the lifted-operator layout."""
        return self.samples.reshape(-1).copy()

    @classmethod
    def from_flat(cls, grid: TimeGrid, vec, dim: int) -> "Signal":
        return cls(grid, np.asarray(vec, dtype=float).reshape(grid.size, dim))


def _check_same_grid(a: Signal, b: Signal):
    if a.grid != b.grid or a.dim != b.dim:
        raise DomainError("signals live on different grids or have different dimensions")


def sup_norm(s: Signal) -> float:
    return float(np.max(np.abs(s.samples))) if s.samples.size else 0.0


@dataclass(frozen=True, eq=False)
class VectorSequence:
    """Finite prefix b_1, b_2, ... of an infinite sequence of vectors.

    ``kind`` records how the sequence was produced: ``"arbitrary"``,
    ``"c0"`` (converges to ``limit``) or ``"e_lambda"`` (generated with
    ||b_{k+1} - limit|| <= norm_bound * lam**k).
    """

    items: np.ndarray
    kind: str = "arbitrary"
    lam: float | None = None
    norm_bound: float | None = None
    limit: np.ndarray | None = field(default=None)

    def __post_init__(self):
        items = np.array(self.items, dtype=float)
        if items.ndim == 1:
            items = items.reshape(-1, 1)
        if items.ndim != 2:
            raise DomainError("sequence items must share one dimension")
        items.setflags(write=False)
        object.__setattr__(self, "items", items)
        if self.kind not in ("arbitrary", "c0", "e_lambda"):
            raise DomainError(f"unknown sequence kind {self.kind!r}")
        if self.limit is not None:
            lim = np.atleast_1d(np.asarray(self.limit, dtype=float))
            if lim.shape != (items.shape[1],):
                raise DomainError("limit vector has the wrong dimension")
            lim.setflags(write=False)
            object.__setattr__(self, "limit", lim)
        if self.kind == "e_lambda":
            if self.lam is None or self.norm_bound is None:
                raise DomainError("e_lambda sequences need lam and norm_bound")
            _check_lambda(self.lam)

    def __len__(self) -> int:
        return self.items.shape[0]

    @property
    def dim(self) -> int:
        return self.items.shape[1]

    def offsets(self) -> "VectorSequence":
        """The sequence b_{k+1} - limit (zero limit if none declared)."""
        lim = np.zeros(self.dim) if self.limit is None else self.limit
        return VectorSequence(self.items - lim, self.kind, self.lam, self.norm_bound, np.zeros(self.dim))

    def drop(self, count: int) -> "VectorSequence":
        return VectorSequence(self.items[count:].reshape(-1, self.dim), "arbitrary")

    @classmethod
    def zeros(cls, length: int, dim: int) -> "VectorSequence":
        return cls(np.zeros((length, dim)), "e_lambda", lam=1.0, norm_bound=0.0, limit=np.zeros(dim))

    @classmethod
    def constant(cls, length: int, value) -> "VectorSequence":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(np.tile(value, (length, 1)), "arbitrary")


def _check_lambda(lam: float):
    if not (0.0 < lam <= 1.0):
        raise DomainError(f"lambda must lie in (0, 1], got {lam}")


def e_lambda_sequence(length: int, lam: float, norm_bound: float, limit, rng: np.random.Generator,
                      direction=None) -> VectorSequence:
    """Random sequence b_{k+1} = limit + norm_bound * lam**k * c_k with ||c_k|| <= 1.

    c_0 is a unit vector (uniform direction unless ``direction`` is given), so
    the e_lambda norm of the offsets equals ``norm_bound`` exactly; later c_k
    keep that direction with random amplitude in [0, 1].
    """
    _check_lambda(lam)
    limit = np.atleast_1d(np.asarray(limit, dtype=float))
    if direction is None:
        direction = rng.standard_normal(limit.size)
    direction = np.asarray(direction, dtype=float)
    direction = direction / vec_norm(direction)
    amps = rng.uniform(0.0, 1.0, size=length)
    amps[0] = 1.0
    k = np.arange(length)
    off = (norm_bound * lam**k * amps)[:, None] * direction[None, :]
    lim = np.broadcast_to(limit, off.shape)
    items = lim + off
    # round toward the limit so the stored offsets never exceed the declared envelope
    for _ in range(4):
        over = np.abs(items - lim) > np.abs(off)
        if not over.any():
            break
        items[over] = np.nextafter(items[over], lim[over])
    return VectorSequence(items, "e_lambda", lam=lam, norm_bound=norm_bound, limit=limit)


def e_lambda_norm(b, lam: float) -> float:
    """sup_k lam**(-k) ||b_{k+1}|| over the stored prefix."""
    _check_lambda(lam)
    items = b.items if isinstance(b, VectorSequence) else np.atleast_2d(np.asarray(b, dtype=float))
    if items.shape[0] == 0:
        return 0.0
    norms = np.max(np.abs(items), axis=1)
    # log-space weights keep lam**(-k) finite for long prefixes
    with np.errstate(divide="ignore"):
        logs = np.log(norms) - np.arange(len(norms)) * np.log(lam)
    return float(np.exp(np.max(logs))) if np.any(norms > 0) else 0.0


def claim1_recursion(r: float, a0: float, b) -> np.ndarray:
    """Roll out a_{k+1} = r a_k + b_{k+1}; returns a_0, ..., a_len(b)."""
    if not (0.0 < r < 1.0):
        raise DomainError(f"r must lie in (0, 1), got {r}")
    b = np.asarray(b.items[:, 0] if isinstance(b, VectorSequence) else b, dtype=float).ravel()
    if np.any(b < 0) or a0 < 0:
        raise DomainError("claim 1 needs nonnegative sequences")
    a = np.empty(b.size + 1)
    a[0] = a0
    for k in range(b.size):
        a[k + 1] = r * a[k] + b[k]
    return a


def tail_limsup(x, fraction: float = 0.25) -> float:
    """Finite-prefix stand-in for limsup: max over the last ``fraction`` of terms."""
    x = np.asarray(x, dtype=float).ravel()
    start = min(x.size - 1, int(np.floor(x.size * (1.0 - fraction))))
    return float(np.max(x[start:]))


def claim1_limsup_bound(r: float, a, b, fraction: float = 0.25) -> tuple[float, float]:
    """(limsup a, limsup b / (1 - r)) estimated on the tail of a rollout."""
    return tail_limsup(a, fraction), tail_limsup(b, fraction) / (1.0 - r)


def claim2_bound(a: float, k: int) -> tuple[float, float]:
    """Both sides of k a^(k-1) <= 2/(1-a) ((1+a)/2)^k."""
    if not (0.0 < a < 1.0):
        raise DomainError(f"a must lie in (0, 1), got {a}")
    lhs = 0.0 if k == 0 else k * a ** (k - 1)
    rhs = 2.0 / (1.0 - a) * ((1.0 + a) / 2.0) ** k
    return lhs, rhs
