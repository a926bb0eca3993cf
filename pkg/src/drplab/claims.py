"""Seeded randomized suites for the sequence inequalities and spectral equivalences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ilc import iteration_rhos
from .ltv import spectral_radius
from .signals import VectorSequence, claim1_recursion, claim1_limsup_bound, claim2_bound, e_lambda_norm


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    failures: int

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name:<24} {self.cases - self.failures:>5}/{self.cases:<5} {status}"


def claim1_suite(cases: int, seed: int, length: int = 200) -> SuiteResult:
    """b = periodic part + geometrically decaying part, so limsup b = max(periodic part).

    Checks the tail-quarter maximum of a against limsup(b)/(1 - r) and, when
    the periodic part is zero, that a has decayed (c0 in, c0 out). r and the
    decay rate stay <= 0.8 so the finite rollout has forgotten its start.
    """
    rng = np.random.default_rng(seed)
    failures = 0
    k = np.arange(length)
    for case in range(cases):
        r = rng.uniform(0.01, 0.8)
        period = int(rng.integers(1, 6))
        amp = 0.0 if case % 4 == 0 else rng.uniform(0.0, 5.0)
        pattern = rng.uniform(0.0, amp, size=period)
        c, decay = rng.uniform(0.0, 10.0), rng.uniform(0.01, 0.8)
        b = pattern[k % period] + c * decay**k
        a = claim1_recursion(r, rng.uniform(0.0, 10.0), b)
        lim_a, _ = claim1_limsup_bound(r, a, b)
        bound = pattern.max() / (1.0 - r) if amp > 0 else 0.0
        ok = lim_a <= bound + 1e-9
        if amp == 0.0:
            ok = ok and a[-1] <= 1e-9
        failures += not ok
    return SuiteResult("claim1_limsup", cases, failures)


def claim2_suite(cases: int, seed: int, inverted: bool = False) -> SuiteResult:
    """k a^(k-1) <= 2/(1-a) ((1+a)/2)^k on random (a, k); ``inverted`` asserts the opposite."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(cases):
        a = rng.uniform(1e-6, 1.0 - 1e-6)
        lhs, rhs = claim2_bound(a, int(rng.integers(0, 500)))
        ok = lhs <= rhs * (1.0 + 1e-12)
        failures += ok if inverted else not ok
    return SuiteResult("claim2_inverted" if inverted else "claim2_bound", cases, failures)


def _random_sequence(rng):
    length = int(rng.integers(1, 60))
    dim = int(rng.integers(1, 4))
    lam = rng.uniform(0.05, 1.0)
    decay = rng.uniform(0.05, 1.0)
    items = rng.standard_normal((length, dim)) * (decay ** np.arange(length))[:, None]
    return VectorSequence(items), lam


def shift_suite(cases: int, seed: int) -> SuiteResult:
    """||b_kappa||_{e_lam} <= lam^kappa ||b||_{e_lam} for dropped prefixes b_kappa."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(cases):
        b, lam = _random_sequence(rng)
        kappa = int(rng.integers(0, len(b) + 1))
        lhs = e_lambda_norm(b.drop(kappa), lam)
        failures += not lhs <= lam**kappa * e_lambda_norm(b, lam) * (1.0 + 1e-12)
    return SuiteResult("e_lambda_shift", cases, failures)


def lambda_monotone_suite(cases: int, seed: int) -> SuiteResult:
    """lam1 <= lam2 implies ||b||_{e_lam2} <= ||b||_{e_lam1}."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(cases):
        b, _ = _random_sequence(rng)
        lam1, lam2 = np.sort(rng.uniform(0.05, 1.0, size=2))
        failures += not e_lambda_norm(b, lam2) <= e_lambda_norm(b, lam1) * (1.0 + 1e-12)
    return SuiteResult("e_lambda_monotone", cases, failures)


def block_form_suite(cases: int, seed: int, tol: float = 1e-8) -> SuiteResult:
    """rho([[D],[I]] [[L, I]]) = rho(I + L D) = rho(I + D L) for random m <= 4."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(cases):
        m = int(rng.integers(1, 5))
        D, L = rng.standard_normal((m, m)), rng.standard_normal((m, m))
        a, b = iteration_rhos(D, L)
        c = spectral_radius(np.eye(m) + D @ L)
        failures += not (abs(a - b) <= tol and abs(a - c) <= tol)
    return SuiteResult("block_form_rho", cases, failures)


def run_all(seed: int = 0, cases: int = 1000, self_test: bool = False) -> list[SuiteResult]:
    results = [
        claim1_suite(cases, seed),
        claim2_suite(cases, seed + 1),
        shift_suite(cases, seed + 2),
        lambda_monotone_suite(cases, seed + 3),
        block_form_suite(min(cases, 500), seed + 4),
    ]
    if self_test:
        results.append(claim2_suite(cases, seed + 1, inverted=True))
    return results
