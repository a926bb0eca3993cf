import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drplab.passop import (
    DRPSystem, PassEscapeError, estimate_lipschitz, integrate_pass, random_ball_point,
    random_polynomial_signal,
)
from drplab.signals import DomainError, Signal, TimeGrid, sup_norm, vec_norm
from drplab.systems import van_der_pol


def scalar(f, g, grid, **kw):
    return DRPSystem(lambda x, u, t: np.atleast_1d(f(x, u, t)), lambda x, u, t: np.atleast_1d(g(x, u, t)),
                     1, 1, grid, **kw)


def test_identity_pass_through(grid200, rng):
    sys = scalar(lambda x, u, t: 0.0 * x, lambda x, u, t: u, grid200)
    u = random_polynomial_signal(grid200, 1, rng)
    res = integrate_pass(sys, [0.0], u)
    assert np.array_equal(res.output.samples, u.samples)
    assert sup_norm(res.state) == 0.0 and not res.escape_flag


def test_exponential_accuracy():
    grid = TimeGrid(1.0, 1000)
    sys = scalar(lambda x, u, t: x, lambda x, u, t: x, grid, origin_anchored=True)
    res = integrate_pass(sys, [1.0], Signal.zeros(grid, 1))
    assert abs(res.output.samples[-1, 0] - math.e) <= 1e-9


def test_observed_order():
    errs = []
    for N in (20, 40, 80):
        grid = TimeGrid(1.0, N)
        sys = scalar(lambda x, u, t: x, lambda x, u, t: x, grid)
        out = integrate_pass(sys, [1.0], Signal.zeros(grid, 1)).output
        errs.append(np.max(np.abs(out.samples[:, 0] - np.exp(grid.points))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 3.5)


def test_forced_linear_matches_closed_form():
    # x' = -x + u with u = t: x(t) = t - 1 + 2 e^{-t} from x(0) = 1; u is linear so
    # the half-step interpolation is exact
    grid = TimeGrid(2.0, 400)
    sys = scalar(lambda x, u, t: -x + u, lambda x, u, t: x, grid)
    u = Signal.from_function(grid, lambda t: t)
    out = integrate_pass(sys, [1.0], u).output.samples[:, 0]
    t = grid.points
    assert np.max(np.abs(out - (t - 1 + 2 * np.exp(-t)))) <= 1e-10


def test_vdp_free_trajectory_bounded():
    grid = TimeGrid(2.0, 2000)
    res = integrate_pass(van_der_pol(grid), [0.1, 0.0], Signal.zeros(grid, 1))
    assert not res.escape_flag
    assert np.all(np.isfinite(res.state.samples))
    # the origin is unstable: the trajectory leaves the 0.1 neighbourhood
    assert sup_norm(res.state) > 0.5


def test_vdp_refinement_consistency():
    coarse, fine = TimeGrid(2.0, 2000), TimeGrid(2.0, 20000)
    a = integrate_pass(van_der_pol(coarse), [0.1, 0.0], Signal.zeros(coarse, 1)).state.samples
    b = integrate_pass(van_der_pol(fine), [0.1, 0.0], Signal.zeros(fine, 1)).state.samples[::10]
    assert np.max(np.abs(a - b)) <= 1e-6


def test_escape_raises_with_index():
    grid = TimeGrid(1.0, 100)
    sys = scalar(lambda x, u, t: x**2, lambda x, u, t: x, grid)
    with pytest.raises(PassEscapeError) as exc:
        integrate_pass(sys, [10.0], Signal.zeros(grid, 1))
    idx = exc.value.index
    assert 1 <= idx <= 100
    flagged = integrate_pass(sys, [10.0], Signal.zeros(grid, 1), on_escape="flag")
    assert flagged.escape_flag and flagged.escape_index == idx
    assert np.all(np.isfinite(flagged.state.samples))


def test_custom_blowup_radius():
    grid = TimeGrid(1.0, 100)
    sys = scalar(lambda x, u, t: x, lambda x, u, t: x, grid)
    with pytest.raises(PassEscapeError):
        integrate_pass(sys, [1.0], Signal.zeros(grid, 1), blowup_radius=2.0)


def test_input_validation(grid200):
    sys = scalar(lambda x, u, t: -x, lambda x, u, t: x, grid200)
    with pytest.raises(DomainError):
        integrate_pass(sys, [0.0], Signal.zeros(TimeGrid(1.0, 100), 1))
    with pytest.raises(DomainError):
        integrate_pass(sys, [0.0], Signal.zeros(grid200, 2))
    with pytest.raises(DomainError):
        integrate_pass(sys, [np.nan], Signal.zeros(grid200, 1))


def test_shape_checked_at_construction(grid200):
    with pytest.raises(DomainError):
        DRPSystem(lambda x, u, t: np.zeros(2), lambda x, u, t: u, 1, 1, grid200)


def test_determinism(rng):
    grid = TimeGrid(2.0, 500)
    u = random_polynomial_signal(grid, 1, rng)
    a = integrate_pass(van_der_pol(grid), [0.1, 0.0], u)
    b = integrate_pass(van_der_pol(grid), [0.1, 0.0], u)
    assert np.array_equal(a.state.samples, b.state.samples)
    assert np.array_equal(a.output.samples, b.output.samples)


def test_zero_preservation():
    grid = TimeGrid(2.0, 400)
    vdp = van_der_pol(grid)
    assert vdp.check_origin_anchored()
    res = integrate_pass(vdp, [0.0, 0.0], Signal.zeros(grid, 1))
    assert sup_norm(res.state) == 0.0 and sup_norm(res.output) == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), radius=st.floats(1e-3, 1.0))
def test_ball_points_inside(seed, radius):
    grid = TimeGrid(1.0, 50)
    sys = van_der_pol(grid)
    chi0, u = random_ball_point(sys, radius, np.random.default_rng(seed))
    assert vec_norm(chi0) + sup_norm(u) < radius


def test_polynomial_signal_unit_norm(grid200, rng):
    s = random_polynomial_signal(grid200, 2, rng)
    assert sup_norm(s) == pytest.approx(1.0)


class TestLipschitz:
    def test_stable_lti_gain_at_most_one(self):
        grid = TimeGrid(1.0, 200)
        sys = scalar(lambda x, u, t: -x + u, lambda x, u, t: x, grid)
        est = estimate_lipschitz(sys, 0.1, 30, seed=0)
        assert est.state <= 1 + 1e-9 and est.output <= 1 + 1e-9

    def test_identity_output_gain(self):
        grid = TimeGrid(1.0, 100)
        sys = scalar(lambda x, u, t: 0.0 * x, lambda x, u, t: u, grid)
        L_state, L_out = estimate_lipschitz(sys, 0.1, 12, seed=3)
        assert L_out == pytest.approx(1.0, abs=1e-12)
        assert L_state <= 1.0 + 1e-12

    def test_ratios_never_exceed_estimate(self):
        est = estimate_lipschitz(van_der_pol(TimeGrid(2.0, 400)), 0.05, 9, seed=1)
        assert np.all(est.state_ratios <= est.state) and np.all(est.output_ratios <= est.output)

    def test_vdp_seed_stability(self):
        grid = TimeGrid(2.0, 400)
        vals = np.array([tuple(estimate_lipschitz(van_der_pol(grid), 0.05, 12, seed=s)) for s in range(5)])
        assert np.all(np.isfinite(vals))
        assert np.all(vals.max(axis=0) / vals.min(axis=0) <= 2.0)

    def test_bad_arguments(self, grid200):
        sys = scalar(lambda x, u, t: -x, lambda x, u, t: x, grid200)
        with pytest.raises(DomainError):
            estimate_lipschitz(sys, 0.1, 1, seed=0)
        with pytest.raises(DomainError):
            estimate_lipschitz(sys, 0.0, 4, seed=0)

    def test_escape_propagates(self):
        grid = TimeGrid(1.0, 100)
        sys = scalar(lambda x, u, t: 50 * x**3 + u, lambda x, u, t: x, grid)
        with pytest.raises(PassEscapeError):
            estimate_lipschitz(sys, 5.0, 6, seed=0)
