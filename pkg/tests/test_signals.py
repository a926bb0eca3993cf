import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from drplab.signals import (
    DomainError, Signal, TimeGrid, VectorSequence, claim1_limsup_bound, claim1_recursion,
    claim2_bound, e_lambda_norm, e_lambda_sequence, sup_norm, tail_limsup,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
lams = st.floats(0.01, 1.0)


def sequences(max_len=40, max_dim=3):
    return st.integers(1, max_dim).flatmap(
        lambda d: arrays(np.float64, st.tuples(st.integers(1, max_len), st.just(d)), elements=finite))


class TestTimeGrid:
    def test_step_and_points(self):
        g = TimeGrid(2.0, 2000)
        assert g.size == 2001
        assert abs(g.step * g.intervals - g.horizon) <= 4 * np.finfo(float).eps * g.horizon
        assert g.points[0] == 0.0 and g.points[-1] == pytest.approx(2.0, abs=1e-15)
        assert g.points[7] == pytest.approx(7 * g.step, abs=1e-15)

    @pytest.mark.parametrize("T,N", [(0.0, 10), (-1.0, 10), (1.0, 0)])
    def test_rejects_bad_grid(self, T, N):
        with pytest.raises(DomainError):
            TimeGrid(T, N)

    def test_refine(self):
        g = TimeGrid(1.0, 10).refine(10)
        assert g.intervals == 100 and g.horizon == 1.0


class TestSignal:
    def test_sample_count_and_finiteness(self, grid200):
        with pytest.raises(DomainError):
            Signal(grid200, np.zeros((200, 1)))
        bad = np.zeros((201, 1))
        bad[3] = np.nan
        with pytest.raises(DomainError):
            Signal(grid200, bad)

    def test_immutable(self, grid200):
        s = Signal.zeros(grid200, 2)
        with pytest.raises(ValueError):
            s.samples[0, 0] = 1.0

    def test_interpolation_exact_on_nodes(self, grid200):
        s = Signal.from_function(grid200, lambda t: [t**2, -t])
        assert np.array_equal(s.at(grid200.points[17]), s.samples[17])
        mid = 0.5 * (grid200.points[3] + grid200.points[4])
        assert np.allclose(s.at(mid), 0.5 * (s.samples[3] + s.samples[4]))

    def test_flat_roundtrip(self, grid200, rng):
        s = Signal(grid200, rng.standard_normal((201, 3)))
        assert np.array_equal(Signal.from_flat(grid200, s.flat(), 3).samples, s.samples)
        assert s.flat()[3 * 5 + 2] == s.samples[5, 2]


class TestSupNorm:
    def test_zero(self, grid200):
        assert sup_norm(Signal.zeros(grid200, 3)) == 0.0

    def test_constant(self, grid200):
        assert sup_norm(Signal.constant(grid200, [1.0, -2.0])) == 2.0

    def test_sine(self):
        s = Signal.from_function(TimeGrid(1.0, 1000), lambda t: math.sin(2 * math.pi * t))
        assert abs(sup_norm(s) - 1.0) <= 1e-4


class TestELambdaNorm:
    def test_fixed_profile(self):
        v = np.array([0.3, -0.7])
        b = VectorSequence(np.array([0.6**k * v for k in range(30)]))
        assert e_lambda_norm(b, 0.6) == pytest.approx(0.7, rel=1e-12)

    def test_lambda_one_is_sup(self, rng):
        items = rng.standard_normal((25, 2))
        assert e_lambda_norm(VectorSequence(items), 1.0) == pytest.approx(np.abs(items).max(), rel=1e-15)

    def test_two_terms(self):
        assert e_lambda_norm(VectorSequence(np.array([[1.0], [0.25]])), 0.5) == 1.0

    @pytest.mark.parametrize("lam", [0.0, -0.1, 1.01])
    def test_domain(self, lam):
        with pytest.raises(DomainError):
            e_lambda_norm(VectorSequence(np.ones((3, 1))), lam)

    def test_no_overflow_for_small_lambda(self):
        b = VectorSequence(np.full((400, 1), 1e-300))
        assert np.isfinite(e_lambda_norm(b, 0.9)) or e_lambda_norm(b, 0.9) == np.inf

    @settings(max_examples=200, deadline=None)
    @given(items=sequences(), lam=lams, data=st.data())
    def test_shift_property(self, items, lam, data):
        kappa = data.draw(st.integers(0, items.shape[0]))
        b = VectorSequence(items)
        assert e_lambda_norm(b.drop(kappa), lam) <= lam**kappa * e_lambda_norm(b, lam) * (1 + 1e-12) + 1e-300

    @settings(max_examples=200, deadline=None)
    @given(items=sequences(), l1=lams, l2=lams)
    def test_lambda_monotone(self, items, l1, l2):
        lo, hi = min(l1, l2), max(l1, l2)
        b = VectorSequence(items)
        assert e_lambda_norm(b, hi) <= e_lambda_norm(b, lo) * (1 + 1e-12)


class TestGenerator:
    @settings(max_examples=50, deadline=None)
    @given(lam=st.floats(0.1, 0.99), bound=st.floats(1e-3, 5.0), seed=st.integers(0, 2**31),
           dim=st.integers(1, 3))
    def test_membership_enforced_at_generation(self, lam, bound, seed, dim):
        rng = np.random.default_rng(seed)
        limit = rng.standard_normal(dim)
        seq = e_lambda_sequence(30, lam, bound, limit, rng)
        off = np.abs(seq.items - limit).max(axis=1)
        assert np.all(off <= bound * lam ** np.arange(30) * (1 + 1e-9) + 1e-15)
        assert e_lambda_norm(seq.offsets(), lam) == pytest.approx(bound, rel=1e-9)

    def test_seeded_reproducible(self):
        a = e_lambda_sequence(10, 0.5, 0.09, [0.1, 0.0], np.random.default_rng(4))
        b = e_lambda_sequence(10, 0.5, 0.09, [0.1, 0.0], np.random.default_rng(4))
        assert np.array_equal(a.items, b.items)
        assert a.kind == "e_lambda" and a.lam == 0.5

    def test_mixed_dims_rejected(self):
        with pytest.raises((DomainError, ValueError)):
            VectorSequence([np.zeros(2), np.zeros(3)])


class TestClaim1:
    def test_geometric(self):
        a = claim1_recursion(0.5, 1.0, np.zeros(30))
        assert np.allclose(a, 0.5 ** np.arange(31), rtol=0, atol=1e-15)

    def test_decaying_forcing(self):
        r, q = 0.5, 0.9
        a = claim1_recursion(r, 1.0, q ** np.arange(200))
        k = np.arange(201)
        closed = r**k + (q**k - r**k) / (q - r)
        assert np.allclose(a, closed, rtol=1e-12, atol=0)
        # a_k ~ q^k / (q - r), so it drops below 1e-6 only near k = 140
        assert a[60] > 1e-3
        assert np.all(a[140:] < 1e-6)

    def test_constant_forcing(self):
        c = 1.7
        a = claim1_recursion(0.5, 0.0, np.full(200, c))
        assert a[-1] == pytest.approx(2 * c, rel=1e-12)
        lim_a, bound = claim1_limsup_bound(0.5, a, np.full(200, c))
        assert lim_a <= bound * (1 + 1e-12)

    @pytest.mark.parametrize("r", [0.0, 1.0, -0.5])
    def test_domain(self, r):
        with pytest.raises(DomainError):
            claim1_recursion(r, 1.0, np.ones(3))

    def test_negative_forcing_rejected(self):
        with pytest.raises(DomainError):
            claim1_recursion(0.5, 1.0, np.array([1.0, -1.0]))

    @settings(max_examples=100, deadline=None)
    @given(r=st.floats(0.01, 0.8), decay=st.floats(0.01, 0.8), c=st.floats(0.0, 100.0),
           a0=st.floats(0.0, 100.0))
    def test_c0_in_c0_out(self, r, decay, c, a0):
        a = claim1_recursion(r, a0, c * decay ** np.arange(400))
        assert tail_limsup(a) <= 1e-9 * max(1.0, c, a0)


class TestClaim2:
    def test_formula(self):
        lhs, rhs = claim2_bound(0.5, 3)
        assert lhs == 0.75 and rhs == pytest.approx(1.6875, rel=1e-15)

    def test_k_zero(self):
        assert claim2_bound(0.3, 0) == (0.0, pytest.approx(2 / 0.7))

    def test_near_one(self):
        lhs, rhs = claim2_bound(0.9, 50)
        assert lhs <= rhs

    @pytest.mark.parametrize("a", [0.0, 1.0, 1.5])
    def test_domain(self, a):
        with pytest.raises(DomainError):
            claim2_bound(a, 2)

    @settings(max_examples=500, deadline=None)
    @given(a=st.floats(1e-6, 1 - 1e-6), k=st.integers(0, 2000))
    def test_property(self, a, k):
        lhs, rhs = claim2_bound(a, k)
        assert lhs <= rhs * (1 + 1e-12)
