import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import beta_st, naive_lif, random_piecewise_constant, samples_st, theta_st
from spikequant.alexiewicz import alexiewicz_norm
from spikequant.encoder import (
    if_encode,
    lif,
    lif_continuous,
    lif_discrete,
    membrane_trace,
    quantize,
    quantize_trunc,
    sod_encode,
)
from spikequant.experiments import a_alpha, gen_counterexample
from spikequant.signal import (
    ContinuousSignal,
    DiscreteSignal,
    EncoderParams,
    l1_norm,
    piecewise_linear_derivative,
)


class TestQuantizer:
    @pytest.mark.parametrize("z,expected", [(1.7, 1.0), (-0.3, 0.0), (2.0, 2.0), (-2.0, -2.0), (-1.7, -1.0), (0.0, 0.0)])
    def test_examples(self, z, expected):
        assert quantize_trunc(z, 1.0) == expected

    @given(st.integers(-10**6, 10**6), st.floats(1e-3, 1e3))
    def test_float_multiples_are_fixed_points(self, n, theta):
        z = n * theta
        assert quantize_trunc(z, theta) == z

    @given(st.floats(-1e6, 1e6), theta_st)
    def test_bit_identical_vector_form(self, z, theta):
        assert quantize(np.array([z]), theta)[0] == quantize_trunc(z, theta)

    @given(st.floats(-1e6, 1e6), theta_st)
    def test_truncates_toward_zero(self, z, theta):
        q = quantize_trunc(z, theta)
        assert abs(q) <= abs(z)
        assert abs(z - q) < theta
        assert q == 0 or math.copysign(1, q) == math.copysign(1, z)

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            quantize_trunc(1.0, 0.0)


class TestDiscreteLif:
    def test_hand_recursion(self):
        s = lif_discrete(DiscreteSignal([1.5, 0.4, 0.8]), EncoderParams(1.0, 0.5))
        assert s.events == [(1.0, 1.0), (3.0, 1.0)]
        z = [p.z for p in membrane_trace(DiscreteSignal([1.5, 0.4, 0.8]), EncoderParams(1.0, 0.5))]
        np.testing.assert_allclose(z, [1.5, 0.65, 1.125])

    def test_zero(self):
        assert len(lif_discrete(DiscreteSignal(np.zeros(7)), EncoderParams(1.0, 0.5))) == 0

    def test_integrate_and_fire(self):
        assert if_encode(DiscreteSignal([0.6, 0.6, 0.6]), 1.0).events == [(2.0, 1.0)]
        np.testing.assert_array_equal(if_encode(DiscreteSignal([0.6, 0.6, 0.6]), 1.0).to_dense(3), [0, 1, 0])
        assert if_encode(DiscreteSignal([-0.4, -0.7]), 1.0).events == [(2.0, -1.0)]

    def test_multi_threshold_spike(self):
        assert if_encode(DiscreteSignal([2.5]), 1.0).events == [(1.0, 2.0)]

    def test_if_rejects_leak(self):
        with pytest.raises(ValueError):
            if_encode(DiscreteSignal([1.0]), EncoderParams(1.0, 0.5))

    def test_trace_residual(self):
        (p,) = membrane_trace(DiscreteSignal([1.5]), EncoderParams(1.0, 1.0))
        assert (p.t, p.z, p.s, p.residual) == (1.0, 1.5, 1.0, 0.5)

    def test_matches_rational_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            x = rng.uniform(-3, 3, size=rng.integers(1, 40))
            beta = float(rng.choice([0.0, 0.2, 0.5, 0.8, 1.0]))
            theta = float(rng.choice([0.5, 1.0, 2.0]))
            got = lif_discrete(DiscreteSignal(x), EncoderParams(theta, beta)).to_dense(len(x))
            np.testing.assert_array_equal(got, naive_lif(x, beta, theta))


class TestLifProperties:
    @settings(max_examples=300)
    @given(samples_st, beta_st, theta_st)
    def test_quantization_bound(self, x, beta, theta):
        f = DiscreteSignal(x)
        p = EncoderParams(theta, beta)
        assert alexiewicz_norm(f - lif(f, p), p) < theta * (1 + 1e-9)

    @given(samples_st, beta_st, theta_st)
    def test_idempotent(self, x, beta, theta):
        p = EncoderParams(theta, beta)
        s = lif(DiscreteSignal(x), p)
        assert lif(s.to_discrete(len(x)), p) == s

    @given(samples_st, beta_st, st.sampled_from([0.25, 0.5, 2.0, 4.0]))
    def test_homogeneous(self, x, beta, theta):
        f = DiscreteSignal(x)
        lhs = lif(f, EncoderParams(theta, beta))
        rhs = lif(f.scale(1 / theta), EncoderParams(1.0, beta)).scale(theta)
        assert lhs == rhs

    @given(samples_st, beta_st, theta_st)
    def test_sparser_than_input(self, x, beta, theta):
        f = DiscreteSignal(x)
        assert l1_norm(lif(f, EncoderParams(theta, beta))) <= l1_norm(f) + 1e-9

    @given(samples_st, beta_st)
    def test_residuals_inside_threshold(self, x, beta):
        for p in membrane_trace(DiscreteSignal(x), EncoderParams(1.0, beta)):
            assert abs(p.residual) < 1.0


class TestContinuousLif:
    def test_unit_ramp(self):
        f = ContinuousSignal.from_segments([(0, 3, 1.0)])
        s = lif(f, EncoderParams(1.0, 1.0))
        assert s.events == [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]

    def test_impulses_match_discrete(self):
        d = DiscreteSignal([1.0, -1.0, 1.0])
        p = EncoderParams(1.0, 1.0)
        assert lif(d.to_continuous(), p).events == [(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]

    @pytest.mark.parametrize("seed", range(20))
    def test_impulse_embedding_matches_discrete(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-3, 3, size=rng.integers(1, 30))
        p = EncoderParams(1.0, float(rng.choice([0.2, 0.5, 0.8, 1.0])))
        a = lif(DiscreteSignal(x).to_continuous(), p)
        b = lif(DiscreteSignal(x), p)
        np.testing.assert_array_equal(a.times, b.times)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    def test_exponential_crossing(self):
        alpha = 0.7
        f = ContinuousSignal.from_segments([(0, 10, 1.0)])
        s = lif(f, EncoderParams.from_alpha(alpha))
        tau = -math.log1p(-alpha) / alpha
        assert s.times[0] == pytest.approx(tau, rel=1e-12)
        np.testing.assert_allclose(np.diff(s.times), tau, rtol=1e-10)

    def test_sub_threshold_leak_never_fires(self):
        f = ContinuousSignal.from_segments([(0, 100, 0.5)])
        assert len(lif(f, EncoderParams.from_alpha(0.6))) == 0

    @pytest.mark.parametrize("seed", range(40))
    def test_quantization_bound_closed(self, seed):
        rng = np.random.default_rng(100 + seed)
        f = random_piecewise_constant(rng)
        p = EncoderParams(float(rng.choice([0.5, 1.0])), float(rng.choice([0.2, 0.5, 0.8, 1.0])))
        s = lif(f, p)
        assert alexiewicz_norm(f - s, p) <= p.theta * (1 + 1e-9)
        assert l1_norm(s) <= l1_norm(f) + 1e-9

    def test_beta_zero_rejected(self):
        with pytest.raises(ValueError):
            lif_continuous(ContinuousSignal.zero(1.0), EncoderParams(1.0, 0.0))

    @pytest.mark.parametrize("beta", [0.2, 0.5, 0.8, 0.95])
    def test_counterexample_calibration(self, beta):
        n = 12
        s = lif(gen_counterexample(beta, n), EncoderParams(1.0, beta))
        assert len(s) == n
        np.testing.assert_allclose(s.times, np.arange(1, n + 1), atol=1e-9)
        np.testing.assert_array_equal(s.amplitudes, np.where(np.arange(n) % 2 == 0, 1.0, -1.0))

    def test_counterexample_trace_hits_threshold(self):
        trace = membrane_trace(gen_counterexample(0.8, 6), EncoderParams(1.0, 0.8))
        spikes = [p for p in trace if p.s != 0]
        assert [abs(p.z) for p in spikes] == [1.0] * 6

    def test_counterexample_n6_events(self):
        s = lif(gen_counterexample(0.8, 6), EncoderParams(1.0, 0.8))
        assert [a for _, a in s.events] == [1, -1, 1, -1, 1, -1]


class TestIfAsQuantization:
    """Running sums of IF against the quantized running sums of the input."""

    @pytest.mark.parametrize("seed", range(20))
    def test_identity_for_one_signed_input(self, seed):
        rng = np.random.default_rng(seed)
        f = np.abs(rng.uniform(-3, 3, size=rng.integers(1, 100))) * rng.choice([-1, 1])
        s = if_encode(DiscreteSignal(f), 1.0).to_dense(len(f))
        np.testing.assert_array_equal(np.cumsum(s), quantize(np.cumsum(f), 1.0))

    def test_identity_breaks_when_running_sum_falls_back(self):
        # truncation: q(F_2 - q(F_1)) + q(F_1) = q(-0.5) + 1 = 1, while q(F_2) = q(0.5) = 0
        f = DiscreteSignal([1.5, -1.0])
        s = if_encode(f, 1.0).to_dense(2)
        np.testing.assert_array_equal(np.cumsum(s), [1.0, 1.0])
        np.testing.assert_array_equal(quantize(np.cumsum(f.samples), 1.0), [1.0, 0.0])

    @pytest.mark.parametrize("seed", range(20))
    def test_running_sum_error_below_theta(self, seed):
        rng = np.random.default_rng(seed)
        f = rng.uniform(-3, 3, size=rng.integers(1, 100))
        s = if_encode(DiscreteSignal(f), 1.0).to_dense(len(f))
        assert np.max(np.abs(np.cumsum(s) - np.cumsum(f))) < 1.0


class TestSod:
    def test_ramp(self):
        assert sod_encode([(0, 0), (3, 3)], 1.0).events == [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]

    def test_constant(self):
        assert len(sod_encode([(0, 2), (5, 2)], 1.0)) == 0

    def test_triangle(self):
        s = sod_encode([(0, 0), (1, 1.5), (2, 0)], 1.0)
        np.testing.assert_allclose(s.times, [2 / 3, 2.0], atol=1e-12)
        np.testing.assert_array_equal(s.amplitudes, [1.0, -1.0])

    def test_triangle_agrees_with_if_on_derivative(self):
        nodes = [(0, 0), (1, 1.5), (2, 0)]
        a = sod_encode(nodes, 1.0)
        b = if_encode(piecewise_linear_derivative(nodes), 1.0)
        np.testing.assert_allclose(a.times, b.times, atol=1e-12)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    @pytest.mark.parametrize("seed", range(30))
    def test_bridge_random(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 10))
        t = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 2.0, size=m - 1))])
        v = np.concatenate([[0.0], np.cumsum(rng.uniform(-3, 3, size=m - 1))])
        nodes = list(zip(t, v))
        a = sod_encode(nodes, 0.5)
        b = if_encode(piecewise_linear_derivative(nodes), 0.5)
        assert len(a) == len(b)
        np.testing.assert_allclose(a.times, b.times, atol=1e-9)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            sod_encode([(0, 0), (1, 1)], -1.0)


def test_a_alpha_value():
    assert a_alpha(0.8) == pytest.approx(1.1157178, abs=5e-8)
