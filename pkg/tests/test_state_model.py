import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_hermite

from localent import (
    GaussianCV,
    OscillatorSystem,
    StateEvaluator,
    derivative_block,
    eval_density,
    ground_state,
    make_system,
    reduced_A_derivs,
    thermal_state,
)
from localent.errors import ConsistencyError, NoiseDominatedError, ParameterError
from localent.grid import thermal_kernel_spectral
from localent.state_model import as_evaluator, dilate


def hermite_fn(n, x):
    """Oscillator eigenfunction from the textbook normalization (m = omega = 1)."""
    norm = 1.0 / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))
    return norm * eval_hermite(n, x) * np.exp(-0.5 * x * x)


def all_states():
    sys_ = make_system(1, 1, 2)
    return [
        ground_state(make_system(1, 1, 0)),
        ground_state(make_system(1, 1, 10)),
        thermal_state(sys_, 0.5),
        thermal_state(make_system(2.0, 0.7, 0.5), 1.3),
        dilate(thermal_state(sys_, 0.3), s_A=2.0),
    ]


class TestOscillatorSystem:
    def test_uncoupled(self):
        s = make_system(1, 1, 0)
        assert s.omega_plus == s.omega_minus == 1.0

    def test_alpha_ten(self):
        assert make_system(1, 1, 10).omega_minus == pytest.approx(math.sqrt(21), abs=1e-12)
        assert math.sqrt(21) == pytest.approx(4.5826, abs=1e-4)

    @pytest.mark.parametrize("args", [(1, -1, 1), (0, 1, 1), (1, 1, -0.1)])
    def test_domain(self, args):
        with pytest.raises(ParameterError):
            make_system(*args)

    def test_from_normal_modes(self):
        s = OscillatorSystem.from_normal_modes(1, 1, 2)
        assert s.alpha == pytest.approx(1.5)
        np.testing.assert_allclose(s.frequencies, [1, 2])
        with pytest.raises(ParameterError):
            OscillatorSystem.from_normal_modes(1, 0, 2)

    def test_frozen(self):
        s = make_system()
        with pytest.raises(AttributeError):
            s.m = 2.0


class TestGroundState:
    def test_vacuum(self):
        g = ground_state(make_system(1, 1, 0))
        np.testing.assert_allclose(g.L, 0.5 * np.eye(2), atol=1e-15)
        assert g.pure and not np.any(g.M)

    def test_offdiagonal(self):
        s = make_system(1, 1, 10)
        g = ground_state(s)
        assert g.L[0, 1] == pytest.approx((1 - math.sqrt(21)) / 4, abs=1e-14)
        assert g.L[0, 1] < 0

    def test_offdiagonal_against_wavefunction_fd(self):
        # psi = exp(Q): d^2 log psi / dqA dqB = -2 L_AB
        g = ground_state(make_system(1, 1, 10))
        h = 1e-3
        logpsi = lambda x, y: np.log(g.wavefunction(x, y))
        mixed = (logpsi(h, h) - logpsi(h, -h) - logpsi(-h, h) + logpsi(-h, -h)) / (4 * h * h)
        assert mixed == pytest.approx(-2 * g.L[0, 1], rel=1e-8)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 10.0])
    def test_factorizes(self, alpha):
        g = ground_state(make_system(1, 1, alpha))
        rng = np.random.default_rng(1)
        q = rng.uniform(-2, 2, size=(50, 4))
        k = g.evaluate(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
        prod = g.wavefunction(q[:, 0], q[:, 1]) * g.wavefunction(q[:, 2], q[:, 3])
        np.testing.assert_allclose(k, prod, rtol=1e-12, atol=1e-14)

    def test_wavefunction_requires_pure(self):
        with pytest.raises(ParameterError):
            thermal_state(make_system(1, 1, 1), 0.5).wavefunction(0.0, 0.0)


class TestThermalState:
    def test_zero_temperature(self):
        s = make_system(1, 1, 10)
        t, g = thermal_state(s, 0.0), ground_state(s)
        np.testing.assert_allclose(t.L, g.L, atol=1e-12)
        np.testing.assert_allclose(t.M, g.M, atol=1e-12)

    def test_negative_temperature(self):
        with pytest.raises(ParameterError):
            thermal_state(make_system(), -0.5)

    @pytest.mark.parametrize("T", [0.05, 0.02])
    def test_low_temperature_limit(self, T):
        # dominated by the slower mode: error ~ m w_max exp(-w_min / T)
        s = make_system(1, 1, 2)
        t, g = thermal_state(s, T), ground_state(s)
        err = max(np.abs(t.L - g.L).max(), np.abs(t.M - g.M).max())
        w = s.frequencies
        assert err <= 2 * s.m * w.max() * math.exp(-w.min() / T)

    def test_single_mode_marginal_spectral_sum(self):
        st_ = thermal_state(make_system(1, 1, 0), 1.0)
        z, wz = np.polynomial.legendre.leggauss(120)
        z, wz = 10 * z, 10 * wz
        x = np.linspace(-4, 4, 9)
        X, Y = np.meshgrid(x, x, indexing="ij")
        marg = np.einsum("k,ijk->ij", wz, st_.evaluate(X[..., None], z, Y[..., None], z)).real
        beta = 1.0
        p = np.exp(-beta * (np.arange(60) + 0.5))
        ref = sum(p[n] * hermite_fn(n, X) * hermite_fn(n, Y) for n in range(60)) / p.sum()
        np.testing.assert_allclose(marg, ref, atol=1e-8)

    def test_eval_matches_spectral_sum(self):
        s = make_system(1, 1, 2)
        value = eval_density(thermal_state(s, 0.5), 0.3, -0.1, 0.2, 0.4)
        ref = thermal_kernel_spectral(s, 0.5, 0.3, -0.1, 0.2, 0.4)
        assert abs(value - ref) <= 1e-7
        assert abs(value.imag) == 0.0


class TestKernel:
    @pytest.mark.parametrize("state", all_states())
    def test_trace_on_grid(self, state):
        x = np.linspace(-8, 8, 200)
        w = np.full(200, x[1] - x[0])
        w[[0, -1]] *= 0.5
        A, B = np.meshgrid(x, x, indexing="ij")
        diag = state.evaluate(A, B, A, B)
        assert np.sum(diag.real * np.outer(w, w)) == pytest.approx(1.0, abs=1e-6)

    @given(q=st.lists(st.floats(-2, 2), min_size=4, max_size=4), alpha=st.floats(0, 10), T=st.floats(0, 2))
    @settings(max_examples=60, deadline=None)
    def test_hermiticity_and_positivity(self, q, alpha, T):
        state = thermal_state(make_system(1, 1, alpha), T)
        a, b, c, d = q
        assert eval_density(state, a, b, c, d) == pytest.approx(np.conj(eval_density(state, c, d, a, b)), abs=1e-14)
        diag = eval_density(state, a, b, a, b)
        assert diag.imag == 0 and diag.real >= 0

    def test_from_matrices_validation(self):
        with pytest.raises(ParameterError):
            GaussianCV.from_matrices(np.array([[1.0, 0.0], [0.0, -1.0]]))
        with pytest.raises(ParameterError):
            GaussianCV.from_matrices(np.eye(2), M=-np.eye(2))
        with pytest.raises(ParameterError):
            GaussianCV.from_matrices(np.array([[1.0, 0.2], [0.0, 1.0]]))

    def test_readonly(self):
        g = ground_state(make_system())
        with pytest.raises(ValueError):
            g.L[0, 0] = 3.0

    def test_dilation_is_local_unitary(self):
        st_ = thermal_state(make_system(1, 1, 2), 0.3)
        d = dilate(st_, s_A=2.0)
        assert d.evaluate(0.4, 0.1, -0.2, 0.3) == pytest.approx(st_.evaluate(0.2, 0.1, -0.1, 0.3) / 2.0, rel=1e-14)


class TestDerivativeBlock:
    def test_origin_values(self):
        g = ground_state(make_system(1, 1, 10))
        b = derivative_block(g)
        assert b["1000"] == 0
        assert b["0000"] == pytest.approx(g.zeta1, rel=1e-15)

    def test_fd_oracle(self):
        g = ground_state(OscillatorSystem.from_normal_modes(1, 1, 2))
        exact = derivative_block(g, (0.4, -0.7)).coeffs
        fd = derivative_block(as_evaluator(g), (0.4, -0.7))
        assert fd.method == "finite-difference"
        rel = np.abs(fd.coeffs - exact) / np.maximum(np.abs(exact), 1e-3 * np.abs(exact).max())
        assert rel.max() <= 1e-6

    def test_indexing(self):
        b = derivative_block(thermal_state(make_system(1, 1, 2), 0.5), (0.1, 0.2))
        assert b["0110"] == b[(0, 1, 1, 0)] == b.coeffs[0, 1, 1, 0]
        with pytest.raises(KeyError):
            b["012"]

    @given(center=st.tuples(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5)), alpha=st.floats(0, 10),
           T=st.floats(0, 1.5))
    @settings(max_examples=50, deadline=None)
    def test_hermiticity_analytic(self, center, alpha, T):
        b = derivative_block(thermal_state(make_system(1, 1, alpha), T), center)
        assert b.hermiticity_residual == 0.0
        assert b["0000"].real > 0 and b["0000"].imag == 0

    def test_hermiticity_numeric(self):
        st_ = as_evaluator(thermal_state(make_system(1, 1, 2), 0.5))
        assert derivative_block(st_, (0.3, -0.2)).hermiticity_residual <= 1e-10

    @pytest.mark.parametrize("alpha", [0.5, 10.0])
    def test_pure_factorization(self, alpha):
        for centre in [(0, 0), (0.7, -0.4)]:
            assert derivative_block(ground_state(make_system(1, 1, alpha)), centre).factorization_residual() <= 1e-8
            # finite differences of 4th mixed order bottom out near 1e-8 from roundoff
            assert derivative_block(as_evaluator(ground_state(make_system(1, 1, alpha))), centre,
                                    rtol=1e-9).factorization_residual() <= 1e-7

    def test_mixed_does_not_factorize(self):
        assert derivative_block(thermal_state(make_system(1, 1, 2), 0.5)).factorization_residual() > 1e-3

    def test_noise_detection(self):
        rng = np.random.default_rng(0)
        noisy = StateEvaluator(lambda a, b, c, d: np.exp(-(a * a + b * b + c * c + d * d))
                               * (1 + 1e-6 * rng.standard_normal(np.shape(a))))
        with pytest.raises((NoiseDominatedError, ConsistencyError)):
            derivative_block(noisy)

    def test_non_hermitian_evaluator_rejected(self):
        bad = StateEvaluator(lambda a, b, c, d: np.exp(-(a * a + b * b + c * c + d * d) + 0.5j * (a + c)))
        with pytest.raises(ConsistencyError):
            derivative_block(bad, (0.2, 0.1))


class TestReducedDerivs:
    @pytest.mark.parametrize("state", [ground_state(make_system(1, 1, 0)),
                                       dilate(ground_state(make_system(2.0, 1.5, 0)), s_A=0.6)])
    def test_pure_reduced_state_rank_one(self, state):
        d = reduced_A_derivs(state, 0.4)
        lhs, rhs = d.r11 * d.r00, d.r01 * d.r10
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)

    def test_entangled_pure_state_has_mixed_marginal(self):
        d = reduced_A_derivs(ground_state(make_system(1, 1, 10)), 0.4)
        assert (d.r11 * d.r00 - d.r01 * d.r10).real > 1e-3 * abs(d.r11 * d.r00)

    def test_thermal_is_mixed(self):
        d = reduced_A_derivs(thermal_state(make_system(1, 1, 2), 1.0), 0.2)
        assert (d.r11 * d.r00 - d.r01 * d.r10).real > 0

    @pytest.mark.parametrize("center", [0.0, 0.35])
    def test_dual_path(self, center):
        st_ = thermal_state(make_system(1, 1, 2), 0.7)
        a = reduced_A_derivs(st_, center)
        b = reduced_A_derivs(as_evaluator(st_), center)
        scale = abs(a.r11)
        for f in ("r00", "r10", "r01", "r11"):
            assert abs(getattr(a, f) - getattr(b, f)) <= 1e-7 * max(abs(getattr(a, f)), scale)

    def test_marginal_matches_spectral(self):
        # alpha = 0: rho_A is the single-oscillator thermal kernel, r00 = its diagonal
        d = reduced_A_derivs(thermal_state(make_system(1, 1, 0), 1.0), 0.3)
        p = np.exp(-(np.arange(60) + 0.5))
        ref = sum(p[n] * hermite_fn(n, 0.3) ** 2 for n in range(60)) / p.sum()
        assert d.r00.real == pytest.approx(ref, rel=1e-10)
