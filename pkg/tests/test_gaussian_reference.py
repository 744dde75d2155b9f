import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localent import derivative_block, make_system, negativity_coeffs, thermal_state
from localent import gaussian_reference as gref
from localent.errors import InvalidStateError, ParameterError, UnsupportedError
from localent.grid import (
    discretize_pure,
    grid_negativity,
    momentum_operator,
    schmidt_entropy,
    thermal_grid_density,
    uniform_grid,
)
from localent.state_model import ground_state


class TestCovariance:
    def test_vacuum(self):
        cov = gref.covariance_from_system(make_system(1, 1, 0), 0.0)
        np.testing.assert_allclose(cov.sigma, 0.5 * np.eye(4), atol=1e-15)

    @pytest.mark.parametrize("sys_", [make_system(1, 1, 10), make_system(2.5, 0.3, 0.7), make_system(1, 1, 0)])
    def test_pure_determinant(self, sys_):
        cov = gref.covariance_from_system(sys_, 0.0)
        assert np.linalg.det(cov.sigma) == pytest.approx(1 / 16, abs=1e-10)
        np.testing.assert_allclose(gref.symplectic_eigenvalues(cov.sigma), [0.5, 0.5], atol=1e-12)

    def test_unphysical(self):
        with pytest.raises(InvalidStateError):
            gref.Covariance4(0.3 * np.eye(4))
        with pytest.raises(ParameterError):
            gref.covariance_from_system(make_system(), -1.0)

    @given(alpha=st.floats(0, 10), T=st.floats(0, 3), m=st.floats(0.5, 2))
    @settings(max_examples=60, deadline=None)
    def test_symplectic_bound(self, alpha, T, m):
        cov = gref.covariance_from_system(make_system(m, 1, alpha), T)
        assert gref.symplectic_eigenvalues(cov.sigma).min() >= 0.5 - 1e-10

    def test_grid_second_moments(self):
        sys_ = make_system(1, 1, 2)
        g = uniform_grid(-6, 6, 48)
        rho = thermal_grid_density(sys_, 0.5, g, g)
        n = g.n
        I = np.eye(n)
        X = np.diag(g.nodes)
        P = momentum_operator(g)
        ops = {
            (0, 0): np.kron(X @ X, I), (2, 2): np.kron(I, X @ X), (0, 2): np.kron(X, X),
            (1, 1): np.kron(P @ P, I), (3, 3): np.kron(I, P @ P), (1, 3): np.kron(P, P),
        }
        sigma = gref.covariance_from_system(sys_, 0.5).sigma
        for (i, j), op in ops.items():
            assert rho.expectation(op).real == pytest.approx(sigma[i, j], abs=1e-5)


class TestGlobalNegativity:
    def test_product(self):
        for T in (0.0, 0.3, 2.0):
            assert gref.global_negativity(gref.covariance_from_system(make_system(1, 1, 0), T)) == 0.0

    def test_classical_limit(self):
        assert gref.global_negativity(gref.covariance_from_system(make_system(1, 1, 2), 50.0)) < 1e-6

    def test_pure_closed_form(self):
        # smallest PT symplectic eigenvalue of the ground state is sqrt(w+/w-)/2
        sys_ = make_system(1, 1, 2)
        ratio = np.sqrt(sys_.omega_minus / sys_.omega_plus)
        rep = gref.global_negativity(gref.covariance_from_system(sys_, 0.0))
        assert rep == pytest.approx((ratio - 1) / 2, rel=1e-12)

    def test_grid_oracle(self):
        sys_ = make_system(1, 1, 2)
        g = uniform_grid(-4.5, 4.5, 48)
        ng = grid_negativity(thermal_grid_density(sys_, 0.2, g, g))
        assert ng == pytest.approx(gref.global_negativity(gref.covariance_from_system(sys_, 0.2)), abs=2e-3)


class TestReducedEntropy:
    def test_product(self):
        assert gref.reduced_entropy_global(gref.covariance_from_system(make_system(1, 1, 0), 0.0)) == 0.0

    def test_increasing(self):
        S = [gref.reduced_entropy_global(gref.covariance_from_system(make_system(1, 1, a), 0.0)) for a in (1, 5, 10)]
        assert S[0] < S[1] < S[2]

    def test_grid_oracle(self):
        sys_ = make_system(1, 1, 10)
        S_grid = schmidt_entropy(discretize_pure(ground_state(sys_), uniform_grid(), uniform_grid()))
        assert gref.reduced_entropy_global(gref.covariance_from_system(sys_, 0.0)) == pytest.approx(S_grid, abs=1e-3)

    def test_mixed_rejected(self):
        with pytest.raises(UnsupportedError):
            gref.reduced_entropy_global(gref.covariance_from_system(make_system(1, 1, 2), 0.5))


class TestThreshold:
    def test_bracket_validation(self):
        with pytest.raises(ParameterError):
            gref.threshold_temperature(lambda T: -1.0, 0.1, 1.0)
        with pytest.raises(ParameterError):
            gref.threshold_temperature(lambda T: 1.0, 0.1, 1.0)

    def test_resolution(self):
        t = gref.threshold_temperature(lambda T: 0.7 - T, 0.0, 2.0, dt=1e-4)
        assert t == pytest.approx(0.7, abs=1e-4)

    @pytest.mark.parametrize("alpha", [0.5, 2.0])
    def test_local_and_global_coincide(self, alpha):
        sys_ = make_system(1, 1, alpha)
        tg = gref.threshold_temperature(
            lambda T: gref.global_negativity(gref.covariance_from_system(sys_, T)), 0.01, 5.0)
        tn = gref.threshold_temperature(
            lambda T: negativity_coeffs(derivative_block(thermal_state(sys_, T))).C1, 0.01, 5.0)
        assert abs(tn - tg) <= 2e-2
