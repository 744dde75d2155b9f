"""Covariance-matrix reference values for two-mode Gaussian states.

Conventions: quadrature order (q_A, p_A, q_B, p_B), hbar = 1, vacuum
variances 1/2 at m = omega = 1, so a pure state has det(sigma) = 1/16 and
every symplectic eigenvalue is >= 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError, ParameterError, UnsupportedError
from .state_model import NORMAL_MODES, OscillatorSystem

OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
_PHYS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Covariance4:
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.shape != (4, 4) or np.max(np.abs(s - s.T)) > 1e-12:
            raise InvalidStateError("covariance must be a real symmetric 4x4 matrix")
        if np.linalg.eigvalsh(s + 0.5j * OMEGA).min() < -_PHYS_TOL:
            raise InvalidStateError("covariance violates the uncertainty principle")
        object.__setattr__(self, "sigma", (s + s.T) / 2)

    def block_A(self):
        return self.sigma[:2, :2]


def covariance_from_system(sys: OscillatorSystem, T) -> Covariance4:
    if not T >= 0:
        raise ParameterError(f"temperature must be >= 0, got {T}")
    w = sys.frequencies
    with np.errstate(over="ignore"):  # w/T -> inf is the ground-state limit
        x = np.zeros(2) if T == 0 else np.exp(-w / T)
    coth = (1.0 + x) / (1.0 - x)
    q_var = NORMAL_MODES.T @ np.diag(coth / (2.0 * sys.m * w)) @ NORMAL_MODES
    p_var = NORMAL_MODES.T @ np.diag(0.5 * sys.m * w * coth) @ NORMAL_MODES
    sigma = np.zeros((4, 4))
    sigma[np.ix_([0, 2], [0, 2])] = q_var
    sigma[np.ix_([1, 3], [1, 3])] = p_var
    return Covariance4(sigma)


def symplectic_eigenvalues(sigma):
    """Ascending symplectic spectrum (each value once)."""
    ev = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ np.asarray(sigma))))
    return ev[::2]


def partial_transpose(cov: Covariance4):
    """sigma with p_B -> -p_B."""
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    return P @ cov.sigma @ P


def global_negativity(cov: Covariance4):
    """Negativity (1 - 2 nu) / (4 nu) of the whole state, nu the smallest PT symplectic eigenvalue."""
    nu = symplectic_eigenvalues(partial_transpose(cov))[0]
    value = (1.0 - 2.0 * nu) / (4.0 * nu)
    # roundoff at the vacuum value nu = 1/2
    return float(value) if value > 1e-12 else 0.0


def reduced_entropy_global(cov: Covariance4):
    """Entropy (bits) of Alice's reduced state of a pure two-mode Gaussian."""
    det = np.linalg.det(cov.sigma)
    if abs(det - 1.0 / 16.0) > 1e-6:
        raise UnsupportedError(f"reduced entropy is the entanglement only for pure states (det = {det:.6g})")
    nu = np.sqrt(np.linalg.det(cov.block_A()))
    if nu - 0.5 < 1e-12:
        return 0.0
    return float((nu + 0.5) * np.log2(nu + 0.5) - (nu - 0.5) * np.log2(nu - 0.5))


def threshold_temperature(fn, t_lo, t_hi, dt=1e-3):
    """Bisect for the temperature where ``fn`` (entangled iff > 0) first vanishes.

    ``fn(t_lo)`` must be positive and ``fn(t_hi)`` non-positive.
    """
    if not fn(t_lo) > 0:
        raise ParameterError(f"quantity is not positive at T = {t_lo}")
    if fn(t_hi) > 0:
        raise ParameterError(f"quantity is still positive at T = {t_hi}")
    while t_hi - t_lo > dt:
        mid = 0.5 * (t_lo + t_hi)
        if fn(mid) > 0:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)
