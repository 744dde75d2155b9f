"""Two-mode continuous-variable states and their local derivative data.

Units: hbar = k_B = 1, lengths in (m omega)^(-1/2).  A Gaussian density
kernel is stored in the form

    rho(q; q') = zeta1 * exp[-q.L.q - q'.L.q' - (q-q').M.(q-q')/2
                             + (i/2) (q-q').K.(q+q')]

with q = (q_A, q_B).  Everything that consumes a state only needs
:func:`eval_density`, :func:`derivative_block` and
:func:`reduced_A_derivs`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate

from ._numdiff import mixed_partials
from .errors import ConsistencyError, NumericalError, ParameterError

# Rows are the normal-mode coordinates q_+ = (q_A + q_B)/sqrt2 and
# q_- = (q_A - q_B)/sqrt2.
NORMAL_MODES = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)

# Variable order of the 4-point expansion: (q_A, q'_A, q_B, q'_B), matching
# the index order of rho_ijkl.
_VARS = ("qA", "qA'", "qB", "qB'")


@dataclass(frozen=True)
class OscillatorSystem:
    """Two identical oscillators with a harmonic coupling.

    ``alpha = 2K / (m omega^2)`` is the dimensionless coupling.  The default
    convention puts the centre-of-mass mode at ``omega`` and the relative mode
    at ``omega * sqrt(1 + 2 alpha)``; :meth:`from_normal_modes` accepts any
    other pair directly.
    """

    m: float
    omega: float
    alpha: float
    omega_plus: float
    omega_minus: float

    def __post_init__(self):
        if not (self.m > 0 and self.omega > 0):
            raise ParameterError(f"mass and frequency must be positive, got m={self.m}, omega={self.omega}")
        if not self.alpha >= 0:
            raise ParameterError(f"coupling alpha must be >= 0, got {self.alpha}")
        if not (self.omega_plus > 0 and self.omega_minus > 0):
            raise ParameterError("normal-mode frequencies must be positive")

    @classmethod
    def from_normal_modes(cls, m, omega_plus, omega_minus, alpha=None):
        """Build a system from an explicit normal-mode frequency pair.

        When ``alpha`` is omitted it is inferred from the default convention,
        ``alpha = ((omega_minus/omega_plus)**2 - 1) / 2``, clipped at zero.
        """
        if not (omega_plus > 0 and omega_minus > 0):
            raise ParameterError("normal-mode frequencies must be positive")
        if alpha is None:
            alpha = max(0.0, ((omega_minus / omega_plus) ** 2 - 1.0) / 2.0)
        return cls(float(m), float(omega_plus), float(alpha), float(omega_plus), float(omega_minus))

    @property
    def frequencies(self):
        return np.array([self.omega_plus, self.omega_minus])


def make_system(m=1.0, omega=1.0, alpha=0.0):
    """Coupled-oscillator system under the default coupling convention."""
    if not (m > 0 and omega > 0):
        raise ParameterError(f"mass and frequency must be positive, got m={m}, omega={omega}")
    if not alpha >= 0:
        raise ParameterError(f"coupling alpha must be >= 0, got {alpha}")
    return OscillatorSystem(float(m), float(omega), float(alpha), float(omega), float(omega * np.sqrt(1.0 + 2.0 * alpha)))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianCV:
    """Two-mode Gaussian density kernel in (L, M, K, zeta1) form."""

    L: np.ndarray
    M: np.ndarray
    Kmat: np.ndarray
    zeta1: float

    @classmethod
    def from_matrices(cls, L, M=None, Kmat=None):
        """Validate the matrices and fix ``zeta1`` by the unit-trace condition."""
        L = np.asarray(L, dtype=float)
        M = np.zeros((2, 2)) if M is None else np.asarray(M, dtype=float)
        Kmat = np.zeros((2, 2)) if Kmat is None else np.asarray(Kmat, dtype=float)
        if L.shape != (2, 2) or M.shape != (2, 2) or Kmat.shape != (2, 2):
            raise ParameterError("L, M and K must be 2x2")
        if not (np.allclose(L, L.T, atol=1e-14) and np.allclose(M, M.T, atol=1e-14)):
            raise ParameterError("L and M must be symmetric")
        L = (L + L.T) / 2
        M = (M + M.T) / 2
        if np.linalg.eigvalsh(L).min() <= 0:
            raise ParameterError("L must be positive definite")
        if np.linalg.eigvalsh(M).min() < -1e-12 * max(1.0, np.abs(M).max()):
            raise ParameterError("M must be positive semidefinite")
        zeta1 = float(np.sqrt(np.linalg.det(2.0 * L)) / np.pi)
        return cls(_frozen(L), _frozen(M), _frozen(Kmat), zeta1)

    @property
    def pure(self):
        return not np.any(self.M) and not np.any(self.Kmat)

    def evaluate(self, qA, qB, pA, pB):
        """Kernel value rho(qA, qB; pA, pB); broadcasts over array arguments."""
        L, M, K = self.L, self.M, self.Kmat
        qA, qB, pA, pB = (np.asarray(v, dtype=float) for v in (qA, qB, pA, pB))
        dA, dB = qA - pA, qB - pB
        sA, sB = qA + pA, qB + pB
        expo = -(L[0, 0] * (qA**2 + pA**2) + 2 * L[0, 1] * (qA * qB + pA * pB) + L[1, 1] * (qB**2 + pB**2))
        expo = expo - 0.5 * (M[0, 0] * dA**2 + 2 * M[0, 1] * dA * dB + M[1, 1] * dB**2)
        if np.any(K):
            phase = 0.5 * (dA * (K[0, 0] * sA + K[0, 1] * sB) + dB * (K[1, 0] * sA + K[1, 1] * sB))
            return self.zeta1 * np.exp(expo + 1j * phase)
        return self.zeta1 * np.exp(expo) + 0j

    def wavefunction(self, qA, qB):
        """Real amplitude psi(q) with rho = psi(q) psi(q'); pure states only."""
        if not self.pure:
            raise ParameterError("wavefunction is defined only for pure kernels (M = K = 0)")
        L = self.L
        qA, qB = np.asarray(qA, dtype=float), np.asarray(qB, dtype=float)
        expo = -(L[0, 0] * qA**2 + 2 * L[0, 1] * qA * qB + L[1, 1] * qB**2)
        return np.sqrt(self.zeta1) * np.exp(expo)

    def hessian(self):
        """Complex Hessian of the exponent in the variables (qA, qA', qB, qB')."""
        Pq = np.zeros((2, 4))
        Pq[0, 0] = Pq[1, 2] = 1.0
        Pp = np.zeros((2, 4))
        Pp[0, 1] = Pp[1, 3] = 1.0
        D, S = Pq - Pp, Pq + Pp
        quad = -(Pq.T @ self.L @ Pq + Pp.T @ self.L @ Pp) - 0.5 * D.T @ self.M @ D
        cross = 0.5j * D.T @ self.Kmat @ S
        return 2.0 * quad + (cross + cross.T)


@dataclass(frozen=True)
class StateEvaluator:
    """A generic two-mode state given by its kernel function.

    ``func(qA, qB, qA', qB')`` must return the (complex) kernel value and,
    when ``vectorized`` is true, broadcast over numpy arrays.
    """

    func: Callable
    pure: bool = False
    analytic: bool = False
    vectorized: bool = True

    def evaluate(self, qA, qB, pA, pB):
        if self.vectorized:
            return np.asarray(self.func(qA, qB, pA, pB), dtype=complex)
        return np.vectorize(self.func, otypes=[complex])(qA, qB, pA, pB)


State = Union[GaussianCV, StateEvaluator]


def as_evaluator(state: GaussianCV) -> StateEvaluator:
    """Wrap a Gaussian kernel so the generic (numerical) paths are used."""
    return StateEvaluator(state.evaluate, pure=state.pure)


def ground_state(sys: OscillatorSystem) -> GaussianCV:
    L = (sys.m / 4.0) * NORMAL_MODES.T @ np.diag(2.0 * sys.frequencies) @ NORMAL_MODES
    return GaussianCV.from_matrices(L)


def thermal_state(sys: OscillatorSystem, T: float) -> GaussianCV:
    """Thermal state at temperature ``T`` (units of omega, k_B = 1).

    Each normal mode carries the single-oscillator thermal kernel with
    ``L_s = (m w_s / 2) tanh(w_s / 2T)`` and ``M_s = m w_s / sinh(w_s / T)``.
    """
    if not T >= 0:
        raise ParameterError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return ground_state(sys)
    w = sys.frequencies
    with np.errstate(over="ignore"):  # w/T -> inf is the ground-state limit
        x = np.exp(-w / T)
    Ls = 0.5 * sys.m * w * (1.0 - x) / (1.0 + x)
    Ms = 2.0 * sys.m * w * x / (1.0 - x * x)
    O = NORMAL_MODES
    return GaussianCV.from_matrices(O.T @ np.diag(Ls) @ O, O.T @ np.diag(Ms) @ O)


def dilate(state: GaussianCV, s_A=1.0, s_B=1.0) -> GaussianCV:
    """Apply the local unitary q_A -> q_A / s_A, q_B -> q_B / s_B.

    The new kernel is ``rho(q_A/s_A, q_B/s_B; ...) / (s_A s_B)``, i.e. Alice's
    coordinate is stretched by ``s_A``.
    """
    S = np.diag([1.0 / s_A, 1.0 / s_B])
    return GaussianCV.from_matrices(S @ state.L @ S, S @ state.M @ S, S @ state.Kmat @ S)


def eval_density(state: State, qA, qB, pA, pB):
    """Kernel value rho(q_A, q_B; q'_A, q'_B)."""
    return state.evaluate(qA, qB, pA, pB)


def _parse_index(key):
    if isinstance(key, str):
        if len(key) != 4 or set(key) - {"0", "1"}:
            raise KeyError(key)
        return tuple(int(c) for c in key)
    return tuple(int(k) for k in key)


@dataclass(frozen=True, eq=False)
class DerivBlock:
    """Mixed partial derivatives rho_ijkl at a configuration-space point.

    ``coeffs[i, j, k, l]`` differentiates i times in q_A, j in q'_A, k in q_B
    and l in q'_B.  Index with a tuple or a string: ``block["1100"]``.
    """

    center: tuple
    coeffs: np.ndarray
    method: str = "analytic"
    error: np.ndarray | None = field(default=None, repr=False)

    def __getitem__(self, key):
        return self.coeffs[_parse_index(key)]

    @property
    def hermiticity_residual(self):
        herm = np.conj(self.coeffs.transpose(1, 0, 3, 2))
        return float(np.max(np.abs(self.coeffs - herm)) / abs(self.coeffs[0, 0, 0, 0]))

    def psi(self):
        """Amplitude derivatives psi_ik recovered from rho_{i0k0} (pure gauge psi_00 > 0)."""
        r0 = self.coeffs[0, 0, 0, 0].real
        return self.coeffs[:, 0, :, 0] / np.sqrt(r0)

    def factorization_residual(self):
        """max |rho_ijkl - psi_ik conj(psi_jl)| / rho_0000; zero for pure sources."""
        psi = self.psi()
        model = np.einsum("ik,jl->ijkl", psi, psi.conj())
        return float(np.max(np.abs(self.coeffs - model)) / self.coeffs[0, 0, 0, 0].real)


@dataclass(frozen=True)
class ReducedADerivs:
    """Derivatives of Alice's reduced kernel rho_A(q_A, q'_A) at ``center``."""

    center: float
    r00: complex
    r10: complex
    r01: complex
    r11: complex

    def __post_init__(self):
        if not self.r00.real > 0:
            raise ConsistencyError(f"reduced density must be positive at the centre, got {self.r00}")


def _exp_quadratic_derivs(H, v0, prefactor):
    """Mixed derivatives (orders in {0,1}) of prefactor * exp(v.H.v / 2) at v0.

    A quadratic exponent has vanishing third derivatives, so each derivative
    is exp(E) times a sum over partial pairings: pairs pick Hessian entries,
    unpaired variables pick gradient entries.
    """
    n = len(v0)
    g = H @ v0
    base = prefactor * np.exp(0.5 * v0 @ H @ v0)

    def poly(S):
        if not S:
            return 1.0
        i, rest = S[0], S[1:]
        total = g[i] * poly(rest)
        for pos, j in enumerate(rest):
            total = total + H[i, j] * poly(rest[:pos] + rest[pos + 1:])
        return total

    out = np.zeros((2,) * n, dtype=complex)
    for mi in itertools.product((0, 1), repeat=n):
        out[mi] = base * poly(tuple(d for d in range(n) if mi[d]))
    return out


def _hermitize(coeffs, method, tol):
    herm = np.conj(coeffs.transpose(1, 0, 3, 2))
    resid = np.max(np.abs(coeffs - herm)) / abs(coeffs[0, 0, 0, 0])
    if resid > tol:
        raise ConsistencyError(f"{method} derivative block is not Hermitian (residual {resid:.2e})")
    return 0.5 * (coeffs + herm)


def derivative_block(state: State, center=(0.0, 0.0), *, step=0.05, levels=3, rtol=1e-6) -> DerivBlock:
    """The 16 coefficients rho_ijkl at ``center = (qA_bar, qB_bar)``.

    Gaussian kernels are differentiated exactly; generic evaluators use
    central differences refined by Richardson extrapolation (see
    :func:`localent._numdiff.mixed_partials` for ``step``/``levels``/``rtol``).
    """
    qa, qb = (float(c) for c in center)
    v0 = np.array([qa, qa, qb, qb])
    if isinstance(state, GaussianCV):
        coeffs = _exp_quadratic_derivs(state.hessian(), v0, state.zeta1)
        # Exact up to rounding; symmetrize so the invariant holds bitwise.
        coeffs = _hermitize(coeffs, "analytic", 1e-10)
        block = DerivBlock((qa, qb), coeffs, "analytic")
    else:
        # reorder (qA, qA', qB, qB') -> evaluate(qA, qB, qA', qB')
        f = lambda x, y, z, w: state.evaluate(x, z, y, w)
        coeffs, err = mixed_partials(f, v0, h=step, levels=levels, rtol=rtol)
        coeffs = _hermitize(coeffs, "finite-difference", 1e-6)
        block = DerivBlock((qa, qb), coeffs, "finite-difference", err)
    r0 = block.coeffs[0, 0, 0, 0]
    if not (r0.real > 0 and abs(r0.imag) <= 1e-10 * abs(r0)):
        raise ConsistencyError(f"rho_0000 must be real and positive, got {r0}")
    return block


def _reduced_kernel_quad(state, x, y, bounds, epsabs, epsrel):
    def part(fn):
        val, abserr, *rest = integrate.quad(fn, *bounds, epsabs=epsabs, epsrel=epsrel, limit=200, full_output=1)
        if len(rest) > 1:
            raise NumericalError(f"quadrature over q_B did not converge (achieved abs error {abserr:.2e})")
        return val

    re = part(lambda z: state.evaluate(x, z, y, z).real)
    im = part(lambda z: state.evaluate(x, z, y, z).imag)
    return re + 1j * im


def reduced_A_derivs(state: State, qA_bar=0.0, *, step=0.05, levels=3, rtol=1e-6,
                     bounds=(-np.inf, np.inf)) -> ReducedADerivs:
    """Derivatives of rho_A(q_A, q'_A) = int rho(q_A, x; q'_A, x) dx at ``qA_bar``.

    The Gaussian path integrates q_B out in closed form (a Schur complement of
    the exponent's Hessian); the generic path uses adaptive quadrature for the
    trace and central differences for the derivatives.
    """
    qa = float(qA_bar)
    if isinstance(state, GaussianCV):
        H = state.hessian()
        T = np.zeros((4, 3))
        T[0, 0] = T[1, 1] = T[2, 2] = T[3, 2] = 1.0
        H3 = T.T @ H @ T
        hzz = H3[2, 2].real
        if not hzz < 0:
            raise ConsistencyError("trace over q_B diverges")
        HA = H3[:2, :2] - np.outer(H3[:2, 2], H3[2, :2]) / hzz
        pref = state.zeta1 * np.sqrt(2.0 * np.pi / -hzz)
        d = _exp_quadratic_derivs(HA, np.array([qa, qa]), pref)
    else:
        vec = np.vectorize(lambda x, y: _reduced_kernel_quad(state, x, y, bounds, 1e-14, 1e-12), otypes=[complex])
        d, _ = mixed_partials(vec, np.array([qa, qa]), h=step, levels=levels, rtol=rtol)
    d = 0.5 * (d + np.conj(d.T))
    return ReducedADerivs(qa, complex(d[0, 0].real), complex(d[1, 0]), complex(d[0, 1]), complex(d[1, 1]))
