"""Two-qubit reduction of a region-filtered two-mode state.

Each party's wavefunction on its interval is expanded in the constant and
linear functions

    phi_0(x) = sqrt(1 / 2w),    phi_1(x) = sqrt(3 / 2w^3) x,    |x| <= w,

(x measured from the region centre), which makes the filtered state a
4x4 density matrix in the order |A0 B0>, |A0 B1>, |A1 B0>, |A1 B1>.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, InvalidStateError, ParameterError, RegionError, ResolutionError
from .state_model import DerivBlock

PSD_TOL = 1e-9


@dataclass(frozen=True)
class Region:
    center: tuple
    half_widths: tuple

    def __post_init__(self):
        a, b = self.half_widths
        if not (a > 0 and b > 0):
            raise ParameterError(f"region half-widths must be positive, got {self.half_widths}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "half_widths", (float(a), float(b)))

    @property
    def a(self):
        return self.half_widths[0]

    @property
    def b(self):
        return self.half_widths[1]

    @property
    def interval_a(self):
        return (self.center[0] - self.a, self.center[0] + self.a)

    @property
    def interval_b(self):
        return (self.center[1] - self.b, self.center[1] + self.b)


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    matrix: np.ndarray
    provenance: str
    region: Region | None = None
    quad_error: float | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidStateError(f"expected 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise InvalidStateError("two-qubit matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > 1e-10:
            raise InvalidStateError(f"two-qubit trace {np.trace(m).real:.12f} != 1")
        m = 0.5 * (m + m.conj().T)
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -PSD_TOL:
            raise InvalidStateError(f"two-qubit matrix has eigenvalue {lo:.3e} < 0")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def basis_value(party, index, x, half_width):
    """phi_index(x) on [-w, w]; ``party`` ('A' or 'B') only labels the call."""
    if party not in ("A", "B"):
        raise ParameterError(f"party must be 'A' or 'B', got {party!r}")
    w = float(half_width)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > w * (1 + 1e-12)):
        raise DomainError(f"|x| exceeds the half-width {w}")
    if index == 0:
        return np.full(x.shape, np.sqrt(1.0 / (2.0 * w)))[()]
    if index == 1:
        return (np.sqrt(3.0 / (2.0 * w**3)) * x)[()]
    raise ParameterError(f"basis index must be 0 or 1, got {index}")


def _project_raw(state, region, order):
    t, wt = leggauss(order)
    (qa, qb), (a, b) = region.center, region.half_widths
    xa, xb = a * t, b * t
    ga = np.stack([basis_value("A", 0, xa, a), basis_value("A", 1, xa, a)]) * (a * wt)
    gb = np.stack([basis_value("B", 0, xb, b), basis_value("B", 1, xb, b)]) * (b * wt)
    XA = (qa + xa)[:, None, None, None]
    XB = (qb + xb)[None, :, None, None]
    PA = (qa + xa)[None, None, :, None]
    PB = (qb + xb)[None, None, None, :]
    K = state.evaluate(XA, XB, PA, PB)
    # sum per node index in a fixed order; result is independent of call order
    R = np.einsum("ix,ky,xyuv,ju,lv->ikjl", ga, gb, K, ga, gb, optimize=True)
    return R.reshape(4, 4)


def project_two_qubit(state, region: Region, quad_order=16, check=True):
    """Project onto the local qubit basis by Gauss-Legendre quadrature.

    Returns the unit-trace :class:`TwoQubitState` and the unnormalized trace
    ``p_region``.  With ``check`` the quadrature is repeated at twice the
    order; a change beyond 1e-8 emits a warning and is recorded in the
    provenance.
    """
    if quad_order < 8:
        raise ParameterError(f"quad_order must be >= 8, got {quad_order}")
    R = _project_raw(state, region, quad_order)
    p = float(np.trace(R).real)
    if not p > 0:
        raise RegionError(f"projected trace {p:.3e} is not positive")
    rho = R / p
    provenance, err = "quadrature", None
    if check:
        R2 = _project_raw(state, region, 2 * quad_order)
        err = float(np.max(np.abs(R2 / np.trace(R2).real - rho)))
        if err > 1e-8:
            provenance = f"quadrature (accuracy warning: order-doubling change {err:.2e})"
            warnings.warn(f"two-qubit quadrature not converged: order-doubling change {err:.2e}", stacklevel=2)
    rho = 0.5 * (rho + rho.conj().T)
    return TwoQubitState(rho, provenance, region, err), p


def basis_weights(w):
    """Overlaps <phi_n | x^n> on [-w, w]: sqrt(2w) and w sqrt(2w/3)."""
    return np.array([np.sqrt(2.0 * w), w * np.sqrt(2.0 * w / 3.0)])


def leading_two_qubit(block: DerivBlock, a, b) -> TwoQubitState:
    """Leading-order two-qubit state from the linear Taylor data of rho."""
    wa, wb = basis_weights(a), basis_weights(b)
    R = np.zeros((4, 4), dtype=complex)
    for i, j, k, l in itertools.product((0, 1), repeat=4):
        R[2 * i + k, 2 * j + l] = wa[i] * wa[j] * wb[k] * wb[l] * block.coeffs[i, j, k, l]
    R /= np.trace(R).real
    return TwoQubitState(0.5 * (R + R.conj().T), "leading-order", Region(block.center, (a, b)))


def validity_spectrum(state, region: Region, grid_n=96, check=True, keep=6):
    """Descending Schmidt weights of the region-filtered pure state.

    lambda_3 measures how far the state leaves the two-level subspace.  With
    ``check`` the computation is repeated on a grid of 2*grid_n nodes and
    weights above the roundoff floor must agree to 10%.
    """
    from .grid import region_state

    if grid_n < 64:
        raise ParameterError(f"grid_n must be >= 64, got {grid_n}")
    lam = region_state(state, region, grid_n).schmidt_probabilities()
    if check:
        lam2 = region_state(state, region, 2 * grid_n).schmidt_probabilities()
        k = min(keep, len(lam))
        sig = lam2[:k] > 1e-13
        rel = np.abs(lam[:k][sig] - lam2[:k][sig]) / lam2[:k][sig]
        if rel.size and rel.max() > 0.1:
            raise ResolutionError(f"Schmidt weights change by {rel.max():.1%} on grid refinement")
        lam = lam2
    return lam[:keep]
