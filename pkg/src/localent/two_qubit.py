"""Exact entanglement measures of 4x4 two-qubit density matrices.

Basis order is |A0 B0>, |A0 B1>, |A1 B0>, |A1 B1> throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidStateError

PSD_TOL = 1e-9
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SPIN_FLIP = np.kron(_SY, _SY)


@dataclass(frozen=True)
class MeasureReport:
    concurrence: float
    tangle: float
    eof: float
    negativity: float
    entropy_A: float
    entropy_B: float


def _matrix(rho):
    m = getattr(rho, "matrix", rho)
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise InvalidStateError("density matrix is not Hermitian")
    return 0.5 * (m + m.conj().T)


def _psd_sqrt(m):
    evals, vecs = np.linalg.eigh(m)
    if evals[0] < -PSD_TOL:
        raise InvalidStateError(f"density matrix has eigenvalue {evals[0]:.3e} < 0")
    # Eigenvalues at the roundoff floor would otherwise contribute sqrt(1e-16)
    # to the Wootters spectrum.
    evals = np.where(evals <= 1e-14 * max(evals[-1], 1e-300), 0.0, evals)
    return (vecs * np.sqrt(evals)) @ vecs.conj().T


def binary_entropy(x):
    """h(x) = -x log2 x - (1-x) log2(1-x) in bits, with 0 log 0 = 0."""
    if not (-1e-12 <= x <= 1 + 1e-12):
        raise DomainError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(float(x), 0.0), 1.0)
    return float(-sum(p * np.log2(p) for p in (x, 1.0 - x) if p > 0))


def wootters_roots(rho):
    """Descending square roots of the eigenvalues of rho * rho_tilde.

    With rho_tilde = (Y sqrt(rho)* Y)^2 the Hermitian similarity
    sqrt(rho) rho_tilde sqrt(rho) equals A A^dagger for A = sqrt(rho) Y sqrt(rho)* Y,
    so the roots are the singular values of A.  This avoids square roots of
    eigenvalues sitting at the roundoff floor.
    """
    m = _matrix(rho)
    s = _psd_sqrt(m)
    A = s @ SPIN_FLIP @ s.conj() @ SPIN_FLIP
    return np.linalg.svd(A, compute_uv=False)


def concurrence(rho):
    """Wootters concurrence max(0, l1 - l2 - l3 - l4)."""
    lam = wootters_roots(rho)
    return float(min(max(lam[0] - lam[1:].sum(), 0.0), 1.0))


def partial_transpose_B(m):
    """[rho^{T_B}]_{(i,k),(j,l)} = rho_{(i,l),(j,k)}."""
    return np.asarray(m).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity4(rho):
    """Sum of |negative eigenvalues| of the partial transpose on qubit B."""
    m = _matrix(rho)
    _psd_sqrt(m)
    ev = np.linalg.eigvalsh(partial_transpose_B(m))
    return float(min(-ev[ev < 0].sum(), 0.5))


def eof(C):
    """Entanglement of formation (bits) from the concurrence."""
    if not (-1e-12 <= C <= 1 + 1e-12):
        raise DomainError(f"concurrence {C} outside [0, 1]")
    C = min(max(float(C), 0.0), 1.0)
    return binary_entropy((1.0 + np.sqrt(1.0 - C * C)) / 2.0)


def vn_entropy(m):
    """Von Neumann entropy in bits of a Hermitian PSD unit-trace matrix."""
    m = np.asarray(m, dtype=complex)
    if abs(np.trace(m) - 1.0) > 1e-8:
        raise InvalidStateError(f"trace {np.trace(m).real:.12f} != 1")
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if ev[0] < -PSD_TOL:
        raise InvalidStateError(f"matrix has eigenvalue {ev[0]:.3e} < 0")
    ev = ev[ev > 0]
    return float(max(-np.sum(ev * np.log2(ev)), 0.0))


def reduced_states(rho):
    m = _matrix(rho).reshape(2, 2, 2, 2)
    return np.einsum("ikjk->ij", m), np.einsum("kikj->ij", m)


def measures(rho) -> MeasureReport:
    C = concurrence(rho)
    ra, rb = reduced_states(rho)
    return MeasureReport(C, C * C, eof(C), negativity4(rho), vn_entropy(ra), vn_entropy(rb))
