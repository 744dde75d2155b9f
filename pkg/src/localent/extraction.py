"""Swapping local continuous-variable entanglement onto true qubits.

On the two-level subspace {phi_0, phi_1} of an interval [-a, a] the
operators sqrt(3) q / a and -2a p / sqrt(3) act as Pauli matrices.  Three
controlled gates built from them and from an ancilla's Paulis compose to a
SWAP between the mode's effective qubit and the ancilla.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm

from .errors import ConsistencyError, RegionError
from .grid import region_state
from .qubit_reduction import Region, basis_value, project_two_qubit, validity_spectrum
from .two_qubit import concurrence

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


@dataclass(frozen=True, eq=False)
class EffectivePauli:
    """Pauli representation of position and momentum on [-a, a].

    ``P_raw`` is the truncated momentum matrix <phi_i| -i d/dx |phi_j>; it is
    strictly upper triangular because phi_0 is constant.  ``Y`` is built
    from its Hermitian part.
    """

    a: float
    X: np.ndarray
    Y: np.ndarray
    P_raw: np.ndarray


def effective_pauli(a) -> EffectivePauli:
    t, w = leggauss(8)
    x, w = a * t, a * w
    phi = np.stack([basis_value("A", 0, x, a), basis_value("A", 1, x, a)])
    dphi = np.stack([np.zeros_like(x), np.full_like(x, np.sqrt(3.0 / (2.0 * a**3)))])
    q = (phi * w * x) @ phi.T
    p_raw = -1j * (phi * w) @ dphi.T
    p_raw[np.abs(p_raw) < 1e-15 * np.abs(p_raw).max()] = 0.0
    X = np.sqrt(3.0) / a * q
    Y = -2.0 * a / np.sqrt(3.0) * 0.5 * (p_raw + p_raw.conj().T)
    return EffectivePauli(float(a), X.astype(complex), Y, p_raw)


def _controlled(ancilla_op, mode_op):
    eye = np.eye(2)
    return expm(1j * np.pi / 4 * np.kron(ancilla_op - eye, mode_op - eye))


def u_swap_qubit_rep(relabel=True):
    """The three-gate SWAP in the (ancilla x effective qubit) representation.

    Gates use sigma_y / sigma_x on the ancilla and X_eff / Y_eff on the mode.
    In the natural labelling |0> = phi_0 the Hermitian Y_eff is -sigma_y and
    the product is SWAP (sigma_x x sigma_x).  With ``relabel`` the mode's
    computational states are ordered |0> = phi_1, |1> = phi_0, which keeps
    X_eff = sigma_x, turns Y_eff into +sigma_y and makes the product SWAP.
    """
    P = effective_pauli(1.0)
    X, Y = P.X, P.Y
    if relabel:
        X, Y = SIGMA_X @ X @ SIGMA_X, SIGMA_X @ Y @ SIGMA_X
    outer = _controlled(SIGMA_Y, X)
    U = outer @ _controlled(SIGMA_X, Y) @ outer
    dev = np.max(np.abs(U @ U.conj().T - np.eye(4)))
    if dev > 1e-12:
        raise ConsistencyError(f"SWAP composition is not unitary (deviation {dev:.2e})")
    return U


def swap_distance(U):
    """min over phi of ||U - e^{i phi} SWAP||_F."""
    overlap = np.vdot(SWAP.ravel(), np.asarray(U).ravel())
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(U - phase * SWAP))


@dataclass(frozen=True, eq=False)
class ExtractionReport:
    ancilla_state: np.ndarray
    ancilla_concurrence: float
    reference_concurrence: float
    leakage: float
    lambda_ratio: float

    @property
    def relative_deviation(self):
        if self.reference_concurrence == 0:
            return abs(self.ancilla_concurrence)
        return abs(self.ancilla_concurrence - self.reference_concurrence) / self.reference_concurrence


def _local_basis(grid, center, w):
    """Weighted orthonormal basis whose first two vectors are phi_0, phi_1."""
    sw = np.sqrt(grid.weights)
    x = grid.nodes - center
    u = np.stack([basis_value("A", 0, x, w) * sw, basis_value("A", 1, x, w) * sw], axis=1)
    Q, R = np.linalg.qr(np.hstack([u, np.eye(grid.n)]))
    Q = Q[:, : grid.n] * np.sign(np.diag(R)[: grid.n])
    return Q


def _party_map(U, n):
    """Isometry mode_m -> (ancilla, mode') with the ancilla starting in |0>.

    Levels 0, 1 (phi_0, phi_1) go through U in the relabelled basis; leakage
    levels m >= 2 are left untouched.
    """
    T = np.zeros((n, 2, n), dtype=complex)
    for m in range(n):
        if m < 2:
            out = (U @ np.kron([1.0, 0.0], np.eye(2)[1 - m])).reshape(2, 2)
            for e in range(2):
                T[m, :, 1 - e] = out[:, e]
        else:
            T[m, 0, m] = 1.0
    return T


def simulate_extraction(state, region: Region, grid_n=96, validity_limit=1e-2):
    """Swap each party's effective qubit onto an ancilla and return the ancillas' concurrence."""
    lam = validity_spectrum(state, region, grid_n=max(grid_n, 64))
    ratio = 0.0 if lam[1] < 1e-14 else float(lam[2] / lam[1])
    if ratio > validity_limit:
        raise RegionError(f"region too large for the two-level picture (lambda3/lambda2 = {ratio:.2e})")
    filtered = region_state(state, region, grid_n)
    QA = _local_basis(filtered.grid_a, region.center[0], region.a)
    QB = _local_basis(filtered.grid_b, region.center[1], region.b)
    V = QA.T @ filtered.weighted() @ QB
    U = u_swap_qubit_rep(relabel=True)
    out = np.einsum("mn,maA,nbB->aAbB", V, _party_map(U, grid_n), _party_map(U, grid_n))
    rho = np.einsum("aAbB,cAdB->abcd", out, out.conj()).reshape(4, 4)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-10:
        raise ConsistencyError(f"ancilla state trace {tr:.12f} != 1")
    C = concurrence(rho)
    ref, _ = project_two_qubit(state, region, check=False)
    leakage = float(1.0 - np.sum(np.abs(V[:2, :2]) ** 2))
    return C, ExtractionReport(rho, C, concurrence(ref), leakage, ratio)
