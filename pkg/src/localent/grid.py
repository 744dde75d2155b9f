"""Brute-force grid oracles.

Wavefunctions and density matrices are sampled on tensor grids and
integrated with the grid's quadrature weights (trapezoid on uniform grids,
Gauss-Legendre on region-local grids).  Position filters act as diagonal
0/1 masks; region edges snap to the nearest cell boundary (midway between
nodes) so masks are exact projectors.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import BudgetError, ContainmentError, NumericalError, ParameterError, RegionError, InvalidStateError
from .state_model import NORMAL_MODES, GaussianCV, OscillatorSystem, StateEvaluator
from .two_qubit import binary_entropy

DEFAULT_BUDGET = 4096


def grid_budget():
    """Largest allowed n_A * n_B for full density-matrix work."""
    raw = os.environ.get("LOCALENT_GRID_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"LOCALENT_GRID_BUDGET must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ParameterError("LOCALENT_GRID_BUDGET must be positive")
    return value


def _check_budget(dim):
    budget = grid_budget()
    if dim > budget:
        raise BudgetError(f"grid dimension {dim} exceeds budget {budget}; use a coarser grid")


@dataclass(frozen=True, eq=False)
class Grid1D:
    lo: float
    hi: float
    n: int
    rule: str = "trapezoid"
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ParameterError(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")
        if self.n < 16:
            raise ParameterError(f"grid needs at least 16 points, got {self.n}")
        if self.rule == "trapezoid":
            x = np.linspace(self.lo, self.hi, self.n)
            w = np.full(self.n, self.h)
            w[[0, -1]] *= 0.5
        elif self.rule == "gauss":
            t, wt = leggauss(self.n)
            half = 0.5 * (self.hi - self.lo)
            x = 0.5 * (self.hi + self.lo) + half * t
            w = half * wt
        else:
            raise ParameterError(f"unknown quadrature rule {self.rule!r}")
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)

    @property
    def h(self):
        return (self.hi - self.lo) / (self.n - 1)

    def mask(self, interval):
        """0/1 mask of the nodes inside ``interval`` plus the snapped edges."""
        lo, hi = interval
        if self.rule == "gauss":
            m = (self.nodes >= lo) & (self.nodes <= hi)
            return m.astype(float), (lo, hi)
        edge0 = self.lo - 0.5 * self.h
        k_lo = round((lo - edge0) / self.h)
        k_hi = round((hi - edge0) / self.h)
        s_lo, s_hi = edge0 + k_lo * self.h, edge0 + k_hi * self.h
        m = (self.nodes > s_lo) & (self.nodes < s_hi)
        return m.astype(float), (max(s_lo, self.lo), min(s_hi, self.hi))


def uniform_grid(lo=-6.0, hi=6.0, n=256):
    return Grid1D(lo, hi, n, "trapezoid")


@dataclass(frozen=True, eq=False)
class GridPureState:
    grid_a: Grid1D
    grid_b: Grid1D
    psi: np.ndarray
    norm_factor: float = 1.0

    def __post_init__(self):
        nrm = float(np.sum(np.abs(self.psi) ** 2 * np.outer(self.grid_a.weights, self.grid_b.weights)))
        if abs(nrm - 1.0) > 1e-10:
            raise InvalidStateError(f"grid state norm {nrm:.12f} != 1")

    def weighted(self):
        return np.sqrt(self.grid_a.weights)[:, None] * self.psi * np.sqrt(self.grid_b.weights)[None, :]

    def schmidt_probabilities(self):
        """Eigenvalues of Alice's reduced density matrix, descending."""
        try:
            s = np.linalg.svd(self.weighted(), compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed: {exc}") from exc
        return s**2


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density kernel on a tensor grid, index (iA, iB) -> iA * n_B + iB.

    ``blocks`` optionally records the inside mask of a non-discarding
    ensemble.
    """

    grid_a: Grid1D
    grid_b: Grid1D
    rho: np.ndarray
    blocks: np.ndarray | None = None

    def __post_init__(self):
        dim = self.grid_a.n * self.grid_b.n
        if self.rho.shape != (dim, dim):
            raise ParameterError(f"density shape {self.rho.shape} does not match grids ({dim})")
        scale = np.max(np.abs(self.rho))
        if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-9 * scale:
            raise InvalidStateError("grid density is not Hermitian")
        tr = float(np.real(np.sum(np.diag(self.rho) * self.weights)))
        if abs(tr - 1.0) > 1e-8:
            raise InvalidStateError(f"grid density trace {tr:.12f} != 1")

    @property
    def weights(self):
        return np.outer(self.grid_a.weights, self.grid_b.weights).ravel()

    def operator(self):
        """Symmetrically weighted matrix whose eigenvalues are the state's."""
        sw = np.sqrt(self.weights)
        return sw[:, None] * self.rho * sw[None, :]

    def expectation(self, op):
        """Tr(rho O) for an operator given in the weighted (l2) representation."""
        return complex(np.sum(self.operator() * op.T))


def wavefunction_of(state):
    """Return a vectorized psi(qA, qB) for a pure state or a plain callable."""
    if isinstance(state, GaussianCV):
        return state.wavefunction
    if isinstance(state, StateEvaluator):
        if not state.pure:
            raise ParameterError("a pure state is required")
        # rho(q; q*) = psi(q) conj(psi(q*)); pick q* = origin with psi(q*) > 0.
        r0 = state.evaluate(0.0, 0.0, 0.0, 0.0).real
        if not r0 > 0:
            raise ParameterError("pure evaluator must be non-zero at the origin")
        return lambda qA, qB: state.evaluate(qA, qB, np.zeros_like(qA), np.zeros_like(qB)) / np.sqrt(r0)
    if callable(state):
        return state
    raise ParameterError(f"cannot build a wavefunction from {type(state).__name__}")


def discretize_pure(state, grid_a: Grid1D, grid_b: Grid1D, *, check_containment=True) -> GridPureState:
    """Sample a pure state on the grids and renormalize under the weights.

    ``norm_factor`` on the result is the norm before renormalization.
    """
    psi_fn = wavefunction_of(state)
    A, B = np.meshgrid(grid_a.nodes, grid_b.nodes, indexing="ij")
    psi = np.asarray(psi_fn(A, B), dtype=complex)
    dens = np.abs(psi) ** 2
    if check_containment:
        edge = max(dens[0].max(), dens[-1].max(), dens[:, 0].max(), dens[:, -1].max())
        if edge > 1e-10 * dens.max():
            raise ContainmentError(f"state not contained: boundary density {edge / dens.max():.2e} of maximum")
    nrm = float(np.sum(dens * np.outer(grid_a.weights, grid_b.weights)))
    if nrm <= 0:
        raise ContainmentError("state vanishes on the grid")
    if check_containment and abs(nrm - 1.0) > 1e-4:
        raise ContainmentError(f"sampled norm {nrm:.6f} deviates from 1; enlarge the grid")
    return GridPureState(grid_a, grid_b, psi / np.sqrt(nrm), nrm)


def region_state(state, region, n=128) -> GridPureState:
    """A pure state filtered to ``region`` and sampled on Gauss-Legendre nodes inside it.

    ``norm_factor`` is the captured probability p of the region.
    """
    (qa, qb), (a, b) = region.center, region.half_widths
    ga = Grid1D(qa - a, qa + a, n, "gauss")
    gb = Grid1D(qb - b, qb + b, n, "gauss")
    return discretize_pure(state, ga, gb, check_containment=False)


def _region_masks(grid_a, grid_b, region_a, region_b):
    ma, sa = grid_a.mask(region_a) if region_a is not None else (np.ones(grid_a.n), (grid_a.lo, grid_a.hi))
    mb, sb = grid_b.mask(region_b) if region_b is not None else (np.ones(grid_b.n), (grid_b.lo, grid_b.hi))
    return ma, mb, (sa, sb)


@dataclass(frozen=True)
class FilterResult:
    state: object
    p: float
    snapped: tuple


def filter_discard(state, region_a, region_b=None) -> FilterResult:
    """Discarding-ensemble filter  rho_D = E rho E / p.

    Regions are absolute intervals ``(lo, hi)``; ``region_b=None`` leaves Bob
    unfiltered.  The snapped intervals are returned for like-with-like
    comparisons.
    """
    ma, mb, snapped = _region_masks(state.grid_a, state.grid_b, region_a, region_b)
    if isinstance(state, GridPureState):
        psi = state.psi * np.outer(ma, mb)
        p = float(np.sum(np.abs(psi) ** 2 * np.outer(state.grid_a.weights, state.grid_b.weights)))
        if p < 1e-12:
            raise RegionError(f"filter region captures probability {p:.2e}")
        return FilterResult(GridPureState(state.grid_a, state.grid_b, psi / np.sqrt(p), p), p, snapped)
    if isinstance(state, GridDensity):
        m = np.outer(ma, mb).ravel()
        rho = m[:, None] * state.rho * m[None, :]
        p = float(np.real(np.sum(np.diag(rho) * state.weights)))
        if p < 1e-12:
            raise RegionError(f"filter region captures probability {p:.2e}")
        return FilterResult(GridDensity(state.grid_a, state.grid_b, rho / p), p, snapped)
    raise ParameterError(f"cannot filter {type(state).__name__}")


def pure_density(state: GridPureState) -> GridDensity:
    dim = state.grid_a.n * state.grid_b.n
    _check_budget(dim)
    v = state.psi.ravel()
    return GridDensity(state.grid_a, state.grid_b, np.outer(v, v.conj()))


def build_nondiscard(state: GridPureState, region_a) -> GridDensity:
    """Non-discarding ensemble  E rho E + E' rho E'  for Alice's filter.

    All elements connecting inside and outside are exactly zero; the inside
    mask is kept in ``blocks``.
    """
    dim = state.grid_a.n * state.grid_b.n
    _check_budget(dim)
    ma, _, _ = _region_masks(state.grid_a, state.grid_b, region_a, None)
    inside = np.outer(ma, np.ones(state.grid_b.n)).ravel().astype(bool)
    v = state.psi.ravel()
    rho = np.outer(v, v.conj())
    rho[np.ix_(inside, ~inside)] = 0.0
    rho[np.ix_(~inside, inside)] = 0.0
    return GridDensity(state.grid_a, state.grid_b, rho, blocks=inside)


def schmidt_entropy(state: GridPureState, two_level_only=False):
    """Entanglement entropy (bits) of a grid pure state.

    With ``two_level_only`` the two largest Schmidt weights are renormalized
    and their binary entropy is returned.
    """
    lam = state.schmidt_probabilities()
    if two_level_only:
        top = lam[:2]
        return binary_entropy(top[1] / top.sum())
    lam = lam[lam > 0]
    return float(max(-np.sum(lam * np.log2(lam)), 0.0))


def grid_partial_transpose(rho: GridDensity):
    na, nb = rho.grid_a.n, rho.grid_b.n
    return rho.operator().reshape(na, nb, na, nb).transpose(0, 3, 2, 1).reshape(na * nb, na * nb)


def grid_negativity(rho: GridDensity):
    """Sum of |negative eigenvalues| of the grid partial transpose on B."""
    _check_budget(rho.grid_a.n * rho.grid_b.n)
    ev = np.linalg.eigvalsh(grid_partial_transpose(rho))
    return float(-ev[ev < 0].sum())


def hermite_functions(nmax, x):
    """Oscillator eigenfunctions phi_0..phi_{nmax-1} (m = omega = 1) at ``x``.

    Returns shape ``(nmax,) + x.shape`` via the stable three-term recurrence.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if nmax > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, nmax - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _n_terms(omega, T, max_terms, tail_tol):
    if T == 0:
        return 1
    need = math.ceil(math.log(1.0 / tail_tol) * T / omega) + 1
    if need > max_terms:
        raise NumericalError(
            f"spectral sum needs {need} terms for tail < {tail_tol:g} at T/omega = {T / omega:.3g}; "
            f"limit is {max_terms}"
        )
    return need


def _mode_spectral(m, omega, T, x, max_terms, tail_tol):
    """Mode eigenfunctions at ``x`` and their Boltzmann weights."""
    n = _n_terms(omega, T, max_terms, tail_tol)
    scale = math.sqrt(m * omega)
    phi = hermite_functions(n, scale * np.asarray(x)) * math.sqrt(scale)
    if T == 0:
        p = np.ones(1)
    else:
        q = math.exp(-omega / T)
        p = (1.0 - q) * q ** np.arange(n)
    return phi, p


def oscillator_thermal_kernel(x, y, m=1.0, omega=1.0, T=1.0, max_terms=60, tail_tol=1e-12):
    """Single-oscillator sum_n p_n phi_n(x) phi_n(y); broadcasts x against y."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    phx, p = _mode_spectral(m, omega, T, x, max_terms, tail_tol)
    phy, _ = _mode_spectral(m, omega, T, y, max_terms, tail_tol)
    return np.tensordot(p, phx * phy, axes=1)


def thermal_kernel_spectral(sys: OscillatorSystem, T, qA, qB, pA, pB, max_terms=60, tail_tol=1e-12):
    """Two-mode thermal kernel as a product of normal-mode spectral sums."""
    O = NORMAL_MODES
    qA, qB, pA, pB = np.broadcast_arrays(*(np.asarray(v, float) for v in (qA, qB, pA, pB)))
    out = np.ones(qA.shape)
    for s, w in enumerate(sys.frequencies):
        u = O[s, 0] * qA + O[s, 1] * qB
        v = O[s, 0] * pA + O[s, 1] * pB
        out = out * oscillator_thermal_kernel(u, v, sys.m, w, T, max_terms, tail_tol)
    return out


def thermal_grid_density(sys: OscillatorSystem, T, grid_a: Grid1D, grid_b: Grid1D,
                         max_terms=60, tail_tol=1e-12) -> GridDensity:
    """Thermal GridDensity built from normal-mode spectral sums."""
    if not T >= 0:
        raise ParameterError(f"temperature must be >= 0, got {T}")
    dim = grid_a.n * grid_b.n
    _check_budget(dim)
    A, B = np.meshgrid(grid_a.nodes, grid_b.nodes, indexing="ij")
    A, B = A.ravel(), B.ravel()
    rho = np.ones((dim, dim))
    for s, w in enumerate(sys.frequencies):
        u = NORMAL_MODES[s, 0] * A + NORMAL_MODES[s, 1] * B
        phi, p = _mode_spectral(sys.m, w, T, u, max_terms, tail_tol)
        rho *= (phi.T * p) @ phi
    return GridDensity(grid_a, grid_b, rho.astype(complex))


def momentum_operator(grid: Grid1D):
    """Spectral (FFT) momentum matrix -i d/dx on a uniform grid, l2 representation."""
    if grid.rule != "trapezoid":
        raise ParameterError("momentum operator needs a uniform grid")
    n = grid.n
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=grid.h)
    F = np.fft.fft(np.eye(n), axis=0) / np.sqrt(n)
    return F.conj().T @ np.diag(k) @ F


def invert_binary_entropy(S):
    """x in [0, 1/2] with h(x) = S; NaN when S is outside [0, 1]."""
    if not (0.0 <= S <= 1.0):
        return float("nan")
    if S == 0.0:
        return 0.0
    if S >= 1.0:
        return 0.5
    return brentq(lambda x: binary_entropy(x) - S, 0.0, 0.5, xtol=1e-300, rtol=1e-15)


@dataclass(frozen=True)
class SweepRow:
    two_a: float
    S_full_bits: float
    S_twolevel_bits: float
    c_estimate: float


def region_sweep(sys_or_state, sizes, center=(0.0, 0.0), n=256):
    """Entanglement of square region-filtered ground states against region size.

    ``sizes`` are full widths 2a (a = b).  ``c_estimate`` inverts
    S = h((c a b)^2 / 4) and is NaN when S > 1 bit.
    """
    from .qubit_reduction import Region
    from .state_model import ground_state

    state = ground_state(sys_or_state) if isinstance(sys_or_state, OscillatorSystem) else sys_or_state
    rows = []
    for two_a in sizes:
        a = 0.5 * float(two_a)
        filtered = region_state(state, Region(tuple(center), (a, a)), n)
        S = schmidt_entropy(filtered)
        S2 = schmidt_entropy(filtered, two_level_only=True)
        x = invert_binary_entropy(S)
        rows.append(SweepRow(float(two_a), S, S2, 2.0 * math.sqrt(x) / (a * a)))
    return rows
