"""Leading-order (small-region) entanglement quantities.

All closed forms take the derivative data of :mod:`localent.state_model`.
The mixed-state concurrence density has no simple closed form; it is
obtained numerically, either from the leading-order two-qubit state of a
derivative block or from the quadrature projection of the state itself.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, UnsupportedError
from .qubit_reduction import Region, project_two_qubit
from .state_model import DerivBlock, ReducedADerivs, derivative_block
from .two_qubit import binary_entropy, concurrence, negativity4

__all__ = [
    "LocalDensityReport",
    "NegativityCoeffs",
    "binary_entropy",
    "concurrence_density",
    "epsilon_filter",
    "filtered_entropy",
    "leading_entanglement",
    "local_density_report",
    "mixed_concurrence_density",
    "negativity_coeffs",
    "negativity_density",
    "optimal_ratio",
    "quadrature_negativity_density",
    "tangle_leading",
]


@dataclass(frozen=True)
class NegativityCoeffs:
    D1: float
    D2: float
    C1: float


@dataclass(frozen=True)
class LocalDensityReport:
    c: float | None
    n: float
    c1_negative_flag: bool
    optimal_ratio: float | None = None


def _real(value, scale, what, rtol=1e-10):
    if abs(value.imag) > rtol * max(scale, 1e-300):
        raise ConsistencyError(f"{what} has imaginary part {value.imag:.3e} (scale {scale:.3e})")
    return float(value.real)


def epsilon_filter(derivs: ReducedADerivs, a):
    """Smaller eigenvalue of Alice's filtered reduced state on [q - a, q + a]."""
    r00, r10, r01, r11 = derivs.r00, derivs.r10, derivs.r01, derivs.r11
    pref = a * a / (3.0 * r00.real**2)
    det = r11 * r00 - r01 * r10
    scale = pref * (abs(r11 * r00) + abs(r01 * r10))
    eps = _real(pref * det, scale, "epsilon")
    if eps < -(1e-12 + 1e-10 * scale):
        raise ConsistencyError(f"negative filter eigenvalue {eps:.3e}; derivative data is corrupted")
    return min(max(eps, 0.0), 0.5)


def filtered_entropy(derivs: ReducedADerivs, a):
    """Entropy (bits) of the Alice-filtered pure state at leading order."""
    return binary_entropy(epsilon_filter(derivs, a))


def _is_pure(block, tol=1e-8):
    return block.factorization_residual() <= tol


def concurrence_density(block: DerivBlock, sizes=(2e-3, 1e-3)):
    """c = C / (ab) at leading order.

    Pure blocks use the closed form.  Mixed blocks have no simple closed form;
    the Wootters concurrence of the leading-order two-qubit state is divided
    by a^2 at two small ``sizes`` and extrapolated in a^2, which uses
    derivative data only.
    """
    if not _is_pure(block):
        from .qubit_reduction import leading_two_qubit

        vals = [concurrence(leading_two_qubit(block, a, a)) / (a * a) for a in sizes]
        return max(float(_richardson_a2(sizes, vals)), 0.0)
    r = block.coeffs
    terms = (r[1, 1, 0, 0] * r[0, 0, 1, 1], r[0, 0, 0, 0] * r[1, 1, 1, 1],
             -r[1, 0, 0, 0] * r[0, 1, 1, 1], -r[0, 1, 0, 0] * r[1, 0, 1, 1])
    scale = sum(abs(t) for t in terms)
    rad = _real(sum(terms), scale, "concurrence radicand")
    if rad < -1e-10 * scale:
        raise ConsistencyError(f"negative concurrence radicand {rad:.3e}")
    return 2.0 / (3.0 * r[0, 0, 0, 0].real) * np.sqrt(max(rad, 0.0))


def tangle_leading(block: DerivBlock, a, b):
    """Leading-order tangle (c a b)^2 of a pure filtered state."""
    if not _is_pure(block):
        raise UnsupportedError("the leading-order tangle formula holds for pure states only")
    return (concurrence_density(block) * a * b) ** 2


def leading_entanglement(block: DerivBlock, a, b):
    """Entanglement entropy estimate h(tau / 4) in bits."""
    return binary_entropy(tangle_leading(block, a, b) / 4.0)


def negativity_coeffs(block: DerivBlock) -> NegativityCoeffs:
    r = block.coeffs
    r0 = r[0, 0, 0, 0]

    def combo(terms, denom, name):
        return _real(sum(terms) / denom, sum(abs(t) for t in terms) / abs(denom), name)

    D1 = combo((r[1, 1, 0, 0] * r0, -r[0, 1, 0, 0] * r[1, 0, 0, 0]), 3 * r0**2, "D1")
    D2 = combo((r[0, 0, 1, 1] * r0, -r[0, 0, 0, 1] * r[0, 0, 1, 0]), 3 * r0**2, "D2")
    C1 = combo((
        r0 * r[0, 1, 0, 1] * r[1, 0, 1, 0],
        -r[0, 0, 0, 1] * r[0, 1, 0, 0] * r[1, 0, 1, 0],
        r[0, 0, 1, 1] * r[0, 1, 0, 0] * r[1, 0, 0, 0],
        -r[0, 0, 1, 1] * r0 * r[1, 1, 0, 0],
        r[0, 0, 1, 0] * r[0, 0, 0, 1] * r[1, 1, 0, 0],
        -r[0, 0, 1, 0] * r[0, 1, 0, 1] * r[1, 0, 0, 0],
    ), 9 * r0**3, "C1")
    return NegativityCoeffs(D1, D2, C1)


def optimal_ratio(coeffs: NegativityCoeffs):
    """Region aspect ratio a/b maximizing the negativity at fixed ab.

    The optimum satisfies a^2 D1 = b^2 D2, so a/b = sqrt(D2 / D1).
    """
    floor = 1e-10 * np.sqrt(abs(coeffs.C1))
    if not (coeffs.D1 > floor and coeffs.D2 > floor):
        raise UnsupportedError("optimal region shape is undefined unless D1 > 0 and D2 > 0")
    return float(np.sqrt(coeffs.D2 / coeffs.D1))


def negativity_density(coeffs: NegativityCoeffs) -> LocalDensityReport:
    """n = sqrt(C1 + D1 D2) - sqrt(D1 D2), or 0 with a flag when C1 < 0."""
    dd = coeffs.D1 * coeffs.D2
    if dd < 0:
        # roundoff in the pure-state limit gives |D1 D2| far below C1
        if dd < -1e-14 * max(abs(coeffs.C1), 1e-300):
            warnings.warn(f"D1*D2 = {dd:.3e} < 0 clamped to 0", RuntimeWarning, stacklevel=2)
        dd = 0.0
    try:
        ratio = optimal_ratio(coeffs)
    except UnsupportedError:
        ratio = None
    if coeffs.C1 < 0:
        return LocalDensityReport(None, 0.0, True, ratio)
    return LocalDensityReport(None, float(np.sqrt(coeffs.C1 + dd) - np.sqrt(dd)), False, ratio)


def _richardson_a2(sizes, values):
    (s1, s2), (f1, f2) = sizes, values
    return (s1 * s1 * f2 - s2 * s2 * f1) / (s1 * s1 - s2 * s2)


def mixed_concurrence_density(state, center=(0.0, 0.0), sizes=(0.02, 0.01), ratio=1.0, quad_order=16):
    """Concurrence density of any state from quadrature + Wootters.

    C/(ab) is evaluated on regions with half-widths a = s * sqrt(ratio),
    b = s / sqrt(ratio) for the two ``sizes`` and extrapolated in s^2.
    """
    vals = []
    for s in sizes:
        a, b = s * np.sqrt(ratio), s / np.sqrt(ratio)
        tq, _ = project_two_qubit(state, Region(center, (a, b)), quad_order, check=False)
        vals.append(concurrence(tq) / (a * b))
    return max(float(_richardson_a2(sizes, vals)), 0.0)


def quadrature_negativity_density(state, center=(0.0, 0.0), sizes=(0.02, 0.01), ratio=1.0, quad_order=16):
    """N/(ab) on regions of aspect ``ratio`` = a/b, extrapolated in s^2."""
    vals = []
    for s in sizes:
        a, b = s * np.sqrt(ratio), s / np.sqrt(ratio)
        tq, _ = project_two_qubit(state, Region(center, (a, b)), quad_order, check=False)
        vals.append(negativity4(tq) / (a * b))
    return max(float(_richardson_a2(sizes, vals)), 0.0)


def local_density_report(state, center=(0.0, 0.0)) -> LocalDensityReport:
    """c and n at ``center`` from the derivative block."""
    block = derivative_block(state, center)
    rep = negativity_density(negativity_coeffs(block))
    return LocalDensityReport(float(concurrence_density(block)), rep.n, rep.c1_negative_flag, rep.optimal_ratio)
