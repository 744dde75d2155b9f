"""Mixed first-order partial derivatives by central differences.

Only multi-indices with every entry in {0, 1} are needed downstream, so a
single 3**n stencil per step size serves all of them.  Successive halvings
of the step are combined by Richardson extrapolation in h**2.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import NoiseDominatedError


def _stencil_values(f, x0, h):
    n = len(x0)
    offsets = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=n)))
    pts = np.asarray(x0, dtype=float)[:, None] + h * offsets.T
    vals = np.asarray(f(*pts), dtype=complex)
    return vals.reshape((3,) * n)


def _central(vals, h):
    n = vals.ndim
    out = np.zeros((2,) * n, dtype=complex)
    for mi in itertools.product((0, 1), repeat=n):
        acc = 0.0 + 0.0j
        active = [d for d in range(n) if mi[d]]
        for signs in itertools.product((-1, 1), repeat=len(active)):
            idx = [1] * n
            for d, s in zip(active, signs):
                idx[d] = 1 + s
            acc += np.prod(signs) * vals[tuple(idx)]
        out[mi] = acc / (2.0 * h) ** len(active)
    return out


def mixed_partials(f, x0, h=0.05, levels=3, rtol=1e-6, max_levels=5):
    """All mixed partials of ``f`` at ``x0`` with per-variable order <= 1.

    Parameters
    ----------
    f : callable
        Vectorized function of ``len(x0)`` array arguments.
    x0 : sequence of float
        Expansion point.
    h : float
        Coarsest step; each further level halves it.
    levels : int
        Minimum number of step sizes in the Richardson table.
    rtol : float
        Allowed disagreement between the last two extrapolants, relative to
        ``max(|D|, |f(x0)|)`` entrywise.
    max_levels : int
        Levels are added one at a time up to this count while the
        disagreement exceeds ``rtol``.

    Returns
    -------
    derivs : ndarray, shape (2,)*n
        ``derivs[i, j, ...]`` is the derivative with orders ``(i, j, ...)``.
    err : ndarray, shape (2,)*n
        Absolute error estimate of each entry.
    """
    table = []
    k = 0
    while True:
        hk = h / 2**k
        row = [_central(_stencil_values(f, x0, hk), hk)]
        for j in range(1, k + 1):
            prev = table[k - 1][j - 1]
            row.append(row[j - 1] + (row[j - 1] - prev) / (4**j - 1))
        table.append(row)
        k += 1
        if k < levels:
            continue
        best = table[-1][-1]
        err = np.abs(best - table[-1][-2]) if k > 1 else np.zeros(best.shape)
        scale = np.maximum(np.abs(best), abs(best.flat[0]))
        if np.all(err <= rtol * scale):
            return best, err
        if k >= max(levels, max_levels):
            break
    worst = float(np.max(err / scale))
    raise NoiseDominatedError(
        f"Richardson estimates disagree (relative {worst:.2e} > {rtol:.1e}); "
        "adjust the step size"
    )
