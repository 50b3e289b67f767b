"""Pure-NumPy modal sweep, the fallback for the compiled kernel.

Same arithmetic as the Cython module: per-step jump-gain gather with
precomputed cell offsets, then a banded solve against the factorized
implicit operator. Kept vectorized so a missing compiler still prices in
reasonable time.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .interp import _fc_slopes_real

NAME = "python"


def _complex_slopes(h: float, F: np.ndarray) -> np.ndarray:
    # Divide per component: complex-by-real division rounds through a
    # reciprocal and would drift off the compiled kernel's arithmetic.
    hs = np.full(F.size - 1, h)
    return (_fc_slopes_real(hs, np.diff(F.real) / hs)
            + 1j * _fc_slopes_real(hs, np.diff(F.imag) / hs))


def modal_sweep(n_steps, lam, h, dt, sub, diag, sup, offsets, fracs,
                coeffs, mode, boundary):
    """Run n_steps backward from the unit terminal surface.

    Parameters mirror the compiled kernel: ``offsets``/``fracs`` locate
    each quadrature node's shifted query on the uniform grid, ``coeffs``
    carries mixture weight times quadrature weight times the exponential
    twist, ``mode`` is 0 for linear and 1 for pchip, ``boundary`` 0 for
    clamp and 1 for linear extrapolation.
    """
    n = lam.size
    top = n - 1
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub

    base = np.arange(n)[None, :] + offsets[:, None]     # (nmq, n)
    inside = base <= top - 1
    j0 = np.minimum(base, top - 1)
    j1 = j0 + 1
    w = fracs[:, None]
    # Distance past the top node, for the extrapolating boundary.
    dist = (base + w - top) * h

    if mode == 1:
        h00 = (1.0 - w) ** 2 * (1.0 + 2.0 * w)
        h10 = w * (1.0 - w) ** 2
        h01 = w * w * (3.0 - 2.0 * w)
        h11 = w * w * (w - 1.0)

    F = np.ones(n, dtype=complex)
    one_minus = 1.0 - dt * lam
    drive = dt * lam
    for _ in range(n_steps):
        if mode == 1:
            m = _complex_slopes(h, F)
            vals = (F[j0] * h00 + h * m[j0] * h10
                    + F[j1] * h01 + h * m[j1] * h11)
            edge_slope = m[top]
        else:
            vals = F[j0] * (1.0 - w) + F[j1] * w
            dtop = F[top] - F[top - 1]
            edge_slope = dtop.real / h + 1j * (dtop.imag / h)
        if boundary == 1:
            out_val = F[top] + dist * edge_slope
        else:
            out_val = F[top]
        vals = np.where(inside, vals, out_val)
        gains = coeffs @ vals
        rhs = one_minus * F + drive * gains
        F = solve_banded((1, 1), ab, rhs, check_finite=False,
                         overwrite_b=True)
    return F
