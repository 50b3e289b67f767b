"""Shape-preserving interpolation on the intensity grid.

Two modes: monotone piecewise-cubic Hermite (harmonic-mean slopes with
monotone limiting) and piecewise linear. Complex data are interpolated
componentwise on real and imaginary parts, since the slope limiter is a
sign test. Queries outside the grid either clamp to the edge value
(default) or extrapolate linearly with the limited boundary slope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonMonotoneGrid, TooFewPoints

__all__ = ["Interpolant", "build", "eval"]

MODES = ("pchip", "linear")
BOUNDARIES = ("clamp", "linear-extrapolate")


@dataclass(frozen=True)
class Interpolant:
    """Immutable interpolant over strictly increasing abscissae.

    ``slopes`` holds the per-node derivatives in pchip mode and the edge
    secants (for optional extrapolation) in linear mode.
    """

    xs: np.ndarray
    ys: np.ndarray
    mode: str
    boundary: str
    slopes: np.ndarray | None


def _fc_slopes_real(h: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Monotone-limited slopes for real data.

    Interior nodes use the weighted harmonic mean of the adjacent secants,
    zeroed at local extrema. Boundary nodes use the one-sided three-point
    formula, zeroed when the two nearest secants disagree in sign or when
    the formula itself flips sign against the adjacent secant (the guard
    keeps the first and last cells overshoot-free on monotone data).
    """
    n = d.size + 1
    m = np.zeros(n)
    if n == 2:
        m[0] = m[1] = d[0]
        return m
    prod = d[:-1] * d[1:]
    w1 = 2.0 * h[1:] + h[:-1]
    w2 = h[1:] + 2.0 * h[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        harm = (w1 + w2) / (w1 / d[:-1] + w2 / d[1:])
    m[1:-1] = np.where(prod > 0.0, harm, 0.0)

    def edge(h0, h1, d0, d1):
        if d0 * d1 <= 0.0:
            return 0.0
        slope = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
        return slope if slope * d0 > 0.0 else 0.0

    m[0] = edge(h[0], h[1], d[0], d[1])
    m[-1] = edge(h[-1], h[-2], d[-1], d[-2])
    return m


def _diffquot(ys: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Secant slopes, dividing real and imaginary parts separately.

    Complex-by-real division in numpy multiplies by the reciprocal, which
    rounds differently from direct division and would break the bit-exact
    componentwise contract.
    """
    d = np.diff(ys)
    if np.iscomplexobj(ys):
        return d.real / h + 1j * (d.imag / h)
    return d / h


def _slopes(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h = np.diff(xs)
    d = _diffquot(ys, h)
    if np.iscomplexobj(ys):
        return (_fc_slopes_real(h, d.real)
                + 1j * _fc_slopes_real(h, d.imag))
    return _fc_slopes_real(h, d)


def build(xs, ys, mode: str = "pchip", boundary: str = "clamp") -> Interpolant:
    """Construct an interpolant over the given nodes.

    Parameters
    ----------
    xs : array_like
        Strictly increasing abscissae, at least two.
    ys : array_like
        Nodal values, real or complex, same length as ``xs``.
    mode : {"pchip", "linear"}
    boundary : {"clamp", "linear-extrapolate"}

    Raises
    ------
    TooFewPoints
        Fewer than two nodes.
    NonMonotoneGrid
        Abscissae not strictly increasing.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys)
    ys = ys.astype(complex) if np.iscomplexobj(ys) else ys.astype(float)
    if xs.ndim != 1 or xs.size < 2:
        raise TooFewPoints(f"need at least 2 nodes, got {xs.size}")
    if ys.shape != xs.shape:
        raise NonMonotoneGrid(
            f"xs and ys shapes differ: {xs.shape} vs {ys.shape}")
    if not np.all(np.diff(xs) > 0.0):
        raise NonMonotoneGrid("abscissae must be strictly increasing")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if boundary not in BOUNDARIES:
        raise ValueError(
            f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    if mode == "pchip":
        slopes = _slopes(xs, ys)
    else:
        # Edge secants, kept only for optional linear extrapolation.
        d = _diffquot(ys, np.diff(xs))
        slopes = np.array([d[0], d[-1]])
    xs.flags.writeable = False
    ys.flags.writeable = False
    slopes.flags.writeable = False
    return Interpolant(xs=xs, ys=ys, mode=mode, boundary=boundary,
                       slopes=slopes)


def eval(it: Interpolant, x):
    """Evaluate the interpolant at scalar or array queries.

    In-domain queries use the Hermite (pchip) or linear cell formula.
    Out-of-domain queries return the nearest edge value under ``clamp``
    or the first-order extension under ``linear-extrapolate``.
    """
    scalar = np.isscalar(x) or np.ndim(x) == 0
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    xs, ys = it.xs, it.ys
    lo, hi = xs[0], xs[-1]
    xc = np.clip(xq, lo, hi)
    j = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, xs.size - 2)
    h = xs[j + 1] - xs[j]
    t = (xc - xs[j]) / h

    if it.mode == "pchip":
        m = it.slopes
        t2 = t * t
        t3 = t2 * t
        out = (ys[j] * (2.0 * t3 - 3.0 * t2 + 1.0)
               + h * m[j] * (t3 - 2.0 * t2 + t)
               + ys[j + 1] * (-2.0 * t3 + 3.0 * t2)
               + h * m[j + 1] * (t3 - t2))
        slope_lo, slope_hi = m[0], m[-1]
    else:
        out = ys[j] * (1.0 - t) + ys[j + 1] * t
        slope_lo, slope_hi = it.slopes[0], it.slopes[1]

    if it.boundary == "linear-extrapolate":
        below = xq < lo
        above = xq > hi
        if np.any(below):
            out = np.where(below, ys[0] + (xq - lo) * slope_lo, out)
        if np.any(above):
            out = np.where(above, ys[-1] + (xq - hi) * slope_hi, out)
    # clamp: xc already pinned queries to the edge nodes.

    return out[0] if scalar else out
