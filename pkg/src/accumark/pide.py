"""Backward modal solver for the intensity-direction PIDE.

One frequency at a time, the complex-valued modal surface is stepped
backward from a terminal value of one: drift and discount are treated
implicitly (a time-independent tridiagonal system, factorized once),
the nonlocal jump gain explicitly through Gauss-Laguerre quadrature.
Upwinded first-order differences make the implicit matrix an M-matrix
with a uniform dominance margin of 1 + dt*r, which is what the sup-norm
stability analysis leans on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import interp as interp_mod
from .errors import SingularMatrix, TiltOutOfDomain
from .marks import GammaMixture, ModelParams
from .quadrature import GLRule, jump_gain

__all__ = [
    "SolverGrid",
    "TriDiag",
    "ModalSurface",
    "build_implicit_matrix",
    "dominance_margins",
    "thomas_solve",
    "imex_step",
    "solve_modal",
    "lipschitz_constant",
]

# N_t * dt must reproduce the horizon within this tolerance.
_HORIZON_TOL = 1e-12


@dataclass(frozen=True)
class SolverGrid:
    """Uniform space-time grid for the modal solver.

    ``N_lambda + 1`` intensity nodes span [lambda_min, lambda_max];
    ``N_t`` backward steps of size ``dt`` span the horizon.
    """

    lambda_min: float
    lambda_max: float
    N_lambda: int
    dt: float
    N_t: int

    def __post_init__(self):
        object.__setattr__(self, "lambda_min", float(self.lambda_min))
        object.__setattr__(self, "lambda_max", float(self.lambda_max))
        object.__setattr__(self, "N_lambda", int(self.N_lambda))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "N_t", int(self.N_t))
        if not self.lambda_min < self.lambda_max:
            raise ValueError("lambda_min must be below lambda_max")
        if self.N_lambda < 2:
            raise ValueError("N_lambda must be at least 2")
        if self.dt <= 0.0 or self.N_t < 1:
            raise ValueError("dt must be positive and N_t at least 1")

    @cached_property
    def lambda_values(self) -> np.ndarray:
        lam = np.linspace(self.lambda_min, self.lambda_max,
                          self.N_lambda + 1)
        lam.flags.writeable = False
        return lam

    @property
    def h(self) -> float:
        return (self.lambda_max - self.lambda_min) / self.N_lambda

    def check_horizon(self, T: float) -> None:
        if abs(self.N_t * self.dt - T) > _HORIZON_TOL:
            raise ValueError(
                f"N_t*dt = {self.N_t * self.dt!r} does not reproduce "
                f"horizon T = {T!r}")


@dataclass(frozen=True)
class TriDiag:
    """Tridiagonal implicit operator.

    ``diag`` has one entry per grid node; ``sub[i-1]`` and ``sup[i]``
    are the couplings of row i to nodes i-1 and i+1. Off-diagonals are
    nonpositive and each row's diagonal exceeds the absolute row sum by
    exactly 1 + dt*r.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray


@dataclass(frozen=True)
class ModalSurface:
    """Modal values on the intensity grid at one time level."""

    eta: complex
    values: np.ndarray
    time_index: int


def build_implicit_matrix(grid: SolverGrid, model: ModelParams) -> TriDiag:
    """Implicit operator for drift and discount, upwinded.

    Interior rows upwind the mean-reverting drift kappa*(lambda_bar -
    lambda); the bottom row zeroes the backward difference (reflecting
    ghost node), the top row keeps only the backward difference (the
    drift points inward there, no condition needed).
    """
    lam = grid.lambda_values
    h = grid.h
    dt = grid.dt
    mu = model.kappa * (model.lambda_bar - lam)
    mu_plus = np.maximum(mu, 0.0)
    mu_minus = np.minimum(mu, 0.0)
    # Bottom row: ghost node kills the backward difference.
    mu_minus[0] = 0.0
    # Top row: one-sided backward difference only.
    mu_plus[-1] = 0.0
    diag = 1.0 + dt * ((mu_plus - mu_minus) / h + model.r)
    sub = dt * mu_minus[1:] / h
    sup = -dt * mu_plus[:-1] / h
    diag.flags.writeable = False
    sub.flags.writeable = False
    sup.flags.writeable = False
    return TriDiag(sub=sub, diag=diag, sup=sup)


def dominance_margins(A: TriDiag) -> np.ndarray:
    """Per-row diagonal dominance margin diag - |sub| - |sup|."""
    margins = A.diag.copy()
    margins[1:] -= np.abs(A.sub)
    margins[:-1] -= np.abs(A.sup)
    return margins


def thomas_solve(A: TriDiag, rhs) -> np.ndarray:
    """Solve the tridiagonal system by sequential LU elimination.

    Diagonal dominance guarantees nonzero pivots, so no pivoting is
    performed; a zero pivot raises rather than dividing through.

    Raises
    ------
    SingularMatrix
        On a zero pivot (unreachable for operators built here).
    """
    rhs = np.asarray(rhs)
    dtype = complex if np.iscomplexobj(rhs) else float
    n = A.diag.size
    x = np.empty(n, dtype=dtype)
    dprime = np.empty(n, dtype=float)
    y = np.empty(n, dtype=dtype)
    dprime[0] = A.diag[0]
    if dprime[0] == 0.0:
        raise SingularMatrix("zero pivot at row 0")
    y[0] = rhs[0]
    for i in range(1, n):
        w = A.sub[i - 1] / dprime[i - 1]
        dprime[i] = A.diag[i] - w * A.sup[i - 1]
        if dprime[i] == 0.0:
            raise SingularMatrix(f"zero pivot at row {i}")
        y[i] = rhs[i] - w * y[i - 1]
    x[n - 1] = y[n - 1] / dprime[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = (y[i] - A.sup[i] * x[i + 1]) / dprime[i]
    return x


def gather_tables(tilted: GammaMixture, rules, eta: complex, beta: float,
                  h: float):
    """Per-(component, node) tables driving the jump-gain gather.

    The shift beta*z/b of each quadrature node is the same at every grid
    node on a uniform grid, so it reduces to an integer cell offset plus
    a fractional position; the complex coefficient folds together the
    mixture weight, the quadrature weight, and the exponential twist.

    Returns
    -------
    offsets : int64 array
    fracs : float64 array in [0, 1)
    coeffs : complex128 array
    """
    eta = complex(eta)
    if eta.real >= tilted.min_rate:
        raise TiltOutOfDomain(
            f"Re(eta)={eta.real} not below min rate {tilted.min_rate}")
    offsets, fracs, coeffs = [], [], []
    for w_m, k_m, b_m, rule in zip(tilted.weights, tilted.shapes,
                                   tilted.rates, rules):
        x = rule.nodes / b_m
        ratio = beta * x / h
        o = np.floor(ratio)
        offsets.append(o.astype(np.int64))
        fracs.append(ratio - o)
        coeffs.append(w_m * math.exp(-math.lgamma(k_m))
                      * rule.weights * np.exp(eta * x))
    return (np.concatenate(offsets), np.concatenate(fracs),
            np.concatenate(coeffs).astype(complex))


def imex_step(F_next: ModalSurface, A: TriDiag, model: ModelParams,
              tilted: GammaMixture, rules, grid: SolverGrid,
              interp_mode: str = "linear",
              boundary: str = "clamp") -> ModalSurface:
    """One backward step: explicit jump gain, implicit drift and discount.

    Reference implementation working through the public interpolant and
    per-node jump gain; the production sweep in :func:`solve_modal` runs
    the same arithmetic through the selected kernel backend.
    """
    if F_next.time_index < 1:
        raise ValueError("cannot step backward past time index 0")
    lam = grid.lambda_values
    itp = interp_mod.build(lam, F_next.values, mode=interp_mode,
                           boundary=boundary)
    gains = np.array([
        jump_gain(F_next.values, i, F_next.eta, tilted, rules, itp, grid,
                  model.beta)
        for i in range(lam.size)])
    rhs = (1.0 - grid.dt * lam) * F_next.values + grid.dt * lam * gains
    values = thomas_solve(A, rhs)
    return ModalSurface(eta=F_next.eta, values=values,
                        time_index=F_next.time_index - 1)


def solve_modal(eta: complex, model: ModelParams, tilted: GammaMixture,
                rules, grid: SolverGrid, interp_mode: str = "linear",
                boundary: str = "clamp", warn_cfl: bool = True,
                check: bool = True) -> ModalSurface:
    """Solve one frequency backward from the unit terminal surface.

    Parameters
    ----------
    eta : complex
        Frequency on the damped line; real part below every tilted rate.
    warn_cfl : bool
        Emit a RuntimeWarning when dt times the computable explicit-stage
        growth constant exceeds one. The scheme remains usable there (the
        implicit stage contracts), so this never aborts.
    check : bool
        Validate the horizon and emit the CFL warning. Sweeps that have
        validated once can disable it.

    Returns
    -------
    ModalSurface
        Values at time index 0.
    """
    from .backend import modal_sweep

    if check:
        grid.check_horizon(model.T)
        if warn_cfl:
            L = lipschitz_constant(grid, max(complex(eta).real, 0.0),
                                   tilted, rules)
            if grid.dt * L > 1.0:
                warnings.warn(
                    f"explicit-stage bound dt*L = {grid.dt * L:.3g} > 1; "
                    "sup-norm growth is not certified on this grid",
                    RuntimeWarning, stacklevel=2)
    A = build_implicit_matrix(grid, model)
    offsets, fracs, coeffs = gather_tables(tilted, rules, eta, model.beta,
                                           grid.h)
    values = modal_sweep(
        grid.N_t, grid.lambda_values, grid.h, grid.dt,
        A.sub, A.diag, A.sup, offsets, fracs, coeffs,
        1 if interp_mode == "pchip" else 0,
        1 if boundary == "linear-extrapolate" else 0)
    return ModalSurface(eta=complex(eta), values=values, time_index=0)


def lipschitz_constant(grid: SolverGrid, delta: float,
                       tilted: GammaMixture, rules) -> float:
    """Computable sup-norm growth constant of the explicit jump stage.

    Largest grid intensity times (quadrature exponential moment at the
    damping plus one). When dt times this is below one, each explicit
    stage is a contraction after the implicit discount divide.

    Raises
    ------
    TiltOutOfDomain
        delta at or above a tilted rate.
    """
    delta = float(delta)
    if delta >= tilted.min_rate:
        raise TiltOutOfDomain(
            f"delta={delta} not below min rate {tilted.min_rate}")
    moment = 0.0
    for w_m, k_m, b_m, rule in zip(tilted.weights, tilted.shapes,
                                   tilted.rates, rules):
        moment += (w_m * math.exp(-math.lgamma(k_m))
                   * np.sum(rule.weights * np.exp(delta * rule.nodes / b_m)))
    return float(grid.lambda_max * (moment + 1.0))
