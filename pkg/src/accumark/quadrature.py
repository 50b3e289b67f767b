"""Generalized Gauss-Laguerre rules and the nonlocal jump gain.

The jump gain at a grid node is the exponential-moment average of the
interpolated next-step surface over the mark distribution. Each Gamma
component with shape k maps to a rule with weight exponent alpha = k - 1
after substituting z = rate * x, so the same cached rules serve every
time step and every frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import interp as interp_mod
from .errors import (EigenFailure, InvalidAlpha, RuleMismatch,
                     TiltOutOfDomain)
from .marks import GammaMixture

__all__ = ["GLRule", "gauss_laguerre", "rules_for_mixture", "jump_gain",
           "boundary_hit_profile", "boundary_hit_ratio"]

# Rule alpha must match the component shape minus one to this tolerance.
_ALPHA_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class GLRule:
    """Nodes and weights for integral f(z) z^alpha exp(-z) dz on (0, inf).

    Weights sum to Gamma(alpha + 1); the rule is exact for polynomials up
    to degree 2 * len(nodes) - 1.
    """

    alpha: float
    nodes: np.ndarray
    weights: np.ndarray


@lru_cache(maxsize=256)
def gauss_laguerre(alpha: float, Q: int) -> GLRule:
    """Build the Q-point generalized Gauss-Laguerre rule.

    Nodes are the eigenvalues of the symmetric Jacobi matrix of the
    weight z^alpha exp(-z) (diagonal 2j + alpha + 1, off-diagonal
    sqrt(j (j + alpha))); weights come from the squared first components
    of the eigenvectors, scaled so they sum to Gamma(alpha + 1).

    Parameters
    ----------
    alpha : float
        Weight exponent, strictly greater than -1.
    Q : int
        Number of points, at least 1.

    Raises
    ------
    InvalidAlpha
        alpha <= -1 or Q < 1.
    EigenFailure
        The tridiagonal eigensolve did not converge.
    """
    alpha = float(alpha)
    Q = int(Q)
    if alpha <= -1.0:
        raise InvalidAlpha(f"alpha must exceed -1, got {alpha}")
    if Q < 1:
        raise InvalidAlpha(f"Q must be at least 1, got {Q}")
    j = np.arange(Q, dtype=float)
    diag = 2.0 * j + alpha + 1.0
    off = np.sqrt(j[1:] * (j[1:] + alpha))
    try:
        nodes = eigh_tridiagonal(diag, off, eigvals_only=True)
    except Exception as exc:
        raise EigenFailure(f"tridiagonal eigensolve failed: {exc}") from exc
    if not np.all(np.isfinite(nodes)):
        raise EigenFailure("tridiagonal eigensolve returned non-finite nodes")
    # Weight at node z is 1 / sum_j q_j(z)^2 over the orthonormal
    # polynomials of the weight function. This equals the squared first
    # eigenvector component times Gamma(alpha + 1) but stays positive
    # where the LAPACK eigenvectors underflow to zero at the extreme
    # nodes of large rules.
    q_prev = np.zeros(Q)
    q_curr = np.full(Q, math.exp(-0.5 * math.lgamma(alpha + 1.0)))
    chris = q_curr * q_curr
    for m in range(Q - 1):
        q_next = ((nodes - diag[m]) * q_curr - (off[m - 1] if m else 0.0)
                  * q_prev) / off[m]
        chris += q_next * q_next
        q_prev, q_curr = q_curr, q_next
    weights = 1.0 / chris
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return GLRule(alpha=alpha, nodes=nodes, weights=weights)


def rules_for_mixture(mix: GammaMixture, Q: int) -> tuple:
    """One rule per component, alpha = shape - 1, shared via the cache."""
    return tuple(gauss_laguerre(k - 1.0, Q) for k in mix.shapes)


def _check_rules(tilted: GammaMixture, rules) -> None:
    if len(rules) != tilted.n_components:
        raise RuleMismatch(
            f"{len(rules)} rules for {tilted.n_components} components")
    for k, rule in zip(tilted.shapes, rules):
        if abs(rule.alpha - (k - 1.0)) > _ALPHA_MATCH_TOL:
            raise RuleMismatch(
                f"rule alpha {rule.alpha} does not match shape {k} - 1")


def jump_gain(F, i: int, eta: complex, tilted: GammaMixture, rules,
              interp: interp_mod.Interpolant | None, domain, beta: float):
    """Quadrature value of the jump integral at one grid node.

    Computes sum over components m of
    ``w_m / Gamma(k_m) * sum_q weight_q exp(eta z_q / b_m) P(lam_i + beta
    z_q / b_m)`` where P interpolates the grid samples ``F`` and b_m are
    the tilted rates.

    Parameters
    ----------
    F : array_like
        Surface samples on the grid nodes (used to build the interpolant
        when ``interp`` is None).
    i : int
        Grid-node index at which the gain is evaluated.
    eta : complex
        Frequency; real part below every tilted rate.
    tilted : GammaMixture
        Already-tilted mark law.
    rules : sequence of GLRule
        Per-component rules, alpha matching shape - 1.
    interp : Interpolant or None
        Prebuilt interpolant of ``F`` over the grid; None builds a
        clamped linear one.
    domain : SolverGrid
        Supplies the node coordinates.
    beta : float
        Self-excitation loading multiplying each mark.

    Raises
    ------
    TiltOutOfDomain
        Re(eta) at or above a tilted rate.
    RuleMismatch
        Rule/component misalignment.
    """
    eta = complex(eta)
    if eta.real >= tilted.min_rate:
        raise TiltOutOfDomain(
            f"Re(eta)={eta.real} not below min rate {tilted.min_rate}")
    _check_rules(tilted, rules)
    lam = domain.lambda_values
    if interp is None:
        interp = interp_mod.build(lam, np.asarray(F), mode="linear",
                                  boundary="clamp")
    lam_i = lam[int(i)]
    total = 0.0 + 0.0j
    for w_m, k_m, b_m, rule in zip(tilted.weights, tilted.shapes,
                                   tilted.rates, rules):
        x = rule.nodes / b_m  # physical mark values
        vals = interp_mod.eval(interp, lam_i + beta * x)
        coeff = w_m * math.exp(-math.lgamma(k_m))
        total += coeff * np.sum(rule.weights * np.exp(eta * x) * vals)
    return complex(total)


def boundary_hit_profile(grid, beta: float, tilted: GammaMixture,
                         rules) -> np.ndarray:
    """Per-node normalized quadrature mass shifted past the grid top.

    Entry i is the probability mass (under the tilted mark law's
    quadrature discretization) of marks that push the intensity from
    node i beyond lambda_max, i.e. the mass the clamped extension pins
    to the boundary.
    """
    _check_rules(tilted, rules)
    lam = grid.lambda_values
    out = np.zeros(lam.size)
    if beta == 0.0:
        return out
    for w_m, k_m, b_m, rule in zip(tilted.weights, tilted.shapes,
                                   tilted.rates, rules):
        shift = beta * rule.nodes / b_m
        mass = w_m * math.exp(-math.lgamma(k_m)) * rule.weights
        escapes = lam[:, None] + shift[None, :] > grid.lambda_max
        out += escapes @ mass
    return out


def boundary_hit_ratio(grid, beta: float, tilted: GammaMixture,
                       rules) -> float:
    """Grid-averaged fraction of quadrature mass escaping past the top.

    Zero when beta is zero (no shift ever exits); approaches one when the
    domain is so small that almost every mark overshoots it.
    """
    return float(np.mean(boundary_hit_profile(grid, beta, tilted, rules)))
