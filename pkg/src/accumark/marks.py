"""Gamma-mixture mark law: exponential tilting, moments, stability.

The mark distribution is a finite mixture of Gamma components with constant
weights. Exponential tilting maps the family to itself (new rates, new
weights, same shapes), which is what makes the pricing measure change
tractable. This module also carries the mean-reversion stability check and
a weighted total-variation diagnostic used to propagate calibration error.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.special import polygamma

from .errors import DimensionMismatch, MomentDiverges, TiltOutOfDomain

__all__ = [
    "GammaMixture",
    "EsscherParams",
    "ModelParams",
    "StabilityReport",
    "esscher_tilt",
    "mgf",
    "complex_mgf",
    "mean",
    "check_stability",
    "weighted_tv_bound",
]

# Construction renormalizes weights whose sum is off by at most this much.
_WEIGHT_RENORM_TOL = 1e-9
# After renormalization the sum must hold to this tolerance.
_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class GammaMixture:
    """Finite Gamma mixture with constant weights.

    Parameters
    ----------
    weights : tuple of float
        Mixing probabilities, nonnegative, summing to 1. Sums within 1e-9
        of 1 are renormalized at construction; anything further off is
        rejected.
    shapes : tuple of float
        Component shape parameters, strictly positive.
    rates : tuple of float
        Component rate parameters, strictly positive. The density of
        component m is rates[m]^shapes[m] x^(shapes[m]-1)
        exp(-rates[m] x) / Gamma(shapes[m]) on x > 0.
    """

    weights: tuple
    shapes: tuple
    rates: tuple

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        shapes = tuple(float(k) for k in self.shapes)
        rates = tuple(float(b) for b in self.rates)
        if not (len(weights) == len(shapes) == len(rates)):
            raise DimensionMismatch(
                f"weights/shapes/rates lengths differ: "
                f"{len(weights)}/{len(shapes)}/{len(rates)}")
        if len(weights) < 1:
            raise DimensionMismatch("mixture needs at least one component")
        if any(w < 0.0 for w in weights):
            raise ValueError("mixture weights must be nonnegative")
        if any(k <= 0.0 for k in shapes):
            raise ValueError("shape parameters must be strictly positive")
        if any(b <= 0.0 for b in rates):
            raise ValueError("rate parameters must be strictly positive")
        total = math.fsum(weights)
        if abs(total - 1.0) > _WEIGHT_RENORM_TOL:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")
        weights = tuple(w / total for w in weights)
        assert abs(math.fsum(weights) - 1.0) <= _WEIGHT_SUM_TOL
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "shapes", shapes)
        object.__setattr__(self, "rates", rates)

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def min_rate(self) -> float:
        return min(self.rates)


@dataclass(frozen=True)
class EsscherParams:
    """Exponential tilt exponent; must stay below every mixture rate."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))


@dataclass(frozen=True)
class ModelParams:
    """Dynamics of the self-exciting intensity and the contract frame.

    The intensity mean-reverts at speed ``kappa`` toward ``lambda_bar``
    between events and jumps by ``beta`` times the mark at each event.
    ``r`` discounts, ``T`` is the horizon in years, ``lambda0``/``u0`` are
    the initial intensity and initial accumulated mark.
    """

    kappa: float
    lambda_bar: float
    beta: float
    r: float
    T: float
    lambda0: float
    u0: float

    def __post_init__(self):
        for name in ("kappa", "lambda_bar", "beta", "r", "T", "lambda0", "u0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.kappa <= 0.0:
            raise ValueError("kappa must be strictly positive")
        if self.T <= 0.0:
            raise ValueError("T must be strictly positive")
        for name in ("lambda_bar", "beta", "r", "lambda0", "u0"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the mean-reversion dominance check."""

    satisfied: bool
    margin: float


def esscher_tilt(mix: GammaMixture, theta: float) -> GammaMixture:
    """Exponentially tilt the mixture by exp(theta * x).

    The tilted law is again a Gamma mixture: component rates drop by
    ``theta``, shapes are unchanged, and weights are reweighted by each
    component's exponential moment and renormalized.

    Parameters
    ----------
    mix : GammaMixture
    theta : float
        Tilt exponent, strictly below ``min(mix.rates)``. Negative values
        (de-tilting) are allowed.

    Returns
    -------
    GammaMixture

    Raises
    ------
    TiltOutOfDomain
        If ``theta >= min(mix.rates)``.
    """
    theta = float(theta)
    if theta >= mix.min_rate:
        raise TiltOutOfDomain(
            f"theta={theta} not below min rate {mix.min_rate}")
    if theta == 0.0:
        return mix
    # Per-component exponential moments, computed in log space so extreme
    # shapes cannot overflow before the renormalization.
    log_factors = [k * math.log(b / (b - theta))
                   for k, b in zip(mix.shapes, mix.rates)]
    log_w = [math.log(w) + lf if w > 0.0 else -math.inf
             for w, lf in zip(mix.weights, log_factors)]
    top = max(log_w)
    unnorm = [math.exp(lw - top) for lw in log_w]
    total = math.fsum(unnorm)
    new_weights = tuple(u / total for u in unnorm)
    new_rates = tuple(b - theta for b in mix.rates)
    return GammaMixture(new_weights, mix.shapes, new_rates)


def mgf(mix: GammaMixture, s: float) -> float:
    """Exponential moment E[exp(s X)] of the mixture.

    Parameters
    ----------
    mix : GammaMixture
    s : float
        Must satisfy ``s < min(mix.rates)``.

    Raises
    ------
    MomentDiverges
        If ``s >= min(mix.rates)``.
    """
    s = float(s)
    if s >= mix.min_rate:
        raise MomentDiverges(f"s={s} not below min rate {mix.min_rate}")
    return math.fsum(w * (b / (b - s)) ** k
                     for w, k, b in zip(mix.weights, mix.shapes, mix.rates))


def complex_mgf(mix: GammaMixture, eta: complex) -> complex:
    """Analytic continuation E[exp(eta X)] for complex eta.

    Principal-branch powers; ``Re(eta)`` must stay below every rate, which
    keeps each base ``b/(b - eta)`` off the negative real axis.

    Raises
    ------
    MomentDiverges
        If ``Re(eta) >= min(mix.rates)``.
    """
    eta = complex(eta)
    if eta.real >= mix.min_rate:
        raise MomentDiverges(
            f"Re(eta)={eta.real} not below min rate {mix.min_rate}")
    out = 0.0 + 0.0j
    for w, k, b in zip(mix.weights, mix.shapes, mix.rates):
        out += w * cmath.exp(k * cmath.log(b / (b - eta)))
    return out


def mean(mix: GammaMixture) -> float:
    """First moment of the mixture, sum of w * shape / rate."""
    return math.fsum(w * k / b
                     for w, k, b in zip(mix.weights, mix.shapes, mix.rates))


def check_stability(model: ModelParams, mix: GammaMixture,
                    theta: float) -> StabilityReport:
    """Check that mean reversion dominates the expected self-excitation.

    The intensity stays ergodic when ``kappa`` exceeds ``beta`` times the
    largest tilted component mean, i.e. ``beta * max_m k_m / (b_m - theta)``.

    Returns
    -------
    StabilityReport
        ``margin`` is kappa minus the excitation term; ``satisfied`` is
        True when the margin is strictly positive.

    Raises
    ------
    TiltOutOfDomain
        If ``theta >= min(mix.rates)``.
    """
    theta = float(theta)
    if theta >= mix.min_rate:
        raise TiltOutOfDomain(
            f"theta={theta} not below min rate {mix.min_rate}")
    excitation = model.beta * max(k / (b - theta)
                                  for k, b in zip(mix.shapes, mix.rates))
    margin = model.kappa - excitation
    return StabilityReport(satisfied=margin > 0.0, margin=margin)


def _box_envelope(mixA: GammaMixture, mixB: GammaMixture):
    shapes = mixA.shapes + mixB.shapes
    rates = mixA.rates + mixB.rates
    return (min(shapes), max(shapes), min(rates), max(rates))


def weighted_tv_bound(mixA: GammaMixture, mixB: GammaMixture, delta: float,
                      box: tuple | None = None) -> float:
    """Upper bound on the exp(delta x)-weighted L1 distance of two mixtures.

    Bounds ``integral exp(delta x) |densityA - densityB| dx`` by a weight
    term plus parameter-difference terms with Lipschitz constants taken as
    suprema over a compact parameter box.

    Parameters
    ----------
    mixA, mixB : GammaMixture
        Same number of components, compared component by component.
    delta : float
        Weight exponent, ``0 <= delta < min rate`` over both mixtures.
    box : tuple, optional
        ``(k_lo, k_hi, b_lo, b_hi)`` containing every component of both
        mixtures, with ``b_lo > delta``. Defaults to the tight envelope of
        the two parameter sets.

    Returns
    -------
    float
        The bound. Zero when the mixtures are identical.

    Raises
    ------
    DimensionMismatch
        Different numbers of components.
    TiltOutOfDomain
        ``delta`` outside ``[0, min rate)`` or box rates not above delta.
    """
    if mixA.n_components != mixB.n_components:
        raise DimensionMismatch(
            f"{mixA.n_components} vs {mixB.n_components} components")
    delta = float(delta)
    min_rate = min(mixA.min_rate, mixB.min_rate)
    if not 0.0 <= delta < min_rate:
        raise TiltOutOfDomain(
            f"delta={delta} outside [0, {min_rate})")
    if box is None:
        box = _box_envelope(mixA, mixB)
    k_lo, k_hi, b_lo, b_hi = (float(v) for v in box)
    if not (0.0 < k_lo <= k_hi and delta < b_lo <= b_hi):
        raise TiltOutOfDomain(f"invalid parameter box {box!r}")
    for m in (mixA, mixB):
        for k, b in zip(m.shapes, m.rates):
            if not (k_lo <= k <= k_hi and b_lo <= b <= b_hi):
                raise TiltOutOfDomain(
                    f"component (k={k}, b={b}) outside box {box!r}")

    def weight_moment(k, b):
        return (b / (b - delta)) ** k

    # Lipschitz constants as suprema over the box. Every factor of the
    # rate constant peaks at the (k_hi, b_lo) corner; the shape constant
    # mixes corners, so it uses a product of separate suprema.
    m_sup = weight_moment(k_hi, b_lo)
    c_rate = m_sup * (k_hi * delta / (b_lo * (b_lo - delta))
                      + math.sqrt(k_hi) / (b_lo - delta))
    c_shape = m_sup * (math.log(b_lo / (b_lo - delta))
                       + math.sqrt(float(polygamma(1, k_lo))))

    total = 0.0
    for m in range(mixA.n_components):
        total += (abs(mixA.weights[m] - mixB.weights[m])
                  * weight_moment(mixA.shapes[m], mixA.rates[m]))
        total += mixB.weights[m] * (
            c_shape * abs(mixA.shapes[m] - mixB.shapes[m])
            + c_rate * abs(mixA.rates[m] - mixB.rates[m]))
    return total
