"""Mark-law fitting by EM and pricing-tilt calibration to swap quotes.

The mixture fit alternates soft assignments with weighted moment and
Newton updates per component; the tilt calibration minimizes a
least-squares objective over a bracket with a derivative-free scalar
search, evaluating every candidate tilt on the same simulated paths so
the objective is a fixed deterministic function of the tilt.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from .errors import (BracketInvalid, DegenerateData, GapNonPositive,
                     NonPositiveSample, ObjectiveNotFinite)
from .marks import GammaMixture, ModelParams
from .mc import MCConfig, price_swap_mc

__all__ = [
    "EMConfig",
    "EMResult",
    "ThetaCalibConfig",
    "ThetaCalibResult",
    "newton_gamma_shape",
    "em_fit",
    "calibrate_theta",
    "load_samples",
    "load_quotes",
]

_INITS = ("kmeans-moments", "user-supplied")


@dataclass(frozen=True)
class EMConfig:
    """Component count, stopping rule and guardrails for the mixture fit."""

    M: int
    max_iter: int = 500
    tol: float = 1e-8
    shape_floor: float = 1e-2
    rate_floor: float = 1e-2
    init: str = "kmeans-moments"
    init_mixture: GammaMixture | None = None

    def __post_init__(self):
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        if self.M < 1:
            raise ValueError("component count M must be at least 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol <= 0.0:
            raise ValueError("tol must be strictly positive")
        if self.shape_floor <= 0.0 or self.rate_floor <= 0.0:
            raise ValueError("floors must be strictly positive")
        if self.init not in _INITS:
            raise ValueError(f"init must be one of {_INITS}")
        if self.init == "user-supplied" and self.init_mixture is None:
            raise ValueError("user-supplied init requires init_mixture")


@dataclass(frozen=True)
class EMResult:
    """Fitted mixture with the log-likelihood trace."""

    mixture: GammaMixture
    log_likelihood: tuple
    n_iter: int
    converged: bool


@dataclass(frozen=True)
class ThetaCalibConfig:
    """Bracket, tolerances and quotes for the tilt calibration."""

    bracket: tuple
    tol_theta: float
    tol_objective: float
    quotes: tuple
    mc: MCConfig
    eps_mom: float = 1e-6

    def __post_init__(self):
        lo, hi = (float(self.bracket[0]), float(self.bracket[1]))
        object.__setattr__(self, "bracket", (lo, hi))
        object.__setattr__(
            self, "quotes",
            tuple((float(a), float(b), float(p))
                  for a, b, p in self.quotes))
        if lo >= hi:
            raise ValueError("bracket must satisfy theta_lo < theta_hi")
        if self.tol_theta <= 0.0 or self.tol_objective <= 0.0:
            raise ValueError("tolerances must be strictly positive")
        if self.eps_mom <= 0.0:
            raise ValueError("eps_mom must be strictly positive")


@dataclass(frozen=True)
class ThetaCalibResult:
    """Calibrated tilt with the objective value at the optimum."""

    theta_star: float
    objective_value: float
    iterations: int


def newton_gamma_shape(gap: float) -> float:
    """Solve log(k) - psi(k) = gap for the Gamma shape k.

    Newton iteration from the closed-form seed
    k0 = (3 - gap + sqrt((gap - 3)^2 + 24 gap)) / (12 gap); the residual
    is driven below 1e-10. The left side is strictly decreasing in k, so
    the root is unique; steps that overshoot zero are halved back.

    Raises
    ------
    GapNonPositive
        gap <= 0 has no solution (the gap is a Jensen difference,
        positive for non-degenerate data).
    """
    gap = float(gap)
    if not gap > 0.0:
        raise GapNonPositive(f"log-mean gap must be positive, got {gap}")
    k = (3.0 - gap + math.sqrt((gap - 3.0) ** 2 + 24.0 * gap)) / (12.0 * gap)
    for _ in range(100):
        f = math.log(k) - float(digamma(k)) - gap
        if abs(f) <= 1e-10:
            return k
        fp = 1.0 / k - float(polygamma(1, k))
        step = f / fp
        k_new = k - step
        while k_new <= 0.0:
            step *= 0.5
            k_new = k - step
        k = k_new
    raise ArithmeticError(f"shape solve did not reach 1e-10 for gap={gap}")


def _kmeans_moments(x: np.ndarray, cfg: EMConfig) -> GammaMixture:
    """Deterministic 1-D k-means seed plus per-cluster moment matching."""
    M = cfg.M
    centers = np.quantile(x, (np.arange(M) + 0.5) / M)
    labels = np.zeros(x.size, dtype=int)
    for _ in range(100):
        new_labels = np.argmin(np.abs(x[:, None] - centers[None, :]), axis=1)
        if np.array_equal(new_labels, labels) and _ > 0:
            break
        labels = new_labels
        for m in range(M):
            sel = x[labels == m]
            if sel.size:
                centers[m] = sel.mean()
    weights = np.empty(M)
    shapes = np.empty(M)
    rates = np.empty(M)
    for m in range(M):
        sel = x[labels == m]
        if sel.size == 0:
            raise DegenerateData(
                f"initialization cluster {m} is empty; samples do not "
                f"support {M} components")
        mu = sel.mean()
        var = sel.var()
        var = max(var, 1e-12 * mu * mu)
        weights[m] = sel.size / x.size
        shapes[m] = max(mu * mu / var, cfg.shape_floor)
        rates[m] = max(mu / var, cfg.rate_floor)
    return GammaMixture(tuple(weights), tuple(shapes), tuple(rates))


def _log_density_matrix(x: np.ndarray, mix: GammaMixture) -> np.ndarray:
    """log(pi_m) + log Gamma density, shape (n, M)."""
    k = np.asarray(mix.shapes)
    b = np.asarray(mix.rates)
    w = np.asarray(mix.weights)
    return (np.log(w) + k * np.log(b) - gammaln(k)
            + (k - 1.0) * np.log(x)[:, None] - np.outer(x, b))


def em_fit(samples, cfg: EMConfig) -> EMResult:
    """Fit a constant-weight Gamma mixture by EM.

    E-step computes responsibilities in log space; M-step sets each
    weight to the mean responsibility, solves the weighted-likelihood
    shape equation by Newton and matches the rate to the weighted mean.
    The log-likelihood trace is recorded every iteration and is
    theoretically nondecreasing.

    Raises
    ------
    NonPositiveSample
        Any sample <= 0 or not finite.
    DegenerateData
        All samples equal, a component's responsibility mass vanishes,
        a component concentrates on a single value, or a fitted shape or
        rate falls below its floor.
    ValueError
        Fewer than 2M samples.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2 * cfg.M:
        raise ValueError(
            f"need at least {2 * cfg.M} samples for M={cfg.M}, "
            f"got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise NonPositiveSample("samples must be finite and > 0")
    if float(np.min(x)) == float(np.max(x)):
        raise DegenerateData("all samples are equal")

    if cfg.init == "user-supplied":
        mix = cfg.init_mixture
        if mix.n_components != cfg.M:
            raise ValueError(
                f"init_mixture has {mix.n_components} components, "
                f"config asks for {cfg.M}")
    else:
        mix = _kmeans_moments(x, cfg)

    logx = np.log(x)
    trace = []
    converged = False
    n_iter = 0
    for n_iter in range(1, cfg.max_iter + 1):
        logp = _log_density_matrix(x, mix)
        peak = np.max(logp, axis=1, keepdims=True)
        norm = peak[:, 0] + np.log(np.sum(np.exp(logp - peak), axis=1))
        ll = float(np.sum(norm))
        resp = np.exp(logp - norm[:, None])

        mass = resp.sum(axis=0)
        if np.any(mass < 1e-12 * x.size):
            raise DegenerateData(
                "a component's responsibility mass vanished")
        weights = mass / x.size
        xbar = resp.T @ x / mass
        logbar = resp.T @ logx / mass
        gaps = np.log(xbar) - logbar
        if np.any(gaps < 1e-13):
            raise DegenerateData(
                "a component concentrated on a single value")
        shapes = np.array([newton_gamma_shape(g) for g in gaps])
        rates = shapes / xbar
        if np.any(shapes < cfg.shape_floor) or np.any(rates < cfg.rate_floor):
            raise DegenerateData(
                "a fitted component fell below the shape or rate floor")
        mix = GammaMixture(tuple(weights), tuple(shapes), tuple(rates))

        trace.append(ll)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(ll - prev) <= cfg.tol * (1.0 + abs(ll)):
                converged = True
                break
    return EMResult(mixture=mix, log_likelihood=tuple(trace),
                    n_iter=n_iter, converged=converged)


_GOLD = 0.5 * (3.0 - math.sqrt(5.0))


def calibrate_theta(model: ModelParams, mix: GammaMixture,
                    cfg: ThetaCalibConfig) -> ThetaCalibResult:
    """Calibrate the pricing tilt to swap quotes by bracketed search.

    The objective is the sum of squared differences between simulated
    swap values and quotes. Every evaluation reuses the same seed, so
    the objective is deterministic in theta and the minimizer is well
    defined. The search combines golden-section steps with parabolic
    acceleration and stops when the bracket is narrower than tol_theta
    or an accepted best value changes by at most tol_objective.

    Raises
    ------
    BracketInvalid
        Upper edge not safely below the smallest mixture rate.
    ObjectiveNotFinite
        A simulated objective value is NaN or infinite.
    ValueError
        Empty quote list.
    """
    if not cfg.quotes:
        raise ValueError("quotes must be nonempty")
    lo, hi = cfg.bracket
    if hi >= mix.min_rate - cfg.eps_mom:
        raise BracketInvalid(
            f"bracket upper edge {hi} must stay below min rate "
            f"{mix.min_rate} - {cfg.eps_mom}")

    def objective(theta: float) -> float:
        total = 0.0
        for t1, t2, quoted in cfg.quotes:
            est = price_swap_mc(model, mix, theta, t1, t2, cfg.mc).estimate
            total += (est - quoted) ** 2
        if not math.isfinite(total):
            raise ObjectiveNotFinite(
                f"objective at theta={theta} is {total}")
        return total

    a, b = lo, hi
    x = w = v = a + _GOLD * (b - a)
    fx = fw = fv = objective(x)
    d = e = b - a
    iterations = 1
    for _ in range(200):
        if b - a <= cfg.tol_theta:
            break
        m = 0.5 * (a + b)
        use_golden = True
        if abs(e) > cfg.tol_theta * 0.5:
            # Parabola through (x, fx), (w, fw), (v, fv).
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            if q > 0.0 and abs(p) < abs(0.5 * q * e) \
                    and a * q < x * q + p < b * q:
                e = d
                d = p / q
                use_golden = False
        if use_golden:
            e = (b if x < m else a) - x
            d = _GOLD * e
        u = x + d
        fu = objective(u)
        iterations += 1
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, w, x = w, x, u
            fv, fw, improvement = fw, fx, abs(fx - fu)
            fx = fu
            if improvement <= cfg.tol_objective:
                break
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return ThetaCalibResult(theta_star=float(x), objective_value=float(fx),
                            iterations=iterations)


def load_samples(path) -> np.ndarray:
    """Read mark samples from a one-column CSV; a header row is allowed."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                out.append(float(row[0]))
            except ValueError:
                if out:
                    raise
    return np.asarray(out)


def load_quotes(path) -> tuple:
    """Read swap quotes (t1, t2, price) from CSV; a header row is allowed."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                out.append((float(row[0]), float(row[1]), float(row[2])))
            except ValueError:
                if out:
                    raise
    return tuple(out)
