"""Flat-file run configuration: parsing, validation, typed assembly.

The format is one dotted-key = value pair per line with # comments,
chosen so any language can parse it. Every key is required; unknown keys
are rejected so typos fail loudly at load time instead of silently
running defaults.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bromwich import BromwichSpec, CappedCallPayoff
from .errors import AccumarkError
from .marks import GammaMixture, ModelParams
from .mc import MCConfig
from .pide import SolverGrid

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(Exception):
    """Config file missing, malformed, or failing load-time validation."""


_SCALAR_KEYS = (
    "model.kappa", "model.lambda_bar", "model.beta", "model.r", "model.T",
    "model.lambda0", "model.u0",
    "marks.theta",
    "payoff.K", "payoff.C",
    "grid.lambda_max", "grid.dt",
    "bromwich.delta", "bromwich.Y_max",
    "mc.epsilon",
)
_INT_KEYS = ("grid.N_lambda", "grid.Q", "bromwich.N_y", "mc.n_paths",
             "mc.seed")
_LIST_KEYS = ("marks.weights", "marks.shapes", "marks.rates")
_ENUM_KEYS = {"grid.interp": ("linear", "pchip"),
              "grid.boundary": ("clamp", "extrapolate")}
_ALL_KEYS = frozenset(_SCALAR_KEYS) | frozenset(_INT_KEYS) \
    | frozenset(_LIST_KEYS) | frozenset(_ENUM_KEYS)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration assembled into library types."""

    model: ModelParams
    mix: GammaMixture
    theta: float
    payoff: CappedCallPayoff
    grid: SolverGrid
    Q: int
    interp: str
    boundary: str
    spec: BromwichSpec
    mc: MCConfig


def _to_float(raw: str, key: str) -> float:
    """Parse a float; a/b fractions are allowed so day counts stay exact."""
    raw = raw.strip()
    try:
        if "/" in raw:
            num, den = raw.split("/")
            return float(num) / float(den)
        return float(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: cannot parse number from {raw!r}") \
            from exc


def _parse_pairs(path) -> dict:
    pairs = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key in pairs:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key}")
        pairs[key] = value
    return pairs


def load_config(path, seed_override: int | None = None) -> RunConfig:
    """Load and validate a run configuration.

    All library-type invariants are enforced here so a bad file fails at
    load time, including the damping bound
    bromwich.delta < min(marks.rates) - marks.theta.

    Raises
    ------
    ConfigError
        On any missing/unknown key, parse failure, or invariant breach.
    """
    pairs = _parse_pairs(path)
    missing = sorted(_ALL_KEYS - pairs.keys())
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    unknown = sorted(pairs.keys() - _ALL_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")

    scal = {k: _to_float(pairs[k], k) for k in _SCALAR_KEYS}
    ints = {}
    for k in _INT_KEYS:
        try:
            ints[k] = int(pairs[k])
        except ValueError as exc:
            raise ConfigError(f"{k}: cannot parse integer from "
                              f"{pairs[k]!r}") from exc
    lists = {k: tuple(_to_float(p, k) for p in pairs[k].split(","))
             for k in _LIST_KEYS}
    enums = {}
    for k, allowed in _ENUM_KEYS.items():
        if pairs[k] not in allowed:
            raise ConfigError(f"{k}: must be one of {allowed}, "
                              f"got {pairs[k]!r}")
        enums[k] = pairs[k]

    seed = int(seed_override) if seed_override is not None \
        else ints["mc.seed"]
    try:
        model = ModelParams(
            kappa=scal["model.kappa"], lambda_bar=scal["model.lambda_bar"],
            beta=scal["model.beta"], r=scal["model.r"], T=scal["model.T"],
            lambda0=scal["model.lambda0"], u0=scal["model.u0"])
        mix = GammaMixture(lists["marks.weights"], lists["marks.shapes"],
                           lists["marks.rates"])
        theta = scal["marks.theta"]
        if theta >= mix.min_rate:
            raise ConfigError(
                f"marks.theta = {theta} must be below the smallest mark "
                f"rate {mix.min_rate}")
        payoff = CappedCallPayoff(K=scal["payoff.K"], C=scal["payoff.C"])
        dt = scal["grid.dt"]
        if dt <= 0.0:
            raise ConfigError("grid.dt must be strictly positive")
        n_t = round(model.T / dt)
        if n_t < 1:
            raise ConfigError("grid.dt larger than the horizon model.T")
        grid = SolverGrid(lambda_min=0.0, lambda_max=scal["grid.lambda_max"],
                          N_lambda=ints["grid.N_lambda"], dt=dt, N_t=n_t)
        grid.check_horizon(model.T)
        spec = BromwichSpec(delta=scal["bromwich.delta"],
                            Y_max=scal["bromwich.Y_max"],
                            N_y=ints["bromwich.N_y"])
        if spec.delta >= mix.min_rate - theta:
            raise ConfigError(
                f"bromwich.delta = {spec.delta} must be below "
                f"min(marks.rates) - marks.theta = {mix.min_rate - theta}")
        if ints["grid.Q"] < 1:
            raise ConfigError("grid.Q must be at least 1")
        mc = MCConfig(n_paths=ints["mc.n_paths"], seed=seed,
                      epsilon_safety=scal["mc.epsilon"])
    except ConfigError:
        raise
    except (ValueError, ArithmeticError, AccumarkError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc

    return RunConfig(model=model, mix=mix, theta=theta, payoff=payoff,
                     grid=grid, Q=ints["grid.Q"], interp=enums["grid.interp"],
                     boundary=("linear-extrapolate"
                               if enums["grid.boundary"] == "extrapolate"
                               else "clamp"),
                     spec=spec, mc=mc)
