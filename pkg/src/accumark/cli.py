"""Batch command-line drivers emitting byte-stable CSV tables.

Subcommands: price, sweep-beta, converge, greek-lambda0, mc-bench,
calibrate. Exit codes: 0 success, 2 config/usage error, 3 non-finite
numeric result, 4 precondition violation raised by the library.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from .bromwich import BromwichSpec, invert_price, price, price_profile
from .calib import (EMConfig, ThetaCalibConfig, calibrate_theta, em_fit,
                    load_quotes, load_samples)
from .config import ConfigError, RunConfig, load_config
from .errors import AccumarkError
from .marks import esscher_tilt
from .mc import _spawn_rngs, price_capped_call_mc, simulate_path
from .pide import SolverGrid

__all__ = ["main"]

_REF_NY = 8193
_REF_YMAX = 200.0


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "NA"
    return f"{v:.17g}"


def _write_csv(out_path: str, header, rows) -> None:
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(_fmt(v) for v in row) + "\n"
    if out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _parse_floats(raw: str, flag: str):
    raw = raw.strip()
    if not raw:
        raise _Usage(f"{flag}: empty list")
    out = []
    for part in raw.split(","):
        part = part.strip()
        try:
            if "/" in part:
                num, den = part.split("/")
                out.append(float(num) / float(den))
            else:
                out.append(float(part))
        except (ValueError, ZeroDivisionError):
            raise _Usage(f"{flag}: cannot parse {part!r}") from None
    return out


class _Usage(Exception):
    """Bad flag values; maps to exit code 2."""


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise _NumericFailure(f"{name} is not finite: {value}")


class _NumericFailure(Exception):
    """Non-finite numeric result; maps to exit code 3."""


def cmd_price(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    res = price(cfg.model, cfg.mix, cfg.theta, cfg.payoff, cfg.grid,
                cfg.spec, interp_mode=cfg.interp, boundary=cfg.boundary,
                Q=cfg.Q)
    _check_finite("price", res.price)
    _write_csv(args.out, ("price", "imag_residual", "boundary_hit"),
               [(res.price, res.imag_residual, res.boundary_hit)])
    return 0


def cmd_sweep_beta(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    betas = sorted(_parse_floats(args.beta, "--beta"))
    rows = []
    for b in betas:
        if b < 0.0:
            raise _Usage(f"--beta: negative value {b}")
        model = replace(cfg.model, beta=b)
        res = price(model, cfg.mix, cfg.theta, cfg.payoff, cfg.grid,
                    cfg.spec, interp_mode=cfg.interp,
                    boundary=cfg.boundary, Q=cfg.Q)
        _check_finite(f"price at beta={b}", res.price)
        mc = price_capped_call_mc(model, cfg.mix, cfg.theta, cfg.payoff,
                                  cfg.mc)
        rows.append((b, res.price, mc.estimate, mc.ci95[0], mc.ci95[1]))
    _write_csv(args.out, ("param", "price", "mc_mean", "mc_lo", "mc_hi"),
               rows)
    return 0


def _grid_with_nt(cfg: RunConfig, n_t: int) -> SolverGrid:
    return SolverGrid(lambda_min=cfg.grid.lambda_min,
                      lambda_max=cfg.grid.lambda_max,
                      N_lambda=cfg.grid.N_lambda,
                      dt=cfg.model.T / n_t, N_t=n_t)


def _price_at(cfg: RunConfig, grid: SolverGrid,
              spec: BromwichSpec) -> float:
    res = price(cfg.model, cfg.mix, cfg.theta, cfg.payoff, grid, spec,
                interp_mode=cfg.interp, boundary=cfg.boundary, Q=cfg.Q)
    _check_finite("price", res.price)
    return res.price


def _converge_dt(cfg: RunConfig, levels):
    nts = []
    for dt in levels:
        if dt <= 0.0:
            raise _Usage(f"--levels: dt must be positive, got {dt}")
        n_t = max(1, round(cfg.model.T / dt))
        if n_t not in nts:
            nts.append(n_t)
    ref_nt = 8 * max(nts)
    ref = _price_at(cfg, _grid_with_nt(cfg, ref_nt), cfg.spec)
    rows = []
    for n_t in nts:
        grid = _grid_with_nt(cfg, n_t)
        value = _price_at(cfg, grid, cfg.spec)
        rows.append((grid.dt, value, abs(value - ref)))
    rows.sort(key=lambda r: r[0])
    return rows


def _converge_ny(cfg: RunConfig, levels):
    for n in levels:
        if int(n) != n or int(n) < 3 or int(n) % 2 == 0:
            raise _Usage(f"--levels: N_y must be odd integers >= 3, "
                         f"got {n}")
    ns = sorted({int(n) for n in levels})
    ref_spec = BromwichSpec(cfg.spec.delta, _REF_YMAX, _REF_NY)
    ref_res = price(cfg.model, cfg.mix, cfg.theta, cfg.payoff, cfg.grid,
                    ref_spec, interp_mode=cfg.interp,
                    boundary=cfg.boundary, Q=cfg.Q, retain_modal=True)
    _check_finite("reference price", ref_res.price)
    rows = []
    for n in ns:
        spec = BromwichSpec(cfg.spec.delta, cfg.spec.Y_max, n)
        if cfg.spec.Y_max == _REF_YMAX and (_REF_NY - 1) % (n - 1) == 0:
            # Nested frequency grid: the per-frequency solves coincide
            # with a stride of the reference sweep, so reuse them.
            stride = (_REF_NY - 1) // (n - 1)
            sub = invert_price(ref_res.modal[::stride],
                               ref_res.transform[::stride], spec,
                               cfg.model.u0)
            value = sub.price
        else:
            value = _price_at(cfg, cfg.grid, spec)
        rows.append((n, value, abs(value - ref_res.price)))
    return rows


def _converge_nlambda(cfg: RunConfig, levels):
    for n in levels:
        if int(n) != n or int(n) < 2:
            raise _Usage(f"--levels: N_lambda must be integers >= 2, "
                         f"got {n}")
    ns = sorted({int(n) for n in levels})
    ratio = cfg.grid.N_t / cfg.grid.N_lambda

    def coupled(n_lam: int):
        n_t = max(1, round(ratio * n_lam))
        grid = SolverGrid(lambda_min=cfg.grid.lambda_min,
                          lambda_max=cfg.grid.lambda_max, N_lambda=n_lam,
                          dt=cfg.model.T / n_t, N_t=n_t)
        return _price_at(cfg, grid, cfg.spec)

    ref = coupled(2 * max(ns))
    rows = []
    for n in ns:
        value = coupled(n)
        rows.append((n, value, abs(value - ref)))
    return rows


def cmd_converge(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    levels = _parse_floats(args.levels, "--levels")
    if args.axis == "dt":
        rows = _converge_dt(cfg, levels)
    elif args.axis == "ny":
        rows = _converge_ny(cfg, levels)
    else:
        rows = _converge_nlambda(cfg, levels)
    errs = np.array([r[2] for r in rows], dtype=float)
    lv = np.array([r[0] for r in rows], dtype=float)
    if np.all(errs > 0.0) and len(rows) >= 2:
        slope = float(np.polyfit(np.log(lv), np.log(errs), 1)[0])
        print(f"fitted log-log slope vs {args.axis}: {slope:.6g}",
              file=sys.stderr)
    _write_csv(args.out, ("level", "value", "abs_err_vs_ref"), rows)
    return 0


def cmd_greek_lambda0(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if args.rel_step <= 0.0:
        raise _Usage("--rel-step must be strictly positive")
    lam0s = _parse_floats(args.lambda0, "--lambda0")
    h = cfg.grid.h
    stencil = []
    steps = []
    for lam0 in lam0s:
        if not cfg.grid.lambda_min <= lam0 <= cfg.grid.lambda_max:
            raise _Usage(f"--lambda0: {lam0} outside the intensity grid")
        # Snap the step to whole grid cells so the stencil never probes
        # sub-grid structure the solver cannot resolve.
        h_g = max(1, round(args.rel_step * lam0 / h)) * h
        steps.append(h_g)
        stencil.extend((lam0 - h_g, lam0, lam0 + h_g))
    uniq = sorted(set(stencil))
    prices = price_profile(cfg.model, cfg.mix, cfg.theta, cfg.payoff,
                           cfg.grid, cfg.spec, uniq,
                           interp_mode=cfg.interp, boundary=cfg.boundary,
                           Q=cfg.Q)
    lookup = dict(zip(uniq, prices))
    rows = []
    for lam0, h_g in zip(lam0s, steps):
        v = lookup[lam0]
        delta = (lookup[lam0 + h_g] - lookup[lam0 - h_g]) / (2.0 * h_g)
        _check_finite(f"greek at lambda0={lam0}", delta)
        rows.append((lam0, v, delta))
    _write_csv(args.out, ("lambda0", "price", "delta"), rows)
    return 0


def cmd_mc_bench(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    res = price_capped_call_mc(cfg.model, cfg.mix, cfg.theta, cfg.payoff,
                               cfg.mc)
    _check_finite("mc estimate", res.estimate)
    if res.n_paths == 1:
        row = (res.estimate, "NA", "NA", "NA")
    else:
        row = (res.estimate, res.stderr, res.ci95[0], res.ci95[1])
    _write_csv(args.out, ("estimate", "stderr", "ci_lo", "ci_hi"), [row])
    if args.dump_events:
        _dump_events(cfg, args.dump_events)
    return 0


def _dump_events(cfg: RunConfig, path: str) -> None:
    """Replay the priced paths with identical streams, logging events."""
    tilted = esscher_tilt(cfg.mix, cfg.theta)
    rows = []
    for i, rng in enumerate(_spawn_rngs(cfg.mc.seed, cfg.mc.n_paths)):
        p = simulate_path(cfg.model, tilted, cfg.model.T, rng,
                          epsilon_safety=cfg.mc.epsilon_safety,
                          record_events=True)
        for (t, x, lam_after) in p.events:
            rows.append((i, t, x, lam_after))
    _write_csv(path, ("path_id", "event_time", "mark", "lambda_after"),
               rows)


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if args.target == "marks":
        try:
            samples = load_samples(args.input)
        except OSError as exc:
            raise ConfigError(f"cannot read samples: {exc}") from exc
        m = args.components if args.components else cfg.mix.n_components
        res = em_fit(samples, EMConfig(M=m, max_iter=args.max_iter,
                                       tol=args.tol))
        rows = [(i, w, k, b) for i, (w, k, b) in enumerate(
            zip(res.mixture.weights, res.mixture.shapes,
                res.mixture.rates))]
        _write_csv(args.out, ("component", "weight", "shape", "rate"),
                   rows)
        return 0
    try:
        quotes = load_quotes(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read quotes: {exc}") from exc
    lo, hi = _parse_floats(args.bracket, "--bracket")
    tcfg = ThetaCalibConfig(bracket=(lo, hi), tol_theta=args.tol_theta,
                            tol_objective=args.tol_objective,
                            quotes=quotes, mc=cfg.mc,
                            eps_mom=args.eps_mom)
    res = calibrate_theta(cfg.model, cfg.mix, tcfg)
    _check_finite("objective", res.objective_value)
    _write_csv(args.out, ("theta", "objective", "iters"),
               [(res.theta_star, res.objective_value, res.iterations)])
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="accumark",
        description="Pricing and calibration for options on accumulated "
                    "marks of a self-exciting jump process.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True,
                       help="flat key = value config file")
        p.add_argument("--out", default="-",
                       help="output CSV path (default stdout)")
        p.add_argument("--seed", type=int, default=None,
                       help="override mc.seed from the config")

    p = sub.add_parser("price", help="single PIDE price with diagnostics")
    common(p)
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("sweep-beta",
                       help="PIDE and MC prices over excitation strengths")
    common(p)
    p.add_argument("--beta", required=True,
                   help="comma-separated excitation strengths")
    p.set_defaults(func=cmd_sweep_beta)

    p = sub.add_parser("converge", help="refinement study along one axis")
    common(p)
    p.add_argument("--axis", required=True,
                   choices=("dt", "nlambda", "ny"))
    p.add_argument("--levels", required=True,
                   help="comma-separated levels; fractions like 1/365 "
                        "are accepted for dt")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("greek-lambda0",
                       help="centred-difference intensity sensitivity")
    common(p)
    p.add_argument("--lambda0", required=True,
                   help="comma-separated initial intensities")
    p.add_argument("--rel-step", type=float, default=0.05,
                   help="relative step for the centred difference")
    p.set_defaults(func=cmd_greek_lambda0)

    p = sub.add_parser("mc-bench", help="Monte Carlo benchmark price")
    common(p)
    p.add_argument("--dump-events", default=None, metavar="PATH",
                   help="also write a per-path event log CSV")
    p.set_defaults(func=cmd_mc_bench)

    p = sub.add_parser("calibrate", help="fit mark law or pricing tilt")
    common(p)
    p.add_argument("--target", required=True, choices=("marks", "theta"))
    p.add_argument("--input", required=True,
                   help="samples CSV (marks) or quotes CSV (theta)")
    p.add_argument("--components", type=int, default=None,
                   help="mixture size for marks (default: config size)")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--bracket", default="-0.2,0.8",
                   help="theta search bracket lo,hi")
    p.add_argument("--tol-theta", type=float, default=1e-4)
    p.add_argument("--tol-objective", type=float, default=1e-10)
    p.add_argument("--eps-mom", type=float, default=1e-6)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except AccumarkError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return 4
    except ArithmeticError as exc:
        # e.g. math.exp overflow in the damping factor: a numeric
        # failure, not a usage error
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
