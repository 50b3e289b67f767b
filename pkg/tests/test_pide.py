"""Implicit operator, Thomas solve, IMEX stepping, modal solver."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from accumark.errors import SingularMatrix, TiltOutOfDomain
from accumark.marks import ModelParams, complex_mgf, esscher_tilt
from accumark.pide import (ModalSurface, SolverGrid, TriDiag,
                           build_implicit_matrix, dominance_margins,
                           imex_step, lipschitz_constant, solve_modal,
                           thomas_solve)
from accumark.quadrature import rules_for_mixture

T_BASE = 150.0 / 365.0
DT = 1.0 / 365.0


@pytest.fixture
def tilted(base_mix):
    return esscher_tilt(base_mix, 0.0)


@pytest.fixture
def rules(tilted):
    return rules_for_mixture(tilted, 24)


@pytest.fixture
def small_grid():
    return SolverGrid(lambda_min=0.0, lambda_max=4.0, N_lambda=40,
                      dt=DT, N_t=150)


def dense(A: TriDiag) -> np.ndarray:
    return (np.diag(A.diag) + np.diag(A.sub, -1) + np.diag(A.sup, 1))


class TestImplicitMatrix:
    def test_no_drift_is_scaled_identity(self):
        # The model type requires strictly positive reversion, but the
        # operator admits the drift-free limit; a structural stand-in
        # exercises it without loosening the model validation.
        model = SimpleNamespace(kappa=0.0, lambda_bar=2.0, beta=1.0,
                                r=0.02, T=T_BASE, lambda0=2.5, u0=0.0)
        grid = SolverGrid(0.0, 450.0, 600, DT, 150)
        A = build_implicit_matrix(grid, model)
        assert np.all(A.diag == 1.0 + DT * 0.02)
        assert np.all(A.sub == 0.0)
        assert np.all(A.sup == 0.0)

    def test_upwind_sign_bookkeeping(self, base_model):
        # Below the reversion level the drift points up, so a row couples
        # only to its right neighbor; above, only to its left.
        grid = SolverGrid(0.0, 450.0, 600, DT, 150)
        lam = grid.lambda_values
        A = build_implicit_matrix(grid, base_model)
        i_low = int(np.argmin(np.abs(lam - 1.0)))
        assert lam[i_low] < base_model.lambda_bar
        assert A.sup[i_low] < 0.0
        assert A.sub[i_low - 1] == 0.0
        i_high = int(np.argmin(np.abs(lam - 300.0)))
        assert A.sub[i_high - 1] < 0.0
        assert A.sup[i_high] == 0.0

    def test_z_matrix_pattern(self, base_model):
        grid = SolverGrid(0.0, 450.0, 600, DT, 150)
        A = build_implicit_matrix(grid, base_model)
        assert np.all(A.sub <= 0.0)
        assert np.all(A.sup <= 0.0)
        assert np.all(A.diag > 0.0)

    def test_margins_equal_one_plus_dt_r(self, base_model):
        # Algebraically every row margin is 1 + dt*r; folding the row
        # terms into the diagonal leaves a few ulp of roundoff.
        grid = SolverGrid(0.0, 450.0, 600, DT, 150)
        m = dominance_margins(build_implicit_matrix(grid, base_model))
        assert np.max(np.abs(m - (1.0 + DT * 0.02))) < 5e-14

    def test_margins_on_random_builds(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            model = ModelParams(kappa=float(rng.uniform(0.0, 12.0)),
                                lambda_bar=float(rng.uniform(0.1, 5.0)),
                                beta=1.0, r=float(rng.uniform(0.0, 0.1)),
                                T=0.5, lambda0=1.0, u0=0.0)
            grid = SolverGrid(0.0, float(rng.uniform(5.0, 500.0)),
                              int(rng.integers(2, 200)),
                              float(rng.uniform(1e-4, 0.1)), 10)
            m = dominance_margins(build_implicit_matrix(grid, model))
            assert np.max(np.abs(m - (1.0 + grid.dt * model.r))) < 2e-13

    @pytest.mark.parametrize("n", [10, 30, 50])
    def test_inverse_sup_norm_bound(self, base_model, n):
        # Diagonal dominance with margin 1 + dt*r caps the inverse's
        # sup norm at its reciprocal; checked against a dense inverse.
        grid = SolverGrid(0.0, 450.0, n, DT, 150)
        A = build_implicit_matrix(grid, base_model)
        inv = np.linalg.inv(dense(A))
        norm = np.max(np.sum(np.abs(inv), axis=1))
        assert norm <= 1.0 / (1.0 + DT * base_model.r) + 1e-12


class TestThomasSolve:
    def test_identity_returns_rhs(self):
        n = 7
        A = TriDiag(sub=np.zeros(n - 1), diag=np.ones(n),
                    sup=np.zeros(n - 1))
        rhs = np.arange(1.0, n + 1.0)
        assert np.array_equal(thomas_solve(A, rhs), rhs)

    def test_small_dense_oracle_complex(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            n = 5
            sub = rng.uniform(-0.3, 0.0, n - 1)
            sup = rng.uniform(-0.3, 0.0, n - 1)
            diag = 1.0 + rng.uniform(0.0, 1.0, n)
            A = TriDiag(sub=sub, diag=diag, sup=sup)
            rhs = rng.normal(size=n) + 1j * rng.normal(size=n)
            x = thomas_solve(A, rhs)
            ref = np.linalg.solve(dense(A), rhs)
            assert np.max(np.abs(x - ref)) < 1e-12

    def test_row_sum_inverse_recovers_ones(self, base_model):
        grid = SolverGrid(0.0, 450.0, 200, DT, 150)
        A = build_implicit_matrix(grid, base_model)
        ones = np.ones(A.diag.size)
        x = thomas_solve(A, dense(A) @ ones)
        assert np.max(np.abs(x - ones)) < 1e-12

    def test_zero_pivot_raises(self):
        A = TriDiag(sub=np.array([]), diag=np.array([0.0]),
                    sup=np.array([]))
        with pytest.raises(SingularMatrix):
            thomas_solve(A, np.array([1.0]))


class TestImexStep:
    def test_constant_surface_divides_by_discount(self, base_model, tilted,
                                                  rules, small_grid):
        # At frequency zero the jump gain of a constant is the constant
        # itself, so one step is a pure implicit discount divide.
        A = build_implicit_matrix(small_grid, base_model)
        c = 0.73
        surf = ModalSurface(eta=0.0, values=np.full(41, c, dtype=complex),
                            time_index=1)
        out = imex_step(surf, A, base_model, tilted, rules, small_grid)
        target = c / (1.0 + DT * base_model.r)
        assert np.max(np.abs(out.values - target)) < 1e-14
        assert out.time_index == 0

    def test_zero_intensity_row_passes_through(self, tilted, rules):
        # At the bottom node the intensity is zero: no jump drive, and
        # with no drift or discount the value is untouched.
        model = SimpleNamespace(kappa=0.0, lambda_bar=2.0, beta=1.0,
                                r=0.0, T=DT, lambda0=1.0, u0=0.0)
        grid = SolverGrid(0.0, 4.0, 40, DT, 1)
        A = build_implicit_matrix(grid, model)
        rng = np.random.default_rng(4)
        F = rng.normal(size=41) + 1j * rng.normal(size=41)
        surf = ModalSurface(eta=0.3 + 1.0j, values=F, time_index=1)
        out = imex_step(surf, A, model, tilted, rules, grid)
        assert out.values[0] == F[0]

    def test_step_is_linear(self, base_model, tilted, rules, small_grid):
        A = build_implicit_matrix(small_grid, base_model)
        rng = np.random.default_rng(6)
        F = rng.normal(size=41) + 1j * rng.normal(size=41)
        G = rng.normal(size=41) + 1j * rng.normal(size=41)
        eta = 0.3 + 2.0j

        def step(vals):
            return imex_step(ModalSurface(eta=eta, values=vals,
                                          time_index=1),
                             A, base_model, tilted, rules,
                             small_grid).values

        lhs = step(1.5 * F + 2.0j * G)
        rhs = 1.5 * step(F) + 2.0j * step(G)
        assert np.max(np.abs(lhs - rhs)) < 1e-13

    def test_cannot_step_past_zero(self, base_model, tilted, rules,
                                   small_grid):
        A = build_implicit_matrix(small_grid, base_model)
        surf = ModalSurface(eta=0.0, values=np.ones(41, dtype=complex),
                            time_index=0)
        with pytest.raises(ValueError):
            imex_step(surf, A, base_model, tilted, rules, small_grid)

    def test_one_step_contraction_bound(self, base_model, tilted, rules,
                                        small_grid):
        # Explicit stage grows by at most 1 + dt*L, implicit stage
        # contracts by 1 + dt*r; 100 random complex pairs.
        delta = 0.3
        L = lipschitz_constant(small_grid, delta, tilted, rules)
        assert small_grid.dt * L < 1.0
        bound = (1.0 + small_grid.dt * L) / (1.0 + small_grid.dt
                                             * base_model.r)
        A = build_implicit_matrix(small_grid, base_model)
        rng = np.random.default_rng(20260817)
        eta = delta + 2.0j
        for _ in range(100):
            F = rng.normal(size=41) + 1j * rng.normal(size=41)
            G = rng.normal(size=41) + 1j * rng.normal(size=41)
            sf = imex_step(ModalSurface(eta=eta, values=F, time_index=1),
                           A, base_model, tilted, rules, small_grid)
            sg = imex_step(ModalSurface(eta=eta, values=G, time_index=1),
                           A, base_model, tilted, rules, small_grid)
            gap_out = np.max(np.abs(sf.values - sg.values))
            gap_in = np.max(np.abs(F - G))
            assert gap_out <= bound * gap_in * (1.0 + 1e-12)


class TestSolveModal:
    def test_discount_identity_small_rate(self, tilted, rules):
        # Zero-frequency mode is the zero-coupon bond. The implicit
        # discount carries an O(N_t (dt r)^2) bias, so the 1e-10 identity
        # is checked where that bias is negligible.
        model = ModelParams(kappa=8.0, lambda_bar=2.0, beta=1.0, r=1e-4,
                            T=T_BASE, lambda0=2.5, u0=0.0)
        grid = SolverGrid(0.0, 450.0, 120, DT, 150)
        surf = solve_modal(0.0, model, tilted, rules, grid, warn_cfl=False)
        target = math.exp(-1e-4 * T_BASE)
        assert np.max(np.abs(surf.values - target)) < 1e-10

    def test_discount_identity_zero_rate(self, tilted, rules):
        model = ModelParams(kappa=8.0, lambda_bar=2.0, beta=1.0, r=0.0,
                            T=T_BASE, lambda0=2.5, u0=0.0)
        grid = SolverGrid(0.0, 450.0, 120, DT, 150)
        surf = solve_modal(0.0, model, tilted, rules, grid, warn_cfl=False)
        assert np.max(np.abs(surf.values - 1.0)) < 1e-13

    def test_discount_bias_at_production_rate(self, base_model, tilted,
                                              rules):
        # At r = 0.02 the implicit-divide bias is ~2.23e-7, first order
        # in dt and quadratic in r; pinned here so a regression in the
        # discount treatment is caught either way.
        grid = SolverGrid(0.0, 450.0, 120, DT, 150)
        surf = solve_modal(0.0, base_model, tilted, rules, grid,
                           warn_cfl=False)
        drift = np.max(np.abs(surf.values - math.exp(-0.02 * T_BASE)))
        assert 1.8e-7 < drift < 2.7e-7

    def test_real_mode_positive_and_bounded(self, base_model, tilted,
                                            rules, small_grid):
        L = lipschitz_constant(small_grid, 0.3, tilted, rules)
        surf = solve_modal(0.3, base_model, tilted, rules, small_grid,
                           warn_cfl=False)
        assert np.max(np.abs(surf.values.imag)) < 1e-14
        assert np.all(surf.values.real > 0.0)
        assert np.max(np.abs(surf.values)) <= math.exp(L * T_BASE)

    def test_oscillatory_mode_within_growth_envelope(self, base_model,
                                                     tilted, rules,
                                                     small_grid):
        L = lipschitz_constant(small_grid, 0.3, tilted, rules)
        bound = ((1.0 + small_grid.dt * L)
                 / (1.0 + small_grid.dt * base_model.r)) ** small_grid.N_t
        for y in (2.0, 10.0, 40.0):
            surf = solve_modal(0.3 + 1j * y, base_model, tilted, rules,
                               small_grid, warn_cfl=False)
            assert np.max(np.abs(surf.values)) <= bound

    def test_cfl_warning_on_production_domain(self, base_model, tilted,
                                              rules):
        grid = SolverGrid(0.0, 450.0, 120, DT, 150)
        with pytest.warns(RuntimeWarning, match="dt\\*L"):
            solve_modal(0.3 + 2.0j, base_model, tilted, rules, grid)

    def test_no_warning_on_small_domain(self, base_model, tilted, rules,
                                        small_grid, recwarn):
        solve_modal(0.3 + 2.0j, base_model, tilted, rules, small_grid)
        assert not [w for w in recwarn.list
                    if issubclass(w.category, RuntimeWarning)]

    def test_horizon_mismatch_raises(self, base_model, tilted, rules):
        grid = SolverGrid(0.0, 4.0, 40, DT, 149)
        with pytest.raises(ValueError):
            solve_modal(0.0, base_model, tilted, rules, grid)

    def test_matches_reference_step(self, base_model, tilted, rules):
        # One kernel-swept step against the reference implementation
        # built from the public interpolant and per-node gains.
        model = ModelParams(kappa=8.0, lambda_bar=2.0, beta=1.0, r=0.02,
                            T=DT, lambda0=2.5, u0=0.0)
        grid = SolverGrid(0.0, 60.0, 80, DT, 1)
        A = build_implicit_matrix(grid, model)
        eta = 0.3 + 2.0j
        for mode in ("linear", "pchip"):
            for bnd in ("clamp", "linear-extrapolate"):
                ref = imex_step(
                    ModalSurface(eta=eta,
                                 values=np.ones(81, dtype=complex),
                                 time_index=1),
                    A, model, tilted, rules, grid, interp_mode=mode,
                    boundary=bnd)
                got = solve_modal(eta, model, tilted, rules, grid,
                                  interp_mode=mode, boundary=bnd,
                                  warn_cfl=False)
                assert np.max(np.abs(ref.values - got.values)) < 1e-13


class TestLipschitzConstant:
    def test_tiny_domain_tiny_constant(self, tilted, rules):
        grid = SolverGrid(0.0, 1e-12, 2, DT, 1)
        assert lipschitz_constant(grid, 0.3, tilted, rules) <= 1e-11

    def test_zero_damping_doubles_lambda_max(self, tilted, rules,
                                             small_grid):
        L = lipschitz_constant(small_grid, 0.0, tilted, rules)
        assert L == pytest.approx(2.0 * small_grid.lambda_max, rel=1e-9)

    def test_matches_mgf_moment(self, tilted, rules):
        grid = SolverGrid(0.0, 450.0, 120, DT, 150)
        L = lipschitz_constant(grid, 0.3, tilted, rules)
        target = 450.0 * (complex_mgf(tilted, 0.3).real + 1.0)
        assert L == pytest.approx(target, rel=1e-9)
        assert grid.dt * L > 1.0  # production grids run past the bound

    def test_domain_guard(self, tilted, rules, small_grid):
        with pytest.raises(TiltOutOfDomain):
            lipschitz_constant(small_grid, 2.5, tilted, rules)


class TestSolverGrid:
    def test_field_validation(self):
        with pytest.raises(ValueError):
            SolverGrid(1.0, 1.0, 10, DT, 5)
        with pytest.raises(ValueError):
            SolverGrid(0.0, 4.0, 1, DT, 5)
        with pytest.raises(ValueError):
            SolverGrid(0.0, 4.0, 10, 0.0, 5)
        with pytest.raises(ValueError):
            SolverGrid(0.0, 4.0, 10, DT, 0)

    def test_node_layout(self):
        grid = SolverGrid(0.0, 4.0, 8, DT, 5)
        lam = grid.lambda_values
        assert lam.size == 9
        assert lam[0] == 0.0 and lam[-1] == 4.0
        assert grid.h == pytest.approx(0.5)
        with pytest.raises(ValueError):
            lam[0] = 3.0
