import numpy as np
import pytest

from adrom.kernels import _ref
from adrom.model import (Grid1D, RdeModel, RdeParams, TimeGrid,
                         initial_condition, initial_eta)


@pytest.fixture
def small_model():
    grid = Grid1D(16)
    return grid, RdeModel(grid, RdeParams())


class TestParams:
    def test_defaults(self):
        p = RdeParams()
        assert p.nu == 0.01 and p.k_pre == 1.0 and p.alpha == 0.3
        assert p.eta_c == 1.1 and p.eta_p == 0.5 and p.r == 1.0
        assert p.epsilon == 0.11 and p.mu == 3.5

    @pytest.mark.parametrize("kwargs", [
        {"nu": 0.0}, {"nu": -1e-3}, {"alpha": 0.0}, {"mu": float("nan")},
        {"eta_c": float("inf")},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            RdeParams(**kwargs)

    def test_grid_invariants(self):
        grid = Grid1D(1024)
        assert grid.dx * grid.num_points == pytest.approx(2 * np.pi, abs=1e-14)
        assert grid.coordinates[0] == 0.0
        with pytest.raises(ValueError):
            Grid1D(3)

    def test_time_grid(self):
        tg = TimeGrid(1e-3, 50000)
        assert tg.times[-1] == pytest.approx(50.0)
        with pytest.raises(ValueError):
            TimeGrid(0.0, 10)
        with pytest.raises(ValueError):
            TimeGrid(1e-3, -1)


class TestInitialCondition:
    def test_lambda_zero(self):
        grid = Grid1D(64)
        q0 = initial_condition(grid)
        assert np.all(q0[64:] == 0.0)

    def test_pulse_peak(self):
        # sech(0) = 1 so eta(1) = 3/2; x=1 is not a grid node, evaluate the
        # profile function directly.
        assert initial_eta(1.0) == pytest.approx(1.5, abs=1e-15)

    def test_off_peak_value_and_symmetry(self):
        # independent evaluation: (3/2) * sech(3)^20
        want = 1.5 * (2.0 / (np.exp(3.0) + np.exp(-3.0))) ** 20
        assert initial_eta(4.0) == pytest.approx(want, rel=1e-13)
        d = np.linspace(0.0, 2.5, 41)
        np.testing.assert_allclose(initial_eta(1.0 + d), initial_eta(1.0 - d),
                                   rtol=1e-13)

    def test_grid_values_match_profile(self):
        grid = Grid1D(128)
        q0 = initial_condition(grid)
        np.testing.assert_allclose(q0[:128], initial_eta(grid.coordinates),
                                   rtol=0, atol=0)


class TestRhs:
    def test_constant_state_unburnt(self, small_model):
        # eta = lam = 0: advection and diffusion vanish, xi(0) = 0, so both
        # equations reduce to omega(0) = exp(-11/3).
        grid, model = small_model
        q = np.zeros(grid.num_dofs)
        out = model.rhs(q)
        omega0 = np.exp((0.0 - 1.1) / 0.3)
        assert omega0 == pytest.approx(2.557e-2, rel=1e-3)
        np.testing.assert_allclose(out, omega0, rtol=1e-14)

    def test_constant_state_fully_burnt(self, small_model):
        # lam = 1 kills the gain term; dlam/dt = -beta(c; mu).
        grid, model = small_model
        c = 0.7
        q = np.concatenate([np.full(16, c), np.ones(16)])
        out = model.rhs(q)
        beta = 3.5 / (1.0 + np.exp(0.7 - 0.5))
        np.testing.assert_allclose(out[16:], -beta, rtol=1e-14)

    def test_against_dense_stencil_oracle(self):
        # hand-written pointwise oracle on an M=8 grid with one nonzero eta
        grid = Grid1D(8)
        p = RdeParams()
        model = RdeModel(grid, p)
        M, dx = 8, grid.dx
        q = np.zeros(16)
        q[3] = 1.2
        q[8:] = 0.25

        def oracle():
            out = np.zeros(16)
            for j in range(M):
                eta, lam = q[j], q[8 + j]
                em, ep = q[(j - 1) % M], q[(j + 1) % M]
                lm, lp = q[8 + (j - 1) % M], q[8 + (j + 1) % M]
                omega = p.k_pre * np.exp((eta - p.eta_c) / p.alpha)
                beta = p.mu / (1.0 + np.exp(p.r * (eta - p.eta_p)))
                dxe = (eta - em) / dx if eta >= 0 else (ep - eta) / dx
                out[j] = (-eta * dxe + p.nu * (em - 2 * eta + ep) / dx ** 2
                          + (1 - lam) * omega - p.epsilon * eta)
                out[8 + j] = (p.nu * (lm - 2 * lam + lp) / dx ** 2
                              + (1 - lam) * omega - beta * lam)
            return out

        np.testing.assert_allclose(model.rhs(q), oracle(), rtol=1e-13)

    def test_negative_eta_uses_downwind(self):
        # sign-dependent upwinding: for eta_j < 0 the stencil looks right
        grid = Grid1D(8)
        model = RdeModel(grid, RdeParams())
        q = np.zeros(16)
        q[2] = -0.5
        q[3] = 0.9
        out = model.rhs(q)
        dx = grid.dx
        adv = -q[2] * (q[3] - q[2]) / dx
        diff = 0.01 * (q[1] - 2 * q[2] + q[3]) / dx ** 2
        omega = np.exp((q[2] - 1.1) / 0.3)
        assert out[2] == pytest.approx(adv + diff + omega - 0.11 * q[2],
                                       rel=1e-12)

    def test_nonfinite_input_rejected(self, small_model):
        _, model = small_model
        q = np.zeros(32)
        q[5] = np.nan
        with pytest.raises(ValueError, match="finite"):
            model.rhs(q)

    def test_periodic_shift_equivariance(self, rng, small_model):
        grid, model = small_model
        M = grid.num_points
        q = rng.uniform(-0.5, 1.5, grid.num_dofs)
        shifted = np.concatenate([np.roll(q[:M], 1), np.roll(q[M:], 1)])
        out = model.rhs(q)
        out_shifted = np.concatenate([np.roll(out[:M], 1), np.roll(out[M:], 1)])
        np.testing.assert_array_equal(model.rhs(shifted), out_shifted)

    def test_rhs_rows_matches_full(self, rng, small_model):
        grid, model = small_model
        q = rng.uniform(-0.5, 1.5, grid.num_dofs)
        rows = rng.permutation(grid.num_dofs)[:11].astype(np.int64)
        np.testing.assert_array_equal(model.rhs_rows(q, rows),
                                      model.rhs(q)[rows])

    def test_component_eval_counter(self, small_model):
        grid, model = small_model
        q = np.zeros(grid.num_dofs)
        before = model.component_evals
        model.rhs(q)
        model.rhs_rows(q, np.array([0, 5, 20], dtype=np.int64))
        assert model.component_evals - before == grid.num_dofs + 3


class TestJacobian:
    def test_finite_difference_columns(self, rng, small_model):
        grid, model = small_model
        N = grid.num_dofs
        h = 1e-6
        q = rng.uniform(0.05, 1.0, N)
        jac = model.jacobian(q).toarray()
        for i in range(N):
            e = np.zeros(N)
            e[i] = h
            fd = (model.rhs(q + e) - model.rhs(q - e)) / (2 * h)
            assert np.linalg.norm(fd - jac[:, i]) <= 1e-5

    def test_directional_derivatives(self, rng, small_model):
        grid, model = small_model
        N = grid.num_dofs
        h = 1e-6
        for _ in range(20):
            q = rng.uniform(0.05, 1.2, N)
            v = rng.standard_normal(N)
            v /= np.linalg.norm(v)
            jac = model.jacobian(q)
            fd = (model.rhs(q + h * v) - model.rhs(q - h * v)) / (2 * h)
            jv = jac @ v
            assert np.linalg.norm(fd - jv) / np.linalg.norm(jv) <= 1e-5

    def test_constant_state_reaction_diagonals(self):
        # analytic derivatives of the reaction terms at a spatially constant
        # state (advection/diffusion contributions are position independent)
        grid = Grid1D(16)
        p = RdeParams()
        model = RdeModel(grid, p)
        eta_v, lam_v = 0.8, 0.3
        q = np.concatenate([np.full(16, eta_v), np.full(16, lam_v)])
        jac = model.jacobian(q).toarray()
        omega = np.exp((eta_v - p.eta_c) / p.alpha)
        beta = p.mu / (1.0 + np.exp(p.r * (eta_v - p.eta_p)))
        beta_d = -p.r * beta * (1.0 - beta / p.mu)
        c = p.nu / grid.dx ** 2
        # d(eta eq)/d lam_j and d(lam eq)/d eta_j are pure reaction terms
        assert jac[0, 16] == pytest.approx(-omega, rel=1e-12)
        assert jac[16, 0] == pytest.approx(
            (1 - lam_v) * omega / p.alpha - beta_d * lam_v, rel=1e-12)
        # diagonal of the lam block: diffusion + reaction
        assert jac[16, 16] == pytest.approx(-2 * c - omega - beta, rel=1e-12)

    def test_zero_viscosity_kills_diffusion_entries(self):
        # kernel-level check (the params type enforces nu > 0)
        grid = Grid1D(8)
        p = RdeParams()
        q = np.linspace(0.1, 1.0, 16)
        ee_m, ee_d, ee_p, el_d, le_d, ll_d = _ref.jac_coeffs(
            q, 8, grid.dx, 0.0, p.k_pre, p.alpha, p.eta_c, p.eta_p, p.r,
            p.epsilon, p.mu)
        # with nu = 0 and eta >= 0 the neighbor coupling is advection only
        np.testing.assert_allclose(ee_m, q[:8] / grid.dx, rtol=1e-14)
        np.testing.assert_allclose(ee_p, 0.0, atol=0)

    def test_solve_shifted_matches_dense(self, rng):
        for M in (8, 16, 64):
            grid = Grid1D(M)
            model = RdeModel(grid, RdeParams())
            N = grid.num_dofs
            q = rng.uniform(0.05, 1.5, N)
            b = rng.standard_normal(N)
            for dt in (1e-3, 0.05):
                x = model.solve_shifted(q, dt, b)
                dense = np.eye(N) - dt * model.jacobian(q).toarray()
                np.testing.assert_allclose(x, np.linalg.solve(dense, b),
                                           rtol=1e-10, atol=1e-12)

    def test_sparsity_pattern(self, small_model):
        grid, model = small_model
        q = np.linspace(-0.3, 1.4, grid.num_dofs)
        jac = model.jacobian(q)
        assert jac.nnz <= 8 * grid.num_points
        # every row couples at most 4 entries (3 same-field + 1 cross-field)
        row_counts = np.diff(jac.tocsr().indptr)
        assert row_counts.max() <= 4


class TestStencilInterface:
    def test_stencil_rows_match_full(self, rng, small_model):
        grid, model = small_model
        q = rng.uniform(-0.4, 1.2, grid.num_dofs)
        rows = np.array([0, 3, 15, 16, 20, 31], dtype=np.int64)
        is_eta, cols = model.stencil_cols(rows)
        vals = q[cols]
        np.testing.assert_array_equal(
            model.rhs_stencil_rows(is_eta, vals), model.rhs(q)[rows])

    def test_jac_stencil_matches_jacobian(self, rng, small_model):
        grid, model = small_model
        q = rng.uniform(0.05, 1.2, grid.num_dofs)
        rows = np.array([2, 7, 16, 30], dtype=np.int64)
        is_eta, cols = model.stencil_cols(rows)
        derivs = model.jac_stencil_rows(is_eta, q[cols])
        jac = model.jacobian(q).toarray()
        for r in range(rows.size):
            for s in range(4):
                assert derivs[r, s] == pytest.approx(
                    jac[rows[r], cols[r, s]], rel=1e-13, abs=1e-15)
