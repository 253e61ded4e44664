import numpy as np
import pytest

from adrom.fom import NewtonError, fom_trajectory, implicit_euler_step
from adrom.model import Grid1D, RdeModel, RdeParams, TimeGrid, initial_condition

from conftest import LinearModel, ZeroModel


class TestImplicitEulerStep:
    def test_scalar_linear_closed_form(self):
        # dq/dt = -q, backward Euler: q1 = q0 / (1 + dt)
        model = LinearModel(np.array([[-1.0]]))
        q1, _ = implicit_euler_step(np.array([1.0]), 0.1, model)
        assert q1[0] == pytest.approx(1.0 / 1.1, abs=1e-12)

    def test_zero_rhs_is_identity(self, rng):
        model = ZeroModel(6)
        q0 = rng.standard_normal(6)
        q1, iters = implicit_euler_step(q0, 0.5, model)
        np.testing.assert_array_equal(q1, q0)
        assert iters == 0

    def test_residual_contract(self, rng):
        grid = Grid1D(32)
        model = RdeModel(grid, RdeParams())
        q0 = initial_condition(grid)
        dt = 1e-3
        q1, _ = implicit_euler_step(q0, dt, model)
        res = q1 - dt * model.rhs(q1) - q0
        assert np.linalg.norm(res) <= 1e-10

    def test_rde_step_matches_picard_oracle(self):
        # independent fixed-point solve of the same nonlinear system
        grid = Grid1D(64)
        model = RdeModel(grid, RdeParams())
        q0 = initial_condition(grid)
        dt = 1e-3
        q1, _ = implicit_euler_step(q0, dt, model)
        qp = q0.copy()
        for _ in range(400):
            qp = q0 + dt * model.rhs(qp)
        assert np.linalg.norm(q1 - qp) <= 1e-8

    def test_newton_divergence_raises_with_history(self):
        class Nasty:
            def rhs(self, q):
                return 1e12 * q ** 3 + np.ones_like(q)

            def jacobian(self, q):
                return np.diag(3e12 * q ** 2)

        with pytest.raises(NewtonError) as excinfo:
            implicit_euler_step(np.array([1.0]), 1.0, Nasty(), max_iter=5)
        assert len(excinfo.value.residuals) >= 1

    def test_first_order_convergence(self):
        # global error at T=1 for dq/dt=-q halves with dt
        model = LinearModel(np.array([[-1.0]]))
        errs = []
        for steps in (64, 128):
            dt = 1.0 / steps
            q = np.array([1.0])
            for _ in range(steps):
                q, _ = implicit_euler_step(q, dt, model)
            errs.append(abs(q[0] - np.exp(-1.0)))
        ratio = errs[0] / errs[1]
        assert 1.8 <= ratio <= 2.2


class TestTrajectory:
    def test_zero_steps(self):
        model = ZeroModel(4)
        q0 = np.arange(4.0)
        traj = fom_trajectory(q0, TimeGrid(0.1, 0), model)
        assert traj.states.shape == (4, 1)
        np.testing.assert_array_equal(traj.states[:, 0], q0)

    def test_zero_rhs_constant_columns(self):
        model = ZeroModel(4)
        q0 = np.arange(4.0)
        traj = fom_trajectory(q0, TimeGrid(0.1, 5), model)
        assert traj.states.shape == (4, 6)
        for k in range(6):
            np.testing.assert_array_equal(traj.states[:, k], q0)

    def test_failure_carries_step_index(self):
        class FailsAtThird:
            calls = 0

            def rhs(self, q):
                FailsAtThird.calls += 1
                if FailsAtThird.calls > 8:
                    return np.full_like(q, np.nan)
                return -q

            def jacobian(self, q):
                return -np.eye(q.shape[0])

        with pytest.raises(NewtonError) as excinfo:
            fom_trajectory(np.ones(2), TimeGrid(0.1, 50), FailsAtThird())
        assert excinfo.value.failed_step is not None

    def test_keep_states_false_returns_final_only(self):
        model = LinearModel(-np.eye(3))
        traj = fom_trajectory(np.ones(3), TimeGrid(0.1, 10), model,
                              keep_states=False)
        assert traj.states is None
        assert traj.final_state.shape == (3,)
        assert traj.diagnostics["num_steps"] == 10

    def test_newton_residual_bound_every_step(self):
        grid = Grid1D(32)
        model = RdeModel(grid, RdeParams())
        tg = TimeGrid(1e-3, 25)
        traj = fom_trajectory(initial_condition(grid), tg, model)
        dt = tg.dt
        for k in range(1, 26):
            res = traj.states[:, k] - dt * model.rhs(traj.states[:, k]) \
                - traj.states[:, k - 1]
            assert np.linalg.norm(res) <= 1e-10
