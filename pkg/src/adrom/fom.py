"""Implicit-Euler time stepping of the full-order model.

Each step solves the nonlinear system q_k - dt*rhs(q_k) = q_{k-1} with
Newton's method seeded at q_{k-1}.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 25


class NewtonError(RuntimeError):
    """Newton iteration failed to converge; carries the residual history."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = list(residuals)
        self.failed_step = None


@dataclass
class Trajectory:
    """Time-indexed states plus run metadata.

    ``states`` is N x (K+1) with column k the state at t_k; it is None for
    runs executed with keep_states=False (bench/sweep mode), in which case
    only ``final_state`` is retained.
    """

    states: np.ndarray | None
    dt: float
    final_state: np.ndarray
    wall_time: float
    timings: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    unstable: bool = False
    failed_step: int | None = None
    grid: object = None
    trace: list | None = None

    @property
    def num_steps(self):
        if self.states is not None:
            return self.states.shape[1] - 1
        return self.diagnostics.get("num_steps")

    @property
    def times(self):
        return np.arange(self.num_steps + 1) * self.dt


def _solve_shifted_generic(model, q, dt, res):
    """Fallback linear solve of (I - dt*J(q)) x = res for models without a
    specialized path."""
    jac = model.jacobian(q)
    if scipy.sparse.issparse(jac):
        n = jac.shape[0]
        mat = scipy.sparse.eye(n, format="csc") - dt * jac.tocsc()
        return scipy.sparse.linalg.spsolve(mat, res)
    jac = np.atleast_2d(np.asarray(jac, dtype=float))
    mat = np.eye(jac.shape[0]) - dt * jac
    return np.linalg.solve(mat, np.atleast_1d(res))


def implicit_euler_step(q_prev, dt, model, tol=NEWTON_TOL,
                        max_iter=NEWTON_MAX_ITER):
    """One implicit-Euler step; returns (q_next, newton_iterations).

    Raises NewtonError when the residual fails to reach ``tol`` within
    ``max_iter`` iterations or becomes non-finite.
    """
    q_prev = np.atleast_1d(np.asarray(q_prev, dtype=np.float64))
    q = q_prev.copy()
    has_fast_solve = hasattr(model, "solve_shifted")
    residuals = []
    for it in range(max_iter + 1):
        res = q - dt * model.rhs(q) - q_prev
        rnorm = np.linalg.norm(res)
        residuals.append(rnorm)
        if not np.isfinite(rnorm):
            raise NewtonError(
                f"Newton residual became non-finite at iteration {it}",
                residuals)
        if rnorm <= tol:
            return q, it
        if it == max_iter:
            break
        if has_fast_solve:
            delta = model.solve_shifted(q, dt, res)
        else:
            delta = _solve_shifted_generic(model, q, dt, res)
        q = q - delta
    raise NewtonError(
        f"Newton did not converge in {max_iter} iterations "
        f"(last residual {residuals[-1]:.3e})", residuals)


def fom_trajectory(q0, time_grid, model, keep_states=True,
                   tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER,
                   store_into=None):
    """Time-step the full model for time_grid.num_steps steps.

    Returns a Trajectory with K+1 columns [q_0, ..., q_K]. A failing step
    re-raises the NewtonError with ``failed_step`` set (states written so
    far live in ``store_into`` when the caller provided it).
    """
    q0 = np.asarray(q0, dtype=np.float64)
    n = q0.shape[0]
    K = time_grid.num_steps
    t_start = time.perf_counter()
    if keep_states:
        states = store_into if store_into is not None else np.empty((n, K + 1))
        states[:, 0] = q0
    else:
        states = None
    q = q0.copy()
    newton_iters = np.zeros(K, dtype=np.int32)
    for k in range(1, K + 1):
        try:
            q, iters = implicit_euler_step(q, time_grid.dt, model,
                                           tol=tol, max_iter=max_iter)
        except NewtonError as err:
            err.failed_step = k
            raise
        newton_iters[k - 1] = iters
        if keep_states:
            states[:, k] = q
    wall = time.perf_counter() - t_start
    return Trajectory(states=states, dt=time_grid.dt, final_state=q,
                      wall_time=wall,
                      timings={"total": wall},
                      diagnostics={"newton_iters": newton_iters,
                                   "num_steps": K})
