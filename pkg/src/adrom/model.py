"""Semi-discrete rotating-detonation-wave model on a periodic 1D grid.

State layout is stacked, ``q = [eta_0..eta_{M-1}, lam_0..lam_{M-1}]`` with
``N = 2M``. ``eta`` is the intensive property of the working fluid, ``lam``
the combustion progress. Advection of ``eta`` uses a first-order upwind
stencil with wind speed ``eta`` itself; diffusion is the 3-point central
second difference; both wrap periodically.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from . import kernels


@dataclass(frozen=True)
class RdeParams:
    """Physical parameters of the detonation-wave model."""

    nu: float = 0.01        # viscosity
    k_pre: float = 1.0      # pre-exponential factor of the heat release
    alpha: float = 0.3      # activation energy
    eta_c: float = 1.1      # ignition energy
    eta_p: float = 0.5      # injection sigmoid center
    r: float = 1.0          # injection sigmoid slope
    epsilon: float = 0.11   # energy-loss coefficient
    mu: float = 3.5         # injection parameter

    def __post_init__(self):
        vals = [self.nu, self.k_pre, self.alpha, self.eta_c, self.eta_p,
                self.r, self.epsilon, self.mu]
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("model parameters must be finite")
        if self.nu <= 0.0:
            raise ValueError("viscosity nu must be positive")
        if self.alpha <= 0.0:
            raise ValueError("activation energy alpha must be positive")


@dataclass(frozen=True)
class Grid1D:
    """Equidistant periodic grid on [0, 2*pi)."""

    num_points: int

    def __post_init__(self):
        if self.num_points < 4:
            raise ValueError("grid needs at least 4 points")

    @property
    def dx(self):
        return 2.0 * np.pi / self.num_points

    @property
    def coordinates(self):
        return np.arange(self.num_points) * self.dx

    @property
    def num_dofs(self):
        return 2 * self.num_points


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_k = k*dt, k = 0..num_steps."""

    dt: float = 1e-3
    num_steps: int = 50000

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.num_steps < 0:
            raise ValueError("step count cannot be negative")

    @property
    def times(self):
        return np.arange(self.num_steps + 1) * self.dt


def initial_condition(grid: Grid1D) -> np.ndarray:
    """Single smooth pulse: eta = (3/2)*sech^20(x - 1), lam = 0."""
    x = grid.coordinates
    q = np.zeros(grid.num_dofs)
    q[:grid.num_points] = 1.5 / np.cosh(x - 1.0) ** 20
    return q


def initial_eta(x):
    """The eta pulse profile at arbitrary coordinates (for off-grid checks)."""
    return 1.5 / np.cosh(np.asarray(x, dtype=float) - 1.0) ** 20


class RdeModel:
    """Right-hand side, Jacobian, and solver hooks for the detonation model.

    Exposes three access levels, all consistent with each other:

    * full vectors: ``rhs``, ``jacobian``, ``solve_shifted``;
    * selected components from a full state: ``rhs_rows``;
    * selected components from gathered stencil values: ``stencil_cols``,
      ``rhs_stencil_rows``, ``jac_stencil_rows`` (lets callers lift only the
      entries a row's stencil touches).

    ``component_evals`` counts right-hand-side component evaluations (a full
    evaluation counts N) for cost instrumentation.
    """

    def __init__(self, grid: Grid1D, params: RdeParams):
        self.grid = grid
        self.params = params
        self.num_dofs = grid.num_dofs
        self.component_evals = 0
        p = params
        self._args = (grid.dx, p.nu, p.k_pre, p.alpha, p.eta_c, p.eta_p,
                      p.r, p.epsilon, p.mu)

    # -- full-state interface -------------------------------------------------

    def rhs(self, q):
        q = np.ascontiguousarray(q, dtype=np.float64)
        if q.shape != (self.num_dofs,):
            raise ValueError(f"state must have length {self.num_dofs}")
        if not np.all(np.isfinite(q)):
            raise ValueError("state contains non-finite entries")
        self.component_evals += self.num_dofs
        return kernels.rhs_full(q, self.grid.num_points, *self._args)

    def rhs_rows(self, q, rows):
        """Components of the right-hand side at stacked indices ``rows``."""
        q = np.ascontiguousarray(q, dtype=np.float64)
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        self.component_evals += rows.shape[0]
        return kernels.rhs_rows(q, rows, self.grid.num_points, *self._args)

    def jacobian(self, q):
        """Sparse d(rhs)/dq in the stacked layout (CSR)."""
        q = np.ascontiguousarray(q, dtype=np.float64)
        M = self.grid.num_points
        ee_m, ee_d, ee_p, el_d, le_d, ll_d = kernels.jac_coeffs(
            q, M, *self._args)
        c = self.params.nu / self.grid.dx ** 2
        jm = np.roll(np.arange(M), 1)       # j-1 with wrap
        jp = np.roll(np.arange(M), -1)      # j+1 with wrap
        j = np.arange(M)
        rows = np.concatenate([j, j, j, j, M + j, M + j, M + j, M + j])
        cols = np.concatenate([jm, j, jp, M + j,
                               M + jm, M + j, M + jp, j])
        vals = np.concatenate([ee_m, ee_d, ee_p, el_d,
                               np.full(M, c), ll_d, np.full(M, c), le_d])
        return scipy.sparse.csr_matrix((vals, (rows, cols)),
                                       shape=(2 * M, 2 * M))

    def solve_shifted(self, q, dt, b):
        """Solve (I - dt*J(q)) x = b via a banded factorization.

        The unknowns are reordered to interleaved (eta_j, lam_j) pairs, which
        makes the matrix pentadiagonal except for four periodic-wrap entries;
        those are folded back in with a rank-4 Woodbury correction.
        """
        M = self.grid.num_points
        N = 2 * M
        ee_m, ee_d, ee_p, el_d, le_d, ll_d = kernels.jac_coeffs(
            q, M, *self._args)
        c = self.params.nu / self.grid.dx ** 2

        # Banded storage for scipy.linalg.solve_banded with (l, u) = (2, 2):
        # ab[2 + i - j, j] = A[i, j], interleaved index 2j = eta_j, 2j+1 = lam_j.
        ab = np.zeros((5, N))
        ab[2, 0::2] = 1.0 - dt * ee_d
        ab[2, 1::2] = 1.0 - dt * ll_d
        ab[1, 1::2] = -dt * el_d                 # A[2j, 2j+1]
        ab[3, 0::2] = -dt * le_d                 # A[2j+1, 2j]
        ab[0, 2::2] = -dt * ee_p[:-1]            # A[2j, 2j+2]
        ab[0, 3::2] = -dt * c                    # A[2j+1, 2j+3]
        ab[4, 0:-2:2] = -dt * ee_m[1:]           # A[2j, 2j-2]
        ab[4, 1:-2:2] = -dt * c                  # A[2j+1, 2j-1]

        # Periodic wrap entries kept out of the band:
        # (row, col, value) = (0, N-2, -dt*ee_m[0]), (1, N-1, -dt*c),
        #                     (N-2, 0, -dt*ee_p[-1]), (N-1, 1, -dt*c).
        corner_rows = (0, 1, N - 2, N - 1)
        corner_cols = (N - 2, N - 1, 0, 1)
        corner_vals = (-dt * ee_m[0], -dt * c, -dt * ee_p[-1], -dt * c)

        b = np.asarray(b, dtype=np.float64)
        rhs = np.zeros((N, 5))
        rhs[0::2, 0] = b[:M]            # permute b to interleaved order
        rhs[1::2, 0] = b[M:]
        for i, (row, val) in enumerate(zip(corner_rows, corner_vals)):
            rhs[row, 1 + i] = val
        y = scipy.linalg.solve_banded((2, 2), ab, rhs, check_finite=False)
        y0 = y[:, 0]
        binv_u = y[:, 1:]
        cap = np.eye(4) + binv_u[list(corner_cols), :]
        coef = np.linalg.solve(cap, y0[list(corner_cols)])
        sol = y0 - binv_u @ coef
        out = np.empty(N)
        out[:M] = sol[0::2]             # back to the stacked layout
        out[M:] = sol[1::2]
        return out

    # -- stencil interface (selected components of a lifted state) ------------

    def stencil_cols(self, rows):
        """Stacked column indices each requested row's stencil reads.

        Column order per row: (v_{j-1}, v_j, v_{j+1}, w_j) where v is the
        row's own field and w the other field at the same grid point.
        """
        rows = np.asarray(rows, dtype=np.int64)
        M = self.grid.num_points
        is_eta = rows < M
        j = np.where(is_eta, rows, rows - M)
        jm = (j - 1) % M
        jp = (j + 1) % M
        off = np.where(is_eta, 0, M)
        cols = np.empty((rows.shape[0], 4), dtype=np.int64)
        cols[:, 0] = off + jm
        cols[:, 1] = off + j
        cols[:, 2] = off + jp
        cols[:, 3] = (M - off) + j   # other field, same grid point
        return is_eta, cols

    def rhs_stencil_rows(self, is_eta, vals):
        self.component_evals += vals.shape[0]
        return kernels.rhs_stencil(np.ascontiguousarray(is_eta),
                                   np.ascontiguousarray(vals, dtype=np.float64),
                                   *self._args)

    def jac_stencil_rows(self, is_eta, vals):
        return kernels.jac_stencil(np.ascontiguousarray(is_eta),
                                   np.ascontiguousarray(vals, dtype=np.float64),
                                   *self._args)
