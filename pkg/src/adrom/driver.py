"""Orchestration of the online-adaptive reduced run and its metrics.

A run takes ``w_init`` implicit-Euler steps with the full model, builds a
POD basis and interpolation points from those snapshots, then time-steps
the hyper-reduced model while adapting basis, interpolation points, and
sampling points every step. Data samples for the adaptation come from a
lookahead predictor (default) or from the lookback map; sampling points are
refreshed every z-th step from the window's interpolation residual.
"""

import contextlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import adapt, lookahead, rom
from .fom import NewtonError, Trajectory, fom_trajectory, implicit_euler_step
from .model import Grid1D, RdeModel, RdeParams, TimeGrid, initial_condition

try:
    from threadpoolctl import threadpool_limits
except ImportError:      # pragma: no cover - soft dependency
    threadpool_limits = None


def _serial_blas():
    """BLAS threading hurts badly at these matrix sizes (tall-skinny with
    inner dimensions <= w); pin the pools to one thread during runs."""
    if threadpool_limits is None:
        return contextlib.nullcontext()
    return threadpool_limits(limits=1)


@dataclass(frozen=True)
class RunConfig:
    """Adaptive-run parameters; defaults follow the benchmark study."""

    grid: Grid1D = field(default_factory=lambda: Grid1D(1024))
    time: TimeGrid = field(default_factory=TimeGrid)
    params: RdeParams = field(default_factory=RdeParams)
    n: int = 9                    # reduced dimension
    w_init: int = 500             # full-model initialization steps
    w: int = 10                   # data-window length
    sampling_frac: float = 0.5    # m_s = ceil(frac * N) unless m_s given
    m_s: int | None = None
    z: int = 3                    # sampling-point update frequency
    c_tau: int = 5                # predictor substeps per model step
    strategy: str = "lookahead"
    oversample: int = 0           # extra interpolation points beyond n
    seed: int = 0

    @property
    def num_sampling_points(self):
        if self.m_s is not None:
            return self.m_s
        return math.ceil(self.sampling_frac * self.grid.num_dofs)

    def validate(self, num_dofs=None):
        N = self.grid.num_dofs if num_dofs is None else num_dofs
        K = self.time.num_steps
        if self.strategy not in ("lookahead", "lookback"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 1 <= self.n <= N:
            raise ValueError(f"reduced dimension must be in [1, {N}]")
        if self.w_init >= K:
            raise ValueError("w_init must be smaller than the step count")
        if self.w_init < 1:
            raise ValueError("w_init must be at least 1")
        if self.n > self.w_init:
            raise ValueError("reduced dimension cannot exceed w_init")
        if self.w < 1:
            raise ValueError("window length must be at least 1")
        ms = self.num_sampling_points
        if not self.n <= ms <= N:
            raise ValueError(f"sampling-point count must be in [n, {N}]")
        if self.z < 1:
            raise ValueError("update frequency must be at least 1")
        if self.c_tau < 1:
            raise ValueError("predictor substep factor must be at least 1")
        if self.oversample < 0 or self.n + self.oversample > N:
            raise ValueError("oversampling count out of range")


class _Phases:
    """Cheap cumulative wall-clock accounting per run phase."""

    def __init__(self):
        self.acc = {}
        self._t = time.perf_counter()

    def mark(self, name):
        now = time.perf_counter()
        self.acc[name] = self.acc.get(name, 0.0) + (now - self._t)
        self._t = now


def run_adeim(config: RunConfig, model=None, q0=None, keep_states=True,
              trace=False):
    """Execute the adaptive reduced run; returns a Trajectory of lifted
    states (columns 0..w_init are full-model states).

    Component failures abort the run, which is returned partial and flagged
    unstable with the failing step recorded.
    """
    with _serial_blas():
        return _run_adeim(config, model, q0, keep_states, trace)


def _run_adeim(config, model, q0, keep_states, trace):
    if model is None:
        model = RdeModel(config.grid, config.params)
    if q0 is None:
        q0 = initial_condition(config.grid)
    q0 = np.asarray(q0, dtype=np.float64)
    N = q0.shape[0]
    config.validate(num_dofs=N)

    K = config.time.num_steps
    dt = config.time.dt
    n = config.n
    m_s = config.num_sampling_points
    k0 = config.w_init + 1
    cfg_pred = lookahead.PredictorConfig(config.c_tau)

    phases = _Phases()
    t_start = time.perf_counter()
    diagnostics = {
        "newton_iters": np.zeros(K, dtype=np.int32),
        "objective_before": np.zeros(K - config.w_init),
        "objective_after": np.zeros(K - config.w_init),
        "predictor_fallbacks": 0,
        "galerkin_rescues": 0,
        "sampling_updates": 0,
        "abort_reason": None,
    }
    events = [] if trace else None

    states = np.empty((N, K + 1)) if keep_states else None
    init_block = states[:, :k0] if keep_states else np.empty((N, k0))
    prev_state = q0.copy()

    def partial(reason, failed_step):
        diagnostics["abort_reason"] = reason
        wall = time.perf_counter() - t_start
        kept = states[:, :failed_step] if keep_states else None
        return Trajectory(states=kept, dt=dt, final_state=prev_state,
                          wall_time=wall, timings=dict(phases.acc),
                          diagnostics=diagnostics, unstable=True,
                          failed_step=failed_step,
                          grid=getattr(model, "grid", None), trace=events)

    # Full-model initialization segment.
    init_block[:, 0] = q0
    q = q0.copy()
    for k in range(1, k0):
        try:
            q, iters = implicit_euler_step(q, dt, model)
        except NewtonError as err:
            prev_state = q
            return partial(f"full-model Newton failure: {err}", k)
        diagnostics["newton_iters"][k - 1] = iters
        init_block[:, k] = q
    prev_state = q
    phases.mark("fom_init")

    # Reduced-model initialization (basis, points, window, sampling rows).
    if n == N:
        # Any orthonormal basis is exact at full dimension; POD of a short
        # smooth prefix cannot reach rank N.
        basis = np.eye(N)
    else:
        basis = rom.pod(init_block, n)
    points = rom.qdeim_points(basis, n + config.oversample)
    window = adapt.DataWindow(N, config.w)
    for t in range(max(0, k0 - config.w + 1), k0):
        window.push(init_block[:, t], t)
    seed_cols = window.matrix() if len(window) else prev_state[:, None]
    sampling = adapt.update_sampling_points(seed_cols, basis, points, m_s)
    if not keep_states:
        del init_block
    phases.mark("rom_init")

    lifted = prev_state.copy()
    for k in range(k0, K + 1):
        coef_prev = basis.T @ lifted
        try:
            coef, iters = rom.rom_step(coef_prev, basis, points, model, dt)
        except NewtonError:
            # The interpolated implicit system can lose solvability during
            # fast transients (ignition events); retry the step with the
            # plain Galerkin reduced model before giving up.
            try:
                coef, iters = rom.galerkin_step(coef_prev, basis, model, dt)
                diagnostics["galerkin_rescues"] += 1
            except NewtonError as err:
                return partial(f"reduced Newton failure: {err}", k)
        diagnostics["newton_iters"][k - 1] = iters
        lifted = basis @ coef
        if not np.all(np.isfinite(lifted)):
            return partial("non-finite lifted state", k)
        prev_state = lifted
        if keep_states:
            states[:, k] = lifted
        phases.mark("rom_step")

        update_step = (k % config.z == 0) or (k == k0)
        try:
            if config.strategy == "lookahead":
                mode = "full" if update_step else "reduced"
                try:
                    sample = lookahead.lookahead_sample(
                        coef, basis, sampling, cfg_pred, mode, model, dt)
                except lookahead.PredictorBlowupError:
                    diagnostics["predictor_fallbacks"] += 1
                    sample = adapt.lookback_sample(basis, sampling, coef,
                                                   model, dt)
            else:
                sample = adapt.lookback_sample(basis, sampling, coef,
                                               model, dt)
        except (NewtonError, np.linalg.LinAlgError) as err:
            return partial(f"data-sample failure: {err}", k)
        window.push(sample, k)
        window_cols = window.matrix()
        phases.mark("sample")

        if update_step:
            sampling = adapt.update_sampling_points(window_cols, basis,
                                                    points, m_s)
            diagnostics["sampling_updates"] += 1
            phases.mark("sampling_update")

        update = adapt.rank1_update(basis, window_cols)
        idx = k - k0
        diagnostics["objective_before"][idx] = update.objective_before
        diagnostics["objective_after"][idx] = update.objective_after
        try:
            basis = adapt.adapt_basis(basis, update)
        except ValueError as err:
            return partial(f"basis adaptation failure: {err}", k)
        points = rom.qdeim_points(basis, n + config.oversample)
        phases.mark("adapt")

        if trace:
            events.append({"k": k, "update_step": update_step,
                           "window_times": window.times,
                           "basis_shape": basis.shape})

    wall = time.perf_counter() - t_start
    diagnostics["num_steps"] = K
    if hasattr(model, "component_evals"):
        diagnostics["component_evals"] = int(model.component_evals)
    return Trajectory(states=states, dt=dt, final_state=prev_state,
                      wall_time=wall, timings=dict(phases.acc),
                      diagnostics=diagnostics,
                      grid=getattr(model, "grid", None), trace=events)


def run_fom(config: RunConfig, keep_states=True):
    """Full-model reference run for the same configuration."""
    model = RdeModel(config.grid, config.params)
    q0 = initial_condition(config.grid)
    with _serial_blas():
        traj = fom_trajectory(q0, config.time, model,
                              keep_states=keep_states)
    traj.grid = config.grid
    return traj


def frobenius_sq(mat, other=None, block=2048):
    """Squared Frobenius norm of ``mat`` (or of mat - other), column-blocked
    to avoid giant temporaries."""
    total = 0.0
    for j in range(0, mat.shape[1], block):
        part = mat[:, j:j + block]
        if other is not None:
            part = part - other[:, j:j + block]
        total += float(np.linalg.norm(part) ** 2)
    return total


def avg_rel_error(rom_traj, fom_traj):
    """Squared-Frobenius error ratio ||Q_rom - Q_fom||_F^2 / ||Q_fom||_F^2.

    Note this is the squared ratio, not the plain relative norm.
    """
    q_rom = rom_traj.states if isinstance(rom_traj, Trajectory) else rom_traj
    q_fom = fom_traj.states if isinstance(fom_traj, Trajectory) else fom_traj
    if q_rom is None or q_fom is None:
        raise ValueError("both trajectories must retain their states")
    if q_rom.shape != q_fom.shape:
        raise ValueError(
            f"trajectory shapes differ: {q_rom.shape} vs {q_fom.shape}")
    return frobenius_sq(q_rom, q_fom) / frobenius_sq(q_fom)


def probe(traj, x_location, field="eta"):
    """Time series of one field at the grid node nearest to ``x_location``
    (absolute distance, ties to the lower index)."""
    if not 0.0 <= x_location < 2.0 * np.pi:
        raise ValueError("probe location must lie in [0, 2*pi)")
    grid = traj.grid
    if grid is None:
        raise ValueError("trajectory carries no grid information")
    if traj.states is None:
        raise ValueError("trajectory did not retain states")
    idx = int(np.argmin(np.abs(grid.coordinates - x_location)))
    if field == "eta":
        row = idx
    elif field == "lambda":
        row = grid.num_points + idx
    else:
        raise ValueError(f"unknown field {field!r}")
    return traj.states[row, :].copy()


def max_final_eta(traj, grid):
    """Maximum of eta over the grid at the final time."""
    return float(traj.final_state[:grid.num_points].max())


def _sweep_single(task):
    config, mu, use_rom = task
    cfg = replace(config, params=replace(config.params, mu=mu))
    try:
        if use_rom:
            traj = run_adeim(cfg, keep_states=False)
            if traj.unstable:
                return {"mu": mu, "ok": False,
                        "error": f"unstable at step {traj.failed_step}"}
        else:
            traj = run_fom(cfg, keep_states=False)
    except NewtonError as err:
        return {"mu": mu, "ok": False, "error": str(err)}
    return {"mu": mu, "ok": True, "max_eta": max_final_eta(traj, cfg.grid),
            "wall_time": traj.wall_time}


def bifurcation_sweep(mu_values, config: RunConfig, use_rom=True, jobs=1):
    """Maximum final-time eta for each injection parameter.

    Per-value failures are recorded and the sweep continues. Returns a list
    of dicts with keys mu, ok, and max_eta or error.
    """
    mu_values = list(mu_values)
    if not mu_values:
        raise ValueError("need at least one injection-parameter value")
    config.validate()
    tasks = [(config, float(mu), use_rom) for mu in mu_values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_single, tasks))
    else:
        results = [_sweep_single(t) for t in tasks]
    return sorted(results, key=lambda rec: rec["mu"])


def bench(config: RunConfig, repeats=1):
    """Wall-clock comparison of the full and adaptive-reduced runs.

    Purely informative; a ratio below 1 (reduced slower) is reported as is.
    """
    import platform

    import scipy

    from . import kernels

    fom_times, rom_times = [], []
    unstable = False
    for _ in range(repeats):
        t_fom = run_fom(config, keep_states=False)
        fom_times.append(t_fom.wall_time)
        t_rom = run_adeim(config, keep_states=False)
        rom_times.append(t_rom.wall_time)
        unstable = unstable or t_rom.unstable
    ratios = sorted(f / r for f, r in zip(fom_times, rom_times))
    mid = ratios[len(ratios) // 2] if len(ratios) % 2 else \
        0.5 * (ratios[len(ratios) // 2 - 1] + ratios[len(ratios) // 2])
    return {
        "fom_seconds": fom_times,
        "rom_seconds": rom_times,
        "speedup": {"min": ratios[0], "median": mid, "max": ratios[-1]},
        "rom_unstable": unstable,
        "environment": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernel_backend": kernels.BACKEND,
        },
    }
