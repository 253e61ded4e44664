"""Predictor models that look ahead in time.

A predictor rediscretizes the continuous model with forward Euler at the
substep size dtau = dt / c_tau; integrating it c_tau substeps from the
lifted reduced state approximates the full-model state at the NEXT time
step, which is what the data window wants to learn. The reduced predictor
evaluates the right-hand side only at the sampling rows and fills the rest
with the empirical-interpolation lift, with basis and sampling rows frozen
across the substeps of one sample.
"""

from dataclasses import dataclass

import numpy as np

from .rom import interpolation_coefficients

BLOWUP_LIMIT = 1e6


class PredictorBlowupError(RuntimeError):
    """Explicit predictor left the trust region (non-finite or huge)."""

    def __init__(self, message, substep):
        super().__init__(message)
        self.substep = substep


@dataclass(frozen=True)
class PredictorConfig:
    """Substep factor for the explicit predictor; dtau = dt / c_tau."""

    c_tau: int = 5

    def __post_init__(self):
        if self.c_tau < 1:
            raise ValueError("substep factor must be at least 1")

    def dtau(self, dt):
        return dt / self.c_tau


def _check_state(q, substep):
    if not np.all(np.isfinite(q)) or np.abs(q).max() > BLOWUP_LIMIT:
        raise PredictorBlowupError(
            f"predictor state left bounds at substep {substep}", substep)


def predictor_step_full(q, dtau, model):
    """One forward-Euler substep evaluating the full right-hand side."""
    return q + dtau * model.rhs(q)


def predictor_step_reduced(q, basis, sampling, dtau, model, _solver=None):
    """One forward-Euler substep with the right-hand side sketched at the
    sampling rows.

    The discrete map x + dtau*rhs(x) is evaluated exactly at the sampling
    rows; all other entries take the empirical-interpolation lift of those
    values. ``_solver`` optionally reuses a prefactored least-squares solve
    for basis[sampling, :] across substeps.
    """
    sampling = np.asarray(sampling, dtype=np.int64)
    if sampling.shape[0] < basis.shape[1]:
        raise ValueError(f"need at least n={basis.shape[1]} sampling points")
    f_rows = model.rhs_rows(q, sampling) if hasattr(model, "rhs_rows") \
        else model.rhs(q)[sampling]
    mapped = q[sampling] + dtau * f_rows
    if sampling.shape[0] == q.shape[0]:
        out = np.empty_like(q)
        out[sampling] = mapped
        return out
    if _solver is None:
        coef = interpolation_coefficients(basis, sampling, mapped)
    else:
        coef = _solver(mapped)
    out = basis @ coef
    out[sampling] = mapped
    return out


def _lstsq_solver(basis, sampling):
    """Prefactored least-squares solve for basis[sampling, :]."""
    rows = basis[sampling, :]
    q, r = np.linalg.qr(rows)
    return lambda y: np.linalg.solve(r, q.T @ y)


def lookahead_sample(coef, basis, sampling, cfg, mode, model, dt):
    """Integrate a predictor c_tau substeps from the lifted reduced state.

    Returns the predictor state after the substeps, an approximation of the
    full-model state one time step ahead. ``mode`` selects the full
    predictor ('full') or the sampled one ('reduced'); the basis and
    sampling rows are frozen for the whole call. Raises
    PredictorBlowupError when the explicit integration leaves bounds.
    """
    if mode not in ("full", "reduced"):
        raise ValueError(f"unknown predictor mode {mode!r}")
    dtau = cfg.dtau(dt)
    q = basis @ np.asarray(coef, dtype=np.float64)
    solver = None
    if mode == "reduced" and sampling.shape[0] < q.shape[0]:
        solver = _lstsq_solver(basis, sampling)
    for substep in range(1, cfg.c_tau + 1):
        if mode == "full":
            q = predictor_step_full(q, dtau, model)
        else:
            q = predictor_step_reduced(q, basis, sampling, dtau, model,
                                       _solver=solver)
        _check_state(q, substep)
    return q


def lookahead_sample_projected(coef, basis, sampling, cfg, model, dt):
    """Projected variant: evolve reduced predictor coefficients, then sample.

    The predictor state itself is kept in the basis span (coefficients
    advanced by the interpolation solve of the sampled discrete map); the
    returned sample evaluates the discrete map at the final lifted state at
    the sampling rows with the usual lift fill-in, so it generally leaves
    the span and still carries an adaptation signal.
    """
    sampling = np.asarray(sampling, dtype=np.int64)
    if sampling.shape[0] < basis.shape[1]:
        raise ValueError(f"need at least n={basis.shape[1]} sampling points")
    dtau = cfg.dtau(dt)
    c = np.asarray(coef, dtype=np.float64).copy()
    solver = _lstsq_solver(basis, sampling)
    for substep in range(1, cfg.c_tau + 1):
        lifted = basis @ c
        f_rows = model.rhs_rows(lifted, sampling) \
            if hasattr(model, "rhs_rows") else model.rhs(lifted)[sampling]
        mapped = lifted[sampling] + dtau * f_rows
        c = solver(mapped)
        _check_state(c, substep)
    lifted = basis @ c
    f_rows = model.rhs_rows(lifted, sampling) \
        if hasattr(model, "rhs_rows") else model.rhs(lifted)[sampling]
    mapped = lifted[sampling] + dtau * f_rows
    out = basis @ solver(mapped)
    out[sampling] = mapped
    return out
