"""Online basis adaptation driven by a sliding window of data samples.

The adaptation solves, for a basis V and window F with coefficient matrix
C = V^T F,

    min_{alpha, beta} || (V + alpha beta^T) C - F ||_F^2

whose global minimizer has the closed form: project the residual
E = F - V C onto the row space of C and take its top singular triple. The
updated basis V + alpha beta^T is re-orthonormalized, interpolation points
are refreshed by pivoted QR, and sampling points follow the largest rows of
the window's interpolation residual.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .rom import PINV_RCOND, fix_column_signs, interpolation_coefficients


class DataWindow:
    """Ring buffer of the most recent N-vectors, tagged with time indices."""

    def __init__(self, num_dofs, capacity):
        if capacity < 1:
            raise ValueError("window capacity must be at least 1")
        self.capacity = capacity
        self._buf = np.empty((num_dofs, capacity))
        self._times = []
        self._head = 0          # next slot to write

    def __len__(self):
        return len(self._times)

    @property
    def times(self):
        return list(self._times)

    def push(self, sample, k):
        """Store ``sample`` at time index ``k``, evicting the oldest column
        once capacity is exceeded. Time indices must be strictly
        increasing."""
        if self._times and k <= self._times[-1]:
            raise ValueError(
                f"time index {k} not after previous {self._times[-1]}")
        self._buf[:, self._head] = sample
        self._head = (self._head + 1) % self.capacity
        self._times.append(k)
        if len(self._times) > self.capacity:
            self._times.pop(0)

    def slice(self, first, last):
        """Columns with time index in [first, last], oldest first."""
        keep = [i for i, t in enumerate(self._times) if first <= t <= last]
        return self._matrix()[:, keep]

    def matrix(self):
        """All stored columns, oldest first."""
        return self._matrix()

    def _matrix(self):
        count = len(self._times)
        if count < self.capacity:
            return self._buf[:, :count].copy()
        order = np.arange(self._head, self._head + self.capacity) % self.capacity
        return self._buf[:, order]


@dataclass
class Rank1Update:
    """Optimal rank-1 basis correction alpha @ beta^T for a data window."""

    alpha: np.ndarray
    beta: np.ndarray
    objective_before: float
    objective_after: float
    degenerate: bool = False


def rank1_update(basis, window):
    """Global minimizer of ||(V + alpha beta^T) C - F||_F^2, C = V^T F.

    The top singular triple of the projected residual E pinv(C) C is found
    through the w x w Gram matrix (w is the window width, small online).
    A window orthogonal to the basis (C == 0) yields the degenerate zero
    update.
    """
    basis = np.asarray(basis, dtype=np.float64)
    window = np.asarray(window, dtype=np.float64)
    if window.ndim == 1:
        window = window[:, None]
    if window.shape[1] < 1:
        raise ValueError("window must hold at least one sample")

    coeff = basis.T @ window                      # C, n x w
    resid = window - basis @ coeff                # E = F - V C
    obj_before = float(np.linalg.norm(resid) ** 2)

    cu, cs, cvt = np.linalg.svd(coeff, full_matrices=False)
    crank = int(np.count_nonzero(cs > PINV_RCOND * cs[0])) if cs.size else 0
    if crank == 0:
        zero_a = np.zeros(basis.shape[0])
        zero_b = np.zeros(basis.shape[1])
        return Rank1Update(zero_a, zero_b, obj_before, obj_before,
                           degenerate=True)

    # Projector onto the row space of C: pinv(C) C = Vc Vc^T with the right
    # singular vectors Vc of C.
    vc = cvt[:crank, :].T                         # w x crank
    proj_resid = (resid @ vc) @ vc.T              # E Pi, N x w

    # Top singular triple via the small Gram matrix (E Pi)^T (E Pi).
    gram = proj_resid.T @ proj_resid
    evals, evecs = np.linalg.eigh(gram)
    sigma2 = max(float(evals[-1]), 0.0)
    sigma = np.sqrt(sigma2)
    if sigma <= 0.0:
        zero_a = np.zeros(basis.shape[0])
        zero_b = np.zeros(basis.shape[1])
        return Rank1Update(zero_a, zero_b, obj_before, obj_before)
    v_top = evecs[:, -1]
    u_top = proj_resid @ v_top / sigma
    alpha = sigma * u_top
    # beta solves C^T beta = v_top (minimum norm); v_top lies in rowspace(C).
    beta = (cu[:, :crank] / cs[:crank]) @ (vc.T @ v_top)

    obj_after = float(
        np.linalg.norm((basis + np.outer(alpha, beta)) @ coeff - window) ** 2)
    return Rank1Update(alpha, beta, obj_before, obj_after)


def adapt_basis(basis, update):
    """Orthonormalize V + alpha beta^T (thin QR, sign-fixed).

    Raises ValueError when the update collapses the basis rank.
    """
    adapted = basis + np.outer(update.alpha, update.beta)
    q, r = np.linalg.qr(adapted)
    diag = np.abs(np.diag(r))
    if diag.min() <= PINV_RCOND * max(diag.max(), 1.0):
        raise ValueError("rank collapse: adapted basis is numerically singular")
    return fix_column_signs(q)


def update_sampling_points(window, basis, points, num_samples):
    """Sampling points from the window's interpolation residual.

    Computes R = F - V pinv(V[p, :]) F[p, :], ranks rows by Euclidean norm
    (descending, ties to the lower index), and returns the first
    ``num_samples`` row indices.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim == 1:
        window = window[:, None]
    if window.shape[1] < 1:
        raise ValueError("window must hold at least one sample")
    n = basis.shape[1]
    if num_samples < n:
        raise ValueError(f"need at least n={n} sampling points")
    coef = interpolation_coefficients(basis, points, window[points, :])
    resid = window - basis @ coef
    norms = np.linalg.norm(resid, axis=1)
    order = np.argsort(-norms, kind="stable")
    return order[:num_samples].astype(np.int64)


def lookback_sample(basis, sampling, coef, model, dt):
    """Data sample approximating the previous full state (looks back).

    Evaluates the time-discrete map f(x) = x - dt*rhs(x) at the lifted
    reduced state, but only at the sampling rows; the remaining entries are
    filled by the empirical-interpolation lift of those sampled values.
    """
    basis = np.asarray(basis, dtype=np.float64)
    sampling = np.asarray(sampling, dtype=np.int64)
    if sampling.shape[0] < basis.shape[1]:
        raise ValueError(
            f"need at least n={basis.shape[1]} sampling points")
    coef = np.asarray(coef, dtype=np.float64)
    if hasattr(model, "stencil_cols"):
        is_eta, cols = model.stencil_cols(sampling)
        vals = (basis[cols.ravel(), :] @ coef).reshape(cols.shape)
        f_rows = model.rhs_stencil_rows(is_eta, vals)
        lifted_rows = basis[sampling, :] @ coef
    else:
        lifted = basis @ coef
        f_rows = model.rhs(lifted)[sampling]
        lifted_rows = lifted[sampling]
    sampled = lifted_rows - dt * f_rows
    out = basis @ interpolation_coefficients(basis, sampling, sampled)
    out[sampling] = sampled
    return out
