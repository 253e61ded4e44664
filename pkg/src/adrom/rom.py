"""Static model-reduction building blocks.

POD bases, interpolation-point selection by column-pivoted QR, empirical
interpolation lifts, and the hyper-reduced implicit time step. Basis
matrices are plain N x n numpy arrays with orthonormal columns; index
selections are 1D int64 arrays of pairwise-distinct indices whose order is
meaningful.
"""

import numpy as np
import scipy.linalg

from .fom import NEWTON_TOL, NEWTON_MAX_ITER, NewtonError

SIGN_TOL = 1e-12
PINV_RCOND = 1e-12


def fix_column_signs(mat):
    """Flip column signs so the first non-negligible entry is positive.

    Makes SVD/QR outputs reproducible across runs and libraries.
    """
    mat = np.array(mat, copy=True)
    for j in range(mat.shape[1]):
        col = mat[:, j]
        nz = np.flatnonzero(np.abs(col) > SIGN_TOL * max(1.0, np.abs(col).max()))
        if nz.size and col[nz[0]] < 0.0:
            mat[:, j] = -col
    return mat


def check_orthonormal(basis, tol=1e-10):
    gram = basis.T @ basis
    err = np.linalg.norm(gram - np.eye(basis.shape[1]))
    if err > tol:
        raise ValueError(f"basis columns are not orthonormal (defect {err:.2e})")


def pod(snapshots, n):
    """Dominant left singular vectors of a snapshot matrix.

    Raises ValueError when ``n`` exceeds the numerical rank; the message
    names the achievable rank.
    """
    snapshots = np.asarray(snapshots, dtype=np.float64)
    if snapshots.ndim != 2:
        raise ValueError("snapshot matrix must be 2D")
    if n < 1:
        raise ValueError("reduced dimension must be at least 1")
    u, s, _ = np.linalg.svd(snapshots, full_matrices=False)
    rank = int(np.count_nonzero(s > PINV_RCOND * s[0])) if s.size else 0
    if n > rank:
        raise ValueError(
            f"requested dimension {n} exceeds the numerical snapshot rank "
            f"{rank}")
    return fix_column_signs(u[:, :n])


def pod_projection_error(snapshots, basis):
    """Frobenius norm of the out-of-subspace part of the snapshots."""
    resid = snapshots - basis @ (basis.T @ snapshots)
    return np.linalg.norm(resid)


def qdeim_points(basis, num_points=None):
    """Interpolation points by greedy column-pivoted QR of the basis
    transpose (Businger-Golub pivoting; the first n pivot indices).

    ``num_points`` defaults to the basis dimension n; values above n
    oversample by appending the not-yet-selected rows with the largest
    basis row norms (leverage), in descending order.
    """
    basis = np.asarray(basis, dtype=np.float64)
    n = basis.shape[1]
    m = n if num_points is None else int(num_points)
    if not n <= m <= basis.shape[0]:
        raise ValueError("point count must lie between n and N")
    # Work on B = basis^T and greedily pick the largest-residual-norm column,
    # orthogonalizing the rest against it (classic pivoted-QR recursion).
    work = basis.T.copy()
    norms2 = np.einsum("ij,ij->j", work, work)
    points = np.empty(m, dtype=np.int64)
    for i in range(n):
        piv = int(np.argmax(norms2))
        if norms2[piv] <= 0.0 or not np.isfinite(norms2[piv]):
            raise ValueError(
                f"pivot block numerically singular after {i} points")
        points[i] = piv
        col = work[:, piv].copy()
        col /= np.linalg.norm(col)
        proj = col @ work
        work -= np.outer(col, proj)
        norms2 = np.einsum("ij,ij->j", work, work)
        norms2[points[:i + 1]] = -1.0
    if m > n:
        leverage = np.einsum("ij,ij->i", basis, basis)
        leverage[points[:n]] = -1.0
        extra = np.argsort(-leverage, kind="stable")[:m - n]
        points[n:] = extra
    return points


def eim_reconstruct(basis, points, sampled):
    """Lift values sampled at ``points`` back to a full vector.

    Computes basis @ pinv(basis[points, :]) @ sampled; exact for vectors in
    the basis span when sampled consistently, least squares when
    oversampled.
    """
    basis = np.asarray(basis, dtype=np.float64)
    points = np.asarray(points, dtype=np.int64)
    sampled = np.asarray(sampled, dtype=np.float64)
    if points.shape[0] < basis.shape[1]:
        raise ValueError(
            f"need at least n={basis.shape[1]} points, got {points.shape[0]}")
    coef = interpolation_coefficients(basis, points, sampled)
    return basis @ coef


def interpolation_coefficients(basis, points, sampled):
    """Solve basis[points, :] @ coef = sampled (least squares if
    oversampled)."""
    rows = basis[points, :]
    m, n = rows.shape
    if m == n:
        return scipy.linalg.solve(rows, sampled)
    coef, *_ = np.linalg.lstsq(rows, sampled, rcond=None)
    return coef


def _selected_map(model, basis, coef, rows):
    """Right-hand-side values and Jacobian-times-basis at the selected rows
    of the lifted state, lifting only the entries the row stencils touch.

    Returns (f_rows, jtv) with jtv[r, :] = (J(V coef) V)[rows[r], :].
    Models without the stencil interface fall back to full evaluation.
    """
    if hasattr(model, "stencil_cols"):
        is_eta, cols = model.stencil_cols(rows)
        vals = (basis[cols.ravel(), :] @ coef).reshape(cols.shape)
        f_rows = model.rhs_stencil_rows(is_eta, vals)
        derivs = model.jac_stencil_rows(is_eta, vals)
        jtv = np.einsum("rs,rsn->rn", derivs, basis[cols, :])
        return f_rows, jtv
    lifted = basis @ coef
    f_rows = model.rhs(lifted)[rows]
    jac = model.jacobian(lifted)
    jtv = np.asarray(jac[rows, :] @ basis)
    return f_rows, jtv


def rom_step(coef_prev, basis, points, model, dt, tol=NEWTON_TOL,
             max_iter=NEWTON_MAX_ITER):
    """One implicit-Euler step of the hyper-reduced model.

    Solves coef - dt * pinv(V[p, :]) @ rhs_rows(V coef, p) = coef_prev with
    Newton's method seeded at coef_prev; only the component functions at the
    interpolation points are evaluated. Steps are damped by backtracking on
    the residual norm (the reaction exponential makes undamped Newton
    overshoot hard during fast transients). Returns (coef, iterations).
    """
    coef_prev = np.asarray(coef_prev, dtype=np.float64)
    points = np.asarray(points, dtype=np.int64)
    n = basis.shape[1]
    m = points.shape[0]
    if m < n:
        raise ValueError(f"need at least n={n} interpolation points")
    rows = basis[points, :]
    if m == n:
        lu = scipy.linalg.lu_factor(rows, check_finite=False)
        solve_rows = lambda y: scipy.linalg.lu_solve(lu, y, check_finite=False)
    else:
        pinv = np.linalg.pinv(rows, rcond=PINV_RCOND)
        solve_rows = lambda y: pinv @ y

    def residual(c):
        f_rows, jtv = _selected_map(model, basis, c, points)
        return c - dt * solve_rows(f_rows) - coef_prev, jtv

    coef = coef_prev.copy()
    res, jtv = residual(coef)
    rnorm = np.linalg.norm(res)
    residuals = [rnorm]
    for it in range(1, max_iter + 1):
        if not np.isfinite(rnorm):
            raise NewtonError(
                f"reduced Newton residual non-finite at iteration {it - 1}",
                residuals)
        if rnorm <= tol:
            return coef, it - 1
        newton_mat = np.eye(n) - dt * solve_rows(jtv)
        delta = np.linalg.solve(newton_mat, res)
        step = 1.0
        for _ in range(30):
            cand = coef - step * delta
            cand_res, cand_jtv = residual(cand)
            cand_norm = np.linalg.norm(cand_res)
            if np.isfinite(cand_norm) and cand_norm < rnorm:
                break
            step *= 0.5
        else:
            raise NewtonError(
                f"reduced Newton line search stalled at iteration {it} "
                f"(residual {rnorm:.3e})", residuals)
        coef, res, jtv, rnorm = cand, cand_res, cand_jtv, cand_norm
        residuals.append(rnorm)
    if rnorm <= tol:
        return coef, max_iter
    raise NewtonError(
        f"reduced Newton did not converge in {max_iter} iterations "
        f"(last residual {residuals[-1]:.3e})", residuals)


def galerkin_step(coef_prev, basis, model, dt, tol=NEWTON_TOL,
                  max_iter=NEWTON_MAX_ITER):
    """One implicit-Euler step of the plain Galerkin reduced model.

    Solves coef - dt * V^T rhs(V coef) = coef_prev with damped Newton. The
    right-hand side is evaluated at all N components, so this costs like a
    full evaluation per iteration; the driver uses it as a rescue when the
    interpolated system of rom_step loses solvability during fast
    transients.
    """
    coef_prev = np.asarray(coef_prev, dtype=np.float64)
    n = basis.shape[1]

    def residual(c):
        lifted = basis @ c
        res = c - dt * (basis.T @ model.rhs(lifted)) - coef_prev
        jac = model.jacobian(lifted)
        jtv = np.asarray(jac @ basis)
        return res, jtv

    coef = coef_prev.copy()
    res, jtv = residual(coef)
    rnorm = np.linalg.norm(res)
    residuals = [rnorm]
    for it in range(1, max_iter + 1):
        if not np.isfinite(rnorm):
            raise NewtonError(
                f"Galerkin Newton residual non-finite at iteration {it - 1}",
                residuals)
        if rnorm <= tol:
            return coef, it - 1
        newton_mat = np.eye(n) - dt * (basis.T @ jtv)
        delta = np.linalg.solve(newton_mat, res)
        step = 1.0
        for _ in range(30):
            cand = coef - step * delta
            cand_res, cand_jtv = residual(cand)
            cand_norm = np.linalg.norm(cand_res)
            if np.isfinite(cand_norm) and cand_norm < rnorm:
                break
            step *= 0.5
        else:
            raise NewtonError(
                f"Galerkin Newton line search stalled at iteration {it} "
                f"(residual {rnorm:.3e})", residuals)
        coef, res, jtv, rnorm = cand, cand_res, cand_jtv, cand_norm
        residuals.append(rnorm)
    if rnorm <= tol:
        return coef, max_iter
    raise NewtonError(
        f"Galerkin Newton did not converge in {max_iter} iterations "
        f"(last residual {residuals[-1]:.3e})", residuals)
