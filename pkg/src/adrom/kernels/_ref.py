"""Pure-numpy reference implementation of the hot point kernels.

All kernels operate on the stacked state layout ``q = [eta_0..eta_{M-1},
lam_0..lam_{M-1}]`` of length ``N = 2M`` on a periodic grid with spacing
``dx``. The semi-discrete equations per grid point are

    d eta/dt = -eta * D_x eta  (first-order upwind, wind speed eta)
               + nu * D_xx eta (central 3-point)
               + (1 - lam) * omega(eta) - eps * eta
    d lam/dt = nu * D_xx lam + (1 - lam) * omega(eta) - beta(eta) * lam

with omega(eta) = k_pre * exp((eta - eta_c)/alpha) and
beta(eta) = mu / (1 + exp(r*(eta - eta_p))).

The compiled twin in ``_core.pyx`` follows the same expression order so that
both backends agree to rounding (exp may differ by 1 ulp between libm and
numpy's vectorized implementation).
"""

import numpy as np

BACKEND = "python"


def rhs_full(q, M, dx, nu, k_pre, alpha, eta_c, eta_p, r, eps, mu):
    """Evaluate all N = 2M components of the right-hand side."""
    eta = q[:M]
    lam = q[M:]
    idx = 1.0 / dx
    c = nu / (dx * dx)

    eta_m = np.roll(eta, 1)
    eta_p_ = np.roll(eta, -1)
    lam_m = np.roll(lam, 1)
    lam_p = np.roll(lam, -1)

    with np.errstate(over="ignore"):
        omega = k_pre * np.exp((eta - eta_c) / alpha)
        beta = mu / (1.0 + np.exp(r * (eta - eta_p)))
    dxe = np.where(eta >= 0.0, (eta - eta_m) * idx, (eta_p_ - eta) * idx)

    out = np.empty_like(q)
    out[:M] = -eta * dxe + c * (eta_m - 2.0 * eta + eta_p_) \
        + (1.0 - lam) * omega - eps * eta
    out[M:] = c * (lam_m - 2.0 * lam + lam_p) + (1.0 - lam) * omega - beta * lam
    return out


def rhs_rows(q, rows, M, dx, nu, k_pre, alpha, eta_c, eta_p, r, eps, mu):
    """Evaluate only the components of the right-hand side listed in ``rows``.

    ``rows`` are stacked-layout indices; the output is ordered like ``rows``.
    """
    rows = np.asarray(rows)
    idx = 1.0 / dx
    c = nu / (dx * dx)
    out = np.empty(rows.shape[0], dtype=q.dtype)

    is_eta = rows < M
    j = np.where(is_eta, rows, rows - M)
    jm = j - 1
    jm[jm < 0] = M - 1
    jp = j + 1
    jp[jp == M] = 0

    je = j[is_eta]
    eta = q[je]
    eta_m = q[jm[is_eta]]
    eta_p_ = q[jp[is_eta]]
    lam_at = q[M + je]
    with np.errstate(over="ignore"):
        omega = k_pre * np.exp((eta - eta_c) / alpha)
    dxe = np.where(eta >= 0.0, (eta - eta_m) * idx, (eta_p_ - eta) * idx)
    out[is_eta] = -eta * dxe + c * (eta_m - 2.0 * eta + eta_p_) \
        + (1.0 - lam_at) * omega - eps * eta

    is_lam = ~is_eta
    jl = j[is_lam]
    lam = q[M + jl]
    lam_m = q[M + jm[is_lam]]
    lam_p = q[M + jp[is_lam]]
    eta_at = q[jl]
    with np.errstate(over="ignore"):
        omega_l = k_pre * np.exp((eta_at - eta_c) / alpha)
        beta_l = mu / (1.0 + np.exp(r * (eta_at - eta_p)))
    out[is_lam] = c * (lam_m - 2.0 * lam + lam_p) + (1.0 - lam) * omega_l \
        - beta_l * lam
    return out


def jac_coeffs(q, M, dx, nu, k_pre, alpha, eta_c, eta_p, r, eps, mu):
    """Per-grid-point Jacobian coefficients of the right-hand side.

    Returns six length-M arrays

        ee_m, ee_d, ee_p : d(eta eq)/d eta_{j-1}, /d eta_j, /d eta_{j+1}
        el_d             : d(eta eq)/d lam_j
        le_d             : d(lam eq)/d eta_j
        ll_d             : d(lam eq)/d lam_j

    The lam-equation neighbor couplings are the constant nu/dx^2 and are not
    returned. The upwind switch uses the active branch at eta_j = 0.
    """
    eta = q[:M]
    lam = q[M:]
    idx = 1.0 / dx
    c = nu / (dx * dx)

    eta_m = np.roll(eta, 1)
    eta_p_ = np.roll(eta, -1)

    with np.errstate(over="ignore"):
        omega = k_pre * np.exp((eta - eta_c) / alpha)
        beta = mu / (1.0 + np.exp(r * (eta - eta_p)))
    omega_d = omega / alpha
    beta_d = -r * beta * (1.0 - beta / mu)
    up = eta >= 0.0
    dxe = np.where(up, (eta - eta_m) * idx, (eta_p_ - eta) * idx)

    ee_m = np.where(up, eta * idx, 0.0) + c
    ee_d = -dxe - np.where(up, eta * idx, -eta * idx) - 2.0 * c \
        + (1.0 - lam) * omega_d - eps
    ee_p = np.where(up, 0.0, -eta * idx) + c
    el_d = -omega
    le_d = (1.0 - lam) * omega_d - beta_d * lam
    ll_d = -2.0 * c - omega - beta
    return ee_m, ee_d, ee_p, el_d, le_d, ll_d


def rhs_stencil(is_eta, vals, dx, nu, k_pre, alpha, eta_c, eta_p, r, eps, mu):
    """Right-hand-side components from gathered stencil values.

    ``vals`` has one row per requested component: for an eta row the columns
    are (eta_{j-1}, eta_j, eta_{j+1}, lam_j); for a lam row they are
    (lam_{j-1}, lam_j, lam_{j+1}, eta_j). ``is_eta`` marks eta rows.
    """
    idx = 1.0 / dx
    c = nu / (dx * dx)
    vm, v0, vp, w0 = vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3]
    out = np.empty(vals.shape[0], dtype=vals.dtype)

    eta, lam_at = v0[is_eta], w0[is_eta]
    eta_m, eta_p_ = vm[is_eta], vp[is_eta]
    with np.errstate(over="ignore"):
        omega = k_pre * np.exp((eta - eta_c) / alpha)
    dxe = np.where(eta >= 0.0, (eta - eta_m) * idx, (eta_p_ - eta) * idx)
    out[is_eta] = -eta * dxe + c * (eta_m - 2.0 * eta + eta_p_) \
        + (1.0 - lam_at) * omega - eps * eta

    is_lam = ~is_eta
    lam, eta_at = v0[is_lam], w0[is_lam]
    lam_m, lam_p = vm[is_lam], vp[is_lam]
    with np.errstate(over="ignore"):
        omega_l = k_pre * np.exp((eta_at - eta_c) / alpha)
        beta_l = mu / (1.0 + np.exp(r * (eta_at - eta_p)))
    out[is_lam] = c * (lam_m - 2.0 * lam + lam_p) + (1.0 - lam) * omega_l \
        - beta_l * lam
    return out


def jac_stencil(is_eta, vals, dx, nu, k_pre, alpha, eta_c, eta_p, r, eps, mu):
    """Jacobian entries aligned with the stencil columns of ``rhs_stencil``.

    Row i of the result holds d(component_i)/d(stencil column 0..3).
    """
    idx = 1.0 / dx
    c = nu / (dx * dx)
    vm, v0, vp, w0 = vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3]
    out = np.empty((vals.shape[0], 4), dtype=vals.dtype)

    eta, lam_at = v0[is_eta], w0[is_eta]
    eta_m, eta_p_ = vm[is_eta], vp[is_eta]
    with np.errstate(over="ignore"):
        omega = k_pre * np.exp((eta - eta_c) / alpha)
    omega_d = omega / alpha
    up = eta >= 0.0
    dxe = np.where(up, (eta - eta_m) * idx, (eta_p_ - eta) * idx)
    out[is_eta, 0] = np.where(up, eta * idx, 0.0) + c
    out[is_eta, 1] = -dxe - np.where(up, eta * idx, -eta * idx) - 2.0 * c \
        + (1.0 - lam_at) * omega_d - eps
    out[is_eta, 2] = np.where(up, 0.0, -eta * idx) + c
    out[is_eta, 3] = -omega

    is_lam = ~is_eta
    lam, eta_at = v0[is_lam], w0[is_lam]
    with np.errstate(over="ignore"):
        omega_l = k_pre * np.exp((eta_at - eta_c) / alpha)
        beta_l = mu / (1.0 + np.exp(r * (eta_at - eta_p)))
    omega_ld = omega_l / alpha
    beta_ld = -r * beta_l * (1.0 - beta_l / mu)
    out[is_lam, 0] = c
    out[is_lam, 1] = -2.0 * c - omega_l - beta_l
    out[is_lam, 2] = c
    out[is_lam, 3] = (1.0 - lam) * omega_ld - beta_ld * lam
    return out
