# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled point kernels for the 1D detonation-wave model.

Mirrors the expression order of the numpy reference in ``_ref.py``; see that
module for the governing formulas. Differences between backends are limited
to rounding of transcendental functions (at most ~1 ulp per exp call).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

BACKEND = "compiled"


def rhs_full(cnp.ndarray[cnp.float64_t, ndim=1] q, Py_ssize_t M,
             double dx, double nu, double k_pre, double alpha, double eta_c,
             double eta_p, double r, double eps, double mu):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(2 * M, dtype=np.float64)
    cdef double idx = 1.0 / dx
    cdef double c = nu / (dx * dx)
    cdef Py_ssize_t j, jm, jp
    cdef double eta, eta_m, eta_pv, lam, lam_m, lam_p, omega, beta, dxe
    for j in range(M):
        jm = j - 1 if j > 0 else M - 1
        jp = j + 1 if j < M - 1 else 0
        eta = q[j]
        eta_m = q[jm]
        eta_pv = q[jp]
        lam = q[M + j]
        lam_m = q[M + jm]
        lam_p = q[M + jp]
        omega = k_pre * exp((eta - eta_c) / alpha)
        beta = mu / (1.0 + exp(r * (eta - eta_p)))
        if eta >= 0.0:
            dxe = (eta - eta_m) * idx
        else:
            dxe = (eta_pv - eta) * idx
        out[j] = -eta * dxe + c * (eta_m - 2.0 * eta + eta_pv) \
            + (1.0 - lam) * omega - eps * eta
        out[M + j] = c * (lam_m - 2.0 * lam + lam_p) + (1.0 - lam) * omega \
            - beta * lam
    return out


def rhs_rows(cnp.ndarray[cnp.float64_t, ndim=1] q,
             cnp.ndarray[cnp.int64_t, ndim=1] rows, Py_ssize_t M,
             double dx, double nu, double k_pre, double alpha, double eta_c,
             double eta_p, double r, double eps, double mu):
    cdef Py_ssize_t m = rows.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double idx = 1.0 / dx
    cdef double c = nu / (dx * dx)
    cdef Py_ssize_t i, row, j, jm, jp
    cdef double eta, eta_m, eta_pv, lam, lam_m, lam_p, omega, beta, dxe
    for i in range(m):
        row = rows[i]
        if row < M:
            j = row
            jm = j - 1 if j > 0 else M - 1
            jp = j + 1 if j < M - 1 else 0
            eta = q[j]
            eta_m = q[jm]
            eta_pv = q[jp]
            lam = q[M + j]
            omega = k_pre * exp((eta - eta_c) / alpha)
            if eta >= 0.0:
                dxe = (eta - eta_m) * idx
            else:
                dxe = (eta_pv - eta) * idx
            out[i] = -eta * dxe + c * (eta_m - 2.0 * eta + eta_pv) \
                + (1.0 - lam) * omega - eps * eta
        else:
            j = row - M
            jm = j - 1 if j > 0 else M - 1
            jp = j + 1 if j < M - 1 else 0
            lam = q[M + j]
            lam_m = q[M + jm]
            lam_p = q[M + jp]
            eta = q[j]
            omega = k_pre * exp((eta - eta_c) / alpha)
            beta = mu / (1.0 + exp(r * (eta - eta_p)))
            out[i] = c * (lam_m - 2.0 * lam + lam_p) + (1.0 - lam) * omega \
                - beta * lam
    return out


def jac_coeffs(cnp.ndarray[cnp.float64_t, ndim=1] q, Py_ssize_t M,
               double dx, double nu, double k_pre, double alpha, double eta_c,
               double eta_p, double r, double eps, double mu):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ee_m = np.empty(M, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ee_d = np.empty(M, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ee_p = np.empty(M, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] el_d = np.empty(M, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] le_d = np.empty(M, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ll_d = np.empty(M, dtype=np.float64)
    cdef double idx = 1.0 / dx
    cdef double c = nu / (dx * dx)
    cdef Py_ssize_t j, jm, jp
    cdef double eta, eta_m, eta_pv, lam, omega, beta, omega_d, beta_d, dxe
    for j in range(M):
        jm = j - 1 if j > 0 else M - 1
        jp = j + 1 if j < M - 1 else 0
        eta = q[j]
        eta_m = q[jm]
        eta_pv = q[jp]
        lam = q[M + j]
        omega = k_pre * exp((eta - eta_c) / alpha)
        beta = mu / (1.0 + exp(r * (eta - eta_p)))
        omega_d = omega / alpha
        beta_d = -r * beta * (1.0 - beta / mu)
        if eta >= 0.0:
            dxe = (eta - eta_m) * idx
            ee_m[j] = eta * idx + c
            ee_d[j] = -dxe - eta * idx - 2.0 * c + (1.0 - lam) * omega_d - eps
            ee_p[j] = c
        else:
            dxe = (eta_pv - eta) * idx
            ee_m[j] = c
            ee_d[j] = -dxe + eta * idx - 2.0 * c + (1.0 - lam) * omega_d - eps
            ee_p[j] = -eta * idx + c
        el_d[j] = -omega
        le_d[j] = (1.0 - lam) * omega_d - beta_d * lam
        ll_d[j] = -2.0 * c - omega - beta
    return ee_m, ee_d, ee_p, el_d, le_d, ll_d


def rhs_stencil(cnp.ndarray[cnp.npy_bool, ndim=1] is_eta,
                cnp.ndarray[cnp.float64_t, ndim=2] vals,
                double dx, double nu, double k_pre, double alpha, double eta_c,
                double eta_p, double r, double eps, double mu):
    cdef Py_ssize_t m = vals.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double idx = 1.0 / dx
    cdef double c = nu / (dx * dx)
    cdef Py_ssize_t i
    cdef double vm, v0, vp, w0, omega, beta, dxe
    for i in range(m):
        vm = vals[i, 0]
        v0 = vals[i, 1]
        vp = vals[i, 2]
        w0 = vals[i, 3]
        if is_eta[i]:
            omega = k_pre * exp((v0 - eta_c) / alpha)
            if v0 >= 0.0:
                dxe = (v0 - vm) * idx
            else:
                dxe = (vp - v0) * idx
            out[i] = -v0 * dxe + c * (vm - 2.0 * v0 + vp) \
                + (1.0 - w0) * omega - eps * v0
        else:
            omega = k_pre * exp((w0 - eta_c) / alpha)
            beta = mu / (1.0 + exp(r * (w0 - eta_p)))
            out[i] = c * (vm - 2.0 * v0 + vp) + (1.0 - v0) * omega - beta * v0
    return out


def jac_stencil(cnp.ndarray[cnp.npy_bool, ndim=1] is_eta,
                cnp.ndarray[cnp.float64_t, ndim=2] vals,
                double dx, double nu, double k_pre, double alpha, double eta_c,
                double eta_p, double r, double eps, double mu):
    cdef Py_ssize_t m = vals.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, 4), dtype=np.float64)
    cdef double idx = 1.0 / dx
    cdef double c = nu / (dx * dx)
    cdef Py_ssize_t i
    cdef double vm, v0, vp, w0, omega, beta, omega_d, beta_d, dxe
    for i in range(m):
        vm = vals[i, 0]
        v0 = vals[i, 1]
        vp = vals[i, 2]
        w0 = vals[i, 3]
        if is_eta[i]:
            omega = k_pre * exp((v0 - eta_c) / alpha)
            omega_d = omega / alpha
            if v0 >= 0.0:
                dxe = (v0 - vm) * idx
                out[i, 0] = v0 * idx + c
                out[i, 1] = -dxe - v0 * idx - 2.0 * c + (1.0 - w0) * omega_d - eps
                out[i, 2] = c
            else:
                dxe = (vp - v0) * idx
                out[i, 0] = c
                out[i, 1] = -dxe + v0 * idx - 2.0 * c + (1.0 - w0) * omega_d - eps
                out[i, 2] = -v0 * idx + c
            out[i, 3] = -omega
        else:
            omega = k_pre * exp((w0 - eta_c) / alpha)
            beta = mu / (1.0 + exp(r * (w0 - eta_p)))
            omega_d = omega / alpha
            beta_d = -r * beta * (1.0 - beta / mu)
            out[i, 0] = c
            out[i, 1] = -2.0 * c - omega - beta
            out[i, 2] = c
            out[i, 3] = (1.0 - v0) * omega_d - beta_d * v0
    return out
