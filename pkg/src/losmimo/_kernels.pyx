# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled phase kernels (hot inner loops).

Same contracts as `_kernels_py`; Fresnel phases use C `long double`
arithmetic with mod-2*pi reduction before the trig calls.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "math.h" nogil:
    long double cosl(long double)
    long double sinl(long double)
    long double rintl(long double)
    double cos(double)
    double sin(double)

# 2*pi as an exact double hi/lo pair summed in long double
cdef long double TWO_PI_L = <long double>6.283185307179586 + <long double>2.4492935982947064e-16

BACKEND_NAME = "compiled"


cdef inline void _phasor(long double theta, double complex *out) nogil:
    theta = theta - TWO_PI_L * rintl(theta / TWO_PI_L)
    out[0] = <double>cosl(theta) + 1j * <double>sinl(theta)


def fresnel_phase_matrix(tx_in, rx_in, double range_d, double lam):
    """Full coupling matrix exp(-i*2*pi*d_ij/lam) on the parabolic path-length form."""
    cdef double[:, ::1] tx = np.ascontiguousarray(tx_in, dtype=np.float64)
    cdef double[:, ::1] rx = np.ascontiguousarray(rx_in, dtype=np.float64)
    cdef Py_ssize_t mr = rx.shape[0], mt = tx.shape[0], i, j
    cdef long double inv_lam = <long double>1.0 / <long double>lam
    cdef long double half_inv_d = <long double>0.5 / <long double>range_d
    cdef long double dx, dy, dz, path, theta
    out = np.empty((mr, mt), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for i in range(mr):
            for j in range(mt):
                dx = <long double>rx[i, 0] - <long double>tx[j, 0]
                dy = <long double>rx[i, 1] - <long double>tx[j, 1]
                dz = <long double>rx[i, 2] - <long double>tx[j, 2]
                path = dx + (dy * dy + dz * dz) * half_inv_d
                theta = -TWO_PI_L * (path * inv_lam)
                _phasor(theta, &o[i, j])
    return out


def lateral_phase_vector(pts_in, double range_d, double lam, int sign):
    """Rank-one Fresnel factor exp(-i*(2*pi/lam)*(x + sign*(y^2+z^2)/(2*range_d)))."""
    cdef double[:, ::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0], i
    cdef long double inv_lam = <long double>1.0 / <long double>lam
    cdef long double half_inv_d = <long double>0.5 / <long double>range_d
    cdef long double quad, theta
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for i in range(m):
            quad = (<long double>pts[i, 1] * <long double>pts[i, 1]
                    + <long double>pts[i, 2] * <long double>pts[i, 2]) * half_inv_d
            theta = -TWO_PI_L * ((<long double>pts[i, 0] + <long double>sign * quad) * inv_lam)
            _phasor(theta, &o[i])
    return out


def fourier_phase_matrix(tx_in, rx_in, double inv_lambda_d):
    """Planar Fourier kernel exp(+i*2*pi*<rx_i, tx_j>/(lam*d)), shape (len(rx), len(tx))."""
    cdef double[:, ::1] tx = np.ascontiguousarray(tx_in, dtype=np.float64)
    cdef double[:, ::1] rx = np.ascontiguousarray(rx_in, dtype=np.float64)
    cdef Py_ssize_t mr = rx.shape[0], mt = tx.shape[0], i, j
    cdef double scale = 2.0 * np.pi * inv_lambda_d
    cdef double theta
    out = np.empty((mr, mt), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for i in range(mr):
            for j in range(mt):
                theta = scale * (rx[i, 0] * tx[j, 0] + rx[i, 1] * tx[j, 1])
                o[i, j] = cos(theta) + 1j * sin(theta)
    return out


def fourier_phase_matrices(tx_in, rx_in, double inv_lambda_d):
    """Batched form of `fourier_phase_matrix`: (B, M, 2) x (B, M, 2) -> (B, M, M)."""
    cdef double[:, :, ::1] tx = np.ascontiguousarray(tx_in, dtype=np.float64)
    cdef double[:, :, ::1] rx = np.ascontiguousarray(rx_in, dtype=np.float64)
    cdef Py_ssize_t b = rx.shape[0], mr = rx.shape[1], mt = tx.shape[1], k, i, j
    cdef double scale = 2.0 * np.pi * inv_lambda_d
    cdef double theta
    out = np.empty((b, mr, mt), dtype=np.complex128)
    cdef double complex[:, :, ::1] o = out
    with nogil:
        for k in range(b):
            for i in range(mr):
                for j in range(mt):
                    theta = scale * (rx[k, i, 0] * tx[k, j, 0] + rx[k, i, 1] * tx[k, j, 1])
                    o[k, i, j] = cos(theta) + 1j * sin(theta)
    return out
