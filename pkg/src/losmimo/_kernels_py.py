"""Pure-NumPy phase kernels (fallback backend).

Mirrors the compiled extension in `_kernels.pyx` operation for operation.
Fresnel phases are accumulated in extended precision (`np.longdouble`) and
reduced modulo 2*pi before exponentiation: the lateral common-phase terms can
reach 1e7 rad, which plain double arithmetic cannot carry at the 1e-10 rad
level the factorization tests require.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_TWO_PI_L = np.longdouble("6.283185307179586476925286766559005768")


def _unit_phasor(theta_l: np.ndarray) -> np.ndarray:
    """exp(i*theta) for a longdouble phase array, reduced mod 2*pi, as complex128."""
    theta_l = theta_l - _TWO_PI_L * np.rint(theta_l / _TWO_PI_L)
    out = np.empty(theta_l.shape, dtype=np.complex128)
    out.real = np.cos(theta_l).astype(np.float64)
    out.imag = np.sin(theta_l).astype(np.float64)
    return out


def fresnel_phase_matrix(tx: np.ndarray, rx: np.ndarray, range_d: float, lam: float) -> np.ndarray:
    """Full coupling matrix exp(-i*2*pi*d_ij/lam) on the parabolic path-length form.

    d_ij = (x_R - x_T) + ((y_R - y_T)^2 + (z_R - z_T)^2) / (2*range_d); the
    common separation `range_d` itself is never added to the phase argument.
    """
    txl = np.asarray(tx, dtype=np.longdouble)
    rxl = np.asarray(rx, dtype=np.longdouble)
    inv_lam = np.longdouble(1.0) / np.longdouble(lam)
    half_inv_d = np.longdouble(0.5) / np.longdouble(range_d)

    dx = rxl[:, 0][:, None] - txl[:, 0][None, :]
    dy = rxl[:, 1][:, None] - txl[:, 1][None, :]
    dz = rxl[:, 2][:, None] - txl[:, 2][None, :]
    path = dx + (dy * dy + dz * dz) * half_inv_d
    theta = -_TWO_PI_L * (path * inv_lam)
    return _unit_phasor(theta)


def lateral_phase_vector(pts: np.ndarray, range_d: float, lam: float, sign: int) -> np.ndarray:
    """Rank-one Fresnel factor exp(-i*(2*pi/lam)*(x + sign*(y^2+z^2)/(2*range_d))).

    sign=+1 gives the receive-side vector, sign=-1 the transmit-side one.
    """
    ptsl = np.asarray(pts, dtype=np.longdouble)
    inv_lam = np.longdouble(1.0) / np.longdouble(lam)
    half_inv_d = np.longdouble(0.5) / np.longdouble(range_d)
    quad = (ptsl[:, 1] ** 2 + ptsl[:, 2] ** 2) * half_inv_d
    theta = -_TWO_PI_L * ((ptsl[:, 0] + np.longdouble(sign) * quad) * inv_lam)
    return _unit_phasor(theta)


def fourier_phase_matrix(tx: np.ndarray, rx: np.ndarray, inv_lambda_d: float) -> np.ndarray:
    """Planar Fourier kernel exp(+i*2*pi*<rx_i, tx_j>/(lam*d)), shape (len(rx), len(tx))."""
    tx = np.ascontiguousarray(tx, dtype=np.float64)
    rx = np.ascontiguousarray(rx, dtype=np.float64)
    dots = rx[:, 0][:, None] * tx[:, 0][None, :] + rx[:, 1][:, None] * tx[:, 1][None, :]
    theta = (2.0 * np.pi * inv_lambda_d) * dots
    out = np.empty(theta.shape, dtype=np.complex128)
    out.real = np.cos(theta)
    out.imag = np.sin(theta)
    return out


def fourier_phase_matrices(tx: np.ndarray, rx: np.ndarray, inv_lambda_d: float) -> np.ndarray:
    """Batched form of `fourier_phase_matrix`: (B, M, 2) x (B, M, 2) -> (B, M, M)."""
    tx = np.ascontiguousarray(tx, dtype=np.float64)
    rx = np.ascontiguousarray(rx, dtype=np.float64)
    theta = (2.0 * np.pi * inv_lambda_d) * np.einsum("bik,bjk->bij", rx, tx)
    out = np.empty(theta.shape, dtype=np.complex128)
    out.real = np.cos(theta)
    out.imag = np.sin(theta)
    return out
