"""Coupling-matrix construction and singular-value extraction.

The full matrix H carries the complete parabolic phase; the reduced matrix
H-tilde keeps only the transverse Fourier kernel. The two differ by a
rank-one phase dyad (unit-modulus diagonal factors on both sides), so their
singular values coincide; `hadamard_factors` exposes that factorization and
`singular_spectrum` is the single spectral primitive (SVD, never an
eigendecomposition of H H*).

The matrices here are the normalized phase-only couplings: all per-pair
amplitude is absorbed into the channel gain g / M^2 of the signal model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .backend import kernels
from .errors import InvariantViolation, NumericalFailure
from .geometry import DiscCluster, NodeCluster, check_range_ratio

UNIT_MODULUS_TOL = 1e-12
NORM_CONSISTENCY_RTOL = 1e-9


class MatrixKind(Enum):
    FULL = "full"
    REDUCED = "reduced"
    DISCRETIZED = "discretized"


class SpectrumContext(Enum):
    MATRIX_SINGULAR = "matrix_singular"
    OPERATOR_EIGEN = "operator_eigen"
    RADIAL_EIGEN = "radial_eigen"


@dataclass(frozen=True)
class ChannelMatrix:
    """Square complex coupling matrix with provenance metadata."""

    entries: np.ndarray
    kind: MatrixKind
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        entries = np.ascontiguousarray(np.asarray(self.entries, dtype=np.complex128))
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise InvariantViolation("ChannelMatrix must be square with M >= 1")
        if self.kind in (MatrixKind.FULL, MatrixKind.REDUCED):
            mods = np.abs(entries)
            err = float(np.abs(mods - 1.0).max())
            if err > UNIT_MODULUS_TOL:
                raise InvariantViolation(
                    f"ChannelMatrix invariant: {self.kind.value} entries must be unit modulus "
                    f"(max deviation {err:.3e})"
                )

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenSpectrum:
    """Non-increasing nonnegative squared magnitudes with their total."""

    values: np.ndarray
    norm_sq: float
    context: SpectrumContext
    modes: tuple = ()  # optional (order, radial-index) labels, aligned with values

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise InvariantViolation("EigenSpectrum.values must be a non-empty 1-D array")
        if np.any(values < -1e-15):
            raise InvariantViolation("EigenSpectrum.values must be nonnegative")
        if np.any(np.diff(values) > 1e-12 * max(1.0, values[0])):
            raise InvariantViolation("EigenSpectrum.values must be non-increasing")
        total = float(values.sum())
        if abs(total - self.norm_sq) > NORM_CONSISTENCY_RTOL * max(1.0, abs(self.norm_sq)):
            raise InvariantViolation(
                f"EigenSpectrum invariant: norm_sq {self.norm_sq!r} != sum of values {total!r}"
            )
        if self.modes and len(self.modes) != values.size:
            raise InvariantViolation("EigenSpectrum.modes must align with values")

    @property
    def count(self) -> int:
        return self.values.size


def build_full_matrix(tx: NodeCluster, rx: NodeCluster, d: float, lam: float) -> ChannelMatrix:
    """H with entries exp(-i*2*pi*d_ij/lam), d_ij in the parabolic form.

    The phase is computed from coordinate differences in extended precision;
    the common separation d never enters the argument, so no accuracy is lost
    to the ~1e13-rad absolute path phase.
    """
    if tx.count != rx.count:
        raise InvariantViolation("full matrix requires equally sized tx and rx clusters")
    check_range_ratio(tx, rx, d)
    h = kernels.fresnel_phase_matrix(tx.nodes, rx.nodes, float(d), float(lam))
    meta = {"lambda_m": float(lam), "range_m": float(d), "tx_count": tx.count, "rx_count": rx.count}
    return ChannelMatrix(entries=h, kind=MatrixKind.FULL, meta=meta)


def build_reduced_matrix(tx: DiscCluster, rx: DiscCluster, lam: float, d: float) -> ChannelMatrix:
    """H-tilde with entries exp(+i*2*pi*(y_R*y_T + z_R*z_T)/(lam*d))."""
    if tx.count != rx.count:
        raise InvariantViolation("reduced matrix requires equally sized tx and rx clusters")
    h = kernels.fourier_phase_matrix(tx.nodes, rx.nodes, 1.0 / (float(lam) * float(d)))
    meta = {"lambda_m": float(lam), "range_m": float(d), "tx_count": tx.count, "rx_count": rx.count}
    return ChannelMatrix(entries=h, kind=MatrixKind.REDUCED, meta=meta)


def hadamard_factors(tx: NodeCluster, rx: NodeCluster, lam: float, d: float):
    """Unit-modulus vectors (h_T, h_R) of the rank-one phase dyad.

    They satisfy H = diag(h_R) @ H_tilde @ diag(conj(h_T)) entrywise against
    `build_full_matrix` on the same clusters.
    """
    check_range_ratio(tx, rx, d)
    h_t = kernels.lateral_phase_vector(tx.nodes, float(d), float(lam), -1)
    h_r = kernels.lateral_phase_vector(rx.nodes, float(d), float(lam), +1)
    return h_t, h_r


def singular_spectrum(matrix: ChannelMatrix) -> EigenSpectrum:
    """Squared singular values of the matrix, non-increasing."""
    try:
        sv = np.linalg.svd(matrix.entries, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge for {matrix.kind.value} matrix") from exc
    values = np.asarray(sv, dtype=np.float64) ** 2
    return EigenSpectrum(
        values=values, norm_sq=float(values.sum()), context=SpectrumContext.MATRIX_SINGULAR
    )
