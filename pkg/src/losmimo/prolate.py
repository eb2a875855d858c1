"""Generalized 2-D (circular) prolate eigenproblem via Nystrom discretization.

The transverse coupling operator on a disc of radius R separates in polar
coordinates into independent radial integral equations, one per azimuthal
order n:

    beta * T(r) = integral_0^1 J_n(c * r * r') * T(r') * r' dr',   c = 2*pi*R^2/(lam*d).

The r'-weighted kernel is not symmetric as written but becomes symmetric
under the similarity transform K_kl = sqrt(w_k r_k) J_n(c r_k r_l) sqrt(w_l r_l)
on a Gauss-Legendre grid, so a symmetric eigensolver applies. Operator
eigenvalues follow as alpha_{n,m} = 2*pi*i^n*beta_{n,m} (orders n != 0 appear
twice, once per sign), and the physical spectrum is
|nu|^2 = (L/(lam^2 d^2)) * R^4 * |alpha|^2.

Only magnitudes reach any capacity formula; the i^n phase is tracked solely
through the order label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.special import jv

from .channel import EigenSpectrum, SpectrumContext
from .errors import InvariantViolation, NumericalFailure
from .util import ceil_tol

#: Azimuthal orders are included until their leading |beta| drops below this
#: fraction of order 0's leading |beta|; radial modes are cut the same way.
TRUNCATION_RATIO = 1e-6

#: Nystrom self-convergence requirement on quadrature doubling.
CONVERGENCE_RTOL = 1e-6


@dataclass(frozen=True)
class ProlateProblem:
    """Dimensionless problem statement for one disc/wavelength/range combination."""

    c: float
    quadrature_order: int = 0  # 0 = auto (max(64, ceil(3 c)))
    max_azimuthal_order: int | None = None
    radial_modes_per_order: int | None = None

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise InvariantViolation("ProlateProblem.c must be positive")
        if self.quadrature_order < 0:
            raise InvariantViolation("quadrature_order must be nonnegative (0 = auto)")

    @property
    def effective_quadrature_order(self) -> int:
        if self.quadrature_order:
            return self.quadrature_order
        return max(64, int(math.ceil(3.0 * self.c)))

    @classmethod
    def from_geometry(cls, disc_radius_m: float, lam: float, d: float, **kw) -> "ProlateProblem":
        return cls(c=bandwidth_parameter(disc_radius_m, lam, d), **kw)


def bandwidth_parameter(disc_radius_m: float, lam: float, d: float) -> float:
    """c = 2*pi*R^2/(lam*d), the dimensionless kernel strength."""
    return 2.0 * math.pi * disc_radius_m**2 / (lam * d)


def dof_count(disc_radius_m: float, lam: float, d: float) -> int:
    """Degrees of freedom ceil((|S|/(lam d))^2) = ceil((c/2)^2)."""
    c = bandwidth_parameter(disc_radius_m, lam, d)
    return max(1, ceil_tol((c / 2.0) ** 2))


@lru_cache(maxsize=64)
def gauss_legendre_unit(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = 0.5 * (x + 1.0), 0.5 * w
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


@dataclass(frozen=True)
class RadialEigenpair:
    """One radial eigenvalue/eigenfunction on the quadrature grid.

    radial_values holds T(r_k) normalized so sum_k w_k r_k T(r_k)^2 = 1,
    i.e. unit weighted L2 norm on [0, 1].
    """

    order_n: int
    mode_m: int
    beta: float
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    radial_values: np.ndarray

    def interpolator(self) -> BarycentricInterpolator:
        """Evaluate the radial eigenfunction off-grid (barycentric on the GL nodes)."""
        return BarycentricInterpolator(self.radial_nodes, self.radial_values)


def radial_eigensystem(order_n: int, c: float, quadrature_order: int) -> list[RadialEigenpair]:
    """All Nystrom eigenpairs of azimuthal order `order_n`, sorted by |beta| descending."""
    if order_n < 0:
        raise InvariantViolation("order_n must be nonnegative")
    if c <= 0:
        raise InvariantViolation("c must be positive")
    if quadrature_order < max(16, ceil_tol(2.0 * c)):
        raise InvariantViolation(
            f"quadrature_order {quadrature_order} cannot resolve the kernel at c = {c:g}; "
            f"need >= max(16, 2c)"
        )
    r, w = gauss_legendre_unit(quadrature_order)
    s = np.sqrt(w * r)
    kernel = s[:, None] * jv(order_n, c * np.outer(r, r)) * s[None, :]
    try:
        beta, vec = np.linalg.eigh(kernel)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"radial eigensolver failed at order {order_n}, c = {c:g}") from exc
    order = np.argsort(-np.abs(beta))
    beta = beta[order]
    vec = vec[:, order]
    radial = vec / s[:, None]  # back to T(r_k); columns keep unit weighted norm
    return [
        RadialEigenpair(
            order_n=order_n,
            mode_m=m,
            beta=float(beta[m]),
            radial_nodes=r,
            radial_weights=w,
            radial_values=radial[:, m].copy(),
        )
        for m in range(quadrature_order)
    ]


def check_radial_convergence(order_n: int, c: float, quadrature_order: int, keep: int) -> float:
    """Max relative change of the `keep` leading |beta| when the grid doubles.

    Raises NumericalFailure if it exceeds CONVERGENCE_RTOL.
    """
    coarse = radial_eigensystem(order_n, c, quadrature_order)
    fine = radial_eigensystem(order_n, c, 2 * quadrature_order)
    b1 = np.array([abs(p.beta) for p in coarse[:keep]])
    b2 = np.array([abs(p.beta) for p in fine[:keep]])
    rel = float(np.max(np.abs(b1 - b2) / np.maximum(b2, 1e-300)))
    if rel > CONVERGENCE_RTOL:
        raise NumericalFailure(
            f"Nystrom kernel unresolved at order {order_n}, c = {c:g}: "
            f"leading beta moved by {rel:.2e} on quadrature doubling"
        )
    return rel


@dataclass(frozen=True)
class OperatorMode:
    """One operator eigenmode: signed azimuthal order plus its radial part."""

    order_n: int  # signed; +n and -n are distinct degenerate modes
    mode_m: int
    beta: float
    alpha_sq: float
    nu_sq: float
    radial: RadialEigenpair


def operator_modes(
    problem: ProlateProblem,
    loss_factor: float,
    disc_radius_m: float,
    lam: float,
    d: float,
) -> list[OperatorMode]:
    """Assembled operator modes, globally sorted by decreasing |nu|^2.

    Ties (the +-n degeneracy) break deterministically by (|n|, sign, m).
    Requires the problem's c to match 2*pi*R^2/(lam*d).
    """
    c_geo = bandwidth_parameter(disc_radius_m, lam, d)
    if abs(problem.c - c_geo) > 1e-9 * max(1.0, c_geo):
        raise InvariantViolation(
            f"problem c = {problem.c:g} inconsistent with geometry c = {c_geo:g}"
        )
    q = problem.effective_quadrature_order
    scale_nu = loss_factor / (lam * d) ** 2 * disc_radius_m**4  # |nu|^2 = scale * |alpha|^2

    modes: list[OperatorMode] = []
    lead0: float | None = None
    max_order = problem.max_azimuthal_order
    n = 0
    while True:
        pairs = radial_eigensystem(n, problem.c, q)
        lead = abs(pairs[0].beta)
        if lead0 is None:
            lead0 = lead
        if lead < TRUNCATION_RATIO * lead0 and n > 0:
            break
        keep = problem.radial_modes_per_order or q
        for pair in pairs[:keep]:
            if abs(pair.beta) < TRUNCATION_RATIO * lead0:
                break
            alpha_sq = 4.0 * math.pi**2 * pair.beta**2
            nu_sq = scale_nu * alpha_sq
            for signed in ((0,) if n == 0 else (n, -n)):
                modes.append(
                    OperatorMode(
                        order_n=signed,
                        mode_m=pair.mode_m,
                        beta=pair.beta,
                        alpha_sq=alpha_sq,
                        nu_sq=nu_sq,
                        radial=pair,
                    )
                )
        n += 1
        if max_order is not None and n > max_order:
            break
        if n > 4.0 * problem.c + 100:
            raise NumericalFailure(
                f"azimuthal truncation did not trigger by order {n} (c = {problem.c:g})"
            )

    modes.sort(key=lambda m: (-m.nu_sq, abs(m.order_n), -np.sign(m.order_n), m.mode_m))
    return modes


def spectrum_from_modes(modes: list[OperatorMode]) -> EigenSpectrum:
    """Pack assembled modes into an EigenSpectrum with (order, radial) labels."""
    values = np.array([m.nu_sq for m in modes], dtype=np.float64)
    labels = tuple((m.order_n, m.mode_m) for m in modes)
    return EigenSpectrum(
        values=values,
        norm_sq=float(values.sum()),
        context=SpectrumContext.OPERATOR_EIGEN,
        modes=labels,
    )


def assemble_operator_spectrum(
    problem: ProlateProblem,
    loss_factor: float,
    disc_radius_m: float,
    lam: float,
    d: float,
) -> EigenSpectrum:
    """Operator spectrum {|nu|^2} for the given geometry, non-increasing."""
    return spectrum_from_modes(operator_modes(problem, loss_factor, disc_radius_m, lam, d))


def significant_mode_count(spectrum: EigenSpectrum, loss_factor: float) -> int:
    """Modes on the spectral plateau, by the half-plateau rule.

    In the plateau regime the leading |nu|^2 sit at the loss factor L, so the
    threshold is L/2; below the plateau regime (c < ~2, where even the top
    mode falls short of L) the effective plateau is the top mode itself, so
    the threshold becomes min(L, |nu_1|^2)/2 and the count stays >= 1.
    """
    if spectrum.context is not SpectrumContext.OPERATOR_EIGEN:
        raise InvariantViolation("significant_mode_count expects an operator spectrum")
    threshold = 0.5 * min(loss_factor, float(spectrum.values[0]))
    return int(np.sum(spectrum.values >= threshold))


def mode_values_at(modes: list[OperatorMode], points: np.ndarray, disc_radius_m: float) -> np.ndarray:
    """Orthonormal mode functions evaluated at physical points in the disc.

    Returns a (len(modes), len(points)) complex array of
    p(u) = T(|u|/R) * exp(i*n*theta) / (R * sqrt(2*pi)); rows are orthonormal
    in L2 of the disc in the large-sample limit.
    """
    pts = np.asarray(points, dtype=np.float64)
    r = np.hypot(pts[:, 0], pts[:, 1]) / disc_radius_m
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    if np.any(r > 1.0 + 1e-12):
        raise InvariantViolation("mode evaluation points must lie within the disc")
    r = np.clip(r, 0.0, 1.0)
    out = np.empty((len(modes), pts.shape[0]), dtype=np.complex128)
    radial_cache: dict[tuple[int, int], np.ndarray] = {}
    norm = 1.0 / (disc_radius_m * math.sqrt(2.0 * math.pi))
    for row, mode in enumerate(modes):
        key = (abs(mode.order_n), mode.mode_m)
        if key not in radial_cache:
            radial_cache[key] = np.asarray(mode.radial.interpolator()(r), dtype=np.float64)
        out[row] = norm * radial_cache[key] * np.exp(1j * mode.order_n * theta)
    return out
