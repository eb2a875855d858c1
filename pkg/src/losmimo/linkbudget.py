"""Scalar link-budget arithmetic and the single-antenna spectral efficiency.

Every MIMO result in the package is ultimately compared against these
numbers. All quantities are SI (meters, Hz, W, W/Hz); spectral efficiencies
are base-2 logarithms, i.e. b/s/Hz.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InvariantViolation

#: Channel gains above this are outside the deep-space regime the model
#: was built for; they are accepted with a warning up to g < 1.
GAIN_WARN_LEVEL = 1e-3


@dataclass(frozen=True)
class LinkBudget:
    """Physical parameters of one end-to-end link.

    Parameters
    ----------
    wavelength_m : float
        Carrier wavelength (m).
    range_m : float
        Separation between the two ends of the link (m).
    tx_aperture_m2, rx_aperture_m2 : float
        Total effective antenna aperture areas at each end (m^2).
    loss_factor : float
        Aggregate of all unmodeled losses, in (0, 1].
    power_W : float
        Total transmitted power (W).
    bandwidth_Hz : float
        Signal bandwidth (Hz).
    noise_psd_W_per_Hz : float
        One-sided noise power spectral density of the complex baseband
        channel (W/Hz).
    """

    wavelength_m: float
    range_m: float
    tx_aperture_m2: float
    rx_aperture_m2: float
    loss_factor: float
    power_W: float
    bandwidth_Hz: float
    noise_psd_W_per_Hz: float

    def __post_init__(self) -> None:
        for name in (
            "wavelength_m",
            "range_m",
            "tx_aperture_m2",
            "rx_aperture_m2",
            "loss_factor",
            "power_W",
            "bandwidth_Hz",
            "noise_psd_W_per_Hz",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InvariantViolation(f"LinkBudget.{name} must be a finite positive number, got {value!r}")
        if self.loss_factor > 1.0:
            raise InvariantViolation(f"LinkBudget.loss_factor must be <= 1, got {self.loss_factor!r}")
        g = channel_gain(self)
        if g >= 1.0:
            raise InvariantViolation(
                f"channel gain g = {g:.6g} >= 1: not a valid long-range free-space scenario"
            )
        if g > GAIN_WARN_LEVEL:
            warnings.warn(
                f"channel gain g = {g:.3g} exceeds {GAIN_WARN_LEVEL:g}; "
                "the parabolic phase model assumes g << 1",
                stacklevel=2,
            )


def channel_gain(budget: LinkBudget) -> float:
    """End-to-end power transfer ratio g = A_T * A_R * L / (lam^2 * d^2)."""
    return (
        budget.tx_aperture_m2
        * budget.rx_aperture_m2
        * budget.loss_factor
        / (budget.wavelength_m**2 * budget.range_m**2)
    )


def input_snr(budget: LinkBudget) -> float:
    """Transmit SNR gamma = P / (B * N0)."""
    return budget.power_W / (budget.bandwidth_Hz * budget.noise_psd_W_per_Hz)


def siso_spectral_efficiency(gamma: float, g: float) -> float:
    """Single-stream AWGN spectral efficiency log2(1 + gamma*g), b/s/Hz."""
    if gamma < 0 or g < 0:
        raise InvariantViolation("gamma and g must be nonnegative")
    return math.log1p(gamma * g) / math.log(2.0)
