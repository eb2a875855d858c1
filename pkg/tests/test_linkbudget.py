import math

import numpy as np
import pytest

from losmimo.errors import InvariantViolation
from losmimo.linkbudget import LinkBudget, channel_gain, input_snr, siso_spectral_efficiency


def make_budget(**overrides):
    params = dict(
        wavelength_m=0.01,
        range_m=4.0e8,
        tx_aperture_m2=10.0,
        rx_aperture_m2=10.0,
        loss_factor=0.5,
        power_W=100.0,
        bandwidth_Hz=1.0e6,
        noise_psd_W_per_Hz=1.0e-20,
    )
    params.update(overrides)
    return LinkBudget(**params)


def test_channel_gain_all_ones_identity():
    b = make_budget(
        tx_aperture_m2=1.0, rx_aperture_m2=1.0, loss_factor=1.0, wavelength_m=1.0, range_m=1e6
    )
    # unit apertures and loss: g = 1/(lam^2 d^2)
    assert channel_gain(b) == pytest.approx(1.0 / 1e12, rel=1e-15)


def test_channel_gain_reference_value():
    b = make_budget()
    # 10*10*0.5 / (1e-4 * 1.6e17) = 3.125e-12
    assert channel_gain(b) == pytest.approx(3.125e-12, rel=1e-12)


def test_channel_gain_doubling_range_quarters_gain():
    rng = np.random.default_rng(1)
    for _ in range(20):
        lam = rng.uniform(0.001, 0.1)
        d = rng.uniform(1e8, 1e10)
        b1 = make_budget(wavelength_m=lam, range_m=d)
        b2 = make_budget(wavelength_m=lam, range_m=2 * d)
        assert channel_gain(b2) == pytest.approx(channel_gain(b1) / 4.0, rel=1e-12)


def test_channel_gain_multiplicative_scalings():
    rng = np.random.default_rng(2)
    base = make_budget()
    g0 = channel_gain(base)
    for _ in range(20):
        ka, kl = rng.uniform(0.1, 3.0), rng.uniform(0.1, 1.9)
        b = make_budget(
            tx_aperture_m2=base.tx_aperture_m2 * ka,
            rx_aperture_m2=base.rx_aperture_m2 * kl,
        )
        assert channel_gain(b) == pytest.approx(g0 * ka * kl, rel=1e-12)
        kw = rng.uniform(0.5, 2.0)
        b = make_budget(wavelength_m=base.wavelength_m * kw)
        assert channel_gain(b) == pytest.approx(g0 / kw**2, rel=1e-12)


def test_input_snr():
    assert input_snr(make_budget(power_W=1.0, bandwidth_Hz=1.0, noise_psd_W_per_Hz=1.0)) == 1.0
    assert input_snr(make_budget()) == pytest.approx(1e16, rel=1e-12)
    b1 = make_budget(power_W=50.0)
    b2 = make_budget(power_W=150.0)
    assert input_snr(b2) == pytest.approx(3 * input_snr(b1), rel=1e-14)


@pytest.mark.parametrize(
    "gamma_g,expected", [(0.0, 0.0), (1.0, 1.0), (3.0, 2.0), (15.0, 4.0)]
)
def test_siso_spectral_efficiency_values(gamma_g, expected):
    assert siso_spectral_efficiency(gamma_g, 1.0) == pytest.approx(expected, abs=1e-14)


def test_siso_strictly_increasing():
    xs = np.linspace(0.0, 100.0, 257)
    vals = [siso_spectral_efficiency(x, 1.0) for x in xs]
    assert all(b > a for a, b in zip(vals[:-1], vals[1:]))


def test_budget_rejects_nonpositive_and_big_loss():
    with pytest.raises(InvariantViolation):
        make_budget(power_W=0.0)
    with pytest.raises(InvariantViolation):
        make_budget(wavelength_m=-1.0)
    with pytest.raises(InvariantViolation):
        make_budget(loss_factor=1.5)
    with pytest.raises(InvariantViolation):
        make_budget(noise_psd_W_per_Hz=math.nan)


def test_budget_rejects_gain_at_or_above_one():
    with pytest.raises(InvariantViolation):
        make_budget(
            tx_aperture_m2=1.0, rx_aperture_m2=1.0, loss_factor=1.0, wavelength_m=1.0, range_m=0.5
        )


def test_budget_warns_outside_deep_space_regime():
    with pytest.warns(UserWarning):
        make_budget(
            tx_aperture_m2=1.0, rx_aperture_m2=1.0, loss_factor=1.0, wavelength_m=1.0, range_m=20.0
        )
