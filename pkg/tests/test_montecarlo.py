import math

import numpy as np
import pytest

from losmimo.errors import InvariantViolation
from losmimo.linkbudget import LinkBudget, channel_gain, input_snr, siso_spectral_efficiency
from losmimo.montecarlo import ScanScenario, bound_scan, ergodic_uniform_xi

LAM, D = 0.01, 4.0e8
LAMBDA_D = LAM * D


def budget_for(gamma_g=100.0):
    b = LinkBudget(
        wavelength_m=LAM,
        range_m=D,
        tx_aperture_m2=10.0,
        rx_aperture_m2=10.0,
        loss_factor=0.5,
        power_W=1.0,
        bandwidth_Hz=1.0,
        noise_psd_W_per_Hz=1.0,
    )
    g = channel_gain(b)
    return LinkBudget(
        wavelength_m=LAM,
        range_m=D,
        tx_aperture_m2=10.0,
        rx_aperture_m2=10.0,
        loss_factor=0.5,
        power_W=gamma_g / g,
        bandwidth_Hz=1.0,
        noise_psd_W_per_Hz=1.0,
    )


def radius_for(s_over_ld):
    return math.sqrt(s_over_ld * LAMBDA_D / math.pi)


def test_m1_zero_variance():
    b = budget_for(100.0)
    est = ergodic_uniform_xi(b, 1, radius_for(3.0), trials=64, seed=5)
    expected = siso_spectral_efficiency(input_snr(b), channel_gain(b))
    assert est.mean_xi == pytest.approx(expected, abs=1e-12)
    assert est.std_error == pytest.approx(0.0, abs=1e-12)


def test_reproducibility_bit_identical():
    b = budget_for(100.0)
    a = ergodic_uniform_xi(b, 4, radius_for(3.0), trials=200, seed=9)
    c = ergodic_uniform_xi(b, 4, radius_for(3.0), trials=200, seed=9)
    assert a == c
    d = ergodic_uniform_xi(b, 4, radius_for(3.0), trials=200, seed=10)
    assert a.mean_xi != d.mean_xi


def test_stderr_scales_with_trials():
    b = budget_for(100.0)
    se1 = ergodic_uniform_xi(b, 4, radius_for(3.0), trials=2000, seed=1).std_error
    se2 = ergodic_uniform_xi(b, 4, radius_for(3.0), trials=4000, seed=2).std_error
    assert se2 == pytest.approx(se1 / math.sqrt(2.0), rel=0.2)


def test_trials_floor():
    with pytest.raises(InvariantViolation):
        ergodic_uniform_xi(budget_for(), 2, radius_for(3.0), trials=10, seed=0)


def test_bound_scan_m1_no_violations():
    rows = bound_scan(
        [ScanScenario(budget=budget_for(50.0), streams=1, disc_radius_m=radius_for(2.0))],
        trials=100,
        seed=3,
    )
    assert len(rows) == 1
    row = rows[0]
    assert row.ub_violations == 0
    assert row.mean_xi <= row.upper_bound + 1e-9
    assert row.lower_bound <= row.upper_bound
    assert row.gamma_g == pytest.approx(50.0, rel=1e-12)
    assert row.s_over_ld == pytest.approx(2.0, rel=1e-12)


def test_bound_scan_valid_regime_no_violations():
    # M <= Mdof: the restricted bound reduces to the rigorous Jensen form
    scenarios = [
        ScanScenario(budget=budget_for(gg), streams=m, disc_radius_m=radius_for(10.0))
        for m in (1, 2, 4, 8)
        for gg in (1.0, 100.0)
    ]
    rows = bound_scan(scenarios, trials=50, seed=7)
    assert all(r.ub_violations == 0 for r in rows)


def test_bound_scan_mean_respects_lower_bound():
    scenarios = [
        ScanScenario(budget=budget_for(100.0), streams=m, disc_radius_m=radius_for(5.0))
        for m in (1, 2, 4)
    ]
    rows = bound_scan(scenarios, trials=400, seed=11)
    for r in rows:
        assert r.mean_xi >= r.lower_bound - 3.0 * max(r.std_error, 1e-12)


def test_large_region_asymptote():
    # |S|/(lam d) = 30 M: mean approaches M log2(1 + gamma g/M^2)
    gg = 1e10
    for m in (2, 4):
        est = ergodic_uniform_xi(budget_for(gg), m, radius_for(30.0 * m), trials=300, seed=21)
        target = m * math.log2(1.0 + gg / m**2)
        assert abs(est.mean_xi - target) / target < 0.05


def test_scan_reproducible_and_order_independent():
    s1 = ScanScenario(budget=budget_for(10.0), streams=2, disc_radius_m=radius_for(4.0))
    s2 = ScanScenario(budget=budget_for(10.0), streams=3, disc_radius_m=radius_for(4.0))
    rows_ab = bound_scan([s1, s2], trials=60, seed=2)
    rows_ab2 = bound_scan([s1, s2], trials=60, seed=2)
    assert rows_ab == rows_ab2
    # scenario identity is positional in the derived stream, so identical
    # scenarios at the same position reproduce exactly
    rows_a = bound_scan([s1], trials=60, seed=2)
    assert rows_a[0] == rows_ab[0]
