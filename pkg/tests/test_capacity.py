import math

import numpy as np
import pytest

from losmimo.capacity import (
    CapacityInputs,
    deterministic_capacity,
    expected_spectral_efficiency_lower_bound,
    optimal_stream_count,
    required_array_area,
    spectral_efficiency_upper_bound,
    stationary_snr_constant,
    stream_objective,
    uniform_spectral_efficiency,
    waterfilling_spectral_efficiency,
)
from losmimo.channel import EigenSpectrum, SpectrumContext
from losmimo.errors import InvariantViolation
from losmimo.linkbudget import siso_spectral_efficiency


def spectrum_of(values):
    values = np.asarray(sorted(values, reverse=True), dtype=float)
    return EigenSpectrum(
        values=values, norm_sq=float(values.sum()), context=SpectrumContext.MATRIX_SINGULAR
    )


def brute_force_waterfilling(values, total, refinements=3):
    """Grid search over power splits of `total` across the positive modes,
    refined locally; independent of the closed-form scan."""
    lam = np.asarray([v for v in values if v > 0], dtype=float)
    k = lam.size

    def rate(powers):
        return float(np.sum(np.log1p(lam * powers)) / math.log(2.0))

    best_p = np.full(k, total / k)
    best = rate(best_p)
    rng = np.random.default_rng(0)
    step = total
    for _ in range(refinements * 400):
        cand = np.abs(best_p + rng.uniform(-step, step, k))
        cand *= total / cand.sum()
        r = rate(cand)
        if r > best:
            best, best_p = r, cand
        step *= 0.995
    return best


# --- uniform spectral efficiency ---


def test_uniform_reduces_to_siso():
    assert uniform_spectral_efficiency(spectrum_of([1.0]), 7.0, 0.5, 1) == pytest.approx(
        siso_spectral_efficiency(7.0, 0.5), abs=1e-12
    )


def test_uniform_rank_one_all_ones():
    m = 4
    gamma_g = 12.0
    got = uniform_spectral_efficiency(spectrum_of([m**2, 0, 0, 0]), gamma_g, 1.0, m)
    assert got == pytest.approx(math.log2(1 + gamma_g / m), rel=1e-12)


def test_uniform_orthogonal_2x2():
    # [[1,1],[1,-1]] has both squared singular values equal to 2
    h = np.array([[1.0, 1.0], [1.0, -1.0]])
    sv2 = np.linalg.svd(h, compute_uv=False) ** 2
    got = uniform_spectral_efficiency(spectrum_of(sv2), 12.0, 1.0, 2)
    assert got == pytest.approx(2 * math.log2(1 + 12.0 * 2 / 8), rel=1e-12)
    assert got == pytest.approx(4.0, rel=1e-12)


def test_uniform_size_mismatch():
    with pytest.raises(InvariantViolation):
        uniform_spectral_efficiency(spectrum_of([1.0, 1.0]), 1.0, 1.0, 3)


# --- waterfilling ---


def test_waterfilling_equal_modes_matches_uniform():
    m = 4
    spec = spectrum_of([4.0] * m)
    gamma_g = 10.0
    wf = waterfilling_spectral_efficiency(spec, gamma_g, 1.0, m)
    uni = uniform_spectral_efficiency(spec, gamma_g, 1.0, m)
    assert wf == pytest.approx(uni, rel=1e-12)


def test_waterfilling_single_mode_closed_form():
    m = 3
    gamma_g = 42.0
    spec = spectrum_of([m**2, 0.0, 0.0])
    wf = waterfilling_spectral_efficiency(spec, gamma_g, 1.0, m)
    # all power on the single mode: log2(1 + M^2 * gamma g / M^2) = log2(1 + gamma g / M * ... )
    expected = math.log2(1 + gamma_g / m**2 * m**2)
    assert wf == pytest.approx(expected, rel=1e-12)
    oracle = brute_force_waterfilling([m**2], gamma_g / m**2)
    assert wf == pytest.approx(oracle, abs=1e-3)


def test_waterfilling_beats_uniform_on_random_spectra():
    rng = np.random.default_rng(8)
    for _ in range(25):
        m = 4
        vals = rng.uniform(0.1, 4.0, m)
        vals *= m**2 / vals.sum()
        spec = spectrum_of(vals)
        gamma_g = 10.0
        wf = waterfilling_spectral_efficiency(spec, gamma_g, 1.0, m)
        uni = uniform_spectral_efficiency(spec, gamma_g, 1.0, m)
        assert wf >= uni - 1e-12


def test_waterfilling_matches_brute_force_grid():
    rng = np.random.default_rng(5)
    vals = rng.uniform(0.2, 5.0, 4)
    vals *= 16 / vals.sum()
    spec = spectrum_of(vals)
    gamma_g, m = 10.0, 4
    wf = waterfilling_spectral_efficiency(spec, gamma_g, 1.0, m)
    oracle = brute_force_waterfilling(spec.values, gamma_g / m**2)
    assert wf == pytest.approx(oracle, abs=1e-3)
    assert wf >= oracle - 1e-9


def test_waterfilling_requires_positive_mode():
    with pytest.raises(InvariantViolation):
        waterfilling_spectral_efficiency(spectrum_of([0.0, 0.0]), 1.0, 1.0, 2)


# --- closed-form bounds ---


def inputs_for(m, s_over_ld, gamma_g):
    return CapacityInputs.from_geometry(gamma_g, 1.0, m, s_over_ld * 1.0, 1.0)


def test_upper_bound_values():
    assert spectral_efficiency_upper_bound(inputs_for(1, 5.0, 9.0)) == pytest.approx(
        math.log2(10.0)
    )
    # M=4, Mdof=2, gamma g = 8 -> 2 log2(1 + 8/8) = 2
    inp = CapacityInputs(gamma=8.0, g=1.0, streams=4, dof=2, area_m2=1.4, lambda_d=1.0)
    assert spectral_efficiency_upper_bound(inp) == pytest.approx(2.0, rel=1e-12)


def test_upper_bound_eventually_decreasing_in_m():
    gamma_g = 100.0
    vals = [
        spectral_efficiency_upper_bound(
            CapacityInputs(gamma=gamma_g, g=1.0, streams=m, dof=10**6, area_m2=1e3, lambda_d=1.0)
        )
        for m in range(1, 200)
    ]
    peak = int(np.argmax(vals))
    assert all(b <= a + 1e-12 for a, b in zip(vals[peak:-1], vals[peak + 1 :]))


def test_lower_bound_m1_and_reference_value():
    inp = inputs_for(1, 10.0, 8.0)
    assert expected_spectral_efficiency_lower_bound(inp) == pytest.approx(
        0.25 * math.log2(1 + 4.0), rel=1e-12
    )
    inp2 = inputs_for(2, 10.0, 8.0)
    denom = 1.5 + (32.0 / (9.0 * math.pi)) * 0.5 / 10.0
    assert expected_spectral_efficiency_lower_bound(inp2) == pytest.approx(
        0.5 / denom, rel=1e-9
    )
    assert expected_spectral_efficiency_lower_bound(inp2) == pytest.approx(0.32122, abs=5e-6)


def test_lower_bound_requires_unit_area_ratio():
    with pytest.raises(InvariantViolation):
        expected_spectral_efficiency_lower_bound(inputs_for(2, 0.5, 8.0))


def test_lower_bound_below_upper_bound_on_grid():
    for m in range(1, 33):
        for s_over_ld in (1.0, 3.0, 10.0, 31.6, 100.0):
            for gamma_g in (1e-2, 1.0, 1e2, 1e4, 1e6):
                inp = inputs_for(m, s_over_ld, gamma_g)
                lb = expected_spectral_efficiency_lower_bound(inp)
                ub = spectral_efficiency_upper_bound(inp)
                assert lb <= ub + 1e-12


def test_deterministic_capacity_examples():
    inp = CapacityInputs(gamma=32.0, g=1.0, streams=8, dof=4, area_m2=2.0, lambda_d=1.0)
    assert deterministic_capacity(inp) == pytest.approx(4.0, rel=1e-12)
    inp2 = CapacityInputs(gamma=9.0, g=1.0, streams=2, dof=5, area_m2=2.3, lambda_d=1.0)
    assert deterministic_capacity(inp2) == pytest.approx(2 * math.log2(1 + 9.0 / 4), rel=1e-12)
    # at M = Mdof the corner matches the upper bound trivially
    inp3 = CapacityInputs(gamma=9.0, g=1.0, streams=5, dof=5, area_m2=2.3, lambda_d=1.0)
    assert deterministic_capacity(inp3) == spectral_efficiency_upper_bound(inp3)


def test_capacity_concave_in_m_with_bracketed_peak():
    gamma_g = 250.0
    vals = [
        deterministic_capacity(
            CapacityInputs(gamma=gamma_g, g=1.0, streams=m, dof=1000, area_m2=32.0, lambda_d=1.0)
        )
        for m in range(1, 60)
    ]
    diffs = np.sign(np.diff(vals))
    # increasing then decreasing
    switch = np.where(diffs < 0)[0]
    assert switch.size > 0
    first_down = switch[0]
    assert np.all(diffs[:first_down] > 0)
    assert np.all(diffs[first_down:] <= 0)
    res = optimal_stream_count(gamma_g, 1.0)
    peak_m = int(np.argmax(vals)) + 1
    assert res.m_low <= peak_m <= res.m_high


# --- stream-count optimizer ---


def test_stationary_constant_against_golden_section_oracle():
    from scipy.optimize import minimize_scalar

    gamma_g = 1234.5
    res = optimal_stream_count(gamma_g, 1.0)
    golden = minimize_scalar(
        lambda x: -stream_objective(x, gamma_g),
        bracket=(1.0, 10.0, 1000.0),
        method="golden",
        options={"xtol": 1e-13},
    )
    assert res.x_opt == pytest.approx(golden.x, rel=1e-6)


def test_optimizer_small_snr_clamps_to_siso():
    res = optimal_stream_count(1.0, 1.0)  # gamma*g = 1 < t*
    assert res.m_low == res.m_high == res.m_opt == 1
    assert res.xi_bits == pytest.approx(math.log2(2.0), rel=1e-12)


def test_optimizer_at_stationary_constant():
    t_star = stationary_snr_constant()
    res = optimal_stream_count(t_star, 1.0)
    assert res.x_opt == pytest.approx(1.0, rel=1e-12)
    assert math.log1p(t_star) == pytest.approx(2 * t_star / (1 + t_star), abs=1e-14)


def test_optimizer_scale_invariance():
    t_star = stationary_snr_constant()
    base = optimal_stream_count(100.0 * t_star, 1.0)
    assert base.x_opt == pytest.approx(10.0, rel=1e-10)
    assert base.xi_bits == pytest.approx(10 * math.log2(1 + t_star), rel=1e-12)
    for k in (2.0, 10.0):
        scaled = optimal_stream_count(k**2 * 100.0 * t_star, 1.0)
        assert scaled.x_opt == pytest.approx(k * base.x_opt, rel=1e-8)


def test_optimizer_reported_constants():
    res = optimal_stream_count(100.0, 1.0)
    # root-found constants, documented against the reported 3.9125 / 0.8053
    assert res.t_star == pytest.approx(3.92155, abs=1e-4)
    assert res.ratio_nats == pytest.approx(0.80474, abs=1e-4)
    assert res.ratio_bits == pytest.approx(1.16100, abs=1e-4)
    assert abs(res.ratio_nats - 0.8053) / 0.8053 < 1e-3


def test_optimizer_rejects_zero_snr():
    with pytest.raises(InvariantViolation):
        optimal_stream_count(0.0, 1.0)


# --- required area ---


def test_required_array_area():
    assert required_array_area(1, 2.0, 3.0) == pytest.approx(6.0)
    assert required_array_area(4, 1.0, 1e6) == pytest.approx(2e6)


def test_area_dof_roundtrip():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = int(rng.integers(1, 200))
        lam = float(rng.uniform(1e-3, 0.1))
        d = float(rng.uniform(1e7, 1e9))
        area = required_array_area(m, lam, d)
        inp = CapacityInputs.from_geometry(1.0, 1.0, m, area, lam * d)
        assert inp.dof == m
