import math

import numpy as np
import pytest

from leofim.oracle import (
    LinkParameters,
    OracleError,
    SampledWaveform,
    _fd_rows,
    analytic_block_for,
    block_agreement,
    jacobian_fd_check,
    numeric_channel_fim,
    oracle_waveform,
    random_scenario,
    random_spd,
    run_verification,
    schur_identity_error,
)
from leofim.scenario import default_scenario
from leofim.transform import ORIENTATION, VELOCITY

LINK = LinkParameters(carrier_frequency=50.0, gain=1.3, nu=2e-4, eps=3.0)


def test_gaussian_waveform_statistics():
    alpha_o, f0 = 1e-2, 20.0
    wave = SampledWaveform.gaussian(alpha_o, f0, sample_rate=4000.0)
    a1, a2, ao = wave.statistics()
    sigma_f = 1 / (2 * math.sqrt(2) * math.pi * alpha_o)
    assert ao == pytest.approx(alpha_o, rel=1e-9)
    assert a1 == pytest.approx(math.hypot(sigma_f, f0), rel=1e-9)
    assert a2 == pytest.approx(f0 / math.hypot(sigma_f, f0), rel=1e-9)
    assert wave.span >= 8 * alpha_o


def test_gaussian_block_matches_analytic():
    wave = oracle_waveform(1e-2, 0.0, LINK.carrier_frequency)
    agree = block_agreement(numeric_channel_fim(wave, LINK, 0.5), analytic_block_for(wave, LINK, 0.5))
    assert agree["max_relative_error"] <= 1e-4
    assert agree["max_normalized_zero"] <= 1e-4


def test_shifted_pulse_block_matches_analytic():
    wave = oracle_waveform(1e-2, 15.0, LINK.carrier_frequency)
    agree = block_agreement(numeric_channel_fim(wave, LINK, 2.0), analytic_block_for(wave, LINK, 2.0))
    assert agree["max_relative_error"] <= 1e-4
    assert agree["max_normalized_zero"] <= 1e-4


def test_numeric_block_symmetric_and_noise_scaling():
    wave = oracle_waveform(1e-2, 5.0, LINK.carrier_frequency)
    a = numeric_channel_fim(wave, LINK, 1.0).matrix
    b = numeric_channel_fim(wave, LINK, 2.0).matrix
    np.testing.assert_array_equal(a, a.T)
    np.testing.assert_allclose(b, a / 2, rtol=1e-12, atol=1e-14 * np.abs(a).max())


def test_sample_interval_halving_converged():
    fs = 16 * (LINK.carrier_frequency + 8 / (2 * math.sqrt(2) * math.pi * 1e-2))
    coarse = numeric_channel_fim(SampledWaveform.gaussian(1e-2, 0.0, fs), LINK, 1.0).matrix
    fine = numeric_channel_fim(SampledWaveform.gaussian(1e-2, 0.0, 2 * fs), LINK, 1.0).matrix
    nz = np.abs(coarse) > 1e-4 * np.sqrt(np.outer(np.diag(coarse), np.diag(coarse)))
    assert np.max(np.abs(fine[nz] - coarse[nz]) / np.abs(coarse[nz])) <= 1e-5


def test_aliasing_is_detected():
    wave = SampledWaveform.gaussian(1e-2, 0.0, sample_rate=60.0)
    with pytest.raises(OracleError, match="aliasing"):
        numeric_channel_fim(wave, LINK, 1.0)


def test_truncated_window_is_detected():
    wave = SampledWaveform.gaussian(1e-2, 0.0, sample_rate=4000.0, span_factor=3.0)
    with pytest.raises(OracleError):
        numeric_channel_fim(wave, LINK, 1.0)


def test_waveform_validation():
    with pytest.raises(OracleError):
        SampledWaveform(np.zeros(16), 1e-3, 0.0)
    with pytest.raises(OracleError):
        SampledWaveform(np.ones(4), 1e-3, 0.0)


def test_jacobian_fd_default():
    assert jacobian_fd_check(default_scenario()) <= 1e-6


def test_jacobian_fd_random(rng):
    for _ in range(5):
        assert jacobian_fd_check(random_scenario(rng)) <= 1e-6


def test_fd_single_antenna_orientation_zero():
    scen = default_scenario(n_antennas=1)
    d_tau, d_nu = _fd_rows(scen)
    assert np.all(d_tau[ORIENTATION] == 0)
    assert np.all(d_nu[ORIENTATION] == 0)


def test_fd_first_slot_velocity_zero(default):
    d_tau, _ = _fd_rows(default)
    assert np.all(d_tau[VELOCITY][..., 0] == 0)


def test_schur_identity_random_spd(rng):
    for n in (2, 12, 30):
        assert schur_identity_error(random_spd(rng, n), n // 2) <= 1e-9


def test_run_verification_passes():
    checks = run_verification(seed=1, n_draws=5)
    assert len(checks) == 7
    assert all(c.passed for c in checks), [c.to_dict() for c in checks if not c.passed]
