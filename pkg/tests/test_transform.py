import numpy as np
import pytest

from leofim.efim import apply_sync_mode
from leofim.fim import ChannelParameterIndex, FimMatrix, assemble_channel_fim, link_statistics
from leofim.geometry import SPEED_OF_LIGHT, GeometryError, ReceiverState, SatelliteState
from leofim.oracle import random_scenario
from leofim.scenario import Scenario, SyncMode, default_scenario
from leofim.transform import (
    ORIENTATION,
    POSITION,
    VELOCITY,
    JacobianMatrix,
    LocationParameterIndex,
    build_jacobian,
    transform_fim,
)


def test_location_index_dimension():
    idx = LocationParameterIndex.full(3)
    assert idx.size == 9 + 3 * 3
    assert idx.interest == slice(0, 9)
    assert idx.nuisance_slice == slice(9, 18)
    assert len(set(idx.labels)) == idx.size


def test_offset_rows_are_identity(default):
    jac = build_jacobian(default)
    eta = ChannelParameterIndex(*default.shape)
    m = jac.matrix
    for b in range(default.n_satellites):
        for kind, col, row in (("beta", eta.gain(b), 9 + 3 * b), ("delta", eta.delta(b), 10 + 3 * b),
                               ("eps", eta.eps(b), 11 + 3 * b)):
            assert m[row, col] == 1.0
            assert np.count_nonzero(m[row]) == 1
            assert np.count_nonzero(m[:, col]) == 1


def test_single_antenna_has_no_orientation_columns():
    scen = default_scenario(n_antennas=1)
    assert np.all(build_jacobian(scen).matrix[ORIENTATION] == 0)


def test_first_slot_delay_has_no_velocity_dependence(default):
    jac = build_jacobian(default)
    eta = ChannelParameterIndex(*default.shape)
    for b in range(default.n_satellites):
        for u in range(default.n_antennas):
            assert np.all(jac.matrix[VELOCITY, eta.tau(b, u, 0)] == 0)
            assert np.any(jac.matrix[VELOCITY, eta.tau(b, u, 1)] != 0)


def test_doppler_rows_ignore_orientation(default):
    jac = build_jacobian(default)
    eta = ChannelParameterIndex(*default.shape)
    for b in range(default.n_satellites):
        for k in range(default.n_slots):
            assert np.all(jac.matrix[ORIENTATION, eta.nu(b, k)] == 0)


def test_zero_distance_is_rejected():
    sat = SatelliteState([0.0, 0.0, 0.0], 7000.0)
    with pytest.raises(GeometryError):
        build_jacobian(Scenario(satellites=(sat,), receiver=ReceiverState()))


def test_identity_transform_is_relabeling(rng):
    a = rng.normal(size=(6, 6))
    j = FimMatrix(a @ a.T, tuple(range(6)))
    out = transform_fim(j, JacobianMatrix(np.eye(6), tuple("abcdef"), j.labels))
    np.testing.assert_allclose(out.matrix, j.matrix, rtol=1e-15)
    assert out.labels == tuple("abcdef")


def test_scaled_jacobian_scales_quadratically(rng):
    a = rng.normal(size=(5, 5))
    j = FimMatrix(a @ a.T, tuple(range(5)))
    u = rng.normal(size=(4, 5))
    base = transform_fim(j, JacobianMatrix(u, tuple(range(4)), j.labels)).matrix
    scaled = transform_fim(j, JacobianMatrix(3.0 * u, tuple(range(4)), j.labels)).matrix
    np.testing.assert_allclose(scaled, 9.0 * base, rtol=1e-13)


def test_rank_bounded_by_factors(rng):
    a = rng.normal(size=(8, 3))
    j = FimMatrix(a @ a.T, tuple(range(8)))          # rank 3
    u = rng.normal(size=(6, 2)) @ rng.normal(size=(2, 8))  # rank 2
    out = transform_fim(j, JacobianMatrix(u, tuple(range(6)), j.labels)).matrix
    s = np.linalg.svd(out, compute_uv=False)
    assert np.count_nonzero(s > 1e-10 * s.max()) <= 2


def test_dimension_mismatch():
    j = FimMatrix(np.eye(3), (0, 1, 2))
    with pytest.raises(ValueError):
        transform_fim(j, JacobianMatrix(np.eye(4), (0, 1, 2, 3), (0, 1, 2, 3)))


def test_transform_preserves_psd(rng):
    for _ in range(20):
        scen = random_scenario(rng)
        j = transform_fim(assemble_channel_fim(scen), build_jacobian(scen)).matrix
        diag = np.diag(j)
        d = np.where(diag > 0, 1 / np.sqrt(np.where(diag > 0, diag, 1.0)), 0.0)
        w = np.linalg.eigvalsh(d[:, None] * j * d[None, :])
        assert w.min() >= -1e-10 * w.max()


def test_full_sync_position_block_matches_delay_sum():
    """Delay part of the position block is sum SNR omega / c^2 Delta Delta^T.

    The location FIM also carries the (much smaller) Doppler information
    f_c^2 alpha_o^2 SNR / 2 grad(nu) grad(nu)^T, which is added explicitly.
    """
    scen = default_scenario(n_satellites=2, n_slots=1, n_antennas=4)
    j = apply_sync_mode(scen, SyncMode.FULL_SYNC).matrix[POSITION, POSITION]
    snr, omega, alpha_o, geo = link_statistics(scen)
    c = SPEED_OF_LIGHT
    delay = np.einsum("buk,bk,buki,bukj->ij", snr, omega, geo.direction, geo.direction) / c**2
    w_nu = snr.sum(axis=1) * scen.carrier_frequency**2 * alpha_o**2 / 2
    doppler = np.einsum("bk,bki,bkj->ij", w_nu, geo.doppler_gradient, geo.doppler_gradient)
    np.testing.assert_allclose(j, delay + doppler, rtol=1e-12, atol=1e-12 * np.abs(j).max())
    # the Doppler term is a small correction at LEO ranges
    assert np.abs(doppler).max() < 1e-3 * np.abs(delay).max()
