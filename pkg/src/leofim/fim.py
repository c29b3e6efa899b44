"""Channel-parameter Fisher information.

Parameter layout per satellite ``b``::

    eta_b = [tau_b (N_K blocks of N_U, slot-major), nu_b (N_K), beta_b, delta_b, eps_b]

and ``eta = [eta_1, ..., eta_NB]``. Each (b, u, k) link contributes the 5x5
block of :func:`channel_fim_block` on ``(tau_buk, nu_bk, beta_b, delta_b, eps_b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import link_geometry
from .waveform import effective_bandwidth, snr_array

__all__ = [
    "FimMatrix",
    "ChannelParameterIndex",
    "BLOCK_LABELS",
    "channel_fim_block",
    "assemble_channel_fim",
    "channel_information_factor",
    "link_statistics",
]

BLOCK_LABELS = ("tau", "nu", "beta", "delta", "eps")


@dataclass(frozen=True)
class FimMatrix:
    """Symmetric information matrix with one label per row/column."""

    matrix: np.ndarray
    labels: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "labels", tuple(self.labels))
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(self.labels):
            raise ValueError(f"FIM shape {m.shape} does not match {len(self.labels)} labels")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("FIM labels must be unique")

    @property
    def size(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)

    def block(self, rows: Sequence, cols: Sequence = None) -> np.ndarray:
        rows = [self.index(r) if not isinstance(r, (int, np.integer)) else r for r in rows]
        cols = rows if cols is None else [self.index(c) if not isinstance(c, (int, np.integer)) else c for c in cols]
        return self.matrix[np.ix_(rows, cols)]

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        m = self.matrix
        scale = max(np.abs(m).max(), np.finfo(float).tiny)
        return bool(np.abs(m - m.T).max() <= rtol * scale)

    def is_psd(self, rtol: float = 1e-10) -> bool:
        w = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.T))
        return bool(w.min() >= -rtol * max(w.max(), 0.0))


@dataclass(frozen=True)
class ChannelParameterIndex:
    n_satellites: int
    n_antennas: int
    n_slots: int

    @property
    def per_satellite(self) -> int:
        return self.n_antennas * self.n_slots + self.n_slots + 3

    @property
    def size(self) -> int:
        return self.n_satellites * self.per_satellite

    def tau(self, b, u, k) -> int:
        return b * self.per_satellite + k * self.n_antennas + u

    def nu(self, b, k) -> int:
        return b * self.per_satellite + self.n_antennas * self.n_slots + k

    def gain(self, b) -> int:
        return (b + 1) * self.per_satellite - 3

    def delta(self, b) -> int:
        return (b + 1) * self.per_satellite - 2

    def eps(self, b) -> int:
        return (b + 1) * self.per_satellite - 1

    @property
    def labels(self) -> tuple:
        out = [None] * self.size
        for b in range(self.n_satellites):
            for k in range(self.n_slots):
                for u in range(self.n_antennas):
                    out[self.tau(b, u, k)] = ("tau", b, u, k)
                out[self.nu(b, k)] = ("nu", b, k)
            out[self.gain(b)] = ("beta", b)
            out[self.delta(b)] = ("delta", b)
            out[self.eps(b)] = ("eps", b)
        return tuple(out)


def _check_positive(**kw):
    for name, val in kw.items():
        if not (np.isfinite(val) and val > 0):
            raise ValueError(f"{name} must be positive and finite, got {val!r}")


def channel_fim_block(snr: float, omega: float, f_c: float, alpha_o: float, gain: complex = 1.0) -> FimMatrix:
    """5x5 information for one link over ``(tau, nu, beta, delta, eps)``.

    The Doppler / frequency-offset coupling carries a single power of
    ``f_c`` in both triangles so the block stays symmetric.
    """
    _check_positive(snr=snr, omega=omega, alpha_o=alpha_o, f_c=f_c)
    j = np.zeros((5, 5))
    w = snr * omega
    t = snr * alpha_o**2 / 2
    j[0, 0] = j[3, 3] = w
    j[0, 3] = j[3, 0] = -w
    j[1, 1] = t * f_c**2
    j[1, 4] = j[4, 1] = -t * f_c
    j[4, 4] = t
    j[2, 2] = snr / (4 * np.pi**2 * abs(gain) ** 2)
    return FimMatrix(j, BLOCK_LABELS)


def link_statistics(scenario, geometry=None):
    """Per-link SNR and effective bandwidth plus the pulse statistics.

    Returns:
        ``(snr[b, u, k], omega[b, k], alpha_o, geometry)``. ``omega`` is
        evaluated at the true observed frequency ``f_c (1 - nu) + eps``.
    """
    if geometry is None:
        geometry = link_geometry(
            scenario.satellites, scenario.receiver, scenario.n_slots, scenario.slot_spacing
        )
    alpha1, alpha2, alpha_o = scenario.pulse.statistics()
    f_ob = scenario.carrier_frequency * (1 - geometry.doppler) + scenario.frequency_offset
    omega = effective_bandwidth(alpha1, alpha2, f_ob)
    snr = snr_array(scenario.budget, *scenario.shape)
    return snr, omega, alpha_o, geometry


def assemble_channel_fim(scenario) -> FimMatrix:
    """Full channel FIM over ``eta`` by summing per-link blocks."""
    n_b, n_u, n_k = scenario.shape
    if n_b < 1 or n_u < 1 or n_k < 1:
        raise ValueError("empty scenario")
    snr, omega, alpha_o, _ = link_statistics(scenario)
    f_c = scenario.carrier_frequency
    gain = scenario.budget.gain
    idx = ChannelParameterIndex(n_b, n_u, n_k)
    j = np.zeros((idx.size, idx.size))
    for b in range(n_b):
        for k in range(n_k):
            for u in range(n_u):
                blk = channel_fim_block(snr[b, u, k], omega[b, k], f_c, alpha_o, gain).matrix
                pos = [idx.tau(b, u, k), idx.nu(b, k), idx.gain(b), idx.delta(b), idx.eps(b)]
                j[np.ix_(pos, pos)] += blk
    return FimMatrix(j, idx.labels)


def channel_information_factor(scenario, stats=None) -> np.ndarray:
    """Square-root factor ``G`` with ``assemble_channel_fim(s).matrix == G @ G.T``.

    Each link contributes three rank-one terms: delay vs time offset,
    Doppler vs frequency offset, and channel gain.
    """
    n_b, n_u, n_k = scenario.shape
    snr, omega, alpha_o, _ = stats if stats is not None else link_statistics(scenario)
    f_c = scenario.carrier_frequency
    gain = abs(scenario.budget.gain)
    idx = ChannelParameterIndex(n_b, n_u, n_k)
    g = np.zeros((idx.size, 3 * n_b * n_u * n_k))
    col = 0
    for b in range(n_b):
        for k in range(n_k):
            for u in range(n_u):
                s = snr[b, u, k]
                w = np.sqrt(s * omega[b, k])
                g[idx.tau(b, u, k), col] = w
                g[idx.delta(b), col] = -w
                t = np.sqrt(s / 2) * alpha_o
                g[idx.nu(b, k), col + 1] = t * f_c
                g[idx.eps(b), col + 1] = -t
                g[idx.gain(b), col + 2] = np.sqrt(s) / (2 * np.pi * gain)
                col += 3
    return g
