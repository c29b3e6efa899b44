"""Pulse statistics and link budgets.

The channel FIM depends on the transmitted pulse only through three numbers:
the effective baseband bandwidth ``alpha1`` (Hz), the baseband-carrier
correlation ``alpha2`` and the RMS time duration ``alpha_o`` (s). A
:class:`PulseSpec` either carries them directly or describes a parametric
power spectrum plus a time envelope from which they are integrated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

__all__ = [
    "PulseError",
    "ConfigError",
    "PulseSpec",
    "LinkBudget",
    "SHAPES",
    "spectral_moments",
    "rms_time_duration",
    "effective_bandwidth",
    "resolve_snr",
    "snr_array",
    "db_to_linear",
]

SHAPES = ("gaussian", "raised-cosine-spectrum", "rectangular-spectrum")


class PulseError(ValueError):
    """Degenerate or non-normalizable pulse."""


class ConfigError(ValueError):
    """Inconsistent configuration."""


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class PulseSpec:
    """Transmit pulse description.

    Direct form: set ``alpha1``, ``alpha2`` and ``rms_duration``.

    Parametric form: set ``shape``, ``bandwidth`` and ``duration``. The power
    spectrum ``|S(f)|^2`` is a gaussian with standard deviation ``bandwidth``,
    a raised cosine with symbol rate ``bandwidth`` and ``rolloff``, or a flat
    band of width ``bandwidth``; it is centred at ``center_frequency``. The
    time envelope ``|s(t)|^2`` is a gaussian with standard deviation
    ``duration`` for the gaussian shape and a rectangle of length
    ``duration`` otherwise, centred at ``time_offset``.
    """

    alpha1: Optional[float] = None
    alpha2: Optional[float] = None
    rms_duration: Optional[float] = None
    shape: Optional[str] = None
    bandwidth: Optional[float] = None
    duration: Optional[float] = None
    center_frequency: float = 0.0
    time_offset: float = 0.0
    rolloff: float = 0.25

    def __post_init__(self):
        direct = (self.alpha1, self.alpha2, self.rms_duration)
        param = (self.shape, self.bandwidth, self.duration)
        if all(v is not None for v in direct) and all(v is None for v in param):
            if not self.alpha1 > 0:
                raise PulseError("alpha1 must be > 0")
            if not abs(self.alpha2) <= 1:
                raise PulseError("|alpha2| must be <= 1")
            if not self.rms_duration > 0:
                raise PulseError("rms_duration must be > 0")
        elif all(v is not None for v in param) and all(v is None for v in direct):
            if self.shape not in SHAPES:
                raise PulseError(f"unknown pulse shape {self.shape!r}; expected one of {SHAPES}")
            if not self.duration > 0:
                raise PulseError("pulse duration must be > 0")
            if self.bandwidth < 0 or not np.isfinite(self.bandwidth):
                raise PulseError("pulse bandwidth must be finite and >= 0")
            if not 0 <= self.rolloff <= 1:
                raise PulseError("rolloff must lie in [0, 1]")
        else:
            raise PulseError(
                "pulse needs either (alpha1, alpha2, rms_duration) or (shape, bandwidth, duration)"
            )

    @property
    def is_direct(self) -> bool:
        return self.alpha1 is not None

    def statistics(self) -> tuple:
        """``(alpha1, alpha2, alpha_o)``."""
        if self.is_direct:
            return float(self.alpha1), float(self.alpha2), float(self.rms_duration)
        a1, a2 = spectral_moments(self)
        return a1, a2, rms_time_duration(self)


def power_spectrum(pulse: PulseSpec):
    """``(|S(f)|^2 callable, (f_lo, f_hi) support)`` of a parametric pulse."""
    b, f0 = pulse.bandwidth, pulse.center_frequency
    if pulse.shape == "gaussian":
        if b <= 0:
            raise PulseError("gaussian spectrum needs a positive bandwidth")
        return (lambda f: np.exp(-0.5 * ((f - f0) / b) ** 2)), (f0 - 12 * b, f0 + 12 * b)
    if pulse.shape == "rectangular-spectrum":
        if b <= 0:
            raise PulseError("rectangular spectrum with zero bandwidth is degenerate")
        return (lambda f: np.ones_like(np.asarray(f, dtype=float))), (f0 - b / 2, f0 + b / 2)
    if b <= 0:
        raise PulseError("raised-cosine spectrum with zero bandwidth is degenerate")
    r = pulse.rolloff
    lo, hi = (1 - r) * b / 2, (1 + r) * b / 2

    def rc(f):
        x = np.abs(np.asarray(f, dtype=float) - f0)
        out = np.where(x <= lo, 1.0, 0.0)
        band = (x > lo) & (x <= hi)
        if np.any(band):
            out[band] = 0.5 * (1 + np.cos(np.pi * ((x[band] - lo) / (hi - lo))))
        return out

    return rc, (f0 - hi, f0 + hi)


def time_envelope(pulse: PulseSpec):
    """``(|s(t)|^2 callable, (t_lo, t_hi) support)`` of a parametric pulse."""
    d, t0 = pulse.duration, pulse.time_offset
    if pulse.shape == "gaussian":
        return (lambda t: np.exp(-0.5 * ((t - t0) / d) ** 2)), (t0 - 12 * d, t0 + 12 * d)
    return (lambda t: np.ones_like(np.asarray(t, dtype=float))), (t0 - d / 2, t0 + d / 2)


def _moments(fn, support, breaks=()):
    """Raw moments ``(m0, m1, m2)`` of ``fn`` over ``support``.

    Integrates in the centered, unit-width variable ``x = (y - c) / s`` and
    maps back exactly, so a narrow band far from zero keeps full precision.
    """
    lo, hi = support
    c, s = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = tuple((p - c) / s for p in breaks if lo < p < hi) or None
    i0, i1, i2 = (
        integrate.quad(lambda x, n=n: x**n * fn(c + s * x), -1.0, 1.0, points=pts, limit=400,
                       epsabs=1e-13, epsrel=1e-12)[0]
        for n in range(3)
    )
    return s * i0, s * (c * i0 + s * i1), s * (c * c * i0 + 2 * c * s * i1 + s * s * i2)


def spectral_moments(pulse: PulseSpec) -> tuple:
    """Effective baseband bandwidth and baseband-carrier correlation.

    Returns:
        ``(alpha1, alpha2)`` with ``alpha1 = sqrt(m2 / m0)`` and
        ``alpha2 = m1 / sqrt(m2 m0)``, where ``m_n`` is the n-th moment of
        ``|S(f)|^2`` about zero frequency.
    """
    if pulse.is_direct:
        return float(pulse.alpha1), float(pulse.alpha2)
    psd, support = power_spectrum(pulse)
    breaks = ()
    if pulse.shape == "raised-cosine-spectrum":
        f0, b, r = pulse.center_frequency, pulse.bandwidth, pulse.rolloff
        breaks = tuple(f0 + s * (1 - r) * b / 2 for s in (-1, 1))
    elif pulse.shape == "gaussian":
        breaks = (pulse.center_frequency,)
    m0, m1, m2 = _moments(psd, support, breaks)
    if not (m0 > 0 and m2 > 0):
        raise PulseError("pulse spectrum has no energy or no bandwidth")
    alpha1 = np.sqrt(m2 / m0)
    alpha2 = float(np.clip(m1 / np.sqrt(m2 * m0), -1.0, 1.0))
    return float(alpha1), alpha2


def rms_time_duration(pulse: PulseSpec, center: float = 0.0, recenter: bool = True) -> float:
    """RMS time duration ``sqrt(2 * <(t - center)^2>)`` of the time envelope.

    With ``recenter`` the moment is taken about the envelope's temporal mean
    and ``center`` is ignored.
    """
    if pulse.is_direct:
        return float(pulse.rms_duration)
    env, support = time_envelope(pulse)
    breaks = (pulse.time_offset,) if pulse.shape == "gaussian" else ()
    m0, m1, m2 = _moments(env, support, breaks)
    if not m0 > 0 or not np.isfinite(m2):
        raise PulseError("pulse is not normalizable")
    mean = m1 / m0 if recenter else center
    var = m2 / m0 - 2 * mean * m1 / m0 + mean**2
    return float(np.sqrt(2 * max(var, 0.0)))


def effective_bandwidth(alpha1: float, alpha2: float, f_ob: float) -> float:
    """``alpha1^2 + 2 f_ob alpha1 alpha2 + f_ob^2`` in Hz^2."""
    if not alpha1 > 0:
        raise PulseError("alpha1 must be > 0")
    return alpha1**2 + 2 * f_ob * alpha1 * alpha2 + f_ob**2


@dataclass(frozen=True)
class LinkBudget:
    """Per-link SNR, either configured directly or from a channel gain.

    ``snr`` (linear) or ``snr_db`` may be a scalar, a per-satellite sequence
    or an ``(N_B, N_U, N_K)`` array. Gain mode uses
    ``8 pi^2 |gain|^2 pulse_energy / noise_density``. ``gain`` also sets
    the amplitude that scales the channel-gain information in direct mode.
    """

    snr: Optional[object] = None
    snr_db: Optional[object] = None
    gain: complex = 1.0
    noise_density: Optional[float] = None
    pulse_energy: Optional[float] = None

    def __post_init__(self):
        direct = self.snr is not None or self.snr_db is not None
        gain_mode = self.noise_density is not None or self.pulse_energy is not None
        if self.snr is not None and self.snr_db is not None:
            raise ConfigError("link budget sets both snr and snr_db")
        if direct == gain_mode:
            raise ConfigError("link budget needs exactly one of direct SNR or (noise_density, pulse_energy)")
        if gain_mode and (self.noise_density is None or self.pulse_energy is None):
            raise ConfigError("gain-based link budget needs both noise_density and pulse_energy")
        if gain_mode and not (self.noise_density > 0 and self.pulse_energy > 0):
            raise ConfigError("noise_density and pulse_energy must be > 0")
        if abs(self.gain) == 0:
            raise ConfigError("channel gain must be nonzero")
        if direct:
            vals = self.linear_snr()
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise ConfigError("configured SNR must be positive and finite")

    @property
    def mode(self) -> str:
        return "gain-based" if self.noise_density is not None else "direct-snr"

    def linear_snr(self) -> np.ndarray:
        if self.snr is not None:
            return np.asarray(self.snr, dtype=float)
        if self.snr_db is not None:
            return db_to_linear(self.snr_db)
        return np.asarray(
            8 * np.pi**2 * abs(self.gain) ** 2 * self.pulse_energy / self.noise_density, dtype=float
        )


def resolve_snr(budget: LinkBudget, b: int, u: int, k: int) -> float:
    vals = budget.linear_snr()
    if vals.ndim == 0:
        return float(vals)
    if vals.ndim == 1:
        return float(vals[b])
    return float(vals[b, u, k])


def snr_array(budget: LinkBudget, n_b: int, n_u: int, n_k: int) -> np.ndarray:
    """Broadcast the budget to an ``(N_B, N_U, N_K)`` SNR array."""
    vals = budget.linear_snr()
    if vals.ndim == 1:
        if vals.shape[0] != n_b:
            raise ConfigError(f"per-satellite SNR has {vals.shape[0]} entries for {n_b} satellites")
        vals = vals[:, None, None]
    elif vals.ndim == 3 and vals.shape != (n_b, n_u, n_k):
        raise ConfigError(f"SNR array shape {vals.shape} != {(n_b, n_u, n_k)}")
    elif vals.ndim not in (0, 3):
        raise ConfigError("SNR must be scalar, per-satellite or (N_B, N_U, N_K)")
    return np.broadcast_to(vals, (n_b, n_u, n_k)).astype(float)
