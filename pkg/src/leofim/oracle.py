"""Independent numerical checks of the closed forms.

* :func:`numeric_channel_fim` integrates ``(2 / N0) Re sum dmu_i dmu_j^* dt``
  over a sampled received signal
  ``mu(t) = beta s(t - tau + delta) exp(j 2 pi f_ob (t - tau + delta))`` with
  ``f_ob = f_c (1 - nu) + eps``; derivatives are central differences and
  fractional delays are applied in the frequency domain.
* :func:`jacobian_fd_check` differentiates the delay and Doppler model
  numerically and compares with :func:`~leofim.transform.build_jacobian`.

Both are deliberately written without reusing the analytic code paths they
verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .efim import schur_efim
from .fim import FimMatrix, channel_fim_block
from .geometry import SPEED_OF_LIGHT, ReceiverState, rotation_matrix
from .scenario import Scenario, SyncMode, default_scenario, orbit_satellite, planar_array
from .transform import ORIENTATION, POSITION, VELOCITY, build_jacobian
from .waveform import LinkBudget, PulseSpec

__all__ = [
    "OracleError",
    "SampledWaveform",
    "LinkParameters",
    "LEAKAGE_LIMIT",
    "numeric_channel_fim",
    "analytic_block_for",
    "block_agreement",
    "jacobian_fd_check",
    "oracle_waveform",
    "random_scenario",
    "random_spd",
    "schur_identity_error",
    "CheckResult",
    "run_verification",
]

LEAKAGE_LIMIT = 1e-6
FD_STEPS = {"position": 1.0, "velocity": 1e-3, "orientation": 1e-4}


class OracleError(RuntimeError):
    """The sampled waveform cannot support a trustworthy numerical FIM."""


@dataclass(frozen=True)
class SampledWaveform:
    """Complex baseband pulse samples ``s(start + n * sample_interval)``."""

    samples: np.ndarray
    sample_interval: float
    start: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size < 8:
            raise OracleError("waveform needs a 1-D array of at least 8 samples")
        if not self.sample_interval > 0:
            raise OracleError("sample interval must be > 0")
        if not np.isfinite(self.energy) or self.energy <= 0:
            raise OracleError("waveform energy must be finite and positive")

    @classmethod
    def gaussian(
        cls,
        rms_duration: float,
        center_frequency: float = 0.0,
        sample_rate: float = None,
        span_factor: float = 16.0,
    ) -> "SampledWaveform":
        """Gaussian envelope with ``|s(t)|^2 ~ exp(-t^2 / alpha_o^2)``, centred at 0.

        Args:
            rms_duration: RMS time duration ``alpha_o`` in seconds.
            center_frequency: Baseband frequency shift of the pulse (Hz).
            sample_rate: Samples per second; defaults to a rate that resolves
                the pulse and a carrier up to ``8 / alpha_o``.
            span_factor: Window length in units of ``alpha_o``.
        """
        sigma = rms_duration / math.sqrt(2)  # std of |s|^2
        sigma_f = 1 / (4 * math.pi * sigma)
        fs = sample_rate or 64 * (abs(center_frequency) + 10 * sigma_f)
        n = int(math.ceil(span_factor * rms_duration * fs))
        n += n % 2
        t = (np.arange(n) - n // 2) / fs
        s = np.exp(-(t**2) / (4 * sigma**2)) * np.exp(2j * math.pi * center_frequency * t)
        return cls(s, 1 / fs, float(t[0]))

    @property
    def times(self) -> np.ndarray:
        return self.start + self.sample_interval * np.arange(self.samples.size)

    @property
    def span(self) -> float:
        return self.sample_interval * self.samples.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.sample_interval)

    def statistics(self) -> tuple:
        """``(alpha1, alpha2, alpha_o)`` by direct summation over the samples."""
        dt = self.sample_interval
        spec = np.fft.fftshift(np.abs(np.fft.fft(self.samples)) ** 2)
        f = np.fft.fftshift(np.fft.fftfreq(self.samples.size, dt))
        m0, m1, m2 = (np.sum(f**n * spec) for n in (0, 1, 2))
        p = np.abs(self.samples) ** 2
        t = self.times
        mean = np.sum(t * p) / np.sum(p)
        var = np.sum((t - mean) ** 2 * p) / np.sum(p)
        return float(np.sqrt(m2 / m0)), float(m1 / np.sqrt(m2 * m0)), float(np.sqrt(2 * var))


@dataclass(frozen=True)
class LinkParameters:
    """True channel parameters of one link (``gain`` is the amplitude ``|beta|``)."""

    carrier_frequency: float
    tau: float = 0.0
    nu: float = 0.0
    gain: float = 1.0
    delta: float = 0.0
    eps: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.tau, self.nu, self.gain, self.delta, self.eps])


def _mean_signal(wave: SampledWaveform, f_c: float, eta: np.ndarray) -> np.ndarray:
    tau, nu, gain, delta, eps = eta
    shift = tau - delta
    freqs = np.fft.fftfreq(wave.samples.size, wave.sample_interval)
    delayed = np.fft.ifft(np.fft.fft(wave.samples) * np.exp(-2j * np.pi * freqs * shift))
    f_ob = f_c * (1 - nu) + eps
    return gain * delayed * np.exp(2j * np.pi * f_ob * (wave.times - shift))


def _check_sampling(wave: SampledWaveform, f_c: float, eta: np.ndarray) -> None:
    if wave.span < 8 * wave.statistics()[2]:
        raise OracleError("waveform span must cover at least 8 RMS durations")
    mu = _mean_signal(wave, f_c, eta)
    spec = np.abs(np.fft.fft(mu)) ** 2
    freqs = np.abs(np.fft.fftfreq(mu.size, wave.sample_interval))
    edge = freqs > 0.4 / wave.sample_interval
    leak = spec[edge].sum() / spec.sum()
    if leak > LEAKAGE_LIMIT:
        raise OracleError(f"aliasing: spectral leakage {leak:.2e} of energy near Nyquist exceeds {LEAKAGE_LIMIT:.0e}")
    p = np.abs(mu) ** 2
    tail = max(p[: mu.size // 32].sum(), p[-mu.size // 32 :].sum()) / p.sum()
    if tail > LEAKAGE_LIMIT:
        raise OracleError(f"time aliasing: {tail:.2e} of the energy sits at the window edges")


def numeric_channel_fim(wave: SampledWaveform, link: LinkParameters, noise_density: float) -> FimMatrix:
    """5x5 FIM over ``(tau, nu, beta, delta, eps)`` from the sampled signal.

    Step sizes follow each parameter's curvature: ``1e-3 / alpha1`` for the
    delay and time offset, ``1e-3 / (f_c alpha_o)`` for the Doppler,
    ``1e-3 / alpha_o`` for the frequency offset and ``1e-3 |beta|`` for the
    gain. A fourth-order central stencil keeps truncation well below the
    comparison tolerance.

    Raises:
        OracleError: the sampling aliases or the window truncates the pulse.
    """
    if not noise_density > 0:
        raise OracleError("noise density must be > 0")
    f_c = link.carrier_frequency
    alpha1, _, alpha_o = wave.statistics()
    eta0 = link.vector()
    _check_sampling(wave, f_c, eta0)
    steps = np.array([1e-3 / alpha1, 1e-3 / (f_c * alpha_o), 1e-3 * abs(link.gain), 1e-3 / alpha1, 1e-3 / alpha_o])
    derivs = []
    for i, h in enumerate(steps):
        def at(m):
            eta = eta0.copy()
            eta[i] += m * h
            return _mean_signal(wave, f_c, eta)

        derivs.append((-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h))
    d = np.array(derivs)
    j = (2 / noise_density) * np.real(d @ d.conj().T) * wave.sample_interval
    return FimMatrix(0.5 * (j + j.T), ("tau", "nu", "beta", "delta", "eps"))


def analytic_block_for(wave: SampledWaveform, link: LinkParameters, noise_density: float) -> FimMatrix:
    """Closed-form block with the SNR ``8 pi^2 |beta|^2 E / N0`` of ``wave``."""
    alpha1, alpha2, alpha_o = wave.statistics()
    snr = 8 * math.pi**2 * link.gain**2 * wave.energy / noise_density
    f_ob = link.carrier_frequency * (1 - link.nu) + link.eps
    omega = alpha1**2 + 2 * f_ob * alpha1 * alpha2 + f_ob**2
    return channel_fim_block(snr, omega, link.carrier_frequency, alpha_o, link.gain)


def block_agreement(numeric: FimMatrix, analytic: FimMatrix) -> dict:
    """Worst relative error on nonzero analytic entries and worst normalized zero entry."""
    a, n = analytic.matrix, numeric.matrix
    nz = a != 0
    rel = float(np.max(np.abs(n[nz] - a[nz]) / np.abs(a[nz])))
    scale = np.sqrt(np.outer(np.diag(n), np.diag(n)))
    zero = float(np.max(np.abs(n[~nz]) / scale[~nz])) if np.any(~nz) else 0.0
    return {"max_relative_error": rel, "max_normalized_zero": zero}


# --- Jacobian finite differences ---------------------------------------------


def _range_change(a, h1, h2):
    """``|a + h1| - |a + h2|`` without cancelling the large common part."""
    num = 2 * a @ (h1 - h2) + h1 @ h1 - h2 @ h2
    return num / (np.linalg.norm(a + h1) + np.linalg.norm(a + h2))


def _fd_rows(scenario: Scenario):
    """Numerical ``d tau_{b,u,k} / d kappa_1`` and ``d nu_{b,k} / d kappa_1``."""
    n_b, n_u, n_k = scenario.shape
    dt = scenario.slot_spacing
    rx = scenario.receiver
    p0, v0, o0 = rx.position, rx.velocity, rx.orientation
    offsets = rx.offsets
    q0 = rotation_matrix(o0)
    c = SPEED_OF_LIGHT
    d_tau = np.zeros((9, n_b, n_u, n_k))
    d_nu = np.zeros((9, n_b, n_k))
    # Perturbation of each kinematic component: antenna displacement at slot k,
    # plus the matching perturbed (p, v) for the Doppler model.
    for j in range(9):
        if j < 3:
            h = FD_STEPS["position"]
        elif j < 6:
            h = FD_STEPS["velocity"]
        else:
            h = FD_STEPS["orientation"]
        e = np.zeros(3)
        e[j % 3] = 1.0
        for b, sat in enumerate(scenario.satellites):
            for k in range(n_k):
                p_b = sat.position_at(k, dt)
                v_b = sat.velocity_at(k)
                base = p0 + k * dt * v0 - p_b
                for u in range(n_u):
                    a = base + q0 @ offsets[u]
                    disp = []
                    for sgn in (1.0, -1.0):
                        if j < 3:
                            disp.append(sgn * h * e)
                        elif j < 6:
                            disp.append(sgn * h * k * dt * e)
                        else:
                            ori = o0 + sgn * h * e
                            disp.append(rotation_matrix(ori) @ offsets[u] - q0 @ offsets[u])
                    d_tau[j, b, u, k] = _range_change(a, disp[0], disp[1]) / (2 * h * c)
                nus = []
                for sgn in (1.0, -1.0):
                    p, v = p0.copy(), v0.copy()
                    if j < 3:
                        p = p + sgn * h * e
                    elif j < 6:
                        v = v + sgn * h * e
                    los = p + k * dt * v - p_b
                    los = los / np.linalg.norm(los)
                    nus.append(los @ (v_b - v) / c)
                d_nu[j, b, k] = (nus[0] - nus[1]) / (2 * h)
    return d_tau, d_nu


def jacobian_fd_check(scenario: Scenario) -> float:
    """Worst relative error of the analytic kinematic Jacobian rows.

    Each (measurement kind, kinematic block) pair is compared in turn:
    ``max |fd - analytic| / max |analytic|`` over its entries. Pairs whose
    analytic entries are all exactly zero must be exactly zero numerically
    too; any nonzero residue there counts as relative error 1.
    """
    n_b, n_u, n_k = scenario.shape
    jac = build_jacobian(scenario).matrix
    idx_tau = [b * (n_u * n_k + n_k + 3) + k * n_u + u for b in range(n_b) for k in range(n_k) for u in range(n_u)]
    idx_nu = [b * (n_u * n_k + n_k + 3) + n_u * n_k + k for b in range(n_b) for k in range(n_k)]
    fd_tau, fd_nu = _fd_rows(scenario)
    fd_tau = fd_tau.transpose(0, 1, 3, 2).reshape(9, -1)  # (b, k, u) order
    fd_nu = fd_nu.reshape(9, -1)
    worst = 0.0
    for an_all, fd_all in ((jac[:9, idx_tau], fd_tau), (jac[:9, idx_nu], fd_nu)):
        for blk in (POSITION, VELOCITY, ORIENTATION):
            an, fd = an_all[blk], fd_all[blk]
            scale = np.abs(an).max()
            if scale == 0:
                err = 0.0 if np.all(fd == 0) else 1.0
            else:
                err = float(np.abs(fd - an).max() / scale)
            worst = max(worst, err)
    return worst


def random_scenario(rng: np.random.Generator, max_satellites: int = 4, max_slots: int = 4, max_antennas: int = 9) -> Scenario:
    """Randomized LEO geometry with a moving, rotated receiver."""
    n_b = int(rng.integers(1, max_satellites + 1))
    n_k = int(rng.integers(1, max_slots + 1))
    n_u = int(rng.integers(1, max_antennas + 1))
    dt = float(rng.uniform(1.0, 30.0))
    sats = tuple(
        orbit_satellite(
            float(rng.uniform(0, 2 * np.pi)),
            float(rng.uniform(np.radians(20), np.radians(85))),
            n_k,
            dt,
            altitude=float(rng.uniform(400e3, 1200e3)),
            speed=float(rng.uniform(7000, 7800)),
            heading=float(rng.uniform(0, 2 * np.pi)),
        )
        for _ in range(n_b)
    )
    receiver = ReceiverState(
        position=rng.normal(0, 100.0, 3),
        speed=float(rng.uniform(0, 40.0)),
        azimuth=float(rng.uniform(0, 2 * np.pi)),
        elevation=float(rng.uniform(np.radians(60), np.radians(120))),
        orientation=rng.uniform(-np.pi / 3, np.pi / 3, 3),
        offsets=planar_array(n_u, float(rng.uniform(0.05, 0.5))),
    )
    return Scenario(
        satellites=sats,
        receiver=receiver,
        pulse=PulseSpec(alpha1=float(rng.uniform(1e6, 2e8)), alpha2=float(rng.uniform(-0.5, 0.5)),
                        rms_duration=float(rng.uniform(1e-3, 1.0))),
        budget=LinkBudget(snr_db=float(rng.uniform(-30, 30))),
        n_slots=n_k,
        slot_spacing=dt,
        carrier_frequency=float(rng.uniform(0.5e9, 30e9)),
        sync_mode=SyncMode.BOTH_OFFSETS,
    )


# --- Schur identity ------------------------------------------------------------


def random_spd(rng: np.random.Generator, n: int, cond: float = 1e4) -> np.ndarray:
    """Random symmetric positive definite matrix with a chosen condition number."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    w = np.geomspace(1.0, cond, n)
    return (q * w) @ q.T


def schur_identity_error(m: np.ndarray, n_interest: int) -> float:
    """Relative error between ``(J^e)^-1`` and the interest block of ``J^-1``."""
    labels = tuple(range(m.shape[0]))
    res = schur_efim(FimMatrix(m, labels), range(n_interest))
    lhs = np.linalg.inv(res.matrix.matrix)
    rhs = np.linalg.inv(m)[:n_interest, :n_interest]
    return float(np.abs(lhs - rhs).max() / np.abs(rhs).max())


# --- verification runner --------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "passed": self.passed, **self.details}


def _sample_rate(alpha_o, center_frequency, carrier):
    sigma_f = 1 / (2 * math.sqrt(2) * math.pi * alpha_o)
    return 16 * (abs(carrier) + abs(center_frequency) + 8 * sigma_f)


def oracle_waveform(alpha_o: float, center_frequency: float, carrier: float) -> SampledWaveform:
    """Gaussian test pulse sampled fast enough for ``carrier``."""
    return SampledWaveform.gaussian(alpha_o, center_frequency, _sample_rate(alpha_o, center_frequency, carrier))


def _oracle_draw(rng):
    # Carrier within a few effective bandwidths so the prescribed delay step
    # (1e-3 / alpha1) stays small against the carrier period.
    alpha_o = float(rng.uniform(5e-3, 2e-2))
    f0 = float(rng.uniform(-0.3, 0.3)) / alpha_o
    alpha1 = math.hypot(1 / (2 * math.sqrt(2) * math.pi * alpha_o), f0)
    link = LinkParameters(
        carrier_frequency=float(rng.uniform(1.0, 8.0)) * alpha1,
        nu=float(rng.uniform(-1e-3, 1e-3)),
        gain=float(rng.uniform(0.2, 3.0)),
        eps=float(rng.uniform(-0.5, 0.5)) * alpha1,
    )
    return oracle_waveform(alpha_o, f0, link.carrier_frequency), link, float(rng.uniform(0.1, 10.0))


def run_verification(seed: int = 0, n_draws: int = 20) -> list:
    """Run the oracle suite; returns one :class:`CheckResult` per check."""
    rng = np.random.default_rng(seed)
    out = []

    link = LinkParameters(carrier_frequency=50.0, gain=1.3)
    wave = oracle_waveform(1e-2, 0.0, link.carrier_frequency)
    agree = block_agreement(numeric_channel_fim(wave, link, 0.5), analytic_block_for(wave, link, 0.5))
    out.append(CheckResult("channel FIM, gaussian pulse: nonzero entries", agree["max_relative_error"], 1e-4))
    out.append(CheckResult("channel FIM, gaussian pulse: zero pattern", agree["max_normalized_zero"], 1e-4))

    rel, zero = 0.0, 0.0
    for _ in range(n_draws):
        w, l, n0 = _oracle_draw(rng)
        a = block_agreement(numeric_channel_fim(w, l, n0), analytic_block_for(w, l, n0))
        rel, zero = max(rel, a["max_relative_error"]), max(zero, a["max_normalized_zero"])
    out.append(CheckResult(f"channel FIM, {n_draws} random pulses: nonzero entries", rel, 1e-4))
    out.append(CheckResult(f"channel FIM, {n_draws} random pulses: zero pattern", zero, 1e-4))

    out.append(CheckResult("Jacobian FD, default scenario", jacobian_fd_check(default_scenario()), 1e-6))
    worst = max(jacobian_fd_check(random_scenario(rng)) for _ in range(n_draws))
    out.append(CheckResult(f"Jacobian FD, {n_draws} random scenarios", worst, 1e-6))

    worst = 0.0
    for _ in range(n_draws):
        n = int(rng.integers(10, 31))
        worst = max(worst, schur_identity_error(random_spd(rng, n), int(rng.integers(1, n))))
    out.append(CheckResult(f"Schur identity, {n_draws} random SPD matrices", worst, 1e-9))
    return out
