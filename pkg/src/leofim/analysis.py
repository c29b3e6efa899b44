"""Identifiability verdicts, minimal configurations, CRLB reports and sweeps.

A kinematic block is identifiable when its equivalent FIM is positive
definite, tested as ``lambda_min / lambda_max > threshold``. Position,
velocity and orientation are judged on their own diagonal block of the 9x9
equivalent FIM (the other kinematic parameters treated as known); the
joint 9D target uses the full matrix scaled to unit diagonal so that mixing
meters, m/s and radians does not move the ratio.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .efim import EfimResult, location_efim
from .fim import link_statistics
from .geometry import GeometryError, SatelliteState
from .scenario import DEFAULT_PITCH, Scenario, SyncMode, default_scenario, planar_array
from .waveform import ConfigError, LinkBudget

__all__ = [
    "IDENTIFIABILITY_THRESHOLD",
    "TARGETS",
    "SWEEP_AXES",
    "IdentifiabilityVerdict",
    "CrlbReport",
    "ConfigTable",
    "SweepResult",
    "eigenvalue_ratio",
    "check_identifiability",
    "minimal_config_search",
    "crlb_report",
    "parameter_sweep",
    "sweep_scenario",
    "thread_cap",
    "doppler_position_information",
    "orientation_frequency_check",
]

IDENTIFIABILITY_THRESHOLD = 1e-10
TARGETS = ("position", "velocity", "orientation", "9d")
SWEEP_AXES = ("antennas", "slot-spacing", "frequency", "snr")


def _target(name: str) -> str:
    key = str(name).lower()
    if key not in TARGETS:
        raise ConfigError(f"unknown target {name!r}; expected one of {', '.join(TARGETS)}")
    return key


@dataclass(frozen=True)
class IdentifiabilityVerdict:
    """Positive-definiteness verdict for one target block.

    ``config`` is ``(N_B, N_K, N_U)``.
    """

    target: str
    config: tuple
    mode: SyncMode
    positive_definite: bool
    ratio: float
    threshold: float = IDENTIFIABILITY_THRESHOLD
    reason: str = ""

    def describe(self) -> str:
        n_b, n_k, n_u = self.config
        ant = "1 antenna" if n_u == 1 else "multi-antenna"
        sats = "1 satellite" if n_b == 1 else f"{n_b} satellites"
        slots = "1 slot" if n_k == 1 else f"{n_k} slots"
        return f"{sats}, {ant}, {slots}: {'PD' if self.positive_definite else 'not PD'}"

    def to_dict(self) -> dict:
        n_b, n_k, n_u = self.config
        return {
            "target": self.target,
            "mode": self.mode.value,
            "n_satellites": n_b,
            "n_slots": n_k,
            "n_antennas": n_u,
            "positive_definite": self.positive_definite,
            "eigenvalue_ratio": self.ratio,
            "threshold": self.threshold,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class CrlbReport:
    """Square-root CRLBs of the 9D equivalent FIM.

    Bounds are ``sqrt`` of the summed diagonal of ``(J^e)^-1`` over each
    three-parameter block; ``per_axis`` holds the nine individual standard
    deviations. All numbers are ``None`` when the 9D FIM is not identifiable.
    """

    verdict: IdentifiabilityVerdict
    position_bound: Optional[float] = None
    velocity_bound: Optional[float] = None
    orientation_bound: Optional[float] = None
    per_axis: Optional[tuple] = None

    @property
    def identifiable(self) -> bool:
        return self.verdict.positive_definite

    def to_dict(self) -> dict:
        return {
            "identifiable": self.identifiable,
            "position_bound_m": self.position_bound,
            "velocity_bound_mps": self.velocity_bound,
            "orientation_bound_rad": self.orientation_bound,
            "per_axis": None if self.per_axis is None else list(self.per_axis),
            "verdict": self.verdict.to_dict(),
        }


def _config(scenario: Scenario) -> tuple:
    return scenario.n_satellites, scenario.n_slots, scenario.n_antennas


def eigenvalue_ratio(efim: EfimResult, target: str) -> float:
    """``lambda_min / lambda_max`` of the target block (0 if the block is zero)."""
    target = _target(target)
    lam = efim.eigenvalues(target, normalized=(target == "9d"))
    return float(lam[0] / lam[-1]) if lam.size and lam[-1] > 0 else 0.0


def check_identifiability(
    scenario: Scenario,
    mode: SyncMode = None,
    target: str = "position",
    threshold: float = IDENTIFIABILITY_THRESHOLD,
    efim: EfimResult = None,
) -> IdentifiabilityVerdict:
    """Run the full pipeline and threshold the eigenvalue ratio of ``target``.

    Degenerate geometry is reported as a non-identifiable verdict carrying the
    error message as ``reason`` instead of raising.
    """
    target = _target(target)
    mode = SyncMode(mode or scenario.sync_mode)
    try:
        efim = efim or location_efim(scenario, mode)
    except GeometryError as exc:
        return IdentifiabilityVerdict(target, _config(scenario), mode, False, 0.0, threshold, f"degenerate geometry: {exc}")
    ratio = eigenvalue_ratio(efim, target)
    pd = ratio > threshold
    reason = "" if pd else f"eigenvalue ratio {ratio:.3e} <= threshold {threshold:.0e}"
    return IdentifiabilityVerdict(target, _config(scenario), mode, pd, ratio, threshold, reason)


@dataclass(frozen=True)
class ConfigTable:
    """Exhaustive verdict grid plus its Pareto-minimal identifiable rows."""

    target: str
    mode: SyncMode
    rows: tuple
    minimal: tuple

    def lookup(self, n_satellites: int, n_slots: int, n_antennas: int) -> IdentifiabilityVerdict:
        for row in self.rows:
            if row.config == (n_satellites, n_slots, n_antennas):
                return row
        raise KeyError((n_satellites, n_slots, n_antennas))


def _pareto_minimal(configs: Sequence[tuple]) -> list:
    out = []
    for c in configs:
        dominated = any(o != c and all(x <= y for x, y in zip(o, c)) for o in configs)
        if not dominated:
            out.append(c)
    return out


def minimal_config_search(
    ranges: dict,
    mode: SyncMode,
    target: str,
    factory: Callable[[int, int, int], Scenario] = None,
    threshold: float = IDENTIFIABILITY_THRESHOLD,
) -> ConfigTable:
    """Verdicts over every ``(N_B, N_K, N_U)`` in ``ranges``.

    Args:
        ranges: ``{"n_satellites": [...], "n_slots": [...], "n_antennas": [...]}``.
        mode: Synchronization mode.
        target: Block to test.
        factory: Builds the scenario for a configuration; defaults to the
            reference constellation of :func:`default_scenario`.
        threshold: PD threshold on the eigenvalue ratio.

    Returns:
        A :class:`ConfigTable` whose rows follow lexicographic
        ``(N_B, N_K, N_U)`` order.
    """
    target = _target(target)
    mode = SyncMode(mode)
    axes = []
    for key in ("n_satellites", "n_slots", "n_antennas"):
        vals = sorted(set(int(v) for v in ranges.get(key, (1,))))
        if not vals or vals[0] < 1:
            raise ConfigError(f"range for {key} must be a nonempty set of positive integers")
        axes.append(vals)
    if factory is None:
        def factory(n_b, n_k, n_u):
            return default_scenario(n_satellites=n_b, n_slots=n_k, n_antennas=n_u, sync_mode=mode)
    rows = []
    for n_b, n_k, n_u in itertools.product(*axes):
        rows.append(check_identifiability(factory(n_b, n_k, n_u), mode, target, threshold))
    good = [r.config for r in rows if r.positive_definite]
    minimal = _pareto_minimal(good)
    return ConfigTable(target, mode, tuple(rows), tuple(r for r in rows if r.config in minimal))


def crlb_report(scenario: Scenario, mode: SyncMode = None, threshold: float = IDENTIFIABILITY_THRESHOLD) -> CrlbReport:
    """Position / velocity / orientation bounds from the 9D equivalent FIM."""
    mode = SyncMode(mode or scenario.sync_mode)
    try:
        efim = location_efim(scenario, mode)
    except GeometryError:
        return CrlbReport(check_identifiability(scenario, mode, "9d", threshold))
    verdict = check_identifiability(scenario, mode, "9d", threshold, efim=efim)
    if not verdict.positive_definite:
        return CrlbReport(verdict)
    var = np.diag(efim.inverse())
    return CrlbReport(
        verdict,
        position_bound=float(math.sqrt(var[0:3].sum())),
        velocity_bound=float(math.sqrt(var[3:6].sum())),
        orientation_bound=float(math.sqrt(var[6:9].sum())),
        per_axis=tuple(float(math.sqrt(v)) for v in var),
    )


# --- sweeps -----------------------------------------------------------------


def thread_cap(default: Optional[int] = None) -> int:
    """Worker limit from ``LEOFIM_THREADS`` (falls back to the CPU count)."""
    raw = os.environ.get("LEOFIM_THREADS")
    if raw is None or raw.strip() == "":
        return default or os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LEOFIM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"LEOFIM_THREADS must be a positive integer, got {raw!r}")
    return n


def _rotate(vec, axis, angle):
    # Rodrigues rotation of vec about a unit axis.
    return vec * math.cos(angle) + np.cross(axis, vec) * math.sin(angle) + axis * (axis @ vec) * (1 - math.cos(angle))


def _retime(sat: SatelliteState, n_slots: int, old_dt: float, new_dt: float) -> SatelliteState:
    """Rescale a constant-rate turning direction schedule to a new slot spacing."""
    if sat.n_defined_slots == 1 or n_slots == 1:
        return sat
    d0, d1 = sat.direction(0), sat.direction(1)
    axis = np.cross(d0, d1)
    sin_a = np.linalg.norm(axis)
    if sin_a < 1e-15:
        dirs = [d0] * n_slots
    else:
        axis /= sin_a
        rate = math.atan2(sin_a, d0 @ d1) / old_dt
        for k in range(n_slots):
            if np.linalg.norm(_rotate(d0, axis, rate * k * old_dt) - sat.direction(k)) > 1e-9:
                raise ConfigError("slot-spacing sweep needs satellite directions that turn at a constant rate")
        dirs = [_rotate(d0, axis, rate * k * new_dt) for k in range(n_slots)]
    az = tuple(math.atan2(d[1], d[0]) for d in dirs)
    el = tuple(math.acos(max(-1.0, min(1.0, d[2]))) for d in dirs)
    return SatelliteState(sat.position, sat.speed, az, el)


def _array_pitch(offsets: np.ndarray) -> float:
    if offsets.shape[0] < 2:
        return DEFAULT_PITCH
    diff = offsets[:, None, :] - offsets[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    return float(dist[dist > 0].min())


def sweep_scenario(scenario: Scenario, axis: str, value: float) -> Scenario:
    """Copy of ``scenario`` with one sweep axis set to ``value``.

    ``antennas`` rebuilds the square planar array at the existing element
    pitch; ``slot-spacing`` re-times constant-rate satellite turns; ``snr``
    sets a uniform per-link SNR in dB; ``frequency`` changes only the
    carrier (the physical array is unchanged).
    """
    if axis == "antennas":
        n = int(value)
        if n != value or n < 1:
            raise ConfigError(f"antenna count must be a positive integer, got {value!r}")
        rx = scenario.receiver
        offsets = planar_array(n, _array_pitch(rx.offsets))
        return scenario.with_changes(receiver=replace(rx, offsets=offsets))
    if axis == "slot-spacing":
        if not value > 0:
            raise ConfigError(f"slot spacing must be > 0, got {value!r}")
        sats = tuple(_retime(s, scenario.n_slots, scenario.slot_spacing, float(value)) for s in scenario.satellites)
        return scenario.with_changes(satellites=sats, slot_spacing=float(value))
    if axis == "frequency":
        if not value > 0:
            raise ConfigError(f"carrier frequency must be > 0, got {value!r}")
        return scenario.with_changes(carrier_frequency=float(value))
    if axis == "snr":
        return scenario.with_changes(budget=LinkBudget(snr_db=float(value), gain=scenario.budget.gain))
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: tuple
    reports: tuple = field(repr=False)

    def column(self, name: str) -> np.ndarray:
        """``position`` / ``velocity`` / ``orientation`` bounds (NaN where not identifiable)."""
        attr = f"{name}_bound"
        return np.array([np.nan if getattr(r, attr) is None else getattr(r, attr) for r in self.reports])


def parameter_sweep(
    scenario: Scenario,
    axis: str,
    grid: Iterable[float],
    mode: SyncMode = None,
    max_workers: Optional[int] = None,
) -> SweepResult:
    """One :class:`CrlbReport` per grid value, evaluated concurrently.

    Results are returned in grid order regardless of completion order.
    The worker count is ``max_workers`` or ``LEOFIM_THREADS``.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    values = tuple(float(v) for v in grid)
    if not values:
        raise ConfigError("sweep grid is empty")
    steps = np.diff(values)
    if values and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigError("sweep grid must be strictly monotone")
    mode = SyncMode(mode or scenario.sync_mode)
    scenarios = [sweep_scenario(scenario, axis, v) for v in values]
    workers = max(1, min(len(values), max_workers or thread_cap()))

    def run(s):
        return crlb_report(s, mode)

    if workers == 1:
        reports = [run(s) for s in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, scenarios))
    return SweepResult(axis, values, tuple(reports))


# --- diagnostics --------------------------------------------------------------


def doppler_position_information(scenario: Scenario) -> np.ndarray:
    """3x3 position information carried by the Doppler measurements alone.

    ``sum_{b,u,k} SNR f_c^2 alpha_o^2 / 2 * grad(nu) grad(nu)^T`` with no
    nuisance elimination.
    """
    snr, _, alpha_o, geo = link_statistics(scenario)
    w = snr.sum(axis=1) * scenario.carrier_frequency**2 * alpha_o**2 / 2  # (b, k)
    g = geo.doppler_gradient
    return np.einsum("bk,bki,bkj->ij", w, g, g)


def orientation_frequency_check(scenario: Scenario, frequencies: Sequence[float] = (1e9, 60e9), mode: SyncMode = None) -> dict:
    """Orientation bound at several carriers with the physical array held fixed.

    Returns:
        ``{"frequencies": [...], "orientation_bounds": [...], "relative_change": float}``
        where the change is ``|b_last - b_first| / b_first``.
    """
    bounds = []
    for f in frequencies:
        rep = crlb_report(sweep_scenario(scenario, "frequency", f), mode)
        bounds.append(rep.orientation_bound)
    if any(b is None for b in bounds):
        change = float("nan")
    else:
        change = abs(bounds[-1] - bounds[0]) / bounds[0]
    return {"frequencies": list(frequencies), "orientation_bounds": bounds, "relative_change": change}
