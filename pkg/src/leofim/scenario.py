"""Scenario container, default constellation and JSON (de)serialization.

JSON scenarios use degrees for every angle and SI units elsewhere; they are
converted to radians at this boundary. See ``README.md`` for the schema.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import GeometryError, ReceiverState, SatelliteState, unit_direction
from .waveform import ConfigError, LinkBudget, PulseError, PulseSpec, snr_array

__all__ = [
    "SyncMode",
    "Scenario",
    "ScenarioError",
    "EARTH_RADIUS",
    "DEFAULT_ALTITUDE",
    "DEFAULT_RMS_DURATION",
    "DEFAULT_HEADING_OFFSET",
    "default_scenario",
    "planar_array",
    "orbit_satellite",
    "load_scenario",
    "parse_scenario",
    "scenario_to_dict",
    "dump_scenario",
    "bundled_default_path",
]

EARTH_RADIUS = 6371e3  # m, spherical Earth for the default constellation
DEFAULT_ALTITUDE = 550e3
DEFAULT_SPEED = 7590.0
DEFAULT_PITCH = 0.15
DEFAULT_RMS_DURATION = 0.7  # s, RMS time duration of the observed pulse train per slot
DEFAULT_HEADING_OFFSET = 45.0  # deg, initial heading relative to the look azimuth
DEFAULT_LOOK_ANGLES = ((0.0, 60.0), (120.0, 45.0), (240.0, 70.0))  # (azimuth, elevation) deg


class SyncMode(str, enum.Enum):
    """Which clock/oscillator offsets are unknown."""

    FULL_SYNC = "full-sync"
    TIME_OFFSET = "time-offset-only"
    FREQ_OFFSET = "freq-offset-only"
    BOTH_OFFSETS = "both-offsets"
    GPS_SHARED = "gps-shared"

    @property
    def has_time_offset(self) -> bool:
        return self in (SyncMode.TIME_OFFSET, SyncMode.BOTH_OFFSETS, SyncMode.GPS_SHARED)

    @property
    def has_freq_offset(self) -> bool:
        return self in (SyncMode.FREQ_OFFSET, SyncMode.BOTH_OFFSETS, SyncMode.GPS_SHARED)


class ScenarioError(ValueError):
    """Scenario file could not be parsed or violates an invariant."""


@dataclass(frozen=True)
class Scenario:
    satellites: tuple
    receiver: ReceiverState
    pulse: PulseSpec = field(default_factory=lambda: PulseSpec(1e8, 0.0, DEFAULT_RMS_DURATION))
    budget: LinkBudget = field(default_factory=lambda: LinkBudget(snr_db=-20.0))
    n_slots: int = 1
    slot_spacing: float = 10.0
    carrier_frequency: float = 1e9
    sync_mode: SyncMode = SyncMode.BOTH_OFFSETS
    frequency_offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "satellites", tuple(self.satellites))
        object.__setattr__(self, "sync_mode", SyncMode(self.sync_mode))
        if len(self.satellites) < 1:
            raise ScenarioError("invariant N_B >= 1 violated: scenario has no satellites")
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ScenarioError(f"invariant N_K >= 1 violated: n_slots = {self.n_slots}")
        if not self.slot_spacing > 0:
            raise ScenarioError(f"invariant slot_spacing (Delta_t) > 0 violated: {self.slot_spacing}")
        if not self.carrier_frequency > 0:
            raise ScenarioError(f"invariant carrier_frequency > 0 violated: {self.carrier_frequency}")
        for b, sat in enumerate(self.satellites):
            if sat.n_defined_slots not in (1,) and sat.n_defined_slots < self.n_slots:
                raise ScenarioError(
                    f"satellites[{b}] defines {sat.n_defined_slots} slot directions for {self.n_slots} slots"
                )

    @property
    def n_satellites(self) -> int:
        return len(self.satellites)

    @property
    def n_antennas(self) -> int:
        return self.receiver.n_antennas

    @property
    def shape(self) -> tuple:
        return self.n_satellites, self.n_antennas, self.n_slots

    def with_changes(self, **changes) -> "Scenario":
        return replace(self, **changes)


def planar_array(n_antennas: int, pitch: float = DEFAULT_PITCH) -> np.ndarray:
    """Square grid in the body x-y plane, filled row by row, zero mean."""
    m = math.ceil(math.sqrt(n_antennas))
    idx = np.arange(n_antennas)
    pts = np.column_stack([(idx % m) * pitch, (idx // m) * pitch, np.zeros(n_antennas)])
    return pts - pts.mean(axis=0)


def _direction_angles(vec):
    vec = vec / np.linalg.norm(vec)
    return math.atan2(vec[1], vec[0]), math.acos(max(-1.0, min(1.0, vec[2])))


def orbit_satellite(
    azimuth: float,
    elevation: float,
    n_slots: int,
    slot_spacing: float,
    altitude: float = DEFAULT_ALTITUDE,
    speed: float = DEFAULT_SPEED,
    heading: Optional[float] = None,
) -> SatelliteState:
    """Satellite seen at a look angle from a receiver at the origin.

    ``azimuth``/``elevation`` (radians, elevation above the horizon) place
    the satellite at ``altitude`` over a spherical Earth centred at
    ``(0, 0, -EARTH_RADIUS)``. Its slot-k direction is the tangent of the
    circular orbit through that point at time ``k * slot_spacing``; the
    initial heading (radians from +x) defaults to ``azimuth + 90 deg``.
    """
    r_orbit = EARTH_RADIUS + altitude
    sin_el = math.sin(elevation)
    rng = math.sqrt(r_orbit**2 - (EARTH_RADIUS * math.cos(elevation)) ** 2) - EARTH_RADIUS * sin_el
    look = np.array([math.cos(elevation) * math.cos(azimuth), math.cos(elevation) * math.sin(azimuth), sin_el])
    position = rng * look
    radial = position - np.array([0.0, 0.0, -EARTH_RADIUS])
    radial /= np.linalg.norm(radial)
    heading = azimuth + math.pi / 2 if heading is None else heading
    tangent = np.array([math.cos(heading), math.sin(heading), 0.0])
    tangent -= (tangent @ radial) * radial
    tangent /= np.linalg.norm(tangent)
    rate = speed / r_orbit
    az, el = [], []
    for k in range(n_slots):
        theta = rate * k * slot_spacing
        a, e = _direction_angles(tangent * math.cos(theta) - radial * math.sin(theta))
        az.append(a)
        el.append(e)
    return SatelliteState(position, speed, tuple(az), tuple(el))


def _extra_look_angles(n):
    angles = list(DEFAULT_LOOK_ANGLES)
    i = 0
    while len(angles) < n:
        angles.append(((60.0 + 120.0 * i + 17.0 * (i // 3)) % 360.0, (50.0, 65.0, 40.0)[i % 3]))
        i += 1
    return angles[:n]


def default_scenario(
    n_satellites: int = 3,
    n_slots: int = 3,
    n_antennas: int = 4,
    snr_db: float = -20.0,
    carrier_frequency: float = 1e9,
    slot_spacing: float = 10.0,
    sync_mode: SyncMode = SyncMode.BOTH_OFFSETS,
    alpha1: float = 1e8,
    alpha2: float = 0.0,
    rms_duration: float = DEFAULT_RMS_DURATION,
    pitch: float = DEFAULT_PITCH,
    heading_offset: float = DEFAULT_HEADING_OFFSET,
) -> Scenario:
    """Reference geometry: LEO satellites at 550 km, static receiver at the origin.

    The first three satellites sit at azimuths 0/120/240 deg and elevations
    60/45/70 deg; further satellites are spread deterministically. The
    receiver has a square planar array with fixed ``pitch``.
    """
    sats = tuple(
        orbit_satellite(
            math.radians(az), math.radians(el), n_slots, slot_spacing, heading=math.radians(az + heading_offset)
        )
        for az, el in _extra_look_angles(n_satellites)
    )
    receiver = ReceiverState(offsets=planar_array(n_antennas, pitch))
    return Scenario(
        satellites=sats,
        receiver=receiver,
        pulse=PulseSpec(alpha1=alpha1, alpha2=alpha2, rms_duration=rms_duration),
        budget=LinkBudget(snr_db=snr_db),
        n_slots=n_slots,
        slot_spacing=slot_spacing,
        carrier_frequency=carrier_frequency,
        sync_mode=SyncMode(sync_mode),
    )


# --- JSON ------------------------------------------------------------------


def _num(obj, key, where, default=None, positive=False):
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}.{key}: required field missing")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ScenarioError(f"{where}.{key}: expected a finite number, got {val!r}")
    if positive and not val > 0:
        raise ScenarioError(f"{where}.{key}: invariant {key} > 0 violated ({val!r})")
    return float(val)


def _vec(obj, key, where, default=None, length=3):
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}.{key}: required field missing")
        return np.asarray(default, dtype=float)
    try:
        arr = np.asarray(obj[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}.{key}: expected numbers ({exc})") from None
    if length is not None and arr.shape[-1:] != (length,):
        raise ScenarioError(f"{where}.{key}: expected length-{length} vector(s), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{where}.{key}: non-finite value")
    return arr


def _angles(obj, key, where, default):
    val = obj.get(key, default)
    arr = np.atleast_1d(np.asarray(val, dtype=float))
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ScenarioError(f"{where}.{key}: expected a number or list of numbers (degrees)")
    return tuple(np.deg2rad(arr))


def _parse_pulse(obj):
    where = "pulse"
    if "shape" in obj:
        try:
            return PulseSpec(
                shape=obj["shape"],
                bandwidth=_num(obj, "bandwidth_hz", where),
                duration=_num(obj, "duration_s", where),
                center_frequency=_num(obj, "center_frequency_hz", where, 0.0),
                time_offset=_num(obj, "time_offset_s", where, 0.0),
                rolloff=_num(obj, "rolloff", where, 0.25),
            )
        except PulseError as exc:
            raise ScenarioError(f"{where}: {exc}") from None
    try:
        return PulseSpec(
            alpha1=_num(obj, "alpha1_hz", where, 1e8),
            alpha2=_num(obj, "alpha2", where, 0.0),
            rms_duration=_num(obj, "rms_duration_s", where, DEFAULT_RMS_DURATION),
        )
    except PulseError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_budget(obj):
    where = "link_budget"
    kwargs = {"gain": _num(obj, "gain", where, 1.0)}
    for src, dst in (("snr", "snr"), ("snr_db", "snr_db")):
        if src in obj:
            kwargs[dst] = np.asarray(obj[src], dtype=float) if isinstance(obj[src], list) else _num(obj, src, where)
    if "noise_density_w_per_hz" in obj or "pulse_energy_j" in obj:
        kwargs["noise_density"] = _num(obj, "noise_density_w_per_hz", where)
        kwargs["pulse_energy"] = _num(obj, "pulse_energy_j", where)
    if len(kwargs) == 1:
        kwargs["snr_db"] = -20.0
    try:
        return LinkBudget(**kwargs)
    except ConfigError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def parse_scenario(data: dict) -> Scenario:
    """Build a validated :class:`Scenario` from a decoded JSON object."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be a JSON object")
    n_slots = data.get("n_slots", 1)
    if isinstance(n_slots, bool) or not isinstance(n_slots, int) or n_slots < 1:
        raise ScenarioError(f"scenario.n_slots: invariant N_K >= 1 violated ({n_slots!r})")
    dt = _num(data, "slot_spacing_s", "scenario", 10.0)
    if not dt > 0:
        raise ScenarioError(f"scenario.slot_spacing_s: invariant Delta_t > 0 violated ({dt!r})")
    fc = _num(data, "carrier_frequency_hz", "scenario", 1e9, positive=True)

    sats_raw = data.get("satellites")
    if not isinstance(sats_raw, list) or not sats_raw:
        raise ScenarioError("scenario.satellites: invariant N_B >= 1 violated (need a non-empty list)")
    sats = []
    for b, s in enumerate(sats_raw):
        where = f"satellites[{b}]"
        if not isinstance(s, dict):
            raise ScenarioError(f"{where}: expected an object")
        try:
            if "look_azimuth_deg" in s:
                look_az = _num(s, "look_azimuth_deg", where)
                sats.append(
                    orbit_satellite(
                        math.radians(look_az),
                        math.radians(_num(s, "look_elevation_deg", where)),
                        n_slots,
                        dt,
                        altitude=_num(s, "altitude_m", where, DEFAULT_ALTITUDE, positive=True),
                        speed=_num(s, "speed_mps", where, DEFAULT_SPEED),
                        heading=math.radians(_num(s, "heading_deg", where, look_az + DEFAULT_HEADING_OFFSET)),
                    )
                )
            else:
                sats.append(
                    SatelliteState(
                        _vec(s, "position_m", where),
                        _num(s, "speed_mps", where, DEFAULT_SPEED),
                        _angles(s, "azimuth_deg", where, 0.0),
                        _angles(s, "elevation_deg", where, 90.0),
                    )
                )
        except GeometryError as exc:
            raise ScenarioError(f"{where}: {exc}") from None

    rx = data.get("receiver", {})
    where = "receiver"
    if not isinstance(rx, dict):
        raise ScenarioError(f"{where}: expected an object")
    if "antenna_offsets_m" in rx:
        offsets = _vec(rx, "antenna_offsets_m", where)
        offsets = np.atleast_2d(offsets)
    else:
        n_ant = rx.get("n_antennas", 1)
        if isinstance(n_ant, bool) or not isinstance(n_ant, int) or n_ant < 1:
            raise ScenarioError(f"{where}.n_antennas: invariant N_U >= 1 violated ({n_ant!r})")
        offsets = planar_array(n_ant, _num(rx, "array_pitch_m", where, DEFAULT_PITCH, positive=True))
    try:
        receiver = ReceiverState(
            position=_vec(rx, "position_m", where, np.zeros(3)),
            speed=_num(rx, "speed_mps", where, 0.0),
            azimuth=math.radians(_num(rx, "azimuth_deg", where, 0.0)),
            elevation=math.radians(_num(rx, "elevation_deg", where, 90.0)),
            orientation=np.deg2rad(_vec(rx, "orientation_deg", where, np.zeros(3))),
            offsets=offsets,
        )
    except GeometryError as exc:
        raise ScenarioError(f"{where}: {exc}") from None

    mode = data.get("sync_mode", SyncMode.BOTH_OFFSETS.value)
    try:
        mode = SyncMode(mode)
    except ValueError:
        choices = ", ".join(m.value for m in SyncMode)
        raise ScenarioError(f"scenario.sync_mode: unknown mode {mode!r} (choose {choices})") from None

    scen = Scenario(
        satellites=tuple(sats),
        receiver=receiver,
        pulse=_parse_pulse(data.get("pulse", {})),
        budget=_parse_budget(data.get("link_budget", {})),
        n_slots=n_slots,
        slot_spacing=dt,
        carrier_frequency=fc,
        sync_mode=mode,
        frequency_offset=_num(data, "frequency_offset_hz", "scenario", 0.0),
    )
    try:
        snr_array(scen.budget, *scen.shape)
    except ConfigError as exc:
        raise ScenarioError(f"link_budget: {exc}") from None
    return scen


def load_scenario(path) -> Scenario:
    """Read and validate a JSON scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data)


def _list(x):
    return np.asarray(x, dtype=float).tolist()


def scenario_to_dict(scen: Scenario) -> dict:
    pulse = scen.pulse
    if pulse.is_direct:
        pulse_d = {"alpha1_hz": pulse.alpha1, "alpha2": pulse.alpha2, "rms_duration_s": pulse.rms_duration}
    else:
        pulse_d = {
            "shape": pulse.shape,
            "bandwidth_hz": pulse.bandwidth,
            "duration_s": pulse.duration,
            "center_frequency_hz": pulse.center_frequency,
            "time_offset_s": pulse.time_offset,
            "rolloff": pulse.rolloff,
        }
    bud = scen.budget
    budget_d = {"gain": float(abs(bud.gain))}
    if bud.snr is not None:
        budget_d["snr"] = _list(bud.snr)
    elif bud.snr_db is not None:
        budget_d["snr_db"] = _list(bud.snr_db)
    else:
        budget_d["noise_density_w_per_hz"] = bud.noise_density
        budget_d["pulse_energy_j"] = bud.pulse_energy
    rx = scen.receiver
    return {
        "carrier_frequency_hz": scen.carrier_frequency,
        "slot_spacing_s": scen.slot_spacing,
        "n_slots": scen.n_slots,
        "sync_mode": scen.sync_mode.value,
        "frequency_offset_hz": scen.frequency_offset,
        "satellites": [
            {
                "position_m": _list(s.position),
                "speed_mps": s.speed,
                "azimuth_deg": _list(np.rad2deg(s.azimuths)),
                "elevation_deg": _list(np.rad2deg(s.elevations)),
            }
            for s in scen.satellites
        ],
        "receiver": {
            "position_m": _list(rx.position),
            "speed_mps": rx.speed,
            "azimuth_deg": math.degrees(rx.azimuth),
            "elevation_deg": math.degrees(rx.elevation),
            "orientation_deg": _list(np.rad2deg(rx.orientation)),
            "antenna_offsets_m": _list(rx.offsets),
        },
        "pulse": pulse_d,
        "link_budget": budget_d,
    }


def dump_scenario(scen: Scenario, path=None, indent: int = 2) -> str:
    text = json.dumps(scenario_to_dict(scen), indent=indent) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def bundled_default_path() -> Path:
    return Path(str(resources.files("leofim") / "data" / "default_scenario.json"))
