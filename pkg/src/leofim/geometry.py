"""Satellite and receiver kinematics.

Positions, velocities, receiver orientation, line-of-sight unit vectors,
propagation delays and Doppler shifts, plus the analytic derivatives the
location Jacobian needs. Everything is SI: meters, seconds, radians.

The unit vector ``Delta`` always points from the satellite to the receiver
(or to one of its antennas), so ``d tau / d p_receiver = Delta / c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s, exact

__all__ = [
    "SPEED_OF_LIGHT",
    "GeometryError",
    "SatelliteState",
    "ReceiverState",
    "LinkGeometry",
    "unit_direction",
    "rotation_matrix",
    "rotation_derivatives",
    "antenna_position",
    "propagation_delay",
    "doppler_shift",
    "doppler_position_gradient",
    "link_geometry",
]


class GeometryError(ValueError):
    """Invalid or singular geometry (non-finite angles, coincident points)."""


def _finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise GeometryError(f"non-finite geometry input: {v!r}")


def unit_direction(azimuth: float, elevation: float) -> np.ndarray:
    """Unit vector for an azimuth and a polar (from +z) elevation angle.

    Returns ``[cos(az) sin(el), sin(az) sin(el), cos(el)]``.
    """
    _finite(azimuth, elevation)
    sin_el = np.sin(elevation)
    return np.array([np.cos(azimuth) * sin_el, np.sin(azimuth) * sin_el, np.cos(elevation)])


def _rx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _ry(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _drx(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]])


def _dry(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]])


def _drz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])


def rotation_matrix(orientation) -> np.ndarray:
    """Body-to-local rotation for ``orientation = [yaw, pitch, roll]``.

    ZYX intrinsic convention: ``Q = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.
    """
    yaw, pitch, roll = np.asarray(orientation, dtype=float)
    _finite(yaw, pitch, roll)
    return _rz(yaw) @ _ry(pitch) @ _rx(roll)


def rotation_derivatives(orientation) -> np.ndarray:
    """Partial derivatives of :func:`rotation_matrix`, shape ``(3, 3, 3)``.

    Index 0 is the angle (yaw, pitch, roll), the rest is the matrix.
    """
    yaw, pitch, roll = np.asarray(orientation, dtype=float)
    _finite(yaw, pitch, roll)
    rz, ry, rx = _rz(yaw), _ry(pitch), _rx(roll)
    return np.stack([_drz(yaw) @ ry @ rx, rz @ _dry(pitch) @ rx, rz @ ry @ _drx(roll)])


@dataclass(frozen=True)
class SatelliteState:
    """Known satellite ephemeris.

    ``azimuths``/``elevations`` give the motion direction for each slot; a
    single entry means the direction is the same in every slot. Slot ``k``
    places the satellite at ``position + k * dt * speed * direction(k)``.
    """

    position: np.ndarray
    speed: float
    azimuths: tuple = (0.0,)
    elevations: tuple = (np.pi / 2,)

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        object.__setattr__(self, "position", pos)
        az = tuple(float(a) for a in np.atleast_1d(self.azimuths))
        el = tuple(float(e) for e in np.atleast_1d(self.elevations))
        object.__setattr__(self, "azimuths", az)
        object.__setattr__(self, "elevations", el)
        _finite(pos, self.speed, az, el)
        if self.speed < 0:
            raise GeometryError("satellite speed must be >= 0")
        if len(az) != len(el):
            raise GeometryError("satellite azimuths and elevations differ in length")

    @property
    def n_defined_slots(self) -> int:
        return len(self.azimuths)

    def direction(self, k: int) -> np.ndarray:
        if self.n_defined_slots == 1:
            return unit_direction(self.azimuths[0], self.elevations[0])
        if k >= self.n_defined_slots:
            raise IndexError(f"slot {k} beyond the {self.n_defined_slots} defined directions")
        return unit_direction(self.azimuths[k], self.elevations[k])

    def position_at(self, k: int, dt: float) -> np.ndarray:
        return self.position + k * dt * self.speed * self.direction(k)

    def velocity_at(self, k: int) -> np.ndarray:
        return self.speed * self.direction(k)


@dataclass(frozen=True)
class ReceiverState:
    """Receiver centroid, constant-velocity motion, orientation and array.

    The receiver moves on a straight line, so its velocity at slot ``k`` is
    the reference velocity ``speed * unit_direction(azimuth, elevation)``.
    ``offsets`` are the body-frame antenna positions relative to the centroid.
    """

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    speed: float = 0.0
    azimuth: float = 0.0
    elevation: float = np.pi / 2
    orientation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    offsets: np.ndarray = field(default_factory=lambda: np.zeros((1, 3)))

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        ori = np.asarray(self.orientation, dtype=float).reshape(3)
        offs = np.atleast_2d(np.asarray(self.offsets, dtype=float))
        for name, value in (("position", pos), ("orientation", ori), ("offsets", offs)):
            object.__setattr__(self, name, value)
        _finite(pos, ori, offs, self.speed, self.azimuth, self.elevation)
        if offs.shape[1] != 3 or offs.shape[0] < 1:
            raise GeometryError("antenna offsets must be an (N_U, 3) array with N_U >= 1")
        if self.speed < 0:
            raise GeometryError("receiver speed must be >= 0")
        if len(np.unique(offs.round(12), axis=0)) != len(offs):
            raise GeometryError("antenna offsets must be distinct")

    @property
    def n_antennas(self) -> int:
        return self.offsets.shape[0]

    @property
    def velocity(self) -> np.ndarray:
        return self.speed * unit_direction(self.azimuth, self.elevation)

    @property
    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.orientation)

    def centroid_at(self, k: int, dt: float) -> np.ndarray:
        return self.position + k * dt * self.velocity


def antenna_position(receiver: ReceiverState, u: int, k: int, dt: float) -> np.ndarray:
    """Position of antenna ``u`` at slot ``k``: centroid plus rotated offset."""
    if not 0 <= u < receiver.n_antennas:
        raise IndexError(f"antenna index {u} out of range for {receiver.n_antennas} antennas")
    if k < 0:
        raise IndexError("slot index must be >= 0")
    return receiver.centroid_at(k, dt) + receiver.rotation @ receiver.offsets[u]


def propagation_delay(p_u, p_b) -> float:
    diff = np.asarray(p_u, dtype=float) - np.asarray(p_b, dtype=float)
    _finite(diff)
    return float(np.linalg.norm(diff) / SPEED_OF_LIGHT)


def doppler_shift(direction, v_sat, v_rx) -> float:
    """Doppler fraction ``Delta^T (v_sat - v_rx) / c``.

    ``direction`` must be the unit vector from satellite to receiver.
    """
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise GeometryError(f"line-of-sight vector is not unit norm: {np.linalg.norm(direction)}")
    rel = np.asarray(v_sat, dtype=float) - np.asarray(v_rx, dtype=float)
    return float(direction @ rel / SPEED_OF_LIGHT)


def doppler_position_gradient(direction, distance: float, v_sat, v_rx) -> np.ndarray:
    """Gradient of the Doppler fraction with respect to the receiver position.

    ``(I - Delta Delta^T) (v_sat - v_rx) / (c d)``; orthogonal to ``Delta``.
    """
    if not distance > 0:
        raise GeometryError("satellite-receiver distance must be positive")
    direction = np.asarray(direction, dtype=float)
    rel = np.asarray(v_sat, dtype=float) - np.asarray(v_rx, dtype=float)
    return (rel - (direction @ rel) * direction) / (SPEED_OF_LIGHT * distance)


@dataclass(frozen=True)
class LinkGeometry:
    """Per-link quantities for ``N_B`` satellites, ``N_U`` antennas, ``N_K`` slots.

    Arrays indexed ``[b, u, k]`` are per antenna, ``[b, k]`` at the centroid.
    """

    delay: np.ndarray             # (N_B, N_U, N_K) s
    distance: np.ndarray          # (N_B, N_U, N_K) m
    direction: np.ndarray         # (N_B, N_U, N_K, 3)
    centroid_distance: np.ndarray  # (N_B, N_K) m
    centroid_direction: np.ndarray  # (N_B, N_K, 3)
    doppler: np.ndarray           # (N_B, N_K)
    doppler_gradient: np.ndarray  # (N_B, N_K, 3) 1/m
    sat_velocity: np.ndarray      # (N_B, N_K, 3) m/s
    rx_velocity: np.ndarray       # (3,) m/s

    @property
    def azimuth(self) -> np.ndarray:
        d = self.centroid_direction
        return np.arctan2(d[..., 1], d[..., 0])

    @property
    def elevation(self) -> np.ndarray:
        return np.arccos(np.clip(self.centroid_direction[..., 2], -1.0, 1.0))


def link_geometry(satellites, receiver: ReceiverState, n_slots: int, dt: float) -> LinkGeometry:
    """Evaluate every satellite-antenna-slot link."""
    n_b, n_u = len(satellites), receiver.n_antennas
    rot = receiver.rotation
    offsets = receiver.offsets @ rot.T
    v_rx = receiver.velocity

    dist = np.empty((n_b, n_u, n_slots))
    dirs = np.empty((n_b, n_u, n_slots, 3))
    c_dist = np.empty((n_b, n_slots))
    c_dirs = np.empty((n_b, n_slots, 3))
    v_sat = np.empty((n_b, n_slots, 3))
    for b, sat in enumerate(satellites):
        for k in range(n_slots):
            los = receiver.centroid_at(k, dt) - sat.position_at(k, dt)
            v_sat[b, k] = sat.velocity_at(k)
            c_dist[b, k] = np.linalg.norm(los)
            # Antenna vectors built from the centroid line of sight keep the
            # small array-induced direction differences out of cancellation.
            ant = los + offsets
            dist[b, :, k] = np.linalg.norm(ant, axis=1)
            if c_dist[b, k] <= 0 or np.any(dist[b, :, k] <= 0):
                raise GeometryError(f"satellite {b} coincides with the receiver in slot {k}")
            c_dirs[b, k] = los / c_dist[b, k]
            dirs[b, :, k] = ant / dist[b, :, k, None]

    rel = v_sat - v_rx
    doppler = np.einsum("bki,bki->bk", c_dirs, rel) / SPEED_OF_LIGHT
    radial = np.einsum("bki,bki->bk", c_dirs, rel)
    grad = (rel - radial[..., None] * c_dirs) / (SPEED_OF_LIGHT * c_dist[..., None])
    return LinkGeometry(
        delay=dist / SPEED_OF_LIGHT,
        distance=dist,
        direction=dirs,
        centroid_distance=c_dist,
        centroid_direction=c_dirs,
        doppler=doppler,
        doppler_gradient=grad,
        sat_velocity=v_sat,
        rx_velocity=v_rx,
    )
