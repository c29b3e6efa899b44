"""Channel-to-location Jacobian and FIM transformation.

Location parameters::

    kappa = [p (3, m), v (3, m/s), yaw/pitch/roll (3, rad), zeta_1, ..., zeta_NB]
    zeta_b = [beta_b, delta_b, eps_b]

The first nine entries are the parameters of interest. Rows of the Jacobian
are indexed by ``kappa`` and columns by ``eta`` so that
``J_kappa = U @ J_eta @ U.T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fim import ChannelParameterIndex, FimMatrix
from .geometry import SPEED_OF_LIGHT, GeometryError, link_geometry, rotation_derivatives

__all__ = [
    "KINEMATIC_LABELS",
    "POSITION",
    "VELOCITY",
    "ORIENTATION",
    "LocationParameterIndex",
    "JacobianMatrix",
    "build_jacobian",
    "transform_fim",
]

KINEMATIC_LABELS = ("p_x", "p_y", "p_z", "v_x", "v_y", "v_z", "yaw", "pitch", "roll")
POSITION = slice(0, 3)
VELOCITY = slice(3, 6)
ORIENTATION = slice(6, 9)


@dataclass(frozen=True)
class LocationParameterIndex:
    """Labels of ``kappa``: nine kinematic entries followed by nuisances."""

    nuisance: tuple

    @classmethod
    def full(cls, n_satellites: int) -> "LocationParameterIndex":
        return cls(tuple(lab for b in range(n_satellites) for lab in (("beta", b), ("delta", b), ("eps", b))))

    @property
    def labels(self) -> tuple:
        return KINEMATIC_LABELS + self.nuisance

    @property
    def size(self) -> int:
        return 9 + len(self.nuisance)

    @property
    def interest(self) -> slice:
        return slice(0, 9)

    @property
    def nuisance_slice(self) -> slice:
        return slice(9, self.size)


@dataclass(frozen=True)
class JacobianMatrix:
    matrix: np.ndarray
    row_labels: tuple
    col_labels: tuple


def build_jacobian(scenario, geometry=None) -> JacobianMatrix:
    """Analytic ``d eta / d kappa`` for the full parameter set (both offsets per satellite).

    Delay rows use the antenna-specific line of sight; Doppler rows are
    evaluated at the centroid and do not depend on orientation. The Doppler
    of slot ``k`` depends on the velocity both directly and through the
    centroid displacement ``k dt v``.
    """
    n_b, n_u, n_k = scenario.shape
    dt = scenario.slot_spacing
    geo = geometry or link_geometry(scenario.satellites, scenario.receiver, n_k, dt)
    if np.any(geo.distance <= 0) or np.any(geo.centroid_distance <= 0):
        raise GeometryError("singular geometry: zero satellite-receiver distance")
    eta = ChannelParameterIndex(n_b, n_u, n_k)
    kap = LocationParameterIndex.full(n_b)
    jac = np.zeros((kap.size, eta.size))
    c = SPEED_OF_LIGHT
    # d(Q s_u)/d(angle_j): (3 angles, N_U, 3)
    d_offsets = np.einsum("jab,ub->jua", rotation_derivatives(scenario.receiver.orientation), scenario.receiver.offsets)
    for b in range(n_b):
        for k in range(n_k):
            for u in range(n_u):
                col = eta.tau(b, u, k)
                los = geo.direction[b, u, k]
                jac[POSITION, col] = los / c
                jac[VELOCITY, col] = k * dt * los / c
                jac[ORIENTATION, col] = d_offsets[:, u] @ los / c
            col = eta.nu(b, k)
            grad = geo.doppler_gradient[b, k]
            jac[POSITION, col] = grad
            jac[VELOCITY, col] = -geo.centroid_direction[b, k] / c + k * dt * grad
        jac[9 + 3 * b, eta.gain(b)] = 1.0
        jac[10 + 3 * b, eta.delta(b)] = 1.0
        jac[11 + 3 * b, eta.eps(b)] = 1.0
    return JacobianMatrix(jac, kap.labels, eta.labels)


def transform_fim(j_eta: FimMatrix, jacobian: JacobianMatrix) -> FimMatrix:
    """``J_kappa = U J_eta U^T``."""
    u = np.asarray(jacobian.matrix, dtype=float)
    if u.ndim != 2 or u.shape[1] != j_eta.size:
        raise ValueError(f"Jacobian shape {u.shape} is not conformable with a {j_eta.size}x{j_eta.size} FIM")
    out = u @ j_eta.matrix @ u.T
    return FimMatrix(0.5 * (out + out.T), jacobian.row_labels)
