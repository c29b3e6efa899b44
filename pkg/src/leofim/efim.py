"""Nuisance elimination and synchronization modes.

The equivalent FIM of the interest block is the Schur complement
``J1 - J12 J2^-1 J12^T``. Besides the dense form (:func:`schur_efim`) this
module computes it from a square-root factor ``A`` (``J = A A^T``) by
projecting the interest rows off the nuisance row space. The factor route
keeps roughly twice the significant digits, which matters when the only
surviving information is the tiny array-induced delay spread across
antennas of a receiver hundreds of kilometres from the satellite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fim import FimMatrix, assemble_channel_fim, channel_information_factor, link_statistics
from .scenario import SyncMode
from .transform import (
    KINEMATIC_LABELS,
    ORIENTATION,
    POSITION,
    VELOCITY,
    JacobianMatrix,
    LocationParameterIndex,
    build_jacobian,
    transform_fim,
)
from .geometry import SPEED_OF_LIGHT, rotation_derivatives

__all__ = [
    "SyncMode",
    "EfimResult",
    "PINV_RTOL",
    "FACTOR_FLOOR",
    "schur_efim",
    "mode_index",
    "mode_selection",
    "apply_sync_mode",
    "location_factor",
    "efim_from_factor",
    "location_efim",
    "offset_loss_terms",
    "TARGET_BLOCKS",
]

PINV_RTOL = 1e-12
# Singular values of the projected factor below this fraction of the
# unprojected interest rows are rounding residue, not information.
FACTOR_FLOOR = 1e-12

TARGET_BLOCKS = {"position": POSITION, "velocity": VELOCITY, "orientation": ORIENTATION, "9d": slice(0, 9)}


@dataclass(frozen=True)
class EfimResult:
    """Equivalent FIM of the interest parameters.

    ``factor`` (when present) satisfies ``matrix.matrix == factor.T @ factor``
    and is what bounds and eigenvalues are computed from.
    """

    matrix: FimMatrix
    loss: np.ndarray
    mode: Optional[SyncMode] = None
    rank_deficient: bool = False
    factor: Optional[np.ndarray] = field(default=None, repr=False)
    scale: Optional[np.ndarray] = field(default=None, repr=False)

    def block(self, target) -> np.ndarray:
        sl = TARGET_BLOCKS[target] if isinstance(target, str) else target
        return self.matrix.matrix[sl, sl]

    def eigenvalues(self, target="9d", normalized: bool = False) -> np.ndarray:
        """Ascending eigenvalues of a diagonal block, floor-clipped to zero.

        Args:
            target: Block name from ``TARGET_BLOCKS`` or a slice.
            normalized: Scale the block to unit diagonal first
                (``D^-1/2 J D^-1/2``), which makes the spectrum independent of
                the units of mixed blocks such as the full 9D one.
        """
        sl = TARGET_BLOCKS[target] if isinstance(target, str) else target
        if self.factor is None:
            m = self.matrix.matrix[sl, sl]
            if normalized:
                d = np.sqrt(np.diag(m))
                if np.any(d <= 0):
                    return np.zeros(m.shape[0])
                m = m / np.outer(d, d)
            return np.clip(np.linalg.eigvalsh(m), 0.0, None)
        r = self.factor[:, sl]
        floor = FACTOR_FLOOR * self.scale[sl].max() if r.size else 0.0
        if normalized:
            norms = np.linalg.norm(r, axis=0)
            if np.any(norms <= floor):
                return np.zeros(r.shape[1])
            floor = FACTOR_FLOOR * np.max(self.scale[sl] / norms)
            r = r / norms
        s = np.linalg.svd(r, compute_uv=False) if r.size else np.zeros(0)
        s = np.where(s <= floor, 0.0, s)
        lam = np.sort(s**2)
        return np.concatenate([np.zeros(r.shape[1] - lam.size), lam])

    def inverse(self) -> np.ndarray:
        """``(J^e)^-1``; raises ``np.linalg.LinAlgError`` if singular."""
        if self.factor is None:
            return np.linalg.inv(self.matrix.matrix)
        _, s, vt = np.linalg.svd(self.factor, full_matrices=False)
        if s.size < self.factor.shape[1] or np.any(s <= FACTOR_FLOOR * self.scale.max()):
            raise np.linalg.LinAlgError("equivalent FIM is singular")
        return (vt.T / s**2) @ vt


def _pinv_psd(m: np.ndarray, rtol: float = PINV_RTOL):
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    top = w.max() if w.size else 0.0
    keep = w > rtol * top if top > 0 else np.zeros_like(w, dtype=bool)
    inv = (v[:, keep] / w[keep]) @ v[:, keep].T
    return inv, bool(np.count_nonzero(keep) < w.size)


def schur_efim(j: FimMatrix, interest: Sequence[int]) -> EfimResult:
    """Dense Schur complement onto ``interest`` (row/column indices).

    A singular nuisance block is pseudo-inverted (eigenvalues below
    ``PINV_RTOL`` of the largest dropped) and the result flagged.
    """
    interest = list(interest)
    nuisance = [i for i in range(j.size) if i not in interest]
    m = j.matrix
    j1 = m[np.ix_(interest, interest)]
    if not nuisance:
        return EfimResult(FimMatrix(j1, [j.labels[i] for i in interest]), np.zeros_like(j1))
    j12 = m[np.ix_(interest, nuisance)]
    inv, deficient = _pinv_psd(m[np.ix_(nuisance, nuisance)])
    loss = j12 @ inv @ j12.T
    loss = 0.5 * (loss + loss.T)
    je = j1 - loss
    je = 0.5 * (je + je.T)
    return EfimResult(FimMatrix(je, [j.labels[i] for i in interest]), loss, rank_deficient=deficient)


def mode_index(n_satellites: int, mode: SyncMode) -> LocationParameterIndex:
    mode = SyncMode(mode)
    if mode is SyncMode.GPS_SHARED:
        return LocationParameterIndex(tuple(("beta", b) for b in range(n_satellites)) + ("delta", "eps"))
    labs = []
    for b in range(n_satellites):
        labs.append(("beta", b))
        if mode.has_time_offset:
            labs.append(("delta", b))
        if mode.has_freq_offset:
            labs.append(("eps", b))
    return LocationParameterIndex(tuple(labs))


def mode_selection(n_satellites: int, mode: SyncMode) -> tuple:
    """Matrix ``S`` mapping full-kappa Jacobian rows to the rows of ``mode``.

    Known offsets drop their rows; shared offsets sum the per-satellite rows.
    """
    full = LocationParameterIndex.full(n_satellites)
    pos = {lab: i for i, lab in enumerate(full.labels)}
    idx = mode_index(n_satellites, mode)
    sel = np.zeros((idx.size, full.size))
    for r, lab in enumerate(idx.labels):
        if lab in ("delta", "eps"):
            for b in range(n_satellites):
                sel[r, pos[(lab, b)]] = 1.0
        else:
            sel[r, pos[lab]] = 1.0
    return sel, idx


def apply_sync_mode(scenario, mode: SyncMode = None, j_eta: FimMatrix = None, jacobian: JacobianMatrix = None) -> FimMatrix:
    """Location FIM over the parameter set implied by ``mode``."""
    mode = SyncMode(mode or scenario.sync_mode)
    j_eta = j_eta or assemble_channel_fim(scenario)
    jacobian = jacobian or build_jacobian(scenario)
    sel, idx = mode_selection(scenario.n_satellites, mode)
    reduced = JacobianMatrix(sel @ jacobian.matrix, idx.labels, jacobian.col_labels)
    return transform_fim(j_eta, reduced)


def location_factor(scenario, mode: SyncMode = None) -> tuple:
    """``(A, index)`` with ``apply_sync_mode(scenario, mode).matrix == A @ A.T``."""
    mode = SyncMode(mode or scenario.sync_mode)
    stats = link_statistics(scenario)
    jac = build_jacobian(scenario, geometry=stats[3])
    sel, idx = mode_selection(scenario.n_satellites, mode)
    return sel @ jac.matrix @ channel_information_factor(scenario, stats), idx


def efim_from_factor(a: np.ndarray, interest: Sequence[int], labels: Sequence = None) -> EfimResult:
    """Equivalent FIM from a square-root factor by orthogonal projection."""
    interest = list(interest)
    nuisance = [i for i in range(a.shape[0]) if i not in interest]
    labels = list(labels) if labels is not None else list(range(a.shape[0]))
    a1t = a[interest].T
    deficient = False
    if nuisance:
        a2 = a[nuisance]
        norms = np.linalg.norm(a2, axis=1)
        live = norms > 0
        deficient = not np.all(live)
        basis = np.zeros((a.shape[1], 0))
        if np.any(live):
            u, s, _ = np.linalg.svd((a2[live] / norms[live, None]).T, full_matrices=False)
            keep = s > PINV_RTOL * s.max()
            deficient = deficient or not np.all(keep)
            basis = u[:, keep]
        proj = basis @ (basis.T @ a1t)
        resid = a1t - proj
        loss = proj.T @ proj
    else:
        resid = a1t
        loss = np.zeros((len(interest), len(interest)))
    je = resid.T @ resid
    return EfimResult(
        FimMatrix(je, [labels[i] for i in interest]),
        0.5 * (loss + loss.T),
        rank_deficient=deficient,
        factor=resid,
        scale=np.linalg.norm(a1t, axis=0),
    )


def location_efim(scenario, mode: SyncMode = None) -> EfimResult:
    """9x9 equivalent FIM of ``[p, v, orientation]`` after removing the nuisances of ``mode``."""
    mode = SyncMode(mode or scenario.sync_mode)
    a, idx = location_factor(scenario, mode)
    res = efim_from_factor(a, range(9), idx.labels)
    return EfimResult(res.matrix, res.loss, mode, res.rank_deficient, res.factor, res.scale)


def _target_gradients(scenario, geo, target):
    """``(d tau / d theta [b,u,k,3], d nu / d theta [b,k,3])`` for a kinematic block."""
    n_b, n_u, n_k = scenario.shape
    dt = scenario.slot_spacing
    c = SPEED_OF_LIGHT
    kvec = np.arange(n_k)
    if target == "position":
        return geo.direction / c, geo.doppler_gradient
    if target == "velocity":
        d_tau = kvec[None, None, :, None] * dt * geo.direction / c
        d_nu = -geo.centroid_direction / c + kvec[None, :, None] * dt * geo.doppler_gradient
        return d_tau, d_nu
    if target == "orientation":
        rot_d = rotation_derivatives(scenario.receiver.orientation)
        d_off = np.einsum("jab,ub->uja", rot_d, scenario.receiver.offsets)  # (N_U, 3 angles, 3)
        d_tau = np.einsum("buka,uja->bukj", geo.direction, d_off) / c
        return d_tau, np.zeros((n_b, n_k, 3))
    raise ValueError(f"unknown target block {target!r}")


def offset_loss_terms(scenario, mode: SyncMode, target: str = "position") -> dict:
    """Closed-form information loss from unknown time and frequency offsets.

    Per-satellite modes sum one rank-one term per satellite; ``gps-shared``
    pools every satellite into a single term. Each term is
    ``x x^T / w`` with ``x`` the offset coupling of the target block and
    ``w`` the offset's own information.

    Returns:
        ``{"time": 3x3, "freq": 3x3}``; a synchronized offset contributes zeros.
    """
    mode = SyncMode(mode)
    if mode is SyncMode.FULL_SYNC:
        raise ValueError("full-sync has no offset nuisances")
    snr, omega, alpha_o, geo = link_statistics(scenario)
    f_c = scenario.carrier_frequency
    d_tau, d_nu = _target_gradients(scenario, geo, target)

    w_time = snr * omega[:, None, :]                      # (b, u, k)
    x_time = np.einsum("buk,bukj->bj", w_time, d_tau)     # per satellite
    n_time = w_time.sum(axis=(1, 2))
    w_freq = snr * alpha_o**2 / 2
    x_freq = f_c * np.einsum("bk,bkj->bj", w_freq.sum(axis=1), d_nu)
    n_freq = w_freq.sum(axis=(1, 2))

    def pooled(x, n):
        if mode is SyncMode.GPS_SHARED:
            tot = x.sum(axis=0)
            return np.outer(tot, tot) / n.sum()
        return np.einsum("bi,bj,b->ij", x, x, 1.0 / n)

    zero = np.zeros((3, 3))
    return {
        "time": pooled(x_time, n_time) if mode.has_time_offset else zero,
        "freq": pooled(x_freq, n_freq) if mode.has_freq_offset else zero,
    }
