"""Beamforming and beamfocusing phase profiles, and binary quantization.

Beamfocusing compensates the exact path length through every element.
Beamforming replaces the receiver-side path length with its plane-wave
(first order) expansion, so it only depends on the departure direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import BINARY, CONTINUOUS, TWO_PI, PhaseProfile, _rx_distances
from .errors import DomainError
from .geometry import Scene, as_point

TX_EXACT = "exact"
TX_PLANE = "plane"

_HALF_PI = math.pi / 2
_THREE_HALF_PI = 3 * math.pi / 2


@dataclass(frozen=True)
class SteeringTarget:
    """Either a direction (beamforming) or a point (beamfocusing)."""

    kind: str
    direction: tuple | None = None
    point: tuple | None = None

    def __post_init__(self):
        if self.kind == "direction":
            u = as_point(self.direction, "direction")
            if abs(np.linalg.norm(u) - 1) > 1e-12:
                raise DomainError("direction must be a unit vector")
        elif self.kind == "point":
            p = as_point(self.point, "point")
            if not p[1] > 0:
                raise DomainError("focus point must be in front of the panel")
        else:
            raise DomainError(f"unknown steering kind {self.kind!r}")

    def profile(self, scene: Scene, **kwargs) -> PhaseProfile:
        if self.kind == "direction":
            return beamform_profile(scene, self.direction, **kwargs)
        return beamfocus_profile(scene, self.point)


def beamfocus_profile(scene: Scene, target) -> PhaseProfile:
    """theta_n = k (d_tx,n + d_target,n) mod 2pi; gain N at ``target``."""
    d_t = _rx_distances(scene, target)
    return PhaseProfile(np.mod(scene.wavenumber * (scene.tx_distances + d_t), TWO_PI))


def _unit(direction) -> np.ndarray:
    u = as_point(direction, "direction")
    if abs(math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) - 1) > 1e-12:
        raise DomainError(f"direction {u} is not a unit vector")
    if not u[1] > 0:
        raise DomainError("direction must point in front of the panel")
    return u


def _project(positions: np.ndarray, u) -> np.ndarray:
    # element-wise dot keeps the result independent of BLAS
    return positions[:, 0] * u[0] + positions[:, 1] * u[1] + positions[:, 2] * u[2]


def beamform_profile(scene: Scene, direction, tx_link: str = TX_EXACT) -> PhaseProfile:
    """Plane-wave steering toward ``direction``.

    The receiver link uses the linear expansion -<r_n, u>. With
    ``tx_link="exact"`` (default) the fixed transmitter link keeps its exact
    path length k d_tx,n; ``tx_link="plane"`` expands it too, giving
    theta_n = -k <r_n, u_tx + u>.
    """
    u = _unit(direction)
    r = scene.panel.positions
    k = scene.wavenumber
    if tx_link == TX_EXACT:
        theta = k * scene.tx_distances - k * _project(r, u)
    elif tx_link == TX_PLANE:
        tx = scene.tx
        u_tx = tx / math.sqrt(tx[0] * tx[0] + tx[1] * tx[1] + tx[2] * tx[2])
        theta = -k * _project(r, u_tx + u)
    else:
        raise DomainError(f"tx_link must be {TX_EXACT!r} or {TX_PLANE!r}, got {tx_link!r}")
    return PhaseProfile(np.mod(theta, TWO_PI))


def quantize(profile: PhaseProfile, levels: int = 2) -> PhaseProfile:
    """Round every phase to the nearest of {0, pi}; exact ties go to 0."""
    if levels != 2:
        raise DomainError(f"only binary (2-level) quantization is supported, got {levels}")
    ph = profile.phases
    to_pi = (ph > _HALF_PI) & (ph < _THREE_HALF_PI)
    return PhaseProfile(np.where(to_pi, math.pi, 0.0), BINARY)


def circular_difference(a, b) -> np.ndarray:
    """Signed phase difference a - b wrapped to [-pi, pi)."""
    return np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi


def aligned_phase_error(p: PhaseProfile, q: PhaseProfile) -> float:
    """Max element-wise circular difference after removing the best global offset."""
    diff = circular_difference(p.phases, q.phases)
    offset = np.angle(np.mean(np.exp(1j * diff)))
    return float(np.max(np.abs(circular_difference(diff, offset))))


__all__ = [
    "SteeringTarget", "beamfocus_profile", "beamform_profile", "quantize",
    "circular_difference", "aligned_phase_error", "TX_EXACT", "TX_PLANE",
    "CONTINUOUS", "BINARY",
]
