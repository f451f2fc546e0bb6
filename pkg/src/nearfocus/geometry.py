"""Coordinate conventions, panel and scene description, coverage regions.

The panel lies in the x-z plane centered on the origin with its boresight
along +y. Azimuth is measured in the horizontal plane from +y, positive
toward +x; elevation tilts out of that plane toward +z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0


def as_point(p, name: str = "point") -> np.ndarray:
    """Return ``p`` as a finite float array of shape (3,)."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,):
        raise DomainError(f"{name} must have three components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite components: {arr}")
    return arr


@dataclass(frozen=True)
class IrsPanel:
    """Rectangular grid of reflecting elements centered on the origin.

    Elements are stored row-major: the row index steps along z, the column
    index along x, and element ``n`` sits at row ``n // cols``, column
    ``n % cols``.
    """

    rows: int
    cols: int
    spacing: float

    def __post_init__(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise DomainError("rows and cols must be integers")
        if self.rows < 1 or self.cols < 1:
            raise DomainError(f"panel needs at least one element, got {self.rows}x{self.cols}")
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise DomainError(f"spacing must be positive, got {self.spacing}")

    @property
    def center(self) -> np.ndarray:
        return np.zeros(3)

    @property
    def element_count(self) -> int:
        return self.rows * self.cols

    @property
    def aperture_diagonal(self) -> float:
        return math.hypot(self.rows - 1, self.cols - 1) * self.spacing

    @cached_property
    def positions(self) -> np.ndarray:
        """Element centers, shape (rows*cols, 3), read-only."""
        r, c = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        pos = np.zeros((self.element_count, 3))
        pos[:, 0] = ((c - (self.cols - 1) / 2) * self.spacing).ravel()
        pos[:, 2] = ((r - (self.rows - 1) / 2) * self.spacing).ravel()
        pos.setflags(write=False)
        return pos


def element_positions(panel: IrsPanel) -> np.ndarray:
    return panel.positions


@dataclass(frozen=True)
class Scene:
    """Panel, transmitter, carrier and link budget of one simulation."""

    panel: IrsPanel
    carrier_frequency: float
    tx_position: tuple
    tx_power: float
    noise_power: float

    def __post_init__(self):
        tx = as_point(self.tx_position, "tx_position")
        object.__setattr__(self, "tx_position", tuple(float(v) for v in tx))
        if not self.carrier_frequency > 0:
            raise DomainError(f"carrier_frequency must be positive, got {self.carrier_frequency}")
        if not (self.tx_power > 0 and self.noise_power > 0):
            raise DomainError("tx_power and noise_power must be positive")
        if not tx[1] > 0:
            raise DomainError("transmitter must be in front of the panel (y > 0)")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def tx(self) -> np.ndarray:
        return np.array(self.tx_position)

    @cached_property
    def tx_distances(self) -> np.ndarray:
        """Distance from the transmitter to every element."""
        d = distances(self.panel.positions, self.tx)
        d.setflags(write=False)
        return d


def default_scene(
    rows: int = 80,
    cols: int = 80,
    carrier_frequency: float = 60e9,
    spacing: float | None = None,
    tx_distance: float = 15.0,
    tx_power: float = 0.1,
    noise_power: float = 1e-12,
) -> Scene:
    """80x80 half-wavelength panel at 60 GHz, tx 15 m out on boresight,
    20 dBm transmit power and -90 dBm noise."""
    if spacing is None:
        spacing = SPEED_OF_LIGHT / carrier_frequency / 2
    return Scene(
        panel=IrsPanel(rows, cols, spacing),
        carrier_frequency=carrier_frequency,
        tx_position=(0.0, tx_distance, 0.0),
        tx_power=tx_power,
        noise_power=noise_power,
    )


def distances(positions: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Euclidean distance from every row of ``positions`` to ``point``."""
    dx = positions[:, 0] - point[0]
    dy = positions[:, 1] - point[1]
    dz = positions[:, 2] - point[2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


def canonical_angle(angle: float) -> float:
    """Nearest angle that survives a radians -> degrees -> radians round trip.

    Text formats store angles in degrees; snapping to a fixed point of the
    conversion keeps save/load bit-exact.
    """
    a = float(angle)
    for _ in range(16):
        b = math.radians(math.degrees(a))
        if b == a:
            return a
        a = b
    raise DomainError(f"angle {angle!r} has no stable degree representation")


def polar_to_point(azimuth: float, distance: float, elevation: float = 0.0) -> np.ndarray:
    ce = math.cos(elevation)
    return np.array([
        distance * ce * math.sin(azimuth),
        distance * ce * math.cos(azimuth),
        distance * math.sin(elevation),
    ])


def direction_from_angles(azimuth: float, elevation: float = 0.0) -> np.ndarray:
    return polar_to_point(azimuth, 1.0, elevation)


@dataclass(frozen=True)
class CoverageRegion:
    """Annular sector of (azimuth, distance) at a fixed elevation."""

    azimuth_min: float
    azimuth_max: float
    distance_min: float
    distance_max: float
    elevation: float = field(default=0.0)

    def __post_init__(self):
        for name in ("azimuth_min", "azimuth_max", "elevation"):
            object.__setattr__(self, name, canonical_angle(getattr(self, name)))
        for name in ("distance_min", "distance_max"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not -math.pi / 2 < self.azimuth_min < self.azimuth_max < math.pi / 2:
            raise DomainError(
                f"need -pi/2 < azimuth_min < azimuth_max < pi/2, got "
                f"[{self.azimuth_min}, {self.azimuth_max}]"
            )
        if not 0 < self.distance_min < self.distance_max:
            raise DomainError(
                f"need 0 < distance_min < distance_max, got "
                f"[{self.distance_min}, {self.distance_max}]"
            )
        if not -math.pi / 2 < self.elevation < math.pi / 2:
            raise DomainError(f"elevation out of range: {self.elevation}")

    @classmethod
    def from_degrees(cls, az_min, az_max, r_min, r_max, elevation_deg=0.0) -> CoverageRegion:
        return cls(math.radians(az_min), math.radians(az_max), r_min, r_max,
                   math.radians(elevation_deg))

    @property
    def azimuth_span(self) -> float:
        return self.azimuth_max - self.azimuth_min

    @property
    def distance_span(self) -> float:
        return self.distance_max - self.distance_min

    @property
    def area(self) -> float:
        """Area of the sector measured in its own (conical) surface."""
        return 0.5 * self.azimuth_span * (self.distance_max ** 2 - self.distance_min ** 2)

    def contains(self, azimuth, distance, tol: float = 1e-12):
        az = np.asarray(azimuth)
        d = np.asarray(distance)
        return ((az >= self.azimuth_min - tol) & (az <= self.azimuth_max + tol)
                & (d >= self.distance_min * (1 - tol)) & (d <= self.distance_max * (1 + tol)))

    def point(self, azimuth: float, distance: float) -> np.ndarray:
        return region_point(self, azimuth, distance)

    def to_plane(self, azimuth, distance) -> np.ndarray:
        """In-plane Cartesian coordinates (cross-range, down-range), shape (..., 2)."""
        az = np.asarray(azimuth, dtype=float)
        d = np.asarray(distance, dtype=float)
        return np.stack([d * np.sin(az), d * np.cos(az)], axis=-1)

    @staticmethod
    def from_plane(xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xy = np.asarray(xy, dtype=float)
        return np.arctan2(xy[..., 0], xy[..., 1]), np.hypot(xy[..., 0], xy[..., 1])


def region_point(region: CoverageRegion, azimuth: float, distance: float) -> np.ndarray:
    """Cartesian position at (azimuth, distance) on the region's elevation cone."""
    if not region.contains(azimuth, distance):
        raise DomainError(
            f"(azimuth={azimuth}, distance={distance}) outside coverage region {region}"
        )
    return polar_to_point(azimuth, distance, region.elevation)


def fraunhofer_distance(panel: IrsPanel, wavelength: float) -> float:
    """Conventional near/far-field boundary 2 D^2 / lambda, D the panel diagonal."""
    if panel.element_count < 2:
        raise DomainError("a single-element panel has no aperture")
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return 2 * panel.aperture_diagonal ** 2 / wavelength


def default_region() -> CoverageRegion:
    """+-60 degrees in azimuth, 1 to 50 m, horizontal plane."""
    return CoverageRegion.from_degrees(-60.0, 60.0, 1.0, 50.0)
