"""Plane-wave approximation error maps and the control accuracy index (CAI).

The CAI of a focus target is the mean rate at which the array gain of a
profile focused there falls off when the receiver is nudged away from the
target, in gain per meter. High values mean a narrow focal spot, so
codewords must sit closer together.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import TWO_PI, array_gain, path_phases
from .control import TX_EXACT, beamfocus_profile, beamform_profile
from .errors import DomainError
from .geometry import CoverageRegion, Scene, as_point, distances, polar_to_point


@dataclass(frozen=True)
class PwaeRecord:
    azimuth: float
    distance: float
    beamform_gain: float
    beamfocus_gain: float

    @property
    def normalized_gain(self) -> float:
        return self.beamform_gain / self.beamfocus_gain


def pwae_point(scene: Scene, azimuth: float, distance: float, elevation: float = 0.0,
               tx_link: str = TX_EXACT) -> PwaeRecord:
    if not -math.pi / 2 < azimuth < math.pi / 2 or not distance > 0:
        raise DomainError(f"({azimuth}, {distance}) is not in front of the panel")
    rx = polar_to_point(azimuth, distance, elevation)
    direction = rx / distance
    bf = array_gain(scene, beamform_profile(scene, direction, tx_link=tx_link), rx)
    fc = array_gain(scene, beamfocus_profile(scene, rx), rx)
    return PwaeRecord(azimuth, distance, bf, fc)


def pwae_map(scene: Scene, azimuths, distances, elevation: float = 0.0,
             tx_link: str = TX_EXACT, workers: int = 1) -> list[PwaeRecord]:
    """Beamforming vs. beamfocusing gain on the (distance x azimuth) grid.

    Records are ordered distance-major, azimuth-minor.
    """
    cells = [(float(a), float(d)) for d in distances for a in azimuths]

    def one(cell):
        return pwae_point(scene, cell[0], cell[1], elevation, tx_link)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, cells))
    return [one(c) for c in cells]


def _gains_at(scene: Scene, phases: np.ndarray, points: np.ndarray) -> np.ndarray:
    out = np.empty(len(points))
    for i, p in enumerate(points):
        resid = phases - scene.wavenumber * (scene.tx_distances + distances(scene.panel.positions, p))
        out[i] = abs(np.sum(np.exp(1j * resid)))
    return out


def probe_offsets(target, probe_directions: int) -> np.ndarray:
    """Unit vectors equally spaced in the local (down-range, cross-range) plane.

    Direction j makes angle 2 pi j / m with the radial direction, rotating
    toward increasing azimuth.
    """
    t = np.asarray(target, dtype=float)
    radial = t / np.linalg.norm(t)
    horiz = math.hypot(t[0], t[1])
    # increasing azimuth: d/d(az) of (sin az, cos az, 0)
    tangential = np.array([t[1] / horiz, -t[0] / horiz, 0.0])
    ang = TWO_PI * np.arange(probe_directions) / probe_directions
    return np.cos(ang)[:, None] * radial + np.sin(ang)[:, None] * tangential


def cai(scene: Scene, target, probe_step: float | None = None, probe_directions: int = 8,
        aggregate: str = "mean") -> float:
    """Control accuracy index at ``target`` in gain per meter.

    The panel is focused on ``target``; the receiver is then moved
    ``probe_step`` meters along each probe direction and the drop in array
    gain is divided by the step. ``aggregate`` combines directions by
    "mean" (default) or "max". Probe points behind the panel are skipped.
    """
    if probe_step is None:
        probe_step = scene.wavelength / 2
    if not probe_step > 0:
        raise DomainError(f"probe_step must be positive, got {probe_step}")
    if probe_directions < 2:
        raise DomainError("need at least two probe directions")
    if aggregate not in ("mean", "max"):
        raise DomainError(f"unknown aggregate {aggregate!r}")
    t = as_point(target, "target")
    phases = beamfocus_profile(scene, t).phases
    probes = t + probe_step * probe_offsets(t, probe_directions)
    probes = probes[probes[:, 1] > 0]
    if len(probes) == 0:
        raise DomainError("every probe point lies behind the panel")
    g0 = array_gain(scene, beamfocus_profile(scene, t), t)
    drop = (g0 - _gains_at(scene, phases, probes)) / probe_step
    return float(np.mean(drop) if aggregate == "mean" else np.max(drop))


@dataclass(frozen=True, eq=False)
class CaiMap:
    """CAI sampled at the centers of a uniform (distance x azimuth) grid.

    ``values[i, j]`` belongs to distance bin ``i`` and azimuth bin ``j``.
    Values are raw (linear); take logs only for display.
    """

    region: CoverageRegion
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise DomainError(f"CAI grid needs at least 2x2 cells, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("CAI values must be finite and nonnegative")
        if not np.any(v > 0):
            raise DomainError("CAI map is identically zero")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def distance_bins(self) -> int:
        return self.values.shape[0]

    @property
    def azimuth_bins(self) -> int:
        return self.values.shape[1]

    def azimuth_edges(self) -> np.ndarray:
        r = self.region
        return np.linspace(r.azimuth_min, r.azimuth_max, self.azimuth_bins + 1)

    def distance_edges(self) -> np.ndarray:
        r = self.region
        return np.linspace(r.distance_min, r.distance_max, self.distance_bins + 1)

    def azimuth_centers(self) -> np.ndarray:
        return cell_centers(self.region.azimuth_min, self.region.azimuth_max, self.azimuth_bins)

    def distance_centers(self) -> np.ndarray:
        return cell_centers(self.region.distance_min, self.region.distance_max, self.distance_bins)

    def cell_areas(self) -> np.ndarray:
        """Area of every annular-sector cell, same shape as ``values``."""
        de = self.distance_edges()
        ring = 0.5 * (de[1:] ** 2 - de[:-1] ** 2)
        daz = self.region.azimuth_span / self.azimuth_bins
        return np.repeat((ring * daz)[:, None], self.azimuth_bins, axis=1)

    def log10_values(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log10(self.values)

    def column_means(self) -> np.ndarray:
        """Mean CAI over azimuth for every distance bin."""
        return self.values.mean(axis=1)

    def rows(self):
        """(azimuth_deg, distance_m, cai) in (distance, azimuth) order."""
        az = self.azimuth_centers()
        ds = self.distance_centers()
        for i, d in enumerate(ds):
            for j, a in enumerate(az):
                yield math.degrees(a), float(d), float(self.values[i, j])

    def __eq__(self, other):
        if not isinstance(other, CaiMap):
            return NotImplemented
        return self.region == other.region and np.array_equal(self.values, other.values)


def cell_centers(lo: float, hi: float, bins: int) -> np.ndarray:
    step = (hi - lo) / bins
    return lo + (np.arange(bins) + 0.5) * step


def cai_map(scene: Scene, region: CoverageRegion, azimuth_bins: int = 40,
            distance_bins: int = 40, probe_step: float | None = None,
            probe_directions: int = 8, aggregate: str = "mean",
            workers: int = 1) -> CaiMap:
    """Evaluate :func:`cai` at every cell center of the region grid."""
    if azimuth_bins < 2 or distance_bins < 2:
        raise DomainError("CAI grid needs at least two bins per axis")
    az = cell_centers(region.azimuth_min, region.azimuth_max, azimuth_bins)
    ds = cell_centers(region.distance_min, region.distance_max, distance_bins)

    def row(d):
        return [cai(scene, polar_to_point(a, d, region.elevation), probe_step,
                    probe_directions, aggregate) for a in az]

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(row, ds))
    else:
        values = [row(d) for d in ds]
    return CaiMap(region, np.array(values))


def _region_header(region: CoverageRegion) -> str:
    return "#region " + " ".join(f"{v:.17g}" for v in (
        math.degrees(region.azimuth_min), math.degrees(region.azimuth_max),
        region.distance_min, region.distance_max, math.degrees(region.elevation)))


def write_cai_csv(cmap: CaiMap, path, raw: bool = True):
    """Write the map as CSV; ``raw`` keeps 17 significant digits so that
    :func:`read_cai_csv` restores it exactly."""
    fmt = "{:.17g}" if raw else "{:.6f}"
    with open(path, "w", newline="") as fh:
        fh.write(_region_header(cmap.region) + "\n")
        fh.write(f"#bins {cmap.azimuth_bins} {cmap.distance_bins}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["azimuth_deg", "distance_m", "cai"])
        for a, d, v in cmap.rows():
            w.writerow([fmt.format(a), fmt.format(d), fmt.format(v)])


def read_cai_csv(path) -> CaiMap:
    region = None
    bins = None
    values = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    try:
        for line in lines:
            if line.startswith("#region"):
                az0, az1, r0, r1, el = (float(x) for x in line.split()[1:])
                region = CoverageRegion.from_degrees(az0, az1, r0, r1, el)
            elif line.startswith("#bins"):
                bins = tuple(int(x) for x in line.split()[1:])
            elif line.startswith("azimuth_deg") or not line.strip():
                continue
            else:
                values.append(float(line.split(",")[2]))
        n_az, n_r = bins
        grid = np.array(values).reshape(n_r, n_az)
    except (ValueError, TypeError, IndexError) as exc:
        raise DomainError(f"malformed CAI file {path}: {exc}") from exc
    if region is None:
        raise DomainError(f"malformed CAI file {path}: missing #region header")
    return CaiMap(region, grid)
