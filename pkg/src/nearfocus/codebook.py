"""Uniform 2D, uniform 3D and CAI-driven nonuniform 3D codebooks.

A 2D codebook holds beamforming codewords indexed only by azimuth. The 3D
codebooks hold beamfocusing codewords, each focused on a point of the
coverage region. The nonuniform construction draws reference points with
density proportional to the control accuracy index and clusters them with
k-means; one codeword per cluster centroid.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import kmeans as _km
from .analysis import CaiMap, cell_centers
from .channel import PhaseProfile
from .control import TX_EXACT, beamfocus_profile, beamform_profile
from .errors import ChecksumMismatchError, CodebookFileError, CodebookMismatchError, DomainError
from .geometry import CoverageRegion, Scene, canonical_angle, direction_from_angles, polar_to_point
from .seeding import derive_seed, generator

BEAMFORM = "beamform"
BEAMFOCUS = "beamfocus"
UNIFORM_2D = "uniform2d"
UNIFORM_3D = "uniform3d"
NONUNIFORM_3D = "nonuniform3d"
CONSTRUCTIONS = (UNIFORM_2D, UNIFORM_3D, NONUNIFORM_3D)
FORMAT_LINE = "#format nearfocus-codebook v1"


@dataclass(frozen=True, eq=False)
class Codeword:
    profile: PhaseProfile
    kind: str
    target_azimuth: float
    target_distance: float
    index: int

    def __post_init__(self):
        if self.kind == BEAMFORM and not math.isinf(self.target_distance):
            raise DomainError("beamform codewords have unbounded target distance")
        if self.kind == BEAMFOCUS and not math.isfinite(self.target_distance):
            raise DomainError("beamfocus codewords need a finite target distance")
        if self.kind not in (BEAMFORM, BEAMFOCUS):
            raise DomainError(f"unknown codeword kind {self.kind!r}")

    def __eq__(self, other):
        if not isinstance(other, Codeword):
            return NotImplemented
        return (self.kind == other.kind and self.index == other.index
                and self.target_azimuth == other.target_azimuth
                and self.target_distance == other.target_distance
                and self.profile == other.profile)


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: tuple
    construction: str
    region: CoverageRegion
    scene: Scene
    seed: int = 0
    tx_link: str = TX_EXACT

    def __post_init__(self):
        object.__setattr__(self, "codewords", tuple(self.codewords))
        if not self.codewords:
            raise DomainError("codebook is empty")
        if self.construction not in CONSTRUCTIONS:
            raise DomainError(f"unknown construction {self.construction!r}")
        for i, cw in enumerate(self.codewords):
            if cw.index != i:
                raise DomainError("codeword indices must run 0..K-1 in order")
            if cw.kind == BEAMFOCUS and not self.region.contains(cw.target_azimuth, cw.target_distance):
                raise DomainError(f"codeword {i} targets a point outside the region")

    def __len__(self):
        return len(self.codewords)

    def __iter__(self):
        return iter(self.codewords)

    def __getitem__(self, i):
        return self.codewords[i]

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return (self.construction == other.construction and self.seed == other.seed
                and self.region == other.region and self.scene == other.scene
                and self.tx_link == other.tx_link and self.codewords == other.codewords)

    @property
    def label(self) -> str:
        return f"{self.construction}-{len(self)}"

    def phase_matrix(self) -> np.ndarray:
        """Phases of all codewords, shape (K, N)."""
        return np.stack([cw.profile.phases for cw in self.codewords])

    def targets(self) -> tuple[np.ndarray, np.ndarray]:
        """(azimuths, distances) of all codeword targets."""
        return (np.array([cw.target_azimuth for cw in self.codewords]),
                np.array([cw.target_distance for cw in self.codewords]))

    def checksum(self) -> str:
        return phase_checksum(self.phase_matrix())


def phase_checksum(phases: np.ndarray) -> str:
    """First 64 bits of SHA-256 over the little-endian float64 phases."""
    data = np.ascontiguousarray(phases, dtype="<f8").tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def _beamform_codeword(scene, region, azimuth, index, tx_link):
    u = direction_from_angles(azimuth, region.elevation)
    return Codeword(beamform_profile(scene, u, tx_link=tx_link), BEAMFORM, azimuth, math.inf, index)


def _beamfocus_codeword(scene, region, azimuth, distance, index):
    p = polar_to_point(azimuth, distance, region.elevation)
    return Codeword(beamfocus_profile(scene, p), BEAMFOCUS, azimuth, distance, index)


def uniform_2d(scene: Scene, region: CoverageRegion, k: int, tx_link: str = TX_EXACT) -> Codebook:
    """K beamforming codewords at the centers of K equal azimuth cells."""
    if k < 1:
        raise DomainError("need at least one codeword")
    az = [canonical_angle(a) for a in cell_centers(region.azimuth_min, region.azimuth_max, k)]
    cws = [_beamform_codeword(scene, region, a, j, tx_link) for j, a in enumerate(az)]
    return Codebook(cws, UNIFORM_2D, region, scene, 0, tx_link)


def _polar_grid(region: CoverageRegion, k: int):
    mean_arc = 0.5 * (region.distance_min + region.distance_max) * region.azimuth_span
    aspect = region.distance_span / mean_arc
    k_r = max(1, min(k, math.floor(math.sqrt(k * aspect) + 0.5)))
    k_az = math.ceil(k / k_r)
    ds = cell_centers(region.distance_min, region.distance_max, k_r)
    az = cell_centers(region.azimuth_min, region.azimuth_max, k_az)
    cells = [(a, d) for d in ds for a in az]
    return cells[:k]


def _cartesian_grid(region: CoverageRegion, k: int):
    h = math.sqrt(region.area / k)
    r_max = region.distance_max
    while True:
        n = int(math.ceil(r_max / h)) + 1
        ix = np.arange(-n, n + 1) * h
        iy = np.arange(0, n + 1) * h
        x, y = np.meshgrid(ix, iy)
        az, d = np.arctan2(x, y).ravel(), np.hypot(x, y).ravel()
        inside = region.contains(az, d, tol=0.0)
        if inside.sum() >= k:
            break
        h *= 0.999
    az, d = az[inside], d[inside]
    order = np.lexsort((az, d))[:k]
    return list(zip(az[order], d[order]))


def uniform_3d(scene: Scene, region: CoverageRegion, k: int, grid: str = "polar") -> Codebook:
    """K beamfocusing codewords on a regular grid over the region.

    ``grid="polar"`` (default) divides distance and azimuth uniformly, with
    the number of distance rings chosen so cells are roughly square in
    meters on average; the first K cells in distance-major order are used.
    ``grid="cartesian"`` uses a square lattice in the coverage plane.
    """
    if k < 1:
        raise DomainError("need at least one codeword")
    if grid == "polar":
        cells = _polar_grid(region, k)
    elif grid == "cartesian":
        cells = _cartesian_grid(region, k)
    else:
        raise DomainError(f"unknown grid {grid!r}")
    cws = [_beamfocus_codeword(scene, region, canonical_angle(a), float(d), j)
           for j, (a, d) in enumerate(cells)]
    return Codebook(cws, UNIFORM_3D, region, scene, 0)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Reference points as (azimuth, distance) pairs inside ``region``."""

    azimuths: np.ndarray
    distances: np.ndarray
    region: CoverageRegion = field(repr=False)

    def __post_init__(self):
        az = np.asarray(self.azimuths, dtype=float)
        d = np.asarray(self.distances, dtype=float)
        if az.shape != d.shape or az.ndim != 1 or az.size == 0:
            raise DomainError("point cloud needs matching nonempty 1-D arrays")
        if not np.all(self.region.contains(az, d)):
            raise DomainError("point cloud has points outside its region")
        object.__setattr__(self, "azimuths", az)
        object.__setattr__(self, "distances", d)

    def __len__(self):
        return self.azimuths.size

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (self.region == other.region and np.array_equal(self.azimuths, other.azimuths)
                and np.array_equal(self.distances, other.distances))

    def plane(self) -> np.ndarray:
        return self.region.to_plane(self.azimuths, self.distances)


def sample_reference_points(cmap: CaiMap, m: int, seed: int = 0,
                            area_weighted: bool = True) -> PointCloud:
    """Draw ``m`` i.i.d. points with density proportional to the CAI.

    With ``area_weighted`` (default) the CAI is read as a density per unit
    area: a cell is picked with probability CAI x cell area and the point is
    placed uniformly by area inside the annular cell. Otherwise cells are
    picked in proportion to the raw value and filled uniformly in
    (azimuth, distance).
    """
    if m < 1:
        raise DomainError("need at least one reference point")
    w = cmap.values * cmap.cell_areas() if area_weighted else np.array(cmap.values)
    cum = np.cumsum(w.ravel())
    if not cum[-1] > 0:
        raise DomainError("CAI map carries no probability mass")
    rng = generator(seed, "reference-points")
    cell = np.searchsorted(cum, rng.random(m) * cum[-1], side="right")
    cell = np.minimum(cell, cum.size - 1)
    i, j = np.divmod(cell, cmap.azimuth_bins)
    ae, de = cmap.azimuth_edges(), cmap.distance_edges()
    u, v = rng.random(m), rng.random(m)
    az = ae[j] + u * (ae[j + 1] - ae[j])
    if area_weighted:
        d = np.sqrt(de[i] ** 2 + v * (de[i + 1] ** 2 - de[i] ** 2))
    else:
        d = de[i] + v * (de[i + 1] - de[i])
    az = np.clip(az, ae[j], ae[j + 1])
    d = np.clip(d, de[i], de[i + 1])
    return PointCloud(az, d, cmap.region)


def kmeans(points: PointCloud, k: int, seed: int = 0, max_iter: int = 100,
           tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Cluster the cloud in the Cartesian coverage plane.

    Returns the (azimuths, distances) of exactly ``k`` centroids.
    """
    res = _km.lloyd(points.plane(), k, seed=seed, max_iter=max_iter, tol=tol)
    return CoverageRegion.from_plane(res.centroids)


def nonuniform_3d(scene: Scene, cmap: CaiMap, k: int, m: int | None = None, seed: int = 0,
                  max_iter: int = 100, tol: float = 1e-6,
                  area_weighted: bool = True) -> Codebook:
    """CAI-weighted reference points -> k-means -> one focus codeword per centroid.

    ``m`` defaults to 100 k reference points. Codewords are indexed in
    (distance, azimuth) order of their targets.
    """
    if m is None:
        m = 100 * k
    if not 1 <= k <= m:
        raise DomainError(f"need 1 <= k <= m, got k={k}, m={m}")
    region = cmap.region
    cloud = sample_reference_points(cmap, m, derive_seed(seed, "nonuniform3d", "sample"),
                                    area_weighted=area_weighted)
    az, d = kmeans(cloud, k, derive_seed(seed, "nonuniform3d", "kmeans"), max_iter, tol)
    # a centroid can fall a hair inside the inner arc; snap it back onto the region
    az = np.clip(az, region.azimuth_min, region.azimuth_max)
    d = np.clip(d, region.distance_min, region.distance_max)
    az = np.array([canonical_angle(a) for a in az])
    order = np.lexsort((az, d))
    cws = [_beamfocus_codeword(scene, region, float(az[o]), float(d[o]), j)
           for j, o in enumerate(order)]
    return Codebook(cws, NONUNIFORM_3D, region, scene, int(seed))


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.17g}"


def _scene_fields(scene: Scene, tx_link: str) -> list[str]:
    p = scene.panel
    return ([_fmt(scene.carrier_frequency), str(p.rows), str(p.cols), _fmt(p.spacing)]
            + [_fmt(v) for v in scene.tx_position] + [tx_link])


def codebook_text(cb: Codebook) -> str:
    r = cb.region
    lines = [
        FORMAT_LINE,
        f"#construction {cb.construction}",
        f"#seed {int(cb.seed) & ((1 << 64) - 1)}",
        "#region " + " ".join(_fmt(v) for v in (
            math.degrees(r.azimuth_min), math.degrees(r.azimuth_max),
            r.distance_min, r.distance_max, math.degrees(r.elevation))),
        "#scene " + " ".join(_scene_fields(cb.scene, cb.tx_link)),
        f"#codewords {len(cb)}",
        f"#phase_checksum {cb.checksum()}",
        "index,kind,azimuth_deg,distance_m",
    ]
    for cw in cb:
        lines.append(f"{cw.index},{cw.kind},{_fmt(math.degrees(cw.target_azimuth))},"
                     f"{_fmt(cw.target_distance)}")
    lines.append("#end")
    return "\n".join(lines) + "\n"


def save_codebook(cb: Codebook, path):
    with open(path, "w", newline="\n") as fh:
        fh.write(codebook_text(cb))


def _parse(text: str, source: str):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != FORMAT_LINE:
        raise CodebookFileError(f"{source}: not a nearfocus codebook file")
    if lines[-1] != "#end":
        raise CodebookFileError(f"{source}: file is truncated (no #end marker)")
    header = {}
    rows = []
    try:
        for line in lines[1:-1]:
            if line.startswith("#"):
                key, _, rest = line[1:].partition(" ")
                header[key] = rest.split()
            elif line == "index,kind,azimuth_deg,distance_m":
                continue
            else:
                idx, kind, az, dist = line.split(",")
                rows.append((int(idx), kind, float(az), float(dist)))
        meta = {
            "construction": header["construction"][0],
            "seed": int(header["seed"][0]),
            "region": [float(x) for x in header["region"]],
            "scene": header["scene"],
            "count": int(header["codewords"][0]),
            "checksum": header["phase_checksum"][0],
        }
    except (KeyError, IndexError, ValueError) as exc:
        raise CodebookFileError(f"{source}: malformed codebook file ({exc!r})") from exc
    if len(rows) != meta["count"] or len(meta["region"]) != 5 or len(meta["scene"]) != 8:
        raise CodebookFileError(f"{source}: malformed codebook file (inconsistent counts)")
    return meta, rows


def load_codebook(path, scene: Scene, region: CoverageRegion | None = None) -> Codebook:
    """Read a codebook written by :func:`save_codebook` and rebuild its profiles.

    Raises CodebookFileError for unparsable or truncated files,
    CodebookMismatchError if the file was built for another scene or region,
    ChecksumMismatchError if regenerated phases disagree with the file.
    """
    with open(path) as fh:
        text = fh.read()
    meta, rows = _parse(text, str(path))
    tx_link = meta["scene"][7]
    if meta["scene"] != _scene_fields(scene, tx_link):
        raise CodebookMismatchError(f"{path}: codebook was built for a different scene")
    try:
        file_region = CoverageRegion.from_degrees(*meta["region"])
    except DomainError as exc:
        raise CodebookFileError(f"{path}: invalid region header: {exc}") from exc
    if region is not None and region != file_region:
        raise CodebookMismatchError(f"{path}: region {file_region} differs from {region}")
    cws = []
    try:
        for idx, kind, az_deg, dist in rows:
            az = math.radians(az_deg)
            if kind == BEAMFORM:
                cws.append(_beamform_codeword(scene, file_region, az, idx, tx_link))
            else:
                cws.append(_beamfocus_codeword(scene, file_region, az, dist, idx))
        cb = Codebook(cws, meta["construction"], file_region, scene, meta["seed"], tx_link)
    except DomainError as exc:
        raise CodebookFileError(f"{path}: invalid codeword entry: {exc}") from exc
    if cb.checksum() != meta["checksum"]:
        raise ChecksumMismatchError(f"{path}: phase checksum mismatch")
    return cb
