"""Run configuration shared by the experiments and the command line.

Values resolve in this order, later winning: built-in defaults, a JSON
config file, command-line flags.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .errors import DomainError
from .geometry import SPEED_OF_LIGHT, CoverageRegion, IrsPanel, Scene

DEFAULT_DISTANCES = (1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0)
DEFAULT_CODEWORDS = (100, 500, 1000)
ALL_KINDS = ("uniform2d", "uniform3d", "nonuniform3d")


def dbm_to_watts(dbm: float) -> float:
    return 10 ** ((dbm - 30) / 10)


@dataclass
class RunConfig:
    freq_ghz: float = 60.0
    rows: int = 80
    cols: int = 80
    spacing_mm: float | None = None  # None: half a wavelength
    tx_dist_m: float = 15.0
    tx_power_dbm: float = 20.0
    noise_dbm: float = -90.0
    az_min_deg: float = -60.0
    az_max_deg: float = 60.0
    r_min_m: float = 1.0
    r_max_m: float = 50.0
    elevation_deg: float = 0.0
    codewords: list = field(default_factory=lambda: list(DEFAULT_CODEWORDS))
    kinds: list = field(default_factory=lambda: list(ALL_KINDS))
    ref_multiplier: int = 100
    trials: int = 1000
    distances: list = field(default_factory=lambda: list(DEFAULT_DISTANCES))
    probe_step_mm: float | None = None  # None: half a wavelength
    probe_dirs: int = 8
    az_bins: int = 40
    r_bins: int = 40
    seed: int = 0
    tx_link: str = "exact"
    average: str = "linear"
    workers: int = 1
    out: str = "out"
    raw: bool = False

    def __post_init__(self):
        try:
            self.validate()
        except DomainError:
            raise
        except (TypeError, ValueError) as exc:
            # wrongly typed values from a config file
            raise DomainError(f"invalid configuration: {exc}") from exc

    def validate(self):
        positive = ["freq_ghz", "tx_dist_m", "r_min_m", "r_max_m", "ref_multiplier",
                    "trials", "probe_dirs", "workers"]
        for name in positive:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive, got {v!r}")
        for name in ("rows", "cols"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise DomainError(f"{name} must be a positive integer")
        for name in ("spacing_mm", "probe_step_mm"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be positive, got {v!r}")
        if self.az_bins < 2 or self.r_bins < 2:
            raise DomainError("CAI grid needs at least two bins per axis")
        if not self.codewords or any(int(k) != k or k < 1 for k in self.codewords):
            raise DomainError(f"codewords must be positive integers, got {self.codewords!r}")
        if not self.distances or any(not d > 0 for d in self.distances):
            raise DomainError(f"distances must be positive, got {self.distances!r}")
        bad = [k for k in self.kinds if k not in ALL_KINDS]
        if bad or not self.kinds:
            raise DomainError(f"unknown codebook kinds {bad!r}")
        if self.tx_link not in ("exact", "plane"):
            raise DomainError(f"tx_link must be 'exact' or 'plane', got {self.tx_link!r}")
        if self.average not in ("linear", "db"):
            raise DomainError(f"average must be 'linear' or 'db', got {self.average!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        # constructing these checks the geometric invariants
        self.scene()
        self.region()

    @property
    def carrier_frequency(self) -> float:
        return self.freq_ghz * 1e9

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def spacing(self) -> float:
        return self.wavelength / 2 if self.spacing_mm is None else self.spacing_mm * 1e-3

    @property
    def probe_step(self) -> float:
        return self.wavelength / 2 if self.probe_step_mm is None else self.probe_step_mm * 1e-3

    def scene(self, tx_distance: float | None = None) -> Scene:
        d = self.tx_dist_m if tx_distance is None else tx_distance
        return Scene(
            panel=IrsPanel(int(self.rows), int(self.cols), self.spacing),
            carrier_frequency=self.carrier_frequency,
            tx_position=(0.0, float(d), 0.0),
            tx_power=dbm_to_watts(self.tx_power_dbm),
            noise_power=dbm_to_watts(self.noise_dbm),
        )

    def region(self) -> CoverageRegion:
        return CoverageRegion.from_degrees(self.az_min_deg, self.az_max_deg,
                                           self.r_min_m, self.r_max_m, self.elevation_deg)

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> RunConfig:
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise DomainError(f"unknown configuration keys: {sorted(unknown)}")
        merged = {**self.to_dict(), **changes}
        return RunConfig(**merged)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Overlay the keys of a JSON object file onto ``base`` (defaults if None)."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"config file {path} must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    return (base or RunConfig()).updated(**data)
