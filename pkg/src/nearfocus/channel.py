"""Free-space cascaded channel through the panel, array gain and SNR."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Scene, as_point, distances

TWO_PI = 2 * math.pi
CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Per-element phase shifts in [0, 2pi), one panel actuation."""

    phases: np.ndarray
    quantization: str = CONTINUOUS

    def __post_init__(self):
        ph = np.array(self.phases, dtype=float)
        if ph.ndim != 1:
            raise DomainError("phases must be one-dimensional")
        if not np.all(np.isfinite(ph)):
            raise DomainError("phases must be finite")
        ph = np.mod(ph, TWO_PI)
        # mod can round a tiny negative input up to exactly 2pi
        ph[ph >= TWO_PI] = 0.0
        if self.quantization not in (CONTINUOUS, BINARY):
            raise DomainError(f"unknown quantization tag {self.quantization!r}")
        if self.quantization == BINARY and not np.all((ph == 0.0) | (ph == math.pi)):
            raise DomainError("binary profile holds phases other than 0 and pi")
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    def __len__(self):
        return self.phases.size

    def __eq__(self, other):
        if not isinstance(other, PhaseProfile):
            return NotImplemented
        return self.quantization == other.quantization and np.array_equal(self.phases, other.phases)

    def shifted(self, offset: float) -> PhaseProfile:
        """Same profile with a global phase offset added to every element."""
        return PhaseProfile(self.phases + offset, CONTINUOUS)


def free_space_amplitude(d, wavelength: float):
    """Per-link amplitude lambda / (4 pi d)."""
    return wavelength / (4 * math.pi * np.asarray(d))


def _rx_distances(scene: Scene, rx) -> np.ndarray:
    rx = as_point(rx, "rx")
    if not rx[1] > 0:
        raise DomainError(f"receiver {rx} is not in front of the panel")
    d = distances(scene.panel.positions, rx)
    if np.any(d == 0):
        raise DomainError("receiver coincides with a panel element")
    return d


def _check_profile(scene: Scene, profile: PhaseProfile):
    if len(profile) != scene.panel.element_count:
        raise DomainError(
            f"profile has {len(profile)} phases, panel has {scene.panel.element_count} elements"
        )


def path_phases(scene: Scene, rx) -> np.ndarray:
    """k (d_tx,n + d_rx,n) for every element, before reduction modulo 2pi."""
    return scene.wavenumber * (scene.tx_distances + _rx_distances(scene, rx))


def element_terms(scene: Scene, profile: PhaseProfile, rx) -> np.ndarray:
    """Complex contribution of each element to the cascaded channel."""
    _check_profile(scene, profile)
    d_rx = _rx_distances(scene, rx)
    d_tx = scene.tx_distances
    lam = scene.wavelength
    amp = free_space_amplitude(d_tx, lam) * free_space_amplitude(d_rx, lam)
    return amp * np.exp(1j * (profile.phases - scene.wavenumber * (d_tx + d_rx)))


def cascaded_channel(scene: Scene, profile: PhaseProfile, rx) -> complex:
    """h = sum_n a(d_tx,n) a(d_rx,n) exp(i (theta_n - k (d_tx,n + d_rx,n)))."""
    return complex(np.sum(element_terms(scene, profile, rx)))


def coherent_bound(scene: Scene, rx) -> float:
    """Largest |h| any profile can reach at ``rx``: all terms in phase."""
    lam = scene.wavelength
    return float(np.sum(free_space_amplitude(scene.tx_distances, lam)
                        * free_space_amplitude(_rx_distances(scene, rx), lam)))


def array_gain(scene: Scene, profile: PhaseProfile, rx) -> float:
    """Unit-amplitude coherence |sum_n exp(i (theta_n - k (d_tx,n + d_rx,n)))|, in [0, N]."""
    _check_profile(scene, profile)
    return abs(complex(np.sum(np.exp(1j * (profile.phases - path_phases(scene, rx))))))


def snr_from_channel(scene: Scene, h) -> np.ndarray | float:
    with np.errstate(divide="ignore"):
        return 10 * np.log10(scene.tx_power * np.abs(h) ** 2 / scene.noise_power)


def snr_db(scene: Scene, profile: PhaseProfile, rx) -> float:
    """Received SNR in dB, 10 log10(P |h|^2 / sigma^2)."""
    return float(snr_from_channel(scene, cascaded_channel(scene, profile, rx)))
