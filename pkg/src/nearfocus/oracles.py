"""Brute-force reference computations for small panels.

Everything here is recomputed term by term in 40-digit mpmath arithmetic
from the raw scene description, sharing no code with the vectorized paths
it is used to check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .channel import PhaseProfile, array_gain, cascaded_channel
from .codebook import BEAMFOCUS, Codebook, Codeword, UNIFORM_3D
from .control import beamfocus_profile
from .geometry import CoverageRegion, IrsPanel, Scene
from .training import select_codeword

DPS = 40
C = mpmath.mpf(299792458)


def _elements(panel: IrsPanel):
    s = mpmath.mpf(panel.spacing)
    out = []
    for r in range(panel.rows):
        for c in range(panel.cols):
            x = (mpmath.mpf(c) - mpmath.mpf(panel.cols - 1) / 2) * s
            z = (mpmath.mpf(r) - mpmath.mpf(panel.rows - 1) / 2) * s
            out.append((x, mpmath.mpf(0), z))
    return out


def _dist(a, b):
    return mpmath.sqrt(sum((mpmath.mpf(p) - mpmath.mpf(q)) ** 2 for p, q in zip(a, b)))


def oracle_terms(scene: Scene, phases, rx, unit_amplitude=False):
    with mpmath.workdps(DPS):
        lam = C / mpmath.mpf(scene.carrier_frequency)
        k = 2 * mpmath.pi / lam
        terms = []
        for e, th in zip(_elements(scene.panel), phases):
            d1, d2 = _dist(scene.tx_position, e), _dist(rx, e)
            amp = 1 if unit_amplitude else (lam / (4 * mpmath.pi * d1)) * (lam / (4 * mpmath.pi * d2))
            terms.append(amp * mpmath.expj(mpmath.mpf(th) - k * (d1 + d2)))
        return terms


def oracle_channel(scene, phases, rx):
    """(h, sum of |terms|) for the cascaded channel."""
    with mpmath.workdps(DPS):
        t = oracle_terms(scene, phases, rx)
        return mpmath.fsum(t), mpmath.fsum(abs(x) for x in t)


def oracle_gain(scene, phases, rx):
    with mpmath.workdps(DPS):
        return abs(mpmath.fsum(oracle_terms(scene, phases, rx, unit_amplitude=True)))


def oracle_focus_phases(scene, target):
    with mpmath.workdps(DPS):
        lam = C / mpmath.mpf(scene.carrier_frequency)
        k = 2 * mpmath.pi / lam
        return [mpmath.fmod(k * (_dist(scene.tx_position, e) + _dist(target, e)), 2 * mpmath.pi)
                for e in _elements(scene.panel)]


def oracle_select(scene, codebook, rx, tolerance=1e-12):
    """Indices whose SNR ties the maximum within ``tolerance`` (normwise),
    the maximum linear SNR, and its normwise scale."""
    with mpmath.workdps(DPS):
        snrs, scales = [], []
        for cw in codebook:
            h, mag = oracle_channel(scene, cw.profile.phases, rx)
            ratio = mpmath.mpf(scene.tx_power) / mpmath.mpf(scene.noise_power)
            snrs.append(ratio * abs(h) ** 2)
            scales.append(ratio * mag ** 2)
        best = max(snrs)
        scale = max(scales)
        tied = {i for i, s in enumerate(snrs) if (best - s) / scale <= tolerance}
        return tied, best, scale


def random_toy_scene(rng: np.random.Generator, max_elements: int = 8) -> Scene:
    while True:
        rows, cols = int(rng.integers(1, max_elements + 1)), int(rng.integers(1, max_elements + 1))
        if rows * cols <= max_elements:
            break
    return Scene(
        panel=IrsPanel(rows, cols, float(rng.uniform(1e-3, 5e-2))),
        carrier_frequency=float(rng.uniform(1e9, 30e9)),
        tx_position=random_front_point(rng),
        tx_power=float(rng.uniform(1e-3, 1.0)),
        noise_power=float(rng.uniform(1e-13, 1e-10)),
    )


def random_front_point(rng: np.random.Generator) -> tuple:
    return (float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.05, 1.0)), float(rng.uniform(-0.5, 0.5)))


@dataclass
class OracleCheck:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def oracle_suite(n_scenes: int = 1000, seed: int = 0, tolerance: float = 1e-12,
                 codewords: int = 5) -> list[OracleCheck]:
    """Compare the vectorized paths with the oracles on random toy scenes.

    Channel and SNR errors are normwise (relative to the sum of term
    magnitudes), gain errors are relative to N, phase errors in radians.
    """
    rng = np.random.default_rng(seed)
    worst = {"cascaded_channel": 0.0, "array_gain": 0.0, "beamfocus_profile": 0.0,
             "select_codeword": 0.0}
    region = CoverageRegion(-1.5, 1.5, 1e-3, 10.0)
    for _ in range(n_scenes):
        scene = random_toy_scene(rng)
        n = scene.panel.element_count
        rx = random_front_point(rng)
        prof = PhaseProfile(rng.uniform(0, 2 * math.pi, n))

        h, mag = oracle_channel(scene, prof.phases, rx)
        err = abs(complex(cascaded_channel(scene, prof, rx)) - complex(h)) / float(mag)
        worst["cascaded_channel"] = max(worst["cascaded_channel"], err)

        g = oracle_gain(scene, prof.phases, rx)
        worst["array_gain"] = max(worst["array_gain"], abs(array_gain(scene, prof, rx) - float(g)) / n)

        target = random_front_point(rng)
        ref = oracle_focus_phases(scene, target)
        got = beamfocus_profile(scene, target).phases
        d = max(abs(math.remainder(float(r) - p, 2 * math.pi)) for r, p in zip(ref, got))
        worst["beamfocus_profile"] = max(worst["beamfocus_profile"], d)

        cws = []
        for j in range(codewords):
            t = random_front_point(rng)
            az, dist = math.atan2(t[0], t[1]), math.hypot(t[0], t[1])
            cws.append(Codeword(beamfocus_profile(scene, t), BEAMFOCUS, az, dist, j))
        cb = Codebook(cws, UNIFORM_3D, region, scene)
        res = select_codeword(scene, cb, rx)
        tied, snr, scale = oracle_select(scene, cb, rx, tolerance)
        err = abs(10 ** (res.snr_db / 10) - float(snr)) / float(scale)
        if res.selected_index not in tied:
            err = math.inf
        worst["select_codeword"] = max(worst["select_codeword"], err)
    return [OracleCheck(name, w, tolerance) for name, w in worst.items()]
