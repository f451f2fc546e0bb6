"""Codebook-scanning beam training and the Monte Carlo evaluations."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import cai_map
from .channel import free_space_amplitude, snr_db, array_gain
from .codebook import (NONUNIFORM_3D, UNIFORM_2D, UNIFORM_3D, Codebook, nonuniform_3d,
                       uniform_2d, uniform_3d)
from .config import RunConfig
from .control import beamfocus_profile, beamform_profile, quantize
from .errors import DomainError
from .geometry import CoverageRegion, Scene, direction_from_angles, distances, polar_to_point
from .seeding import unit_uniform

TRIAL_CHUNK = 64


@dataclass(frozen=True)
class TrainingResult:
    selected_index: int
    snr_db: float
    scans: int


@dataclass(frozen=True)
class SweepRecord:
    codebook_label: str
    codeword_count: int
    distance_m: float
    mean_snr_db: float
    trials: int


@dataclass(frozen=True)
class HwRecord:
    profile: str
    target_deg: float
    mode: str
    distance_m: float
    rx_angle_deg: float
    gain_db_rel: float


def codeword_weights(codebook: Codebook) -> np.ndarray:
    """exp(i theta) for every codeword, shape (K, N); cached on the codebook."""
    w = codebook.__dict__.get("_weights")
    if w is None:
        w = np.exp(1j * codebook.phase_matrix())
        codebook.__dict__["_weights"] = w
    return w


def user_channels(scene: Scene, rx_points: np.ndarray) -> np.ndarray:
    """Per-element channel without the panel phase, shape (T, N).

    Row t holds a(d_tx,n) a(d_rx,n) exp(-i k (d_tx,n + d_rx,n)) for receiver t.
    """
    pos = scene.panel.positions
    lam, k = scene.wavelength, scene.wavenumber
    d_tx = scene.tx_distances
    out = np.empty((len(rx_points), len(pos)), dtype=complex)
    for t, rx in enumerate(rx_points):
        if not rx[1] > 0:
            raise DomainError(f"receiver {rx} is not in front of the panel")
        d_rx = distances(pos, rx)
        if np.any(d_rx == 0):
            raise DomainError("receiver coincides with a panel element")
        amp = free_space_amplitude(d_tx, lam) * free_space_amplitude(d_rx, lam)
        out[t] = amp * np.exp(-1j * k * (d_tx + d_rx))
    return out


def _scan(scene: Scene, codebook: Codebook, rx_points: np.ndarray) -> list[TrainingResult]:
    h = user_channels(scene, rx_points) @ codeword_weights(codebook).T
    power = h.real ** 2 + h.imag ** 2
    best = np.argmax(power, axis=1)  # first maximum: lowest index wins ties
    return [TrainingResult(int(b), snr_db(scene, codebook[int(b)].profile, rx), len(codebook))
            for b, rx in zip(best, rx_points)]


def select_codeword(scene: Scene, codebook: Codebook, rx) -> TrainingResult:
    """Scan every codeword at ``rx`` and keep the one with the highest SNR."""
    if len(codebook) == 0:
        raise DomainError("cannot train on an empty codebook")
    rx = np.asarray(rx, dtype=float)
    return _scan(scene, codebook, rx[None, :])[0]


def user_azimuths(region: CoverageRegion, seed: int, distance_index: int, trials: int) -> np.ndarray:
    """Uniform user azimuths for one distance; trial t depends only on (seed, index, t)."""
    u = np.array([unit_uniform(seed, "user", distance_index, t) for t in range(trials)])
    return region.azimuth_min + u * region.azimuth_span


def average_snr_db(snrs_db, average: str = "linear") -> float:
    s = np.asarray(snrs_db, dtype=float)
    if average == "linear":
        return float(10 * np.log10(np.mean(10 ** (s / 10))))
    if average == "db":
        return float(np.mean(s))
    raise DomainError(f"unknown averaging domain {average!r}")


def sweep_results(scene: Scene, codebook: Codebook, distances_m, trials: int, seed: int,
                  workers: int = 1) -> list[list[TrainingResult]]:
    """Per-distance, per-trial training results of a sweep."""
    if trials < 1:
        raise DomainError("need at least one trial")
    region = codebook.region
    tasks = []
    for i, d in enumerate(distances_m):
        az = user_azimuths(region, seed, i, trials)
        pts = np.array([polar_to_point(a, float(d), region.elevation) for a in az])
        for start in range(0, trials, TRIAL_CHUNK):
            tasks.append((i, pts[start:start + TRIAL_CHUNK]))

    def run(task):
        return _scan(scene, codebook, task[1])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(run, tasks))
    else:
        chunks = [run(t) for t in tasks]
    out = [[] for _ in distances_m]
    for (i, _), res in zip(tasks, chunks):
        out[i].extend(res)
    return out


def snr_sweep(scene: Scene, codebook: Codebook, distances_m, trials: int, seed: int,
              workers: int = 1, average: str = "linear") -> list[SweepRecord]:
    """Mean selected SNR at each distance over ``trials`` random user azimuths.

    SNRs are averaged in linear power (``average="linear"``) or in dB.
    """
    results = sweep_results(scene, codebook, distances_m, trials, seed, workers)
    construction, k = codebook.construction, len(codebook)
    return [SweepRecord(construction, k, float(d),
                        average_snr_db([r.snr_db for r in res], average), trials)
            for d, res in zip(distances_m, results)]


def build_codebook(cfg: RunConfig, kind: str, k: int, scene: Scene | None = None, cmap=None):
    scene = scene or cfg.scene()
    region = cfg.region()
    if kind == UNIFORM_2D:
        return uniform_2d(scene, region, k, tx_link=cfg.tx_link)
    if kind == UNIFORM_3D:
        return uniform_3d(scene, region, k)
    if kind == NONUNIFORM_3D:
        if cmap is None:
            cmap = build_cai_map(cfg, scene)
        return nonuniform_3d(scene, cmap, k, m=cfg.ref_multiplier * k, seed=cfg.seed)
    raise DomainError(f"unknown codebook kind {kind!r}")


def build_cai_map(cfg: RunConfig, scene: Scene | None = None):
    scene = scene or cfg.scene()
    return cai_map(scene, cfg.region(), cfg.az_bins, cfg.r_bins, cfg.probe_step,
                   cfg.probe_dirs, workers=cfg.workers)


def experiment_fig6(cfg: RunConfig, progress=None) -> list[SweepRecord]:
    """Every requested codebook kind and size swept over the distance grid."""
    scene = cfg.scene()
    cmap = build_cai_map(cfg, scene) if NONUNIFORM_3D in cfg.kinds else None
    records = []
    for kind in cfg.kinds:
        for k in cfg.codewords:
            cb = build_codebook(cfg, kind, int(k), scene, cmap)
            records.extend(snr_sweep(scene, cb, cfg.distances, cfg.trials, cfg.seed,
                                     cfg.workers, cfg.average))
            if progress:
                progress(kind, k)
    return records


def experiment_hw_sim(cfg: RunConfig, distances_m=(3.0, 10.0), targets_deg=(20.0, 40.0),
                      rx_angles_deg=None) -> list[HwRecord]:
    """Four binary profiles (beamform/beamfocus x two targets) swept in angle.

    The transmitter sits on boresight at the same distance as the receiver
    ring. Gains are 20 log10(G / N), i.e. received power relative to a
    perfectly coherent panel.
    """
    if rx_angles_deg is None:
        rx_angles_deg = np.arange(10.0, 51.0, 1.0)
    out = []
    for d in distances_m:
        scene = cfg.scene(tx_distance=d)
        n = scene.panel.element_count
        for tgt in targets_deg:
            az = math.radians(tgt)
            profiles = {
                "beamform": beamform_profile(scene, direction_from_angles(az), tx_link=cfg.tx_link),
                "beamfocus": beamfocus_profile(scene, polar_to_point(az, d)),
            }
            for name, prof in profiles.items():
                q = quantize(prof)
                for ang in rx_angles_deg:
                    g = array_gain(scene, q, polar_to_point(math.radians(ang), d))
                    rel = 20 * math.log10(g / n) if g > 0 else -math.inf
                    out.append(HwRecord(name, float(tgt), q.quantization, float(d), float(ang), rel))
    return out
