"""Acceptance criteria, one test each; every test also records a PASS/FAIL line."""
import itertools
import math
import os
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from nearfocus.analysis import CaiMap, cai_map, pwae_point
from nearfocus.channel import array_gain
from nearfocus.cli import main
from nearfocus.codebook import nonuniform_3d, uniform_3d
from nearfocus.config import RunConfig
from nearfocus.control import beamfocus_profile, quantize
from nearfocus.geometry import default_region, default_scene, fraunhofer_distance, polar_to_point
from nearfocus.kmeans import lloyd
from nearfocus.oracles import oracle_gain, oracle_suite
from nearfocus.training import experiment_fig6, experiment_hw_sim


def record(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
    assert ok, detail


def test_01_oracle_equivalence():
    t = time.perf_counter()
    checks = oracle_suite(1000, seed=0, tolerance=1e-12)
    dt = time.perf_counter() - t
    worst = ", ".join(f"{c.name}={c.worst:.1e}" for c in checks)
    record(1, "oracle equivalence (1000 scenes, 1e-12)",
           all(c.passed for c in checks) and dt < 10, f"{worst}; {dt:.1f} s")


def test_02_focus_optimality(scene):
    rng = np.random.default_rng(2)
    t = time.perf_counter()
    worst = 0.0
    n = scene.panel.element_count
    for _ in range(20):
        p = polar_to_point(rng.uniform(-math.pi / 3, math.pi / 3), rng.uniform(1, 50))
        worst = max(worst, abs(array_gain(scene, beamfocus_profile(scene, p), p) - n) / n)
    dt = time.perf_counter() - t
    record(2, "focus gain equals N (N=6400, 20 targets)", worst <= 1e-9 and dt < 5,
           f"worst rel err {worst:.1e}; {dt:.2f} s")


def test_03_far_field_convergence(scene):
    g = [pwae_point(scene, 0.0, d).normalized_gain for d in (10, 20, 40, 80, 160)]
    far = 100 * fraunhofer_distance(scene.panel, scene.wavelength)
    g_far = pwae_point(scene, 0.0, far).normalized_gain
    mono = all(b >= a for a, b in zip(g, g[1:]))
    record(3, "beamforming gain converges in the far field", mono and g_far >= 0.99,
           f"gains {[round(x, 4) for x in g]}; {g_far:.5f} at {far:.0f} m")


def test_04_hw_sim():
    t = time.perf_counter()
    recs = experiment_hw_sim(RunConfig())
    dt = time.perf_counter() - t

    def at(profile, target, d):
        return next(r.gain_db_rel for r in recs if r.profile == profile and r.target_deg == target
                    and r.distance_m == d and r.rx_angle_deg == target)

    gaps = {(d, tg): at("beamfocus", tg, d) - at("beamform", tg, d)
            for d in (3.0, 10.0) for tg in (20.0, 40.0)}
    binary = all(r.mode == "binary" for r in recs)
    ok = (binary and all(g > 0 for g in gaps.values())
          and all(gaps[3.0, tg] > gaps[10.0, tg] for tg in (20.0, 40.0)) and dt < 60)
    detail = ", ".join(f"{tg:.0f}deg@{d:.0f}m {g:+.2f} dB" for (d, tg), g in gaps.items())
    record(4, "binary beamfocus beats beamform, more so up close", ok, f"{detail}; {dt:.1f} s")


def test_05_binary_quantization_loss(scene):
    rng = np.random.default_rng(5)
    n = scene.panel.element_count
    ratios, oracle_err = [], 0.0
    for _ in range(20):
        az = rng.choice([-1, 1]) * rng.uniform(math.radians(10), math.radians(60))
        p = polar_to_point(az, rng.uniform(1, 50))
        q = quantize(beamfocus_profile(scene, p))
        g = array_gain(scene, q, p)
        oracle_err = max(oracle_err, abs(g - float(oracle_gain(scene, q.phases, p))) / n)
        ratios.append(g / n)
    ok = min(ratios) >= 0.57 and max(ratios) <= 0.70 and oracle_err <= 1e-12
    record(5, "binary focus gain in [0.57, 0.70] N", ok,
           f"range {min(ratios):.4f}..{max(ratios):.4f}; oracle err {oracle_err:.1e}")


def test_06_cai_structure(default_cai_map):
    means = default_cai_map.column_means()
    sel = means[default_cai_map.distance_centers() >= 3.0]
    ok = bool(np.all(np.diff(sel) < 0) and np.all(default_cai_map.values >= 0))
    record(6, "CAI column means fall with distance over [3, 50] m", ok,
           f"{sel[0]:.3g} -> {sel[-1]:.3g} over {len(sel)} bins")


def test_07_nonuniform_density(scene, region, default_cai_map):
    non = nonuniform_3d(scene, default_cai_map, 100, seed=0)
    uni = uniform_3d(scene, region, 100)
    med_n, med_u = np.median(non.targets()[1]), np.median(uni.targets()[1])
    flat = nonuniform_3d(scene, CaiMap(region, np.ones((40, 40))), 200, m=100_000, seed=0)
    r0, r1 = region.distance_min, region.distance_max
    edges = np.sqrt(r0 ** 2 + np.linspace(0, 1, 5) * (r1 ** 2 - r0 ** 2))
    p = stats.chisquare(np.histogram(flat.targets()[1], edges)[0]).pvalue
    record(7, "nonuniform codewords crowd the panel; flat map is area-uniform",
           med_n < med_u and p > 0.01, f"median {med_n:.2f} m vs {med_u:.2f} m; chi-square p={p:.3f}")


def _brute_sse(points, k):
    best = math.inf
    for labels in itertools.product(range(k), repeat=len(points)):
        lab = np.array(labels)
        sse = sum(((points[lab == j] - points[lab == j].mean(axis=0)) ** 2).sum()
                  for j in range(k) if np.any(lab == j))
        best = min(best, sse)
    return best


def test_08_kmeans_invariants():
    rng = np.random.default_rng(8)
    monotone, mean_err = True, 0.0
    for trial in range(20):
        x = rng.normal(size=(300, 2)) * rng.uniform(0.1, 5, size=2)
        res = lloyd(x, 7, seed=trial)
        monotone &= all(b <= a * (1 + 1e-12) for a, b in zip(res.history, res.history[1:]))
        for j in range(7):
            mean_err = max(mean_err, np.abs(res.centroids[j] - x[res.labels == j].mean(axis=0)).max())
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 9.0]])
    toy = np.concatenate([c + rng.normal(scale=0.7, size=(4, 2)) for c in centers])
    brute, got = _brute_sse(toy, 3), lloyd(toy, 3, seed=0).objective
    ok = monotone and mean_err <= 1e-9 and abs(got - brute) <= 1e-9 * brute
    record(8, "k-means monotone, centroids are means, matches brute force", ok,
           f"mean err {mean_err:.1e}; SSE {got:.6f} vs optimum {brute:.6f}")


@pytest.fixture(scope="module")
def fig6():
    cfg = RunConfig(rows=40, cols=40, trials=100, seed=0, workers=os.cpu_count() or 1)
    t = time.perf_counter()
    recs = experiment_fig6(cfg)
    return {(r.codebook_label, r.codeword_count, r.distance_m): r.mean_snr_db for r in recs}, \
        cfg.distances, time.perf_counter() - t


def test_09_fig6_orderings(fig6):
    table, dists, dt = fig6
    a = max(abs(table["uniform2d", 500, d] - table["uniform2d", 1000, d]) for d in dists)
    b = min(table["nonuniform3d", 1000, d] - table["uniform3d", 1000, d] for d in dists if d <= 5)
    c = min(table["uniform2d", 100, d] - max(table["uniform3d", 100, d], table["nonuniform3d", 100, d])
            for d in dists if d >= 20)
    ok = a < 0.5 and b >= 0 and c >= 0 and dt < 900
    record(9, "desk-scale codebook orderings (N=1600, 100 trials)", ok,
           f"(a) max |2D500-2D1000| {a:.3f} dB; (b) min non3D-uni3D {b:+.3f} dB; "
           f"(c) min 2D-3D {c:+.3f} dB; {dt:.0f} s")


def _outputs(directory):
    return {p: (directory / p).read_bytes() for p in sorted(os.listdir(directory))}


def test_10_determinism(tmp_path):
    small = ["--rows", "16", "--cols", "16", "--az-bins", "8", "--r-bins", "8", "--seed", "7"]
    commands = [
        ["sweep", "--codewords", "100", "--trials", "10", "--seed", "7"],
        ["pwae", *small],
        ["cai", *small],
        ["hw-sim", *small],
        ["selftest", "--scenes", "30", *small],
        ["codebook", "build", "--kind", "nonuniform3d", "--k", "50", *small],
    ]
    differing = []
    for i, argv in enumerate(commands):
        runs = []
        for w in ("1", "4"):
            out = tmp_path / f"{i}-{w}"
            assert main(argv + ["--workers", w, "--out", str(out)]) == 0
            runs.append(_outputs(out))
        if runs[0] != runs[1]:
            differing.append(argv[0])
    record(10, "byte-identical reruns across worker counts", not differing,
           f"{len(commands)} subcommands; differing: {differing or 'none'}")
