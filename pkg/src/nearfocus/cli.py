"""Command-line entry point: ``nearfocus <subcommand> [flags]``.

Each run writes its CSV artifacts plus ``manifest-<subcommand>.json`` with
every resolved parameter into ``--out``. Flags override the values of a
``--config`` JSON file, which override the built-in defaults.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analysis import cell_centers, pwae_map, write_cai_csv
from .codebook import CONSTRUCTIONS, load_codebook, save_codebook
from .config import RunConfig, load_config
from .errors import DomainError
from .geometry import fraunhofer_distance
from .training import build_cai_map, build_codebook, experiment_fig6, experiment_hw_sim


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


# flag -> (RunConfig field, type)
FLAGS = {
    "--freq-ghz": ("freq_ghz", float),
    "--rows": ("rows", int),
    "--cols": ("cols", int),
    "--spacing-mm": ("spacing_mm", float),
    "--tx-dist-m": ("tx_dist_m", float),
    "--tx-power-dbm": ("tx_power_dbm", float),
    "--noise-dbm": ("noise_dbm", float),
    "--az-min-deg": ("az_min_deg", float),
    "--az-max-deg": ("az_max_deg", float),
    "--r-min-m": ("r_min_m", float),
    "--r-max-m": ("r_max_m", float),
    "--codewords": ("codewords", _ints),
    "--kinds": ("kinds", _names),
    "--ref-multiplier": ("ref_multiplier", int),
    "--trials": ("trials", int),
    "--distances": ("distances", _floats),
    "--probe-step-mm": ("probe_step_mm", float),
    "--probe-dirs": ("probe_dirs", int),
    "--az-bins": ("az_bins", int),
    "--r-bins": ("r_bins", int),
    "--seed": ("seed", int),
    "--tx-link": ("tx_link", str),
    "--average": ("average", str),
    "--workers": ("workers", int),
    "--out": ("out", str),
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with RunConfig keys")
    for flag, (dest, typ) in FLAGS.items():
        p.add_argument(flag, dest=dest, type=typ, default=None)
    p.add_argument("--raw", dest="raw", action="store_const", const=True, default=None,
                   help="write floats at full precision instead of 6 decimals")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nearfocus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("pwae", "beamforming vs. beamfocusing gain map"),
                        ("cai", "control accuracy index map"),
                        ("sweep", "mean SNR vs. distance for every codebook"),
                        ("hw-sim", "simulated binary-phase beamforming/beamfocusing experiment"),
                        ("selftest", "compare vectorized paths with brute-force oracles")]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "selftest":
            p.add_argument("--scenes", type=int, default=200)
    cb = sub.add_parser("codebook", help="build or inspect codebook files")
    cbsub = cb.add_subparsers(dest="action", required=True)
    b = cbsub.add_parser("build")
    _add_common(b)
    b.add_argument("--kind", choices=CONSTRUCTIONS, required=True)
    b.add_argument("--k", dest="k", type=int, default=None, help="codeword count")
    i = cbsub.add_parser("inspect")
    _add_common(i)
    i.add_argument("file")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {dest: getattr(args, dest) for dest, _ in FLAGS.values()}
    overrides["raw"] = args.raw
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "k", None) is not None:
        overrides["codewords"] = [args.k]
    return cfg.updated(**overrides)


def _fmt(cfg: RunConfig):
    return (lambda x: repr(float(x))) if cfg.raw else (lambda x: f"{float(x):.6f}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _manifest(cfg: RunConfig, command: str, outputs: list[str], extra=None):
    scene = cfg.scene()
    # the output directory and worker count never change an output byte
    params = {k: v for k, v in cfg.to_dict().items() if k not in ("out", "workers")}
    data = {
        "command": command,
        "version": __version__,
        "config": params,
        "derived": {
            "wavelength_m": scene.wavelength,
            "spacing_m": scene.panel.spacing,
            "elements": scene.panel.element_count,
            "tx_power_w": scene.tx_power,
            "noise_power_w": scene.noise_power,
            "probe_step_m": cfg.probe_step,
        },
        "outputs": sorted(outputs),
    }
    if scene.panel.element_count > 1:
        data["derived"]["fraunhofer_distance_m"] = fraunhofer_distance(scene.panel, scene.wavelength)
    if extra:
        data.update(extra)
    path = os.path.join(cfg.out, f"manifest-{command}.json")
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_pwae(cfg):
    region = cfg.region()
    az = cell_centers(region.azimuth_min, region.azimuth_max, cfg.az_bins)
    ds = cell_centers(region.distance_min, region.distance_max, cfg.r_bins)
    recs = pwae_map(cfg.scene(), az, ds, region.elevation, cfg.tx_link, cfg.workers)
    f = _fmt(cfg)
    path = os.path.join(cfg.out, "pwae.csv")
    _write_csv(path, ["azimuth_deg", "distance_m", "beamform_gain", "beamfocus_gain", "normalized_gain"],
               [[f(math.degrees(r.azimuth)), f(r.distance), f(r.beamform_gain), f(r.beamfocus_gain),
                 f(r.normalized_gain)] for r in recs])
    return [path]


def cmd_cai(cfg):
    cmap = build_cai_map(cfg)
    path = os.path.join(cfg.out, "cai.csv")
    write_cai_csv(cmap, path, raw=cfg.raw)
    return [path]


def cmd_sweep(cfg):
    recs = experiment_fig6(cfg)
    f = _fmt(cfg)
    path = os.path.join(cfg.out, "sweep.csv")
    _write_csv(path, ["codebook", "codewords", "distance_m", "mean_snr_db", "trials", "seed"],
               [[r.codebook_label, r.codeword_count, f(r.distance_m), f(r.mean_snr_db),
                 r.trials, cfg.seed] for r in recs])
    return [path]


def cmd_hw_sim(cfg):
    recs = experiment_hw_sim(cfg)
    f = _fmt(cfg)
    path = os.path.join(cfg.out, "hwsim.csv")
    _write_csv(path, ["profile", "target_deg", "mode", "distance_m", "rx_angle_deg", "gain_db_rel"],
               [[r.profile, f(r.target_deg), r.mode, f(r.distance_m), f(r.rx_angle_deg),
                 f(r.gain_db_rel)] for r in recs])
    return [path]


def cmd_codebook_build(cfg, kind):
    outputs = []
    for k in cfg.codewords:
        cb = build_codebook(cfg, kind, int(k))
        path = os.path.join(cfg.out, f"codebook-{kind}-{k}.txt")
        save_codebook(cb, path)
        outputs.append(path)
    return outputs


def cmd_codebook_inspect(cfg, path):
    cb = load_codebook(path, cfg.scene())
    az, d = cb.targets()
    print(f"construction  {cb.construction}")
    print(f"codewords     {len(cb)}")
    print(f"seed          {cb.seed}")
    print(f"checksum      {cb.checksum()} (verified)")
    print(f"azimuth_deg   min {math.degrees(az.min()):.3f}  max {math.degrees(az.max()):.3f}")
    finite = d[np.isfinite(d)]
    if finite.size:
        print(f"distance_m    min {finite.min():.3f}  median {np.median(finite):.3f}  max {finite.max():.3f}")
    else:
        print("distance_m    unbounded (beamforming)")
    return []


def cmd_selftest(cfg, scenes):
    from .oracles import oracle_suite
    checks = oracle_suite(scenes, seed=cfg.seed)
    lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name} worst={c.worst:.3e} tol={c.tolerance:.0e}"
             for c in checks]
    for line in lines:
        print(line)
    path = os.path.join(cfg.out, "selftest.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return [path], all(c.passed for c in checks)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command if args.command != "codebook" else f"codebook-{args.action}"
    try:
        cfg = resolve_config(args)
        if command != "codebook-inspect":
            os.makedirs(cfg.out, exist_ok=True)
        ok = True
        if command == "pwae":
            outputs = cmd_pwae(cfg)
        elif command == "cai":
            outputs = cmd_cai(cfg)
        elif command == "sweep":
            outputs = cmd_sweep(cfg)
        elif command == "hw-sim":
            outputs = cmd_hw_sim(cfg)
        elif command == "selftest":
            outputs, ok = cmd_selftest(cfg, args.scenes)
        elif command == "codebook-build":
            outputs = cmd_codebook_build(cfg, args.kind)
        else:
            outputs = cmd_codebook_inspect(cfg, args.file)
        if command != "codebook-inspect":
            _manifest(cfg, command, [os.path.basename(p) for p in outputs])
    except DomainError as exc:
        print(f"nearfocus: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"nearfocus: error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
