"""Command line entry point: ``coopraman {run,sweep,capacity,allocate,reconstruct}``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .allocation import UnreachableBandError, allocate_power, expected_channel
from .capacity import system_capacity
from .channel import default_attenuation, load_attenuation
from .harness import Experiment, estimate_all, load_sweep_spec, run_sweep, simulate_counts, trial_rng
from .photonics import PhotonMatrix
from .scenario import ConfigError, SystemConfig, load_scenario
from .spectrum import load_spectrum, reference_spectrum, write_spectrum_csv


def _config(args, path=None) -> SystemConfig:
    path = path or getattr(args, "scenario", None)
    cfg = load_scenario(path) if path else SystemConfig()
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "no_fading", False):
        changes["fading"] = False
    return replace(cfg, **changes) if changes else cfg


def _channel(args, cfg, path=None):
    path = path or getattr(args, "channel", None)
    return load_attenuation(cfg, path) if path else default_attenuation(cfg)


def _spectrum(args, cfg, path=None):
    path = path or getattr(args, "spectrum", None)
    return load_spectrum(path, cfg) if path else reference_spectrum(cfg)


def _write_reports(out: Path, cfg, reports) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name, rep in reports.items():
        write_spectrum_csv(out / f"spectrum_{name}.csv", rep.eta_hat, cfg)
        summary[name] = rep.to_dict()
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_run(args) -> int:
    cfg = _config(args)
    exp = Experiment.build(cfg, _spectrum(args, cfg), _channel(args, cfg),
                           tau_t=args.tau_t or (1.5, 3.0))
    Nd, vasc = simulate_counts(exp, trial_rng(cfg.seed, args.trial))
    if args.dump_photons:
        Nd.to_csv(args.dump_photons)
    if args.dump_scenes:
        Path(args.dump_scenes).write_text(json.dumps(vasc.to_dict()) + "\n")
    summary = _write_reports(Path(args.out), cfg, estimate_all(exp, Nd))
    print(json.dumps({k: {"mse": v["mse"], "outage": v["outage"], "peaks_cm1": v["peaks_cm1"]}
                      for k, v in summary.items()}))
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    exp = Experiment.build(replace(cfg, fixed_vasculature=False), _spectrum(args, cfg),
                           _channel(args, cfg))
    Nd = PhotonMatrix.from_csv(args.photons)
    Nd.check(cfg)
    summary = _write_reports(Path(args.out), cfg, estimate_all(exp, Nd))
    print(json.dumps({k: {"mse": v["mse"], "peaks_cm1": v["peaks_cm1"]} for k, v in summary.items()}))
    return 0


def cmd_sweep(args) -> int:
    spec, raw = load_sweep_spec(args.spec)
    base_dir = Path(args.spec).resolve().parent

    def rel(key):
        # command line paths win; spec paths are relative to the spec file
        if getattr(args, key, None):
            return getattr(args, key)
        p = raw.get(key)
        return None if p is None else str(base_dir / p)

    cfg = _config(args, rel("scenario"))
    if args.seed is None and "seed" in raw:
        cfg = replace(cfg, seed=int(raw["seed"]))
    eta = _spectrum(args, cfg, rel("spectrum"))
    channel = _channel(args, cfg, rel("channel"))
    out = args.out or spec.out
    if out is None:
        raise ConfigError("no output path: give --out or 'out' in the sweep spec")
    result = run_sweep(spec, cfg, eta, channel, jobs=args.jobs)
    csv_path, man = result.write(out)
    print(json.dumps({"csv": str(csv_path), "manifest": str(man), "wall_time_s": result.wall_time}))
    return 0


def cmd_capacity(args) -> int:
    cfg = _config(args)
    channel = _channel(args, cfg)
    est = system_capacity(cfg, np.random.default_rng(np.random.SeedSequence([cfg.seed, 2])),
                          n_samples=args.samples, eta=_spectrum(args, cfg), channel=channel)
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["shift_cm1", "capacity_nats_per_s", "se"])
        for s, c, e in zip(cfg.shift_centers, est.per_band, est.per_band_se):
            w.writerow([repr(float(s)), repr(float(c)), repr(float(e))])
    summary = {"total_nats_per_s": est.total, "se": est.total_se, "clamped_draws": est.n_clamped}
    # keep stdout clean when the CSV goes there
    print(json.dumps(summary), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return 0


def cmd_allocate(args) -> int:
    cfg = _config(args)
    H = expected_channel(cfg, _channel(args, cfg))
    P = allocate_power(H, cfg.power_per_sensor)
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["shift_cm1", "H", "P_W"])
        for s, h, p in zip(cfg.shift_centers, H.H, P.P):
            w.writerow([repr(float(s)), repr(float(h)), repr(float(p))])
    return 0


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        return False


def _open_out(path):
    if path in (None, "-"):
        return _Stdout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coopraman", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spectrum=True):
        p.add_argument("--scenario", help="scenario JSON (defaults to the built-in scene)")
        p.add_argument("--channel", help="attenuation calibration JSON")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--no-fading", action="store_true", help="disable Rayleigh fading")
        if spectrum:
            p.add_argument("--spectrum", help="true spectrum: CSV (shift_cm1,value) or peak-list JSON")

    p = sub.add_parser("run", help="simulate one sensing round and reconstruct")
    common(p)
    p.add_argument("--trial", type=int, default=0, help="trial index selecting the RNG stream")
    p.add_argument("--tau-t", type=float, nargs="+", help="outage thresholds")
    p.add_argument("--out", default="run_out", help="output directory")
    p.add_argument("--dump-photons", help="write the photon matrix CSV here")
    p.add_argument("--dump-scenes", help="write the vessel scene JSON here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="Monte Carlo sweep of one scenario parameter")
    common(p)
    p.add_argument("--spec", required=True, help="sweep spec JSON")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", help="CSV path (overrides the spec)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("capacity", help="per-sub-band system capacity as CSV")
    common(p)
    p.add_argument("--samples", type=int, default=20, help="Monte Carlo samples")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("allocate", help="per-sub-band transmit power as CSV")
    common(p, spectrum=False)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("reconstruct", help="reconstruct a spectrum from a photon matrix CSV")
    common(p)
    p.add_argument("--photons", required=True, help="photon matrix CSV (rows sensors, columns sub-bands)")
    p.add_argument("--out", default="reconstruct_out", help="output directory")
    p.set_defaults(func=cmd_reconstruct)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnreachableBandError, ValueError, KeyError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
