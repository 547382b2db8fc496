"""Monte Carlo trials and parameter sweeps.

Randomness is keyed by counters: trial t draws from SeedSequence([seed, 1, t])
and a fixed vasculature from SeedSequence([seed, 0]).  Trials therefore give
the same numbers whatever the worker count, and every sweep value sees the
same trial streams (common random numbers).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import PowerAllocation, allocate_power, expected_channel
from .channel import AttenuationModel, default_attenuation
from .photonics import PhotonMatrix, sense_all
from .reconstruction import (DEFAULT_OUTAGE_THRESHOLDS, ReconstructionReport,
                             centralized_estimate, distributed_estimate, peaks_match, score)
from .scenario import ConfigError, SystemConfig, sweepable_parameters
from .spectrum import BPE_CENTERS, reference_spectrum
from .vasculature import Vasculature, sample_vasculature

ESTIMATORS = ("centralized", "distributed")
VASCULATURE_STREAM = 0
TRIAL_STREAM = 1
CSV_COLUMNS = ("param_value", "estimator", "tau_t", "outage", "se",
               "mean_mse", "median_mse", "trials")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, TRIAL_STREAM, trial]))


def vasculature_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, VASCULATURE_STREAM]))


@dataclass
class Experiment:
    """Everything a trial needs besides its RNG; cheap to pickle."""

    cfg: SystemConfig
    eta: np.ndarray
    channel: AttenuationModel
    H: np.ndarray
    power: PowerAllocation
    vasculature: Vasculature | None   # None -> redrawn every trial
    estimators: tuple = ESTIMATORS
    tau_t: tuple = DEFAULT_OUTAGE_THRESHOLDS
    peak_lines: tuple = BPE_CENTERS

    @classmethod
    def build(cls, cfg: SystemConfig, eta=None, channel: AttenuationModel | None = None,
              estimators=ESTIMATORS, tau_t=DEFAULT_OUTAGE_THRESHOLDS,
              peak_lines=BPE_CENTERS) -> "Experiment":
        channel = default_attenuation(cfg) if channel is None else channel
        eta = reference_spectrum(cfg) if eta is None else np.asarray(eta, dtype=float)
        if eta.shape != (cfg.N_f,):
            raise ConfigError(f"spectrum has {eta.size} bins, scenario needs {cfg.N_f}")
        H = expected_channel(cfg, channel).H
        power = allocate_power(H, cfg.power_per_sensor)
        vasc = sample_vasculature(cfg, vasculature_rng(cfg.seed)) if cfg.fixed_vasculature else None
        unknown = set(estimators) - set(ESTIMATORS)
        if unknown:
            raise ConfigError(f"unknown estimators {sorted(unknown)}")
        return cls(cfg, eta, channel, H, power, vasc, tuple(estimators),
                   tuple(float(t) for t in tau_t), tuple(peak_lines))


@dataclass(frozen=True)
class TrialOutcome:
    mse: dict          # estimator -> mse
    peaks_ok: dict     # estimator -> exact peak recovery
    degenerate: dict


def simulate_counts(exp: Experiment, rng: np.random.Generator,
                    deterministic: bool = False) -> tuple[PhotonMatrix, Vasculature]:
    vasc = exp.vasculature if exp.vasculature is not None else sample_vasculature(exp.cfg, rng)
    Nd = sense_all(exp.cfg, vasc, exp.eta, exp.power.P, rng, exp.channel, deterministic)
    return Nd, vasc


def estimate_all(exp: Experiment, Nd: PhotonMatrix) -> dict[str, ReconstructionReport]:
    out = {}
    for name in exp.estimators:
        if name == "centralized":
            est = centralized_estimate(Nd, exp.H, exp.power.P, exp.cfg)
            diag = {"n_active": est.active, "no_data": est.no_data}
        else:
            est = distributed_estimate(Nd, exp.H, exp.power.P, exp.eta, exp.cfg)
            diag = {"n_active_per_group": est.active, "no_data": est.no_data,
                    "T": est.extra["T"]}
        out[name] = score(est.eta, exp.eta, exp.cfg, exp.tau_t, name, diag)
    return out


def run_trial(exp: Experiment, rng: np.random.Generator) -> dict[str, ReconstructionReport]:
    """Sense once and reconstruct with every configured estimator."""
    Nd, _ = simulate_counts(exp, rng)
    return estimate_all(exp, Nd)


def _outcome(exp: Experiment, reports) -> TrialOutcome:
    return TrialOutcome(
        {k: r.mse for k, r in reports.items()},
        {k: peaks_match(r.peaks, exp.peak_lines, exp.cfg) for k, r in reports.items()},
        {k: r.degenerate for k, r in reports.items()},
    )


def _run_chunk(args) -> list[TrialOutcome]:
    exp, trials = args
    return [_outcome(exp, run_trial(exp, trial_rng(exp.cfg.seed, t))) for t in trials]


def run_trials(exp: Experiment, n_trials: int, jobs: int = 1) -> list[TrialOutcome]:
    """Trials 0..n_trials-1, in order, optionally over a process pool."""
    if n_trials < 1:
        raise ValueError("need at least one trial")
    ids = list(range(n_trials))
    if jobs <= 1:
        return _run_chunk((exp, ids))
    n_chunks = min(n_trials, 4 * jobs)
    chunks = [ids[k::n_chunks] for k in range(n_chunks)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_chunk, [(exp, c) for c in chunks]))
    out: list[TrialOutcome | None] = [None] * n_trials
    for c, res in zip(chunks, parts):
        for t, o in zip(c, res):
            out[t] = o
    return out


# sweeps ----------------------------------------------------------------------------

SPEC_KEYS = {"parameter", "values", "trials", "estimators", "tau_t", "out",
             "scenario", "spectrum", "channel", "base", "seed"}


@dataclass
class SweepSpec:
    parameter: str
    values: list
    trials: int = 200
    estimators: tuple = ESTIMATORS
    tau_t: tuple = DEFAULT_OUTAGE_THRESHOLDS
    out: str | None = None
    base: dict = field(default_factory=dict)   # scenario overrides applied before sweeping

    def __post_init__(self) -> None:
        if self.parameter not in sweepable_parameters() - {"shift_axis", "seed"}:
            raise ConfigError(f"cannot sweep {self.parameter!r}: not a scalar scenario field")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        self.trials = int(self.trials)
        if isinstance(self.estimators, str):
            self.estimators = ESTIMATORS if self.estimators == "both" else (self.estimators,)
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ConfigError(f"unknown estimators {sorted(bad)}")
        self.estimators = tuple(self.estimators)
        self.tau_t = tuple(float(t) for t in self.tau_t)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        extra = set(d) - SPEC_KEYS
        if extra:
            raise ConfigError(f"unknown sweep keys {sorted(extra)}")
        if "parameter" not in d or "values" not in d:
            raise ConfigError("sweep spec needs 'parameter' and 'values'")
        kw = {k: d[k] for k in ("parameter", "values", "trials", "estimators",
                                "tau_t", "out", "base") if k in d}
        return cls(**kw)


@dataclass
class SweepPoint:
    value: float
    estimator: str
    mse: np.ndarray
    outage: dict          # tau -> fraction
    peak_rate: float
    wall_time: float

    @property
    def trials(self) -> int:
        return self.mse.size

    def se(self, tau: float) -> float:
        p = self.outage[tau]
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass
class SweepResult:
    spec: SweepSpec
    base: SystemConfig
    points: list
    wall_time: float

    def rows(self) -> list[dict]:
        out = []
        for pt in self.points:
            for tau in self.spec.tau_t:
                out.append({
                    "param_value": pt.value,
                    "estimator": pt.estimator,
                    "tau_t": tau,
                    "outage": pt.outage[tau],
                    "se": pt.se(tau),
                    "mean_mse": float(np.mean(pt.mse)),
                    "median_mse": float(np.median(pt.mse)),
                    "trials": pt.trials,
                })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows():
            w.writerow([r[c] if isinstance(r[c], (str, int)) else repr(float(r[c]))
                        for c in CSV_COLUMNS])
        return buf.getvalue()

    def select(self, estimator: str) -> list[SweepPoint]:
        return [p for p in self.points if p.estimator == estimator]

    def manifest(self) -> dict:
        spec = asdict(self.spec)
        spec["estimators"] = list(self.spec.estimators)
        spec["tau_t"] = list(self.spec.tau_t)
        return {
            "spec": spec,
            "base_config": self.base.to_dict(),
            "code_version": code_version(),
            "wall_time_s": self.wall_time,
            "point_wall_time_s": {f"{p.value}/{p.estimator}": p.wall_time for p in self.points},
        }

    def write(self, out: str | Path) -> tuple[Path, Path]:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(self.to_csv())
        man = out.with_suffix(".manifest.json")
        man.write_text(json.dumps(self.manifest(), indent=2) + "\n")
        return out, man


def code_version() -> str:
    """Package version plus a digest of the installed sources."""
    h = hashlib.sha256()
    pkg = resources.files("coopraman")
    for name in sorted(p.name for p in pkg.iterdir() if p.name.endswith(".py")):
        h.update(name.encode())
        h.update(pkg.joinpath(name).read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


def run_sweep(spec: SweepSpec, base: SystemConfig, eta=None,
              channel: AttenuationModel | None = None, jobs: int = 1) -> SweepResult:
    t0 = time.perf_counter()
    if spec.base:
        base = base.with_overrides(**spec.base)
    # validate every point before spending time on trials
    cfgs = [base.with_overrides(**{spec.parameter: v}) for v in spec.values]
    points = []
    for v, cfg in zip(spec.values, cfgs):
        t1 = time.perf_counter()
        ch = channel if channel is not None and channel.n_bands == cfg.N_f else None
        exp = Experiment.build(cfg, eta, ch, spec.estimators, spec.tau_t)
        outcomes = run_trials(exp, spec.trials, jobs)
        dt = time.perf_counter() - t1
        for name in spec.estimators:
            mse = np.array([o.mse[name] for o in outcomes])
            points.append(SweepPoint(
                value=float(v),
                estimator=name,
                mse=mse,
                outage={tau: float(np.mean(mse > tau)) for tau in spec.tau_t},
                peak_rate=float(np.mean([o.peaks_ok[name] for o in outcomes])),
                wall_time=dt,
            ))
    return SweepResult(spec, base, points, time.perf_counter() - t0)


def load_sweep_spec(path: str | Path) -> tuple[SweepSpec, dict]:
    """Parse a sweep JSON; also returns its raw dict (for scenario/spectrum/channel paths)."""
    with open(path) as fh:
        d = json.load(fh)
    if not isinstance(d, dict):
        raise ConfigError("sweep spec must be a JSON object")
    return SweepSpec.from_dict(d), d
