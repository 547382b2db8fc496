"""Optical link gains: exponential attenuation per leg and Rayleigh fading."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scenario import ConfigError, SystemConfig

EXCITATION = "excitation"

# flat attenuation giving -30 dB per leg over the full beam height
DEFAULT_LEG_LOSS_DB = 30.0


@dataclass(frozen=True)
class AttenuationModel:
    """Lumped exponential attenuation, one coefficient per frequency (1/m).

    ``mu_bands[j]`` belongs to sub-band j; ``mu_excitation`` to the
    excitation line.
    """

    mu_excitation: float
    mu_bands: np.ndarray
    name: str = "exp_mu"

    def __post_init__(self) -> None:
        bands = np.asarray(self.mu_bands, dtype=float)
        if self.mu_excitation < 0 or np.any(bands < 0) or not np.all(np.isfinite(bands)):
            raise ConfigError("attenuation coefficients must be finite and non-negative")
        bands.setflags(write=False)
        object.__setattr__(self, "mu_bands", bands)

    @property
    def n_bands(self) -> int:
        return self.mu_bands.size

    def mu(self, f) -> float:
        """Coefficient for sub-band index ``f`` or the string "excitation"."""
        if isinstance(f, str):
            if f != EXCITATION:
                raise KeyError(f"unknown frequency {f!r}")
            return self.mu_excitation
        if not 0 <= int(f) < self.n_bands:
            raise KeyError(f"sub-band {f} outside the attenuation table (0..{self.n_bands - 1})")
        return float(self.mu_bands[int(f)])


@dataclass(frozen=True)
class LinkGain:
    g: float
    d_ep: float
    d_pd: float


def flat_attenuation(cfg: SystemConfig, loss_db: float = DEFAULT_LEG_LOSS_DB) -> AttenuationModel:
    mu = loss_db * math.log(10.0) / 10.0 / cfg.h_c
    return AttenuationModel(mu, np.full(cfg.N_f, mu))


def default_attenuation(cfg: SystemConfig) -> AttenuationModel:
    return flat_attenuation(cfg)


def attenuation_from_records(cfg: SystemConfig, records) -> AttenuationModel:
    """Build the table from [[bin centre cm^-1 or "excitation", mu], ...].

    Every sub-band centre must appear exactly once (matched to 1e-6 cm^-1).
    """
    centers = cfg.shift_centers
    mu_bands = np.full(cfg.N_f, np.nan)
    mu_exc = None
    for rec in records:
        if isinstance(rec, dict):
            key, mu = rec.get("bin"), rec.get("mu")
        else:
            if len(rec) != 2:
                raise ConfigError(f"calibration record must be a pair, got {rec!r}")
            key, mu = rec
        if not isinstance(mu, (int, float)) or isinstance(mu, bool):
            raise ConfigError(f"mu must be a number, got {mu!r}")
        if key == EXCITATION:
            mu_exc = float(mu)
            continue
        if not isinstance(key, (int, float)) or isinstance(key, bool):
            raise ConfigError(f"bin key must be a shift in cm^-1 or 'excitation', got {key!r}")
        j = int(np.argmin(np.abs(centers - key)))
        if abs(centers[j] - key) > 1e-6:
            raise ConfigError(f"{key} cm^-1 is not a sub-band centre")
        if not np.isnan(mu_bands[j]):
            raise ConfigError(f"sub-band {key} cm^-1 listed twice")
        mu_bands[j] = float(mu)
    if mu_exc is None:
        raise ConfigError("calibration lacks the 'excitation' entry")
    missing = np.flatnonzero(np.isnan(mu_bands))
    if missing.size:
        raise ConfigError(f"calibration lacks {missing.size} sub-bands, first at "
                          f"{centers[missing[0]]} cm^-1")
    return AttenuationModel(mu_exc, mu_bands)


def load_attenuation(cfg: SystemConfig, path: str | Path) -> AttenuationModel:
    with open(path) as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ConfigError("channel calibration must be a JSON list")
    return attenuation_from_records(cfg, records)


def attenuation_records(cfg: SystemConfig, model: AttenuationModel) -> list:
    out = [[EXCITATION, model.mu_excitation]]
    out += [[float(c), float(m)] for c, m in zip(cfg.shift_centers, model.mu_bands)]
    return out


def path_gain(model: AttenuationModel, f, d):
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    return np.exp(-model.mu(f) * d)


def two_leg_gain(model: AttenuationModel, j, d_ep, d_pd=None):
    """Deterministic emitter->particle->detector gain (d_pd defaults to d_ep)."""
    d_pd = d_ep if d_pd is None else d_pd
    return path_gain(model, EXCITATION, d_ep) * path_gain(model, j, d_pd)


def rayleigh_product(sigma_c: float, size, rng: np.random.Generator) -> np.ndarray:
    """R1 * R2 for independent Rayleigh(sigma_c) amplitudes, one pair per leg."""
    return rng.rayleigh(sigma_c, size) * rng.rayleigh(sigma_c, size)


def fading_moments(sigma_c: float, fading: bool = True) -> tuple[float, float]:
    """E[R1 R2], E[(R1 R2)^2]."""
    if not fading:
        return 1.0, 1.0
    return math.pi * sigma_c ** 2 / 2.0, 4.0 * sigma_c ** 4


def faded_link_gain(model: AttenuationModel, f_exc, f_j, d_ep: float, d_pd: float,
                    sigma_c: float, rng: np.random.Generator | None = None,
                    fading: bool = True) -> LinkGain:
    g = float(path_gain(model, f_exc, d_ep) * path_gain(model, f_j, d_pd))
    if fading:
        if rng is None:
            raise ValueError("fading needs an rng")
        g *= float(rayleigh_product(sigma_c, None, rng))
    return LinkGain(g, float(d_ep), float(d_pd))
