"""Scenario configuration, ring geometry and the minimum-sensor bound.

All quantities are stored in SI / linear units.  The JSON scenario format
accepts transmit power in dBm and antenna gains in dBi; they are converted
once, here, and never again.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np
from scipy import constants

VESSEL_MODELS = ("paper", "area_consistent")

# Lumped optical collection x detector quantum efficiency.  Calibrated so the
# default scene yields ~10 signal photons per detector per interval at eta=1
# (see scripts/calibrate_efficiency.py).
DEFAULT_COLLECTION_EFFICIENCY = 8.75e-20


class ConfigError(ValueError):
    """Invalid scenario configuration."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def default_shift_edges() -> tuple[float, ...]:
    """148 bins of 10 cm^-1 covering 400-1880 cm^-1."""
    return tuple(float(x) for x in np.arange(400.0, 1880.0 + 1e-9, 10.0))


@dataclass(frozen=True)
class SystemConfig:
    """Every scenario parameter.  Defaults describe the reference finger scene."""

    lambda_b: float = 1e6            # vessel density, 1/m^2
    lambda_0: float = 2.6e10         # NBP arrival density, 1/(s m^2)
    u: float = 0.45                  # blood velocity, m/s
    r_f: float = 5e-3                # finger radius, m
    r_b: float = 2.5e-3              # bone radius, m
    h_c: float = 2.5e-3              # beam height, m
    alpha: float = math.pi / 36      # beam full angle, rad
    S_l: float = 3e-9                # min vessel cross-section, m^2
    S_u: float = 3e-7                # max vessel cross-section, m^2
    N_s: int = 30
    N_f: int = 148
    P_t: float = 0.01                # total ring transmit power, W
    G_t: float = 1000.0              # emitter gain, linear
    G_r: float = 1000.0              # detector gain, linear
    sigma_m: float = 1.0
    sigma_c: float = 1.0
    upsilon: float = 1.0             # dark current, photons/s
    delta_t: float = 1.0             # detection interval, s
    lambda_exc: float = 785e-9       # excitation wavelength, m
    shift_axis: tuple[float, ...] = field(default_factory=default_shift_edges)
    p_prior: float | None = None     # None -> derived from the reference spectrum
    K_groups: int = 5
    seed: int = 0
    vessel_model: str = "paper"
    fixed_vasculature: bool = True
    fading: bool = True
    collection_efficiency: float = DEFAULT_COLLECTION_EFFICIENCY

    def __post_init__(self) -> None:
        object.__setattr__(self, "shift_axis", tuple(float(x) for x in self.shift_axis))
        positive = ("lambda_0", "u", "r_f", "r_b", "h_c", "alpha", "S_l", "S_u",
                    "P_t", "G_t", "G_r", "delta_t", "lambda_exc", "collection_efficiency")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        for name in ("lambda_b", "sigma_m", "sigma_c", "upsilon"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if not self.alpha < math.pi:
            raise ConfigError("alpha must be below pi")
        if not self.r_b < self.r_f:
            raise ConfigError("r_b must be smaller than r_f")
        if not self.h_c <= self.r_f - self.r_b + 1e-15:
            raise ConfigError("beam height h_c cannot exceed the skin-to-bone distance r_f - r_b")
        if not self.S_l < self.S_u:
            raise ConfigError("S_l must be smaller than S_u")
        for name in ("N_s", "N_f", "K_groups"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.N_s < self.K_groups:
            raise ConfigError(f"N_s={self.N_s} must be >= K_groups={self.K_groups}")
        edges = np.asarray(self.shift_axis)
        if edges.size != self.N_f + 1:
            raise ConfigError(f"shift_axis needs N_f + 1 = {self.N_f + 1} edges, got {edges.size}")
        if np.any(np.diff(edges) <= 0):
            raise ConfigError("shift_axis must be strictly increasing")
        if edges[-1] * 100.0 >= 1.0 / self.lambda_exc:
            raise ConfigError("Raman shifts exceed the excitation wavenumber")
        if self.p_prior is not None and not 0.0 < self.p_prior < 1.0:
            raise ConfigError("p_prior must lie in (0, 1)")
        if self.vessel_model not in VESSEL_MODELS:
            raise ConfigError(f"vessel_model must be one of {VESSEL_MODELS}")

    # derived geometry -----------------------------------------------------

    @property
    def tan_half(self) -> float:
        return math.tan(self.alpha / 2.0)

    @property
    def shift_centers(self) -> np.ndarray:
        e = np.asarray(self.shift_axis)
        return 0.5 * (e[1:] + e[:-1])

    @property
    def bin_width(self) -> np.ndarray:
        return np.diff(np.asarray(self.shift_axis))

    @property
    def delta_h(self) -> float:
        """Sub-region height: the largest vessel cross-section diameter."""
        return 2.0 * math.sqrt(self.S_u / math.pi)

    @property
    def n_subregions(self) -> int:
        return math.ceil(self.h_c / self.delta_h - 1e-12)

    def subregions(self) -> tuple[np.ndarray, np.ndarray]:
        """Mid-depths and heights of the beam slabs; the last slab is cut at h_c."""
        lo = np.arange(self.n_subregions) * self.delta_h
        hi = np.minimum(lo + self.delta_h, self.h_c)
        return 0.5 * (lo + hi), hi - lo

    def bin_wavelengths(self) -> np.ndarray:
        """Stokes wavelength (m) of each sub-band centre."""
        return 1.0 / (1.0 / self.lambda_exc - 100.0 * self.shift_centers)

    @property
    def power_per_sensor(self) -> float:
        return self.P_t / self.N_s

    # serialization --------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["shift_axis"] = list(self.shift_axis)
        d["P_t_dBm"] = watts_to_dbm(d.pop("P_t"))
        d["G_t_dBi"] = linear_to_db(d.pop("G_t"))
        d["G_r_dBi"] = linear_to_db(d.pop("G_r"))
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SystemConfig":
        validate_scenario(data)
        d = dict(data)
        if "P_t_dBm" in d:
            d["P_t"] = dbm_to_watts(d.pop("P_t_dBm"))
        for key in ("G_t", "G_r"):
            if f"{key}_dBi" in d:
                d[key] = db_to_linear(d.pop(f"{key}_dBi"))
        if "shift_axis" in d:
            d["shift_axis"] = tuple(d["shift_axis"])
        return cls(**d)

    def with_overrides(self, **overrides: Any) -> "SystemConfig":
        """Copy with fields replaced; dBm/dBi aliases are accepted."""
        d = self.to_dict()
        for key in overrides:
            # drop the alias of a field being overridden in the other unit
            for a, b in (("P_t", "P_t_dBm"), ("G_t", "G_t_dBi"), ("G_r", "G_r_dBi")):
                if key == a:
                    d.pop(b, None)
                elif key == b:
                    d.pop(a, None)
        d.update(overrides)
        linear = {k: d.pop(k) for k in ("P_t", "G_t", "G_r") if k in d}
        cfg = SystemConfig.from_dict(d)
        if linear:
            cfg = SystemConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(cfg)}, **linear})
        return cfg


def sweepable_parameters() -> set[str]:
    names = {f.name for f in fields(SystemConfig)}
    return names | {"P_t_dBm", "G_t_dBi", "G_r_dBi"}


@lru_cache(maxsize=1)
def scenario_schema() -> dict[str, Any]:
    text = resources.files("coopraman").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def validate_scenario(data: dict[str, Any]) -> None:
    try:
        jsonschema.validate(data, scenario_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"scenario field {where}: {exc.message}") from None


def load_scenario(path: str | Path) -> SystemConfig:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("scenario file must contain a JSON object")
    return SystemConfig.from_dict(data)


def save_scenario(cfg: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


# ring geometry --------------------------------------------------------------

@dataclass(frozen=True)
class SensorLayout:
    """angles[i, j]: ring angle of sensor i's sub-band-j emitter/detector pair."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        self.angles.setflags(write=False)


def place_sensors(cfg: SystemConfig) -> SensorLayout:
    i = np.arange(cfg.N_s)[:, None]
    n = np.arange(cfg.N_f)[None, :]
    angles = 2 * np.pi * i / cfg.N_s + 2 * np.pi * n / (cfg.N_s * cfg.N_f)
    return SensorLayout(np.mod(angles, 2 * np.pi))


def beam_empty_exponent(cfg: SystemConfig, N_s: int | None = None) -> float:
    """Mean vessel count over the N_s beams of one sub-band."""
    n = cfg.N_s if N_s is None else N_s
    return 0.5 * cfg.lambda_b * n * cfg.h_c ** 2 * cfg.tan_half


def prob_no_vessel(cfg: SystemConfig, N_s: int | None = None) -> float:
    """Probability that no beam of a sub-band crosses a vessel."""
    return math.exp(-beam_empty_exponent(cfg, N_s))


def min_sensor_count(cfg: SystemConfig, tau_b: float) -> int:
    """Smallest sensor count keeping the empty-sub-band probability <= tau_b."""
    if not 0.0 < tau_b < 1.0:
        raise ValueError(f"tau_b must lie in (0, 1), got {tau_b}")
    bound = -2.0 * math.log(tau_b) / (cfg.lambda_b * cfg.h_c ** 2 * cfg.tan_half)
    n = math.ceil(bound)
    # guard float round-off at exact integers
    while n > 0 and prob_no_vessel(cfg, n - 1) <= tau_b:
        n -= 1
    while prob_no_vessel(cfg, n) > tau_b:
        n += 1
    return n


PLANCK = constants.h
LIGHT_SPEED = constants.c
