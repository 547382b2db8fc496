"""Expected detected power and the capacity-equalizing power split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import AttenuationModel, default_attenuation, fading_moments
from .photonics import molecular_moments
from .scenario import SystemConfig
from .vasculature import equivalent_vessel, expected_particles


class UnreachableBandError(ValueError):
    """A sub-band with zero expected channel gain cannot be equalized."""


@dataclass(frozen=True)
class ExpectedChannel:
    """H[j]: expected sum of two-leg gains over the particles of one beam."""

    H: np.ndarray

    def __post_init__(self) -> None:
        H = np.asarray(self.H, dtype=float)
        if np.any(H < 0) or not np.all(np.isfinite(H)):
            raise ValueError("expected channel gains must be finite and non-negative")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-sensor transmit power of each sub-band (W)."""

    P: np.ndarray

    def __post_init__(self) -> None:
        P = np.asarray(self.P, dtype=float)
        if np.any(P < 0):
            raise ValueError("allocated powers must be non-negative")
        P.setflags(write=False)
        object.__setattr__(self, "P", P)

    @property
    def total(self) -> float:
        return float(self.P.sum())


def subregion_particles(cfg: SystemConfig, model: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mid-depths and expected particle counts of the beam sub-regions."""
    mids, heights = cfg.subregions()
    n = np.array([expected_particles(cfg, equivalent_vessel(cfg, d, h, model))
                  for d, h in zip(mids, heights)])
    return mids, n


def _band_gains(cfg: SystemConfig, channel: AttenuationModel, mids: np.ndarray) -> np.ndarray:
    # (N_f, R_s) deterministic two-leg gain, both legs at the sub-region centre
    mu = channel.mu_excitation + channel.mu_bands[:, None]
    return np.exp(-mu * mids[None, :])


def expected_channel(cfg: SystemConfig, channel: AttenuationModel | None = None,
                     model: str | None = None) -> ExpectedChannel:
    channel = default_attenuation(cfg) if channel is None else channel
    if channel.n_bands != cfg.N_f:
        raise ValueError(f"attenuation table has {channel.n_bands} bands, scenario needs {cfg.N_f}")
    mids, n = subregion_particles(cfg, model)
    fade, _ = fading_moments(cfg.sigma_c, cfg.fading)
    return ExpectedChannel(fade * _band_gains(cfg, channel, mids) @ n)


def expected_detected_power(cfg: SystemConfig, channel: AttenuationModel | None, j: int,
                            P_t_j: float, eta: float = 1.0, model: str | None = None,
                            molecular: bool = False) -> float:
    """Mean received power (W) of one sub-band-j beam.

    Sums, over the sub-regions, expected particle count times the expected
    per-particle power P G_t G_r eta h (pi/2) sigma_c^2.  With ``molecular``
    the mean of the clipped molecular noise factor is included as well.
    """
    H = expected_channel(cfg, channel, model).H[j]
    m = molecular_moments(cfg.sigma_m)[0] if molecular else 1.0
    return float(P_t_j * cfg.G_t * cfg.G_r * cfg.collection_efficiency * eta * m * H)


def allocate_power(H, P_s: float) -> PowerAllocation:
    """P[j] proportional to 1/H[j], summing to P_s, so H[j] P[j] is flat."""
    H = np.asarray(H.H if isinstance(H, ExpectedChannel) else H, dtype=float)
    if np.any(H <= 0):
        bad = np.flatnonzero(H <= 0)
        raise UnreachableBandError(f"sub-band unreachable: zero expected gain at index {bad[0]}")
    if not P_s >= 0:
        raise ValueError("power budget must be non-negative")
    inv = 1.0 / H
    return PowerAllocation(P_s * inv / inv.sum())
