"""Capacity of the binary-input photon-counting sub-band channel.

Rates a (signal), b (molecular noise) and upsilon (dark current) are in
photons per second; capacities are in nats per second.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import xlogy

from .allocation import allocate_power, expected_channel
from .channel import AttenuationModel, default_attenuation, fading_moments
from .photonics import draw_particle_factors, photon_scale
from .scenario import SystemConfig
from .spectrum import reference_spectrum, resolve_p_prior
from .vasculature import Vasculature, sample_vasculature, sum_iid


@dataclass(frozen=True)
class ChannelPoint:
    a: float
    b: float
    upsilon: float
    p: float
    delta_t: float = 1e-3

    def __post_init__(self) -> None:
        if self.a < 0 or self.upsilon < 0:
            raise ValueError("a and upsilon must be non-negative")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if not self.delta_t > 0:
            raise ValueError("delta_t must be positive")


def transition_probs(pt: ChannelPoint) -> tuple[float, float]:
    """Pr(1|0), Pr(1|1): probability of exactly one photon in the slot."""
    r0 = (pt.b + pt.upsilon) * pt.delta_t
    r1 = (pt.a + pt.b + pt.upsilon) * pt.delta_t
    return float(r0 * np.exp(-r0)), float(r1 * np.exp(-r1))


def xi1(x1, x2, x3):
    s = np.asarray(x1) + x2 + x3
    return -xlogy(s, s)


def xi2(x1, x2, x3, x4):
    s = np.asarray(x2) + x3 + x4
    return x1 * xlogy(s, s)


def xi3(x1, x2):
    return (1.0 - np.asarray(x1)) * xlogy(x2, x2)


def subband_capacity_raw(a, b, upsilon, p):
    """Small-slot capacity, vectorized, without clamping."""
    a, b, upsilon, p = (np.asarray(v, dtype=float) for v in (a, b, upsilon, p))
    return xi1(p * a, b, upsilon) + xi2(p, a, b, upsilon) + xi3(p, b + upsilon)


def subband_capacity(pt: ChannelPoint) -> float:
    """Capacity in nats per unit time; tiny negative round-off is clamped to 0."""
    return float(max(subband_capacity_raw(pt.a, pt.b, pt.upsilon, pt.p), 0.0))


def binary_entropy(q):
    q = np.asarray(q, dtype=float)
    return -xlogy(q, q) - xlogy(1.0 - q, 1.0 - q)


def exact_mutual_information(pt: ChannelPoint) -> float:
    """I(X;Y) of the binary channel per unit time (nats / delta_t)."""
    q0, q1 = transition_probs(pt)
    mix = pt.p * q1 + (1.0 - pt.p) * q0
    info = binary_entropy(mix) - pt.p * binary_entropy(q1) - (1.0 - pt.p) * binary_entropy(q0)
    return float(info) / pt.delta_t


# system capacity -------------------------------------------------------------------

@dataclass(frozen=True)
class CapacityEstimate:
    per_band: np.ndarray     # nats/s summed over sensors, per sub-band
    per_band_se: np.ndarray
    total: float
    total_se: float
    n_samples: int
    n_clamped: int           # noise draws with b < -upsilon, clipped


def sample_rates(cfg: SystemConfig, vasc: Vasculature, eta, power, rng: np.random.Generator,
                 channel: AttenuationModel) -> tuple[np.ndarray, np.ndarray]:
    """One draw of (a, b) per beam, in photons per second.

    a = sum_k h_k P eta and b = sum_k h_k P eta kappa_k over the particles of
    the beam, with h_k the faded two-leg gain.
    """
    nb = vasc.n_beams
    band = np.tile(np.arange(cfg.N_f), nb // cfg.N_f)
    n = rng.poisson(vasc.particle_means(cfg))
    f1, f2 = fading_moments(cfg.sigma_c, cfg.fading)
    fading_only = replace(cfg, sigma_m=0.0)

    def draw_f(k, g):
        return draw_particle_factors(fading_only, k, g)

    sum_f = sum_iid(n, draw_f, f1, max(f2 - f1 * f1, 0.0), rng)
    # sum_k F_k kappa_k has mean 0 and variance sigma_m^2 n E[F^2]; drawn as a normal
    noise = cfg.sigma_m * np.sqrt(n * f2) * rng.standard_normal(n.shape)

    gain = np.exp(-(channel.mu_excitation + channel.mu_bands[band[vasc.beam]]) * vasc.depth)
    A = np.bincount(vasc.beam, weights=gain * sum_f, minlength=nb)
    B = np.bincount(vasc.beam, weights=gain * noise, minlength=nb)
    scale = (photon_scale(cfg, power) / cfg.delta_t * np.asarray(eta))[band]
    return A * scale, B * scale


def system_capacity(cfg: SystemConfig, rng: np.random.Generator, n_samples: int = 20,
                    eta=None, power=None, channel: AttenuationModel | None = None,
                    vasc: Vasculature | None = None) -> CapacityEstimate:
    """Monte Carlo estimate of the ring's total capacity.

    Each sample redraws particles, fading and molecular noise; the vessels are
    kept fixed when ``vasc`` is given (or cfg.fixed_vasculature is set) and
    redrawn per sample otherwise.
    """
    channel = default_attenuation(cfg) if channel is None else channel
    eta = reference_spectrum(cfg) if eta is None else np.asarray(eta, dtype=float)
    if power is None:
        power = allocate_power(expected_channel(cfg, channel), cfg.power_per_sensor).P
    p = resolve_p_prior(cfg, eta)
    if vasc is None and cfg.fixed_vasculature:
        vasc = sample_vasculature(cfg, rng)
    draws = np.empty((n_samples, cfg.N_f))
    clamped = 0
    for s in range(n_samples):
        v = vasc if vasc is not None else sample_vasculature(cfg, rng)
        a, b = sample_rates(cfg, v, eta, power, rng, channel)
        low = b < -cfg.upsilon
        clamped += int(low.sum())
        b = np.where(low, -cfg.upsilon, b)
        c = np.maximum(subband_capacity_raw(a, b, cfg.upsilon, p), 0.0)
        draws[s] = c.reshape(cfg.N_s, cfg.N_f).sum(axis=0)
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / np.sqrt(n_samples) if n_samples > 1 else np.zeros(cfg.N_f)
    tot = draws.sum(axis=1)
    tot_se = float(tot.std(ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return CapacityEstimate(mean, se, float(tot.mean()), tot_se, n_samples, clamped)
