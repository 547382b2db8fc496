"""Received optical power and photon counting at the nano-detectors."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .channel import EXCITATION, AttenuationModel, default_attenuation, fading_moments
from .scenario import SystemConfig
from .spectrum import photon_energy
from .vasculature import BeamScene, Vasculature, sum_iid


@dataclass(frozen=True)
class DetectorReading:
    y_power: float     # W, signal power plus dark-current equivalent
    photon_count: int
    sensor: int
    band: int


@dataclass(frozen=True)
class PhotonMatrix:
    """counts[i, j]: photons detected by sensor i in sub-band j."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.counts)
        if c.ndim != 2:
            raise ValueError("photon matrix must be 2-D (sensors x sub-bands)")
        if np.any(c < 0):
            raise ValueError("photon counts must be non-negative")
        object.__setattr__(self, "counts", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def check(self, cfg: SystemConfig) -> None:
        if self.shape != (cfg.N_s, cfg.N_f):
            raise ValueError(f"photon matrix is {self.shape}, scenario needs ({cfg.N_s}, {cfg.N_f})")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            integral = np.issubdtype(self.counts.dtype, np.integer)
            for row in self.counts:
                w.writerow([int(v) if integral else repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "PhotonMatrix":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError(f"{path}: ragged or empty photon matrix")
        vals = np.array([[float(v) for v in r] for r in rows])
        if np.all(vals == np.round(vals)):
            vals = vals.astype(np.int64)
        return cls(vals)


# noise kernels ------------------------------------------------------------------

def molecular_noise(eta_j, sigma_m: float, rng: np.random.Generator, size=None):
    """eta * (1 + kappa)^+ with kappa ~ N(0, sigma_m^2)."""
    eta_j = np.asarray(eta_j, dtype=float)
    if sigma_m == 0:
        return np.broadcast_to(eta_j, size).copy() if size is not None else eta_j.copy()
    shape = eta_j.shape if size is None else size
    return eta_j * np.maximum(1.0 + sigma_m * rng.standard_normal(shape), 0.0)


def molecular_moments(sigma_m: float) -> tuple[float, float]:
    """E[(1+kappa)^+] and E[((1+kappa)^+)^2] in closed form."""
    if sigma_m == 0:
        return 1.0, 1.0
    z = 1.0 / sigma_m
    Phi, phi = norm.cdf(z), norm.pdf(z)
    return float(Phi + sigma_m * phi), float((1.0 + sigma_m ** 2) * Phi + sigma_m * phi)


def particle_factor_moments(cfg: SystemConfig) -> tuple[float, float]:
    """Mean and variance of the per-particle factor R1 R2 (1+kappa)^+."""
    f1, f2 = fading_moments(cfg.sigma_c, cfg.fading)
    m1, m2 = molecular_moments(cfg.sigma_m)
    mean = f1 * m1
    return mean, max(f2 * m2 - mean * mean, 0.0)


def draw_particle_factors(cfg: SystemConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    x = np.ones(n)
    if cfg.fading:
        x *= rng.rayleigh(cfg.sigma_c, n) * rng.rayleigh(cfg.sigma_c, n)
    if cfg.sigma_m > 0:
        x *= np.maximum(1.0 + cfg.sigma_m * rng.standard_normal(n), 0.0)
    return x


# power composition --------------------------------------------------------------

def received_power(link_gains, eta_eff, P: float, G_t: float, G_r: float,
                   efficiency: float = 1.0) -> float:
    """Sum over particles of P G_t g_k eta_k G_r (times the collection efficiency)."""
    g = np.asarray(link_gains, dtype=float)
    e = np.broadcast_to(np.asarray(eta_eff, dtype=float), g.shape)
    if P < 0:
        raise ValueError("transmit power must be non-negative")
    return float(P * G_t * G_r * efficiency * np.sum(g * e))


def scene_received_power(cfg: SystemConfig, scene: BeamScene, eta_j: float, P: float,
                         j: int, rng: np.random.Generator,
                         channel: AttenuationModel | None = None) -> float:
    """Received power of one explicit beam scene, drawing fading and noise per particle."""
    channel = default_attenuation(cfg) if channel is None else channel
    if not scene.particles:
        return 0.0
    d = np.array([p[0] for p in scene.particles])
    g = np.exp(-(channel.mu(EXCITATION) + channel.mu(j)) * d)
    if cfg.fading:
        g = g * rng.rayleigh(cfg.sigma_c, d.size) * rng.rayleigh(cfg.sigma_c, d.size)
    eta_eff = molecular_noise(eta_j, cfg.sigma_m, rng, size=d.size)
    return received_power(g, eta_eff, P, cfg.G_t, cfg.G_r, cfg.collection_efficiency)


def beam_received_power(cfg: SystemConfig, vasc: Vasculature, band, P, eta,
                        rng: np.random.Generator | None,
                        channel: AttenuationModel | None = None,
                        deterministic: bool = False) -> np.ndarray:
    """Received power (W) of every beam in ``vasc``.

    ``band``, ``P`` and ``eta`` give, per beam, the sub-band index, transmit
    power and true scattering coefficient.  Particle counts are Poisson around
    lambda_0 * load / u; in deterministic mode every random quantity is
    replaced by its mean.
    """
    channel = default_attenuation(cfg) if channel is None else channel
    band = np.asarray(band)
    nb = vasc.n_beams
    if band.shape != (nb,):
        raise ValueError("one sub-band index per beam expected")
    lam = vasc.particle_means(cfg)
    mean, var = particle_factor_moments(cfg)
    if deterministic:
        weight = lam * mean
    else:
        n = rng.poisson(lam)
        weight = sum_iid(n, lambda k, g: draw_particle_factors(cfg, k, g), mean, var, rng)
    rows_band = band[vasc.beam]
    gain = np.exp(-(channel.mu_excitation + channel.mu_bands[rows_band]) * vasc.depth)
    per_beam = np.bincount(vasc.beam, weights=gain * weight, minlength=nb)
    scale = np.asarray(P, dtype=float) * np.asarray(eta, dtype=float)
    return cfg.G_t * cfg.G_r * cfg.collection_efficiency * scale * per_beam


# photon counting ----------------------------------------------------------------

def photon_rate(received, wavelength):
    """Photons per second carried by ``received`` watts at ``wavelength``."""
    return np.asarray(received, dtype=float) / photon_energy(wavelength)


def photon_count(received, upsilon: float, delta_t: float, wavelength,
                 rng: np.random.Generator):
    """Poisson count with mean (received / E_p + upsilon) * delta_t."""
    gamma = (photon_rate(received, wavelength) + upsilon) * delta_t
    if np.any(gamma < 0):
        raise ValueError("photon count mean must be non-negative")
    return rng.poisson(gamma)


def photon_scale(cfg: SystemConfig, power) -> np.ndarray:
    """Expected photons per unit (eta x channel gain) in each sub-band.

    This is the bridge between H[j] P[j] and detected counts:
    counts ~ eta_j * H_j * photon_scale_j + upsilon * delta_t.
    """
    P = np.asarray(power, dtype=float)
    E_p = photon_energy(cfg.bin_wavelengths())
    return P * cfg.G_t * cfg.G_r * cfg.collection_efficiency * cfg.delta_t / E_p


def sense_all(cfg: SystemConfig, vasc: Vasculature, eta, power, rng: np.random.Generator | None,
              channel: AttenuationModel | None = None,
              deterministic: bool = False) -> PhotonMatrix:
    """Photon counts of every (sensor, sub-band) detector.

    ``power`` is the per-sensor transmit power of each sub-band.  In
    deterministic mode the matrix holds expected (non-integer) counts.
    """
    eta = np.asarray(eta, dtype=float)
    power = np.asarray(power, dtype=float)
    if eta.shape != (cfg.N_f,) or power.shape != (cfg.N_f,):
        raise ValueError(f"eta and power need length N_f={cfg.N_f}")
    if vasc.n_beams != cfg.N_s * cfg.N_f:
        raise ValueError(f"vasculature has {vasc.n_beams} beams, scenario needs {cfg.N_s * cfg.N_f}")
    band = np.tile(np.arange(cfg.N_f), cfg.N_s)
    rx = beam_received_power(cfg, vasc, band, power[band], eta[band], rng, channel, deterministic)
    wl = cfg.bin_wavelengths()[band]
    if deterministic:
        counts = (photon_rate(rx, wl) + cfg.upsilon) * cfg.delta_t
    else:
        counts = photon_count(rx, cfg.upsilon, cfg.delta_t, wl, rng)
    return PhotonMatrix(counts.reshape(cfg.N_s, cfg.N_f))
