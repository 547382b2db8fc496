"""Blood vessels and particle arrivals inside the beam cones.

A beam is a cone of height h_c and full angle alpha with its apex at the skin.
Two vessel models are supported:

``area_consistent``
    Vessels are a Poisson process of density lambda_b over the beam's axial
    triangle (area h_c^2 tan(alpha/2)), so a beam holds on average
    0.5 lambda_b h_c^2 tan(alpha/2) vessels and a vessel's depth has density
    proportional to d.  Each vessel is drawn individually.

``paper``
    The beam is cut into slabs of height delta_h and every slab holds a
    Poisson number of equivalent vessels with mean
    lambda_b d delta_h tan(alpha/2) / (2 r_f^2).  Vessels in a slab sit at the
    slab's mid-depth.

Both models reduce to the same flat ``Vasculature`` record: one row per
(vessel or slab) with its beam index, depth and summed cross-section x chord
"load".  Particle arrivals are Poisson with mean lambda_0 * load / u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .scenario import SystemConfig

# counts up to this are summed draw-by-draw; larger sums use a gamma with the
# same first two moments
EXACT_SUM_LIMIT = 64


@dataclass(frozen=True)
class VesselSegment:
    depth: float          # m, along the beam axis
    chord_length: float   # m, inside the cone
    cross_section: float  # m^2


@dataclass
class BeamScene:
    """One realized beam: vessels plus particles (depth, host vessel)."""

    vessels: list[VesselSegment] = field(default_factory=list)
    particles: list[tuple[float, int]] = field(default_factory=list)

    @property
    def n_particles(self) -> int:
        return len(self.particles)

    def to_dict(self) -> dict:
        return {
            "vessels": [vars(v) for v in self.vessels],
            "particles": [{"depth": d, "vessel": k} for d, k in self.particles],
        }


# moments of single vessel quantities -------------------------------------------

def cross_section_moments(cfg: SystemConfig) -> tuple[float, float]:
    """E[s], E[s^2] for s ~ U[S_l, S_u]."""
    lo, hi = cfg.S_l, cfg.S_u
    return 0.5 * (lo + hi), (lo * lo + lo * hi + hi * hi) / 3.0


def chord_moments(d, tan_half: float):
    """E[l], E[l^2] for the chord at depth d with a uniform offset.

    With R = d tan(alpha/2) and x ~ U[0, R), l = 2 sqrt(R^2 - x^2) gives
    E[l] = pi R / 2 and E[l^2] = 8 R^2 / 3.
    """
    R = np.asarray(d, dtype=float) * tan_half
    return np.pi * R / 2.0, 8.0 * R ** 2 / 3.0


def sum_iid(counts, draw: Callable, mean: float, var: float, rng: np.random.Generator,
            exact_limit: int = EXACT_SUM_LIMIT) -> np.ndarray:
    """Sum ``counts[k]`` iid draws for every k.

    ``draw(n, rng)`` must return n independent samples with the given mean and
    variance.  Counts above ``exact_limit`` are replaced by a gamma variate with
    the exact mean n*mean and variance n*var.
    """
    counts = np.asarray(counts, dtype=np.int64)
    out = np.zeros(counts.shape, dtype=float)
    flat_c = counts.ravel()
    flat = out.ravel()

    small = (flat_c > 0) & (flat_c <= exact_limit)
    if small.any():
        idx = np.flatnonzero(small)
        n = flat_c[idx]
        samples = draw(int(n.sum()), rng)
        owner = np.repeat(np.arange(idx.size), n)
        flat[idx] = np.bincount(owner, weights=samples, minlength=idx.size)

    big = flat_c > exact_limit
    if big.any():
        n = flat_c[big].astype(float)
        if var <= 0.0:
            flat[big] = n * mean
        else:
            # shape n m^2/v, scale v/m
            flat[big] = rng.gamma(n * mean * mean / var, var / mean)
    return flat.reshape(counts.shape)


# single-beam sampling -----------------------------------------------------------

def mean_vessels_per_beam(cfg: SystemConfig) -> float:
    return 0.5 * cfg.lambda_b * cfg.h_c ** 2 * cfg.tan_half


def sample_depths(cfg: SystemConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Depths of n uniform points in the beam's axial triangle (density ~ d)."""
    # 1 - U keeps the depth in (0, h_c]
    return cfg.h_c * np.sqrt(1.0 - rng.random(n))


def sample_chords(d, tan_half: float, rng: np.random.Generator) -> np.ndarray:
    R = np.asarray(d, dtype=float) * tan_half
    x = rng.random(R.shape) * R
    return 2.0 * np.sqrt(np.maximum(R * R - x * x, 0.0))


def sample_vessels(cfg: SystemConfig, rng: np.random.Generator) -> list[VesselSegment]:
    """Vessels crossing one beam under the area-consistent model."""
    n = rng.poisson(mean_vessels_per_beam(cfg))
    d = sample_depths(cfg, n, rng)
    s = rng.uniform(cfg.S_l, cfg.S_u, n)
    l = sample_chords(d, cfg.tan_half, rng)
    return [VesselSegment(float(a), float(b), float(c)) for a, b, c in zip(d, l, s)]


def particle_rate(cfg: SystemConfig, s, l):
    """Mean particle count of a vessel of cross-section s and chord l."""
    return cfg.lambda_0 * np.asarray(s) * np.asarray(l) / cfg.u


def sample_particles(cfg: SystemConfig, vessels: list[VesselSegment],
                     rng: np.random.Generator) -> BeamScene:
    if not vessels:
        return BeamScene([], [])
    s = np.array([v.cross_section for v in vessels])
    l = np.array([v.chord_length for v in vessels])
    counts = rng.poisson(particle_rate(cfg, s, l))
    particles = [(vessels[k].depth, k) for k in range(len(vessels)) for _ in range(counts[k])]
    return BeamScene(list(vessels), particles)


# equivalent vessel ----------------------------------------------------------------

@dataclass(frozen=True)
class EquivalentVessel:
    l_hat: float      # m, mean chord at depth d
    lambda_eq: float  # expected vessels in the sub-region
    l_eq: float       # m, expected summed chord length
    s_eq: float       # m^2, mean cross-section


def slab_vessel_mean(cfg: SystemConfig, d, height, model: str | None = None):
    """Expected vessel count in the slab of the given height centred at depth d."""
    model = cfg.vessel_model if model is None else model
    base = cfg.lambda_b * np.asarray(d) * np.asarray(height) * cfg.tan_half
    if model == "paper":
        return base / (2.0 * cfg.r_f ** 2)
    if model == "area_consistent":
        return base
    raise ValueError(f"unknown vessel model {model!r}")


def equivalent_vessel(cfg: SystemConfig, d: float, height: float | None = None,
                      model: str | None = None) -> EquivalentVessel:
    """Aggregate of all vessels in the sub-region at depth d.

    ``height`` defaults to the full sub-region height delta_h.
    """
    if not 0.0 < d <= cfg.h_c:
        raise ValueError(f"depth must lie in (0, h_c], got {d}")
    h = cfg.delta_h if height is None else height
    l_hat = math.pi * d * cfg.tan_half / 2.0
    lam = float(slab_vessel_mean(cfg, d, h, model))
    return EquivalentVessel(l_hat, lam, l_hat * lam, 0.5 * (cfg.S_u + cfg.S_l))


def expected_particles(cfg: SystemConfig, ev: EquivalentVessel) -> float:
    return cfg.lambda_0 * ev.s_eq * ev.l_eq / cfg.u


# full ring vasculature -------------------------------------------------------------

@dataclass(frozen=True)
class Vasculature:
    """Flat record of everything that hosts particles, over all beams.

    Row k sits in beam ``beam[k]`` (beam index i * N_f + j) at depth
    ``depth[k]`` and carries load[k] = sum of cross-section x chord (m^3)
    over its n_vessels[k] vessels.
    """

    beam: np.ndarray
    depth: np.ndarray
    load: np.ndarray
    n_vessels: np.ndarray
    n_beams: int
    model: str

    def __post_init__(self) -> None:
        for a in (self.beam, self.depth, self.load, self.n_vessels):
            a.setflags(write=False)

    def particle_means(self, cfg: SystemConfig) -> np.ndarray:
        return cfg.lambda_0 * self.load / cfg.u

    def vessels_per_beam(self) -> np.ndarray:
        return np.bincount(self.beam, weights=self.n_vessels, minlength=self.n_beams)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n_beams": self.n_beams,
            "rows": [
                {"beam": int(b), "depth": float(d), "load": float(x), "n_vessels": float(n)}
                for b, d, x, n in zip(self.beam, self.depth, self.load, self.n_vessels)
            ],
        }


def sample_vasculature(cfg: SystemConfig, rng: np.random.Generator,
                       n_beams: int | None = None) -> Vasculature:
    """Independent vessel scenes for every beam of the ring."""
    nb = cfg.N_s * cfg.N_f if n_beams is None else int(n_beams)
    if cfg.vessel_model == "area_consistent":
        counts = rng.poisson(mean_vessels_per_beam(cfg), nb)
        n = int(counts.sum())
        beam = np.repeat(np.arange(nb), counts)
        depth = sample_depths(cfg, n, rng)
        s = rng.uniform(cfg.S_l, cfg.S_u, n)
        l = sample_chords(depth, cfg.tan_half, rng)
        return Vasculature(beam, depth, s * l, np.ones(n), nb, cfg.vessel_model)

    mids, heights = cfg.subregions()
    lam = slab_vessel_mean(cfg, mids, heights, "paper")
    counts = rng.poisson(np.broadcast_to(lam, (nb, lam.size)))
    loads = np.zeros(counts.shape)
    m_s, m_s2 = cross_section_moments(cfg)
    for r, d in enumerate(mids):
        m_l, m_l2 = chord_moments(d, cfg.tan_half)
        mean = m_s * m_l
        var = m_s2 * m_l2 - mean * mean

        def draw(n, g, d=d):
            return g.uniform(cfg.S_l, cfg.S_u, n) * sample_chords(np.full(n, d), cfg.tan_half, g)

        loads[:, r] = sum_iid(counts[:, r], draw, float(mean), float(var), rng)
    keep = counts.ravel() > 0
    beam = np.repeat(np.arange(nb), mids.size)[keep]
    depth = np.tile(mids, nb)[keep]
    return Vasculature(beam, depth, loads.ravel()[keep], counts.ravel()[keep].astype(float), nb, "paper")


def expected_vasculature(cfg: SystemConfig, n_beams: int | None = None) -> Vasculature:
    """Every beam at its expected occupancy: one row per slab, mean load."""
    nb = cfg.N_s * cfg.N_f if n_beams is None else int(n_beams)
    mids, heights = cfg.subregions()
    lam = slab_vessel_mean(cfg, mids, heights)
    m_s, _ = cross_section_moments(cfg)
    m_l, _ = chord_moments(mids, cfg.tan_half)
    load = lam * m_s * m_l
    beam = np.repeat(np.arange(nb), mids.size)
    return Vasculature(beam, np.tile(mids, nb), np.tile(load, nb),
                       np.tile(lam, nb), nb, cfg.vessel_model)
