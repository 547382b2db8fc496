"""Raman spectra as per-sub-band scattering coefficients."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .scenario import LIGHT_SPEED, PLANCK, SystemConfig

# reporter molecule reference lines, cm^-1
BPE_CENTERS = (1013.0, 1200.0, 1342.0, 1608.0, 1636.0)
DEFAULT_FWHM = 15.0
DEFAULT_BASELINE = 0.05
DEFAULT_PROMINENCE = 0.15


@dataclass(frozen=True)
class Peak:
    center: float  # cm^-1
    height: float = 1.0
    fwhm: float = DEFAULT_FWHM

    def __post_init__(self) -> None:
        if not (self.height > 0 and self.fwhm > 0):
            raise ValueError("peak height and fwhm must be positive")


BPE_PEAKS = tuple(Peak(c) for c in BPE_CENTERS)


def lorentzian(x, center, height, fwhm):
    hw = 0.5 * fwhm
    return height / (1.0 + ((np.asarray(x) - center) / hw) ** 2)


def synth_spectrum(peaks, baseline: float, cfg: SystemConfig) -> np.ndarray:
    """eta[j] = baseline + sum of Lorentzians at the sub-band centres."""
    if baseline < 0:
        raise ValueError("baseline must be non-negative")
    x = cfg.shift_centers
    lo, hi = cfg.shift_axis[0], cfg.shift_axis[-1]
    eta = np.full(x.size, float(baseline))
    for p in peaks:
        if not lo <= p.center <= hi:
            raise ValueError(f"peak at {p.center} cm^-1 lies outside the shift axis")
        eta += lorentzian(x, p.center, p.height, p.fwhm)
    return eta


def reference_spectrum(cfg: SystemConfig) -> np.ndarray:
    return synth_spectrum(BPE_PEAKS, DEFAULT_BASELINE, cfg)


def default_p_prior(eta: np.ndarray) -> float:
    """Fraction of bins above the spectrum mean, kept inside (0, 1)."""
    eta = np.asarray(eta, dtype=float)
    p = float(np.mean(eta > eta.mean()))
    n = eta.size
    return min(max(p, 0.5 / n), 1.0 - 0.5 / n)


def resolve_p_prior(cfg: SystemConfig, eta_ref: np.ndarray | None = None) -> float:
    if cfg.p_prior is not None:
        return cfg.p_prior
    return default_p_prior(reference_spectrum(cfg) if eta_ref is None else eta_ref)


def bin_wavelengths(cfg: SystemConfig) -> np.ndarray:
    return cfg.bin_wavelengths()


def photon_energy(wavelength) -> np.ndarray:
    """E_p = h c / lambda (J)."""
    return PLANCK * LIGHT_SPEED / np.asarray(wavelength, dtype=float)


def to_intensity(eta_hat, P_exp: float, cfg: SystemConfig) -> np.ndarray:
    """Raman intensity P_exp * eta * lambda_j / (h c), in photons/s."""
    if not P_exp > 0:
        raise ValueError("P_exp must be positive")
    return P_exp * np.asarray(eta_hat, dtype=float) / photon_energy(cfg.bin_wavelengths())


def find_peaks(spec, cfg: SystemConfig, min_prominence: float = DEFAULT_PROMINENCE,
               relative: bool = True) -> list[float]:
    """Shifts (cm^-1) of local maxima whose prominence clears the threshold.

    With ``relative`` the threshold is ``min_prominence * max(spec)``.  The
    spectrum is padded with zeros so edge bins can qualify.
    """
    spec = np.asarray(spec, dtype=float)
    top = spec.max() if spec.size else 0.0
    if top <= 0 or np.ptp(spec) == 0:
        return []
    thr = min_prominence * top if relative else min_prominence
    idx, _ = signal.find_peaks(np.r_[0.0, spec, 0.0], prominence=thr)
    return [float(c) for c in cfg.shift_centers[idx - 1]]


# IO ---------------------------------------------------------------------------

def write_spectrum_csv(path, eta, cfg: SystemConfig) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shift_cm1", "value"])
        for s, v in zip(cfg.shift_centers, eta):
            w.writerow([repr(float(s)), repr(float(v))])


def read_spectrum_csv(path, cfg: SystemConfig | None = None) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(rows[0]) != {"shift_cm1", "value"}:
        raise ValueError(f"{path}: expected columns shift_cm1,value")
    shifts = np.array([float(r["shift_cm1"]) for r in rows])
    values = np.array([float(r["value"]) for r in rows])
    if cfg is not None:
        if shifts.size != cfg.N_f or not np.allclose(shifts, cfg.shift_centers):
            raise ValueError(f"{path}: shifts do not match the scenario's sub-band centres")
    if np.any(values < 0):
        raise ValueError(f"{path}: spectrum values must be non-negative")
    return values


def load_spectrum(path, cfg: SystemConfig) -> np.ndarray:
    """Spectrum from CSV, or synthesized from a peak-list JSON."""
    if str(path).endswith(".json"):
        peaks, baseline = read_peaks_json(path)
        return synth_spectrum(peaks, baseline, cfg)
    return read_spectrum_csv(path, cfg)


def write_peaks_json(path, peaks, baseline: float = DEFAULT_BASELINE) -> None:
    doc = {"baseline": baseline,
           "peaks": [{"center": p.center, "height": p.height, "fwhm": p.fwhm} for p in peaks]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_peaks_json(path) -> tuple[list[Peak], float]:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, list):
        doc = {"peaks": doc}
    extra = set(doc) - {"peaks", "baseline"}
    if extra:
        raise ValueError(f"{path}: unknown keys {sorted(extra)}")
    peaks = []
    for p in doc["peaks"]:
        if isinstance(p, (int, float)):
            peaks.append(Peak(float(p)))
        else:
            peaks.append(Peak(**p))
    return peaks, float(doc.get("baseline", DEFAULT_BASELINE))
