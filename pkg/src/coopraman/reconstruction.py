"""Spectrum reconstruction from photon counts and reconstruction scoring.

Both estimators work on a count matrix N_d (sensors x sub-bands) and the
per-sub-band unit u_j = H_j * photon_scale_j, i.e. the expected signal counts
of a detector when eta_j = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .allocation import UnreachableBandError
from .photonics import PhotonMatrix, photon_scale
from .scenario import SystemConfig
from .spectrum import find_peaks, to_intensity

DEFAULT_OUTAGE_THRESHOLDS = (1.5, 3.0)


# shot-noise stage ----------------------------------------------------------------

def ml_signal_estimate(N_d):
    """Maximum-likelihood Poisson mean from one count: the count itself."""
    return np.asarray(N_d, dtype=float)


def stirling_signal_estimate(N_d):
    """exp(ln N - 1/(2N)), the stationary point of the Stirling-approximated likelihood."""
    N = np.asarray(N_d, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.exp(np.log(N) - 0.5 / N)
    return np.where(N > 0, out, 0.0)


def shot_noise_error(N_d: int, rtol: float = 1e-9) -> float:
    """sum_{y >= 0} Pois(N_d; y) (y - N_d)^2 over integer y, truncated.

    Terms are summed until the geometric bound on the remaining tail falls
    below ``rtol`` times the running sum.
    """
    if N_d < 0:
        raise ValueError("count must be non-negative")
    N = int(N_d)
    total = 0.0
    y = 0
    while True:
        if y == 0:
            log_pmf = 0.0 if N == 0 else -math.inf
        else:
            log_pmf = -y + N * math.log(y) - gammaln(N + 1)
        term = math.exp(log_pmf) * (y - N) ** 2
        total += term
        if y > N + 1:
            # ratio of consecutive terms, decreasing in y beyond the mode
            ratio = math.exp(-1.0) * (1.0 + 1.0 / y) ** N * ((y + 1 - N) / (y - N)) ** 2
            if ratio < 1.0 and term * ratio / (1.0 - ratio) <= rtol * total:
                return total
        y += 1


# estimators -----------------------------------------------------------------------

@dataclass
class Estimate:
    eta: np.ndarray
    active: np.ndarray                 # sensors used per sub-band (per group for distributed)
    no_data: np.ndarray                # sub-bands with no usable sensor
    extra: dict = field(default_factory=dict)


def signal_units(cfg: SystemConfig, H, power) -> np.ndarray:
    """Expected signal counts of one detector per unit eta, per sub-band."""
    H = np.asarray(getattr(H, "H", H), dtype=float)
    P = np.asarray(getattr(power, "P", power), dtype=float)
    unit = H * photon_scale(cfg, P)
    if np.any(unit <= 0):
        bad = int(np.flatnonzero(unit <= 0)[0])
        raise UnreachableBandError(f"sub-band unreachable: zero channel or power at index {bad}")
    return unit


def _counts(Nd, cfg: SystemConfig) -> np.ndarray:
    m = Nd if isinstance(Nd, PhotonMatrix) else PhotonMatrix(np.asarray(Nd))
    m.check(cfg)
    return m.counts


def centralized_estimate(Nd, H, power, cfg: SystemConfig) -> Estimate:
    """Fuse raw counts: sum of dark-corrected signals over the contributing sensors."""
    unit = signal_units(cfg, H, power)
    r = ml_signal_estimate(_counts(Nd, cfg)) - cfg.upsilon * cfg.delta_t
    used = r >= 0
    n_hat = used.sum(axis=0)
    num = np.maximum(r, 0.0).sum(axis=0)
    eta = np.where(n_hat > 0, num / (unit * np.maximum(n_hat, 1)), 0.0)
    return Estimate(eta, n_hat, n_hat == 0)


def local_estimates(Nd, H, power, cfg: SystemConfig) -> np.ndarray:
    unit = signal_units(cfg, H, power)
    return (ml_signal_estimate(_counts(Nd, cfg)) - cfg.upsilon * cfg.delta_t) / unit


def group_of(N_s: int, K: int) -> np.ndarray:
    """0-based group of each sensor, round robin."""
    return np.arange(N_s) % K


def thresholds(T, K: int) -> np.ndarray:
    """tau[i, k] = k T_i / K for k = 0..K."""
    return np.asarray(T, dtype=float)[:, None] * np.arange(K + 1)[None, :] / K


def fuse_bits(bits, weights, groups, active, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Quarter of the sum over groups of the mean weighted bit of the active members.

    bits, active: (N_s, N_f); weights, groups: (N_s,).  A group with no
    active member in a sub-band contributes nothing there.  Also returns the
    (K, N_f) active-member counts.
    """
    bits = np.asarray(bits, dtype=float) * active
    out = np.zeros(bits.shape[1])
    counts = np.zeros((K, bits.shape[1]), dtype=np.int64)
    for k in range(K):
        sel = groups == k
        n = active[sel].sum(axis=0)
        counts[k] = n
        s = (bits[sel] * np.asarray(weights)[sel, None]).sum(axis=0)
        out += np.where(n > 0, s / np.maximum(n, 1), 0.0)
    return out / 4.0, counts


def distributed_estimate(Nd, H, power, eta_ref, cfg: SystemConfig) -> Estimate:
    """One-bit quantized fusion with per-sensor thresholds.

    Sensor i caps its range at T_i = max(eta_ref) + mean_j(local_ij), clipped
    at 0, and splits [0, T_i] into K cells.  A sensor of 0-based group g sends
    b = [local >= tau_g] and its bit weighs tau_{g+2} - tau_g (tau_{K+1} := tau_K).
    """
    K = cfg.K_groups
    counts = _counts(Nd, cfg)
    N_s = counts.shape[0]
    if K > N_s:
        raise ValueError(f"K_groups={K} exceeds N_s={N_s}")
    local = local_estimates(counts, H, power, cfg)
    T = np.maximum(np.max(eta_ref) + local.mean(axis=1), 0.0)
    tau = thresholds(T, K)
    g = group_of(N_s, K)
    rows = np.arange(N_s)
    thr = tau[rows, g]
    w = tau[rows, np.minimum(g + 2, K)] - thr
    bits = local >= thr[:, None]
    active = counts != 0
    eta, n_groups = fuse_bits(bits, w, g, active, K)
    return Estimate(eta, n_groups, n_groups.sum(axis=0) == 0, {"T": T})


# scoring --------------------------------------------------------------------------

@dataclass
class ReconstructionReport:
    estimator: str
    eta_hat: np.ndarray
    mse: float
    outage: dict
    peaks: list
    degenerate: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "mse": self.mse,
            "outage": {str(k): bool(v) for k, v in self.outage.items()},
            "peaks_cm1": self.peaks,
            "degenerate": self.degenerate,
            "diagnostics": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                            for k, v in self.diagnostics.items()},
        }


def normalized(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = x.mean()
    return x / m if m > 0 else np.zeros_like(x)


def normalized_mse(eta_hat, eta_true, cfg: SystemConfig) -> tuple[float, bool]:
    """MSE between mean-normalized intensities; flags an all-zero estimate."""
    a = to_intensity(eta_hat, 1.0, cfg)
    b = to_intensity(eta_true, 1.0, cfg)
    if a.shape != b.shape:
        raise ValueError("spectra differ in length")
    return float(np.mean((normalized(b) - normalized(a)) ** 2)), not a.mean() > 0


def score(eta_hat, eta_true, cfg: SystemConfig, tau_t=DEFAULT_OUTAGE_THRESHOLDS,
          estimator: str = "", diagnostics: dict | None = None,
          prominence: float | None = None) -> ReconstructionReport:
    mse, degenerate = normalized_mse(eta_hat, eta_true, cfg)
    kw = {} if prominence is None else {"min_prominence": prominence}
    return ReconstructionReport(
        estimator=estimator,
        eta_hat=np.asarray(eta_hat, dtype=float),
        mse=mse,
        outage={float(t): mse > t for t in tau_t},
        peaks=find_peaks(eta_hat, cfg, **kw),
        degenerate=degenerate,
        diagnostics=diagnostics or {},
    )


def peaks_match(found, truth, cfg: SystemConfig, tol_bins: int = 1) -> bool:
    """True when ``found`` has exactly one peak per true line, each within tol_bins bins."""
    if len(found) != len(truth):
        return False
    edges = np.asarray(cfg.shift_axis)

    def bin_of(x):
        return np.clip(np.searchsorted(edges, x, side="right") - 1, 0, cfg.N_f - 1)

    f = np.sort(bin_of(np.asarray(found, dtype=float)))
    t = np.sort(bin_of(np.asarray(truth, dtype=float)))
    return bool(np.all(np.abs(f - t) <= tol_bins))
