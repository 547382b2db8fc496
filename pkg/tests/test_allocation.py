from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coopraman.allocation import (UnreachableBandError, allocate_power, expected_channel,
                                  expected_detected_power, subregion_particles)
from coopraman.channel import AttenuationModel, default_attenuation
from coopraman.vasculature import expected_particles, equivalent_vessel


def test_zero_arrivals_zero_power(cfg):
    c = replace(cfg, lambda_0=1e-300)
    assert expected_detected_power(c, None, 0, 1e-3) < 1e-200


def test_linear_in_transmit_power(cfg):
    a = expected_detected_power(cfg, None, 3, 1e-4)
    assert expected_detected_power(cfg, None, 3, 2e-4) == pytest.approx(2 * a)


def test_default_channel_value(cfg):
    H = expected_channel(cfg).H
    assert np.allclose(H, H[0])
    assert H[0] == pytest.approx(11.67, rel=1e-3)


def test_subregion_particles(cfg):
    mids, n = subregion_particles(cfg)
    assert mids.size == 5
    assert mids[0] == pytest.approx(3.09e-4, rel=1e-3)
    last = equivalent_vessel(cfg, mids[-1], cfg.h_c - 4 * cfg.delta_h)
    assert n[-1] == pytest.approx(expected_particles(cfg, last))


def test_h_independent_of_power(cfg):
    # H carries no power at all: allocations at any budget share it
    H = expected_channel(cfg)
    P1 = allocate_power(H, 1.0).P
    P2 = allocate_power(H, 2.0).P
    assert np.allclose(H.H * P1 * 2, H.H * P2)


def test_larger_mu_lowers_h(cfg):
    base = default_attenuation(cfg)
    mu = base.mu_bands.copy()
    mu[7] *= 2
    H = expected_channel(cfg, AttenuationModel(base.mu_excitation, mu)).H
    H0 = expected_channel(cfg, base).H
    assert H[7] < H0[7]
    assert np.delete(H, 7) == pytest.approx(np.delete(H0, 7))


def test_band_count_mismatch(cfg):
    with pytest.raises(ValueError):
        expected_channel(cfg, AttenuationModel(1.0, np.ones(3)))


def test_no_fading_removes_pi_over_two(cfg):
    a = expected_channel(cfg).H
    b = expected_channel(replace(cfg, fading=False)).H
    assert np.allclose(a / b, np.pi / 2)


# allocation ----------------------------------------------------------------------

def test_symmetric_split():
    assert np.allclose(allocate_power([1.0, 1.0], 1.0).P, [0.5, 0.5])


def test_two_band_worked_example():
    P = allocate_power(np.array([1.0, 3.0]), 1.0).P
    assert np.allclose(P, [0.75, 0.25])
    assert np.allclose(np.array([1.0, 3.0]) * P, [0.75, 0.75])


@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=50), st.floats(1e-9, 1e3),
       st.floats(1e-3, 1e3))
def test_allocation_properties(H, P_s, c):
    H = np.array(H)
    P = allocate_power(H, P_s).P
    HP = H * P
    assert np.ptp(HP) <= 1e-12 * HP.max()
    assert P.sum() == pytest.approx(P_s, rel=1e-9)
    assert np.allclose(allocate_power(c * H, P_s).P, P, rtol=1e-12)
    for j in range(H.size):
        for m in range(H.size):
            if H[j] < H[m]:
                assert P[j] > P[m]


def test_unreachable_band():
    with pytest.raises(UnreachableBandError):
        allocate_power(np.array([1.0, 0.0]), 1.0)
