import numpy as np
import pytest
from hypothesis import given, strategies as st

from coopraman.scenario import SystemConfig
from coopraman.spectrum import (BPE_CENTERS, Peak, default_p_prior, find_peaks, load_spectrum,
                                photon_energy, read_peaks_json, read_spectrum_csv,
                                reference_spectrum, resolve_p_prior, synth_spectrum, to_intensity,
                                write_peaks_json, write_spectrum_csv)


def test_empty_peaks_is_baseline(cfg):
    assert np.all(synth_spectrum([], 0.3, cfg) == 0.3)


def test_single_peak_argmax_at_its_bin(cfg):
    eta = synth_spectrum([Peak(1015.0)], 0.0, cfg)
    assert cfg.shift_centers[np.argmax(eta)] == 1015.0


def test_peak_outside_axis_rejected(cfg):
    with pytest.raises(ValueError):
        synth_spectrum([Peak(2000.0)], 0.0, cfg)


def test_reference_has_five_maxima_at_nearest_bins(cfg):
    eta = reference_spectrum(cfg)
    found = find_peaks(eta, cfg)
    assert len(found) == 5
    # 1200 sits on a bin edge, so either neighbour is nearest
    for f, c in zip(found, BPE_CENTERS):
        assert abs(f - c) <= 5.0


def test_constant_spectrum_has_no_peaks(cfg):
    assert find_peaks(np.full(cfg.N_f, 2.0), cfg) == []
    assert find_peaks(np.zeros(cfg.N_f), cfg) == []


@given(st.integers(0, 2**32 - 1))
def test_small_noise_keeps_peak_set(seed):
    cfg = SystemConfig()
    # bin-centred lines; the reference 1200 line ties two bins and may flip
    eta = synth_spectrum([Peak(c) for c in (1015.0, 1205.0, 1345.0, 1605.0, 1635.0)], 0.05, cfg)
    # noise amplitude well below the prominence threshold (0.15 x max) changes
    # any prominence by at most twice its amplitude
    noise = np.random.default_rng(seed).uniform(-0.02, 0.02, cfg.N_f)
    assert find_peaks(eta + noise, cfg) == find_peaks(eta, cfg)


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0, 1))
def test_synth_linear(h1, h2, base):
    cfg = SystemConfig()
    a = synth_spectrum([Peak(1013.0, h1)], base, cfg)
    b = synth_spectrum([Peak(1013.0, h2)], base, cfg)
    c = synth_spectrum([Peak(1013.0, h1 + h2)], 2 * base, cfg)
    assert np.allclose(a + b, c)


def test_intensity_zero_and_linear(cfg):
    eta = reference_spectrum(cfg)
    assert np.all(to_intensity(np.zeros(cfg.N_f), 1.0, cfg) == 0)
    assert np.allclose(to_intensity(eta, 2.0, cfg), 2 * to_intensity(eta, 1.0, cfg))


def test_intensity_keeps_reference_argmax(cfg):
    eta = reference_spectrum(cfg)
    assert np.argmax(to_intensity(eta, 1.0, cfg)) == np.argmax(eta)


def test_stokes_wavelength_and_energy():
    cfg = SystemConfig(shift_axis=[1008.0, 1018.0], N_f=1)
    wl = cfg.bin_wavelengths()[0]
    assert wl == pytest.approx(852.816e-9, rel=1e-5)
    assert photon_energy(wl) == pytest.approx(2.3293e-19, rel=1e-4)
    assert photon_energy(785e-9) == pytest.approx(2.5305e-19, rel=1e-4)


def test_default_p_prior(cfg):
    p = default_p_prior(reference_spectrum(cfg))
    assert 0 < p < 1
    assert p == pytest.approx(25 / 148)
    assert resolve_p_prior(SystemConfig(p_prior=0.3)) == 0.3
    # a constant spectrum has no bin above its mean; the prior is kept inside (0, 1)
    assert 0 < default_p_prior(np.ones(10)) < 1


def test_csv_round_trip(tmp_path, cfg):
    eta = reference_spectrum(cfg)
    p = tmp_path / "s.csv"
    write_spectrum_csv(p, eta, cfg)
    assert np.array_equal(read_spectrum_csv(p, cfg), eta)
    assert np.array_equal(load_spectrum(p, cfg), eta)


def test_csv_shift_mismatch(tmp_path, cfg):
    p = tmp_path / "s.csv"
    p.write_text("shift_cm1,value\n405.0,1.0\n")
    with pytest.raises(ValueError):
        read_spectrum_csv(p, cfg)


def test_peaks_json_round_trip(tmp_path, cfg):
    p = tmp_path / "peaks.json"
    write_peaks_json(p, [Peak(1013.0, 2.0, 12.0)], 0.1)
    peaks, base = read_peaks_json(p)
    assert peaks == [Peak(1013.0, 2.0, 12.0)] and base == 0.1
    assert np.allclose(load_spectrum(p, cfg), synth_spectrum(peaks, 0.1, cfg))


def test_peaks_json_bare_list(tmp_path):
    p = tmp_path / "peaks.json"
    p.write_text("[1013, 1200]")
    peaks, base = read_peaks_json(p)
    assert [q.center for q in peaks] == [1013.0, 1200.0] and base == 0.05
