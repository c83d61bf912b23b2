import math

import numpy as np
import pytest

from specband.errors import BandUndefined, DegenerateSpectrum, InvalidLevel
from specband.inference import (
    gumbel_cdf,
    gumbel_quantile,
    max_deviation,
    omega_factor,
    pointwise_ci,
    uniform_band,
)
from specband.kernels import get_kernel
from specband.spectral import SpectralGrid, theorem_grid

BART = get_kernel("bartlett")
TWO_PI = 2.0 * np.pi


def _flat_grid(b_val, t_len, value=1.0 / TWO_PI, n=1):
    freqs = theorem_grid(b_val)
    mats = np.broadcast_to(
        value * np.eye(n, dtype=complex), (freqs.size, n, n)
    ).copy()
    return SpectralGrid(freqs, mats, b_val, "bartlett", t_len)


def test_gumbel_cdf_values():
    assert gumbel_cdf(0.0) == pytest.approx(math.exp(-1.0), rel=1e-15)
    assert gumbel_cdf(200.0) == pytest.approx(1.0)
    assert gumbel_cdf(-50.0) == pytest.approx(0.0, abs=1e-12)


def test_gumbel_cdf_mean_is_twice_euler():
    # numeric integration of x against the law: 2 * Euler-Mascheroni
    xs = np.linspace(-15.0, 60.0, 400001)
    cdf = gumbel_cdf(xs)
    mean = float(np.sum((xs[:-1] + np.diff(xs) / 2) * np.diff(cdf)))
    assert mean == pytest.approx(2.0 * np.euler_gamma, abs=1e-4)
    assert mean == pytest.approx(1.154431, abs=1e-3)


def test_gumbel_quantile_values():
    assert gumbel_quantile(math.exp(-1.0)) == pytest.approx(0.0, abs=1e-12)
    # -2 log(-log 0.95), confirmed by the cdf round-trip below
    assert gumbel_quantile(0.95) == pytest.approx(5.94039, abs=1e-5)
    for p in (0.01, 0.5, 0.99):
        assert gumbel_cdf(gumbel_quantile(p)) == pytest.approx(p, abs=1e-12)


def test_gumbel_quantile_rejects_bad_level():
    for level in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(InvalidLevel):
            gumbel_quantile(level)


def test_omega_factor():
    assert omega_factor(0.0) == 2.0
    assert omega_factor(np.pi) == 2.0
    assert omega_factor(2 * np.pi) == 2.0
    assert omega_factor(np.pi / 2) == 1.0
    assert omega_factor(1.0) == 1.0


def test_max_deviation_center_equals_estimate():
    est = _flat_grid(10, 1000)
    stat = max_deviation(est, est, est, BART, (0, 0))
    assert stat.raw_max == 0.0
    # -(2 ln 10 - ln(pi ln 10)) by direct arithmetic
    assert stat.centered == pytest.approx(-2.6264079, abs=1e-6)
    assert stat.grid_size == 11


def test_max_deviation_single_spike():
    t_len, b_val = 1000, 10  # T/B = 100
    est = _flat_grid(b_val, t_len)
    center = _flat_grid(b_val, t_len)
    d = 0.01
    mats = est.matrices.copy()
    mats[3, 0, 0] += d
    est2 = SpectralGrid(est.freqs, mats, b_val, "bartlett", t_len)
    stat = max_deviation(est2, center, center, BART, (0, 0))
    expected = 100.0 * d**2 / ((2.0 / 3.0) * (1.0 / TWO_PI) ** 2)
    assert stat.raw_max == pytest.approx(expected, rel=1e-12)
    assert stat.argmax_freq == pytest.approx(est.freqs[3])


def test_max_deviation_imaginary_spike_same_value():
    t_len, b_val = 1000, 10
    base = _flat_grid(b_val, t_len, n=2)
    d = 0.02
    re_m = base.matrices.copy()
    re_m[4, 0, 1] += d
    re_m[4, 1, 0] += d
    im_m = base.matrices.copy()
    im_m[4, 0, 1] += 1j * d
    im_m[4, 1, 0] -= 1j * d
    re_stat = max_deviation(
        SpectralGrid(base.freqs, re_m, b_val, "bartlett", t_len),
        base, base, BART, (0, 1),
    )
    im_stat = max_deviation(
        SpectralGrid(base.freqs, im_m, b_val, "bartlett", t_len),
        base, base, BART, (0, 1),
    )
    assert re_stat.raw_max == pytest.approx(im_stat.raw_max, rel=1e-12)


def test_max_deviation_grid_mismatch():
    a = _flat_grid(10, 1000)
    b = _flat_grid(8, 1000)
    with pytest.raises(ValueError):
        max_deviation(a, b, a, BART, (0, 0))


def test_max_deviation_degenerate_spectrum():
    est = _flat_grid(10, 1000)
    bad = SpectralGrid(est.freqs, np.zeros_like(est.matrices), 10, "bartlett", 1000)
    with pytest.raises(DegenerateSpectrum):
        max_deviation(est, est, bad, BART, (0, 0))


def test_uniform_band_flat_oracle():
    # m=1, level=0.95, B=32, T=4096, kappa=2/3, flat fhat = 1/(2 pi)
    est = _flat_grid(32, 4096)
    band = uniform_band(est, BART, 0.95, [(0, 0)])
    threshold = -2.0 * math.log(-math.log(0.95)) + 2.0 * math.log(32.0) - math.log(
        math.pi * math.log(32.0)
    )
    expected = math.sqrt(
        (32.0 / 4096.0) * (2.0 / 3.0) * (1.0 / TWO_PI) ** 2 * threshold
    )
    np.testing.assert_allclose(band.entries[0].half_width, expected, rtol=1e-10)
    assert band.bonferroni_m == 1
    assert band.metadata["per_entry_level"] == 0.95


def test_uniform_band_bonferroni_split():
    est = _flat_grid(32, 4096, n=2)
    entries = [(0, 0), (0, 1), (1, 1)]
    band = uniform_band(est, BART, 0.95, entries, bonferroni=True)
    assert band.bonferroni_m == 3
    assert band.metadata["per_entry_level"] == pytest.approx(1.0 - 0.05 / 3.0)
    plain = uniform_band(est, BART, 0.95, entries, bonferroni=False)
    # Bonferroni split widens every entry
    for split, single in zip(band.entries, plain.entries):
        assert np.all(split.half_width > single.half_width)


def test_uniform_band_monotone_in_level():
    est = _flat_grid(32, 4096)
    widths = [
        uniform_band(est, BART, lvl, [(0, 0)]).entries[0].half_width[0]
        for lvl in (0.80, 0.90, 0.95, 0.99)
    ]
    assert all(a < b for a, b in zip(widths, widths[1:]))


def test_uniform_band_scale_equivariance():
    est = _flat_grid(32, 4096)
    scaled = SpectralGrid(est.freqs, 9.0 * est.matrices, 32, "bartlett", 4096)
    a = uniform_band(est, BART, 0.95, [(0, 0)]).entries[0].half_width
    b = uniform_band(scaled, BART, 0.95, [(0, 0)]).entries[0].half_width
    np.testing.assert_allclose(b, 9.0 * a, rtol=1e-12)


def test_uniform_band_undefined_at_tiny_bandwidth():
    est = _flat_grid(2, 1000)
    with pytest.raises(BandUndefined):
        uniform_band(est, BART, 0.05, [(0, 0)])


def test_uniform_band_rejects_bad_level():
    est = _flat_grid(32, 4096)
    with pytest.raises(InvalidLevel):
        uniform_band(est, BART, 1.5, [(0, 0)])


def test_band_to_dict_one_based():
    est = _flat_grid(16, 1024, n=2)
    band = uniform_band(est, BART, 0.9, [(0, 1)])
    d = band.to_dict()
    assert d["entries"][0]["i"] == 1 and d["entries"][0]["j"] == 2
    e = d["entries"][0]
    np.testing.assert_allclose(
        np.array(e["upper"]) - np.array(e["lower"]),
        2.0 * np.array(e["half_width"]),
        rtol=1e-12,
    )


def test_pointwise_ci_z_value_and_omega():
    est = _flat_grid(32, 4096)
    lo0, hi0 = pointwise_ci(est, BART, 0.95, (0, 0), 0.0)
    lo_mid, hi_mid = pointwise_ci(est, BART, 0.95, (0, 0), float(est.freqs[16]))
    half0 = (hi0 - lo0) / 2.0
    half_mid = (hi_mid - lo_mid) / 2.0
    expected_mid = 1.959964 * math.sqrt(
        (32.0 / 4096.0) * (2.0 / 3.0) * (1.0 / TWO_PI) ** 2
    )
    assert half_mid == pytest.approx(expected_mid, abs=1e-6)
    # boundary variance doubling: width ratio sqrt(2)
    assert half0 / half_mid == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_pointwise_ci_off_grid_frequency():
    est = _flat_grid(32, 4096)
    with pytest.raises(ValueError):
        pointwise_ci(est, BART, 0.95, (0, 0), 0.1234)


def test_pointwise_ci_components():
    est = _flat_grid(16, 1024, n=2)
    lo, hi = pointwise_ci(est, BART, 0.9, (0, 1), 0.0, component="im")
    assert lo < 0.0 < hi
    with pytest.raises(ValueError):
        pointwise_ci(est, BART, 0.9, (0, 1), 0.0, component="abs")
