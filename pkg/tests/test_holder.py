import math

import numpy as np
import pytest

from pressure_lab.fields import make_disk_field, make_torus_field, sample
from pressure_lab.grid import DiskGrid, GridField, TorusGrid
from pressure_lab.holder import (
    DegenerateProfileError,
    EmptyRegionError,
    OscillationProfile,
    Region,
    WindowError,
    dense_profile_1d,
    fit_exponent,
    gradient_exponent,
    grid_gradient,
    holder_seminorm,
    log_lipschitz_constant,
    log_lipschitz_ratios,
    oscillation_profile,
    spread,
)
from pressure_lab.holder import _lattice_annulus

from conftest import dense_slice_profile

SCALES = 2.0 ** -np.arange(1, 12)


def torus_scalar(n, func):
    g = TorusGrid(n)
    x = g.points()
    return GridField(g, func(x[..., 0], x[..., 1]))


def test_constant_has_zero_oscillation():
    for f in (torus_scalar(256, lambda a, b: 5.0 + 0 * a), GridField(DiskGrid(256, 512), np.full((256, 512), 5.0))):
        prof = oscillation_profile(f)
        assert np.all(prof.oscillation == 0.0)
        with pytest.raises(DegenerateProfileError):
            fit_exponent(prof)


def test_locally_linear_profile_matches_lattice_oracle():
    # f = sin x1 behaves like x1 at small scales.  Every lattice offset o of a
    # scale class changes f by at most 2 |sin(o1 h / 2)|, attained up to grid
    # sampling, so omega(r) is this maximum over the enumerated class.
    n = 256
    h = 2 * np.pi / n
    prof = oscillation_profile(torus_scalar(n, lambda a, b: np.sin(a)), pair_budget=1 << 24)
    for r, w in zip(prof.scales, prof.oscillation):
        c = r / h
        if c > 8:
            continue
        offs = _lattice_annulus(2, c / math.sqrt(2), c * math.sqrt(2))
        oracle = np.max(2 * np.abs(np.sin(offs[:, 0] * h / 2)))
        assert 0.99 <= w / oracle <= 1.01
        # and omega(r) / r stays within the class width of 1
        assert 1 / math.sqrt(2) - 1e-9 <= w / r <= math.sqrt(2) + 1e-9


def weierstrass(x):
    return sum(2.0 ** (-j / 2) * np.cos(2.0**j * x) for j in range(9))


def test_weierstrass_exponent_dense_slice():
    x = 2 * np.pi * np.arange(8192) / 8192
    prof = dense_slice_profile(weierstrass(x))
    # below the shortest wavelength 2 pi / 2^8 the sum is smooth; fit the resolved band
    smooth = int(np.sum(prof.scales < 2 * np.pi / 2**8))
    fit = fit_exponent(prof, drop_fine=smooth, drop_coarse=2)
    assert 0.45 <= fit.exponent <= 0.55


def test_weierstrass_sampled_profile_agrees_with_dense_scan():
    n = 1024
    sampled = fit_exponent(oscillation_profile(torus_scalar(n, lambda a, b: weierstrass(a)))).exponent
    x = 2 * np.pi * np.arange(n) / n
    dense = fit_exponent(dense_slice_profile(weierstrass(x))).exponent
    assert 0.45 <= sampled <= 0.55
    assert abs(sampled - dense) < 0.05


def test_dense_profile_matches_brute_force(rng):
    v = rng.standard_normal(64)
    h = 0.1
    scales = h * 2.0 ** np.arange(5)
    got = dense_profile_1d(v, h, scales)
    for c, w in zip(scales, got):
        best = 0.0
        for i in range(64):
            for j in range(64):
                lag = min(abs(i - j), 64 - abs(i - j)) * h
                if c / math.sqrt(2) < lag <= c * math.sqrt(2) + 1e-12:
                    best = max(best, abs(v[i] - v[j]))
        assert w == pytest.approx(best, abs=0)


def test_exact_power_laws():
    fit = fit_exponent(OscillationProfile.from_power_law(SCALES, 1.0))
    assert fit.exponent == pytest.approx(1.0, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    fit = fit_exponent(OscillationProfile.from_power_law(SCALES, 0.4, 3.0))
    assert abs(fit.exponent - 0.4) < 1e-12
    assert fit.seminorm == pytest.approx(3.0, rel=1e-10)
    assert holder_seminorm(OscillationProfile.from_power_law(SCALES, 0.4, 3.0), 0.4) == pytest.approx(3.0, rel=1e-12)


def test_window_errors():
    with pytest.raises(WindowError):
        fit_exponent(OscillationProfile.from_power_law(SCALES[:6], 0.5))
    fit_exponent(OscillationProfile.from_power_law(SCALES[:7], 0.5))


def test_empty_region():
    f = sample(make_disk_field(0.3, 3), DiskGrid(16, 32))
    with pytest.raises(EmptyRegionError):
        oscillation_profile(f, Region.boundary_band(0.0))
    with pytest.raises(ValueError):
        oscillation_profile(torus_scalar(32, lambda a, b: a), Region.interior(0.1))


def test_log_lipschitz_oracles():
    r, ratio = log_lipschitz_ratios(OscillationProfile(SCALES, SCALES * np.abs(np.log(SCALES)), np.ones(SCALES.size)))
    np.testing.assert_allclose(ratio, 1.0, rtol=1e-14)
    prof = OscillationProfile.from_power_law(SCALES, 0.9)
    assert log_lipschitz_constant(prof) == log_lipschitz_ratios(prof)[1].max()


def test_sub_lipschitz_growth_flagged():
    # omega = r^0.9: omega / r = r^-0.1 grows by 2^(0.1 * span), above 2 once the
    # retained window spans more than ten octaves
    scales = 2.0 ** -np.arange(1, 17)
    prof = OscillationProfile.from_power_law(scales, 0.9)
    lo, hi = fit_exponent(prof).window
    r, w = prof.scales[::-1][lo:hi], prof.oscillation[::-1][lo:hi]
    assert spread(w / r) > 2


def test_smooth_gradient_saturates():
    p = torus_scalar(256, lambda a, b: np.sin(a) * np.sin(b))
    fit = gradient_exponent(p, drop_fine=2, drop_coarse=3)
    assert fit.exponent >= 0.95


def test_grid_gradient_is_spectral():
    p = torus_scalar(64, lambda a, b: np.sin(a) * np.cos(2 * b))
    g = grid_gradient(p).values
    x = TorusGrid(64).points()
    np.testing.assert_allclose(g[..., 0], np.cos(x[..., 0]) * np.cos(2 * x[..., 1]), atol=1e-12)
    np.testing.assert_allclose(g[..., 1], -2 * np.sin(x[..., 0]) * np.sin(2 * x[..., 1]), atol=1e-12)


def test_disk_grid_gradient_second_order():
    g = DiskGrid(128, 128)
    x = g.points()
    p = GridField(g, x[..., 0] ** 2 * x[..., 1])
    grad = grid_gradient(p).values
    assert np.max(np.abs(grad[..., 0] - 2 * x[..., 0] * x[..., 1])) < 1e-3
    assert np.max(np.abs(grad[..., 1] - x[..., 0] ** 2)) < 1e-3


def test_zero_pressure_is_degenerate():
    with pytest.raises(DegenerateProfileError):
        gradient_exponent(torus_scalar(256, lambda a, b: 0 * a))


def test_translation_invariance():
    f = torus_scalar(128, lambda a, b: weierstrass(a) * np.cos(b))
    shifted = GridField(f.geometry, np.roll(f.values, (17, 5), axis=(0, 1)))
    assert np.array_equal(oscillation_profile(f).oscillation, oscillation_profile(shifted).oscillation)


def test_profile_monotone_and_deterministic():
    f = sample(make_disk_field(0.3, 5, seed=1), DiskGrid(64, 128))
    a = oscillation_profile(f, seed=3)
    b = oscillation_profile(f, seed=3)
    assert np.array_equal(a.oscillation, b.oscillation)
    assert np.all(np.diff(a.oscillation[::-1]) >= 0)


@pytest.mark.parametrize(
    "field",
    [
        sample(make_torus_field(2, 0.3, 6, seed=0), TorusGrid(512)),
        sample(make_disk_field(0.3, 6, seed=0), DiskGrid(256, 512)),
    ],
    ids=["torus", "disk"],
)
def test_sampling_stability(field):
    base = 1 << 22 if isinstance(field.geometry, TorusGrid) else 100_000
    e1 = fit_exponent(oscillation_profile(field, pair_budget=base)).exponent
    e2 = fit_exponent(oscillation_profile(field, pair_budget=2 * base)).exponent
    assert abs(e1 - e2) < 0.03


def test_small_budget_rejected():
    with pytest.raises(ValueError):
        oscillation_profile(torus_scalar(32, lambda a, b: a), pair_budget=100)
