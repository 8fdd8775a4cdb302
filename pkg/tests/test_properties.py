import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pressure_lab.fields import VelocityFieldSpec, divergence, eval_field, make_disk_field, make_torus_field, sample
from pressure_lab.grid import TorusGrid
from pressure_lab.holder import OscillationProfile, fit_exponent
from pressure_lab.kernel import green, green_gradient
from pressure_lab.torus import bilinear_pressure

thetas = st.floats(0.05, 0.95)
seeds = st.integers(0, 2**31 - 1)
SETTINGS = settings(max_examples=25, deadline=None)


def disk_point(r, a):
    return np.array([r * np.cos(a), r * np.sin(a)])


@SETTINGS
@given(thetas, thetas, seeds)
def test_bilinear_symmetry(t1, t2, seed):
    g = TorusGrid(32)
    u = sample(make_torus_field(2, t1, 2, seed=seed), g)
    v = sample(make_torus_field(2, t2, 2, seed=seed + 1), g)
    a, b = bilinear_pressure(u, v).scalar, bilinear_pressure(v, u).scalar
    assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(a)), 1e-300)


@SETTINGS
@given(st.floats(0, 0.99), st.floats(0, 7), st.floats(0, 0.99), st.floats(0, 7))
def test_green_symmetry(r1, a1, r2, a2):
    x, y = disk_point(r1, a1), disk_point(r2, a2)
    if np.linalg.norm(x - y) > 1e-6:
        assert abs(green(x, y) - green(y, x)) < 1e-10


@SETTINGS
@given(st.floats(0, 0.95), st.floats(0, 7), st.floats(0, 7))
def test_green_neumann_condition(r, a, b):
    x, n = disk_point(r, a), disk_point(1.0, b)
    assert abs(green_gradient(x, n) @ n) < 1e-11


@SETTINGS
@given(st.floats(0.05, 2.0), st.floats(0.1, 10.0))
def test_power_law_recovered(exponent, constant):
    scales = 2.0 ** -np.arange(1, 12)
    fit = fit_exponent(OscillationProfile.from_power_law(scales, exponent, constant))
    assert abs(fit.exponent - exponent) < 1e-10
    assert abs(fit.seminorm / constant - 1) < 1e-9


@SETTINGS
@given(st.sampled_from([2, 3]), thetas, st.integers(0, 5), seeds)
def test_spec_round_trip(dim, theta, octaves, seed):
    spec = make_torus_field(dim, theta, octaves, seed=seed)
    assert VelocityFieldSpec.from_text(spec.to_text()) == spec


@SETTINGS
@given(st.sampled_from([2, 3]), thetas, st.integers(0, 5), seeds)
def test_torus_fields_are_divergence_free(dim, theta, octaves, seed):
    spec = make_torus_field(dim, theta, octaves, seed=seed)
    pts = np.random.default_rng(seed).uniform(0, 2 * np.pi, (20, dim))
    assert np.max(np.abs(divergence(spec, pts))) < 1e-10 * 2.0**octaves


@SETTINGS
@given(thetas, st.integers(0, 7), seeds, st.floats(0, 7))
def test_disk_fields_are_tangent(theta, octaves, seed, a):
    spec = make_disk_field(theta, octaves, seed=seed)
    n = disk_point(1.0, a)[None, :]
    assert abs(eval_field(spec, n)[0] @ n[0]) < 1e-12
