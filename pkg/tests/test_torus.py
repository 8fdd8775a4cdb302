import numpy as np
import pytest

from pressure_lab.fields import (
    LacunaryMode,
    VelocityFieldSpec,
    make_torus_field,
    max_octave,
    sample,
    sin_product_potential,
)
from pressure_lab.grid import GridField, TorusGrid, load_grid
from pressure_lab.torus import (
    InputError,
    SpectralWorkspace,
    bilinear_pressure,
    divergence_decomposition,
    pressure_spectral,
    shell_decay_exponent,
)


def field_from_modes(dim, *modes, **kw):
    return VelocityFieldSpec(domain="torus", dim=dim, theta=0.5, modes=tuple(modes), **kw)


def cos_pair(dim=2):
    e = np.eye(dim)
    return field_from_modes(
        dim,
        LacunaryMode(0, tuple(e[1]), 0.0, 1.0, tuple(e[0])),
        LacunaryMode(0, tuple(e[0]), 0.0, 1.0, tuple(e[1])),
    )


def test_workspace_round_trip(rng):
    ws = SpectralWorkspace(64)
    f = rng.standard_normal((64, 64))
    back = ws.inverse(ws.forward(f, drop_nyquist=False))
    assert np.max(np.abs(back - f)) < 1e-12 * np.max(np.abs(f))


def test_shear_flow_has_no_pressure():
    mode = LacunaryMode(0, (0.0, 1.0), 0.0, 1.0, (1.0, 0.0))
    p = pressure_spectral(sample(field_from_modes(2, mode), TorusGrid(64)))
    assert np.max(np.abs(p.scalar)) < 1e-12


@pytest.mark.parametrize("dim,n", [(2, 64), (3, 32)])
def test_cos_pair_oracle(dim, n):
    g = TorusGrid(n, dim)
    p = pressure_spectral(sample(cos_pair(dim), g))
    x = g.points()
    assert np.max(np.abs(p.scalar - np.sin(x[..., 0]) * np.sin(x[..., 1]))) < 1e-10


def test_constant_field():
    spec = VelocityFieldSpec(domain="torus", dim=2, theta=0.5, mean_flow=(1.5, -0.5))
    assert np.max(np.abs(pressure_spectral(sample(spec, TorusGrid(32))).scalar)) < 1e-12


def lacunary(n, theta, seed):
    return sample(make_torus_field(2, theta, max_octave(n), seed=seed), TorusGrid(n))


def test_bilinear_identities():
    u, v = lacunary(128, 0.3, 0), lacunary(128, 0.5, 1)
    p = pressure_spectral(u).scalar
    t = bilinear_pressure(u, u).scalar
    assert np.max(np.abs(t - p)) <= 1e-14 * np.max(np.abs(p))
    tuv, tvu = bilinear_pressure(u, v).scalar, bilinear_pressure(v, u).scalar
    assert np.max(np.abs(tuv - tvu)) < 1e-12 * np.max(np.abs(tuv))
    zero = GridField(u.geometry, np.zeros_like(u.values))
    assert np.max(np.abs(bilinear_pressure(u, zero).scalar)) == 0.0


def test_bilinear_is_bilinear():
    u, v, w = lacunary(64, 0.3, 0), lacunary(64, 0.4, 1), lacunary(64, 0.6, 2)
    uv = GridField(u.geometry, u.values + 2.0 * v.values)
    lhs = bilinear_pressure(uv, w).scalar
    rhs = bilinear_pressure(u, w).scalar + 2.0 * bilinear_pressure(v, w).scalar
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(lhs))


def test_pressures_are_zero_average():
    u = lacunary(128, 0.3, 3)
    assert abs(pressure_spectral(u).scalar.mean()) < 1e-12
    split = divergence_decomposition(sample(make_torus_field(2, 0.3, 4, seed=3, gradient_part=sin_product_potential()), TorusGrid(64)))
    for part in (split.p1, split.p2, split.p3):
        assert abs(part.scalar.mean()) < 1e-12


def test_split_without_gradient_part():
    split = divergence_decomposition(lacunary(64, 0.3, 0))
    assert np.max(np.abs(split.v.values)) < 1e-12
    assert np.max(np.abs(split.p2.scalar)) < 1e-12
    assert np.max(np.abs(split.p3.scalar)) < 1e-12
    assert np.max(np.abs(split.p1.scalar - split.p_direct.scalar)) < 1e-12


def test_split_pure_gradient():
    spec = VelocityFieldSpec(domain="torus", dim=2, theta=0.5, gradient_part=sin_product_potential())
    split = divergence_decomposition(sample(spec, TorusGrid(64)))
    assert np.max(np.abs(split.w.values)) < 1e-12
    assert np.max(np.abs(split.p1.scalar)) < 1e-12
    assert np.max(np.abs(split.p2.scalar)) < 1e-12
    assert np.max(np.abs(split.p3.scalar - split.p_direct.scalar)) < 1e-12


@pytest.mark.parametrize("dim,n", [(2, 128), (3, 32)])
def test_split_identity(dim, n):
    spec = make_torus_field(dim, 0.3, max_octave(n), seed=1, gradient_part=sin_product_potential(dim))
    split = divergence_decomposition(sample(spec, TorusGrid(n, dim)))
    assert split.split_error() < 1e-10


def test_resolution_convergence():
    spec = make_torus_field(2, 0.3, max_octave(512), seed=0)
    p1 = pressure_spectral(sample(spec, TorusGrid(512))).scalar
    p2 = pressure_spectral(sample(spec, TorusGrid(1024))).scalar[::2, ::2]
    assert np.linalg.norm(p1 - p2) / np.linalg.norm(p2) < 1e-2


def test_input_errors():
    g = TorusGrid(32)
    bad = np.zeros(g.shape + (2,))
    bad[3, 4, 0] = np.nan
    with pytest.raises(InputError):
        pressure_spectral(GridField(g, bad))
    with pytest.raises(InputError):
        bilinear_pressure(GridField(g, np.zeros(g.shape + (2,))), GridField(TorusGrid(64), np.zeros((64, 64, 2))))
    with pytest.raises(InputError):
        pressure_spectral(GridField(g, np.zeros(g.shape)))
    with pytest.raises(ValueError):
        SpectralWorkspace(31)


def test_grid_file_round_trip(tmp_path):
    u = lacunary(64, 0.3, 0)
    path = tmp_path / "u.grid"
    u.save(path)
    back = load_grid(path)
    assert back.geometry == u.geometry
    assert np.array_equal(back.values, u.values)
    assert np.array_equal(pressure_spectral(back).scalar, pressure_spectral(u).scalar)


def test_shell_decay_of_single_octave_power_law():
    # f = sum_j 2^(-j s) cos(2^j x1) has shell norms exactly proportional to 2^(-j s)
    g = TorusGrid(256)
    x = g.points()[..., 0]
    f = GridField(g, sum(2.0 ** (-0.7 * j) * np.cos(2.0**j * x) for j in range(7)))
    assert shell_decay_exponent(f, 1, 6) == pytest.approx(0.7, abs=1e-10)
