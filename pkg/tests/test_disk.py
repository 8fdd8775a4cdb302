import numpy as np
import pytest

from pressure_lab.disk import (
    DataInconsistencyError,
    QuadratureScheme,
    ResolutionError,
    compatibility_residual,
    harmonic_quadratic,
    plane_wave,
    polynomial,
    pressure_fd,
    pressure_representation,
    proof_split,
    radial_trig,
    read_targets,
    source_terms,
    test_function_library,
    weak_residual,
)
from pressure_lab.fields import make_disk_field, make_torus_field, rigid_rotation, sample, zero_field
from pressure_lab.grid import DiskGrid, GridField
from pressure_lab.kernel import uniform_disk


def rotation_pressure(x):
    return 0.5 * np.sum(np.asarray(x) ** 2, axis=-1) - 0.25


@pytest.fixture(scope="module")
def field04():
    return make_disk_field(0.4, 5, seed=0)


def test_quadrature_covers_disk(rng):
    scheme = QuadratureScheme()
    for x in uniform_disk(rng, 5, 0.99):
        y, w = scheme.nodes(x)
        assert abs(w.sum() - np.pi) < 1e-12
        assert np.all(np.linalg.norm(y, axis=1) <= 1 + 1e-12)
        # integrates a polynomial exactly: int_D |y|^2 = pi / 2
        assert abs(np.dot(w, np.sum(y**2, axis=1)) - np.pi / 2) < 1e-12


def test_representation_rotation(rng):
    x = uniform_disk(rng, 20, 0.99)
    p = pressure_representation(rigid_rotation(), x)
    assert np.max(np.abs(p - rotation_pressure(x))) < 1e-3


def test_representation_zero_field(rng):
    x = uniform_disk(rng, 5, 0.9)
    assert np.max(np.abs(pressure_representation(zero_field(), x))) == 0.0


def test_representation_refinement(field04):
    x = np.array([[0.2, -0.3], [0.9, 0.1], [-0.5, 0.6]])
    scheme = QuadratureScheme()
    a = pressure_representation(field04, x, scheme)
    b = pressure_representation(field04, x, scheme.refined())
    assert np.max(np.abs(a - b)) < 1e-6 * np.max(np.abs(a))


def test_representation_resolution_error(field04):
    with pytest.raises(ResolutionError):
        pressure_representation(field04, [[1 - 1e-9, 0.0]])
    with pytest.raises(ResolutionError):
        pressure_representation(field04, [[1.0, 0.0]])
    with pytest.raises(ValueError):
        pressure_representation(make_torus_field(2, 0.3, 2), [[0.1, 0.1]])


def test_target_csv(tmp_path):
    path = tmp_path / "targets.csv"
    path.write_text("x1,x2\n0.1,0.2\n-0.3,0.5\n")
    np.testing.assert_array_equal(read_targets(path), [[0.1, 0.2], [-0.3, 0.5]])
    path.write_text("x1,x2\n0.1,0.2\n")
    assert read_targets(path).shape == (1, 2)
    path.write_text("a,b\n0.1,0.2\n")
    with pytest.raises(ValueError):
        read_targets(path)


def test_fd_rotation_and_convergence():
    errs = []
    for n in (64, 128, 256):
        p = pressure_fd(rigid_rotation(), n, n)
        errs.append(np.max(np.abs(p.scalar - rotation_pressure(p.geometry.points()))))
    assert errs[-1] < 1e-4
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_fd_zero_field():
    assert np.max(np.abs(pressure_fd(zero_field(), 32, 32).scalar)) == 0.0


def test_fd_zero_average(field04):
    p = pressure_fd(field04, 64, 128)
    assert abs(p.mean()[0]) < 1e-12


def test_fd_flags_inconsistent_data(field04):
    res, scale = compatibility_residual(field04)
    assert abs(res) < 1e-8 * max(scale, 1.0)
    with pytest.raises(DataInconsistencyError):
        pressure_fd(field04, 32, 32, compat_tol=-1.0)


def test_source_terms_rotation():
    f, g = source_terms(rigid_rotation(), np.array([[0.1, 0.2], [0.0, -0.5]]))
    np.testing.assert_allclose(f, -2.0)
    np.testing.assert_allclose(g, [0.05, 0.25])


def test_fd_matches_representation(field04):
    p = pressure_fd(field04, 256, 256)
    pts = p.geometry.points()[::37, ::41].reshape(-1, 2)
    ref = p.scalar[::37, ::41].ravel()
    rep = pressure_representation(field04, pts)
    assert np.max(np.abs(rep - ref)) < 1e-2 * np.max(np.abs(ref))


@pytest.mark.parametrize(
    "tf",
    [plane_wave([1.0, 2.0], 0.3), polynomial([[0.0, 1.0, 2.0], [3.0, 0.5, 0.0], [1.0, 0.0, 0.0]]), radial_trig(2.0, 0.1)],
    ids=["wave", "poly", "radial"],
)
def test_test_function_derivatives(tf, rng):
    x = uniform_disk(rng, 20, 0.9)
    h = 1e-5
    for k, e in enumerate(np.eye(2)):
        fd = (tf.value(x + h * e) - tf.value(x - h * e)) / (2 * h)
        np.testing.assert_allclose(fd, tf.gradient(x)[:, k], atol=1e-7)
        fdg = (tf.gradient(x + h * e) - tf.gradient(x - h * e)) / (2 * h)
        np.testing.assert_allclose(fdg, tf.hessian(x)[:, :, k], atol=1e-6)


def test_weak_residual_rotation_harmonic():
    p = pressure_fd(rigid_rotation(), 256, 256)
    assert weak_residual(p, rigid_rotation(), harmonic_quadratic()) < 1e-4


def test_weak_residual_zero(rng):
    g = DiskGrid(32, 64)
    p = GridField(g, np.zeros(g.shape))
    for tf in test_function_library(6, seed=1):
        assert weak_residual(p, zero_field(), tf) < 1e-12


def test_weak_residual_lacunary(field04):
    p = pressure_fd(field04, 256, 256)
    u2 = sample(field04, p.geometry).sup_norm() ** 2
    worst = max(weak_residual(p, field04, tf) for tf in test_function_library(20, seed=0))
    assert worst < 1e-2 * u2


def test_proof_split_coincident_points(field04):
    s = proof_split(field04, [0.1, 0.2], [0.1, 0.2])
    assert s.A == s.B1 == s.B2 == 0.0


@pytest.mark.parametrize("x1,x2", [([0.1, 0.2], [0.15, 0.18]), ([0.85, 0.1], [0.9, 0.15]), ([-0.3, 0.0], [-0.3, 0.01])])
def test_proof_split_reconstruction(field04, x1, x2):
    s = proof_split(field04, x1, x2)
    assert s.reconstruction_error() < 1e-2


def test_proof_split_resolution(field04):
    with pytest.raises(ResolutionError):
        proof_split(field04, [0.1, 0.2], [0.1, 0.2 + 1e-7])
