"""Pressure on the unit disk: representation formula, finite differences, weak form.

Two independent solvers are provided.

``pressure_representation`` evaluates

    p(x) - mean(p) = int_D  d2_{y_i y_j} G(x, y) (u_i(y) - u_i(x)) u_j(y) dy

by quadrature in polar coordinates centred at the target ``x``.  In those
coordinates the Jacobian ``rho`` cancels the ``1/rho`` behaviour of the
desingularised integrand, so Gauss-Legendre panels in ``rho`` and the
trapezoid rule in angle converge quickly.  Because every ray from an interior
point leaves the disk at a closed-form distance, the region is covered
exactly: the weights integrate ``1`` to ``pi`` up to roundoff.

``pressure_fd`` solves ``-Lap p = d_i u_j d_j u_i`` with ``d_r p = |u|^2``
on ``r = 1`` by an angular FFT and cell-centred finite volumes in ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .fields import StreamSeries, VelocityFieldSpec, eval_field
from .grid import DiskGrid, GridField
from .kernel import DEFAULT_KERNEL, DiskKernel


class ResolutionError(ValueError):
    """A quadrature parameter fell below what the scheme can resolve."""


class DataInconsistencyError(RuntimeError):
    """The Neumann data are incompatible with the interior source."""


@lru_cache(maxsize=32)
def _gauss(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


def _exit_distance(x, e, center, radius):
    """Distance from ``x`` along unit rows ``e`` to the circle ``|y - center| = radius``."""
    xc = np.asarray(x, float) - np.asarray(center, float)
    b = e @ xc
    disc = b * b + radius * radius - xc @ xc
    return -b + np.sqrt(np.maximum(disc, 0.0))


def _directions(n_phi):
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


@dataclass(frozen=True)
class QuadratureScheme:
    """Two-tier polar quadrature about a target point.

    The near field ``rho < delta`` uses ``near_nr`` Gauss nodes in ``rho`` and
    ``near_nphi`` angles.  The far field runs from ``delta`` to the disk
    boundary on ``far_nphi`` angles with Gauss panels of order ``order`` and
    width at most ``panel_width``, refined geometrically towards the boundary
    where the image singularity sits just outside the disk.
    """

    delta: float = 0.05
    near_nr: int = 16
    near_nphi: int = 64
    far_nphi: int = 512
    panel_width: float = 1.0 / 16.0
    order: int = 8
    min_delta: float = 1e-6

    def __post_init__(self):
        if self.delta <= 0 or self.panel_width <= 0:
            raise ValueError("delta and panel_width must be positive")
        if min(self.near_nr, self.near_nphi, self.far_nphi, self.order) < 1:
            raise ValueError("node counts must be positive")

    def refined(self) -> QuadratureScheme:
        """Half the near-field radius with twice the near-field nodes."""
        return replace(self, delta=self.delta / 2, near_nr=2 * self.near_nr, near_nphi=2 * self.near_nphi)

    def delta_at(self, x) -> float:
        d = min(self.delta, 0.9 * (1.0 - float(np.linalg.norm(x))))
        if d < self.min_delta:
            raise ResolutionError(f"target {tuple(x)} too close to the boundary (delta={d:.2e})")
        return d

    def nodes(self, x):
        """Nodes and weights covering the whole disk in polar coordinates about ``x``."""
        x = np.asarray(x, float)
        d = self.delta_at(x)
        near = _ray_rule(x, np.zeros(self.near_nphi), np.full(self.near_nphi, d), self.near_nphi,
                         self.near_nr, panel_width=d)
        e = _directions(self.far_nphi)
        far = _ray_rule(
            x,
            np.full(self.far_nphi, d),
            _exit_distance(x, e, (0.0, 0.0), 1.0),
            self.far_nphi,
            self.order,
            panel_width=self.panel_width,
            end_gap=0.5 * (1.0 - float(np.linalg.norm(x))),
        )
        return np.concatenate([near[0], far[0]]), np.concatenate([near[1], far[1]])


def _ray_rule(origin, a, b, n_phi, order, panel_width, start_gap=None, end_gap=None):
    """Quadrature over ``{origin + rho e(phi) : a(phi) <= rho <= b(phi)}``.

    Breakpoints along each ray are the union of a uniform grid of step
    ``panel_width``, a geometric refinement away from ``a`` (first gap
    ``start_gap``) and one towards ``b`` (last gap ``end_gap``).
    """
    e = _directions(n_phi)
    a = np.asarray(a, float)
    b = np.maximum(np.asarray(b, float), a)
    span = float(np.max(b)) if b.size else 0.0
    cands = [a[:, None], b[:, None]]
    n_uni = int(math.ceil(span / panel_width)) + 1
    cands.append(np.broadcast_to(panel_width * np.arange(1, n_uni + 1), (n_phi, n_uni)))
    if start_gap is not None and start_gap > 0:
        k = np.arange(int(math.ceil(math.log2(max(span / start_gap, 2.0)))) + 1)
        cands.append(a[:, None] + start_gap * (2.0**k - 1.0)[None, :])
    if end_gap is not None and end_gap > 0:
        top = max(panel_width, end_gap)
        k = np.arange(int(math.ceil(math.log2(top / end_gap))) + 1)
        cands.append(b[:, None] - end_gap * (2.0**k)[None, :])
    c = np.concatenate([np.broadcast_to(x, (n_phi, x.shape[1])) for x in cands], axis=1)
    c = np.sort(np.clip(c, a[:, None], b[:, None]), axis=1)
    lo, hi = c[:, :-1], c[:, 1:]
    t, w = _gauss(order)
    rho = lo[..., None] + (hi - lo)[..., None] * t
    wt = (hi - lo)[..., None] * w * rho * (2.0 * np.pi / n_phi)
    keep = (hi - lo) > 0
    rho, wt = rho[keep], wt[keep]
    dirs = np.broadcast_to(e[:, None, None, :], lo.shape + (order, 2))[keep]
    pts = origin + rho[..., None] * dirs
    return pts.reshape(-1, 2), wt.reshape(-1)


# ---------------------------------------------------------------------------
# representation formula


def _integrand(kernel, x, y, ux, uy):
    h = kernel.hessian(x, y)
    return np.einsum("nij,ni,nj->n", h, uy - ux, uy)


def _stream(spec):
    if spec.domain != "disk":
        raise ValueError("disk solvers need a disk field")
    return StreamSeries.from_spec(spec)


def pressure_representation(
    spec: VelocityFieldSpec,
    targets,
    scheme: QuadratureScheme | None = None,
    kernel: DiskKernel = DEFAULT_KERNEL,
    reference: DiskGrid | None = None,
) -> np.ndarray:
    """Zero-average pressure at ``targets`` from the representation formula.

    The formula already yields ``p`` minus its disk mean.  Passing a
    ``reference`` grid additionally evaluates ``p`` there and subtracts the
    grid quadrature mean.
    """
    scheme = scheme or QuadratureScheme()
    series = _stream(spec)
    pts = np.atleast_2d(np.asarray(targets, float))
    if np.any(np.linalg.norm(pts, axis=1) >= 1.0):
        raise ResolutionError("targets must lie strictly inside the disk")
    out = np.empty(len(pts))
    for i, x in enumerate(pts):
        y, w = scheme.nodes(x)
        ux = series.velocity(x[None, :])[0]
        uy = series.velocity(y)
        out[i] = np.dot(w, _integrand(kernel, x, y, ux, uy))
    if reference is not None:
        ref = pressure_representation(spec, reference.points().reshape(-1, 2), scheme, kernel)
        out -= np.dot(ref, reference.weights().ravel()) / np.pi
    return out


def read_targets(path) -> np.ndarray:
    """Target points from a CSV file with header ``x1,x2``."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names or ()
    if "x1" not in names or "x2" not in names:
        raise ValueError("target CSV needs x1 and x2 columns")
    return np.stack([np.atleast_1d(data["x1"]), np.atleast_1d(data["x2"])], axis=-1)


def representation_grid(spec, grid: DiskGrid, scheme: QuadratureScheme | None = None) -> GridField:
    """Representation pressure sampled on every node of a polar grid."""
    vals = pressure_representation(spec, grid.points().reshape(-1, 2), scheme)
    return GridField(grid, vals.reshape(grid.shape), label="p_rep")


# ---------------------------------------------------------------------------
# finite differences


def source_terms(spec: VelocityFieldSpec, points):
    """``(d_i u_j d_j u_i, |u|^2)`` at ``points``."""
    series = _stream(spec)
    pts = np.asarray(points, float).reshape(-1, 2)
    jac = series.velocity(pts, 1)
    u = series.velocity(pts)
    f = np.einsum("nij,nji->n", jac, jac)
    return f, np.einsum("ni,ni->n", u, u)


def compatibility_residual(spec: VelocityFieldSpec, n_r: int = 256, n_phi: int = 512) -> tuple[float, float]:
    """``(int_D F + int_{dD} |u|^2, int_{dD} |u|^2)`` with Gauss-Legendre radial quadrature."""
    t, w = _gauss(n_r)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    rr, pp = np.meshgrid(t, phi, indexing="ij")
    pts = np.stack([rr * np.cos(pp), rr * np.sin(pp)], axis=-1).reshape(-1, 2)
    f, _ = source_terms(spec, pts)
    vol = float(np.sum(f.reshape(n_r, n_phi) * (w * t)[:, None]) * 2.0 * np.pi / n_phi)
    b = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    _, g = source_terms(spec, b)
    bnd = float(np.sum(g) * 2.0 * np.pi / n_phi)
    return vol + bnd, bnd


def pressure_fd(spec: VelocityFieldSpec, n_r: int = 256, n_phi: int = 256, compat_tol: float = 1e-6) -> GridField:
    """Zero-average finite-volume pressure on ``DiskGrid(n_r, n_phi)``."""
    grid = DiskGrid(n_r, n_phi)
    res, scale = compatibility_residual(spec, max(2 * n_r, 64), max(n_phi, 256))
    if abs(res) > compat_tol * max(scale, 1.0):
        raise DataInconsistencyError(f"m=0 compatibility residual {res:.3e} exceeds tolerance")

    f, _ = source_terms(spec, grid.points())
    f = f.reshape(grid.shape)
    phi = grid.angles
    _, g = source_terms(spec, np.stack([np.cos(phi), np.sin(phi)], axis=-1))
    fh = np.fft.rfft(f, axis=1)
    gh = np.fft.rfft(g)

    dr = grid.dr
    r = grid.radii
    faces = np.arange(n_r + 1) * dr  # faces[0] = 0, faces[-1] = 1
    rhs = r[:, None] * dr * fh

    # m = 0: flux recursion after projecting onto the solvable subspace
    rhs0 = rhs[:, 0].real.copy()
    mismatch = rhs0.sum() + gh[0].real
    rhs0 -= mismatch * r * dr / np.sum(r * dr)
    flux = -np.cumsum(rhs0)[:-1]  # r dp/dr at interior faces
    p0 = np.concatenate([[0.0], np.cumsum(dr * flux / faces[1:-1])])

    # m >= 1: tridiagonal solves, vectorised over modes (Thomas algorithm)
    m = np.arange(fh.shape[1])[1:]
    lower = -faces[:-1] / dr
    upper = -faces[1:] / dr
    upper[-1] = 0.0
    diag = (faces[:-1] + faces[1:]) / dr
    diag[-1] = faces[-2] / dr
    d = rhs[:, 1:].copy()
    d[-1] += gh[1:]
    b = diag[:, None] + (m**2)[None, :] * dr / r[:, None]
    cp = np.zeros_like(b)
    dp = np.zeros_like(d)
    cp[0] = upper[0] / b[0]
    dp[0] = d[0] / b[0]
    for i in range(1, n_r):
        den = b[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / den
        dp[i] = (d[i] - lower[i] * dp[i - 1]) / den
    pm = np.empty_like(d)
    pm[-1] = dp[-1]
    for i in range(n_r - 2, -1, -1):
        pm[i] = dp[i] - cp[i] * pm[i + 1]

    ph = np.concatenate([p0[:, None].astype(complex), pm], axis=1)
    p = np.fft.irfft(ph, n=n_phi, axis=1)
    return GridField(grid, p, zero_average=True, label="p_fd")


# ---------------------------------------------------------------------------
# weak formulation


@dataclass(frozen=True)
class TestFunction:
    """Closed-form ``C^2`` test function with gradient and Hessian."""

    name: str
    value: object
    gradient: object
    hessian: object

    __test__ = False  # not a pytest class

    def laplacian(self, x):
        return np.trace(self.hessian(x), axis1=-2, axis2=-1)

    def normal_derivative(self, x):
        # on the unit circle the outward normal is x itself
        return np.einsum("...i,...i->...", self.gradient(x), x)


def plane_wave(k, c: float = 0.0) -> TestFunction:
    k = np.asarray(k, float)

    def value(x):
        return np.cos(x @ k + c)

    def grad(x):
        return -np.sin(x @ k + c)[..., None] * k

    def hess(x):
        return -np.cos(x @ k + c)[..., None, None] * np.outer(k, k)

    return TestFunction(f"cos(k.x+c) k={tuple(np.round(k, 4))} c={c:.4f}", value, grad, hess)


def polynomial(coef) -> TestFunction:
    """``sum_ab coef[a, b] x1^a x2^b``."""
    from numpy.polynomial import polynomial as P

    c = np.asarray(coef, float)
    d1, d2 = P.polyder(c, axis=0), P.polyder(c, axis=1)
    d11, d22, d12 = P.polyder(c, 2, axis=0), P.polyder(c, 2, axis=1), P.polyder(d1, axis=1)

    def value(x):
        return P.polyval2d(x[..., 0], x[..., 1], c)

    def grad(x):
        return np.stack([P.polyval2d(x[..., 0], x[..., 1], d) for d in (d1, d2)], axis=-1)

    def hess(x):
        a = P.polyval2d(x[..., 0], x[..., 1], d11)
        b = P.polyval2d(x[..., 0], x[..., 1], d12)
        e = P.polyval2d(x[..., 0], x[..., 1], d22)
        return np.stack([np.stack([a, b], -1), np.stack([b, e], -1)], -2)

    return TestFunction(f"poly deg {c.shape[0] - 1}", value, grad, hess)


def radial_trig(a: float, c: float = 0.0) -> TestFunction:
    """``cos(a |x|^2 + c)``."""

    def value(x):
        return np.cos(a * np.einsum("...i,...i->...", x, x) + c)

    def grad(x):
        s = np.einsum("...i,...i->...", x, x)
        return (-2.0 * a * np.sin(a * s + c))[..., None] * x

    def hess(x):
        s = np.einsum("...i,...i->...", x, x)
        f1 = -a * np.sin(a * s + c)
        f2 = -a * a * np.cos(a * s + c)
        return 2.0 * f1[..., None, None] * np.eye(2) + 4.0 * f2[..., None, None] * x[..., :, None] * x[..., None, :]

    return TestFunction(f"cos({a:.4f}|x|^2+{c:.4f})", value, grad, hess)


def harmonic_quadratic() -> TestFunction:
    """``y1^2 - y2^2``."""
    return polynomial([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])


def test_function_library(count: int = 20, seed: int = 0) -> list[TestFunction]:
    """Seeded mix of plane waves, random polynomials and radial trigonometric functions."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            a = rng.uniform(0, 2 * np.pi)
            out.append(plane_wave(rng.uniform(0.5, 4.0) * np.array([np.cos(a), np.sin(a)]), rng.uniform(0, 2 * np.pi)))
        elif kind == 1:
            deg = int(rng.integers(2, 5))
            coef = np.triu(rng.standard_normal((deg + 1, deg + 1))[:, ::-1])[:, ::-1]
            out.append(polynomial(coef))
        else:
            out.append(radial_trig(rng.uniform(0.5, 4.0), rng.uniform(0, 2 * np.pi)))
    return out


test_function_library.__test__ = False


def boundary_trace(p: GridField) -> np.ndarray:
    """Linear extrapolation of ``p`` from the two outermost cell rings to ``r = 1``."""
    v = p.scalar
    return 1.5 * v[-1] - 0.5 * v[-2]


def weak_residual(p: GridField, spec: VelocityFieldSpec, test_function: TestFunction) -> float:
    """``| -int p Lap phi + int_{dD} p d_n phi - int u (x) u : Hess phi |`` on the grid of ``p``."""
    grid = p.geometry
    if not isinstance(grid, DiskGrid):
        raise ValueError("weak residual needs a disk grid field")
    x = grid.points()
    w = grid.weights()
    vol = np.sum(w * p.scalar * test_function.laplacian(x))
    b = np.stack([np.cos(grid.angles), np.sin(grid.angles)], axis=-1)
    bnd = np.sum(boundary_trace(p) * test_function.normal_derivative(b)) * grid.dphi
    u = eval_field(spec, x)
    src = np.sum(w * np.einsum("...i,...j,...ij->...", u, u, test_function.hessian(x)))
    return float(abs(-vol + bnd - src))


# ---------------------------------------------------------------------------
# proof decomposition


@dataclass
class ProofSplit:
    x1: tuple
    x2: tuple
    lam: float
    A: float
    B1: float
    B2: float
    direct: float = float("nan")
    extras: dict = field(default_factory=dict)

    @property
    def reconstructed(self) -> float:
        return self.A + self.B1 + self.B2

    def reconstruction_error(self) -> float:
        """``|A + B1 + B2 - (p(x1) - p(x2))| / (|A| + |B1| + |B2|)``."""
        scale = abs(self.A) + abs(self.B1) + abs(self.B2)
        err = abs(self.reconstructed - self.direct)
        return err / scale if scale > 0 else err

    def row(self) -> dict:
        return {
            "x1": " ".join(f"{c:.6g}" for c in self.x1),
            "x2": " ".join(f"{c:.6g}" for c in self.x2),
            "lambda": self.lam,
            "A": self.A,
            "B1": self.B1,
            "B2": self.B2,
            "reconstructed": self.reconstructed,
            "direct": self.direct,
        }


def _arc_rule(center, radius, n):
    """Nodes, weights and inward normals on the part of ``dB(center, radius)`` inside the disk."""
    c = np.asarray(center, float)
    cn = float(np.linalg.norm(c))
    if cn + radius < 1.0:
        phi = 2.0 * np.pi * np.arange(n) / n
        w = np.full(n, 2.0 * np.pi * radius / n)
    else:
        # inside iff cos(phi - phi_c) < (1 - |c|^2 - radius^2) / (2 radius |c|)
        cos_lim = (1.0 - cn**2 - radius**2) / (2.0 * radius * cn)
        if cos_lim <= -1.0:
            return np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2))
        a0 = math.acos(min(cos_lim, 1.0))
        t, wt = _gauss(n)
        phi = math.atan2(c[1], c[0]) + a0 + (2.0 * np.pi - 2.0 * a0) * t
        w = (2.0 * np.pi - 2.0 * a0) * wt * radius
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return c + radius * e, w, -e


def proof_split(
    spec: VelocityFieldSpec,
    x1,
    x2,
    scheme: QuadratureScheme | None = None,
    kernel: DiskKernel = DEFAULT_KERNEL,
    with_direct: bool = True,
    min_lambda: float = 1e-5,
) -> ProofSplit:
    """Split ``p(x1) - p(x2)`` into the ball term ``A`` and the outer terms ``B1``, ``B2``.

    With ``xbar`` the midpoint and ``lam = |x1 - x2|``, ``B = B(xbar, lam)``:

    * ``A``  = int over ``D & B`` of both desingularised integrands (difference),
    * ``B1`` = int over ``D \\ B`` of ``(H(x1, y) - H(x2, y)) : (u(y) - u(x1)) (x) u(y)``,
    * ``B2`` = ``(u_i(x2) - u_i(x1)) int_{dB & D} d_{y_i} G(x2, y) u(y).nu ds``

    where ``nu`` points into the ball (outward from ``D \\ B``); the boundary
    of the disk contributes nothing because ``u.n = 0`` there.
    """
    scheme = scheme or QuadratureScheme()
    series = _stream(spec)
    x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
    lam = float(np.linalg.norm(x1 - x2))
    if lam == 0.0:
        return ProofSplit(tuple(x1), tuple(x2), 0.0, 0.0, 0.0, 0.0, direct=0.0 if with_direct else float("nan"))
    if lam < min_lambda:
        raise ResolutionError(f"lambda={lam:.2e} below the near-field resolution {min_lambda:.1e}")
    for x in (x1, x2):
        if np.linalg.norm(x) >= 1.0:
            raise ResolutionError("base points must lie inside the disk")
    xbar = 0.5 * (x1 + x2)
    u1 = series.velocity(x1[None, :])[0]
    u2 = series.velocity(x2[None, :])[0]
    n_near = scheme.far_nphi
    order = scheme.order

    def ball_term(x, ux):
        e = _directions(n_near)
        b = np.minimum(_exit_distance(x, e, xbar, lam), _exit_distance(x, e, (0.0, 0.0), 1.0))
        y, w = _ray_rule(x, np.zeros(n_near), b, n_near, order, panel_width=min(scheme.panel_width, lam / 2))
        return float(np.dot(w, _integrand(kernel, x, y, ux, series.velocity(y))))

    A = ball_term(x1, u1) - ball_term(x2, u2)

    e = _directions(scheme.far_nphi)
    y, w = _ray_rule(
        xbar,
        np.full(scheme.far_nphi, lam),
        _exit_distance(xbar, e, (0.0, 0.0), 1.0),
        scheme.far_nphi,
        order,
        panel_width=scheme.panel_width,
        start_gap=lam / 2,
        end_gap=0.5 * (1.0 - float(np.linalg.norm(xbar))),
    )
    uy = series.velocity(y)
    dh = kernel.hessian(x1, y) - kernel.hessian(x2, y)
    B1 = float(np.dot(w, np.einsum("nij,ni,nj->n", dh, uy - u1, uy)))

    ya, wa, nu = _arc_rule(xbar, lam, max(scheme.near_nphi, 64))
    if len(wa):
        ua = series.velocity(ya)
        flux = np.einsum("ni,ni->n", ua, nu)
        gk = kernel.gradient(x2, ya)
        B2 = float(np.dot(u2 - u1, np.einsum("ni,n,n->i", gk, flux, wa)))
    else:
        B2 = 0.0

    direct = float("nan")
    if with_direct:
        pv = pressure_representation(spec, np.stack([x1, x2]), scheme, kernel)
        direct = float(pv[0] - pv[1])
    return ProofSplit(tuple(x1), tuple(x2), lam, A, B1, B2, direct=direct)


__all__ = [
    "DataInconsistencyError",
    "ProofSplit",
    "QuadratureScheme",
    "ResolutionError",
    "TestFunction",
    "boundary_trace",
    "compatibility_residual",
    "harmonic_quadratic",
    "plane_wave",
    "polynomial",
    "pressure_fd",
    "pressure_representation",
    "proof_split",
    "radial_trig",
    "read_targets",
    "representation_grid",
    "source_terms",
    "test_function_library",
    "weak_residual",
]
