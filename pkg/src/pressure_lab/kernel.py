"""Green-Neumann function of the unit disk.

With ``Q(x, y) = |x|^2 |y|^2 - 2 x.y + 1 = |x|^2 |y - x*|^2`` (``x* = x/|x|^2``)

    G(x, y) = -1/(2 pi) [log|x - y| + 1/2 log Q(x, y)] + (|x|^2 + |y|^2)/(4 pi) - 3/(8 pi)

solves ``-Lap_y G = delta_x - 1/pi`` with ``d_n G = 0`` on the unit circle,
is symmetric in ``(x, y)`` and has zero mean over the disk in ``y``.  The
``1/2 log Q`` form of the image term is smooth at ``x = 0``.

All functions broadcast over leading axes of ``x`` and ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INV_2PI = 1.0 / (2.0 * np.pi)


class NearSingularityError(ValueError):
    """``|x - y|`` fell below the kernel's regularisation floor."""


def _prep(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    xx = np.einsum("...i,...i->...", x, x)
    yy = np.einsum("...i,...i->...", y, y)
    xy = np.einsum("...i,...i->...", x, y)
    q = xx * yy - 2.0 * xy + 1.0
    return x, y, d, xx, yy, q


@dataclass(frozen=True)
class DiskKernel:
    floor: float = 1e-12

    def _check(self, d):
        dist = np.sqrt(np.einsum("...i,...i->...", d, d))
        if np.any(dist < self.floor):
            raise NearSingularityError(f"|x - y| = {dist.min():.3e} below floor {self.floor:g}")
        return dist

    def green(self, x, y):
        x, y, d, xx, yy, q = _prep(x, y)
        dist = self._check(d)
        return -INV_2PI * (np.log(dist) + 0.5 * np.log(q)) + (xx + yy) / (4.0 * np.pi) - 3.0 / (8.0 * np.pi)

    def gradient(self, x, y):
        """``grad_y G(x, y)``, shape ``(..., 2)``."""
        x, y, d, xx, yy, q = _prep(x, y)
        dist = self._check(d)
        dq = 2.0 * xx[..., None] * y - 2.0 * x
        return -INV_2PI * (d / dist[..., None] ** 2 + 0.5 * dq / q[..., None]) + INV_2PI * y

    def hessian(self, x, y):
        """``Hess_y G(x, y)``, shape ``(..., 2, 2)``."""
        x, y, d, xx, yy, q = _prep(x, y)
        dist = self._check(d)
        eye = np.eye(2)
        r2 = dist[..., None, None] ** 2
        sing = (eye * r2 - 2.0 * d[..., :, None] * d[..., None, :]) / r2**2
        dq = 2.0 * xx[..., None] * y - 2.0 * x
        qq = q[..., None, None]
        img = 0.5 * (2.0 * xx[..., None, None] * eye / qq - dq[..., :, None] * dq[..., None, :] / qq**2)
        return -INV_2PI * (sing + img) + INV_2PI * eye

    def gradient_x(self, x, y):
        """``grad_x G(x, y)`` from the closed form (independent of symmetry)."""
        x, y, d, xx, yy, q = _prep(x, y)
        dist = self._check(d)
        dq = 2.0 * yy[..., None] * x - 2.0 * y
        return -INV_2PI * (-d / dist[..., None] ** 2 + 0.5 * dq / q[..., None]) + INV_2PI * x

    def deriv(self, x, y, beta=(0, 0)):
        """``d_y^beta G`` for a multi-index with ``|beta| <= 2``."""
        beta = tuple(int(b) for b in beta)
        order = sum(beta)
        if len(beta) != 2 or min(beta) < 0 or order > 2:
            raise ValueError(f"unsupported multi-index {beta}")
        if order == 0:
            return self.green(x, y)
        if order == 1:
            return self.gradient(x, y)[..., beta.index(1)]
        idx = [i for i in (0, 1) for _ in range(beta[i])]
        return self.hessian(x, y)[..., idx[0], idx[1]]


DEFAULT_KERNEL = DiskKernel()


def green(x, y):
    return DEFAULT_KERNEL.green(x, y)


def green_deriv(x, y, beta=(0, 0)):
    return DEFAULT_KERNEL.deriv(x, y, beta)


def green_gradient(x, y):
    return DEFAULT_KERNEL.gradient(x, y)


def green_hessian(x, y):
    return DEFAULT_KERNEL.hessian(x, y)


def mean_over_disk(func, n_r: int = 64, n_phi: int = 256) -> float:
    """Polar midpoint quadrature of ``func(points)`` over the unit disk, divided by pi.

    Used to check the additive normalisation of ``G``; the log singularity
    makes it first-order accurate in the radial spacing near the source.
    """
    r = (np.arange(n_r) + 0.5) / n_r
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    pts = np.stack([rr * np.cos(pp), rr * np.sin(pp)], axis=-1)
    w = rr * (1.0 / n_r) * (2.0 * np.pi / n_phi)
    return float(np.sum(func(pts) * w) / np.pi)


# ---------------------------------------------------------------------------
# empirical checks of the pointwise bounds


def uniform_disk(rng, n, radius=1.0):
    r = radius * np.sqrt(rng.uniform(size=n))
    a = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)


_STRATA = (0.0, 0.01, 0.1, 1.0)


@dataclass
class BoundReport:
    label: str
    samples: int
    seed: int
    sup_ratio: float
    argmax: tuple
    strata: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {
            "beta": self.label,
            "samples": self.samples,
            "sup_ratio": self.sup_ratio,
            "argmax": " ".join(f"{c:.6g}" for c in self.argmax),
            "seed": self.seed,
        }


def _strata(dist_to_boundary, ratio):
    out = {}
    for lo, hi in zip(_STRATA[:-1], _STRATA[1:]):
        sel = (dist_to_boundary >= lo) & (dist_to_boundary < hi)
        out[f"[{lo:g},{hi:g})"] = float(ratio[sel].max()) if sel.any() else float("nan")
    return out


def check_pointwise_bound(
    beta, sample_count: int, seed: int = 0, kernel: DiskKernel = DEFAULT_KERNEL, min_distance: float = 0.0
) -> BoundReport:
    """Sup over random pairs of ``|d_y^beta G(x, y)| * |x - y|^|beta|``.

    For ``|beta| = 0`` the ratio is ``|G| / (1 + |log|x - y||)``.  Pairs
    closer than ``min_distance`` are discarded.
    """
    beta = tuple(beta)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = uniform_disk(rng, sample_count)
    y = uniform_disk(rng, sample_count)
    dist = np.linalg.norm(x - y, axis=-1)
    keep = dist > max(min_distance, 10.0 * kernel.floor)
    x, y, dist = x[keep], y[keep], dist[keep]
    val = np.abs(kernel.deriv(x, y, beta))
    order = sum(beta)
    ratio = val / (1.0 + np.abs(np.log(dist))) if order == 0 else val * dist**order
    i = int(np.argmax(ratio))
    db = 1.0 - np.maximum(np.linalg.norm(x, axis=-1), np.linalg.norm(y, axis=-1))
    return BoundReport(
        label="".join(str(b) for b in beta),
        samples=sample_count,
        seed=seed,
        sup_ratio=float(ratio[i]),
        argmax=tuple(x[i]) + tuple(y[i]),
        strata=_strata(db, ratio),
    )


def difference_ratio(x1, x2, y, kernel: DiskKernel = DEFAULT_KERNEL):
    """``max_ij |H_ij(x1, y) - H_ij(x2, y)| * |xbar - y|^3 / h`` for each sample."""
    x1, x2, y = (np.asarray(a, dtype=float) for a in (x1, x2, y))
    h = np.linalg.norm(x1 - x2, axis=-1)
    xbar = 0.5 * (x1 + x2)
    r = np.linalg.norm(xbar - y, axis=-1)
    dh = np.abs(kernel.hessian(x1, y) - kernel.hessian(x2, y)).max(axis=(-2, -1))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(h > 0, dh * r**3 / np.where(h > 0, h, 1.0), 0.0)
    return out


def check_difference_bound(sample_count: int, seed: int = 0, kernel: DiskKernel = DEFAULT_KERNEL) -> BoundReport:
    """Sup of the Hessian-difference ratio over triples with ``|xbar - y| >= h``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    xs, ys = [], []
    n_have = 0
    while n_have < sample_count:
        m = 2 * (sample_count - n_have) + 16
        xbar = uniform_disk(rng, m)
        h = 10.0 ** rng.uniform(-4.0, 0.0, size=m)
        a = rng.uniform(0.0, 2.0 * np.pi, size=m)
        e = np.stack([np.cos(a), np.sin(a)], axis=-1)
        x1 = xbar + 0.5 * h[:, None] * e
        x2 = xbar - 0.5 * h[:, None] * e
        y = uniform_disk(rng, m)
        ok = (
            (np.linalg.norm(x1, axis=-1) < 1.0)
            & (np.linalg.norm(x2, axis=-1) < 1.0)
            & (np.linalg.norm(xbar - y, axis=-1) >= h)
        )
        xs.append(np.stack([x1[ok], x2[ok]], axis=1))
        ys.append(y[ok])
        n_have += int(ok.sum())
    xx = np.concatenate(xs)[:sample_count]
    y = np.concatenate(ys)[:sample_count]
    ratio = difference_ratio(xx[:, 0], xx[:, 1], y, kernel)
    i = int(np.argmax(ratio))
    db = 1.0 - np.max(np.linalg.norm(np.concatenate([xx, y[:, None]], axis=1), axis=-1), axis=1)
    return BoundReport(
        label="diff",
        samples=sample_count,
        seed=seed,
        sup_ratio=float(ratio[i]),
        argmax=tuple(xx[i, 0]) + tuple(xx[i, 1]) + tuple(y[i]),
        strata=_strata(db, ratio),
    )


def hessian_x_derivative(xbar, e, y, eps: float = 1e-4, kernel: DiskKernel = DEFAULT_KERNEL):
    """Central difference of ``Hess_y G(., y)`` along ``e`` at ``xbar``."""
    xbar, e = np.asarray(xbar, float), np.asarray(e, float)
    return (kernel.hessian(xbar + eps * e, y) - kernel.hessian(xbar - eps * e, y)) / (2.0 * eps)


def _pairs(rng, n, min_dist=0.0, radius=1.0):
    x = uniform_disk(rng, 4 * n, radius)
    y = uniform_disk(rng, 4 * n, radius)
    ok = np.linalg.norm(x - y, axis=-1) > min_dist
    return x[ok][:n], y[ok][:n]


def disk_integral_about(x, func, n_phi: int = 256, order: int = 12) -> float:
    """``int_D func(y) dy`` in polar coordinates about ``x`` (handles a log singularity at ``x``)."""
    from .disk import _exit_distance, _ray_rule, _directions

    x = np.asarray(x, float)
    b = _exit_distance(x, _directions(n_phi), (0.0, 0.0), 1.0)
    # dyadic panels shrinking towards rho = 0 resolve rho log rho
    y, w = _ray_rule(x, np.full(n_phi, 1e-12), b, n_phi, order, panel_width=0.125, start_gap=1e-12)
    return float(np.dot(w, func(y)))


def defining_residuals(seed: int = 0, kernel: DiskKernel = DEFAULT_KERNEL) -> dict:
    """Residuals of the defining problem and the closed-form derivatives.

    Keys: ``symmetry``, ``pde``, ``boundary``, ``zero_mean``, ``hessian_trace``,
    ``fd_gradient``, ``fd_hessian`` and ``gradient_symmetry``; each value is a
    maximum absolute (or relative, for the last three) deviation.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = {}

    x, y = _pairs(rng, 10_000, 1e-6)
    out["symmetry"] = float(np.max(np.abs(kernel.green(x, y) - kernel.green(y, x))))

    # 5-point Laplacian in y, h = 1e-3, away from x and its image point
    h = 1e-3
    x, y = _pairs(rng, 200, 0.3, radius=0.8)
    lap = sum(
        kernel.green(x, y + s * h * np.eye(2)[a]) for a in (0, 1) for s in (1.0, -1.0)
    ) - 4.0 * kernel.green(x, y)
    out["pde"] = float(np.max(np.abs(lap / h**2 - 1.0 / np.pi)))

    # one-sided second-order radial derivative on the rim
    x = uniform_disk(rng, 1000, 0.9)
    a = rng.uniform(0.0, 2.0 * np.pi, 1000)
    n = np.stack([np.cos(a), np.sin(a)], axis=-1)
    hb = 1e-4
    g0, g1, g2 = (kernel.green(x, (1.0 - k * hb) * n) for k in (0, 1, 2))
    out["boundary"] = float(np.max(np.abs((3.0 * g0 - 4.0 * g1 + g2) / (2.0 * hb))))

    xs = uniform_disk(rng, 8, 0.95)
    out["zero_mean"] = max(abs(disk_integral_about(xi, lambda yy: kernel.green(xi, yy))) for xi in xs)

    x, y = _pairs(rng, 1000, 0.05)
    tr = np.trace(kernel.hessian(x, y), axis1=-2, axis2=-1)
    out["hessian_trace"] = float(np.max(np.abs(tr - 1.0 / np.pi)))

    he = 1e-5
    x, y = _pairs(rng, 100, 0.2, radius=0.8)
    grad = kernel.gradient(x, y)
    fd = np.stack(
        [(kernel.green(x, y + he * e) - kernel.green(x, y - he * e)) / (2 * he) for e in np.eye(2)], axis=-1
    )
    out["fd_gradient"] = float(np.max(np.abs(fd - grad)) / np.max(np.abs(grad)))
    hess = kernel.hessian(x, y)
    fdh = np.stack(
        [(kernel.gradient(x, y + he * e) - kernel.gradient(x, y - he * e)) / (2 * he) for e in np.eye(2)], axis=-1
    )
    out["fd_hessian"] = float(np.max(np.abs(fdh - hess)) / np.max(np.abs(hess)))

    x, z = _pairs(rng, 1000, 1e-3)
    gx = kernel.gradient_x(x, z)
    gy = kernel.gradient(z, x)
    out["gradient_symmetry"] = float(np.max(np.abs(gx - gy)) / np.max(np.abs(gy)))
    return out


RESIDUAL_TOLERANCES = {
    "symmetry": 1e-10,
    "pde": 1e-4,
    "boundary": 1e-6,
    "zero_mean": 1e-8,
    "hessian_trace": 1e-8,
    "fd_gradient": 1e-6,
    "fd_hessian": 1e-6,
    "gradient_symmetry": 1e-6,
}


__all__ = [
    "BoundReport",
    "RESIDUAL_TOLERANCES",
    "defining_residuals",
    "disk_integral_about",
    "DEFAULT_KERNEL",
    "DiskKernel",
    "NearSingularityError",
    "check_difference_bound",
    "check_pointwise_bound",
    "difference_ratio",
    "green",
    "green_deriv",
    "green_gradient",
    "green_hessian",
    "hessian_x_derivative",
    "mean_over_disk",
    "uniform_disk",
]
