"""Synthetic Hölder velocity fields with closed-form derivatives.

Two families are provided:

* torus fields ``u = U + sum_m a_m sigma_m cos(k_m . x + phi_m) + grad f`` on
  ``[0, 2*pi)^d`` with integer wavevectors ``|k_m| ~ 2^j`` and polarisations
  ``sigma_m`` orthogonal to ``k_m`` (so the lacunary part is solenoidal);
* disk fields ``u = grad_perp psi`` with ``psi = (1 - |x|^2) S(x)`` and
  ``S = c + sum_m a_m cos(k_m . x + phi_m)``, which are solenoidal and
  tangent to the unit circle by construction.

With amplitudes ``2^(-j*theta)`` per octave for the velocity (``2^(-j(1+theta))``
for a stream function) the lacunary series realise exactly ``C^theta``.

Everything here is exact: evaluation and Jacobians are closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import DiskGrid, GridField

_CHUNK = 1 << 17


class DomainError(ValueError):
    """A point lies outside the domain of the field."""


class CompatibilityError(RuntimeError):
    """Boundary flux of a correction problem does not integrate to zero."""


@dataclass(frozen=True)
class LacunaryMode:
    """One Fourier mode ``amplitude * cos(wavevector . x + phase)``.

    ``wavevector`` has length ``2**octave`` up to integer rounding on the
    torus; ``direction`` is its normalisation. ``polarization`` is only set
    for torus velocity modes.
    """

    octave: int
    wavevector: tuple[float, ...]
    phase: float
    amplitude: float
    polarization: tuple[float, ...] | None = None

    @property
    def direction(self) -> np.ndarray:
        k = np.asarray(self.wavevector, dtype=float)
        return k / np.linalg.norm(k)


@dataclass(frozen=True)
class TrigTerm:
    """Scalar term ``coefficient * cos(wavevector . x + phase)``."""

    coefficient: float
    wavevector: tuple[float, ...]
    phase: float = 0.0


def sin_product_potential(dim: int = 2, scale: float = 1.0) -> tuple[TrigTerm, ...]:
    """``f = scale * sin x1 sin x2`` written as trigonometric terms."""
    e = np.eye(dim)
    half = 0.5 * scale
    return (
        TrigTerm(half, tuple(e[0] - e[1])),
        TrigTerm(-half, tuple(e[0] + e[1])),
    )


@dataclass(frozen=True)
class VelocityFieldSpec:
    domain: str  # "torus" or "disk"
    dim: int
    theta: float
    modes: tuple[LacunaryMode, ...] = ()
    seed: int | None = None
    gradient_part: tuple[TrigTerm, ...] = ()
    mean_flow: tuple[float, ...] | None = None
    stream_offset: float = 0.0

    def __post_init__(self):
        if self.domain not in ("torus", "disk"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.domain == "disk":
            if self.dim != 2:
                raise ValueError("disk fields are planar")
            if self.gradient_part or self.mean_flow is not None:
                raise ValueError("disk fields are pure stream-function fields")
        elif self.dim not in (2, 3):
            raise ValueError(f"torus dimension must be 2 or 3, got {self.dim}")

    @property
    def envelope(self) -> str | None:
        return "1-|x|^2" if self.domain == "disk" else None

    def __call__(self, points, derivative_order: int = 0) -> np.ndarray:
        return eval_field(self, points, derivative_order)

    # serialisation -------------------------------------------------------

    def to_text(self) -> str:
        doc = {
            "domain": self.domain,
            "dim": self.dim,
            "theta": self.theta,
            "seed": self.seed,
            "envelope": self.envelope,
            "stream_offset": self.stream_offset,
            "mean_flow": None if self.mean_flow is None else list(self.mean_flow),
            "modes": [
                {
                    "octave": m.octave,
                    "wavevector": list(m.wavevector),
                    "polarization": None if m.polarization is None else list(m.polarization),
                    "phase": m.phase,
                    "amplitude": m.amplitude,
                }
                for m in self.modes
            ],
            "gradient_part": [
                {"coefficient": t.coefficient, "wavevector": list(t.wavevector), "phase": t.phase}
                for t in self.gradient_part
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_text(cls, text: str) -> VelocityFieldSpec:
        doc = json.loads(text)
        modes = tuple(
            LacunaryMode(
                octave=m["octave"],
                wavevector=tuple(m["wavevector"]),
                phase=m["phase"],
                amplitude=m["amplitude"],
                polarization=None if m["polarization"] is None else tuple(m["polarization"]),
            )
            for m in doc["modes"]
        )
        grad = tuple(
            TrigTerm(t["coefficient"], tuple(t["wavevector"]), t["phase"])
            for t in doc.get("gradient_part", [])
        )
        mean = doc.get("mean_flow")
        return cls(
            domain=doc["domain"],
            dim=doc["dim"],
            theta=doc["theta"],
            modes=modes,
            seed=doc.get("seed"),
            gradient_part=grad,
            mean_flow=None if mean is None else tuple(mean),
            stream_offset=doc.get("stream_offset", 0.0),
        )


def _check_theta(theta):
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")


def max_octave(n: int) -> int:
    """Largest octave ``J`` with ``2**J <= n / 8``."""
    return int(math.floor(math.log2(n / 8)))


def _random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def make_torus_field(
    dim: int,
    theta: float,
    octaves: int,
    modes_per_octave: int = 4,
    seed: int = 0,
    gradient_part: tuple[TrigTerm, ...] = (),
) -> VelocityFieldSpec:
    """Random lacunary divergence-free field on the torus, octaves ``0..octaves``."""
    _check_theta(theta)
    if dim not in (2, 3):
        raise ValueError(f"torus dimension must be 2 or 3, got {dim}")
    if octaves < 0 or modes_per_octave < 1:
        raise ValueError("need octaves >= 0 and modes_per_octave >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    amp_scale = 1.0 / math.sqrt(modes_per_octave)
    modes = []
    for j in range(octaves + 1):
        for _ in range(modes_per_octave):
            # integer wavevector close to 2^j e for a random unit e
            while True:
                k = np.rint(2.0**j * _random_unit(rng, dim))
                if np.any(k):
                    break
            if dim == 2:
                sigma = np.array([-k[1], k[0]])
            else:
                sigma = _random_unit(rng, dim)
                sigma -= (sigma @ k) / (k @ k) * k
            sigma /= np.linalg.norm(sigma)
            modes.append(
                LacunaryMode(
                    octave=j,
                    wavevector=tuple(float(c) for c in k),
                    phase=float(rng.uniform(0.0, 2.0 * np.pi)),
                    amplitude=amp_scale * 2.0 ** (-j * theta),
                    polarization=tuple(float(c) for c in sigma),
                )
            )
    return VelocityFieldSpec(
        domain="torus",
        dim=dim,
        theta=theta,
        modes=tuple(modes),
        seed=seed,
        gradient_part=tuple(gradient_part),
    )


def make_disk_field(
    theta: float,
    octaves: int,
    seed: int = 0,
    modes_per_octave: int = 1,
) -> VelocityFieldSpec:
    """Random lacunary stream-function field on the unit disk."""
    _check_theta(theta)
    if octaves < 0 or modes_per_octave < 1:
        raise ValueError("need octaves >= 0 and modes_per_octave >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    amp_scale = 1.0 / math.sqrt(modes_per_octave)
    modes = []
    for j in range(octaves + 1):
        for _ in range(modes_per_octave):
            k = 2.0**j * _random_unit(rng, 2)
            modes.append(
                LacunaryMode(
                    octave=j,
                    wavevector=(float(k[0]), float(k[1])),
                    phase=float(rng.uniform(0.0, 2.0 * np.pi)),
                    amplitude=amp_scale * 2.0 ** (-j * (1.0 + theta)),
                )
            )
    return VelocityFieldSpec(domain="disk", dim=2, theta=theta, modes=tuple(modes), seed=seed)


def rigid_rotation(theta: float = 0.5) -> VelocityFieldSpec:
    """``psi = (1 - |x|^2) / 2``, i.e. ``u = (x2, -x1)``."""
    return VelocityFieldSpec(domain="disk", dim=2, theta=theta, stream_offset=0.5)


def zero_field(domain: str = "disk", dim: int = 2, theta: float = 0.5) -> VelocityFieldSpec:
    return VelocityFieldSpec(domain=domain, dim=dim, theta=theta)


# ---------------------------------------------------------------------------
# stream-function series: psi = Re sum_m R_m(x) exp(i (k_m . x + phi_m)),
# with R_m(x) = r0 + r1 . x + r2 |x|^2 complex quadratic polynomials.


@dataclass
class StreamSeries:
    wavevectors: np.ndarray  # (m, 2)
    phases: np.ndarray  # (m,)
    r0: np.ndarray  # (m,) complex
    r1: np.ndarray  # (m, 2) complex
    r2: np.ndarray  # (m,) complex

    @classmethod
    def from_spec(cls, spec: VelocityFieldSpec) -> StreamSeries:
        ks = [m.wavevector for m in spec.modes]
        ph = [m.phase for m in spec.modes]
        amp = [m.amplitude for m in spec.modes]
        if spec.stream_offset != 0.0:
            ks.append((0.0, 0.0))
            ph.append(0.0)
            amp.append(spec.stream_offset)
        amp = np.asarray(amp, dtype=complex)
        n = amp.size
        return cls(
            wavevectors=np.asarray(ks, dtype=float).reshape(n, 2),
            phases=np.asarray(ph, dtype=float),
            r0=amp,
            r1=np.zeros((n, 2), dtype=complex),
            r2=-amp,
        )

    def derivatives(self, points: np.ndarray, order: int) -> list[np.ndarray]:
        """Derivatives of psi at ``points`` of order 0..``order`` (at most 2).

        Returns ``[psi, grad psi, hess psi]`` truncated to ``order + 1`` entries,
        with shapes ``(n,)``, ``(n, 2)`` and ``(n, 2, 2)``.
        """
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        out = [np.zeros(n), np.zeros((n, 2)), np.zeros((n, 2, 2))][: order + 1]
        if self.phases.size == 0:
            return out
        k = self.wavevectors
        step = 1 << 13
        for s in range(0, n, step):
            x = points[s : s + step]
            e = np.exp(1j * (x @ k.T + self.phases))  # (c, m)
            xx = np.einsum("ci,ci->c", x, x)
            rv = self.r0 + x @ self.r1.T + xx[:, None] * self.r2  # R(x)
            out[0][s : s + step] = np.real(rv * e).sum(axis=1)
            if order >= 1:
                # dR_a = r1_a + 2 r2 x_a
                dr = self.r1[None, :, :] + 2.0 * self.r2[None, :, None] * x[:, None, :]
                g = dr + 1j * k[None, :, :] * rv[:, :, None]
                out[1][s : s + step] = np.real(g * e[:, :, None]).sum(axis=1)
            if order >= 2:
                eye = np.eye(2)
                h = (
                    2.0 * self.r2[None, :, None, None] * eye
                    + 1j * k[None, :, :, None] * dr[:, :, None, :]
                    + 1j * k[None, :, None, :] * dr[:, :, :, None]
                    - k[None, :, :, None] * k[None, :, None, :] * rv[:, :, None, None]
                )
                out[2][s : s + step] = np.real(h * e[:, :, None, None]).sum(axis=1)
        return out

    def mollified(self, nodes: np.ndarray, weights: np.ndarray) -> StreamSeries:
        """Series of ``sum_q w_q psi(x - z_q)``, exact for the given quadrature."""
        z = nodes
        k = self.wavevectors
        ez = np.exp(-1j * (z @ k.T))  # (q, m)
        we = weights[:, None] * ez
        zz = np.einsum("qi,qi->q", z, z)
        # R(x - z) = (r0 - r1.z + r2|z|^2) + (r1 - 2 r2 z).x + r2|x|^2
        c0 = self.r0[None, :] - z @ self.r1.T + zz[:, None] * self.r2[None, :]
        r0 = (we * c0).sum(axis=0)
        r1 = (
            we[:, :, None] * (self.r1[None, :, :] - 2.0 * self.r2[None, :, None] * z[:, None, :])
        ).sum(axis=0)
        r2 = self.r2 * we.sum(axis=0)
        return StreamSeries(k.copy(), self.phases.copy(), r0, r1, r2)

    def velocity(self, points, derivative_order=0):
        d = self.derivatives(points, derivative_order + 1)
        grad = d[1]
        if derivative_order == 0:
            return np.stack([-grad[:, 1], grad[:, 0]], axis=-1)
        hess = d[2]
        # d_j u_1 = -psi_{2j}, d_j u_2 = psi_{1j}
        return np.stack([-hess[:, 1, :], hess[:, 0, :]], axis=1)


# ---------------------------------------------------------------------------


def _torus_eval(spec: VelocityFieldSpec, points: np.ndarray, order: int) -> np.ndarray:
    n, d = points.shape
    out = np.zeros((n, d)) if order == 0 else np.zeros((n, d, d))
    if order == 0 and spec.mean_flow is not None:
        out += np.asarray(spec.mean_flow, dtype=float)
    if spec.modes:
        k = np.array([m.wavevector for m in spec.modes], dtype=float)
        ph = np.array([m.phase for m in spec.modes])
        a_sigma = np.array([m.amplitude * np.asarray(m.polarization) for m in spec.modes])
        for s in range(0, n, _CHUNK):
            arg = points[s : s + _CHUNK] @ k.T + ph
            if order == 0:
                out[s : s + _CHUNK] += np.cos(arg) @ a_sigma
            else:
                # d_j u_i = -a sigma_i k_j sin(arg)
                out[s : s + _CHUNK] -= np.einsum("cm,mi,mj->cij", np.sin(arg), a_sigma, k)
    if spec.gradient_part:
        c = np.array([t.coefficient for t in spec.gradient_part])
        k = np.array([t.wavevector for t in spec.gradient_part], dtype=float)
        ph = np.array([t.phase for t in spec.gradient_part])
        for s in range(0, n, _CHUNK):
            arg = points[s : s + _CHUNK] @ k.T + ph
            if order == 0:
                # grad f = -c k sin(arg)
                out[s : s + _CHUNK] -= (np.sin(arg) * c) @ k
            else:
                out[s : s + _CHUNK] -= np.einsum("cm,mi,mj->cij", np.cos(arg) * c, k, k)
    return out


def eval_field(spec: VelocityFieldSpec, points, derivative_order: int = 0, *, check_domain: bool = True):
    """Evaluate ``u`` (order 0) or its Jacobian ``J[..., i, j] = d_j u_i`` (order 1)."""
    if derivative_order not in (0, 1):
        raise ValueError("derivative_order must be 0 or 1")
    pts = np.asarray(points, dtype=float)
    lead = pts.shape[:-1]
    if pts.shape[-1] != spec.dim:
        raise ValueError(f"points must have {spec.dim} coordinates")
    pts = pts.reshape(-1, spec.dim)
    if not np.all(np.isfinite(pts)):
        raise DomainError("non-finite evaluation point")
    if spec.domain == "disk":
        if check_domain and np.any(np.einsum("ij,ij->i", pts, pts) > 1.0 + 1e-12):
            raise DomainError("point outside the closed unit disk")
        out = StreamSeries.from_spec(spec).velocity(pts, derivative_order)
    else:
        out = _torus_eval(spec, pts, derivative_order)
    return out.reshape(lead + out.shape[1:])


def eval_stream(spec: VelocityFieldSpec, points) -> np.ndarray:
    if spec.domain != "disk":
        raise ValueError("stream function only defined for disk fields")
    pts = np.asarray(points, dtype=float)
    return StreamSeries.from_spec(spec).derivatives(pts.reshape(-1, 2), 0)[0].reshape(pts.shape[:-1])


def divergence(spec: VelocityFieldSpec, points) -> np.ndarray:
    jac = eval_field(spec, points, 1)
    return np.trace(jac, axis1=-2, axis2=-1)


def sample(spec: VelocityFieldSpec, geometry, label: str = "u") -> GridField:
    """Sample ``u`` on a torus or disk grid."""
    if geometry.domain != spec.domain:
        raise ValueError(f"cannot sample a {spec.domain} field on a {geometry.domain} grid")
    pts = geometry.points()
    return GridField(geometry, eval_field(spec, pts), label=label)


# ---------------------------------------------------------------------------
# smoothing with boundary correction


def bump(s):
    """C-infinity radial profile supported on ``|s| < 1`` (unnormalised)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def mollifier_nodes(epsilon: float, n: int = 33) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes on ``[-eps, eps]^2`` weighted by the bump, summing to 1."""
    t, w = np.polynomial.legendre.leggauss(n)
    x, y = np.meshgrid(t, t, indexing="ij")
    z = np.stack([x.ravel(), y.ravel()], axis=-1)
    wts = np.outer(w, w).ravel() * bump(np.hypot(z[:, 0], z[:, 1]))
    keep = wts > 0
    z, wts = z[keep] * epsilon, wts[keep]
    return z, wts / wts.sum()


@dataclass
class HarmonicCorrection:
    """``phi = sum_m c_m r^|m| e^{i m phi}`` with ``d_r phi = g`` on the unit circle."""

    g_hat: np.ndarray  # normalised FFT of boundary data, natural order
    flux_mode0: float

    @property
    def m(self) -> np.ndarray:
        return np.fft.fftfreq(self.g_hat.size, 1.0 / self.g_hat.size)

    def gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        m = self.m
        mag = np.abs(self.g_hat)
        # modes below roundoff contribute nothing to the gradient
        keep = (m != 0) & (np.abs(m) < self.g_hat.size // 2) & (mag > 1e-17 * max(mag.max(), 1e-300))
        m, gh = m[keep], self.g_hat[keep]
        am = np.abs(m)
        out = np.zeros_like(pts)
        for s in range(0, pts.shape[0], 4096):
            x = pts[s : s + 4096]
            r = np.hypot(x[:, 0], x[:, 1])
            ang = np.arctan2(x[:, 1], x[:, 0])
            rp = r[:, None] ** (am[None, :] - 1)
            base = gh[None, :] * rp * np.exp(1j * ang[:, None] * m[None, :])
            dr = np.real(base.sum(axis=1))
            dt = np.real((1j * np.sign(m)[None, :] * base).sum(axis=1))
            c, sn = np.cos(ang), np.sin(ang)
            out[s : s + 4096, 0] = dr * c - dt * sn
            out[s : s + 4096, 1] = dr * sn + dt * c
        return out


@dataclass
class DiskApproximant:
    """Closed-form ``u_eps = mollified u - grad phi_eps`` on the unit disk."""

    smooth: StreamSeries
    correction: HarmonicCorrection
    epsilon: float

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, 2)
        out = self.smooth.velocity(flat, 0) - self.correction.gradient(flat)
        return out.reshape(pts.shape)

    def mollified(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.smooth.velocity(pts.reshape(-1, 2), 0).reshape(pts.shape)


@dataclass
class MollifyResult:
    field: GridField
    approximant: DiskApproximant
    flux_mode0: float
    boundary_residual: float
    sup_distance: float
    extras: dict = field(default_factory=dict)


def mollify_and_correct(
    spec: VelocityFieldSpec,
    epsilon: float,
    grid: DiskGrid | None = None,
    n_boundary: int = 1024,
    n_check: int = 1000,
    flux_tol: float = 1e-8,
) -> MollifyResult:
    """Smooth a disk field and restore tangency with a harmonic Neumann correction.

    The returned field is sampled on ``grid``; ``boundary_residual`` is the max
    of ``|u_eps . n|`` over ``n_check`` equispaced boundary points that are not
    FFT nodes, and ``sup_distance`` is ``max |u_eps - u|`` over the grid.
    """
    if spec.domain != "disk":
        raise ValueError("mollify_and_correct needs a disk field")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    grid = grid or DiskGrid(128, 256)
    z, w = mollifier_nodes(epsilon)
    smooth = StreamSeries.from_spec(spec).mollified(z, w)

    ang = 2.0 * np.pi * np.arange(n_boundary) / n_boundary
    nrm = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    g = np.einsum("ij,ij->i", smooth.velocity(nrm, 0), nrm)
    g_hat = np.fft.fft(g) / n_boundary
    flux0 = float(abs(g_hat[0]))
    scale = max(1.0, float(np.max(np.abs(g))))
    if flux0 > flux_tol * scale:
        raise CompatibilityError(f"boundary flux mode 0 = {flux0:.3e} exceeds tolerance")
    corr = HarmonicCorrection(g_hat, flux0)
    approx = DiskApproximant(smooth, corr, epsilon)

    pts = grid.points()
    u_eps = approx(pts)
    u = eval_field(spec, pts)
    chk = 2.0 * np.pi * (np.arange(n_check) + 0.5) / n_check
    bpts = np.stack([np.cos(chk), np.sin(chk)], axis=-1)
    resid = float(np.max(np.abs(np.einsum("ij,ij->i", approx(bpts), bpts))))
    return MollifyResult(
        field=GridField(grid, u_eps, label=f"u_eps={epsilon:g}"),
        approximant=approx,
        flux_mode0=flux0,
        boundary_residual=resid,
        sup_distance=float(np.max(np.linalg.norm(u_eps - u, axis=-1))),
    )


def spec_summary(spec: VelocityFieldSpec) -> dict:
    return {
        "domain": spec.domain,
        "dim": spec.dim,
        "theta": spec.theta,
        "seed": spec.seed,
        "n_modes": len(spec.modes),
        "octaves": 1 + max((m.octave for m in spec.modes), default=-1),
    }


__all__ = [
    "CompatibilityError",
    "DiskApproximant",
    "DomainError",
    "LacunaryMode",
    "MollifyResult",
    "StreamSeries",
    "TrigTerm",
    "VelocityFieldSpec",
    "divergence",
    "eval_field",
    "eval_stream",
    "make_disk_field",
    "make_torus_field",
    "max_octave",
    "mollifier_nodes",
    "mollify_and_correct",
    "rigid_rotation",
    "sample",
    "sin_product_potential",
    "zero_field",
]
