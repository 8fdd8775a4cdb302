"""Pseudo-spectral pressure solves on the flat torus ``[0, 2*pi)^d``.

All quadratic products are dealiased with the 3/2 rule, so for band-limited
inputs every operation here is exact up to roundoff.  Nyquist modes of the
inputs are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridField, TorusGrid


class InputError(ValueError):
    """Non-finite or mis-shaped input."""


class SpectralWorkspace:
    """FFT plans and wavevector tables for an ``N^d`` torus grid."""

    def __init__(self, n: int, dim: int = 2):
        if n % 2 or n < 16:
            raise ValueError(f"grid size must be even and >= 16, got {n}")
        if dim not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        self.n, self.dim = n, dim
        self.geometry = TorusGrid(n, dim)
        self.m = 3 * n // 2
        full = np.fft.fftfreq(n, 1.0 / n)
        half = np.fft.rfftfreq(n, 1.0 / n)
        axes = [full] * (dim - 1) + [half]
        self.k = [a.reshape([-1 if i == ax else 1 for i in range(dim)]) for ax, a in enumerate(axes)]
        k2 = sum(kk**2 for kk in self.k)
        self.k2 = np.broadcast_to(k2, self.spectral_shape).copy()
        nyq = np.zeros(self.spectral_shape, dtype=bool)
        for kk in self.k:
            nyq |= np.broadcast_to(np.abs(kk) == n // 2, self.spectral_shape)
        self.keep = ~nyq
        self.inv_k2 = np.zeros(self.spectral_shape)
        nz = self.k2 > 0
        self.inv_k2[nz] = 1.0 / self.k2[nz]

    @property
    def spectral_shape(self):
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    def forward(self, f, drop_nyquist: bool = True):
        fh = np.fft.rfftn(f)
        return fh * self.keep if drop_nyquist else fh

    def inverse(self, fh):
        return np.fft.irfftn(fh, s=(self.n,) * self.dim, axes=tuple(range(self.dim)))

    # 3/2-rule padding ----------------------------------------------------

    def _index(self, size_from, size_to):
        """Positions of the ``|k| < n/2`` modes of a full axis inside a larger axis."""
        h = self.n // 2
        src = np.r_[0:h, size_from - h + 1 : size_from]
        dst = np.r_[0:h, size_to - h + 1 : size_to]
        return src, dst

    def pad(self, fh):
        m, n, d = self.m, self.n, self.dim
        out = np.zeros((m,) * (d - 1) + (m // 2 + 1,), dtype=complex)
        src, dst = self._index(n, m)
        h = n // 2
        if d == 2:
            out[np.ix_(dst, np.arange(h))] = fh[np.ix_(src, np.arange(h))]
        else:
            out[np.ix_(dst, dst, np.arange(h))] = fh[np.ix_(src, src, np.arange(h))]
        return out * (m / n) ** d

    def truncate(self, gh):
        m, n, d = self.m, self.n, self.dim
        out = np.zeros(self.spectral_shape, dtype=complex)
        dst, src = self._index(n, m)
        h = n // 2
        if d == 2:
            out[np.ix_(dst, np.arange(h))] = gh[np.ix_(src, np.arange(h))]
        else:
            out[np.ix_(dst, dst, np.arange(h))] = gh[np.ix_(src, src, np.arange(h))]
        return out * (n / m) ** d

    def to_fine(self, fh):
        return np.fft.irfftn(self.pad(fh), s=(self.m,) * self.dim, axes=tuple(range(self.dim)))

    def product(self, a_fine, b_fine):
        """Spectrum of the dealiased product of two fields given on the padded grid."""
        return self.truncate(np.fft.rfftn(a_fine * b_fine))

    def derivative(self, fh, axis):
        return 1j * self.k[axis] * fh


def _workspace_for(f: GridField, ws: SpectralWorkspace | None) -> SpectralWorkspace:
    geom = f.geometry
    if not isinstance(geom, TorusGrid):
        raise InputError("torus solver needs a torus grid field")
    if ws is None:
        return SpectralWorkspace(geom.n, geom.dim)
    if ws.n != geom.n or ws.dim != geom.dim:
        raise InputError("workspace does not match the field grid")
    return ws


def _check_vector(u: GridField):
    if u.components != u.geometry.dim:
        raise InputError(f"expected {u.geometry.dim} components, got {u.components}")
    if not np.all(np.isfinite(u.values)):
        raise InputError("non-finite velocity values")


def _solve_divdiv(ws: SpectralWorkspace, tensor_hat) -> np.ndarray:
    """Zero-average ``p`` with ``-Lap p = d_i d_j T_ij`` from the spectra ``T_ij``."""
    acc = np.zeros(ws.spectral_shape, dtype=complex)
    for (i, j), th in tensor_hat.items():
        acc += ws.k[i] * ws.k[j] * th
    # -Lap -> |k|^2 and d_i d_j -> -k_i k_j
    return ws.inverse(-acc * ws.inv_k2 * ws.keep)


def bilinear_pressure(u: GridField, v: GridField, ws: SpectralWorkspace | None = None) -> GridField:
    """Zero-average ``T(u, v)`` solving ``-Lap T = div div (u (x) v)``."""
    if u.geometry != v.geometry:
        raise InputError("u and v live on different grids")
    ws = _workspace_for(u, ws)
    _check_vector(u)
    _check_vector(v)
    d = ws.dim
    uf = [ws.to_fine(ws.forward(u.component(i))) for i in range(d)]
    vf = uf if v is u else [ws.to_fine(ws.forward(v.component(i))) for i in range(d)]
    tensor = {(i, j): ws.product(uf[i], vf[j]) for i in range(d) for j in range(d)}
    p = _solve_divdiv(ws, tensor)
    return GridField(u.geometry, p, zero_average=True, label="T(u,v)")


def pressure_spectral(u: GridField, ws: SpectralWorkspace | None = None) -> GridField:
    """Zero-average pressure of ``u`` on the torus."""
    out = bilinear_pressure(u, u, ws)
    out.label = "p"
    return out


def spectral_divergence(u: GridField, ws: SpectralWorkspace | None = None) -> np.ndarray:
    ws = _workspace_for(u, ws)
    _check_vector(u)
    gh = sum(ws.derivative(ws.forward(u.component(i)), i) for i in range(ws.dim))
    return ws.inverse(gh)


@dataclass
class DivergenceSplit:
    """Pieces of ``p = p1 + p2 + p3`` for a field with ``div u = g``."""

    g: GridField
    f: GridField
    v: GridField
    w: GridField
    p1: GridField
    p2: GridField
    p3: GridField
    p_direct: GridField

    @property
    def p_sum(self) -> np.ndarray:
        return self.p1.scalar + self.p2.scalar + self.p3.scalar

    def split_error(self) -> float:
        """``max |p1 + p2 + p3 - p_direct| / max |p_direct|``."""
        ref = np.max(np.abs(self.p_direct.scalar))
        err = np.max(np.abs(self.p_sum - self.p_direct.scalar))
        return float(err / ref) if ref > 0 else float(err)


def divergence_decomposition(u: GridField, ws: SpectralWorkspace | None = None) -> DivergenceSplit:
    """Split the pressure of a non-solenoidal field through ``u = w + grad f``.

    ``Lap f = div u``; ``v = grad f``; ``w = u - v`` is solenoidal and
    ``-Lap p1 = div div (w (x) w)``, ``-Lap p2 = 2 div((w . grad) v)``,
    ``-Lap p3 = div div (v (x) v)``.
    """
    ws = _workspace_for(u, ws)
    _check_vector(u)
    d, geom = ws.dim, u.geometry
    uh = [ws.forward(u.component(i)) for i in range(d)]
    gh = sum(ws.derivative(uh[i], i) for i in range(d))
    fh = -gh * ws.inv_k2
    vh = [ws.derivative(fh, i) for i in range(d)]
    wh = [uh[i] - vh[i] for i in range(d)]

    v = GridField(geom, np.stack([ws.inverse(x) for x in vh], axis=-1), label="v")
    w = GridField(geom, np.stack([ws.inverse(x) for x in wh], axis=-1), label="w")
    p1 = bilinear_pressure(w, w, ws)
    p3 = bilinear_pressure(v, v, ws)

    # (w . grad) v with exact spectral derivatives of v, then p2_hat = 2 i k_i [.]_i / |k|^2
    wf = [ws.to_fine(x) for x in wh]
    acc = np.zeros(ws.spectral_shape, dtype=complex)
    for i in range(d):
        conv = np.zeros(ws.spectral_shape, dtype=complex)
        for j in range(d):
            conv += ws.product(wf[j], ws.to_fine(ws.derivative(vh[i], j)))
        acc += 1j * ws.k[i] * conv
    p2 = GridField(geom, ws.inverse(2.0 * acc * ws.inv_k2 * ws.keep), zero_average=True, label="p2")

    p_direct = pressure_spectral(u, ws)
    p1.label, p3.label, p_direct.label = "p1", "p3", "p_direct"
    return DivergenceSplit(
        g=GridField(geom, ws.inverse(gh), label="g"),
        f=GridField(geom, ws.inverse(fh), zero_average=True, label="f"),
        v=v,
        w=w,
        p1=p1,
        p2=p2,
        p3=p3,
        p_direct=p_direct,
    )


def shell_decay_exponent(f: GridField, lo: int, hi: int) -> float:
    """Decay rate ``s`` of the dyadic shell norms ``||P_i f||_2 ~ 2^(-i s)``.

    ``P_i`` keeps the modes with ``2^i / sqrt 2 <= |k| < 2^i sqrt 2``; the
    rate is the least-squares slope over shells ``lo..hi``.  For lacunary
    data this is the Besov-type smoothness seen in Fourier space, a
    diagnostic independent of the sup-based oscillation profile.
    """
    geom = f.geometry
    if not isinstance(geom, TorusGrid):
        raise InputError("shell decay needs a torus grid field")
    k = np.fft.fftfreq(geom.n, 1.0 / geom.n)
    kk = np.sqrt(sum(a**2 for a in np.meshgrid(*[k] * geom.dim, indexing="ij")))
    power = sum(np.abs(np.fft.fftn(f.values[..., c])) ** 2 for c in range(f.components))
    idx = np.arange(lo, hi + 1)
    norms = []
    for i in idx:
        sel = (kk >= 2.0**i / np.sqrt(2.0)) & (kk < 2.0**i * np.sqrt(2.0))
        norms.append(np.sqrt(power[sel].sum()))
    norms = np.asarray(norms)
    if np.any(norms <= 0):
        return float("nan")
    return float(-np.polyfit(idx, np.log2(norms), 1)[0])
