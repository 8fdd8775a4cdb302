"""Multiscale oscillation analysis of sampled fields.

The oscillation at scale ``r`` is ``omega(r) = max |f(x) - f(y)|`` over
pairs with ``|x - y|`` in the dyadic class ``(r / sqrt 2, r * sqrt 2]``.
Hölder exponents are least-squares slopes of ``log2 omega`` against
``log2 r`` over a window of middle scales.

Torus grids use integer lattice offsets with wraparound (the flat torus
metric) and scan every base point for each sampled offset, so profiles are
exactly invariant under grid shifts.  Polar disk grids sample random base
points and snap random partners to the nearest grid node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .grid import DiskGrid, GridField, TorusGrid

SQRT2 = math.sqrt(2.0)


class DegenerateProfileError(ValueError):
    """The oscillation vanishes on the fit window (constant field)."""


class WindowError(ValueError):
    """Not enough scales left after trimming."""


class EmptyRegionError(ValueError):
    """The requested region contains no grid points."""


@dataclass(frozen=True)
class Region:
    kind: str = "full"  # full | interior | boundary
    width: float = 0.0

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def interior(cls, margin: float):
        return cls("interior", margin)

    @classmethod
    def boundary_band(cls, width: float):
        return cls("boundary", width)

    def label(self) -> str:
        return self.kind if self.kind == "full" else f"{self.kind}({self.width:g})"

    def mask(self, geometry) -> np.ndarray:
        if self.kind == "full":
            return np.ones(geometry.shape, dtype=bool)
        if isinstance(geometry, TorusGrid):
            raise ValueError("the torus has no boundary; only the full region applies")
        r = np.repeat(geometry.radii[:, None], geometry.n_phi, axis=1)
        if self.kind == "interior":
            return r <= 1.0 - self.width
        if self.kind == "boundary":
            return r >= 1.0 - self.width
        raise ValueError(f"unknown region {self.kind!r}")


@dataclass
class OscillationProfile:
    scales: np.ndarray  # decreasing
    oscillation: np.ndarray
    pairs: np.ndarray
    region: str = "full"
    field_id: str = ""
    seed: int = 0

    def __post_init__(self):
        self.scales = np.asarray(self.scales, dtype=float)
        self.oscillation = np.asarray(self.oscillation, dtype=float)
        self.pairs = np.asarray(self.pairs, dtype=np.int64)
        order = np.argsort(-self.scales)
        self.scales, self.oscillation, self.pairs = (
            self.scales[order],
            self.oscillation[order],
            self.pairs[order],
        )

    @classmethod
    def from_power_law(cls, scales, exponent: float, constant: float = 1.0):
        s = np.asarray(scales, dtype=float)
        return cls(s, constant * s**exponent, np.ones(s.size, dtype=np.int64))

    def rows(self) -> list[dict]:
        return [
            {
                "field_id": self.field_id,
                "region": self.region,
                "scale": float(r),
                "oscillation": float(w),
                "pairs": int(n),
            }
            for r, w, n in zip(self.scales, self.oscillation, self.pairs)
        ]


@dataclass
class ExponentFit:
    exponent: float
    r2: float
    seminorm: float
    window: tuple[int, int]  # indices into the ascending scale list
    scales: np.ndarray = field(repr=False, default=None)
    oscillation: np.ndarray = field(repr=False, default=None)

    def row(self, field_id: str = "", region: str = "full") -> dict:
        return {
            "field_id": field_id,
            "region": region,
            "exponent": self.exponent,
            "r2": self.r2,
            "seminorm": self.seminorm,
            "window": f"{self.window[0]}:{self.window[1]}",
        }


# ---------------------------------------------------------------------------
# torus


def _lattice_annulus(dim, lo, hi):
    m = int(math.floor(hi))
    ax = np.arange(-m, m + 1)
    vecs = np.stack(np.meshgrid(*[ax] * dim, indexing="ij"), axis=-1).reshape(-1, dim)
    n = np.linalg.norm(vecs, axis=1)
    vecs = vecs[(n > lo) & (n <= hi + 1e-12)]
    # keep one of each +-pair: differences are symmetric
    first = np.argmax(vecs != 0, axis=1)
    lead = vecs[np.arange(len(vecs)), first]
    return vecs[lead > 0]


def _sample_offsets(rng, dim, lo, hi, count):
    if hi <= 24:
        cand = _lattice_annulus(dim, lo, hi)
        if len(cand) <= count:
            return cand
        return cand[np.sort(rng.choice(len(cand), size=count, replace=False))]
    out = {}
    tries = 0
    while len(out) < count and tries < 200 * count:
        tries += 1
        u = rng.uniform()
        rad = (lo**dim + u * (hi**dim - lo**dim)) ** (1.0 / dim)
        v = rng.standard_normal(dim)
        vec = np.rint(rad * v / np.linalg.norm(v)).astype(int)
        nv = np.linalg.norm(vec)
        if not lo < nv <= hi:
            continue
        nz = vec[np.nonzero(vec)[0][0]]
        if nz < 0:
            vec = -vec
        out.setdefault(tuple(vec), vec)
    return np.array(list(out.values()), dtype=int).reshape(-1, dim)


def _torus_profile(f: GridField, pair_budget, seed, min_offsets=4):
    geom = f.geometry
    n_pts = int(np.prod(geom.shape))
    per_scale = max(min_offsets, math.ceil(pair_budget / n_pts))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    vals = f.values
    kmax = int(math.floor(math.log2(geom.n / 2)))
    scales, osc, pairs = [], [], []
    for k in range(kmax + 1):
        c = 2.0**k
        offs = _sample_offsets(rng, geom.dim, c / SQRT2, c * SQRT2, per_scale)
        if k == 0:
            # every nearest-neighbour pair
            axes = np.eye(geom.dim, dtype=int)
            offs = np.unique(np.vstack([axes, offs]), axis=0)
        best = 0.0
        for off in offs:
            diff = np.roll(vals, shift=tuple(-int(o) for o in off), axis=tuple(range(geom.dim))) - vals
            best = max(best, float(np.sqrt(np.max(np.einsum("...i,...i->...", diff, diff)))))
        scales.append(c * geom.spacing)
        osc.append(best)
        pairs.append(len(offs) * n_pts)
    return np.array(scales), np.array(osc), np.array(pairs)


# ---------------------------------------------------------------------------
# disk


def _disk_profile(f: GridField, region: Region, pair_budget, seed):
    geom: DiskGrid = f.geometry
    mask = region.mask(geom)
    if not mask.any():
        raise EmptyRegionError(f"region {region.label()} contains no grid points")
    pts = geom.points()[mask]
    vals = f.values[mask]
    w = geom.weights()[mask]
    tree = cKDTree(pts)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    finest = geom.spacing
    kmax = int(math.floor(math.log2(1.0 / finest)))
    scales = [2.0**-k for k in range(kmax + 1)]
    osc = np.zeros(len(scales))
    count = np.zeros(len(scales), dtype=np.int64)
    p = w / w.sum()
    for i, c in enumerate(scales):
        lo, hi = c / SQRT2, c * SQRT2
        base = rng.choice(len(pts), size=pair_budget, p=p)
        u = rng.uniform(size=pair_budget)
        rad = np.sqrt(lo**2 + u * (hi**2 - lo**2))
        ang = rng.uniform(0.0, 2.0 * np.pi, size=pair_budget)
        target = pts[base] + rad[:, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        _, idx = tree.query(target)
        dist = np.linalg.norm(pts[idx] - pts[base], axis=1)
        ok = (dist > lo) & (dist <= hi)
        if ok.any():
            d = vals[idx[ok]] - vals[base[ok]]
            osc[i] = np.sqrt(np.max(np.einsum("ij,ij->i", d, d)))
        count[i] = int(ok.sum())

    # all nearest-neighbour pairs (radial and angular) go to the finest scale
    full = geom.points()
    v = f.values
    diffs, dists = [], []
    m_r = mask[:-1] & mask[1:]
    diffs.append((v[1:] - v[:-1])[m_r])
    dists.append(np.linalg.norm(full[1:] - full[:-1], axis=-1)[m_r])
    rolled_v = np.roll(v, -1, axis=1)
    m_a = mask & np.roll(mask, -1, axis=1)
    diffs.append((rolled_v - v)[m_a])
    dists.append(np.linalg.norm(np.roll(full, -1, axis=1) - full, axis=-1)[m_a])
    d = np.concatenate(diffs)
    dist = np.concatenate(dists)
    keep = dist <= scales[-1] * SQRT2
    if keep.any():
        osc[-1] = max(osc[-1], float(np.sqrt(np.max(np.einsum("ij,ij->i", d[keep], d[keep])))))
        count[-1] += int(keep.sum())
    return np.array(scales), osc, count


# ---------------------------------------------------------------------------


def oscillation_profile(
    f: GridField,
    region: Region | None = None,
    pair_budget: int | None = None,
    seed: int = 0,
    field_id: str = "",
) -> OscillationProfile:
    """Dyadic oscillation profile of ``f`` restricted to ``region``.

    For torus grids ``pair_budget`` is the number of pairs per scale, realised
    as ``ceil(pair_budget / grid size)`` lattice offsets (at least four) each
    scanned over the whole grid. For disk grids it is the number of random
    base points per scale. The result is made monotone by a running maximum
    from fine to coarse scales.
    """
    region = region or Region.full()
    if isinstance(f.geometry, TorusGrid):
        if region.kind != "full":
            raise ValueError("the torus has no boundary; only the full region applies")
        budget = pair_budget or (1 << 24)
        if budget < 10_000:
            raise ValueError("pair_budget must be at least 1e4")
        scales, osc, pairs = _torus_profile(f, budget, seed)
    else:
        budget = pair_budget or 200_000
        if budget < 10_000:
            raise ValueError("pair_budget must be at least 1e4")
        scales, osc, pairs = _disk_profile(f, region, budget, seed)
    # ascending scales -> running max keeps omega nondecreasing in r
    order = np.argsort(scales)
    osc_sorted = np.maximum.accumulate(osc[order])
    osc = np.empty_like(osc_sorted)
    osc[order] = osc_sorted
    return OscillationProfile(scales, osc, pairs, region=region.label(), field_id=field_id, seed=seed)


def _window(profile, drop_fine, drop_coarse):
    n = profile.scales.size
    if n < drop_fine + drop_coarse + 3:
        raise WindowError(
            f"profile has {n} scales; need at least {drop_fine + drop_coarse + 3}"
        )
    r = profile.scales[::-1]  # ascending
    w = profile.oscillation[::-1]
    lo, hi = drop_fine, n - drop_coarse
    return r, w, lo, hi


def fit_exponent(profile: OscillationProfile, drop_fine: int = 2, drop_coarse: int = 2) -> ExponentFit:
    """Least-squares slope of ``log2 omega`` versus ``log2 r`` on the retained scales."""
    r, w, lo, hi = _window(profile, drop_fine, drop_coarse)
    rw, ww = r[lo:hi], w[lo:hi]
    if np.any(ww <= 0.0):
        raise DegenerateProfileError("oscillation vanishes on the fit window")
    x, y = np.log2(rw), np.log2(ww)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    seminorm = float(np.max(ww / rw**slope))
    return ExponentFit(float(slope), r2, seminorm, (lo, hi), rw, ww)


def holder_seminorm(
    profile: OscillationProfile, exponent: float, drop_fine: int = 0, drop_coarse: int = 0
) -> float:
    """``max omega(r) / r**exponent`` over the retained scales."""
    r = profile.scales[::-1][drop_fine : profile.scales.size - drop_coarse]
    w = profile.oscillation[::-1][drop_fine : profile.scales.size - drop_coarse]
    return float(np.max(w / r**exponent))


def log_lipschitz_ratios(profile: OscillationProfile) -> tuple[np.ndarray, np.ndarray]:
    """Scales below 1/2 (descending) and ``omega(r) / (r |log r|)`` there."""
    keep = profile.scales < 0.5
    r = profile.scales[keep]
    return r, profile.oscillation[keep] / (r * np.abs(np.log(r)))


def log_lipschitz_constant(profile: OscillationProfile) -> float:
    _, ratio = log_lipschitz_ratios(profile)
    return float(np.max(ratio)) if ratio.size else float("nan")


def spread(values) -> float:
    """``max / min`` of positive values; 1 means perfectly stable."""
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min())


# ---------------------------------------------------------------------------


def grid_gradient(p: GridField) -> GridField:
    """Gradient of a scalar grid field.

    Torus: exact spectral derivatives. Disk: second-order differences in r
    (one-sided at the ends) and spectral derivatives in phi, rotated to
    Cartesian components.
    """
    geom = p.geometry
    f = p.scalar
    if isinstance(geom, TorusGrid):
        k = np.fft.fftfreq(geom.n, 1.0 / geom.n)
        if geom.n % 2 == 0:
            k[geom.n // 2] = 0.0  # odd derivative of the Nyquist mode
        fh = np.fft.fftn(f)
        comps = []
        for ax in range(geom.dim):
            shape = [1] * geom.dim
            shape[ax] = geom.n
            comps.append(np.real(np.fft.ifftn(1j * k.reshape(shape) * fh)))
        return GridField(geom, np.stack(comps, axis=-1), label=f"grad {p.label}")
    r = geom.radii
    dfdr = np.gradient(f, geom.dr, axis=0, edge_order=2)
    m = np.fft.fftfreq(geom.n_phi, 1.0 / geom.n_phi)
    if geom.n_phi % 2 == 0:
        m[geom.n_phi // 2] = 0.0
    dfdp = np.real(np.fft.ifft(1j * m * np.fft.fft(f, axis=1), axis=1))
    dt = dfdp / r[:, None]
    c, s = np.cos(geom.angles)[None, :], np.sin(geom.angles)[None, :]
    gx = dfdr * c - dt * s
    gy = dfdr * s + dt * c
    return GridField(geom, np.stack([gx, gy], axis=-1), label=f"grad {p.label}")


def gradient_exponent(
    p: GridField,
    theta_target: float | None = None,
    region: Region | None = None,
    pair_budget: int | None = None,
    seed: int = 0,
    drop_fine: int = 2,
    drop_coarse: int = 2,
) -> ExponentFit:
    """Hölder exponent of ``grad p``; ``theta_target`` is carried for reporting only."""
    g = grid_gradient(p)
    prof = oscillation_profile(g, region=region, pair_budget=pair_budget, seed=seed)
    return fit_exponent(prof, drop_fine, drop_coarse)


def dense_profile_1d(values, spacing: float, scales) -> np.ndarray:
    """Exhaustive oscillation of a periodic slice over every lag in each dyadic class.

    ``values`` has shape ``(n,)`` or ``(n, components)``; vector differences
    are measured in the Euclidean norm.

    O(n * max_lag); meant as a test oracle on slices.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    n = v.shape[0]
    out = []
    for c in scales:
        lo, hi = c / SQRT2, c * SQRT2
        lags = [l for l in range(1, n // 2 + 1) if lo < l * spacing <= hi + 1e-12]
        best = 0.0
        for l in lags:
            best = max(best, float(np.max(np.linalg.norm(np.roll(v, -l, axis=0) - v, axis=1))))
        out.append(best)
    return np.asarray(out)
