"""Sampled fields on the two structured grids used throughout the package.

Torus grids are tensor grids with ``N`` points per axis on ``[0, 2*pi)^d``.
Disk grids are cell-centred polar grids on the unit disk with radii
``r_i = (i + 1/2) / n_r`` and angles ``phi_k = 2*pi*k / n_phi``.

Values are stored with the component axis last, so a scalar field on a
``N x N`` torus grid has shape ``(N, N, 1)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi

_FORMAT_MAGIC = "pressure-lab-grid"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TorusGrid:
    """Uniform tensor grid on the flat torus of period 2*pi."""

    n: int
    dim: int = 2

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"torus dimension must be 2 or 3, got {self.dim}")
        if self.n < 2:
            raise ValueError("torus grid needs at least 2 points per axis")

    @property
    def domain(self) -> str:
        return "torus"

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    def axes(self) -> list[np.ndarray]:
        return [np.arange(self.n) * self.spacing] * self.dim

    def points(self) -> np.ndarray:
        """Grid nodes, shape ``shape + (dim,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def weights(self) -> np.ndarray:
        return np.full(self.shape, self.spacing**self.dim)

    def header(self) -> dict:
        return {"domain": "torus", "d": self.dim, "N": self.n}


@dataclass(frozen=True)
class DiskGrid:
    """Cell-centred polar grid on the unit disk."""

    n_r: int
    n_phi: int

    def __post_init__(self):
        if self.n_r < 2 or self.n_phi < 4:
            raise ValueError("disk grid too small")

    @property
    def domain(self) -> str:
        return "disk"

    @property
    def dim(self) -> int:
        return 2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_phi)

    @property
    def dr(self) -> float:
        return 1.0 / self.n_r

    @property
    def dphi(self) -> float:
        return TWO_PI / self.n_phi

    @property
    def spacing(self) -> float:
        # largest node separation, reached in the angular direction at the rim
        return max(self.dr, self.dphi)

    @property
    def radii(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr

    @property
    def angles(self) -> np.ndarray:
        return np.arange(self.n_phi) * self.dphi

    def points(self) -> np.ndarray:
        r, phi = np.meshgrid(self.radii, self.angles, indexing="ij")
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)

    def weights(self) -> np.ndarray:
        # midpoint rule in r, trapezoid in phi; sums to pi exactly
        w = self.radii * self.dr * self.dphi
        return np.repeat(w[:, None], self.n_phi, axis=1)

    def header(self) -> dict:
        return {"domain": "disk", "d": 2, "N": [self.n_r, self.n_phi]}


Geometry = TorusGrid | DiskGrid


@dataclass
class GridField:
    """A scalar or vector field sampled on a :class:`TorusGrid` or :class:`DiskGrid`."""

    geometry: Geometry
    values: np.ndarray
    zero_average: bool = False
    label: str = field(default="")

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        shape = self.geometry.shape
        if values.shape == shape:
            values = values[..., None]
        if values.shape[:-1] != shape:
            raise ValueError(
                f"values of shape {values.shape} do not fit grid {shape}"
            )
        self.values = values
        if self.zero_average:
            self.values = self.values - self.mean()

    @property
    def components(self) -> int:
        return self.values.shape[-1]

    @property
    def scalar(self) -> np.ndarray:
        if self.components != 1:
            raise ValueError("field is not scalar")
        return self.values[..., 0]

    def component(self, i: int) -> np.ndarray:
        return self.values[..., i]

    def mean(self) -> np.ndarray:
        """Area-weighted mean of every component."""
        w = self.geometry.weights()
        return np.tensordot(w, self.values, axes=w.ndim) / w.sum()

    def sup_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=-1)))

    def save(self, path: str | Path) -> None:
        save_grid(self, path)

    @classmethod
    def load(cls, path: str | Path) -> GridField:
        return load_grid(path)


def save_grid(f: GridField, path: str | Path) -> None:
    """Write ``f`` as a one-line JSON header followed by little-endian float64 data."""
    header = dict(f.geometry.header())
    header.update(
        format=_FORMAT_MAGIC,
        version=_FORMAT_VERSION,
        components=f.components,
        zero_average=f.zero_average,
        label=f.label,
    )
    payload = np.ascontiguousarray(f.values, dtype="<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii") + b"\n")
        fh.write(payload)


def load_grid(path: str | Path) -> GridField:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        payload = fh.read()
    if header.get("format") != _FORMAT_MAGIC:
        raise ValueError(f"{path} is not a pressure-lab grid file")
    if header["domain"] == "torus":
        geometry = TorusGrid(int(header["N"]), int(header["d"]))
    elif header["domain"] == "disk":
        n_r, n_phi = header["N"]
        geometry = DiskGrid(int(n_r), int(n_phi))
    else:
        raise ValueError(f"unknown domain {header['domain']!r}")
    shape = geometry.shape + (int(header["components"]),)
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != int(np.prod(shape)):
        raise ValueError("payload size does not match header")
    out = GridField(geometry, values.reshape(shape).astype(float), label=header.get("label", ""))
    out.zero_average = bool(header.get("zero_average", False))
    return out
