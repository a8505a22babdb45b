"""Truncated volume mesh on ``[z_min, n]`` and sampled densities on it."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

UNIFORM = "uniform"
GEOMETRIC = "geometric"


@dataclass(frozen=True, eq=False)
class Mesh:
    """Cells covering ``[z_min, n]``.

    Cell centers are arithmetic midpoints, so the midpoint rule is exact for
    piecewise-linear integrands and the centers double as the pivots of the
    collision operators.  Equality and hashing use the defining parameters.
    """

    z_min: float
    n: float
    cell_count: int
    kind: str = GEOMETRIC
    edges: np.ndarray = field(init=False, repr=False)
    centers: np.ndarray = field(init=False, repr=False)
    widths: np.ndarray = field(init=False, repr=False)
    ratio: float = field(init=False, repr=False)

    def __post_init__(self):
        z_min, n, count = float(self.z_min), float(self.n), int(self.cell_count)
        if not 0.0 < z_min < n:
            raise DomainError(f"mesh requires 0 < z_min < n, got z_min={z_min}, n={n}")
        if count < 1:
            raise DomainError(f"cell_count must be positive, got {count}")
        if self.kind == GEOMETRIC:
            ratio = (n / z_min) ** (1.0 / count)
            edges = z_min * ratio ** np.arange(count + 1, dtype=float)
        elif self.kind == UNIFORM:
            ratio = 1.0
            edges = np.linspace(z_min, n, count + 1)
        else:
            raise DomainError(f"unknown mesh kind {self.kind!r}")
        edges[0] = z_min
        edges[-1] = n
        if not np.all(np.diff(edges) > 0.0):
            raise DomainError("mesh edges are not strictly increasing")
        edges.setflags(write=False)
        centers = 0.5 * (edges[:-1] + edges[1:])
        centers.setflags(write=False)
        widths = np.diff(edges)
        widths.setflags(write=False)
        object.__setattr__(self, "z_min", z_min)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "cell_count", count)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "ratio", float(ratio))

    def _key(self):
        return (self.z_min, self.n, self.cell_count, self.kind)

    def __eq__(self, other):
        return isinstance(other, Mesh) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __len__(self):
        return self.cell_count

    @property
    def cells(self) -> list[tuple[float, float, float, float]]:
        """``(left edge, center, right edge, width)`` for every cell."""
        return [
            (float(l), float(c), float(r), float(w))
            for l, c, r, w in zip(self.edges[:-1], self.centers, self.edges[1:], self.widths)
        ]


def build_mesh(z_min: float, n: float, cell_count: int, kind: str = GEOMETRIC) -> Mesh:
    """Uniform or geometric mesh; geometric edges sit at ``z_min * rho**i``."""
    return Mesh(z_min, n, cell_count, kind)


@dataclass
class DensityField:
    """Particle-size density at the cell centers of ``mesh`` at time ``time``."""

    mesh: Mesh
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.cell_count,):
            raise DomainError(
                f"field has {values.size} values for a mesh of {self.mesh.cell_count} cells"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        self.values = values
        self.time = float(self.time)

    @classmethod
    def zeros(cls, mesh: Mesh, time: float = 0.0) -> "DensityField":
        return cls(mesh, np.zeros(mesh.cell_count), time)

    @classmethod
    def from_function(cls, mesh: Mesh, func, time: float = 0.0) -> "DensityField":
        return cls(mesh, func(mesh.centers), time)

    def copy(self) -> "DensityField":
        return DensityField(self.mesh, self.values.copy(), self.time)


def quad(values, mesh: Mesh) -> float:
    """Midpoint rule ``sum(values * widths)`` over the mesh."""
    values = np.asarray(values, dtype=float)
    if values.shape != mesh.widths.shape:
        raise DomainError(
            f"cannot integrate {values.shape[0] if values.ndim else 1} values "
            f"over {mesh.cell_count} cells"
        )
    return float(np.sum(values * mesh.widths))


def sample(field: DensityField, z):
    """Evaluate the density off-grid.

    Linear interpolation between cell centers, constant in the half cells at
    either end of the mesh, and zero outside ``[z_min, n]``.
    """
    mesh = field.mesh
    z = np.asarray(z, dtype=float)
    out = np.interp(z, mesh.centers, field.values)
    out = np.where((z < mesh.z_min) | (z > mesh.n), 0.0, out)
    return out if out.ndim else float(out)
