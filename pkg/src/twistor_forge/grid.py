"""Finite spacetime grid, complex coordinates, and central differences.

The open ball is discretized as a rectangular 4-grid.  Complex coordinates
pair the axes as y = x1 + i*x2 and z = x3 - i*x4; their conjugates are
ybar and zbar.  Spatial derivatives use the 4th-order central stencil,
which needs a margin of two points per side; derivative arrays keep the
full grid shape and callers track how deep the garbage fringe reaches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MarginError

#: half-width of the central-difference stencil
STENCIL_MARGIN = 2


@dataclass(frozen=True)
class ComplexCoords:
    y: complex
    z: complex
    ybar: complex
    zbar: complex


@dataclass(frozen=True)
class SpacetimeGrid:
    """Rectangular grid over the 4-ball; storage is lexicographic in x1..x4."""

    extents: tuple[int, int, int, int]
    spacing: tuple[float, float, float, float]
    origin: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.extents) != 4 or any(e < 5 for e in self.extents):
            raise ValueError("need at least 5 points per axis for the interior stencil")
        if len(self.spacing) != 4 or any(h <= 0 for h in self.spacing):
            raise ValueError("spacing must be positive on every axis")

    @classmethod
    def centered(cls, extents, spacing) -> "SpacetimeGrid":
        """Grid of the given size centered on the coordinate origin."""
        extents = tuple(int(e) for e in extents)
        spacing = (spacing,) * 4 if np.isscalar(spacing) else tuple(spacing)
        origin = tuple(-(e - 1) * h / 2 for e, h in zip(extents, spacing))
        return cls(extents, spacing, origin)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.extents))

    def axis_values(self, mu: int) -> np.ndarray:
        return self.origin[mu] + self.spacing[mu] * np.arange(self.extents[mu])

    def coordinate_arrays(self) -> tuple[np.ndarray, ...]:
        """x1..x4 broadcast to the full grid shape."""
        return tuple(
            np.broadcast_to(
                self.axis_values(mu).reshape([-1 if ax == mu else 1 for ax in range(4)]),
                self.extents,
            )
            for mu in range(4)
        )

    def complex_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(y, z, ybar, zbar) over the grid."""
        x1, x2, x3, x4 = self.coordinate_arrays()
        y = x1 + 1j * x2
        z = x3 - 1j * x4
        return y, z, np.conj(y), np.conj(z)

    def complex_coords(self, index) -> ComplexCoords:
        index = tuple(int(i) for i in index)
        if len(index) != 4 or any(not 0 <= i < e for i, e in zip(index, self.extents)):
            raise IndexError(f"grid index {index} out of range for extents {self.extents}")
        x = [self.origin[mu] + self.spacing[mu] * index[mu] for mu in range(4)]
        y = x[0] + 1j * x[1]
        z = x[2] - 1j * x[3]
        return ComplexCoords(y=y, z=z, ybar=np.conj(y), zbar=np.conj(z))

    def interior(self, margin: int) -> tuple[slice, ...]:
        """Slices selecting points at least ``margin`` away from every face."""
        if any(e - 2 * margin < 1 for e in self.extents):
            raise MarginError(f"margin {margin} leaves no interior on extents {self.extents}")
        return tuple(slice(margin, e - margin) for e in self.extents)

    def check_interior_index(self, index, margin: int = STENCIL_MARGIN):
        if any(not margin <= i < e - margin for i, e in zip(index, self.extents)):
            raise MarginError(f"index {tuple(index)} inside the margin-{margin} fringe")


def axis_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """4th-order central difference along a grid axis.

    The outermost two layers of the result wrap around and are garbage;
    callers widen their margin accordingly.
    """
    up1 = np.roll(values, -1, axis=axis)
    dn1 = np.roll(values, +1, axis=axis)
    up2 = np.roll(values, -2, axis=axis)
    dn2 = np.roll(values, +2, axis=axis)
    return (-up2 + 8.0 * up1 - 8.0 * dn1 + dn2) / (12.0 * h)


def complex_derivatives(grid: SpacetimeGrid, values: np.ndarray) -> dict:
    """All four complex-coordinate derivatives of a grid array.

    Returns {"y", "z", "ybar", "zbar"} with d_y = (d1 - i d2)/2,
    d_ybar = (d1 + i d2)/2, d_z = (d3 + i d4)/2, d_zbar = (d3 - i d4)/2.
    """
    d1 = axis_diff(values, 0, grid.spacing[0])
    d2 = axis_diff(values, 1, grid.spacing[1])
    d3 = axis_diff(values, 2, grid.spacing[2])
    d4 = axis_diff(values, 3, grid.spacing[3])
    return {
        "y": 0.5 * (d1 - 1j * d2),
        "ybar": 0.5 * (d1 + 1j * d2),
        "z": 0.5 * (d3 + 1j * d4),
        "zbar": 0.5 * (d3 - 1j * d4),
    }
