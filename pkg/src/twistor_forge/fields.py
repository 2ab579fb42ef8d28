"""Patchwise fields on the two-chart covering of twistor space.

The covering has chart 1 carrying the fiber coordinate lam and chart 2
carrying zeta = 1/lam; all numerics live on the shared circle |lam| = 1.
Every stored series uses lam-degrees, so a field holomorphic on chart 2
has non-positive degrees.  The antiholomorphic frame fields are

    chart 1:  V1 = d_ybar - lam*d_z,   V2 = d_zbar + lam*d_y,   V3 = d_lambar
    chart 2:  V1 = zeta*d_ybar - d_z,  V2 = zeta*d_zbar + d_y,  V3 = d_zetabar

chosen commuting and satisfying V_a^(1) = lam * V_a^(2) on the overlap.
They annihilate w1 = z + lam*ybar and w2 = y - lam*zbar.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grid import STENCIL_MARGIN, SpacetimeGrid, complex_derivatives
from .laurent import LaurentField, circle_nodes, mat_exp, max_abs
from .twistor_poly import MatrixLambdaPoly, ScalarLambdaPoly


class Patch(Enum):
    ONE = 1
    TWO = 2

    @property
    def other(self) -> "Patch":
        return Patch.TWO if self is Patch.ONE else Patch.ONE


def holomorphic_window(patch: Patch, band: int) -> tuple[int, int]:
    """lam-degree window of fields holomorphic on the given chart."""
    return (0, band) if patch is Patch.ONE else (-band, 0)


@dataclass
class PatchField:
    """Grid-indexed Laurent data on one chart.

    ``margin`` counts how many boundary layers hold stencil wrap-around
    garbage; residual maxima and exports ignore them.
    """

    grid: SpacetimeGrid
    patch: Patch
    data: LaurentField
    margin: int = 0

    def __post_init__(self):
        if self.data.lead_shape != self.grid.extents:
            raise ValueError(
                f"field lead shape {self.data.lead_shape} != grid extents {self.grid.extents}"
            )

    @property
    def dim(self) -> int:
        return self.data.dim

    @property
    def band(self) -> int:
        return self.data.band

    def sample_circle(self, nsamples: int) -> np.ndarray:
        return self.data.sample_circle(nsamples)

    def sample_circle_flat(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        return self.data.sample_circle_flat(start, stop, nsamples)

    def to_patch_field(self, band: int, nsamples: int) -> "PatchField":
        del nsamples
        field, _ = self.data.truncate(band)
        return PatchField(self.grid, self.patch, field, self.margin)

    def interior(self, extra: int = 0) -> tuple[slice, ...]:
        return self.grid.interior(self.margin + extra)

    def interior_max_norm(self, extra: int = 0) -> float:
        return max_abs(self.data.coeffs[self.interior(extra)])

    def antiholomorphy_defect(self) -> float:
        """Coefficient mass outside the chart's holomorphic degree window."""
        lo, hi = holomorphic_window(self.patch, self.band)
        return self.data.degree_mass_outside(lo, hi)


def identity_patch_field(grid: SpacetimeGrid, patch: Patch, dim: int, band: int = 0) -> PatchField:
    return PatchField(grid, patch, LaurentField.identity(dim, band, grid.extents))


def frame_apply(field: PatchField, a: int) -> PatchField:
    """Apply the frame field V_a of the field's own chart.

    Spatial derivatives are 4th-order central differences (margin grows
    by 2); multiplication by lam or zeta shifts the degree axis.  V_3
    applied to a Laurent field is zero by construction; the failure of a
    field to live in its chart's holomorphic window is reported
    separately by ``PatchField.antiholomorphy_defect``.
    """
    if a == 3:
        zero = LaurentField.zero(field.dim, 0, field.grid.extents)
        return PatchField(field.grid, field.patch, zero, field.margin)
    if a not in (1, 2):
        raise ValueError(f"frame index must be 1, 2, or 3, got {a}")
    derivs = complex_derivatives(field.grid, field.data.coeffs)

    def as_field(arr):
        return LaurentField(arr, field.band)

    if field.patch is Patch.ONE:
        if a == 1:
            out = as_field(derivs["ybar"]) - as_field(derivs["z"]).shift(1)
        else:
            out = as_field(derivs["zbar"]) + as_field(derivs["y"]).shift(1)
    else:
        if a == 1:
            out = as_field(derivs["ybar"]).shift(-1) - as_field(derivs["z"]).pad_to_band(field.band + 1)
        else:
            out = as_field(derivs["zbar"]).shift(-1) + as_field(derivs["y"]).pad_to_band(field.band + 1)
    return PatchField(field.grid, field.patch, out, field.margin + STENCIL_MARGIN)


def patch_transition(field: LaurentField) -> LaurentField:
    """Reindex lam-degrees to zeta-degrees (degree d becomes -d)."""
    return LaurentField(field.coeffs[..., ::-1, :, :].copy(), field.band)


class CommutingExpSection:
    """exp(sign * p(x, lam) * T) with scalar polynomial p and constant T.

    Because the exponent commutes with itself everywhere, sampling,
    inversion, and the logarithmic frame derivative -(V_a psi) psi^-1 =
    -sign * (V_a p) * T are all exact.
    """

    def __init__(self, grid: SpacetimeGrid, patch: Patch, exponent: ScalarLambdaPoly,
                 gen: np.ndarray, sign: float = 1.0):
        self.grid = grid
        self.patch = patch
        self.exponent = exponent
        self.gen = np.asarray(gen, dtype=complex)
        self.sign = float(sign)
        self.margin = 0
        # constant generator: diagonalize once for fast sampling
        w, v = np.linalg.eig(self.gen)
        cond = np.linalg.cond(v)
        self._eig = (w, v, np.linalg.inv(v)) if np.isfinite(cond) and cond < 1e8 else None

    @property
    def dim(self) -> int:
        return self.gen.shape[-1]

    def _monomials_flat(self) -> dict[int, np.ndarray]:
        if not hasattr(self, "_mono_cache"):
            self._mono_cache = {
                d: arr.reshape(-1)
                for d, arr in self.exponent.eval_monomials(self.grid).items()
            }
        return self._mono_cache

    def _exponent_values(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        """sign * p(x, lam_j) on a flat block of grid points."""
        lams = circle_nodes(nsamples)
        vals = np.zeros((stop - start, nsamples), dtype=complex)
        for d, arr in self._monomials_flat().items():
            vals += arr[start:stop, None] * lams[None, :] ** d
        return self.sign * vals

    def _exp_of(self, scalars: np.ndarray) -> np.ndarray:
        if self._eig is not None:
            w, v, vinv = self._eig
            diag = np.exp(scalars[..., None] * w)
            return np.einsum("ij,...j,jk->...ik", v, diag, vinv)
        return mat_exp(scalars[..., None, None] * self.gen)

    def sample_circle_flat(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        return self._exp_of(self._exponent_values(start, stop, nsamples))

    def sample_circle(self, nsamples: int) -> np.ndarray:
        values = self.sample_circle_flat(0, self.grid.npoints, nsamples)
        return values.reshape(*self.grid.extents, nsamples, self.dim, self.dim)

    def inverse(self) -> "CommutingExpSection":
        return CommutingExpSection(self.grid, self.patch, self.exponent, self.gen, -self.sign)

    def log_frame_derivative(self, a: int) -> PatchField:
        """-(V_a psi) psi^-1 evaluated exactly (margin 0)."""
        if a == 3:
            zero = LaurentField.zero(self.dim, 0, self.grid.extents)
            return PatchField(self.grid, self.patch, zero, 0)
        poly = MatrixLambdaPoly.from_scalar(self.exponent, self.gen)
        dpoly = poly.frame_derivative(self.patch.value, a).scale(-self.sign)
        return PatchField(self.grid, self.patch, dpoly.eval_grid(self.grid), 0)

    def to_patch_field(self, band: int, nsamples: int) -> PatchField:
        lo, hi = holomorphic_window(self.patch, band)
        field = LaurentField.from_samples(self.sample_circle(nsamples), band).window(lo, hi)
        return PatchField(self.grid, self.patch, field, 0)


class ExpSection:
    """exp(sign * X(x, lam)) for a general matrix twistor polynomial X."""

    def __init__(self, grid: SpacetimeGrid, patch: Patch, exponent: MatrixLambdaPoly,
                 sign: float = 1.0):
        self.grid = grid
        self.patch = patch
        self.exponent = exponent
        self.sign = float(sign)
        self.margin = 0

    @property
    def dim(self) -> int:
        return self.exponent.dim

    def _field(self):
        if not hasattr(self, "_field_cache"):
            self._field_cache = self.exponent.eval_grid(self.grid)
        return self._field_cache

    def sample_circle(self, nsamples: int) -> np.ndarray:
        return mat_exp(self.sign * self._field().sample_circle(nsamples))

    def sample_circle_flat(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        return mat_exp(self.sign * self._field().sample_circle_flat(start, stop, nsamples))

    def inverse(self) -> "ExpSection":
        return ExpSection(self.grid, self.patch, self.exponent, -self.sign)

    def to_patch_field(self, band: int, nsamples: int) -> PatchField:
        lo, hi = holomorphic_window(self.patch, band)
        field = LaurentField.from_samples(self.sample_circle(nsamples), band).window(lo, hi)
        return PatchField(self.grid, self.patch, field, 0)
