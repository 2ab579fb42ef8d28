"""Gauge fields on the spacetime grid: curvature, self-duality and
Yang-Mills residuals, gauge transformations, and gauge-invariant
signatures.

Self-duality is checked in two independent ways: through the complex
components (f_yz = 0, f_ybar_zbar = 0, f_y_ybar + f_z_zbar = 0) and
through the Hodge star in real coordinates.  The orientation sign of
the volume form is not assumed; it is calibrated once against the
explicitly self-dual field a_ybar = y, a_zbar = -z and cached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonInvertibleError
from .grid import STENCIL_MARGIN, SpacetimeGrid, complex_derivatives
from .laurent import commutator, max_abs
from .penrose_ward import GaugePotential

#: antisymmetric pairs in storage order
_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _levi_civita() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    from itertools import permutations

    for perm in permutations(range(4)):
        sign = 1.0
        p = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        eps[perm] = sign
    return eps


_EPS = _levi_civita()
_ORIENTATION_CACHE: dict[None, int] = {}


@dataclass
class FieldStrength:
    """Curvature components; ``comps[..., mu, nu, :, :]`` is antisymmetric."""

    grid: SpacetimeGrid
    comps: np.ndarray
    f_yz: np.ndarray
    f_ybar_zbar: np.ndarray
    f_diag: np.ndarray  # f_y_ybar + f_z_zbar
    margin: int

    @property
    def dim(self) -> int:
        return self.comps.shape[-1]

    def interior(self, extra: int = 0):
        return self.grid.interior(self.margin + extra)


def real_components(potential: GaugePotential) -> list[np.ndarray]:
    """Potential in real coordinates: A = A_mu dx^mu."""
    a_y, a_z = potential.a_y, potential.a_z
    a_ybar, a_zbar = potential.a_ybar, potential.a_zbar
    return [
        a_y + a_ybar,
        1j * (a_y - a_ybar),
        a_z + a_zbar,
        1j * (a_zbar - a_z),
    ]


def field_strength(potential: GaugePotential) -> FieldStrength:
    """F_mu_nu = d_mu A_nu - d_nu A_mu + [A_mu, A_nu] (margin grows by 2)."""
    grid = potential.grid
    comps_a = real_components(potential)
    derivs = [complex_derivatives(grid, a) for a in comps_a]
    # complex_derivatives returns complex-coordinate combinations; rebuild
    # the axis derivatives from them
    axis = []
    for d in derivs:
        d1 = d["y"] + d["ybar"]
        d2 = 1j * (d["y"] - d["ybar"])
        d3 = d["z"] + d["zbar"]
        d4 = 1j * (d["zbar"] - d["z"])
        axis.append([d1, d2, d3, d4])
    dim = potential.dim
    comps = np.zeros((*grid.extents, 4, 4, dim, dim), dtype=complex)
    for mu, nu in _PAIRS:
        f = axis[nu][mu] - axis[mu][nu] + commutator(comps_a[mu], comps_a[nu])
        comps[..., mu, nu, :, :] = f
        comps[..., nu, mu, :, :] = -f
    dy = complex_derivatives(grid, potential.a_y)
    dz = complex_derivatives(grid, potential.a_z)
    dyb = complex_derivatives(grid, potential.a_ybar)
    dzb = complex_derivatives(grid, potential.a_zbar)
    f_yz = dz["y"] - dy["z"] + commutator(potential.a_y, potential.a_z)
    f_ybar_zbar = dzb["ybar"] - dyb["zbar"] + commutator(potential.a_ybar, potential.a_zbar)
    f_diag = (
        dyb["y"] - dy["ybar"] + commutator(potential.a_y, potential.a_ybar)
        + dzb["z"] - dz["zbar"] + commutator(potential.a_z, potential.a_zbar)
    )
    return FieldStrength(grid, comps, f_yz, f_ybar_zbar, f_diag,
                         potential.margin + STENCIL_MARGIN)


def hodge_star(strength: FieldStrength, orientation_sign: int) -> np.ndarray:
    """(*F)_mu_nu = (sign/2) eps_mu_nu_rho_sigma F_rho_sigma."""
    return 0.5 * orientation_sign * np.einsum(
        "mnrs,...rsij->...mnij", _EPS, strength.comps
    )


def sdym_residual_complex(potential: GaugePotential, margin: int | None = None) -> float:
    """Max norm of the three complex self-duality equations."""
    strength = field_strength(potential)
    sl = strength.grid.interior(strength.margin if margin is None else max(margin, strength.margin))
    return max(
        max_abs(strength.f_yz[sl]),
        max_abs(strength.f_ybar_zbar[sl]),
        max_abs(strength.f_diag[sl]),
    )


def calibrate_orientation() -> int:
    """Volume-form sign that annihilates the known self-dual field.

    Evaluated once on a small instance of a_ybar = y, a_zbar = -z and
    cached; the opposite sign would flag anti-self-dual conventions.
    """
    if None in _ORIENTATION_CACHE:
        return _ORIENTATION_CACHE[None]
    grid = SpacetimeGrid.centered([5, 5, 5, 5], 0.25)
    potential = GaugePotential.zero(grid, 1)
    y, z, _, _ = grid.complex_arrays()
    potential.a_ybar[..., 0, 0] = y
    potential.a_zbar[..., 0, 0] = -z
    strength = field_strength(potential)
    sl = strength.interior()
    scores = {}
    for sign in (+1, -1):
        gap = hodge_star(strength, sign) - strength.comps
        scores[sign] = max_abs(gap[sl])
    best = +1 if scores[+1] <= scores[-1] else -1
    if not scores[best] < 1e-10 < scores[-best]:
        raise RuntimeError(f"orientation calibration is ambiguous: {scores}")
    _ORIENTATION_CACHE[None] = best
    return best


def sdym_residual_hodge(potential: GaugePotential, orientation_sign: int | None = None,
                        margin: int | None = None) -> float:
    """Max norm of *F - F with the calibrated (or given) orientation."""
    sign = calibrate_orientation() if orientation_sign is None else orientation_sign
    strength = field_strength(potential)
    sl = strength.grid.interior(strength.margin if margin is None else max(margin, strength.margin))
    gap = hodge_star(strength, sign) - strength.comps
    return max_abs(gap[sl])


def ym_residual(potential: GaugePotential, margin: int | None = None) -> float:
    """Max norm of the Yang-Mills operator sum_mu D_mu F_mu_nu.

    This is the dual component form of the 3-form equation D(*F) = 0:
    dualizing the covariant exterior derivative of *F lands back on the
    covariant divergence of F (the divergence of *F itself would be the
    Bianchi identity, which holds for every curl).  Needs two stencils
    past the potential's own margin; vanishes to stencil accuracy
    whenever the field is self-dual.
    """
    strength = field_strength(potential)
    comps_a = real_components(potential)
    grid = potential.grid
    deep = strength.margin + STENCIL_MARGIN if margin is None else max(margin, strength.margin + STENCIL_MARGIN)
    sl = grid.interior(deep)
    worst = 0.0
    for nu in range(4):
        total = np.zeros((*grid.extents, potential.dim, potential.dim), dtype=complex)
        for mu in range(4):
            if mu == nu:
                continue
            f = strength.comps[..., mu, nu, :, :]
            d = complex_derivatives(grid, f)
            if mu == 0:
                dmu = d["y"] + d["ybar"]
            elif mu == 1:
                dmu = 1j * (d["y"] - d["ybar"])
            elif mu == 2:
                dmu = d["z"] + d["zbar"]
            else:
                dmu = 1j * (d["zbar"] - d["z"])
            total += dmu + commutator(comps_a[mu], f)
        worst = max(worst, max_abs(total[sl]))
    return worst


def gauge_transform(potential: GaugePotential, g: np.ndarray) -> GaugePotential:
    """A -> g^-1 A g + g^-1 dg, componentwise in complex coordinates."""
    cond = np.linalg.cond(g)
    if not np.all(np.isfinite(cond)) or np.max(cond) > 1e12:
        raise NonInvertibleError("gauge transformation matrix is numerically singular")
    grid = potential.grid
    g_inv = np.linalg.inv(g)
    dg = complex_derivatives(grid, g)
    return GaugePotential(
        grid,
        a_y=g_inv @ potential.a_y @ g + g_inv @ dg["y"],
        a_z=g_inv @ potential.a_z @ g + g_inv @ dg["z"],
        a_ybar=g_inv @ potential.a_ybar @ g + g_inv @ dg["ybar"],
        a_zbar=g_inv @ potential.a_zbar @ g + g_inv @ dg["zbar"],
        margin=potential.margin + STENCIL_MARGIN,
    )


def gauge_invariant_signature(potential: GaugePotential) -> tuple[list[np.ndarray], int]:
    """Pointwise conjugation-invariant scalars of the curvature.

    Returns ([tr F.F, tr F^F density, sorted eigenvalues of sum F.F],
    margin), each complex grid split into real and imaginary parts.
    Equal signatures are necessary (not sufficient) for two potentials
    to be gauge equivalent.
    """
    strength = field_strength(potential)
    square = np.einsum("...mnij,...mnjk->...ik", strength.comps, strength.comps)
    tr_ff = np.einsum("...ii->...", square)
    wedge = np.einsum(
        "mnrs,...mnij,...rsji->...", _EPS, strength.comps, strength.comps
    )
    eigs = np.linalg.eigvals(0.5 * square)
    order = np.lexsort((eigs.imag, eigs.real), axis=-1)
    eigs = np.take_along_axis(eigs, order, axis=-1)
    grids: list[np.ndarray] = [0.5 * tr_ff.real, 0.5 * tr_ff.imag,
                               0.25 * wedge.real, 0.25 * wedge.imag]
    for k in range(eigs.shape[-1]):
        grids.extend([eigs[..., k].real, eigs[..., k].imag])
    return grids, strength.margin


def signature_gap(a: GaugePotential, b: GaugePotential) -> float:
    """Max pointwise difference of the invariant signatures on the
    common valid region."""
    sig_a, margin_a = gauge_invariant_signature(a)
    sig_b, margin_b = gauge_invariant_signature(b)
    sl = a.grid.interior(max(margin_a, margin_b))
    return max(max_abs(ga[sl] - gb[sl]) for ga, gb in zip(sig_a, sig_b))


def antihermiticity_report(potential: GaugePotential) -> float:
    """Deviation from the compact-group reality condition (report only).

    For an anti-hermitian connection the complex components pair up as
    a_ybar = -a_y^dagger and a_zbar = -a_z^dagger; the returned number
    is the worst violation.  Nothing in the pipeline enforces it.
    """
    sl = potential.grid.interior(potential.margin)
    swap = lambda m: np.conj(np.swapaxes(m, -1, -2))
    return max(
        max_abs(potential.a_ybar[sl] + swap(potential.a_y[sl])),
        max_abs(potential.a_zbar[sl] + swap(potential.a_z[sl])),
    )


@dataclass
class ResidualEntry:
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.value <= self.tol


@dataclass
class ResidualReport:
    """Named residual norms with their tolerances."""

    entries: dict[str, ResidualEntry]

    def add(self, name: str, value: float, tol: float):
        self.entries[name] = ResidualEntry(float(value), float(tol))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries.values())

    def lines(self) -> list[str]:
        out = []
        for name, e in self.entries.items():
            verdict = "PASS" if e.passed else "FAIL"
            out.append(f"{name:<12} {e.value:.6e}  (tol {e.tol:.1e})  {verdict}")
        return out

    def to_json(self) -> dict:
        return {
            name: {"value": e.value, "tol": e.tol, "passed": e.passed}
            for name, e in self.entries.items()
        }
