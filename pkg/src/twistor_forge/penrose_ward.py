"""The correspondence between patching data, flat (0,1)-connections, and
gauge potentials.

From a factorized 0-cochain the per-chart connection components are the
logarithmic frame derivatives b_a = -(V_a psi) psi^-1; they satisfy the
flatness identity V_1 b_2 - V_2 b_1 + [b_1, b_2] = 0, scale as
b_a^(1) = lam * b_a^(2) across the charts, and (being holomorphic on
both charts at once) are forced to be linear in lam:

    b_1^(1) = a_ybar - lam * a_z,      b_2^(1) = a_zbar + lam * a_y,
    b_1^(2) = zeta * a_ybar - a_z,     b_2^(2) = zeta * a_zbar + a_y.

Reading off the coefficients recovers the gauge potential; placing them
back is the exact inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotGlobalFormError, NotLinearInLambdaError
from .fields import CommutingExpSection, Patch, PatchField, frame_apply
from .grid import STENCIL_MARGIN, SpacetimeGrid, complex_derivatives
from .laurent import LaurentField, circle_nodes, max_abs


@dataclass
class GaugePotential:
    """Lie-algebra-valued potential components on the grid (units 1/length)."""

    grid: SpacetimeGrid
    a_y: np.ndarray
    a_z: np.ndarray
    a_ybar: np.ndarray
    a_zbar: np.ndarray
    margin: int = 0

    COMPONENTS = ("a_y", "a_z", "a_ybar", "a_zbar")

    @classmethod
    def zero(cls, grid: SpacetimeGrid, dim: int) -> "GaugePotential":
        shape = (*grid.extents, dim, dim)
        return cls(grid, *(np.zeros(shape, dtype=complex) for _ in range(4)))

    @property
    def dim(self) -> int:
        return self.a_y.shape[-1]

    def components(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.COMPONENTS}

    def map(self, fn, margin: int | None = None) -> "GaugePotential":
        return GaugePotential(
            self.grid,
            *(fn(getattr(self, name)) for name in self.COMPONENTS),
            margin=self.margin if margin is None else margin,
        )

    def __add__(self, other: "GaugePotential") -> "GaugePotential":
        out = self.map(lambda a: a.copy(), margin=max(self.margin, other.margin))
        for name in self.COMPONENTS:
            getattr(out, name)[...] += getattr(other, name)
        return out

    def scale(self, c: complex) -> "GaugePotential":
        return self.map(lambda a: c * a)

    def interior_gap(self, other: "GaugePotential") -> float:
        sl = self.grid.interior(max(self.margin, other.margin))
        return max(
            max_abs(getattr(self, name)[sl] - getattr(other, name)[sl])
            for name in self.COMPONENTS
        )


@dataclass
class Connection01:
    """Per-chart (0,1)-connection components; the vertical one vanishes."""

    grid: SpacetimeGrid
    comp: dict[tuple[int, int], PatchField]  # keys (chart, a) with a in {1, 2}
    margin: int = 0
    overlap_defect: float = 0.0

    def component(self, patch: Patch, a: int) -> PatchField:
        return self.comp[(patch.value, a)]

    @property
    def dim(self) -> int:
        return self.comp[(1, 1)].dim


def _interior_degree_mass_outside(pf: PatchField, lo: int, hi: int, extra: int = 0) -> float:
    sl = pf.grid.interior(pf.margin + extra)
    worst = 0.0
    for d in pf.data.degrees():
        if lo <= d <= hi:
            continue
        worst = max(worst, max_abs(pf.data.coeffs[sl][..., pf.band + d, :, :]))
    return worst


def delta0(section, a: int, band: int, nsamples: int) -> PatchField:
    """Logarithmic frame derivative -(V_a psi) psi^-1 of a chart section.

    Exact (margin 0) for commuting exponential sections; otherwise
    computed from circle samples with the central-difference stencil
    (margin grows by 2).
    """
    if isinstance(section, CommutingExpSection):
        return section.log_frame_derivative(a)
    grid, patch = section.grid, section.patch
    if a == 3:
        return PatchField(grid, patch, LaurentField.zero(section.dim, 0, grid.extents),
                          getattr(section, "margin", 0))
    values = section.sample_circle(nsamples)
    derivs = complex_derivatives(grid, values)
    lams = circle_nodes(nsamples)[:, None, None]
    if patch is Patch.ONE:
        dpsi = derivs["ybar"] - lams * derivs["z"] if a == 1 else derivs["zbar"] + lams * derivs["y"]
    else:
        dpsi = derivs["ybar"] / lams - derivs["z"] if a == 1 else derivs["zbar"] / lams + derivs["y"]
    result = -dpsi @ np.linalg.inv(values)
    margin = getattr(section, "margin", 0) + STENCIL_MARGIN
    return PatchField(grid, patch, LaurentField.from_samples(result, band), margin)


def connection_from_cochain(psi1, psi2, band: int, nsamples: int,
                            tol: float = 1e-6) -> Connection01:
    """Connection components of both charts from a factorized cochain.

    Verifies the cross-chart scaling b_a^(1) = lam * b_a^(2) on the
    overlap; a violation beyond ``tol`` means the cochain does not induce
    a single global form and is rejected.
    """
    for sec in (psi1, psi2):
        if isinstance(sec, PatchField):
            leak = sec.antiholomorphy_defect()
            if leak > tol:
                raise NotGlobalFormError(
                    f"chart section leaks outside its holomorphic window by {leak:.3e}"
                )
    comp = {}
    for patch, sec in ((Patch.ONE, psi1), (Patch.TWO, psi2)):
        for a in (1, 2):
            comp[(patch.value, a)] = delta0(sec, a, band, nsamples)
    margin = max(pf.margin for pf in comp.values())
    lams = circle_nodes(nsamples)[:, None, None]
    sl = None
    defect = 0.0
    for a in (1, 2):
        one = comp[(1, a)]
        two = comp[(2, a)]
        sl = one.grid.interior(margin)
        gap = one.sample_circle(nsamples)[sl] - lams * two.sample_circle(nsamples)[sl]
        defect = max(defect, max_abs(gap))
    if defect > tol:
        raise NotGlobalFormError(
            f"chart components disagree on the overlap by {defect:.3e} (tol {tol:.1e})"
        )
    return Connection01(comp[(1, 1)].grid, comp, margin, overlap_defect=defect)


def flatness_residual(connection: Connection01, nsamples: int = 0) -> float:
    """Max norm of V_1 b_2 - V_2 b_1 + [b_1, b_2] plus holomorphy defects.

    The frames commute, so there are no structure-constant terms; the
    vertical direction contributes only through each component's leakage
    outside its chart's degree window.
    """
    worst = 0.0
    for patch in (Patch.ONE, Patch.TWO):
        b1 = connection.component(patch, 1)
        b2 = connection.component(patch, 2)
        curl = frame_apply(b2, 1).data - frame_apply(b1, 2).data
        bracket = b1.data.mul(b2.data) - b2.data.mul(b1.data)
        total = curl + bracket
        margin = max(b1.margin, b2.margin) + STENCIL_MARGIN
        n = nsamples or max(32, 2 * total.band + 1)
        sl = connection.grid.interior(margin)
        worst = max(worst, max_abs(total.sample_circle(n)[sl]))
        for b in (b1, b2):
            lo = 0 if patch is Patch.ONE else -b.band
            hi = b.band if patch is Patch.ONE else 0
            worst = max(worst, _interior_degree_mass_outside(b, lo, hi))
    return worst


def extract_potential(connection: Connection01, tol: float = 1e-8) -> tuple[GaugePotential, float]:
    """Read the potential off the chart-1 components.

    The components of a genuine pulled-back connection are linear in
    lam; the mass at any other degree is returned as the linearity
    defect and must stay below ``tol``.
    """
    b1 = connection.component(Patch.ONE, 1)
    b2 = connection.component(Patch.ONE, 2)
    defect = max(
        _interior_degree_mass_outside(b1, 0, 1),
        _interior_degree_mass_outside(b2, 0, 1),
    )
    if defect > tol:
        raise NotLinearInLambdaError(
            f"connection carries degree mass {defect:.3e} outside {{0, 1}} (tol {tol:.1e})"
        )
    potential = GaugePotential(
        connection.grid,
        a_y=b2.data.coeff(1).copy(),
        a_z=-b1.data.coeff(1).copy(),
        a_ybar=b1.data.coeff(0).copy(),
        a_zbar=b2.data.coeff(0).copy(),
        margin=connection.margin,
    )
    return potential, defect


def reconstruct_connection(potential: GaugePotential) -> Connection01:
    """Place the potential into both charts' components (exact inverse
    of extract_potential)."""
    grid = potential.grid
    dim = potential.dim

    def build(patch: Patch, entries: dict[int, np.ndarray]) -> PatchField:
        data = LaurentField.zero(dim, 1, grid.extents)
        for d, arr in entries.items():
            data.coeffs[..., 1 + d, :, :] = arr
        return PatchField(grid, patch, data, potential.margin)

    comp = {
        (1, 1): build(Patch.ONE, {0: potential.a_ybar, 1: -potential.a_z}),
        (1, 2): build(Patch.ONE, {0: potential.a_zbar, 1: potential.a_y}),
        (2, 1): build(Patch.TWO, {-1: potential.a_ybar, 0: -potential.a_z}),
        (2, 2): build(Patch.TWO, {-1: potential.a_zbar, 0: potential.a_y}),
    }
    return Connection01(grid, comp, potential.margin)


def adjoint_action(psi1, psi2, connection: Connection01, band: int,
                   nsamples: int) -> Connection01:
    """Dress the connection: b_a -> psi^-1 b_a psi + psi^-1 (V_a psi).

    Flat connections stay flat up to discretization error.
    """
    comp = {}
    margin = connection.margin
    for patch, sec in ((Patch.ONE, psi1), (Patch.TWO, psi2)):
        values = sec.sample_circle(nsamples)
        inv = np.linalg.inv(values)
        derivs = complex_derivatives(connection.grid, values)
        lams = circle_nodes(nsamples)[:, None, None]
        for a in (1, 2):
            if patch is Patch.ONE:
                dpsi = derivs["ybar"] - lams * derivs["z"] if a == 1 \
                    else derivs["zbar"] + lams * derivs["y"]
            else:
                dpsi = derivs["ybar"] / lams - derivs["z"] if a == 1 \
                    else derivs["zbar"] / lams + derivs["y"]
            b_vals = connection.component(patch, a).sample_circle(nsamples)
            dressed = inv @ b_vals @ values + inv @ dpsi
            new_margin = max(margin, getattr(sec, "margin", 0) + STENCIL_MARGIN,
                             connection.component(patch, a).margin)
            comp[(patch.value, a)] = PatchField(
                connection.grid, patch, LaurentField.from_samples(dressed, band), new_margin
            )
    out_margin = max(pf.margin for pf in comp.values())
    return Connection01(connection.grid, comp, out_margin)
