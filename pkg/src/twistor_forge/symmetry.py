"""Infinitesimal symmetries of the self-dual system.

A generator is a pair of holomorphic overlap matrices (t12, t21).  On a
factorized background psi1^-1 psi2 = F12 it produces the dressed overlap
function

    Phi12 = psi1 (t12 F12 - F12 t21) psi2^-1
          = psi1 t12 psi1^-1 - psi2 t21 psi2^-1,

which is additively split as Phi12 = phi1 - phi2 into chart-holomorphic
halves (constant term to phi1; the leftover freedom is a lam-free
section and is exercised by splitting_freedom_check).  The halves drive
first-order flows of the factors, of the connection, and of the
potential via circle averages; the potential flow is tangent to the
self-dual solution space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StaleFactorizationError
from .fields import Patch, PatchField, frame_apply
from .grid import STENCIL_MARGIN, SpacetimeGrid, complex_derivatives
from .laurent import LaurentField, circle_nodes, max_abs
from .penrose_ward import Connection01, GaugePotential
from .twistor_poly import MatrixLambdaPoly, TwistorPolynomial


@dataclass
class SymmetryGenerator:
    """Holomorphic overlap pair entered as twistor polynomials."""

    name: str
    t12: MatrixLambdaPoly
    t21: MatrixLambdaPoly

    @classmethod
    def from_polynomials(cls, name: str, t12: TwistorPolynomial,
                         t21: TwistorPolynomial) -> "SymmetryGenerator":
        return cls(name, t12.expand(), t21.expand())

    def holomorphy_defect(self) -> float:
        """Exact frame derivatives of the entries; zero for the twistor
        vocabulary by construction."""
        worst = 0.0
        for poly, patch in ((self.t12, 1), (self.t21, 1), (self.t12, 2), (self.t21, 2)):
            for a in (1, 2, 3):
                worst = max(worst, poly.frame_derivative(patch, a).max_coeff_norm())
        return worst

    def eval_fields(self, grid: SpacetimeGrid) -> tuple[LaurentField, LaurentField]:
        return self.t12.eval_grid(grid), self.t21.eval_grid(grid)


@dataclass
class SplitPair:
    """Chart-holomorphic halves of Phi12 with phi1 - phi2 = Phi12."""

    phi1: PatchField
    phi2: PatchField

    @property
    def margin(self) -> int:
        return max(self.phi1.margin, self.phi2.margin)

    def shifted(self, section: np.ndarray) -> "SplitPair":
        """Shift both halves by the same lam-free grid field (the split
        freedom)."""
        phi1 = PatchField(self.phi1.grid, Patch.ONE, self.phi1.data.copy(), self.phi1.margin)
        phi2 = PatchField(self.phi2.grid, Patch.TWO, self.phi2.data.copy(), self.phi2.margin)
        phi1.data.coeffs[..., phi1.band, :, :] += section
        phi2.data.coeffs[..., phi2.band, :, :] += section
        return SplitPair(phi1, phi2)


def make_phi(theta12: LaurentField, theta21: LaurentField, psi1, psi2,
             f12, band: int, nsamples: int, stale_tol: float = 1e-8,
             chunk: int = 2048) -> tuple[LaurentField, dict]:
    """Dressed overlap function of a generator on a factorized background.

    ``psi1``, ``psi2`` and ``f12`` only need block sampling.  Both
    algebraic forms are computed and compared, as is the antisymmetry
    of the reversed-orientation function; a background whose factors no
    longer multiply back to F12 within ``stale_tol`` is rejected.
    """
    lead = theta12.lead_shape
    npts = int(np.prod(lead))
    dim = theta12.dim
    coeffs = np.empty((npts, 2 * band + 1, dim, dim), dtype=complex)
    info = {"stale_defect": 0.0, "forms_gap": 0.0,
            "antisymmetry_defect": 0.0, "projection_tail": 0.0}
    for start in range(0, npts, chunk):
        stop = min(start + chunk, npts)
        s1 = psi1.sample_circle_flat(start, stop, nsamples)
        s2 = psi2.sample_circle_flat(start, stop, nsamples)
        fs = f12.sample_circle_flat(start, stop, nsamples)
        inv1 = np.linalg.inv(s1)
        inv2 = np.linalg.inv(s2)
        info["stale_defect"] = max(info["stale_defect"], max_abs(inv1 @ s2 - fs))
        t12 = theta12.sample_circle_flat(start, stop, nsamples)
        t21 = theta21.sample_circle_flat(start, stop, nsamples)
        phi_a = s1 @ (t12 @ fs - fs @ t21) @ inv2
        phi_b = s1 @ t12 @ inv1 - s2 @ t21 @ inv2
        info["forms_gap"] = max(info["forms_gap"], max_abs(phi_a - phi_b))
        f21 = np.linalg.inv(fs)
        phi_rev = s2 @ (t21 @ f21 - f21 @ t12) @ inv1
        info["antisymmetry_defect"] = max(info["antisymmetry_defect"],
                                          max_abs(phi_rev + phi_a))
        block = LaurentField.from_samples(phi_a, band)
        coeffs[start:stop] = block.coeffs
        info["projection_tail"] = max(info["projection_tail"],
                                      max_abs(block.sample_circle(nsamples) - phi_a))
    if info["stale_defect"] > stale_tol:
        raise StaleFactorizationError(
            f"factors reproduce the patching data only to {info['stale_defect']:.3e} "
            f"(tol {stale_tol:.1e})"
        )
    shape = (*lead, 2 * band + 1, dim, dim)
    return LaurentField(coeffs.reshape(shape), band), info


def split_phi(grid: SpacetimeGrid, phi12: LaurentField, margin: int = 0) -> SplitPair:
    """Additive split per grid point with the constant-to-phi1 rule.

    Any other valid split differs by a lam-free, x-dependent global
    section; that freedom is pinned here and probed separately.
    """
    plus, minus = phi12.cauchy_split()
    return SplitPair(
        PatchField(grid, Patch.ONE, plus, margin),
        PatchField(grid, Patch.TWO, minus, margin),
    )


def act_on_psi(pair: SplitPair, psi1, psi2, theta12: LaurentField,
               theta21: LaurentField, f12, nsamples: int,
               chunk: int = 2048) -> tuple[PatchField, PatchField, float]:
    """First-order factor updates dpsi_i = -phi_i psi_i.

    Also returns the defect of the induced change of psi1^-1 psi2
    against the direct infinitesimal action t12 F12 - F12 t21.
    """
    grid = pair.phi1.grid
    npts = grid.npoints
    dim = pair.phi1.dim
    band = pair.phi1.band
    out1 = np.empty((npts, 2 * band + 1, dim, dim), dtype=complex)
    out2 = np.empty_like(out1)
    defect = 0.0
    for start in range(0, npts, chunk):
        stop = min(start + chunk, npts)
        s1 = psi1.sample_circle_flat(start, stop, nsamples)
        s2 = psi2.sample_circle_flat(start, stop, nsamples)
        p1 = pair.phi1.sample_circle_flat(start, stop, nsamples)
        p2 = pair.phi2.sample_circle_flat(start, stop, nsamples)
        d1 = -p1 @ s1
        d2 = -p2 @ s2
        out1[start:stop] = LaurentField.from_samples(d1, band).window(0, band).coeffs
        out2[start:stop] = LaurentField.from_samples(d2, band).window(-band, 0).coeffs
        # change of psi1^-1 psi2 induced by the factor updates
        inv1 = np.linalg.inv(s1)
        df_from_psi = -inv1 @ d1 @ inv1 @ s2 + inv1 @ d2
        fs = f12.sample_circle_flat(start, stop, nsamples)
        t12 = theta12.sample_circle_flat(start, stop, nsamples)
        t21 = theta21.sample_circle_flat(start, stop, nsamples)
        defect = max(defect, max_abs(df_from_psi - (t12 @ fs - fs @ t21)))
    shape = (*grid.extents, 2 * band + 1, dim, dim)
    dpsi1 = PatchField(grid, Patch.ONE, LaurentField(out1.reshape(shape), band), pair.margin)
    dpsi2 = PatchField(grid, Patch.TWO, LaurentField(out2.reshape(shape), band), pair.margin)
    return dpsi1, dpsi2, defect


def act_on_connection(connection: Connection01, pair: SplitPair,
                      nsamples: int) -> tuple[dict, float]:
    """First-order connection flow db_a = V_a phi_i + [b_a, phi_i] per chart.

    Returns the components keyed like Connection01.comp plus the defect
    of the cross-chart scaling db^(1) = lam * db^(2) on the overlap.
    """
    halves = {1: pair.phi1, 2: pair.phi2}
    comp = {}
    for patch in (Patch.ONE, Patch.TWO):
        phi = halves[patch.value]
        for a in (1, 2):
            deriv = frame_apply(phi, a)
            b = connection.component(patch, a)
            bracket = b.data.mul(phi.data) - phi.data.mul(b.data)
            total = deriv.data + bracket
            margin = max(deriv.margin, b.margin, phi.margin)
            comp[(patch.value, a)] = PatchField(phi.grid, patch, total, margin)
    defect = 0.0
    grid = pair.phi1.grid
    lams = circle_nodes(nsamples)[:, None, None]
    for a in (1, 2):
        one = comp[(1, a)]
        two = comp[(2, a)]
        sl = grid.interior(max(one.margin, two.margin))
        v1 = LaurentField(one.data.coeffs[sl], one.band).sample_circle(nsamples)
        v2 = LaurentField(two.data.coeffs[sl], two.band).sample_circle(nsamples)
        defect = max(defect, max_abs(v1 - lams * v2))
    return comp, defect


def act_on_potential(connection: Connection01, pair: SplitPair) -> GaugePotential:
    """Potential flow via circle averages of the connection-flow
    integrands.

    Each component is the degree-0 circle average of (V_a + b_a) applied
    to the matching half: chart 2 supplies the y and z flows, chart 1
    the conjugates.
    """

    def integrand(patch: Patch, a: int, phi: PatchField) -> LaurentField:
        deriv = frame_apply(phi, a)
        b = connection.component(patch, a)
        return deriv.data + b.data.mul(phi.data) - phi.data.mul(b.data)

    grid = pair.phi1.grid
    margin = pair.margin + STENCIL_MARGIN
    return GaugePotential(
        grid,
        a_y=integrand(Patch.TWO, 2, pair.phi2).contour_average(0),
        a_z=-integrand(Patch.TWO, 1, pair.phi2).contour_average(0),
        a_ybar=integrand(Patch.ONE, 1, pair.phi1).contour_average(0),
        a_zbar=integrand(Patch.ONE, 2, pair.phi1).contour_average(0),
        margin=max(margin, connection.margin),
    )


def gauge_flow(potential: GaugePotential, section: np.ndarray) -> GaugePotential:
    """Linearized gauge transformation d_mu phi + [A_mu, phi]."""
    grid = potential.grid
    d = complex_derivatives(grid, section)
    out = GaugePotential(
        grid,
        a_y=d["y"] + potential.a_y @ section - section @ potential.a_y,
        a_z=d["z"] + potential.a_z @ section - section @ potential.a_z,
        a_ybar=d["ybar"] + potential.a_ybar @ section - section @ potential.a_ybar,
        a_zbar=d["zbar"] + potential.a_zbar @ section - section @ potential.a_zbar,
        margin=potential.margin + STENCIL_MARGIN,
    )
    return out


def splitting_freedom_check(potential: GaugePotential, connection: Connection01,
                            pair: SplitPair, section: np.ndarray) -> dict:
    """Shift the split by a lam-free section and compare potential flows.

    The difference of the two flows must be exactly the linearized gauge
    transformation generated by the section; the report carries the
    worst componentwise gap.
    """
    base = act_on_potential(connection, pair)
    shifted = act_on_potential(connection, pair.shifted(section))
    expected = gauge_flow(potential, section)
    margin = max(base.margin, shifted.margin, expected.margin)
    sl = potential.grid.interior(margin)
    gap = 0.0
    for name in GaugePotential.COMPONENTS:
        diff = getattr(shifted, name)[sl] - getattr(base, name)[sl]
        gap = max(gap, max_abs(diff - getattr(expected, name)[sl]))
    return {"gauge_match_gap": gap, "margin": margin}


def bracket_homomorphism_check(gen_a: SymmetryGenerator, gen_b: SymmetryGenerator,
                               psi1, psi2, f12, grid: SpacetimeGrid, band: int,
                               nsamples: int) -> dict:
    """Compare phi([a, b]) with [phi(a), phi(b)] componentwise.

    The split convention pins the lam-free freedom, so the identity is
    only expected modulo a lam-free section; both the raw defect and the
    defect after removing each chart's lam-free part are reported.
    """
    a12, a21 = gen_a.eval_fields(grid)
    b12, b21 = gen_b.eval_fields(grid)
    bracket12 = a12.mul(b12) - b12.mul(a12)
    bracket21 = a21.mul(b21) - b21.mul(a21)

    def halves(t12, t21):
        phi, _ = make_phi(t12, t21, psi1, psi2, f12, band, nsamples)
        pair = split_phi(grid, phi)
        return pair.phi1.data, pair.phi2.data

    lhs1, lhs2 = halves(bracket12, bracket21)
    pa1, pa2 = halves(a12, a21)
    pb1, pb2 = halves(b12, b21)
    raw = 0.0
    quotiented = 0.0
    for lhs, pa, pb in ((lhs1, pa1, pb1), (lhs2, pa2, pb2)):
        rhs = pa.mul(pb) - pb.mul(pa)
        diff = lhs - rhs
        raw = max(raw, max_abs(diff.sample_circle(nsamples)))
        stripped = diff.copy()
        stripped.coeffs[..., stripped.band, :, :] = 0.0
        quotiented = max(quotiented, max_abs(stripped.sample_circle(nsamples)))
    return {"raw_defect": raw, "quotiented_defect": quotiented}
