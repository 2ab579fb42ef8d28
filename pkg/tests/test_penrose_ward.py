import numpy as np
import pytest
from support import (
    abelian_connection,
    abelian_sections,
    near_identity_factorization,
    small_grid,
)

from twistor_forge.errors import NotLinearInLambdaError
from twistor_forge.fields import CommutingExpSection, Patch, PatchField, identity_patch_field
from twistor_forge.laurent import LaurentField, max_abs
from twistor_forge.penrose_ward import (
    Connection01,
    GaugePotential,
    adjoint_action,
    connection_from_cochain,
    delta0,
    extract_potential,
    flatness_residual,
    reconstruct_connection,
)
from twistor_forge.twistor_poly import ScalarLambdaPoly, twistor_monomial


def plus_exponent():
    # non-negative-degree half of w1*w2/lam: (ybar*y - z*zbar) - lam*ybar*zbar
    plus, _ = twistor_monomial(1, 1, -1).split()
    return plus


class TestDelta0:
    def test_identity_section(self):
        grid = small_grid()
        f = identity_patch_field(grid, Patch.ONE, dim=2, band=1)
        out = delta0(f, 1, band=4, nsamples=16)
        assert out.interior_max_norm() < 1e-14

    def test_abelian_fixture_exact_route(self):
        grid = small_grid()
        sec = CommutingExpSection(grid, Patch.ONE, plus_exponent(), np.eye(2), sign=-1.0)
        y, z, _, _ = grid.complex_arrays()
        b1 = delta0(sec, 1, band=4, nsamples=32)
        b2 = delta0(sec, 2, band=4, nsamples=32)
        eye = np.eye(2)
        assert max_abs(b1.data.coeff(0) - y[..., None, None] * eye) < 1e-13
        assert b1.data.degree_mass_outside(0, 0) < 1e-13
        assert max_abs(b2.data.coeff(0) + z[..., None, None] * eye) < 1e-13
        assert b2.data.degree_mass_outside(0, 0) < 1e-13

    def test_abelian_fixture_stencil_route_converges_at_fourth_order(self):
        # the sampled-section route differentiates exp(quadratic): its gap
        # from the exact values must shrink like h^4 on a fixed domain
        gaps = []
        # margins picked so both grids are compared over |x_mu| <= 0.2
        for h, extent, margin in ((0.2, 7, 2), (0.1, 13, 4)):
            grid = small_grid(extent=extent, h=h)
            sec = CommutingExpSection(grid, Patch.ONE, plus_exponent(), np.eye(2), sign=-1.0)
            numeric = delta0(sec.to_patch_field(8, 32), 1, band=8, nsamples=32)
            y = grid.complex_arrays()[0]
            sl = grid.interior(margin)
            gap = np.abs(numeric.data.coeff(0)[sl] - y[sl][..., None, None] * np.eye(2))
            gaps.append(float(np.max(gap)))
        ratio = gaps[0] / gaps[1]
        assert 10 < ratio < 24

    def test_vertical_direction_vanishes(self):
        grid = small_grid()
        sec = CommutingExpSection(grid, Patch.ONE, plus_exponent(), np.eye(2), sign=-1.0)
        assert delta0(sec, 3, band=4, nsamples=16).data.max_norm() == 0.0

    def test_lambda_free_section_gives_potential_window(self):
        # a fiber-independent section produces components linear in lam
        grid = small_grid()
        poly = ScalarLambdaPoly({0: {(1, 0, 0, 0): 0.3, (0, 1, 1, 0): 0.1}})
        sec = CommutingExpSection(grid, Patch.ONE, poly, np.eye(2), sign=-1.0)
        b1 = delta0(sec, 1, band=4, nsamples=16)
        assert b1.data.degree_mass_outside(0, 1) < 1e-14


class TestConnectionFromCochain:
    def test_identity_cochain(self):
        grid = small_grid()
        psi1 = identity_patch_field(grid, Patch.ONE, dim=2)
        psi2 = identity_patch_field(grid, Patch.TWO, dim=2)
        conn = connection_from_cochain(psi1, psi2, band=4, nsamples=16)
        for key in conn.comp:
            assert conn.comp[key].interior_max_norm() < 1e-14

    def test_abelian_fixture_scaling_between_charts(self):
        grid = small_grid()
        conn = abelian_connection(grid)
        y, z, _, _ = grid.complex_arrays()
        eye = np.eye(2)
        assert max_abs(conn.component(Patch.ONE, 1).data.coeff(0) - y[..., None, None] * eye) < 1e-12
        assert max_abs(conn.component(Patch.ONE, 2).data.coeff(0) + z[..., None, None] * eye) < 1e-12
        # chart 2 carries the same data shifted one degree down (zeta * ...)
        assert max_abs(conn.component(Patch.TWO, 1).data.coeff(-1) - y[..., None, None] * eye) < 1e-12
        assert max_abs(conn.component(Patch.TWO, 2).data.coeff(-1) + z[..., None, None] * eye) < 1e-12
        assert conn.overlap_defect < 1e-12

    def test_factorized_cochain_yields_flat_connection(self):
        grid = small_grid(extent=9)
        fact, _ = near_identity_factorization(grid, seed=41)
        assert bool(np.all(fact.converged))
        conn = connection_from_cochain(fact.psi1, fact.psi2, band=10, nsamples=32)
        assert flatness_residual(conn) < 1e-6


class TestFlatness:
    def test_zero_connection(self):
        grid = small_grid()
        conn = reconstruct_connection(GaugePotential.zero(grid, 2))
        assert flatness_residual(conn) == 0.0

    def test_abelian_connection_is_flat(self):
        grid = small_grid()
        assert flatness_residual(abelian_connection(grid)) < 1e-12

    def test_sign_flip_breaks_flatness_by_two(self):
        # b1 = y, b2 = +z: the curl terms add instead of cancel
        grid = small_grid()
        potential = GaugePotential.zero(grid, 1)
        y, z, _, _ = grid.complex_arrays()
        potential.a_ybar[..., 0, 0] = y
        potential.a_zbar[..., 0, 0] = z
        conn = reconstruct_connection(potential)
        assert abs(flatness_residual(conn) - 2.0) < 1e-12


class TestExtractReconstruct:
    def test_zero_roundtrip(self):
        grid = small_grid()
        potential, defect = extract_potential(reconstruct_connection(GaugePotential.zero(grid, 2)))
        assert defect == 0.0
        assert max_abs(potential.a_y) == 0.0

    def test_abelian_fixture_recovers_selfdual_potential(self):
        grid = small_grid()
        potential, defect = extract_potential(abelian_connection(grid))
        y, z, _, _ = grid.complex_arrays()
        eye = np.eye(2)
        assert defect < 1e-12
        assert max_abs(potential.a_ybar - y[..., None, None] * eye) < 1e-12
        assert max_abs(potential.a_zbar + z[..., None, None] * eye) < 1e-12
        assert max_abs(potential.a_y) < 1e-12
        assert max_abs(potential.a_z) < 1e-12

    def test_quadratic_term_rejected_with_its_norm(self):
        grid = small_grid()
        conn = reconstruct_connection(GaugePotential.zero(grid, 2))
        bad = LaurentField.zero(2, 2, grid.extents)
        bad.coeffs[..., 2 + 2, :, :] = 0.25 * np.eye(2)
        conn.comp[(1, 1)] = PatchField(grid, Patch.ONE,
                                       conn.comp[(1, 1)].data.pad_to_band(2) + bad)
        with pytest.raises(NotLinearInLambdaError, match="2.500e-01"):
            extract_potential(conn)

    def test_random_roundtrip_is_exact(self):
        rng = np.random.default_rng(55)
        grid = small_grid()
        shape = (*grid.extents, 2, 2)
        potential = GaugePotential(
            grid, *(rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
                    for _ in range(4))
        )
        back, defect = extract_potential(reconstruct_connection(potential))
        assert defect == 0.0
        assert potential.interior_gap(back) == 0.0


class TestAdjointAction:
    def test_identity_leaves_connection_alone(self):
        grid = small_grid()
        conn = abelian_connection(grid)
        eye1 = identity_patch_field(grid, Patch.ONE, dim=2)
        eye2 = identity_patch_field(grid, Patch.TWO, dim=2)
        dressed = adjoint_action(eye1, eye2, conn, band=4, nsamples=32)
        for key, pf in dressed.comp.items():
            sl = grid.interior(pf.margin)
            gap = pf.data.coeffs[sl] - conn.comp[key].data.pad_to_band(pf.band).coeffs[sl]
            assert max_abs(gap) < 1e-12

    def test_pure_dressing_of_zero_connection_is_flat(self):
        grid = small_grid(extent=9)
        conn = reconstruct_connection(GaugePotential.zero(grid, 2))
        poly = ScalarLambdaPoly({0: {(1, 0, 0, 0): 0.2, (0, 0, 1, 1): 0.1}})
        g1 = CommutingExpSection(grid, Patch.ONE, poly, np.eye(2), sign=1.0)
        g2 = CommutingExpSection(grid, Patch.TWO, poly, np.eye(2), sign=1.0)
        dressed = adjoint_action(g1, g2, conn, band=4, nsamples=32)
        assert flatness_residual(dressed) < 1e-7
