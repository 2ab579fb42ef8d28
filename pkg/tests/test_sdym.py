import numpy as np
import pytest
from support import abelian_potential, small_grid

from twistor_forge.fields import CommutingExpSection, Patch
from twistor_forge.grid import SpacetimeGrid
from twistor_forge.laurent import commutator, max_abs
from twistor_forge.penrose_ward import GaugePotential, adjoint_action, extract_potential, reconstruct_connection
from twistor_forge.sdym import (
    ResidualReport,
    antihermiticity_report,
    calibrate_orientation,
    field_strength,
    gauge_invariant_signature,
    gauge_transform,
    sdym_residual_complex,
    sdym_residual_hodge,
    signature_gap,
    ym_residual,
)
from twistor_forge.twistor_poly import ScalarLambdaPoly


def flipped_potential(grid, dim=2):
    """a_ybar = y, a_zbar = +z: deliberately anti-flipped, residual 2."""
    potential = GaugePotential.zero(grid, dim)
    y, z, _, _ = grid.complex_arrays()
    eye = np.eye(dim)
    potential.a_ybar[...] = y[..., None, None] * eye
    potential.a_zbar[...] = z[..., None, None] * eye
    return potential


def unitary_grid_field(grid, rng, dim=2, slope=0.05):
    """exp(i * (a . x) * H) with hermitian H: smooth unitary gauge."""
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (m + np.conj(m.T)) / 2
    h /= max(1.0, np.linalg.norm(h, 2))
    coeffs = slope * rng.uniform(-1.0, 1.0, size=4)
    phase = sum(c * x for c, x in zip(coeffs, grid.coordinate_arrays()))
    w, v = np.linalg.eigh(h)
    diag = np.exp(1j * phase[..., None] * w)
    return np.einsum("ij,...j,kj->...ik", v, diag, np.conj(v))


class TestFieldStrength:
    def test_zero_potential(self):
        grid = small_grid()
        strength = field_strength(GaugePotential.zero(grid, 2))
        assert max_abs(strength.comps) == 0.0

    def test_abelian_fixture_components(self):
        grid = small_grid()
        potential = abelian_potential(grid)
        strength = field_strength(potential)
        sl = strength.interior()
        # curvature is the constant 2-form -2i (dx1^dx2 + dx3^dx4)
        eye = np.eye(2)
        assert max_abs(strength.comps[sl][..., 0, 1, :, :] + 2j * eye) < 1e-11
        assert max_abs(strength.comps[sl][..., 2, 3, :, :] + 2j * eye) < 1e-11
        assert max_abs(strength.f_yz[sl]) < 1e-11
        assert max_abs(strength.f_ybar_zbar[sl]) < 1e-11
        assert max_abs(strength.f_diag[sl]) < 1e-11

    def test_constant_noncommuting_potential(self):
        grid = small_grid()
        rng = np.random.default_rng(61)
        mats = [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4)]
        potential = GaugePotential(grid, *(np.broadcast_to(m, (*grid.extents, 2, 2)).copy()
                                           for m in mats))
        strength = field_strength(potential)
        sl = strength.interior()
        gap = max_abs(strength.f_yz[sl] - commutator(mats[0], mats[1]))
        assert gap < 1e-11

    def test_antisymmetry_is_structural(self):
        grid = small_grid()
        strength = field_strength(abelian_potential(grid))
        assert max_abs(strength.comps + np.swapaxes(strength.comps, -4, -3)) == 0.0


class TestSelfDualityResiduals:
    def test_zero_field(self):
        grid = small_grid()
        assert sdym_residual_complex(GaugePotential.zero(grid, 2)) == 0.0
        assert sdym_residual_hodge(GaugePotential.zero(grid, 2)) == 0.0

    def test_abelian_fixture_is_selfdual_both_ways(self):
        grid = small_grid()
        potential = abelian_potential(grid)
        assert sdym_residual_complex(potential) < 1e-11
        assert sdym_residual_hodge(potential) < 1e-11

    def test_flipped_fixture_residual_two(self):
        grid = small_grid()
        assert abs(sdym_residual_complex(flipped_potential(grid)) - 2.0) < 1e-11

    def test_orientation_calibration(self):
        assert calibrate_orientation() == 1
        assert calibrate_orientation() == 1  # cached, deterministic

    def test_wrong_orientation_is_detected(self):
        grid = small_grid()
        potential = abelian_potential(grid)
        wrong = sdym_residual_hodge(potential, orientation_sign=-calibrate_orientation())
        assert abs(wrong - 4.0) < 1e-10

    def test_hodge_and_complex_residuals_are_commensurate(self):
        # on the anti-flipped control both residuals are order one and
        # within a factor 4 of each other
        grid = small_grid()
        bad = flipped_potential(grid)
        rc = sdym_residual_complex(bad)
        rh = sdym_residual_hodge(bad)
        assert rh <= 4 * rc and rc <= 4 * rh


class TestYangMills:
    def test_zero_field(self):
        grid = small_grid(extent=9)
        assert ym_residual(GaugePotential.zero(grid, 2)) == 0.0

    def test_selfdual_field_satisfies_yang_mills(self):
        grid = small_grid(extent=9)
        assert ym_residual(abelian_potential(grid)) < 1e-10

    def test_pure_gauge_is_selfdual_and_yang_mills(self):
        # dressing margin 2 + two stencils: extent 13 keeps a deep interior
        grid = small_grid(extent=13)
        poly = ScalarLambdaPoly({0: {(1, 0, 0, 0): 0.2, (0, 1, 1, 0): 0.15, (0, 0, 0, 1): 0.1}})
        sec1 = CommutingExpSection(grid, Patch.ONE, poly, np.eye(2), sign=1.0)
        sec2 = CommutingExpSection(grid, Patch.TWO, poly, np.eye(2), sign=1.0)
        conn = adjoint_action(sec1, sec2, reconstruct_connection(GaugePotential.zero(grid, 2)),
                              band=4, nsamples=16)
        potential, _ = extract_potential(conn, tol=1e-6)
        assert sdym_residual_complex(potential) < 1e-6
        assert ym_residual(potential) < 1e-6

    def test_generic_field_violates_yang_mills(self):
        # y*ybar is not harmonic, so the abelian Yang-Mills operator
        # picks up a constant source
        grid = small_grid(extent=9)
        potential = GaugePotential.zero(grid, 1)
        y, _, ybar, _ = grid.complex_arrays()
        potential.a_y[..., 0, 0] = y * ybar
        assert ym_residual(potential) > 1e-3


class TestGaugeTransform:
    def test_identity_gauge(self):
        grid = small_grid()
        potential = abelian_potential(grid)
        eye = np.broadcast_to(np.eye(2, dtype=complex), (*grid.extents, 2, 2)).copy()
        out = gauge_transform(potential, eye)
        assert potential.interior_gap(out) < 1e-14

    def test_pure_gauge_of_zero_is_selfdual(self):
        grid = small_grid(extent=9)
        rng = np.random.default_rng(62)
        g = unitary_grid_field(grid, rng)
        out = gauge_transform(GaugePotential.zero(grid, 2), g)
        assert sdym_residual_complex(out) < 1e-9

    def test_curvature_conjugates(self):
        grid = small_grid(extent=9)
        rng = np.random.default_rng(63)
        potential = abelian_potential(grid)
        g = unitary_grid_field(grid, rng)
        dressed = field_strength(gauge_transform(potential, g))
        plain = field_strength(potential)
        g_inv = np.linalg.inv(g)
        conj = np.einsum("...ij,...mnjk,...kl->...mnil", g_inv, plain.comps, g)
        sl = grid.interior(dressed.margin)
        assert max_abs(dressed.comps[sl] - conj[sl]) < 1e-8

    def test_residual_norm_is_gauge_invariant(self):
        grid = small_grid(extent=9)
        rng = np.random.default_rng(64)
        potential = abelian_potential(grid)
        base = sdym_residual_complex(potential, margin=4)
        for _ in range(5):
            dressed = gauge_transform(potential, unitary_grid_field(grid, rng))
            assert abs(sdym_residual_complex(dressed, margin=4) - base) < 1e-10


class TestSignatures:
    def test_zero_potential_zero_signature(self):
        grid = small_grid()
        grids, _ = gauge_invariant_signature(GaugePotential.zero(grid, 2))
        assert all(max_abs(g) == 0.0 for g in grids)

    def test_signature_is_gauge_invariant(self):
        grid = small_grid(extent=9)
        rng = np.random.default_rng(65)
        potential = abelian_potential(grid)
        for _ in range(5):
            dressed = gauge_transform(potential, unitary_grid_field(grid, rng))
            assert signature_gap(potential, dressed) < 1e-8

    def test_distinct_fields_have_distinct_signatures(self):
        grid = small_grid()
        a = abelian_potential(grid)
        assert signature_gap(a, a.scale(2.0)) > 1.0


class TestReport:
    def test_report_lines_and_verdicts(self):
        report = ResidualReport({})
        report.add("flatness", 1e-14, 1e-10)
        report.add("sd_complex", 2.0, 1e-6)
        assert not report.passed
        lines = report.lines()
        assert any("PASS" in line for line in lines)
        assert any("FAIL" in line for line in lines)
        payload = report.to_json()
        assert payload["flatness"]["passed"] is True

    def test_antihermiticity_report_detects_reality(self):
        grid = small_grid()
        rng = np.random.default_rng(66)
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        real = GaugePotential.zero(grid, 2)
        real.a_y[...] = m
        real.a_ybar[...] = -np.conj(m.T)
        assert antihermiticity_report(real) < 1e-14
        assert antihermiticity_report(abelian_potential(grid)) > 0.1
