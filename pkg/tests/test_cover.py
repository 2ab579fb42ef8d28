import numpy as np
import pytest

from twistor_forge.errors import MarginError
from twistor_forge.fields import (
    CommutingExpSection,
    Patch,
    PatchField,
    frame_apply,
    patch_transition,
)
from twistor_forge.grid import SpacetimeGrid
from twistor_forge.laurent import LaurentField, circle_nodes, max_abs
from twistor_forge.twistor_poly import (
    MatrixLambdaPoly,
    ScalarLambdaPoly,
    twistor_monomial,
)


def small_grid(extent=7, h=0.1):
    return SpacetimeGrid.centered([extent] * 4, h)


def poly_patch_field(grid, poly: ScalarLambdaPoly, patch=Patch.ONE, dim=1):
    mat = MatrixLambdaPoly.from_scalar(poly, np.eye(dim, dtype=complex))
    return PatchField(grid, patch, mat.eval_grid(grid))


class TestComplexCoords:
    def test_origin_point(self):
        grid = SpacetimeGrid((5, 5, 5, 5), (1.0,) * 4, (0.0,) * 4)
        c = grid.complex_coords((0, 0, 0, 0))
        assert c.y == 0 and c.z == 0

    def test_coordinate_formulas(self):
        grid = SpacetimeGrid((6, 6, 6, 6), (1.0,) * 4, (0.0,) * 4)
        c = grid.complex_coords((1, 2, 3, 4))
        assert c.y == 1 + 2j
        assert c.z == 3 - 4j

    def test_conjugate_relations(self):
        rng = np.random.default_rng(0)
        grid = SpacetimeGrid.centered([8] * 4, 0.3)
        for _ in range(20):
            idx = tuple(rng.integers(0, 8, size=4))
            c = grid.complex_coords(idx)
            assert c.ybar == np.conj(c.y)
            assert c.zbar == np.conj(c.z)

    def test_out_of_range_index(self):
        grid = small_grid()
        with pytest.raises(IndexError):
            grid.complex_coords((9, 0, 0, 0))

    def test_margin_check(self):
        grid = small_grid()
        with pytest.raises(MarginError):
            grid.check_interior_index((1, 3, 3, 3))


class TestFrames:
    def test_constant_field_annihilated(self):
        grid = small_grid()
        f = PatchField(grid, Patch.ONE, LaurentField.identity(2, 1, grid.extents))
        for a in (1, 2, 3):
            assert frame_apply(f, a).interior_max_norm() < 1e-14

    @pytest.mark.parametrize("term", [(1, 0, 0), (0, 1, 0)])
    def test_twistor_coordinates_annihilated(self, term):
        # w1 and w2 are degree-1 polynomials, so the 4th-order stencil is exact
        grid = small_grid()
        f = poly_patch_field(grid, twistor_monomial(*term))
        for a in (1, 2, 3):
            assert frame_apply(f, a).interior_max_norm() < 1e-12

    def test_smooth_annihilated_field_converges_at_fourth_order(self):
        # exp(w1) is annihilated analytically; the stencil error must
        # shrink like h^4 (ratio ~16 when h halves)
        errs = []
        for h in (0.2, 0.1):
            grid = small_grid(extent=7, h=h)
            sec = CommutingExpSection(grid, Patch.ONE, twistor_monomial(1, 0, 0),
                                      np.eye(1), sign=1.0)
            f = PatchField(grid, Patch.ONE, LaurentField.from_samples(sec.sample_circle(16), 6))
            errs.append(frame_apply(f, 1).interior_max_norm())
        ratio = errs[0] / errs[1]
        assert 10 < ratio < 24

    def test_patch_relation_on_overlap(self):
        # V_a^(1) f = lam * V_a^(2) f pointwise on |lam| = 1
        grid = small_grid()
        poly = twistor_monomial(1, 1, -1).scale(0.7) + twistor_monomial(0, 1, 0).scale(0.3j)
        lams = circle_nodes(16)
        for a in (1, 2):
            f1 = poly_patch_field(grid, poly, Patch.ONE)
            f2 = poly_patch_field(grid, poly, Patch.TWO)
            v1 = frame_apply(f1, a).data.sample(lams)
            v2 = frame_apply(f2, a).data.sample(lams)
            inner = grid.interior(2)
            diff = v1[inner] - lams[:, None, None] * v2[inner]
            assert max_abs(diff) < 1e-11

    def test_frames_commute(self):
        grid = small_grid(extent=9)
        poly = twistor_monomial(2, 0, 0).scale(0.2) + twistor_monomial(1, 1, -1).scale(0.5)
        f = poly_patch_field(grid, poly)
        ab = frame_apply(frame_apply(f, 1), 2)
        ba = frame_apply(frame_apply(f, 2), 1)
        assert max_abs((ab.data - ba.data).coeffs[grid.interior(4)]) < 1e-10

    def test_antiholomorphy_defect_reported(self):
        grid = small_grid()
        good = PatchField(grid, Patch.ONE,
                          LaurentField.from_coeffs({0: np.eye(2), 1: np.eye(2)},
                                                   lead=grid.extents))
        assert good.antiholomorphy_defect() == 0.0
        bad = PatchField(grid, Patch.ONE,
                         LaurentField.from_coeffs({-1: 0.5 * np.eye(2), 0: np.eye(2)},
                                                  lead=grid.extents))
        assert abs(bad.antiholomorphy_defect() - 0.5) < 1e-15


class TestPatchTransition:
    def test_degree_flip(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        f = LaurentField.from_coeffs({1: m})
        g = patch_transition(f)
        assert max_abs(g.coeff(-1) - m) == 0.0
        assert max_abs(g.coeff(1)) == 0.0

    def test_involution(self):
        rng = np.random.default_rng(3)
        c = rng.standard_normal((7, 2, 2)) + 1j * rng.standard_normal((7, 2, 2))
        f = LaurentField(c, band=3)
        assert max_abs(patch_transition(patch_transition(f)).coeffs - f.coeffs) == 0.0

    def test_evaluation_agreement(self):
        rng = np.random.default_rng(4)
        c = rng.standard_normal((5, 2, 2)) + 1j * rng.standard_normal((5, 2, 2))
        f = LaurentField(c, band=2)
        g = patch_transition(f)
        for lam in circle_nodes(9):
            assert max_abs(f.sample(lam) - g.sample(1.0 / lam)) < 1e-12
