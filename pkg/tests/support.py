"""Shared fixture builders for the test suite."""

import numpy as np

from twistor_forge.fields import CommutingExpSection, Patch
from twistor_forge.grid import SpacetimeGrid
from twistor_forge.laurent import mat_exp
from twistor_forge.penrose_ward import connection_from_cochain, extract_potential
from twistor_forge.riemann_hilbert import abelian_factorize_poly, birkhoff_factorize_grid
from twistor_forge.twistor_poly import MatrixLambdaPoly, twistor_monomial


def small_grid(extent=7, h=0.1):
    return SpacetimeGrid.centered([extent] * 4, h)


def abelian_sections(grid, dim=2):
    """Factors of exp(w1*w2/lam): the self-dual workhorse fixture."""
    return abelian_factorize_poly(grid, twistor_monomial(1, 1, -1), np.eye(dim))


def abelian_connection(grid, dim=2, band=4, nsamples=32):
    psi1, psi2 = abelian_sections(grid, dim)
    return connection_from_cochain(psi1, psi2, band=band, nsamples=nsamples)


def abelian_potential(grid, dim=2, band=4, nsamples=32):
    potential, _ = extract_potential(abelian_connection(grid, dim, band, nsamples))
    return potential


def random_matrix_twistor_poly(rng, dim=2, scale=0.5,
                               terms=((0, 0, 0), (1, 0, 0), (0, 1, -1), (0, 0, 1))):
    acc = MatrixLambdaPoly(dim)
    for p, q, r in terms:
        mat = scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        acc = acc + MatrixLambdaPoly.from_scalar(twistor_monomial(p, q, r), mat)
    return acc


def near_identity_factorization(grid, seed=31, amplitude=0.1, band=10, nsamples=32,
                                tol=1e-13):
    rng = np.random.default_rng(seed)
    poly = random_matrix_twistor_poly(rng)
    samples = mat_exp(amplitude * poly.eval_grid(grid).sample_circle(nsamples))
    return birkhoff_factorize_grid(grid, samples, band=band, tol=tol), samples
