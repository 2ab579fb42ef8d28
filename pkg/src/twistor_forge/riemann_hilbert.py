"""Multiplicative splitting of overlap matrices on the circle.

Given invertible patching data F12 on |lam| = 1, find psi1 holomorphic
inside the circle and psi2 holomorphic outside (psi2(inf) = 1) with
psi1^-1 psi2 = F12.  Success is exactly the statement that the bundle
glued from F12 is trivial on the fiber; lack of convergence is reported
as a jumping-line error.

The solver is a log/exp Newton iteration: with current factors, the
defect E = log(psi1 F12 psi2^-1) is additively split and exponentiated
back into multiplicative updates.  Near the identity the defect shrinks
quadratically.  Winding data (e.g. diag(lam, 1/lam)) has no such
factorization and stalls, which is the intended detection mechanism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cocycle import Cochain1, is_cocycle_mult
from .errors import IllConditionedError, JumpingLineError, WrongPathError
from .fields import CommutingExpSection, Patch, PatchField, holomorphic_window
from .grid import SpacetimeGrid
from .laurent import LaurentField, mat_exp, max_abs, principal_log
from .twistor_poly import ScalarLambdaPoly


@dataclass
class FactorizationResult:
    """Factors for a single overlap matrix plus convergence bookkeeping."""

    psi1: LaurentField
    psi2: LaurentField
    residual: float
    iterations: int
    converged: bool


@dataclass
class GridFactorization:
    """Per-grid-point factorization of a patching field."""

    psi1: PatchField
    psi2: PatchField
    residuals: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def max_iterations(self) -> int:
        return int(np.max(self.iterations))

    def failed_indices(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(~self.converged)]


def _split_samples(e_samples: np.ndarray, band: int, nsamples: int):
    """Additive Cauchy split of sampled data, returned as samples again."""
    field = LaurentField.from_samples(e_samples, band)
    plus, minus = field.cauchy_split()
    return plus.sample_circle(nsamples), minus.sample_circle(nsamples)


def _iterate(f_samples: np.ndarray, band: int, tol: float, max_iter: int):
    """Newton loop on sample arrays of shape (*lead, N, n, n)."""
    nsamples = f_samples.shape[-3]
    lead = f_samples.shape[:-3]
    dim = f_samples.shape[-1]
    eye = np.broadcast_to(np.eye(dim, dtype=complex), f_samples.shape)
    psi1 = eye.copy()
    psi2 = eye.copy()
    iterations = np.zeros(lead, dtype=int)
    converged = np.zeros(lead, dtype=bool)
    axes = tuple(range(len(lead), len(lead) + 3))
    for step in range(max_iter + 1):
        m = psi1 @ f_samples @ np.linalg.inv(psi2)
        try:
            defect = principal_log(m)
        except IllConditionedError as exc:
            raise IllConditionedError(f"matrix log failed at update pass {step}: {exc}") from exc
        enorm = np.max(np.abs(defect), axis=axes) if lead else np.max(np.abs(defect))
        fresh = (enorm <= tol) & ~converged
        iterations = np.where(fresh, step, iterations)
        converged = converged | fresh
        if np.all(converged) or step == max_iter:
            break
        plus, minus = _split_samples(defect, band, nsamples)
        psi1 = mat_exp(-plus) @ psi1
        psi2 = mat_exp(-minus) @ psi2
    iterations = np.where(converged, iterations, max_iter)
    return psi1, psi2, iterations, converged


def _project_factors(psi1_s, psi2_s, band):
    p1 = LaurentField.from_samples(psi1_s, band).window(*holomorphic_window(Patch.ONE, band))
    p2 = LaurentField.from_samples(psi2_s, band).window(*holomorphic_window(Patch.TWO, band))
    return p1, p2


def multiply_back_residual(psi1: LaurentField, psi2: LaurentField,
                           f12_samples: np.ndarray) -> np.ndarray:
    """Per-point max of |psi1^-1 psi2 - F12| over the circle samples."""
    nsamples = f12_samples.shape[-3]
    recon = np.linalg.inv(psi1.sample_circle(nsamples)) @ psi2.sample_circle(nsamples)
    gap = np.abs(recon - f12_samples)
    return np.max(gap, axis=(-3, -2, -1))


def birkhoff_factorize(f: Cochain1, x=None, tol: float = 1e-12, max_iter: int = 20,
                       band: int | None = None, nsamples: int | None = None,
                       check_cocycle: bool = True) -> FactorizationResult:
    """Factor a single overlap matrix; raises JumpingLineError on stall."""
    f12 = f.f12
    if x is not None:
        f12 = LaurentField(f12.coeffs[tuple(x)], f12.band)
    if check_cocycle:
        ok, defect = is_cocycle_mult(f, tol=max(1e-8, 100 * tol))
        if not ok:
            raise ValueError(f"patching data is not a cocycle (defect {defect:.3e})")
    band = band if band is not None else max(8, 2 * f12.band)
    nsamples = nsamples or max(2 * band + 1, 32)
    samples = f12.sample_circle(nsamples)
    psi1_s, psi2_s, iters, conv = _iterate(samples, band, tol, max_iter)
    psi1, psi2 = _project_factors(psi1_s, psi2_s, band)
    residual = float(np.max(multiply_back_residual(psi1, psi2, samples)))
    if not bool(np.all(conv)):
        raise JumpingLineError(
            f"no holomorphic trivialization after {max_iter} iterations "
            f"(defect stalled at residual {residual:.3e})"
        )
    return FactorizationResult(psi1, psi2, residual, int(np.max(iters)), True)


def birkhoff_factorize_grid(grid: SpacetimeGrid, f12_samples: np.ndarray, band: int,
                            tol: float = 1e-12, max_iter: int = 20,
                            chunk: int = 4096, threads: int = 1) -> GridFactorization:
    """Factor patching samples of shape (*extents, N, n, n) point by point.

    Never raises on non-convergence; the returned mask records which
    points stalled so the caller can report the jumping locus.
    """
    nsamples, dim = f12_samples.shape[-3], f12_samples.shape[-1]
    flat = f12_samples.reshape(-1, nsamples, dim, dim)
    npts = flat.shape[0]
    psi1_s = np.empty_like(flat)
    psi2_s = np.empty_like(flat)
    iterations = np.empty(npts, dtype=int)
    converged = np.empty(npts, dtype=bool)

    def run_chunk(start: int):
        stop = min(start + chunk, npts)
        p1, p2, its, conv = _iterate(flat[start:stop], band, tol, max_iter)
        psi1_s[start:stop] = p1
        psi2_s[start:stop] = p2
        iterations[start:stop] = its
        converged[start:stop] = conv

    starts = list(range(0, npts, chunk))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_chunk, starts))
    else:
        for start in starts:
            run_chunk(start)

    psi1, psi2 = _project_factors(psi1_s, psi2_s, band)
    residuals = multiply_back_residual(psi1, psi2, flat).reshape(grid.extents)
    shape = (*grid.extents, 2 * band + 1, dim, dim)
    return GridFactorization(
        psi1=PatchField(grid, Patch.ONE, LaurentField(psi1.coeffs.reshape(shape), band)),
        psi2=PatchField(grid, Patch.TWO, LaurentField(psi2.coeffs.reshape(shape), band)),
        residuals=residuals,
        iterations=iterations.reshape(grid.extents),
        converged=converged.reshape(grid.extents),
    )


# ---------------------------------------------------------------------------
# exact fast paths for commuting exponentials
# ---------------------------------------------------------------------------


class ExpLaurentSection:
    """exp(sign * e(lam)) for a diagonal band-limited exponent.

    Commuting coefficients make sampling and inversion exact, so the
    factors never suffer band truncation.
    """

    def __init__(self, exponent: LaurentField, patch: Patch, sign: float = 1.0):
        self.exponent = exponent
        self.patch = patch
        self.sign = float(sign)

    @property
    def dim(self) -> int:
        return self.exponent.dim

    def sample_circle(self, nsamples: int) -> np.ndarray:
        return mat_exp(self.sign * self.exponent.sample_circle(nsamples))

    def inverse(self) -> "ExpLaurentSection":
        return ExpLaurentSection(self.exponent, self.patch, -self.sign)


def abelian_factorize(exponent: LaurentField, tol: float = 1e-12,
                      nsamples: int | None = None) -> tuple[ExpLaurentSection, ExpLaurentSection, float]:
    """Exact splitting of F12 = exp(f) for diagonal matrix exponents f.

    Returns (psi1, psi2, residual) with psi1 = exp(-f_plus) and
    psi2 = exp(-f_minus) for the additive split f = f_plus - f_minus.
    Off-diagonal exponents do not commute degree-by-degree and must go
    through the Newton solver instead (WrongPathError).
    """
    offdiag = exponent.coeffs * (1.0 - np.eye(exponent.dim))
    if max_abs(offdiag) > 1e-13:
        raise WrongPathError("abelian splitting needs a diagonal exponent")
    plus, minus = exponent.cauchy_split()
    psi1 = ExpLaurentSection(plus, Patch.ONE, sign=-1.0)
    psi2 = ExpLaurentSection(minus, Patch.TWO, sign=-1.0)
    n = nsamples or max(64, 2 * exponent.band + 1)
    recon = np.linalg.inv(psi1.sample_circle(n)) @ psi2.sample_circle(n)
    target = mat_exp(exponent.sample_circle(n))
    residual = max_abs(recon - target)
    if residual > tol:
        raise WrongPathError(f"abelian split residual {residual:.3e} exceeds {tol:.1e}")
    return psi1, psi2, residual


def abelian_factorize_poly(grid: SpacetimeGrid, exponent: ScalarLambdaPoly,
                           gen: np.ndarray) -> tuple[CommutingExpSection, CommutingExpSection]:
    """Exact splitting of F12 = exp(p(x, lam) * T) over a grid.

    The scalar twistor polynomial splits degree-by-degree; the factors
    keep their polynomial form so later derivatives stay exact.
    """
    plus, minus = exponent.split()
    psi1 = CommutingExpSection(grid, Patch.ONE, plus, gen, sign=-1.0)
    psi2 = CommutingExpSection(grid, Patch.TWO, minus, gen, sign=-1.0)
    return psi1, psi2
