"""Cochains and cocycles of the two-set covering.

With only two charts every triple intersection is empty, so the usual
triple compatibility conditions collapse to pair conditions: a
multiplicative 1-cocycle satisfies f21 * f12 = 1 on the overlap and an
additive one satisfies t12 + t21 = 0.  Group-valued operations that need
inverses are evaluated pointwise on the overlap circle and projected
back onto the full degree window of the sample count, which loses
nothing at those samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonInvertibleError
from .laurent import LaurentField, mat_exp, max_abs


@dataclass
class Cochain0:
    """Group-valued 0-cochain: one section per chart (lam-degree storage)."""

    psi1: LaurentField
    psi2: LaurentField


@dataclass
class Cochain1:
    """Group-valued overlap data {f12, f21}."""

    f12: LaurentField
    f21: LaurentField

    @classmethod
    def identity(cls, dim: int, lead: tuple = ()) -> "Cochain1":
        return cls(LaurentField.identity(dim, 0, lead), LaurentField.identity(dim, 0, lead))


@dataclass
class AdditiveCochain1:
    """Algebra-valued overlap data {t12, t21}."""

    t12: LaurentField
    t21: LaurentField


def default_samples(*bands: int, minimum: int = 33) -> int:
    """Odd sample count resolving the full window of the given bands."""
    need = 2 * sum(bands) + 1
    n = max(minimum, need)
    return n if n % 2 == 1 else n + 1


def _sample_inv(values: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(values)
    except np.linalg.LinAlgError as exc:
        raise NonInvertibleError(f"overlap sample not invertible: {exc}") from exc


def is_cocycle_mult(f: Cochain1, tol: float = 1e-10,
                    nsamples: int | None = None) -> tuple[bool, float]:
    """Check f21 * f12 = 1 on the overlap; returns (verdict, defect norm)."""
    n = nsamples or default_samples(f.f12.band, f.f21.band)
    prod = f.f21.sample_circle(n) @ f.f12.sample_circle(n)
    defect = max_abs(prod - np.eye(f.f12.dim))
    return defect <= tol, defect


def is_cocycle_add(theta: AdditiveCochain1, tol: float = 1e-10,
                   nsamples: int | None = None) -> tuple[bool, float]:
    """Check t12 + t21 = 0 on the overlap; returns (verdict, defect norm)."""
    n = nsamples or default_samples(theta.t12.band, theta.t21.band)
    defect = max_abs(theta.t12.sample_circle(n) + theta.t21.sample_circle(n))
    return defect <= tol, defect


def is_global_section(psi: Cochain0, tol: float = 1e-10,
                      nsamples: int | None = None) -> bool:
    """True when psi descends to a fiber-independent gauge transformation.

    Requires psi1 = psi2 on the overlap and no dependence on the fiber
    coordinate (only the degree-0 coefficient may be nonzero).
    """
    n = nsamples or default_samples(psi.psi1.band, psi.psi2.band)
    overlap = max_abs(psi.psi1.sample_circle(n) - psi.psi2.sample_circle(n))
    fiber = max(
        psi.psi1.degree_mass_outside(0, 0),
        psi.psi2.degree_mass_outside(0, 0),
    )
    return max(overlap, fiber) <= tol


def act_rho(h: Cochain1, f: Cochain1, nsamples: int | None = None) -> Cochain1:
    """Dressing action (rho_h f)12 = h12 * f12 * h21^-1 on overlap samples.

    The result is projected onto the full degree window of the sample
    count, so repeated actions compose exactly at those samples.
    """
    n = nsamples or default_samples(h.f12.band, h.f21.band, f.f12.band, minimum=65)
    band = (n - 1) // 2
    h12 = h.f12.sample_circle(n)
    h21 = h.f21.sample_circle(n)
    h12_inv = _sample_inv(h12)
    h21_inv = _sample_inv(h21)
    out12 = h12 @ f.f12.sample_circle(n) @ h21_inv
    out21 = h21 @ f.f21.sample_circle(n) @ h12_inv
    return Cochain1(
        LaurentField.from_samples(out12, band),
        LaurentField.from_samples(out21, band),
    )


def infinitesimal_action(theta: AdditiveCochain1, f: Cochain1) -> LaurentField:
    """First-order change of f12 under the dressing action: t12*f12 - f12*t21."""
    return theta.t12.mul(f.f12) - f.f12.mul(theta.t21)


def exp_cochain(theta: AdditiveCochain1, eps: float = 1.0,
                nsamples: int | None = None) -> Cochain1:
    """Group cochain exp(eps * theta), projected on the full sample window."""
    n = nsamples or default_samples(theta.t12.band, theta.t21.band, minimum=65)
    band = (n - 1) // 2
    return Cochain1(
        LaurentField.from_samples(mat_exp(eps * theta.t12.sample_circle(n)), band),
        LaurentField.from_samples(mat_exp(eps * theta.t21.sample_circle(n)), band),
    )


def cocycle_equivalent(fhat: Cochain1, f: Cochain1, psi: Cochain0,
                       tol: float = 1e-10, nsamples: int | None = None) -> tuple[bool, float]:
    """Check fhat12 = psi1 * f12 * psi2^-1 on overlap samples."""
    n = nsamples or default_samples(fhat.f12.band, f.f12.band,
                                    psi.psi1.band, psi.psi2.band, minimum=65)
    lhs = fhat.f12.sample_circle(n)
    rhs = psi.psi1.sample_circle(n) @ f.f12.sample_circle(n) @ _sample_inv(psi.psi2.sample_circle(n))
    defect = max_abs(lhs - rhs)
    return defect <= tol, defect
