"""Scenario files: the JSON vocabulary driving every pipeline run.

A scenario fixes the grid, the matrix dimension, the Laurent band and
circle sample count, the patching data, optional symmetry generators,
and tolerances.  Patching data and generators are entered as twistor
polynomials (sums of coeff * w1^p * w2^q * lam^r), which keeps them
holomorphic by construction.  Complex numbers are [re, im] pairs and
matrices are row-major nested lists of such pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .fields import CommutingExpSection, ExpSection, Patch
from .grid import SpacetimeGrid
from .laurent import circle_nodes
from .riemann_hilbert import abelian_factorize_poly
from .symmetry import SymmetryGenerator
from .twistor_poly import MatrixLambdaPoly, ScalarLambdaPoly, TwistorPolynomial

SCHEMA = "twistor-forge/1"

PATCHING_KINDS = ("identity", "abelian-exponential", "near-identity-exponential",
                  "explicit-psi", "winding")

#: names whose defaults follow the discretized-identity rule 100*h^4*scale
DISCRETIZED_CHECKS = ("flatness", "linearity", "overlap", "sd_complex", "sd_hodge", "ym")
ALGEBRAIC_TOL = 1e-12


def _complex_from_json(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 \
            and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ScenarioError(f"expected a number or [re, im] pair, got {value!r}")


def _matrix_from_json(value, dim: int) -> np.ndarray:
    try:
        scalar = _complex_from_json(value)
    except ScenarioError:
        pass
    else:
        return scalar * np.eye(dim, dtype=complex)
    rows = value
    if not isinstance(rows, list) or len(rows) != dim:
        raise ScenarioError(f"matrix must be a {dim}x{dim} row-major nested list")
    out = np.zeros((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ScenarioError(f"matrix row {i} does not have {dim} entries")
        for j, entry in enumerate(row):
            out[i, j] = _complex_from_json(entry)
    return out


def matrix_to_json(mat: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(mat)]


def _terms_from_json(spec, dim: int) -> list[tuple[np.ndarray, int, int, int]]:
    if not isinstance(spec, dict) or "terms" not in spec:
        raise ScenarioError("polynomial spec needs a 'terms' list")
    out = []
    for term in spec["terms"]:
        coeff = _matrix_from_json(term.get("coeff", 1.0), dim)
        out.append((coeff, int(term.get("w1", 0)), int(term.get("w2", 0)),
                    int(term.get("lam", 0))))
    return out


def random_polynomial_terms(rng: np.random.Generator, dim: int, scale: float,
                            shapes) -> list[dict]:
    """Explicit JSON terms with random matrix coefficients."""
    out = []
    for p, q, r in shapes:
        mat = scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        out.append({"coeff": matrix_to_json(mat), "w1": int(p), "w2": int(q), "lam": int(r)})
    return out


@dataclass
class PatchingSpec:
    kind: str
    scalar_exponent: ScalarLambdaPoly | None = None
    gen_matrix: np.ndarray | None = None
    matrix_exponent: MatrixLambdaPoly | None = None
    psi_exponents: tuple[MatrixLambdaPoly, MatrixLambdaPoly] | None = None
    winding_powers: tuple[int, ...] | None = None

    def exact_sections(self, grid: SpacetimeGrid):
        """Closed-form factors, or None when the Newton solver is needed."""
        if self.kind in ("identity", "abelian-exponential"):
            return abelian_factorize_poly(grid, self.scalar_exponent, self.gen_matrix)
        if self.kind == "explicit-psi":
            x1, x2 = self.psi_exponents
            return (ExpSection(grid, Patch.ONE, x1), ExpSection(grid, Patch.TWO, x2))
        return None

    def overlap(self, grid: SpacetimeGrid, dim: int) -> "OverlapData":
        return OverlapData(self, grid, dim)


class OverlapData:
    """Block sampler for F12 (and its inverse) of any patching kind."""

    def __init__(self, spec: PatchingSpec, grid: SpacetimeGrid, dim: int):
        self.spec = spec
        self.grid = grid
        self.dim = dim
        kind = spec.kind
        if kind in ("identity", "abelian-exponential"):
            self._pos = CommutingExpSection(grid, Patch.ONE, spec.scalar_exponent,
                                            spec.gen_matrix, sign=+1.0)
            self._neg = self._pos.inverse()
        elif kind == "near-identity-exponential":
            self._pos = ExpSection(grid, Patch.ONE, spec.matrix_exponent, sign=+1.0)
            self._neg = self._pos.inverse()
        elif kind == "explicit-psi":
            x1, x2 = spec.psi_exponents
            self._psi1 = ExpSection(grid, Patch.ONE, x1)
            self._psi2 = ExpSection(grid, Patch.TWO, x2)
        elif kind == "winding":
            if len(spec.winding_powers) != dim:
                raise ScenarioError("winding powers must list one integer per matrix row")

    def sample_circle_flat(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        kind = self.spec.kind
        if kind in ("identity", "abelian-exponential", "near-identity-exponential"):
            return self._pos.sample_circle_flat(start, stop, nsamples)
        if kind == "explicit-psi":
            inv1 = np.linalg.inv(self._psi1.sample_circle_flat(start, stop, nsamples))
            return inv1 @ self._psi2.sample_circle_flat(start, stop, nsamples)
        lams = circle_nodes(nsamples)
        block = np.zeros((stop - start, nsamples, self.dim, self.dim), dtype=complex)
        for i, p in enumerate(self.spec.winding_powers):
            block[..., i, i] = lams**p
        return block

    def f12_samples(self, nsamples: int) -> np.ndarray:
        flat = self.sample_circle_flat(0, self.grid.npoints, nsamples)
        return flat.reshape(*self.grid.extents, nsamples, self.dim, self.dim)

    def f21_samples_flat(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        kind = self.spec.kind
        if kind in ("identity", "abelian-exponential", "near-identity-exponential"):
            return self._neg.sample_circle_flat(start, stop, nsamples)
        return np.linalg.inv(self.sample_circle_flat(start, stop, nsamples))


@dataclass
class Scenario:
    raw: dict
    path: str
    grid: SpacetimeGrid
    dim: int
    band: int
    nsamples: int
    seed: int
    reality: str
    patching: PatchingSpec
    generators: list[SymmetryGenerator]
    tolerances: dict[str, float]
    factorization_tol: float
    factorization_max_iter: int
    output_dir: str | None = None

    def tol(self, name: str, scale: float = 1.0) -> float:
        """Scenario override, else the default for the check's class."""
        if name in self.tolerances:
            return float(self.tolerances[name])
        if name in DISCRETIZED_CHECKS:
            h = max(self.grid.spacing)
            return 100.0 * h**4 * max(scale, 1.0)
        return ALGEBRAIC_TOL


def _parse_patching(spec: dict, dim: int, rng: np.random.Generator) -> PatchingSpec:
    kind = spec.get("kind")
    if kind not in PATCHING_KINDS:
        raise ScenarioError(f"unknown patching kind {kind!r} (one of {PATCHING_KINDS})")
    if kind == "identity":
        return PatchingSpec(kind, scalar_exponent=ScalarLambdaPoly(),
                            gen_matrix=np.eye(dim, dtype=complex))
    if kind == "abelian-exponential":
        terms = _terms_from_json(spec.get("exponent", {}), dim)
        poly = TwistorPolynomial(terms, dim)
        profile = poly.scalar_profile()
        if profile is None:
            raise ScenarioError(
                "abelian-exponential terms must share one constant matrix direction"
            )
        scalar, gen = profile
        if "generator_matrix" in spec:
            gen = _matrix_from_json(spec["generator_matrix"], dim)
        return PatchingSpec(kind, scalar_exponent=scalar, gen_matrix=gen)
    if kind == "near-identity-exponential":
        amplitude = float(spec.get("amplitude", 1.0))
        if "exponent" in spec:
            terms = _terms_from_json(spec["exponent"], dim)
        elif "random" in spec:
            r = spec["random"]
            shapes = r.get("terms", [[0, 0, 0], [1, 0, 0], [0, 1, -1], [0, 0, 1]])
            terms = _terms_from_json(
                {"terms": random_polynomial_terms(rng, dim, float(r.get("scale", 0.5)), shapes)},
                dim,
            )
        else:
            raise ScenarioError("near-identity-exponential needs 'exponent' or 'random'")
        poly = TwistorPolynomial(terms, dim).expand().scale(amplitude)
        return PatchingSpec(kind, matrix_exponent=poly)
    if kind == "explicit-psi":
        x1 = TwistorPolynomial(_terms_from_json(spec["log_psi1"], dim), dim).expand()
        x2 = TwistorPolynomial(_terms_from_json(spec["log_psi2"], dim), dim).expand()
        if x1.terms and min(x1.terms) < 0:
            raise ScenarioError("log_psi1 must have no negative lam-degrees")
        if x2.terms and max(x2.terms) > 0:
            raise ScenarioError("log_psi2 must have no positive lam-degrees")
        return PatchingSpec(kind, psi_exponents=(x1, x2))
    powers = tuple(int(p) for p in spec.get("powers", []))
    return PatchingSpec(kind, winding_powers=powers)


def _parse_generators(specs: list, dim: int, rng: np.random.Generator) -> list[SymmetryGenerator]:
    out = []
    for i, spec in enumerate(specs or []):
        if "random" in spec:
            r = spec["random"]
            count = int(r.get("count", 1))
            scale = float(r.get("scale", 0.5))
            shapes12 = r.get("terms12", [[0, 0, 0], [1, 0, -1], [0, 1, 0], [1, 1, -1]])
            shapes21 = r.get("terms21", [[0, 0, -1], [1, 0, -2], [0, 1, -1]])
            for k in range(count):
                t12 = TwistorPolynomial(
                    _terms_from_json({"terms": random_polynomial_terms(rng, dim, scale, shapes12)}, dim), dim)
                t21 = TwistorPolynomial(
                    _terms_from_json({"terms": random_polynomial_terms(rng, dim, scale, shapes21)}, dim), dim)
                out.append(SymmetryGenerator.from_polynomials(f"rand{i}_{k}", t12, t21))
            continue
        name = spec.get("name", f"gen{i}")
        t12 = TwistorPolynomial(_terms_from_json(spec.get("t12", {"terms": []}), dim), dim)
        t21 = TwistorPolynomial(_terms_from_json(spec.get("t21", {"terms": []}), dim), dim)
        out.append(SymmetryGenerator.from_polynomials(name, t12, t21))
    return out


def load_scenario(path, seed_override: int | None = None) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(raw, str(path), seed_override)


def parse_scenario(raw: dict, path: str = "<inline>",
                   seed_override: int | None = None) -> Scenario:
    if raw.get("schema") != SCHEMA:
        raise ScenarioError(f"scenario schema must be {SCHEMA!r}, got {raw.get('schema')!r}")
    gspec = raw.get("grid", {})
    extents = gspec.get("extents")
    if not extents or len(extents) != 4 or any(int(e) < 5 for e in extents):
        raise ScenarioError("grid.extents must be four integers >= 5")
    spacing = gspec.get("spacing", 0.1)
    spacing = (float(spacing),) * 4 if np.isscalar(spacing) else tuple(float(s) for s in spacing)
    if "origin" in gspec:
        grid = SpacetimeGrid(tuple(int(e) for e in extents), spacing,
                             tuple(float(o) for o in gspec["origin"]))
    else:
        grid = SpacetimeGrid.centered(extents, spacing)
    dim = int(raw.get("matrix_dim", 2))
    band = int(raw.get("band", 8))
    nsamples = int(raw.get("circle_samples", 64))
    if nsamples < 2 * band + 1:
        raise ScenarioError(f"circle_samples {nsamples} < 2*band+1 = {2 * band + 1}")
    seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)
    rng = np.random.default_rng(seed)
    if "patching" not in raw:
        raise ScenarioError("scenario needs a 'patching' entry")
    patching = _parse_patching(raw["patching"], dim, rng)
    generators = _parse_generators(raw.get("generators", []), dim, rng)
    fact = raw.get("factorization", {})
    return Scenario(
        raw=raw,
        path=path,
        grid=grid,
        dim=dim,
        band=band,
        nsamples=nsamples,
        seed=seed,
        reality=raw.get("reality", "complex"),
        patching=patching,
        generators=generators,
        tolerances={k: float(v) for k, v in raw.get("tolerances", {}).items()},
        factorization_tol=float(fact.get("tol", 1e-12)),
        factorization_max_iter=int(fact.get("max_iter", 20)),
        output_dir=raw.get("output_dir"),
    )
