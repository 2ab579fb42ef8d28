"""Exact polynomial algebra in the twistor coordinates.

Holomorphic patching data and symmetry generators are entered as
polynomials in (w1, w2, lam) with matrix coefficients, where

    w1 = z + lam*ybar,      w2 = y - lam*zbar

are annihilated by the antiholomorphic frame fields.  Expanding the
w-powers gives a lam-graded polynomial in the spacetime coordinates
(y, z, ybar, zbar); that expanded form supports exact differentiation
and exact evaluation on a grid, so fixtures built from it carry no
discretization error of their own.

Monomials are exponent tuples (a, b, c, d) for y^a z^b ybar^c zbar^d.
"""

from __future__ import annotations

import numpy as np

from .grid import SpacetimeGrid
from .laurent import LaurentField

Monomial = tuple[int, int, int, int]

#: index of each coordinate within a monomial tuple
_COORD_SLOT = {"y": 0, "z": 1, "ybar": 2, "zbar": 3}


class ScalarLambdaPoly:
    """lam-graded polynomial with complex scalar coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, dict[Monomial, complex]] | None = None):
        self.terms = {}
        if terms:
            for deg, monos in terms.items():
                for mono, c in monos.items():
                    if c != 0:
                        self.terms.setdefault(int(deg), {})[tuple(mono)] = complex(c)

    @classmethod
    def constant(cls, c: complex) -> "ScalarLambdaPoly":
        return cls({0: {(0, 0, 0, 0): c}})

    def is_zero(self) -> bool:
        return not self.terms

    def lambda_band(self) -> int:
        return max((abs(d) for d in self.terms), default=0)

    def degrees(self):
        return sorted(self.terms)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "ScalarLambdaPoly") -> "ScalarLambdaPoly":
        out = {d: dict(m) for d, m in self.terms.items()}
        for d, monos in other.terms.items():
            slot = out.setdefault(d, {})
            for mono, c in monos.items():
                slot[mono] = slot.get(mono, 0.0) + c
        return ScalarLambdaPoly(out)

    def scale(self, c: complex) -> "ScalarLambdaPoly":
        return ScalarLambdaPoly(
            {d: {m: c * v for m, v in monos.items()} for d, monos in self.terms.items()}
        )

    def __neg__(self) -> "ScalarLambdaPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "ScalarLambdaPoly") -> "ScalarLambdaPoly":
        return self + other.scale(-1.0)

    def mul(self, other: "ScalarLambdaPoly") -> "ScalarLambdaPoly":
        out: dict[int, dict[Monomial, complex]] = {}
        for da, ma in self.terms.items():
            for db, mb in other.terms.items():
                slot = out.setdefault(da + db, {})
                for mono_a, ca in ma.items():
                    for mono_b, cb in mb.items():
                        mono = tuple(ea + eb for ea, eb in zip(mono_a, mono_b))
                        slot[mono] = slot.get(mono, 0.0) + ca * cb
        return ScalarLambdaPoly(out)

    def shift_lambda(self, k: int) -> "ScalarLambdaPoly":
        return ScalarLambdaPoly({d + k: dict(m) for d, m in self.terms.items()})

    def derivative(self, coord: str) -> "ScalarLambdaPoly":
        slot = _COORD_SLOT[coord]
        out: dict[int, dict[Monomial, complex]] = {}
        for d, monos in self.terms.items():
            for mono, c in monos.items():
                e = mono[slot]
                if e == 0:
                    continue
                lowered = list(mono)
                lowered[slot] = e - 1
                bucket = out.setdefault(d, {})
                key = tuple(lowered)
                bucket[key] = bucket.get(key, 0.0) + c * e
        return ScalarLambdaPoly(out)

    def split(self) -> tuple["ScalarLambdaPoly", "ScalarLambdaPoly"]:
        """(plus, minus) with self = plus - minus; constants land in plus."""
        plus = ScalarLambdaPoly({d: m for d, m in self.terms.items() if d >= 0})
        minus = ScalarLambdaPoly({d: m for d, m in self.terms.items() if d < 0}).scale(-1.0)
        return plus, minus

    # -- evaluation ----------------------------------------------------------

    def eval_monomials(self, grid: SpacetimeGrid) -> dict[int, np.ndarray]:
        """{lam-degree: complex array over the grid}."""
        y, z, ybar, zbar = grid.complex_arrays()
        coords = (y, z, ybar, zbar)
        out = {}
        for d, monos in self.terms.items():
            acc = np.zeros(grid.extents, dtype=complex)
            for mono, c in monos.items():
                val = np.full(grid.extents, c, dtype=complex)
                for base, e in zip(coords, mono):
                    if e:
                        val = val * base**e
                acc += val
            out[d] = acc
        return out

    def eval_point(self, y: complex, z: complex, ybar: complex, zbar: complex) -> dict[int, complex]:
        coords = (y, z, ybar, zbar)
        out = {}
        for d, monos in self.terms.items():
            acc = 0.0 + 0.0j
            for mono, c in monos.items():
                val = c
                for base, e in zip(coords, mono):
                    if e:
                        val *= base**e
                acc += val
            out[d] = acc
        return out


class MatrixLambdaPoly:
    """lam-graded polynomial whose coefficients are constant n-by-n matrices."""

    __slots__ = ("terms", "dim")

    def __init__(self, dim: int, terms: dict[int, dict[Monomial, np.ndarray]] | None = None):
        self.dim = int(dim)
        self.terms = {}
        if terms:
            for deg, monos in terms.items():
                for mono, mat in monos.items():
                    mat = np.asarray(mat, dtype=complex)
                    if np.any(mat != 0):
                        self.terms.setdefault(int(deg), {})[tuple(mono)] = mat

    @classmethod
    def from_scalar(cls, poly: ScalarLambdaPoly, gen: np.ndarray) -> "MatrixLambdaPoly":
        gen = np.asarray(gen, dtype=complex)
        return cls(
            gen.shape[-1],
            {d: {m: c * gen for m, c in monos.items()} for d, monos in poly.terms.items()},
        )

    def lambda_band(self) -> int:
        return max((abs(d) for d in self.terms), default=0)

    def __add__(self, other: "MatrixLambdaPoly") -> "MatrixLambdaPoly":
        out = {d: dict(m) for d, m in self.terms.items()}
        for d, monos in other.terms.items():
            slot = out.setdefault(d, {})
            for mono, mat in monos.items():
                slot[mono] = slot.get(mono, 0.0) + mat
        return MatrixLambdaPoly(self.dim, out)

    def scale(self, c: complex) -> "MatrixLambdaPoly":
        return MatrixLambdaPoly(
            self.dim,
            {d: {m: c * v for m, v in monos.items()} for d, monos in self.terms.items()},
        )

    def shift_lambda(self, k: int) -> "MatrixLambdaPoly":
        return MatrixLambdaPoly(self.dim, {d + k: dict(m) for d, m in self.terms.items()})

    def derivative(self, coord: str) -> "MatrixLambdaPoly":
        slot = _COORD_SLOT[coord]
        out: dict[int, dict[Monomial, np.ndarray]] = {}
        for d, monos in self.terms.items():
            for mono, mat in monos.items():
                e = mono[slot]
                if e == 0:
                    continue
                lowered = list(mono)
                lowered[slot] = e - 1
                bucket = out.setdefault(d, {})
                key = tuple(lowered)
                bucket[key] = bucket.get(key, 0.0) + mat * e
        return MatrixLambdaPoly(self.dim, out)

    def frame_derivative(self, patch: int, a: int) -> "MatrixLambdaPoly":
        """Exact frame-field application; zero on twistor polynomials."""
        if a == 3:
            return MatrixLambdaPoly(self.dim)
        if patch == 1:
            if a == 1:
                return self.derivative("ybar") + self.derivative("z").shift_lambda(1).scale(-1.0)
            return self.derivative("zbar") + self.derivative("y").shift_lambda(1)
        if a == 1:
            return self.derivative("ybar").shift_lambda(-1) + self.derivative("z").scale(-1.0)
        return self.derivative("zbar").shift_lambda(-1) + self.derivative("y")

    def eval_grid(self, grid: SpacetimeGrid, band: int | None = None) -> LaurentField:
        """Exact evaluation to a grid Laurent field (lead = grid extents)."""
        band = self.lambda_band() if band is None else band
        field = LaurentField.zero(self.dim, band, grid.extents)
        y, z, ybar, zbar = grid.complex_arrays()
        coords = (y, z, ybar, zbar)
        for d, monos in self.terms.items():
            for mono, mat in monos.items():
                val = np.ones(grid.extents, dtype=complex)
                for base, e in zip(coords, mono):
                    if e:
                        val = val * base**e
                field.coeffs[..., band + d, :, :] += val[..., None, None] * mat
        return field

    def max_coeff_norm(self) -> float:
        return max(
            (float(np.max(np.abs(m))) for monos in self.terms.values() for m in monos.values()),
            default=0.0,
        )


def w1_poly() -> ScalarLambdaPoly:
    """w1 = z + lam*ybar."""
    return ScalarLambdaPoly({0: {(0, 1, 0, 0): 1.0}, 1: {(0, 0, 1, 0): 1.0}})


def w2_poly() -> ScalarLambdaPoly:
    """w2 = y - lam*zbar."""
    return ScalarLambdaPoly({0: {(1, 0, 0, 0): 1.0}, 1: {(0, 0, 0, 1): -1.0}})


def twistor_monomial(p: int, q: int, r: int) -> ScalarLambdaPoly:
    """w1^p * w2^q * lam^r expanded into spacetime coordinates."""
    if p < 0 or q < 0:
        raise ValueError("w-exponents must be non-negative")
    acc = ScalarLambdaPoly.constant(1.0)
    for _ in range(p):
        acc = acc.mul(w1_poly())
    for _ in range(q):
        acc = acc.mul(w2_poly())
    return acc.shift_lambda(r)


class TwistorPolynomial:
    """A finite sum of terms coeff * w1^p * w2^q * lam^r.

    The coefficient of each term is an n-by-n matrix (scalars are
    promoted to multiples of the identity of the requested dimension).
    """

    def __init__(self, terms: list[tuple[np.ndarray | complex, int, int, int]], dim: int = 1):
        self.dim = int(dim)
        self.terms = []
        for coeff, p, q, r in terms:
            mat = np.asarray(coeff, dtype=complex)
            if mat.ndim == 0:
                mat = complex(mat) * np.eye(self.dim, dtype=complex)
            elif mat.shape != (self.dim, self.dim):
                raise ValueError(f"coefficient shape {mat.shape} does not match dim {self.dim}")
            self.terms.append((mat, int(p), int(q), int(r)))

    def expand(self) -> MatrixLambdaPoly:
        acc = MatrixLambdaPoly(self.dim)
        for mat, p, q, r in self.terms:
            acc = acc + MatrixLambdaPoly.from_scalar(twistor_monomial(p, q, r), mat)
        return acc

    def scalar_profile(self) -> tuple[ScalarLambdaPoly, np.ndarray] | None:
        """(scalar polynomial, generator matrix) when all terms share one matrix.

        A shared constant matrix direction means the expanded polynomial
        commutes with itself everywhere, which unlocks exact exponential
        splitting.  Returns None when no common direction exists.
        """
        if not self.terms:
            return ScalarLambdaPoly(), np.eye(self.dim, dtype=complex)
        base = None
        coeffs = []
        for mat, _, _, _ in self.terms:
            scale = mat.flat[np.argmax(np.abs(mat))]
            if abs(scale) == 0:
                coeffs.append(0.0)
                continue
            direction = mat / scale
            if base is None:
                base = direction
            if np.max(np.abs(direction - base)) > 1e-13:
                return None
            coeffs.append(complex(scale))
        if base is None:
            return ScalarLambdaPoly(), np.eye(self.dim, dtype=complex)
        acc = ScalarLambdaPoly()
        for c, (_, p, q, r) in zip(coeffs, self.terms):
            acc = acc + twistor_monomial(p, q, r).scale(c)
        return acc, base
