"""Truncated matrix-valued Laurent series on the unit circle.

A field is stored as a coefficient array of shape ``(*lead, 2K+1, n, n)``
whose degree axis runs from -K to +K.  The leading axes are free: a single
series has ``lead = ()``, a series attached to every point of a spacetime
grid has ``lead = extents``.  All operations broadcast over the leading
axes and are pure.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    IllConditionedError,
    InsufficientSamplingError,
    InvalidGridError,
    NonInvertibleError,
)

# ---------------------------------------------------------------------------
# plain matrix algebra (vectorized over leading axes)
# ---------------------------------------------------------------------------

#: condition-number ceiling for refusing an inverse
COND_LIMIT = 1e12


def max_abs(x) -> float:
    """Max absolute entry; the defect norm used throughout the package."""
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def mat_mul(a, b):
    return np.asarray(a) @ np.asarray(b)


def commutator(x, y):
    x, y = np.asarray(x), np.asarray(y)
    return x @ y - y @ x


def mat_inv(a, cond_limit: float = COND_LIMIT):
    """Inverse of a (stack of) square matrices with a conditioning guard."""
    a = np.asarray(a, dtype=complex)
    cond = np.linalg.cond(a)
    if not np.all(np.isfinite(cond)) or np.max(cond) > cond_limit:
        raise NonInvertibleError(
            f"matrix condition number {np.max(cond):.3e} exceeds {cond_limit:.1e}"
        )
    return np.linalg.inv(a)


def mat_exp(x):
    """Matrix exponential by scaling-and-squaring with a Taylor series.

    Vectorized over leading axes; accurate to roundoff once the scaled
    norm is below 1/2 (19 series terms).
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    norm = np.max(np.abs(x).sum(axis=-1)) if x.size else 0.0
    squarings = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    y = x / (2**squarings)
    eye = np.broadcast_to(np.eye(n, dtype=complex), x.shape)
    acc = eye.copy()
    term = eye.copy()
    for k in range(1, 19):
        term = term @ y / k
        acc = acc + term
    for _ in range(squarings):
        acc = acc @ acc
    return acc


def principal_log(m, cond_limit: float = 1e8):
    """Principal matrix logarithm via eigendecomposition.

    Raises IllConditionedError when the input is near-singular or too
    close to defective for the eigenbasis to be trusted.
    """
    m = np.asarray(m, dtype=complex)
    w, v = np.linalg.eig(m)
    small = np.abs(w) < 1e-13
    if np.any(small):
        raise IllConditionedError(
            f"{int(np.count_nonzero(small))} eigenvalue(s) at the origin; no principal log"
        )
    cond = np.linalg.cond(v)
    if not np.all(np.isfinite(cond)) or np.max(cond) > cond_limit:
        raise IllConditionedError(
            f"eigenbasis condition number {np.max(cond):.3e} exceeds {cond_limit:.1e}"
        )
    lw = np.log(w)
    return (v * lw[..., None, :]) @ np.linalg.inv(v)


# ---------------------------------------------------------------------------
# Laurent fields
# ---------------------------------------------------------------------------


def circle_nodes(nsamples: int) -> np.ndarray:
    """The uniform sample points exp(2*pi*i*j/N), j = 0..N-1."""
    return np.exp(2j * np.pi * np.arange(nsamples) / nsamples)


class LaurentField:
    """Band-limited Laurent series with n-by-n matrix coefficients."""

    __slots__ = ("coeffs", "band")

    def __init__(self, coeffs: np.ndarray, band: int):
        coeffs = np.asarray(coeffs, dtype=complex)
        if band < 0 or coeffs.shape[-3] != 2 * band + 1:
            raise ValueError(f"coefficient axis {coeffs.shape[-3]} does not match band {band}")
        if coeffs.shape[-1] != coeffs.shape[-2]:
            raise ValueError("coefficients must be square matrices")
        self.coeffs = coeffs
        self.band = band

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, dim: int, band: int = 0, lead: tuple = ()) -> "LaurentField":
        return cls(np.zeros((*lead, 2 * band + 1, dim, dim), dtype=complex), band)

    @classmethod
    def identity(cls, dim: int, band: int = 0, lead: tuple = ()) -> "LaurentField":
        f = cls.zero(dim, band, lead)
        f.coeffs[..., band, :, :] = np.eye(dim)
        return f

    @classmethod
    def from_coeffs(cls, entries: dict, dim: int | None = None, band: int | None = None,
                    lead: tuple = ()) -> "LaurentField":
        """Build from a {degree: matrix-or-scalar} mapping."""
        mats = {d: np.atleast_2d(np.asarray(m, dtype=complex)) for d, m in entries.items()}
        if dim is None:
            dim = next(iter(mats.values())).shape[-1] if mats else 1
        if band is None:
            band = max((abs(d) for d in mats), default=0)
        f = cls.zero(dim, band, lead)
        for d, m in mats.items():
            f.coeffs[..., band + d, :, :] = m
        return f

    @classmethod
    def from_samples(cls, values: np.ndarray, band: int) -> "LaurentField":
        """Discrete Fourier projection of uniform circle samples.

        ``values`` has shape (*lead, N, n, n) with N >= 2*band+1; the
        result is exact for inputs band-limited to [-band, band].
        """
        values = np.asarray(values, dtype=complex)
        nsamples = values.shape[-3]
        if nsamples < 2 * band + 1:
            raise InsufficientSamplingError(
                f"{nsamples} samples cannot resolve band {band} (need >= {2 * band + 1})"
            )
        spectrum = np.fft.fft(values, axis=-3) / nsamples
        picks = [spectrum[..., d % nsamples, :, :] for d in range(-band, band + 1)]
        return cls(np.stack(picks, axis=-3), band)

    # -- basic queries -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def lead_shape(self) -> tuple:
        return self.coeffs.shape[:-3]

    def degrees(self) -> range:
        return range(-self.band, self.band + 1)

    def coeff(self, degree: int) -> np.ndarray:
        """Coefficient matrix of a degree; zero outside the band."""
        if abs(degree) > self.band:
            return np.zeros((*self.lead_shape, self.dim, self.dim), dtype=complex)
        return self.coeffs[..., self.band + degree, :, :]

    def copy(self) -> "LaurentField":
        return LaurentField(self.coeffs.copy(), self.band)

    def max_norm(self) -> float:
        return max_abs(self.coeffs)

    # -- evaluation ----------------------------------------------------------

    def sample(self, lam, check_circle: bool = True) -> np.ndarray:
        """Evaluate at points lam (scalar or 1-d array) on |lam| = 1.

        Returns shape (*lead, n, n) for a scalar argument, else
        (*lead, M, n, n).
        """
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
        if check_circle and np.any(np.abs(np.abs(lam_arr) - 1.0) > 1e-9):
            raise ValueError("evaluation point off the unit circle")
        powers = lam_arr[:, None] ** np.arange(-self.band, self.band + 1)[None, :]
        vals = np.einsum("md,...dij->...mij", powers, self.coeffs)
        if np.isscalar(lam) or np.asarray(lam).ndim == 0:
            return vals[..., 0, :, :]
        return vals

    def sample_circle(self, nsamples: int) -> np.ndarray:
        """Values at the N uniform circle nodes, shape (*lead, N, n, n).

        Exact for any band: degrees that collide mod N accumulate, which
        is precisely what evaluation at those nodes does.
        """
        spectrum = np.zeros((*self.lead_shape, nsamples, self.dim, self.dim), dtype=complex)
        for d in self.degrees():
            spectrum[..., d % nsamples, :, :] += self.coeffs[..., self.band + d, :, :]
        return np.fft.ifft(spectrum, axis=-3) * nsamples

    def flat_block(self, start: int, stop: int) -> "LaurentField":
        """Slice of the flattened leading axes (no copy)."""
        flat = self.coeffs.reshape(-1, *self.coeffs.shape[-3:])
        return LaurentField(flat[start:stop], self.band)

    def sample_circle_flat(self, start: int, stop: int, nsamples: int) -> np.ndarray:
        return self.flat_block(start, stop).sample_circle(nsamples)

    # -- arithmetic ----------------------------------------------------------

    def _binary_band(self, other: "LaurentField") -> int:
        return max(self.band, other.band)

    def pad_to_band(self, band: int) -> "LaurentField":
        if band < self.band:
            raise ValueError("use truncate() to shrink the band")
        if band == self.band:
            return self
        extra = band - self.band
        pad = [(0, 0)] * self.coeffs.ndim
        pad[-3] = (extra, extra)
        return LaurentField(np.pad(self.coeffs, pad), band)

    def __add__(self, other: "LaurentField") -> "LaurentField":
        band = self._binary_band(other)
        return LaurentField(
            self.pad_to_band(band).coeffs + other.pad_to_band(band).coeffs, band
        )

    def __sub__(self, other: "LaurentField") -> "LaurentField":
        band = self._binary_band(other)
        return LaurentField(
            self.pad_to_band(band).coeffs - other.pad_to_band(band).coeffs, band
        )

    def __neg__(self) -> "LaurentField":
        return LaurentField(-self.coeffs, self.band)

    def scale(self, c: complex) -> "LaurentField":
        return LaurentField(self.coeffs * c, self.band)

    def mul(self, other: "LaurentField") -> "LaurentField":
        """Exact product; the band grows to the sum of the bands."""
        band = self.band + other.band
        out = np.zeros(
            (*np.broadcast_shapes(self.lead_shape, other.lead_shape),
             2 * band + 1, self.dim, self.dim),
            dtype=complex,
        )
        for i, da in enumerate(self.degrees()):
            lo = i  # (da + self.band) + (db + other.band) starts at i for db = -other.band
            out[..., lo:lo + 2 * other.band + 1, :, :] += (
                self.coeffs[..., i:i + 1, :, :] @ other.coeffs
            )
        return LaurentField(out, band)

    def shift(self, degrees: int) -> "LaurentField":
        """Multiply by lam**degrees (reindexes the degree axis)."""
        if degrees == 0:
            return self
        band = self.band + abs(degrees)
        out = LaurentField.zero(self.dim, band, self.lead_shape)
        lo = band + degrees - self.band
        out.coeffs[..., lo:lo + 2 * self.band + 1, :, :] = self.coeffs
        return out

    def truncate(self, band: int) -> tuple["LaurentField", float]:
        """Drop degrees beyond ``band``; returns (field, discarded tail norm)."""
        if band >= self.band:
            return self.pad_to_band(band), 0.0
        cut = self.band - band
        tail = max(
            max_abs(self.coeffs[..., :cut, :, :]),
            max_abs(self.coeffs[..., -cut:, :, :]),
        )
        return LaurentField(self.coeffs[..., cut:-cut, :, :].copy(), band), tail

    def window(self, lo: int, hi: int) -> "LaurentField":
        """Zero out all degrees outside [lo, hi] (band unchanged)."""
        out = self.copy()
        for d in self.degrees():
            if d < lo or d > hi:
                out.coeffs[..., self.band + d, :, :] = 0.0
        return out

    def degree_mass_outside(self, lo: int, hi: int) -> float:
        """Max-norm of the coefficients outside the degree window [lo, hi]."""
        worst = 0.0
        for d in self.degrees():
            if d < lo or d > hi:
                worst = max(worst, max_abs(self.coeffs[..., self.band + d, :, :]))
        return worst

    # -- spectral projection ---------------------------------------------------

    def cauchy_split(self) -> tuple["LaurentField", "LaurentField"]:
        """Split into (plus, minus) with ``self = plus - minus``.

        ``plus`` keeps the degrees >= 0 (the constant term included, which
        pins the otherwise free split), ``minus`` is -1 times the strictly
        negative part.  Both come back at the original band.
        """
        plus = self.window(0, self.band)
        minus = self.window(-self.band, -1).scale(-1.0)
        return plus, minus

    def contour_average(self, weight_degree: int, method: str = "coeff",
                        nsamples: int | None = None) -> np.ndarray:
        """Circle average of lam**weight_degree * f over dlam/(2*pi*i*lam).

        Equals the coefficient of degree -weight_degree.  ``method`` picks
        the stored coefficient or an N-point trapezoid rule; both agree to
        roundoff for band-limited fields.
        """
        if method == "coeff":
            return self.coeff(-weight_degree)
        if method == "trapezoid":
            nsamples = nsamples or max(64, 2 * self.band + 1)
            lam = circle_nodes(nsamples)
            vals = self.sample_circle(nsamples)
            w = lam**weight_degree
            return np.einsum("m,...mij->...ij", w, vals) / nsamples
        raise ValueError(f"unknown method {method!r}")


def laurent_from_samples(samples, band: int) -> LaurentField:
    """Discrete Fourier projection of explicit (lam_j, matrix) pairs.

    The points must be the N uniform roots of unity in index order with
    N >= 2*band+1; anything else raises InvalidGridError or
    InsufficientSamplingError.
    """
    pts = [np.asarray(p, dtype=complex) for _, p in samples]
    lams = np.asarray([lam for lam, _ in samples], dtype=complex)
    nsamples = len(lams)
    if nsamples < 2 * band + 1:
        raise InsufficientSamplingError(
            f"{nsamples} samples cannot resolve band {band} (need >= {2 * band + 1})"
        )
    if max_abs(lams - circle_nodes(nsamples)) > 1e-9:
        raise InvalidGridError("sample points are not uniform roots of unity in order")
    values = np.stack([np.atleast_2d(p) for p in pts], axis=0)
    return LaurentField.from_samples(values, band)
