"""
One-dimensional constrained piecewise Bernstein basis.

A degree-K polynomial on a segment is written in matrix form as
phi(t) = T(t) B, where T(t) = [1 t ... t^K] is the monomial feature
row and B the Bernstein coefficient matrix. Segments are joined by
a constraint matrix C that maps free weights to the raw per-segment
Bernstein weights such that neighbouring segments meet with equal
value and slope:

    w_0^b = w_K^a
    w_1^b = -w_{K-1}^a + 2 w_0^b

Free parameter ordering: the K+1 weights of the first segment,
followed by weights 2..K of every further segment, left to right.
The last two free weights of each segment act as the (slope-like,
value-like) pair carried into the next one.

Knots are uniform. Interior knots belong to the segment on their
right, the upper domain bound belongs to the last segment.
Out-of-domain inputs are rejected; use clamp_to_domain explicitly
when clipping is wanted.
"""

from functools import lru_cache

import numpy as np
from scipy.special import comb

from polynomial_sdf.exceptions import OutOfDomainError
from polynomial_sdf.schemas.basis import BasisConfig


def bernstein_basis(degree: int, t: float) -> np.ndarray:
    """Values of the K+1 Bernstein polynomials of degree K at t in [0, 1]."""
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if not 0.0 <= t <= 1.0:
        raise OutOfDomainError(
            f"local coordinate t={t} outside [0, 1]; localize before evaluating"
        )
    k = np.arange(degree + 1)
    return comb(degree, k) * (1.0 - t) ** (degree - k) * t ** k


@lru_cache(maxsize=None)
def _coeff_matrix(degree: int) -> np.ndarray:
    B = np.zeros((degree + 1, degree + 1))
    for k in range(degree + 1):
        for j in range(k, degree + 1):
            B[j, k] = comb(degree, k) * comb(degree - k, j - k) * (-1) ** (j - k)
    B.flags.writeable = False
    return B


def coeff_matrix(degree: int) -> np.ndarray:
    """
    Bernstein coefficient matrix B with T(t) @ B == bernstein_basis(K, t).

    Row j holds the coefficients of t^j, column k belongs to the k-th
    Bernstein polynomial, so B is lower-triangular.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    return _coeff_matrix(degree)


@lru_cache(maxsize=None)
def _constraint_matrix(degree: int, segments: int) -> np.ndarray:
    n_free = (degree - 1) * segments + 2
    C = np.zeros(((degree + 1) * segments, n_free))
    C[: degree + 1, : degree + 1] = np.eye(degree + 1)

    next_free = degree + 1
    for s in range(1, segments):
        row = s * (degree + 1)
        last = C[row - 1].copy()
        before_last = C[row - 2].copy()
        # w_0^b = w_K^a
        C[row] = last
        # w_1^b = -w_{K-1}^a + 2 w_0^b
        C[row + 1] = 2.0 * last - before_last
        for k in range(2, degree + 1):
            C[row + k, next_free] = 1.0
            next_free += 1
    C.flags.writeable = False
    return C


def constraint_matrix(degree: int, segments: int) -> np.ndarray:
    """
    C^1 constraint matrix of shape ((K+1) S, (K-1) S + 2).

    Multiplying free weights by C yields raw Bernstein weights whose
    concatenated segments are continuous in value and first derivative.
    Every row sums to one, so the constrained basis keeps partition of unity.
    """
    if degree < 2:
        raise ValueError(
            f"C1 constraints need degree >= 2, got {degree}"
        )
    if segments < 1:
        raise ValueError(f"segments must be >= 1, got {segments}")
    return _constraint_matrix(degree, segments)


class AxisBasis:
    """
    Evaluator for one axis of a tensor-product basis.

    Precomputes B @ C_s for every segment s so a row of the
    constrained basis is a single (K+1)-by-M product.
    """

    def __init__(self, degree: int, segments: int, lo: float, hi: float):
        if not lo < hi:
            raise ValueError(f"axis bounds must satisfy lo < hi, got [{lo}, {hi}]")
        self.degree = degree
        self.segments = segments
        self.lo = float(lo)
        self.hi = float(hi)
        self.width = (self.hi - self.lo) / segments
        self.n_free = (degree - 1) * segments + 2

        B = coeff_matrix(degree)
        C = constraint_matrix(degree, segments)
        blocks = C.reshape(segments, degree + 1, self.n_free)
        self._blocks = np.einsum("jk,skm->sjm", B, blocks)
        self._blocks.flags.writeable = False

        powers = np.arange(degree + 1)
        # falling[r, j] = j! / (j - r)!  (zero for j < r)
        self._falling = np.zeros((degree + 1, degree + 1))
        for r in range(degree + 1):
            for j in range(r, degree + 1):
                self._falling[r, j] = np.prod(np.arange(j - r + 1, j + 1))
        self._powers = powers

    def locate(self, x: float) -> tuple[int, float]:
        """Segment index and local coordinate of a single point."""
        if not self.lo <= x <= self.hi:
            raise OutOfDomainError(
                f"x={x} outside axis domain [{self.lo}, {self.hi}]"
            )
        u = (x - self.lo) / self.width
        index = min(int(np.floor(u)), self.segments - 1)
        t = (x - (self.lo + index * self.width)) / self.width
        return index, min(max(t, 0.0), 1.0)

    def locate_batch(self, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xs = np.asarray(xs, dtype=float)
        if xs.size and (xs.min() < self.lo or xs.max() > self.hi):
            bad = xs[(xs < self.lo) | (xs > self.hi)][0]
            raise OutOfDomainError(
                f"x={bad} outside axis domain [{self.lo}, {self.hi}]"
            )
        u = (xs - self.lo) / self.width
        index = np.minimum(np.floor(u).astype(int), self.segments - 1)
        t = (xs - (self.lo + index * self.width)) / self.width
        return index, np.clip(t, 0.0, 1.0)

    def _monomials(self, t: np.ndarray, order: int) -> np.ndarray:
        """Rows of d^order/dt^order [1 t ... t^K]."""
        exponents = np.maximum(self._powers - order, 0)
        return self._falling[order] * t[:, None] ** exponents

    def phi(self, x: float, order: int = 0) -> np.ndarray:
        return self.phi_batch(np.array([x]), order)[0]

    def phi_batch(self, xs: np.ndarray, order: int = 0) -> np.ndarray:
        """
        Constrained basis rows (n, M) for points xs.

        Derivatives are taken with respect to world x, so they carry
        the chain-rule factor (1 / segment width)^order.
        """
        if order < 0 or order > self.degree:
            raise ValueError(f"derivative order must be in [0, {self.degree}]")
        index, t = self.locate_batch(xs)
        T = self._monomials(t, order)
        rows = np.einsum("nj,njm->nm", T, self._blocks[index])
        if order:
            rows *= self.width ** (-order)
        return rows


@lru_cache(maxsize=256)
def axis_bases(config: BasisConfig) -> tuple[AxisBasis, ...]:
    """Cached per-axis evaluators of a configuration."""
    return tuple(
        AxisBasis(config.degree, config.segments, lo, hi)
        for lo, hi in config.domain
    )


def locate_segment(x: float, axis: AxisBasis) -> tuple[int, float]:
    """Segment index in [0, S-1] and local t in [0, 1] for a world coordinate."""
    return axis.locate(x)


def phi_1d(x: float, axis: AxisBasis, order: int = 0) -> np.ndarray:
    """Row of M constrained basis values (or derivatives) at x."""
    return axis.phi(x, order)


def clamp_to_domain(x, config: BasisConfig) -> np.ndarray:
    """Clip a point (or array of points) into the domain of config."""
    return np.clip(np.asarray(x, dtype=float), config.lower, config.upper)
