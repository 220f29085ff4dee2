"""Multi-indices on Z^n, the deformation matrix and the cocycle phase.

The twisted product of the noncommutative torus is governed by the bilinear
form ``c(k, l) = sum_{q<p} k_p theta_{pq} l_q``; every product in the package
goes through :func:`phase` or its vectorised form :meth:`ThetaMatrix.phase_table`.
"""
from __future__ import annotations

import itertools
from math import comb, prod
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidArgument

MultiIndex = tuple  # tuple[int, ...]


class ThetaMatrix:
    """Real antisymmetric n x n matrix stored by its strict upper triangle.

    Parameters
    ----------
    n : int
        Torus dimension, at least 1.
    upper : sequence of float
        Row-major strict upper triangle ``theta_12, theta_13, ..., theta_{n-1,n}``.
    """

    __slots__ = ("n", "upper", "_matrix", "_lower")

    def __init__(self, n: int, upper: Sequence[float] = ()):
        n = int(n)
        if n < 1:
            raise InvalidArgument(f"dimension must be >= 1, got {n}")
        upper = tuple(float(x) for x in upper)
        if not upper and n > 1:
            upper = (0.0,) * (n * (n - 1) // 2)
        if len(upper) != n * (n - 1) // 2:
            raise InvalidArgument(
                f"n={n} needs {n * (n - 1) // 2} upper-triangle entries, got {len(upper)}"
            )
        self.n = n
        self.upper = upper
        m = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        m[iu] = upper
        m = m - m.T
        m.setflags(write=False)
        self._matrix = m
        low = np.tril(m, -1)
        low.setflags(write=False)
        self._lower = low

    @classmethod
    def zero(cls, n: int) -> "ThetaMatrix":
        return cls(n)

    @classmethod
    def from_matrix(cls, mat) -> "ThetaMatrix":
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidArgument("theta must be a square matrix")
        if not np.array_equal(mat, -mat.T):
            raise InvalidArgument("theta must be exactly antisymmetric")
        n = mat.shape[0]
        return cls(n, mat[np.triu_indices(n, 1)])

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def lower(self) -> np.ndarray:
        """Strict lower triangle; ``c(k, l) = k @ lower @ l``."""
        return self._lower

    def __eq__(self, other):
        return isinstance(other, ThetaMatrix) and self.n == other.n and self.upper == other.upper

    def __hash__(self):
        return hash((self.n, self.upper))

    def __repr__(self):
        return f"ThetaMatrix(n={self.n}, upper={list(self.upper)})"

    def phase_table(self, k, l) -> np.ndarray:
        """Vectorised ``c(k_i, l_j)`` for index arrays of shape (N, n) and (M, n)."""
        k = np.asarray(k, dtype=float).reshape(-1, self.n)
        l = np.asarray(l, dtype=float).reshape(-1, self.n)
        return (k @ self._lower) @ l.T

    def phase_pairs(self, k, l) -> np.ndarray:
        """Row-wise ``c(k_i, l_i)`` for two index arrays of equal length."""
        k = np.asarray(k, dtype=float).reshape(-1, self.n)
        l = np.asarray(l, dtype=float).reshape(-1, self.n)
        return np.einsum("ij,ij->i", k @ self._lower, l)


def as_index(k, n: int | None = None) -> MultiIndex:
    """Normalise ``k`` to a tuple of ints, checking its length against ``n``."""
    try:
        t = tuple(int(x) for x in k)
    except TypeError:
        t = (int(k),)
    if any(int(x) != x for x in np.atleast_1d(np.asarray(k, dtype=float))):
        raise InvalidArgument(f"multi-index {k!r} has non-integer entries")
    if n is not None and len(t) != n:
        raise InvalidArgument(f"multi-index {t} has length {len(t)}, expected {n}")
    return t


def as_order(alpha, n: int | None = None) -> MultiIndex:
    """Like :func:`as_index` but rejects negative entries."""
    t = as_index(alpha, n)
    if any(a < 0 for a in t):
        raise InvalidArgument(f"multi-order {t} has negative entries")
    return t


def phase(theta: ThetaMatrix, k, l) -> float:
    """Cocycle phase ``c(k, l) = sum_{q<p} k_p theta_{pq} l_q``."""
    k = as_index(k, theta.n)
    l = as_index(l, theta.n)
    m = theta.matrix
    total = 0.0
    for p in range(theta.n):
        for q in range(p):
            total += k[p] * m[p, q] * l[q]
    return total


def peetre_bound(m: float, xi, eta) -> tuple[float, float]:
    """Both sides of ``(1+|xi+eta|)^m <= (1+|xi|)^m (1+|eta|)^|m|``."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    lhs = (1.0 + np.linalg.norm(xi + eta)) ** m
    rhs = (1.0 + np.linalg.norm(xi)) ** m * (1.0 + np.linalg.norm(eta)) ** abs(m)
    return float(lhs), float(rhs)


def sup_norm(k) -> int:
    return max((abs(int(x)) for x in k), default=0)


def box_points(radius: int, n: int) -> np.ndarray:
    """All lattice points with ``|k|_inf <= radius`` in lexicographic order, shape (N, n)."""
    r = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([r] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1).astype(np.int64)


def unit(n: int, j: int) -> MultiIndex:
    e = [0] * n
    e[j] = 1
    return tuple(e)


def add(k, l) -> MultiIndex:
    return tuple(a + b for a, b in zip(k, l))


def sub(k, l) -> MultiIndex:
    return tuple(a - b for a, b in zip(k, l))


def power(k, alpha) -> float:
    """``k^alpha`` for a real vector ``k`` and a multi-order ``alpha``."""
    return prod(float(x) ** a for x, a in zip(k, alpha))


def multi_binom(alpha, beta) -> int:
    return prod(comb(a, b) for a, b in zip(alpha, beta))


def sub_orders(alpha) -> Iterator[MultiIndex]:
    """All ``beta <= alpha`` componentwise."""
    return itertools.product(*(range(a + 1) for a in alpha))


def orders_up_to(n: int, total: int) -> Iterable[MultiIndex]:
    """All multi-orders of length ``n`` with ``|alpha| <= total``."""
    for a in itertools.product(range(total + 1), repeat=n):
        if sum(a) <= total:
            yield a
