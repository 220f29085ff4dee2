"""The smooth noncommutative torus as truncated Fourier coefficient tables.

An :class:`AlgebraElement` stands for ``u = sum_k u_k U^k`` with finitely many
nonzero coefficients, all inside the sup-norm box ``|k|_inf <= radius``.
Products use ``U^k U^l = exp(-2 i pi c(k, l)) U^{k+l}`` and are computed on the
full Minkowski-sum support before truncation; whatever falls outside the
radius cap is discarded and its l1 mass recorded on the result as
``truncation_mass``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np

from .errors import InvalidArgument
from .lattice import ThetaMatrix, as_index, as_order

DROP_THRESHOLD = 1e-15
RADIUS_CAP = 48

_TWO_PI = 2.0 * np.pi


def _encode(idx: np.ndarray, bound: int) -> np.ndarray:
    """Injective int64 key for indices with ``|k|_inf <= bound``."""
    base = 2 * bound + 1
    keys = np.zeros(idx.shape[0], dtype=np.int64)
    for j in range(idx.shape[1] - 1, -1, -1):
        keys = keys * base + (idx[:, j] + bound)
    return keys


def _decode(keys: np.ndarray, bound: int, n: int) -> np.ndarray:
    base = 2 * bound + 1
    out = np.empty((keys.shape[0], n), dtype=np.int64)
    rest = keys.copy()
    for j in range(n):
        out[:, j] = rest % base - bound
        rest //= base
    return out


class AlgebraElement:
    """Finite Fourier series ``sum_k u_k U^k`` over a fixed deformation matrix.

    Instances are immutable.  Coefficients with modulus at most ``drop`` are
    removed at construction, as are indices outside the sup-norm ``radius``
    (their l1 mass is kept in :attr:`truncation_mass`).
    """

    __slots__ = ("theta", "radius", "truncation_mass", "_idx", "_val")

    def __init__(self, theta: ThetaMatrix, coeffs: Mapping | None = None,
                 radius: int | None = None, drop: float = DROP_THRESHOLD):
        n = theta.n
        coeffs = coeffs or {}
        if coeffs:
            idx = np.array([as_index(k, n) for k in coeffs], dtype=np.int64).reshape(-1, n)
            val = np.array([complex(v) for v in coeffs.values()], dtype=complex)
        else:
            idx = np.zeros((0, n), dtype=np.int64)
            val = np.zeros(0, dtype=complex)
        self._setup(theta, idx, val, radius, drop)

    def _setup(self, theta, idx, val, radius, drop):
        self.theta = theta
        sup = np.abs(idx).max(axis=1) if idx.shape[0] else np.zeros(0, dtype=np.int64)
        if radius is None:
            radius = int(sup.max()) if sup.size else 0
        radius = int(radius)
        if radius < 0:
            raise InvalidArgument("radius must be nonnegative")
        inside = sup <= radius
        self.truncation_mass = float(np.abs(val[~inside]).sum())
        idx, val = idx[inside], val[inside]
        if idx.shape[0]:
            keys = _encode(idx, radius)
            order = np.argsort(keys, kind="stable")
            keys, idx, val = keys[order], idx[order], val[order]
            # merge duplicate indices
            uniq, start = np.unique(keys, return_index=True)
            if uniq.size != keys.size:
                val = np.add.reduceat(val, start)
                idx = idx[start]
            keep = np.abs(val) > drop
            idx, val = idx[keep], val[keep]
        idx.setflags(write=False)
        val.setflags(write=False)
        self.radius = radius
        self._idx = idx
        self._val = val

    @classmethod
    def from_arrays(cls, theta: ThetaMatrix, idx, val, radius: int | None = None,
                    drop: float = DROP_THRESHOLD) -> "AlgebraElement":
        obj = cls.__new__(cls)
        idx = np.asarray(idx, dtype=np.int64).reshape(-1, theta.n).copy()
        val = np.asarray(val, dtype=complex).reshape(-1).copy()
        if idx.shape[0] != val.shape[0]:
            raise InvalidArgument("index and value arrays differ in length")
        obj._setup(theta, idx, val, radius, drop)
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, theta: ThetaMatrix, radius: int = 0) -> "AlgebraElement":
        return cls(theta, {}, radius)

    @classmethod
    def identity(cls, theta: ThetaMatrix, scale: complex = 1.0) -> "AlgebraElement":
        return cls(theta, {(0,) * theta.n: scale}, 0)

    @classmethod
    def monomial(cls, theta: ThetaMatrix, k, coeff: complex = 1.0) -> "AlgebraElement":
        k = as_index(k, theta.n)
        return cls(theta, {k: coeff})

    # -- access -------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.theta.n

    @property
    def indices(self) -> np.ndarray:
        return self._idx

    @property
    def values(self) -> np.ndarray:
        return self._val

    def __len__(self):
        return self._val.shape[0]

    def items(self) -> Iterator[tuple[tuple, complex]]:
        for k, v in zip(self._idx, self._val):
            yield tuple(int(x) for x in k), complex(v)

    def to_dict(self) -> dict:
        return dict(self.items())

    def coeff(self, k) -> complex:
        k = np.asarray(as_index(k, self.n), dtype=np.int64)
        if not self._idx.shape[0]:
            return 0j
        hit = np.all(self._idx == k, axis=1)
        return complex(self._val[hit][0]) if hit.any() else 0j

    def support_radius(self) -> int:
        return int(np.abs(self._idx).max()) if len(self) else 0

    def is_zero(self) -> bool:
        return len(self) == 0

    def is_scalar(self) -> bool:
        return len(self) == 0 or (len(self) == 1 and not self._idx[0].any())

    def l1(self) -> float:
        return float(np.abs(self._val).sum())

    def max_abs(self) -> float:
        return float(np.abs(self._val).max()) if len(self) else 0.0

    def __repr__(self):
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in list(self.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} terms)"
        return f"AlgebraElement({{{terms}{more}}}, radius={self.radius})"

    # -- linear structure ---------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise InvalidArgument(f"expected AlgebraElement, got {type(other).__name__}")
        if other.theta != self.theta:
            raise InvalidArgument("elements live over different theta matrices")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return self + AlgebraElement.identity(self.theta, other)
        self._check(other)
        return AlgebraElement.from_arrays(
            self.theta, np.vstack([self._idx, other._idx]),
            np.concatenate([self._val, other._val]), max(self.radius, other.radius))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement.from_arrays(self.theta, self._idx, -self._val, self.radius)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: complex) -> "AlgebraElement":
        return AlgebraElement.from_arrays(self.theta, self._idx, c * self._val, self.radius)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, c):
        return self.scale(1.0 / c)

    def restrict(self, radius: int) -> "AlgebraElement":
        return AlgebraElement.from_arrays(self.theta, self._idx, self._val, radius)

    def with_radius(self, radius: int) -> "AlgebraElement":
        return self.restrict(radius)

    def map_diagonal(self, factor: Callable[[np.ndarray], np.ndarray]) -> "AlgebraElement":
        """Multiply each ``u_k`` by ``factor(k)``; ``factor`` gets the (N, n) index array."""
        f = np.asarray(factor(self._idx), dtype=complex).reshape(-1)
        return AlgebraElement.from_arrays(self.theta, self._idx, f * self._val, self.radius)

    def distance(self, other: "AlgebraElement", radius: int | None = None) -> float:
        """Coefficient-wise max of ``|self - other|``, optionally on ``|k|_inf <= radius`` only."""
        d = self - other
        if radius is not None and len(d):
            mask = np.abs(d._idx).max(axis=1) <= radius
            return float(np.abs(d._val[mask]).max()) if mask.any() else 0.0
        return d.max_abs()

    def is_selfadjoint(self, tol: float = 1e-12) -> bool:
        return self.distance(involution(self)) <= tol


@dataclass(frozen=True)
class DecayReport:
    """Shell maxima of ``|u_k|`` and a log-log decay fit."""

    shells: list = field(default_factory=list)
    fitted_order: float | None = None
    tail_mass: float = 0.0

    @property
    def fitted_order_defined(self) -> bool:
        return self.fitted_order is not None

    def to_csv(self) -> str:
        lines = ["shell_radius,max_abs"]
        lines += [f"{int(r)},{float(m)!r}" for r, m in self.shells]
        return "\n".join(lines) + "\n"


def _check_pair(u: AlgebraElement, v: AlgebraElement):
    if not isinstance(u, AlgebraElement) or not isinstance(v, AlgebraElement):
        raise InvalidArgument("expected two AlgebraElements")
    if u.theta != v.theta:
        raise InvalidArgument("elements live over different theta matrices")


def multiply(u: AlgebraElement, v: AlgebraElement, cap: int | None = None) -> AlgebraElement:
    """Twisted product ``(uv)_m = sum_{k+l=m} u_k v_l exp(-2 i pi c(k, l))``."""
    _check_pair(u, v)
    theta = u.theta
    cap = RADIUS_CAP if cap is None else cap
    radius = min(cap, u.radius + v.radius)
    if not len(u) or not len(v):
        return AlgebraElement.zero(theta, radius)
    terms = u._val[:, None] * v._val[None, :]
    if any(theta.upper):
        terms = terms * np.exp(-1j * _TWO_PI * theta.phase_table(u._idx, v._idx))
    bound = u.radius + v.radius
    keys = _encode(u._idx, bound)[:, None] + _encode(v._idx, bound)[None, :]
    # the encoding is affine, so key(k) + key(l) = key(k+l) + offset
    offset = _encode(np.zeros((1, theta.n), dtype=np.int64), bound)[0]
    keys = (keys - offset).ravel()
    uniq, inv = np.unique(keys, return_inverse=True)
    acc = np.zeros(uniq.size, dtype=complex)
    np.add.at(acc, inv, terms.ravel())
    idx = _decode(uniq, bound, theta.n)
    return AlgebraElement.from_arrays(theta, idx, acc, radius)


def involution(u: AlgebraElement) -> AlgebraElement:
    """``(u*)_m = conj(u_{-m}) exp(-2 i pi c(m, m))``."""
    idx = -u._idx
    ph = u.theta.phase_pairs(u._idx, u._idx)
    val = np.conj(u._val) * np.exp(-1j * _TWO_PI * ph)
    return AlgebraElement.from_arrays(u.theta, idx, val, u.radius)


def trace(u: AlgebraElement) -> complex:
    """The tracial state: the zeroth Fourier coefficient."""
    return u.coeff((0,) * u.n)


def inner_product(u: AlgebraElement, v: AlgebraElement) -> complex:
    """``<u, v> = tau(u v*) = sum_k u_k conj(v_k)``."""
    _check_pair(u, v)
    if not len(u) or not len(v):
        return 0j
    bound = max(u.radius, v.radius)
    ku, kv = _encode(u._idx, bound), _encode(v._idx, bound)
    _, iu, iv = np.intersect1d(ku, kv, assume_unique=True, return_indices=True)
    return complex(np.sum(u._val[iu] * np.conj(v._val[iv])))


def derivation(u: AlgebraElement, alpha) -> AlgebraElement:
    """``delta^alpha``: multiplies ``u_k`` by ``k^alpha``."""
    alpha = as_order(alpha, u.n)
    if not any(alpha):
        return u
    a = np.asarray(alpha)
    return u.map_diagonal(lambda k: np.prod(k.astype(float) ** a, axis=1))


def act(u: AlgebraElement, s) -> AlgebraElement:
    """The R^n action ``alpha_s``: multiplies ``u_k`` by ``exp(i s.k)``."""
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape[0] != u.n:
        raise InvalidArgument(f"shift has length {s.shape[0]}, expected {u.n}")
    return u.map_diagonal(lambda k: np.exp(1j * (k @ s)))


def shell_maxima(u: AlgebraElement) -> list:
    """``[(r, max_{|k|_inf = r} |u_k|)]`` for every shell from 0 to the radius."""
    out = []
    if not len(u):
        return [(r, 0.0) for r in range(u.radius + 1)]
    sup = np.abs(u._idx).max(axis=1)
    mags = np.abs(u._val)
    for r in range(u.radius + 1):
        sel = mags[sup == r]
        out.append((r, float(sel.max()) if sel.size else 0.0))
    return out


def fit_loglog(radii, values, tail: float = 0.5) -> tuple[float | None, float]:
    """Least-squares slope of ``log value`` against ``log(1 + r)``.

    Only strictly positive values at ``r >= 1`` enter; the fit uses the outer
    ``tail`` fraction of those shells (at least two of them).  Returns the
    slope (``None`` when fewer than two usable shells remain) and the RMS
    residual of the fit.
    """
    r = np.asarray(radii, dtype=float)
    y = np.asarray(values, dtype=float)
    ok = (r >= 1) & (y > 0) & np.isfinite(y)
    r, y = r[ok], y[ok]
    if r.size < 2:
        return None, 0.0
    start = min(int(np.floor(r.size * (1.0 - tail))), r.size - 2)
    x = np.log1p(r[start:])
    ly = np.log(y[start:])
    slope, icpt = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + icpt)
    return float(slope), float(np.sqrt(np.mean(resid ** 2)))


def decay_report(u: AlgebraElement) -> DecayReport:
    shells = shell_maxima(u)
    order, _ = fit_loglog([r for r, _ in shells], [m for _, m in shells])
    if len(u):
        sup = np.abs(u._idx).max(axis=1)
        tail = float(np.abs(u._val[sup == u.radius]).sum())
    else:
        tail = 0.0
    return DecayReport(shells=shells, fitted_order=order, tail_mass=tail)


def random_element(theta: ThetaMatrix, radius: int, rng: np.random.Generator,
                   density: float = 1.0, decay: float = 0.0) -> AlgebraElement:
    """Random element on the box ``|k|_inf <= radius``; ``decay`` damps by ``exp(-decay |k|)``."""
    from .lattice import box_points

    pts = box_points(radius, theta.n)
    keep = rng.random(pts.shape[0]) < density
    pts = pts[keep]
    val = rng.standard_normal(pts.shape[0]) + 1j * rng.standard_normal(pts.shape[0])
    if decay:
        val = val * np.exp(-decay * np.linalg.norm(pts, axis=1))
    return AlgebraElement.from_arrays(theta, pts, val, radius)
