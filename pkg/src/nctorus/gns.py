"""Truncated left-regular representation and numerical functional calculus.

Left multiplication by ``u`` on ``span{U^k : |k|_inf <= R}`` has matrix entries
``M[m, k] = u_{m-k} exp(-2 i pi c(m-k, k))``.  Functions of selfadjoint
elements are computed on the Hermitian eigendecomposition of that matrix and
read back from its action on the cyclic vector ``U^0 = 1``.  Coefficients near
the edge of the box are polluted by the truncation; ``trusted_radius`` gives
the part that is considered reliable.
"""
from __future__ import annotations

from dataclasses import dataclass
import warnings

import numpy as np

from .algebra import AlgebraElement, involution, multiply
from .errors import DomainError, InvalidArgument
from .lattice import ThetaMatrix, box_points

POSITIVITY_RTOL = 1e-10
CONDITION_BOUND = 1e12
SELFADJOINT_TOL = 1e-12


def trusted_radius(R: int) -> int:
    """Interior radius ``R - R/4``; coefficients beyond it are flagged untrusted."""
    return R - max(1, R // 4)


@dataclass(frozen=True)
class TruncatedRep:
    radius: int
    points: np.ndarray  # (dim, n) lattice points of the box, row order of `matrix`
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[0]

    def origin(self) -> int:
        return self.dim // 2

    def read_back(self, theta: ThetaMatrix, vec) -> AlgebraElement:
        return AlgebraElement.from_arrays(theta, self.points, vec, self.radius)


def _positions(points: np.ndarray, R: int) -> np.ndarray:
    """Lookup table from the mixed-radix code of a lattice point to its row."""
    n = points.shape[1]
    base = 2 * R + 1
    code = np.zeros(points.shape[0], dtype=np.int64)
    for j in range(n):
        code = code * base + (points[:, j] + R)
    table = np.full(base ** n, -1, dtype=np.int64)
    table[code] = np.arange(points.shape[0])
    return table


def _code(points: np.ndarray, R: int) -> np.ndarray:
    base = 2 * R + 1
    code = np.zeros(points.shape[0], dtype=np.int64)
    for j in range(points.shape[1]):
        code = code * base + (points[:, j] + R)
    return code


def represent(u: AlgebraElement, R: int) -> TruncatedRep:
    """Matrix of left multiplication by ``u`` on the box of radius ``R``."""
    if R < 0:
        raise InvalidArgument("truncation radius must be nonnegative")
    if u.support_radius() > R:
        warnings.warn(f"element support radius {u.support_radius()} exceeds R={R}",
                      stacklevel=2)
    theta = u.theta
    pts = box_points(R, theta.n)
    dim = pts.shape[0]
    mat = np.zeros((dim, dim), dtype=complex)
    table = _positions(pts, R)
    cols = np.arange(dim)
    for j, uj in zip(u.indices, u.values):
        target = pts + j
        ok = np.all(np.abs(target) <= R, axis=1)
        rows = table[_code(target[ok], R)]
        ph = theta.phase_table(j[None, :], pts[ok])[0]
        mat[rows, cols[ok]] += uj * np.exp(-2j * np.pi * ph)
    return TruncatedRep(R, pts, mat)


def norm_estimate(u: AlgebraElement, R: int | None = None) -> float:
    """Largest singular value of the truncated representation (a lower bound for the C*-norm)."""
    if u.is_scalar():
        return abs(u.coeff((0,) * u.n))
    if R is None:
        R = 2 * u.support_radius() + 1
    mat = represent(u, R).matrix
    return float(np.linalg.norm(mat, 2))


_BRANCH = {"log", "sqrt", "power", "inverse"}


def _apply_scalar(name: str, w: np.ndarray, p: float | None) -> np.ndarray:
    if name == "exp":
        return np.exp(w)
    if name == "log":
        return np.log(w)
    if name == "sqrt":
        return np.sqrt(w)
    if name == "power":
        return w ** p
    if name == "inverse":
        return 1.0 / w
    raise InvalidArgument(f"unknown function {name!r}; expected exp, log, sqrt, power, inverse")


def _hermitian_function(mat: np.ndarray, name: str, p: float | None = None) -> np.ndarray:
    herm = 0.5 * (mat + mat.conj().T)
    w, v = np.linalg.eigh(herm)
    if name in _BRANCH:
        wmax = max(abs(w.max()), abs(w.min()))
        if w.min() <= POSITIVITY_RTOL * wmax:
            raise DomainError(
                f"{name} needs a positive spectrum; minimum eigenvalue {w.min():.3e}",
                min_eigenvalue=float(w.min()), max_eigenvalue=float(w.max()))
    return (v * _apply_scalar(name, w, p)) @ v.conj().T


def functional_calculus(u: AlgebraElement, f: str, R: int, p: float | None = None) -> AlgebraElement:
    """``f(u)`` for selfadjoint ``u``; ``f`` is one of exp, log, sqrt, power, inverse.

    ``p`` is the exponent for ``f="power"``.  The result has radius ``R``;
    only coefficients with ``|k|_inf <= trusted_radius(R)`` are reliable.
    """
    if f == "power" and p is None:
        raise InvalidArgument("power needs an exponent p")
    if not u.is_selfadjoint(SELFADJOINT_TOL * max(1.0, u.max_abs())):
        raise InvalidArgument("functional calculus needs a selfadjoint element")
    rep = represent(u, R)
    fm = _hermitian_function(rep.matrix, f, p)
    return rep.read_back(u.theta, fm[:, rep.origin()])


@dataclass(frozen=True)
class InverseResult:
    element: AlgebraElement
    residual: float
    condition: float


def invert(u: AlgebraElement, R: int) -> InverseResult:
    """Approximate inverse from the truncated representation, with its interior residual."""
    rep = represent(u, R)
    cond = float(np.linalg.cond(rep.matrix))
    if not np.isfinite(cond) or cond > CONDITION_BOUND:
        raise DomainError(f"truncated representation is ill-conditioned (cond={cond:.3e})",
                          condition=cond)
    rhs = np.zeros(rep.dim, dtype=complex)
    rhs[rep.origin()] = 1.0
    v = rep.read_back(u.theta, np.linalg.solve(rep.matrix, rhs))
    one = AlgebraElement.identity(u.theta)
    residual = multiply(u, v).distance(one, trusted_radius(R))
    return InverseResult(v, residual, cond)


class MetricTensor:
    """Positive n x n matrix over the algebra with selfadjoint entries."""

    def __init__(self, entries, certificate_radius: int | None = None):
        rows = [list(r) for r in entries]
        size = len(rows)
        if size == 0 or any(len(r) != size for r in rows):
            raise InvalidArgument("metric must be a nonempty square array of elements")
        theta = rows[0][0].theta
        for i in range(size):
            for j in range(size):
                g = rows[i][j]
                if g.theta != theta:
                    raise InvalidArgument("metric entries live over different theta")
                if not g.is_selfadjoint(SELFADJOINT_TOL * max(1.0, g.max_abs())):
                    raise InvalidArgument(f"metric entry ({i},{j}) is not selfadjoint")
                if rows[j][i].distance(involution(g)) > SELFADJOINT_TOL * max(1.0, g.max_abs()):
                    raise InvalidArgument(f"metric is not Hermitian at ({i},{j})")
        self.entries = rows
        self.theta = theta
        self.size = size
        if certificate_radius is None:
            certificate_radius = 2 * self.support_radius() + 2
        w = np.linalg.eigvalsh(self.block(certificate_radius))
        self.min_eigenvalue = float(w[0])
        if w[0] <= POSITIVITY_RTOL * abs(w[-1]):
            raise DomainError(f"metric is not positive definite (min eigenvalue {w[0]:.3e})",
                              min_eigenvalue=float(w[0]))

    @classmethod
    def identity(cls, theta: ThetaMatrix, scale: float = 1.0) -> "MetricTensor":
        one = AlgebraElement.identity(theta, scale)
        zero = AlgebraElement.zero(theta)
        return cls([[one if i == j else zero for j in range(theta.n)] for i in range(theta.n)])

    def support_radius(self) -> int:
        return max(g.support_radius() for row in self.entries for g in row)

    def block(self, R: int) -> np.ndarray:
        reps = [[represent(g, R).matrix for g in row] for row in self.entries]
        mat = np.block(reps)
        return 0.5 * (mat + mat.conj().T)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]


def _block_read_back(theta: ThetaMatrix, mat: np.ndarray, size: int, R: int):
    pts = box_points(R, theta.n)
    dim = pts.shape[0]
    origin = dim // 2
    out = []
    for i in range(size):
        row = []
        for j in range(size):
            col = mat[i * dim:(i + 1) * dim, j * dim + origin]
            row.append(AlgebraElement.from_arrays(theta, pts, col, R))
        out.append(row)
    return out


def metric_det_sqrt(g: MetricTensor, R: int) -> tuple[AlgebraElement, AlgebraElement]:
    """``nu = exp(Tr log g / 2)`` and its inverse, via block functional calculus."""
    big = g.block(R)
    log_g = _hermitian_function(big, "log")
    dim = big.shape[0] // g.size
    tr = sum(log_g[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] for i in range(g.size))
    half = _hermitian_function(0.5 * tr, "exp")
    pts = box_points(R, g.theta.n)
    nu = AlgebraElement.from_arrays(g.theta, pts, half[:, dim // 2], R)
    nu_inv = AlgebraElement.from_arrays(
        g.theta, pts, _hermitian_function(-0.5 * tr, "exp")[:, dim // 2], R)
    return nu, nu_inv


@dataclass(frozen=True)
class MetricInverse:
    metric: list  # size x size nested list of AlgebraElement
    residual: float

    def __getitem__(self, ij):
        i, j = ij
        return self.metric[i][j]


def metric_inverse(g: MetricTensor, R: int) -> MetricInverse:
    """Entrywise read-back of the inverse block matrix, with its interior residual."""
    inv = _hermitian_function(g.block(R), "inverse")
    ginv = _block_read_back(g.theta, inv, g.size, R)
    inner = trusted_radius(R)
    residual = 0.0
    for i in range(g.size):
        for k in range(g.size):
            acc = AlgebraElement.zero(g.theta)
            for j in range(g.size):
                acc = acc + multiply(g[i, j], ginv[j][k])
            target = AlgebraElement.identity(g.theta, 1.0 if i == k else 0.0)
            residual = max(residual, acc.distance(target, inner))
    return MetricInverse(ginv, residual)
