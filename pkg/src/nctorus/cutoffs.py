"""Smooth bump, smooth step and radial cutoff profiles.

Everything here is built from the mollifier ``exp(-1/(1-t^2))``.  The smooth
step is odd about 1/2, ``S(x) + S(1 - x) = 1`` holds by construction, which the
interpolation kernel relies on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def bump(t):
    """``exp(-1/(1-t^2))`` on ``|t| < 1``, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
    return out


def _bump_primitive(y):
    """``int_0^y bump`` for ``0 <= y <= 1`` by 64-point Gauss-Legendre."""
    y = np.asarray(y, dtype=float)
    t = (_GL_X[None, :] + 1.0) * 0.5 * y[..., None]
    return (bump(t) @ _GL_W) * 0.5 * y


_BUMP_HALF_MASS = float(_bump_primitive(np.array([1.0]))[0])


def smooth_step(x):
    """C-infinity step: 0 for ``x <= 0``, 1 for ``x >= 1``, ``S(x) + S(1-x) = 1``."""
    x = np.asarray(x, dtype=float)
    y = np.clip(2.0 * x - 1.0, -1.0, 1.0)
    g = _bump_primitive(np.abs(y).ravel()).reshape(y.shape) / _BUMP_HALF_MASS
    # g can overshoot 1 by an ulp near the ends
    return np.clip(0.5 + 0.5 * np.sign(y) * g, 0.0, 1.0)


def smooth_step_prime(x):
    x = np.asarray(x, dtype=float)
    return bump(2.0 * x - 1.0) / _BUMP_HALF_MASS


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff ``chi``: 1 on ``|x| <= r0``, 0 on ``|x| >= r1``, monotone between.

    ``kind`` selects how :meth:`weight` uses it: ``"excision"`` gives
    ``1 - chi(eps x)``, ``"approximate-unit"`` gives ``chi(eps x)``.
    """

    kind: str = "excision"
    r0: float = 0.25
    r1: float = 0.75

    def __post_init__(self):
        if self.kind not in ("excision", "approximate-unit"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")
        if not 0.0 <= self.r0 < self.r1:
            raise ValueError("need 0 <= r0 < r1")

    def profile(self, r):
        """``chi`` as a function of the radius."""
        r = np.asarray(r, dtype=float)
        return smooth_step((self.r1 - r) / (self.r1 - self.r0))

    def profile_prime(self, r):
        r = np.asarray(r, dtype=float)
        w = self.r1 - self.r0
        return -smooth_step_prime((self.r1 - r) / w) / w

    def chi(self, x):
        """``chi(|x|)`` for points ``x`` of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        return self.profile(np.linalg.norm(x, axis=-1))

    def grad_chi(self, x):
        """Gradient of ``chi(|x|)``, shape (..., d)."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        dp = self.profile_prime(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.where(r[..., None] > 0, dp[..., None] * x / r[..., None], 0.0)
        return g

    def weight(self, x, eps: float = 1.0):
        x = np.asarray(x, dtype=float) * eps
        c = self.chi(x)
        return 1.0 - c if self.kind == "excision" else c
