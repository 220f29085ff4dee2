"""Numerics for smooth noncommutative tori and their pseudodifferential calculus.

Submodules: :mod:`lattice` (index arithmetic and cocycle phases),
:mod:`algebra` (elements and the twisted product), :mod:`gns` (truncated
GNS representation and functional calculus), :mod:`symbols` (standard,
homogeneous and classical symbols), :mod:`toroidal` (lattice symbols and
the interpolation kernel), :mod:`oscint` (oscillating integrals) and
:mod:`psido` (operators acting on elements).
"""
from .algebra import AlgebraElement, involution, multiply, trace
from .errors import (ConstructionError, DomainError, InvalidArgument, NCTorusError,
                     PreconditionViolation, ResourceError)
from .lattice import ThetaMatrix

__all__ = [
    "AlgebraElement", "ThetaMatrix", "multiply", "involution", "trace",
    "NCTorusError", "InvalidArgument", "DomainError", "ResourceError",
    "ConstructionError", "PreconditionViolation",
]
__version__ = "0.1.0"
