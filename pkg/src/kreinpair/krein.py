"""Krein-space primitives.

The indefinite inner product is ``[x, y] = <Jx, y> = y^H J x`` for a
fundamental symmetry ``J`` (a Hermitian involution).  Norms are the
Euclidean ones of the coordinate space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    InvalidFundamentalSymmetry,
    RankDeficientBasis,
    SelfadjointnessViolation,
)
from .numerics import as_matrix, as_square, norm2

__all__ = [
    "FLIP",
    "FundamentalSymmetry",
    "KreinOperator",
    "Inertia",
    "krein_adjoint",
    "is_j_selfadjoint",
    "selfadjoint_residual",
    "gram_inertia",
    "product_pair",
]

FLIP = np.array([[0.0, 1.0], [1.0, 0.0]])
INERTIA_TOL = 1e-9
SELFADJOINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FundamentalSymmetry:
    """Hermitian involution J.  Validated on construction, never repaired."""

    matrix: np.ndarray

    def __post_init__(self):
        J = as_square(self.matrix, "J")
        nrm = norm2(J)
        if norm2(J - J.conj().T) > 1e-12 * nrm:
            raise InvalidFundamentalSymmetry("J is not Hermitian")
        if norm2(J @ J - np.eye(J.shape[0])) > 1e-12:
            raise InvalidFundamentalSymmetry("J @ J differs from the identity")
        J.setflags(write=False)
        object.__setattr__(self, "matrix", J)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_signature(cls, signs: Sequence[int]) -> "FundamentalSymmetry":
        signs = list(signs)
        if not signs or any(s not in (1, -1) for s in signs):
            raise InvalidFundamentalSymmetry("signature entries must be +1 or -1")
        return cls(np.diag(np.array(signs, dtype=float)))

    @classmethod
    def flip_blocks(cls, k: int) -> "FundamentalSymmetry":
        """Direct sum of ``k`` copies of [[0, 1], [1, 0]]."""
        if int(k) != k or k < 1:
            raise InvalidFundamentalSymmetry("flip_blocks needs a positive integer")
        return cls(np.kron(np.eye(int(k)), FLIP))

    @classmethod
    def coerce(cls, J) -> "FundamentalSymmetry":
        if isinstance(J, cls):
            return J
        return cls(J)

    def form(self, x, y) -> complex:
        """[x, y] = y^H J x."""
        return complex(np.vdot(y, self.matrix @ x))

    def __eq__(self, other):
        return isinstance(other, FundamentalSymmetry) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True, eq=False)
class KreinOperator:
    T: np.ndarray
    J: FundamentalSymmetry

    def __post_init__(self):
        T = as_square(self.T, "T")
        J = FundamentalSymmetry.coerce(self.J)
        if T.shape[0] != J.dim:
            raise DimensionMismatch(f"T is {T.shape[0]}x{T.shape[0]} but J has dimension {J.dim}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "J", J)

    @property
    def dim(self) -> int:
        return self.T.shape[0]

    @property
    def adjoint(self) -> np.ndarray:
        return krein_adjoint(self.T, self.J)


@dataclass(frozen=True)
class Inertia:
    n_plus: int
    n_zero: int
    n_minus: int

    @property
    def dim(self) -> int:
        return self.n_plus + self.n_zero + self.n_minus

    def __add__(self, other: "Inertia") -> "Inertia":
        return Inertia(self.n_plus + other.n_plus, self.n_zero + other.n_zero, self.n_minus + other.n_minus)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_plus, self.n_zero, self.n_minus)


def _check_dims(A: np.ndarray, J: FundamentalSymmetry, rows: bool = True) -> None:
    n = A.shape[0] if rows else A.shape[1]
    if A.shape[0] != A.shape[1] or n != J.dim:
        raise DimensionMismatch(f"operator of shape {A.shape} does not act on a {J.dim}-dimensional space")


def krein_adjoint(T, J) -> np.ndarray:
    """T^[*] = J T^H J."""
    J = FundamentalSymmetry.coerce(J)
    T = as_matrix(T, "T")
    _check_dims(T, J)
    Jm = J.matrix
    return Jm @ T.conj().T @ Jm


def selfadjoint_residual(A, J) -> float:
    """||JA - (JA)^H|| / (1 + ||A||)."""
    J = FundamentalSymmetry.coerce(J)
    A = as_matrix(A, "A")
    _check_dims(A, J)
    JA = J.matrix @ A
    return norm2(JA - JA.conj().T) / (1.0 + norm2(A))


def is_j_selfadjoint(A, J, tol: float = SELFADJOINT_TOL) -> bool:
    return selfadjoint_residual(A, J) <= tol


def gram_inertia(V, J, tol: float = INERTIA_TOL) -> Inertia:
    """Inertia of the Hermitian Gram matrix V^H J V.

    Gram eigenvalues with modulus at most ``tol * max(||Gram||, ||V||^2)``
    count as zero; the ``||V||^2`` floor keeps exactly-neutral subspaces
    neutral under roundoff.
    """
    J = FundamentalSymmetry.coerce(J)
    V = as_matrix(V, "V")
    if V.shape[0] != J.dim:
        raise DimensionMismatch(f"basis has {V.shape[0]} rows, J has dimension {J.dim}")
    s = sla.svdvals(V)
    if s[-1] <= tol * max(s[0], 1.0) or V.shape[1] > V.shape[0]:
        raise RankDeficientBasis("basis columns are not linearly independent")
    G = V.conj().T @ J.matrix @ V
    G = 0.5 * (G + G.conj().T)
    ev = np.linalg.eigvalsh(G)
    zero = tol * max(float(np.max(np.abs(ev))), float(s[0]) ** 2)
    return Inertia(int(np.sum(ev > zero)), int(np.sum(np.abs(ev) <= zero)), int(np.sum(ev < -zero)))


def product_pair(T: KreinOperator) -> tuple[np.ndarray, np.ndarray]:
    """(T^[*] T, T T^[*]); both are verified J-selfadjoint."""
    if not isinstance(T, KreinOperator):
        raise TypeError("product_pair expects a KreinOperator")
    Ts = T.adjoint
    first, second = Ts @ T.T, T.T @ Ts
    for name, P in (("T[*]T", first), ("TT[*]", second)):
        if not is_j_selfadjoint(P, T.J, SELFADJOINT_TOL):
            raise SelfadjointnessViolation(f"{name} failed the J-selfadjointness check")
    return first, second
