"""The pair AB / BA for rectangular factors.

``A`` is p x q and ``B`` is q x p, so AB acts on C^p and BA on C^q.  The
nonzero spectra coincide together with their Jordan data, A maps
ker((BA - lam)^n) onto ker((AB - lam)^n), and the resolvents are tied by

    (BA - lam)^{-1} = lam^{-1} [B (AB - lam)^{-1} A - I]
                    = lam^{-1} (mu + (lam - mu) B (AB - lam)^{-1} A) (BA - mu)^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import DimensionMismatch, InputError, NotAnEigenvalue, TransportFailure
from .krein import KreinOperator
from .numerics import (
    CLUSTER_TOL,
    RANK_TOL,
    RESOLVENT_GUARD,
    EigenCluster,
    as_matrix,
    eigenstructure,
    kernel_basis,
    norm2,
    resolvent,
)

__all__ = [
    "FactorPair",
    "SpectrumCompareReport",
    "TransportResult",
    "ResolventIdentityResiduals",
    "DominationConstants",
    "ResolventBound",
    "PoleOrder",
    "compare_nonzero_spectra",
    "eigenspace_transport",
    "resolvent_identity_residuals",
    "domination_constants",
    "domination_ratio",
    "resolvent_bound_check",
    "zero_pole_order",
    "sample_resolvent_points",
]

SPAN_ANGLE_TOL = 1e-7
ROUNDTRIP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FactorPair:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        if A.shape[1] != B.shape[0] or A.shape[0] != B.shape[1]:
            raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}; need p x q and q x p")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_krein(cls, T: KreinOperator) -> "FactorPair":
        """A = T, B = T^[*]; then AB = T T^[*] and BA = T^[*] T."""
        return cls(T.T, T.adjoint)

    @property
    def AB(self) -> np.ndarray:
        return self.A @ self.B

    @property
    def BA(self) -> np.ndarray:
        return self.B @ self.A

    @property
    def scale(self) -> float:
        return max(1.0, norm2(self.A) * norm2(self.B))

    def nonzero_threshold(self, tol: float = CLUSTER_TOL) -> float:
        return tol * self.scale

    def swapped(self) -> "FactorPair":
        return FactorPair(self.B, self.A)


# --------------------------------------------------------------------------
# spectral equality
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumCompareReport:
    nonzero_clusters_AB: tuple[EigenCluster, ...]
    nonzero_clusters_BA: tuple[EigenCluster, ...]
    matched: bool
    max_value_discrepancy: float
    weyr_match: bool
    pairs: tuple[tuple[int, int], ...] = ()
    tolerance: float = 0.0


def _match(u: np.ndarray, v: np.ndarray) -> list[tuple[int, int]]:
    if len(u) == 0 or len(v) == 0:
        return []
    cost = np.abs(u[:, None] - v[None, :])
    if max(len(u), len(v)) <= 12:
        rows, cols = linear_sum_assignment(cost)
        return sorted(zip(rows.tolist(), cols.tolist()))
    pairs, used_u, used_v = [], set(), set()
    for flat in np.argsort(cost, axis=None, kind="stable"):
        i, j = divmod(int(flat), len(v))
        if i not in used_u and j not in used_v:
            pairs.append((i, j))
            used_u.add(i)
            used_v.add(j)
    return sorted(pairs)


def compare_nonzero_spectra(
    P: FactorPair, tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL
) -> SpectrumCompareReport:
    """Match the nonzero eigenvalue clusters of AB and BA, Weyr data included.

    A mismatch is reported, never raised.
    """
    thr = P.nonzero_threshold(tol)
    sAB = eigenstructure(P.AB, tol, rank_tol)
    sBA = eigenstructure(P.BA, tol, rank_tol)
    nzAB = tuple(c for c in sAB.clusters if abs(c.value) > thr)
    nzBA = tuple(c for c in sBA.clusters if abs(c.value) > thr)
    pairs = _match(np.array([c.value for c in nzAB]), np.array([c.value for c in nzBA]))
    dist = [abs(nzAB[i].value - nzBA[j].value) for i, j in pairs]
    discrepancy = max(dist, default=0.0)
    weyr_match = all(nzAB[i].weyr == nzBA[j].weyr for i, j in pairs)
    matched = (
        len(nzAB) == len(nzBA) == len(pairs)
        and discrepancy <= thr
        and weyr_match
    )
    return SpectrumCompareReport(nzAB, nzBA, matched, float(discrepancy), weyr_match, tuple(pairs), thr)


# --------------------------------------------------------------------------
# eigenspace transport
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TransportResult:
    """A restricted to ker((BA - value)^n) -> ker((AB - value)^n), in the
    orthonormal bases ``V`` and ``W``."""

    value: complex
    power: int
    V: np.ndarray
    W: np.ndarray
    forward: np.ndarray
    inverse: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.V.shape[1]


def eigenspace_transport(
    P: FactorPair,
    lam: complex,
    n: int = 1,
    tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
    snap: float | None = None,
) -> TransportResult:
    """Restriction of A to the n-th generalized eigenspace of BA at ``lam``.

    ``lam`` is snapped to the nearest eigenvalue cluster of BA within ``snap``
    (default ``1e-6 * (1 + rho(BA))``).  For n = 1 the residual of the
    inverse lam^{-1} B is reported as ``scaled_inverse``; for every n the
    inverse map is computed as (BA|_V)^{-1} B and its round trip reported.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    thr = P.nonzero_threshold(tol)
    if abs(lam) <= thr:
        raise InputError(f"|lambda| = {abs(lam):.3g} is not above the nonzero threshold {thr:.3g}")
    BA, AB = P.BA, P.AB
    sBA = eigenstructure(BA, tol, rank_tol)
    sAB = eigenstructure(AB, tol, rank_tol)
    snap = 1e-6 * (1.0 + sBA.spectral_radius) if snap is None else snap
    cBA = sBA.locate(lam, within=snap)
    if cBA is None:
        raise NotAnEigenvalue(f"{lam!r} is not an eigenvalue of BA")
    cAB = sAB.locate(cBA.value, within=thr + sAB.cluster_tolerance + sBA.cluster_tolerance)
    if cAB is None:
        raise TransportFailure(f"BA has eigenvalue {cBA.value!r} but AB does not")
    value = cBA.value

    V = kernel_basis(BA, value, n, tol, rank_tol, structure=sBA)
    W = kernel_basis(AB, cAB.value, n, tol, rank_tol, structure=sAB)
    if V.shape[1] == 0:
        raise NotAnEigenvalue(f"ker((BA - {value!r})^{n}) is trivial")
    if V.shape[1] != W.shape[1]:
        raise TransportFailure(f"dim ker((BA - lam)^{n}) = {V.shape[1]} but dim ker((AB - lam)^{n}) = {W.shape[1]}")

    AV = P.A @ V
    angle = float(np.max(sla.subspace_angles(AV, W)))
    if angle > SPAN_ANGLE_TOL:
        raise TransportFailure(f"A V and ker((AB - lam)^{n}) differ by a principal angle of {angle:.3g}")

    forward = W.conj().T @ AV
    restricted = V.conj().T @ (BA @ V)
    inverse = np.linalg.solve(restricted, V.conj().T @ (P.B @ W))
    d = V.shape[1]
    residuals = {
        "span_angle": angle,
        "roundtrip": norm2(inverse @ forward - np.eye(d)),
    }
    if n == 1:
        residuals["scaled_inverse"] = norm2((P.B @ AV) / value - V)
    return TransportResult(value, n, V, W, forward, inverse, residuals)


# --------------------------------------------------------------------------
# resolvent identities
# --------------------------------------------------------------------------


class ResolventIdentityResiduals(NamedTuple):
    residual_ppp: float
    residual_two_param: float


def resolvent_identity_residuals(
    P: FactorPair, lam: complex, mu: complex, guard: float = RESOLVENT_GUARD
) -> ResolventIdentityResiduals:
    """Spectral-norm residuals of both resolvent identities at (lam, mu)."""
    if lam == 0:
        raise InputError("lambda must be nonzero")
    q = P.BA.shape[0]
    I = np.eye(q)
    R_BA = resolvent(P.BA, lam, guard)
    core = P.B @ resolvent(P.AB, lam, guard) @ P.A
    via_ab = (core - I) / lam
    via_mu = (mu * I + (lam - mu) * core) @ resolvent(P.BA, mu, guard) / lam
    return ResolventIdentityResiduals(norm2(R_BA - via_ab), norm2(R_BA - via_mu))


# --------------------------------------------------------------------------
# domination constants and the quantitative resolvent bound
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DominationConstants:
    """c1: ||Bx|| <= c1 (||ABx|| + ||x||);  c2: ||Ay|| <= c2 (||BAy|| + ||y||).

    ``c1``/``c2`` are attained by the witness vectors (certified lower bounds
    of the suprema); ``c1_upper``/``c2_upper`` are certified upper bounds.
    """

    c1: float
    c2: float
    C: float
    witness1: np.ndarray
    witness2: np.ndarray
    c1_upper: float
    c2_upper: float


def domination_ratio(B, AB, x) -> float:
    """||Bx|| / (||ABx|| + ||x||)."""
    x = np.asarray(x, dtype=complex)
    return float(np.linalg.norm(B @ x) / (np.linalg.norm(AB @ x) + np.linalg.norm(x)))


def _ratios(B, AB, X):
    nb = np.linalg.norm(B @ X, axis=0)
    na = np.linalg.norm(AB @ X, axis=0)
    return nb / (na + np.linalg.norm(X, axis=0))


def _warm_starts(B, AB):
    # (a + b)^2 = min_t a^2/t + b^2/(1-t), so the squared supremum equals
    # max_t lambda_max(B^H B, (AB)^H AB / t + I / (1 - t)).
    G = B.conj().T @ B
    H = AB.conj().T @ AB
    I = np.eye(G.shape[0])

    def top(u):
        t = 1.0 / (1.0 + np.exp(-u))
        w, X = sla.eigh(G, H / t + I / (1.0 - t))
        return w[-1], X[:, -1]

    grid = np.linspace(-30.0, 30.0, 121)
    vals = [top(u)[0] for u in grid]
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    best = minimize_scalar(lambda u: -top(u)[0], bounds=(lo, hi), method="bounded",
                           options={"xatol": 1e-12})
    starts = [top(grid[k])[1], top(best.x)[1]]
    upper = float(np.sqrt(max(sla.eigh(G, H + I, eigvals_only=True)[-1], 0.0)))
    return starts, upper


def _ascent(B, AB, X, rel_step=1e-10, max_iter=500):
    """Projected gradient ascent of the domination ratio on the unit sphere,
    all columns of ``X`` in parallel with per-column Armijo backtracking."""
    G = B.conj().T @ B
    H = AB.conj().T @ AB
    X = X / np.linalg.norm(X, axis=0)
    eta = np.ones(X.shape[1])
    active = np.ones(X.shape[1], dtype=bool)

    def value_grad(X):
        BX, ABX = B @ X, AB @ X
        nb = np.linalg.norm(BX, axis=0)
        na = np.linalg.norm(ABX, axis=0)
        D = na + 1.0
        f = nb / D
        with np.errstate(divide="ignore", invalid="ignore"):
            gb = np.where(nb > 0, (G @ X) / nb, 0.0)
            ga = np.where(na > 0, (H @ X) / na, 0.0)
        g = (gb * D - nb * (ga + X)) / D**2
        g = g - np.real(np.sum(X.conj() * g, axis=0)) * X
        return f, g

    f, g = value_grad(X)
    for _ in range(max_iter):
        if not active.any():
            break
        cand = X + eta * g
        cand = cand / np.linalg.norm(cand, axis=0)
        fc = _ratios(B, AB, cand)
        gg = np.real(np.sum(g.conj() * g, axis=0))
        accept = active & (fc >= f + 1e-4 * eta * gg)
        step = np.linalg.norm(cand - X, axis=0)
        converged = active & (
            (np.abs(fc - f) <= rel_step * np.maximum(f, 1e-300)) & accept
            | (step < rel_step)
            | (gg <= (rel_step * np.maximum(f, 1e-300)) ** 2)
        )
        X = np.where(accept, cand, X)
        f = np.where(accept, fc, f)
        eta = np.where(accept, eta * 2.0, eta * 0.5)
        active &= ~converged
        _, g_new = value_grad(X)
        g = g_new
    return X, f


def _dominate(B, AB, rng, starts: int):
    p = B.shape[1]
    if not np.any(B):
        return 0.0, np.eye(p, 1, dtype=complex)[:, 0], 0.0
    warm, upper = _warm_starts(B, AB)
    X0 = rng.standard_normal((p, starts)) + 1j * rng.standard_normal((p, starts))
    X0 = np.column_stack([X0] + [w.reshape(-1, 1) for w in warm])
    X, f = _ascent(B, AB, X0)
    k = int(np.argmax(f))
    x = X[:, k] / np.linalg.norm(X[:, k])
    return domination_ratio(B, AB, x), x, max(upper, float(f[k]))


def domination_constants(P: FactorPair, starts: int = 64, seed: int = 0) -> DominationConstants:
    """Estimate c1, c2 and C = max(1, c1 c2) by seeded multistart ascent."""
    rng = np.random.default_rng(seed)
    c1, w1, u1 = _dominate(P.B, P.AB, rng, starts)
    c2, w2, u2 = _dominate(P.A, P.BA, rng, starts)
    return DominationConstants(c1, c2, max(1.0, c1 * c2), w1, w2, u1, u2)


@dataclass(frozen=True)
class ResolventBound:
    lhs: float
    rhs: float
    holds: bool
    M1: float
    M2: float
    C: float


def resolvent_bound_check(
    P: FactorPair,
    lam: complex,
    mu: complex,
    constants: DominationConstants | None = None,
    guard: float = RESOLVENT_GUARD,
) -> ResolventBound:
    """Compare ||(BA - lam)^{-1}|| with

        C M1(lam) M2(mu) / |lam| * (|mu| + |lam - mu| (2 + |lam|)(2 + |mu|)),

    M1(lam) = max(1, ||(AB - lam)^{-1}||), M2(mu) = max(1, ||(BA - mu)^{-1}||).
    """
    if lam == 0:
        raise InputError("lambda must be nonzero")
    constants = constants or domination_constants(P)
    lhs = norm2(resolvent(P.BA, lam, guard))
    M1 = max(1.0, norm2(resolvent(P.AB, lam, guard)))
    M2 = max(1.0, norm2(resolvent(P.BA, mu, guard)))
    a, m = abs(lam), abs(mu)
    rhs = constants.C * M1 * M2 / a * (m + abs(lam - mu) * (2.0 + a) * (2.0 + m))
    return ResolventBound(lhs, rhs, bool(lhs <= rhs), M1, M2, constants.C)


# --------------------------------------------------------------------------
# pole order at zero
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PoleOrder:
    order_BA: int
    corollary_applies: bool
    zero_in_rho_AB: bool
    zero_in_sigma_BA: bool

    @property
    def consistent(self) -> bool:
        return not self.corollary_applies or self.order_BA == 1


def zero_pole_order(P: FactorPair, tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL) -> PoleOrder:
    """Order of zero as a pole of the resolvent of BA (its Weyr length)."""
    thr = P.nonzero_threshold(tol)
    sAB = eigenstructure(P.AB, tol, rank_tol)
    sBA = eigenstructure(P.BA, tol, rank_tol)
    zero_AB = [c for c in sAB.clusters if abs(c.value) <= thr]
    zero_BA = [c for c in sBA.clusters if abs(c.value) <= thr]
    order = max((c.index for c in zero_BA), default=0)
    in_rho_AB = not zero_AB
    in_sigma_BA = bool(zero_BA)
    return PoleOrder(order, in_rho_AB and in_sigma_BA, in_rho_AB, in_sigma_BA)


# --------------------------------------------------------------------------
# admissible sample points
# --------------------------------------------------------------------------


def sample_resolvent_points(
    P: FactorPair,
    rng: np.random.Generator,
    count: int,
    level: float = 1e-2,
    radius: float | None = None,
    max_tries: int = 100_000,
) -> list[tuple[complex, complex]]:
    """Rejection-sample (lam, mu) pairs outside the ``level`` pseudospectra.

    lam avoids the level set of both AB and BA (and |lam| >= level); mu
    avoids that of BA.  Points are uniform in a disk of ``radius`` (default
    1.5 * max(1, rho(AB), rho(BA))).
    """
    AB, BA = P.AB, P.BA
    Ip, Iq = np.eye(AB.shape[0]), np.eye(BA.shape[0])
    if radius is None:
        rho = max(np.max(np.abs(np.linalg.eigvals(AB))), np.max(np.abs(np.linalg.eigvals(BA))))
        radius = 1.5 * max(1.0, float(rho))

    def draw():
        r = radius * np.sqrt(rng.uniform())
        return r * np.exp(2j * np.pi * rng.uniform())

    def ok_ba(z):
        return sla.svdvals(BA - z * Iq)[-1] >= level

    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise InputError("could not sample enough admissible points")
        lam = draw()
        if abs(lam) < level or not ok_ba(lam) or sla.svdvals(AB - lam * Ip)[-1] < level:
            continue
        mu = draw()
        if not ok_ba(mu):
            continue
        out.append((complex(lam), complex(mu)))
    return out
