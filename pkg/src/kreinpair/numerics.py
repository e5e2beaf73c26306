"""Dense complex-matrix kernels.

Everything here is a pure function of its inputs.  Eigenvalues are obtained
from a single complex Schur form; clusters, root subspaces and spectral
projections are all read off reorderings of that form, so the different
kernels agree on which eigenvalues they are talking about.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    BoundaryHit,
    InputError,
    NonSquare,
    NumericalBreakdown,
    SpectrumHit,
)

__all__ = [
    "CLUSTER_TOL",
    "RANK_TOL",
    "RESOLVENT_GUARD",
    "REGION_GUARD",
    "EigenCluster",
    "Eigenstructure",
    "Interval",
    "Disk",
    "Rectangle",
    "PseudospectrumGrid",
    "as_matrix",
    "as_square",
    "norm2",
    "sigma_min",
    "eigenstructure",
    "root_subspace",
    "kernel_basis",
    "range_basis",
    "resolvent",
    "resolvent_norm",
    "riesz_projection",
    "riesz_projection_contour",
    "pseudospectrum_grid",
    "parallel_map",
]

CLUSTER_TOL = 1e-8
RANK_TOL = 1e-9
RESOLVENT_GUARD = 1e-12
REGION_GUARD = 1e-6
COALESCE_TOL = 1e-12
COALESCE_CAP = 1e-3


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a fresh 2-D complex array, rejecting NaN/Inf."""
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise InputError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} has non-finite entries")
    return A


def as_square(M, name: str = "matrix") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {A.shape}")
    return A


def norm2(M) -> float:
    """Spectral norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def sigma_min(M) -> float:
    """Smallest singular value of a square matrix."""
    return float(sla.svdvals(M)[-1])


def parallel_map(fn: Callable, items: Iterable, workers: int | None = None) -> list:
    """Map ``fn`` over ``items`` and return results in input order.

    With ``workers`` > 1 the calls run on a thread pool (LAPACK releases the
    GIL); ordering of the result never depends on scheduling.
    """
    items = list(items)
    if not workers or workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# Schur machinery
# --------------------------------------------------------------------------


def _schur(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        T, Z = sla.schur(M, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalBreakdown(f"Schur decomposition failed: {exc}") from exc
    return T, Z


def _reorder(T: np.ndarray, Z: np.ndarray, select: np.ndarray):
    """Move the selected diagonal entries of ``T`` to the leading block."""
    ts, qs, _, m, _, _, info = sla.lapack.ztrsen(
        select.astype(np.int32), T, Z, job="N"
    )
    if info != 0:
        raise NumericalBreakdown(f"Schur reordering failed (info={info})")
    return ts, qs, int(m)


def _single_linkage(values: np.ndarray, radius: float) -> list[list[int]]:
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _weyr(N: np.ndarray, threshold: float) -> tuple[int, ...]:
    # Staircase on ranges: the Weyr sequence of N|ran(N) is that of N with
    # the first entry dropped, so each step is one rank decision on a
    # shrinking matrix rather than a rank decision on a high power.
    weyr = []
    X = N
    remaining = X.shape[0]
    while remaining:
        U, s, _ = np.linalg.svd(X)
        r = int(np.sum(s > threshold))
        if r == remaining:
            # numerically not nilpotent; the smallest direction is the kernel
            r -= 1
        weyr.append(remaining - r)
        if r == 0:
            break
        U = U[:, :r]
        X = U.conj().T @ X @ U
        remaining = r
    return tuple(sorted(weyr, reverse=True))


# --------------------------------------------------------------------------
# Eigenstructure
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenCluster:
    value: complex
    algebraic_mult: int
    weyr: tuple[int, ...]

    @property
    def geometric_mult(self) -> int:
        return self.weyr[0]

    @property
    def index(self) -> int:
        """Length of the Weyr characteristic (size of the largest Jordan block)."""
        return len(self.weyr)

    @property
    def semisimple(self) -> bool:
        return len(self.weyr) == 1

    def kernel_dim(self, power: int) -> int:
        """dim ker((M - value)^power)."""
        return int(sum(self.weyr[:max(power, 0)]))

    def partial_multiplicities(self) -> list[int]:
        """Jordan block sizes, largest first (conjugate partition of the Weyr data)."""
        return [sum(1 for w in self.weyr if w > j) for j in range(self.weyr[0])]


@dataclass(frozen=True)
class Eigenstructure:
    clusters: tuple[EigenCluster, ...]
    cluster_tolerance: float
    dim: int = 0
    scale: float = 1.0

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.clusters], dtype=complex)

    @property
    def spectral_radius(self) -> float:
        return max((abs(c.value) for c in self.clusters), default=0.0)

    def locate(self, lam: complex, within: float | None = None) -> EigenCluster | None:
        """Nearest cluster to ``lam`` if it lies within ``within`` (default: the
        cluster tolerance), else ``None``."""
        if not self.clusters:
            return None
        within = self.cluster_tolerance if within is None else within
        dist = np.abs(self.values - lam)
        k = int(np.argmin(dist))
        return self.clusters[k] if dist[k] <= within else None

    def real_clusters(self, imag_tol: float | None = None) -> list[EigenCluster]:
        imag_tol = self.cluster_tolerance if imag_tol is None else imag_tol
        return [c for c in self.clusters if abs(c.value.imag) <= imag_tol]


def _projector_norm(T: np.ndarray, Z: np.ndarray, select: np.ndarray) -> float:
    n = T.shape[0]
    k = int(select.sum())
    if k in (0, n):
        return 1.0
    Tr, _, _ = _reorder(T, Z, select)
    X = sla.solve_sylvester(Tr[:k, :k], -Tr[k:, k:], -Tr[:k, k:])
    return float(np.hypot(1.0, norm2(X)))


def _coalesce(T, Z, eig, groups, scale):
    # A roundoff-split Jordan block leaves eigenvalues about eps^(1/k) apart,
    # far outside the absolute radius.  Two clusters merge when their
    # first-order distance to coalescence, |a - b| / (||P_a|| + ||P_b||),
    # is at roundoff level.
    cap = COALESCE_CAP * (1.0 + float(np.max(np.abs(eig))))
    n = len(eig)
    while len(groups) > 1:
        cands = []
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                d = float(np.min(np.abs(eig[groups[a]][:, None] - eig[groups[b]][None, :])))
                if d <= cap:
                    cands.append((d, a, b))
        if not cands:
            break
        cond = {}

        def kappa(i):
            if i not in cond:
                select = np.zeros(n, dtype=bool)
                select[groups[i]] = True
                cond[i] = _projector_norm(T, Z, select)
            return cond[i]

        for d, a, b in sorted(cands):
            if d <= COALESCE_TOL * scale * (kappa(a) + kappa(b)):
                groups[a] = groups[a] + groups[b]
                del groups[b]
                break
        else:
            break
    return groups


def _sorted_groups(eig: np.ndarray, radius: float, T=None, Z=None, scale: float = 1.0) -> list[list[int]]:
    groups = _single_linkage(eig, radius)
    if T is not None:
        groups = _coalesce(T, Z, eig, groups, scale)
    means = [np.mean(eig[g]) for g in groups]
    order = sorted(range(len(groups)), key=lambda k: (round(means[k].real, 12), round(means[k].imag, 12)))
    return [sorted(groups[k]) for k in order]


def eigenstructure(M, tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL) -> Eigenstructure:
    """Cluster the eigenvalues of ``M`` and compute per-cluster Weyr data.

    Eigenvalues within ``tol * (1 + spectral radius)`` of each other (single
    linkage) form one cluster; clusters that a perturbation of relative size
    ``COALESCE_TOL`` could make coincide are merged as well.  Rank decisions on the restricted nilpotent
    part use the absolute threshold ``rank_tol * ||M||``.
    """
    M = as_square(M)
    if tol <= 0:
        raise InputError("tol must be positive")
    n = M.shape[0]
    T, Z = _schur(M)
    eig = np.diag(T).copy()
    rho = float(np.max(np.abs(eig)))
    radius = tol * (1.0 + rho)
    scale = norm2(M) or 1.0
    threshold = rank_tol * scale

    groups = _sorted_groups(eig, radius, T, Z, scale)
    clusters = []
    for g in groups:
        value = complex(np.mean(eig[g]))
        select = np.zeros(n, dtype=bool)
        select[g] = True
        Tr, _, m = _reorder(T, Z, select)
        if m != len(g):
            raise NumericalBreakdown("Schur reordering lost track of a cluster")
        N = Tr[:m, :m] - value * np.eye(m)
        clusters.append(EigenCluster(value, m, _weyr(N, threshold)))
    return Eigenstructure(tuple(clusters), radius, n, scale)


def root_subspace(M, value: complex, tol: float = CLUSTER_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis ``Q`` of the root subspace of the cluster at ``value``
    and the restricted upper-triangular matrix ``Q^H M Q``.

    Returns an ``n x 0`` basis if no cluster lies near ``value``.
    """
    M = as_square(M)
    n = M.shape[0]
    T, Z = _schur(M)
    eig = np.diag(T).copy()
    radius = tol * (1.0 + float(np.max(np.abs(eig))))
    groups = _sorted_groups(eig, radius, T, Z, norm2(M) or 1.0)
    means = np.array([np.mean(eig[g]) for g in groups])
    k = int(np.argmin(np.abs(means - value)))
    if abs(means[k] - value) > radius:
        return np.zeros((n, 0), dtype=complex), np.zeros((0, 0), dtype=complex)
    select = np.zeros(n, dtype=bool)
    select[groups[k]] = True
    Tr, Zr, m = _reorder(T, Z, select)
    return Zr[:, :m], Tr[:m, :m]


def kernel_basis(
    M,
    lam: complex,
    power: int = 1,
    tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
    structure: Eigenstructure | None = None,
) -> np.ndarray:
    """Orthonormal basis of ``ker((M - lam)^power)``.

    ``lam`` is snapped to the nearest eigenvalue cluster (within the cluster
    tolerance); the kernel dimension comes from that cluster's Weyr data and
    the basis is taken inside the cluster's root subspace.
    """
    M = as_square(M)
    n = M.shape[0]
    if power < 1:
        raise InputError("power must be >= 1")
    structure = structure or eigenstructure(M, tol, rank_tol)
    cluster = structure.locate(lam)
    if cluster is None:
        return np.zeros((n, 0), dtype=complex)
    Q, T11 = root_subspace(M, cluster.value, tol)
    if Q.shape[1] != cluster.algebraic_mult:
        raise NumericalBreakdown("root subspace dimension disagrees with cluster multiplicity")
    dim = cluster.kernel_dim(power)
    m = Q.shape[1]
    if dim >= m:
        return Q
    N = T11 - cluster.value * np.eye(m)
    _, _, Vh = np.linalg.svd(np.linalg.matrix_power(N, power))
    Zk = Vh[m - dim:].conj().T
    return Q @ Zk


def range_basis(P, rank: int | None = None, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of ran(P); ``rank`` overrides the numerical rank."""
    P = np.asarray(P, dtype=complex)
    U, s, _ = np.linalg.svd(P)
    if rank is None:
        rank = int(np.sum(s > rtol * max(s[0], 1.0))) if s.size else 0
    return U[:, :rank]


# --------------------------------------------------------------------------
# Resolvents
# --------------------------------------------------------------------------


def resolvent(M, lam: complex, guard: float = RESOLVENT_GUARD) -> np.ndarray:
    """(M - lam)^{-1}; raises :class:`SpectrumHit` when sigma_min(M - lam) is
    below ``guard * sigma_max(M - lam)``."""
    M = as_square(M)
    n = M.shape[0]
    S = M - lam * np.eye(n)
    s = sla.svdvals(S)
    if s[-1] <= guard * s[0]:
        raise SpectrumHit(f"lambda={lam!r} is within the resolvent guard of the spectrum")
    I = np.eye(n, dtype=complex)
    R = np.linalg.solve(S, I)
    if np.linalg.norm(S @ R - I, 2) > 1e-10 * (s[0] / s[-1]):
        raise NumericalBreakdown("resolvent residual exceeds the conditioning bound")
    return R


def resolvent_norm(M, lam: complex, guard: float = RESOLVENT_GUARD) -> float:
    """||(M - lam)^{-1}|| = 1 / sigma_min(M - lam)."""
    M = as_square(M)
    s = sla.svdvals(M - lam * np.eye(M.shape[0]))
    if s[-1] <= guard * s[0]:
        raise SpectrumHit(f"lambda={lam!r} is within the resolvent guard of the spectrum")
    return float(1.0 / s[-1])


# --------------------------------------------------------------------------
# Regions and spectral projections
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Closed real segment [lo, hi] viewed as a subset of the complex plane."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.lo >= self.hi:
            raise InputError(f"invalid interval [{self.lo}, {self.hi}]")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("disk radius must be positive")


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if self.re_min >= self.re_max or self.im_min >= self.im_max:
            raise InputError("rectangle must have positive width and height")


def _inside(region, z: np.ndarray, guard: float, real_tol: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if isinstance(region, Interval):
        near_end = np.minimum(np.abs(z - region.lo), np.abs(z - region.hi)) < guard
        near_real = np.abs(z.imag) <= real_tol
        in_span = (z.real >= region.lo - guard) & (z.real <= region.hi + guard)
        ambiguous = ~near_real & (np.abs(z.imag) < guard) & in_span
        bad = near_end | ambiguous
        if np.any(bad):
            raise BoundaryHit(f"eigenvalue(s) {z[bad]} too close to the boundary of {region}")
        return near_real & (z.real > region.lo) & (z.real < region.hi)
    if isinstance(region, Disk):
        d = np.abs(z - region.center)
        bad = np.abs(d - region.radius) < guard
        if np.any(bad):
            raise BoundaryHit(f"eigenvalue(s) {z[bad]} too close to the boundary of {region}")
        return d < region.radius
    if isinstance(region, Rectangle):
        inside = (
            (z.real > region.re_min) & (z.real < region.re_max)
            & (z.imag > region.im_min) & (z.imag < region.im_max)
        )
        dist = np.minimum.reduce([
            np.abs(z.real - region.re_min), np.abs(z.real - region.re_max),
            np.abs(z.imag - region.im_min), np.abs(z.imag - region.im_max),
        ])
        bad = (dist < guard) & (
            (z.real > region.re_min - guard) & (z.real < region.re_max + guard)
            & (z.imag > region.im_min - guard) & (z.imag < region.im_max + guard)
        )
        if np.any(bad):
            raise BoundaryHit(f"eigenvalue(s) {z[bad]} too close to the boundary of {region}")
        return inside
    raise InputError(f"unsupported region {region!r}")


def riesz_projection(
    M,
    region,
    guard: float | None = None,
    tol: float = CLUSTER_TOL,
) -> np.ndarray:
    """Spectral projection of ``M`` onto the eigenvalues inside ``region``.

    The projection is read off a reordered Schur form ``[[T11, T12], [0, T22]]``
    by solving ``T11 X - X T22 = -T12``; no contour quadrature is involved.
    ``guard`` is an absolute distance (default ``1e-6 * (1 + rho(M))``).  For
    an :class:`Interval` an eigenvalue counts as inside only if it is real to
    within ``tol * (1 + rho(M))``.
    """
    M = as_square(M)
    n = M.shape[0]
    T, Z = _schur(M)
    eig = np.diag(T).copy()
    rho = float(np.max(np.abs(eig)))
    if guard is None:
        guard = REGION_GUARD * (1.0 + rho)
    inside = _inside(region, eig, guard, tol * (1.0 + rho))
    k = int(inside.sum())
    if k == 0:
        return np.zeros((n, n), dtype=complex)
    if k == n:
        return np.eye(n, dtype=complex)
    Tr, Zr, m = _reorder(T, Z, inside)
    if m != k:
        raise NumericalBreakdown("Schur reordering lost selected eigenvalues")
    T11, T12, T22 = Tr[:k, :k], Tr[:k, k:], Tr[k:, k:]
    X = sla.solve_sylvester(T11, -T22, -T12)
    P = np.zeros((n, n), dtype=complex)
    P[:k, :k] = np.eye(k)
    P[:k, k:] = -X
    return Zr @ P @ Zr.conj().T


def riesz_projection_contour(M, disk: Disk, nodes: int = 256) -> np.ndarray:
    """Trapezoid-rule approximation of (1/2 pi i) \\oint (z - M)^{-1} dz over a circle.

    Independent cross-check for :func:`riesz_projection`; converges
    geometrically in ``nodes`` when the spectrum stays away from the circle.
    """
    M = as_square(M)
    n = M.shape[0]
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    w = disk.radius * np.exp(1j * theta)
    P = np.zeros((n, n), dtype=complex)
    I = np.eye(n)
    for wk in w:
        P += wk * np.linalg.solve((disk.center + wk) * I - M, I)
    return P / nodes


# --------------------------------------------------------------------------
# Pseudospectra
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PseudospectrumGrid:
    """sigma_min(M - z) sampled on a rectangle.

    ``sigma_min[j, i]`` belongs to ``z = re[i] + 1j * im[j]``; row-major
    traversal runs over ``im`` in the outer loop and ``re`` in the inner one.
    """

    re: np.ndarray
    im: np.ndarray
    sigma_min: np.ndarray

    def rows(self):
        for j, y in enumerate(self.im):
            for i, x in enumerate(self.re):
                yield float(x), float(y), float(self.sigma_min[j, i])


def pseudospectrum_grid(
    M,
    region: Rectangle,
    resolution: Sequence[int] | int = (50, 50),
    workers: int | None = None,
) -> PseudospectrumGrid:
    M = as_square(M)
    if isinstance(resolution, (int, np.integer)):
        resolution = (int(resolution), int(resolution))
    nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise InputError("resolution must be at least 2 along each axis")
    re = np.linspace(region.re_min, region.re_max, nx)
    im = np.linspace(region.im_min, region.im_max, ny)
    I = np.eye(M.shape[0])

    def row(y):
        return [float(sla.svdvals(M - (x + 1j * y) * I)[-1]) for x in re]

    values = np.array(parallel_map(row, im, workers))
    return PseudospectrumGrid(re, im, values)
