"""Block-diagonal operator families and their finite sections.

A family is a deterministic map ``n -> (T_n, J_n)``; the N-th section is the
direct sum of the first N blocks.  Limit behaviour near an accumulation point
is observed through trends over N: projection norms, negative ranks and
resolvent growth orders.  Verdicts are heuristics over finite data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import BoundaryHit, InputError, InvalidRule
from .krein import FLIP, FundamentalSymmetry, Inertia, KreinOperator, gram_inertia, krein_adjoint
from .numerics import (
    REGION_GUARD,
    Interval,
    as_matrix,
    norm2,
    parallel_map,
    range_basis,
    resolvent_norm,
    riesz_projection,
)
from .signtype import _require_selfadjoint

__all__ = [
    "Rule",
    "BlockFamily",
    "GrowthFit",
    "TruncationTrend",
    "PartnerGrowthReport",
    "example_one_family",
    "graded_neutrality_family",
    "product_of_blocks_family",
    "explicit_family",
    "truncate",
    "block_operator",
    "growth_order_fit",
    "partner_growth_check",
    "projection_trend",
    "negative_rank_trend",
    "trend_verdict",
    "shrinking_intervals",
    "DEFAULT_Y_GRID",
]

DEFAULT_Y_GRID = tuple(np.geomspace(1e-1, 1e-6, 24))
GROWTH_GUARD = 1e-15
BOUNDED_RATIO = 2.0
GROWING_RATIO = 4.0
KINDS = ("ExampleOne", "GradedNeutrality", "ExplicitList", "ProductOfBlocks")
TARGETS = ("T", "product1", "product2")


# --------------------------------------------------------------------------
# index rules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """A real sequence n -> value, n >= 1.

    kinds: ``constant`` (c), ``power`` (c n^-p), ``geometric`` (c r^n),
    ``linear`` (a + b n), ``explicit`` (values[n - 1]).
    """

    kind: str
    params: tuple = ()

    @classmethod
    def constant(cls, c: float) -> "Rule":
        return cls("constant", (float(c),))

    @classmethod
    def power(cls, exponent: float, c: float = 1.0) -> "Rule":
        return cls("power", (float(exponent), float(c)))

    @classmethod
    def geometric(cls, ratio: float, c: float = 1.0) -> "Rule":
        return cls("geometric", (float(ratio), float(c)))

    @classmethod
    def linear(cls, a: float, b: float) -> "Rule":
        return cls("linear", (float(a), float(b)))

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "Rule":
        return cls("explicit", tuple(float(v) for v in values))

    @classmethod
    def from_dict(cls, d: dict) -> "Rule":
        try:
            kind = d["type"]
            if kind == "constant":
                return cls.constant(d["value"])
            if kind == "power":
                return cls.power(d["exponent"], d.get("coefficient", 1.0))
            if kind == "geometric":
                return cls.geometric(d["ratio"], d.get("coefficient", 1.0))
            if kind == "linear":
                return cls.linear(d["intercept"], d["slope"])
            if kind == "explicit":
                return cls.explicit(d["values"])
        except (KeyError, TypeError) as exc:
            raise InvalidRule(f"malformed rule {d!r}") from exc
        raise InvalidRule(f"unknown rule type {d.get('type')!r}")

    def to_dict(self) -> dict:
        p = self.params
        return {
            "constant": lambda: {"type": "constant", "value": p[0]},
            "power": lambda: {"type": "power", "exponent": p[0], "coefficient": p[1]},
            "geometric": lambda: {"type": "geometric", "ratio": p[0], "coefficient": p[1]},
            "linear": lambda: {"type": "linear", "intercept": p[0], "slope": p[1]},
            "explicit": lambda: {"type": "explicit", "values": list(p)},
        }[self.kind]()

    @property
    def length(self) -> int | None:
        return len(self.params) if self.kind == "explicit" else None

    def __call__(self, n: int) -> float:
        if n < 1:
            raise InvalidRule("rules are indexed from 1")
        p = self.params
        if self.kind == "constant":
            return p[0]
        if self.kind == "power":
            return p[1] * float(n) ** (-p[0])
        if self.kind == "geometric":
            return p[1] * p[0] ** n
        if self.kind == "linear":
            return p[0] + p[1] * n
        if self.kind == "explicit":
            if n > len(p):
                raise InvalidRule(f"explicit rule has only {len(p)} values")
            return p[n - 1]
        raise InvalidRule(f"unknown rule kind {self.kind!r}")

    def _probe(self, count: int = 64) -> np.ndarray:
        upto = count if self.length is None else self.length
        return np.array([self(n) for n in range(1, upto + 1)])

    def require_decreasing_to_zero(self) -> None:
        v = self._probe()
        if not (np.all(v > 0) and np.all(np.diff(v) < 0)):
            raise InvalidRule("rule must give a strictly decreasing positive sequence")
        if self.kind in ("constant", "linear") or (self.kind == "geometric" and not 0 < self.params[0] < 1) \
                or (self.kind == "power" and self.params[0] <= 0):
            raise InvalidRule("rule does not converge to 0")

    def require_conditioning(self) -> None:
        v = self._probe()
        if not (np.all(v >= 1.0) and np.all(np.diff(v) >= 0)):
            raise InvalidRule("conditioning rule must be non-decreasing and >= 1")


# --------------------------------------------------------------------------
# families
# --------------------------------------------------------------------------


def _seeded(seed: int, n: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(n)])


def _flip_unitary(rng: np.random.Generator, mixing: float) -> np.ndarray:
    """exp(J0 S) for a random skew-Hermitian S with ||S|| = mixing.

    (J0 S)^[*] = J0 S^H = -J0 S, so the exponential U satisfies U^[*] = U^{-1}.
    """
    if mixing == 0:
        return np.eye(2, dtype=complex)
    G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    S = 0.5 * (G - G.conj().T)
    S *= mixing / norm2(S)
    return sla.expm(FLIP @ S)


_SIGNATURES = (np.diag([1.0, -1.0]), np.diag([-1.0, 1.0]), FLIP, np.eye(2), -np.eye(2))


@dataclass(frozen=True, eq=False)
class BlockFamily:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown family kind {self.kind!r}")

    @property
    def default_target(self) -> str:
        return "T" if self.kind == "GradedNeutrality" else "product1"

    @property
    def length(self) -> int | None:
        if self.kind == "ExplicitList":
            return len(self.params["blocks"])
        return None

    def block(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(T_n, J_n), a pure function of (kind, params, seed, n)."""
        if n < 1:
            raise InputError("blocks are indexed from 1")
        p = self.params
        if self.kind == "ExampleOne":
            U = _flip_unitary(_seeded(self.seed, n), p.get("mixing", 0.0))
            return p["scale"](n) * U, FLIP.copy()
        if self.kind == "GradedNeutrality":
            lam = p["eigenvalues"]
            main = lam(n)
            partner = 0.5 * (lam(n) + lam(n - 1)) if n > 1 else 1.5 * lam(1)
            t = math.sqrt(p["kappa"](n))
            S = np.array([[t, t], [1.0 / t, -1.0 / t]], dtype=complex)
            H = S @ np.diag([main, partner]) @ np.linalg.inv(S)
            return H, FLIP.copy()
        if self.kind == "ProductOfBlocks":
            rng = _seeded(self.seed, n)
            U = _flip_unitary(rng, p.get("mixing", 0.0))
            if n == 1:
                a = math.sqrt(p["x0"])
                R = np.array([[a, 0.5 / a], [0.0, a]], dtype=complex)
                return R @ U, FLIP.copy()
            G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            J = _SIGNATURES[int(rng.integers(len(_SIGNATURES)))]
            return p.get("other_scale", 0.25) / n * G / norm2(G), J.copy()
        blocks = p["blocks"]
        if n > len(blocks):
            raise InputError(f"explicit family has only {len(blocks)} blocks")
        T, J = blocks[n - 1]
        return T.copy(), J.copy()

    def envelope(self, n: int) -> float:
        """Declared bound on ||T_n||."""
        p = self.params
        if self.kind == "ExampleOne":
            return p["scale"](n) * math.exp(p.get("mixing", 0.0)) * (1 + 1e-12)
        if self.kind == "GradedNeutrality":
            lam = p["eigenvalues"]
            top = max(abs(lam(n)), abs(lam(max(n - 1, 1))) * 1.5)
            return p["kappa"](n) * top * (1 + 1e-12)
        if self.kind == "ProductOfBlocks":
            if n == 1:
                a = math.sqrt(p["x0"])
                return (a + 0.5 / a) * math.exp(p.get("mixing", 0.0)) * (1 + 1e-12)
            return p.get("other_scale", 0.25) / n * (1 + 1e-12)
        return norm2(self.block(n)[0])

    def describe(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed}
        for k, v in self.params.items():
            if isinstance(v, Rule):
                out[k] = v.to_dict()
            elif k == "blocks":
                out[k] = len(v)
            else:
                out[k] = v
        return out


def example_one_family(seed: int = 0, rule: Rule | None = None, mixing: float = 0.5) -> BlockFamily:
    """T_n = scale(n) U_n, J_n = [[0, 1], [1, 0]], U_n random J_n-unitary.

    Both products restricted to block n equal scale(n)^2 I, a doubly
    degenerate eigenvalue with an indefinite eigenspace.  ``mixing = 0`` gives
    U_n = I.
    """
    rule = rule or Rule.power(1.0)
    rule.require_decreasing_to_zero()
    if mixing < 0:
        raise InvalidRule("mixing must be non-negative")
    return BlockFamily("ExampleOne", {"scale": rule, "mixing": float(mixing)}, int(seed))


def graded_neutrality_family(
    seed: int = 0, kappa: Rule | None = None, eigenvalues: Rule | None = None
) -> BlockFamily:
    """J0-selfadjoint blocks with eigenvalues (lam_n, lam_n') and eigenvector
    basis of condition number kappa(n).

    lam_n' is the midpoint of lam_n and lam_{n-1} (1.5 lam_1 for n = 1), so a
    cut between lam_n and lam_n' separates the pair and the projection norm of
    block n is about kappa(n) / 2.
    """
    kappa = kappa or Rule.constant(1.0)
    eigenvalues = eigenvalues or Rule.power(2.0)
    kappa.require_conditioning()
    eigenvalues.require_decreasing_to_zero()
    return BlockFamily("GradedNeutrality", {"kappa": kappa, "eigenvalues": eigenvalues}, int(seed))


def product_of_blocks_family(
    seed: int = 0, x0: float = 1.0, mixing: float = 0.5, other_scale: float = 0.25
) -> BlockFamily:
    """First block T_1 = R U with R = [[a, 1/(2a)], [0, a]], a = sqrt(x0), so
    T_1 T_1^[*] = R^2 is a Jordan block at x0; the remaining blocks are random
    with norm other_scale / n and random signatures."""
    if not x0 > 0:
        raise InvalidRule("the planted Jordan block needs x0 > 0")
    return BlockFamily(
        "ProductOfBlocks",
        {"x0": float(x0), "mixing": float(mixing), "other_scale": float(other_scale)},
        int(seed),
    )


def explicit_family(blocks: Sequence[tuple]) -> BlockFamily:
    checked = []
    for T, J in blocks:
        op = KreinOperator(T, J)
        checked.append((op.T, op.J.matrix.copy()))
    if not checked:
        raise InputError("explicit family needs at least one block")
    return BlockFamily("ExplicitList", {"blocks": tuple(checked)}, 0)


def truncate(F: BlockFamily, N: int) -> KreinOperator:
    if int(N) != N or N < 1:
        raise InputError("N must be a positive integer")
    if F.length is not None and N > F.length:
        raise InputError(f"family has only {F.length} blocks")
    blocks = [F.block(n) for n in range(1, int(N) + 1)]
    T = sla.block_diag(*[b[0] for b in blocks]).astype(complex)
    J = sla.block_diag(*[b[1] for b in blocks])
    return KreinOperator(T, FundamentalSymmetry(J))


def block_operator(T, J, target: str) -> np.ndarray:
    """T itself, T^[*]T (``product1``) or TT^[*] (``product2``)."""
    if target == "T":
        return as_matrix(T)
    if target == "product1":
        return krein_adjoint(T, J) @ T
    if target == "product2":
        return T @ krein_adjoint(T, J)
    raise InputError(f"unknown target {target!r}; expected one of {TARGETS}")


# --------------------------------------------------------------------------
# growth orders
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GrowthFit:
    m_hat: float
    M_hat: float
    sample_points: tuple[tuple[complex, float], ...]
    fit_residual: float
    m: int = 1
    slope: float = 0.0
    window: tuple[float, float] = (0.0, 0.0)
    window_stable: bool = True

    def bound(self, lam: complex, order: int | None = None, constant: float | None = None) -> float:
        """M (1 + |lam|)^(2m - 2) / |Im lam|^m."""
        m = self.m if order is None else order
        M = self.M_hat if constant is None else constant
        return M * (1.0 + abs(lam)) ** (2 * m - 2) / abs(lam.imag) ** m


def _window(u: np.ndarray, v: np.ndarray, spread: float = 0.05) -> tuple[np.ndarray, bool]:
    """Indices of the smallest-y decade whose consecutive slopes agree to ``spread``."""
    order = np.argsort(-u)
    u, v = u[order], v[order]
    for start in range(len(u)):
        idx = np.nonzero((u <= u[start]) & (u >= u[start] - 1.0))[0]
        if len(idx) < 3 or u[start] - u[idx[-1]] < 1.0 - 1e-9:
            break
        slopes = np.diff(v[idx]) / np.diff(u[idx])
        if np.ptp(slopes) < spread:
            return order[idx], True
    idx = np.nonzero(u >= u[0] - 1.0)[0]
    return order[idx], False


def growth_order_fit(
    A,
    J,
    x0: float,
    ys: Sequence[float] | None = None,
    guard: float = GROWTH_GUARD,
    workers: int | None = None,
) -> GrowthFit:
    """Fit the growth order of ||(A - (x0 + iy))^{-1}|| as y -> 0.

    The slope of log ||R|| against -log y is taken by least squares over the
    smallest-y decade with stable consecutive slopes; m_hat is that slope,
    clamped below at 1, m = ceil(m_hat - 0.1) and M_hat the smallest constant
    making every sample satisfy M (1 + |lam|)^(2m-2) / y^m.
    """
    J = FundamentalSymmetry.coerce(J)
    A = as_matrix(A, "A")
    _require_selfadjoint(A, J)
    ys = np.asarray(DEFAULT_Y_GRID if ys is None else ys, dtype=float)
    if ys.ndim != 1 or len(ys) < 3 or np.any(ys <= 0):
        raise InputError("y grid must hold at least three positive values")
    lams = [complex(x0, y) for y in ys]
    norms = np.array(parallel_map(lambda z: resolvent_norm(A, z, guard), lams, workers))
    u, v = -np.log10(ys), np.log10(norms)
    idx, stable = _window(u, v)
    coef, res, *_ = np.polyfit(u[idx], v[idx], 1, full=True)
    slope = float(coef[0])
    resid = float(np.sqrt(res[0] / len(idx))) if len(res) else 0.0
    m_hat = max(slope, 1.0)
    m = max(1, math.ceil(m_hat - 0.1))
    M_hat = float(max(r * y**m / (1.0 + abs(z)) ** (2 * m - 2) for r, y, z in zip(norms, ys, lams)))
    samples = tuple((z, float(r)) for z, r in zip(lams, norms))
    window = (float(ys[idx].min()), float(ys[idx].max()))
    return GrowthFit(m_hat, M_hat, samples, resid, m, slope, window, stable)


@dataclass(frozen=True, eq=False)
class PartnerGrowthReport:
    fit_product1: GrowthFit
    fit_product2: GrowthFit
    bound_constant: float
    bound_order: int
    max_ratio: float
    bound_holds: bool

    @property
    def m_hat_product1(self) -> float:
        return self.fit_product1.m_hat

    @property
    def m_hat_product2(self) -> float:
        return self.fit_product2.m_hat


def partner_growth_check(
    F: BlockFamily | KreinOperator,
    x0: float,
    N: int = 1,
    ys: Sequence[float] | None = None,
) -> PartnerGrowthReport:
    """Transfer a growth bound from TT^[*] to T^[*]T near x0.

    With R1, R2 the resolvents of T^[*]T and TT^[*],
    R1(lam) = lam^{-1} (T^[*] R2(lam) T - I), so an order-m bound with
    constant M for R2 gives, for |Im lam| <= 1 and |lam| >= |x0|,

        ||R1(lam)|| <= K (1 + |lam|)^(2m) / |Im lam|^(m+1),
        K = (||T|| ||T^[*]|| M + 1) / |x0|.

    The check evaluates that order m + 1 bound on the T^[*]T samples.
    """
    if x0 == 0:
        raise InputError("x0 must be nonzero")
    op = truncate(F, N) if isinstance(F, BlockFamily) else F
    T, J = op.T, op.J
    Ts = op.adjoint
    first, second = Ts @ T, T @ Ts
    ys = np.asarray(DEFAULT_Y_GRID if ys is None else ys, dtype=float)
    if np.any(ys > 1):
        raise InputError("partner bound is stated for |Im lambda| <= 1")
    fit2 = growth_order_fit(second, J, x0, ys)
    fit1 = growth_order_fit(first, J, x0, ys)
    m = fit2.m
    K = (norm2(T) * norm2(Ts) * fit2.M_hat + 1.0) / abs(x0)
    ratios = [r / fit2.bound(z, m + 1, K) for z, r in fit1.sample_points]
    worst = float(max(ratios))
    return PartnerGrowthReport(fit1, fit2, K, m + 1, worst, worst <= 1.0 + 1e-9)


# --------------------------------------------------------------------------
# truncation trends
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncationTrend:
    N_values: tuple[int, ...]
    metric: str
    values: tuple[float, ...]
    verdict: str
    intervals: tuple[tuple[float, float], ...] = ()
    inertias: tuple[Inertia, ...] = ()


def trend_verdict(values: Sequence[float], bounded_ratio: float = BOUNDED_RATIO, growing_ratio: float = GROWING_RATIO) -> str:
    """Bounded if the last half varies by at most ``bounded_ratio``; Growing if
    non-decreasing with end-to-end ratio at least ``growing_ratio``."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return "Inconclusive"
    tail = v[len(v) // 2:]
    if np.max(tail) == 0 or (np.min(tail) > 0 and np.max(tail) / np.min(tail) <= bounded_ratio):
        return "Bounded"
    if np.all(np.diff(v) >= 0) and v[-1] > 0 and (v[0] == 0 or v[-1] / v[0] >= growing_ratio):
        return "Growing"
    return "Inconclusive"


def _adjust(interval: Interval, eig: np.ndarray, guard: float) -> Interval:
    """Move endpoints that sit within ``guard`` of a real eigenvalue to the
    midpoint of the adjacent spectral gap, keeping that eigenvalue inside."""
    xs = np.unique(np.round(eig.real[np.abs(eig.imag) <= guard], 14))
    lo, hi = interval.lo, interval.hi

    def move(e, outward):
        near = xs[np.abs(xs - e) < guard]
        if near.size == 0:
            return e
        x = near[0] if outward < 0 else near[-1]
        beyond = xs[xs < x - guard] if outward < 0 else xs[xs > x + guard]
        if beyond.size:
            nb = beyond[-1] if outward < 0 else beyond[0]
            return 0.5 * (x + nb)
        return x + outward * 10.0 * guard

    lo, hi = move(lo, -1), move(hi, +1)
    return Interval(lo, hi)


def _blocks(F: BlockFamily, N: int, target: str):
    out = []
    for n in range(1, N + 1):
        T, J = F.block(n)
        out.append((block_operator(T, J, target), J))
    return out


def _per_block_projection(blocks, interval: Interval, guard: float):
    norms, inertia = [], Inertia(0, 0, 0)
    for A, J in blocks:
        E = riesz_projection(A, interval, guard=guard)
        norms.append(norm2(E))
        rank = int(round(np.trace(E).real))
        if rank:
            inertia = inertia + gram_inertia(range_basis(E, rank), J)
    return max(norms, default=0.0), inertia


def _interval_list(intervals, N_values):
    fixed = isinstance(intervals, Interval) or (
        len(intervals) == 2 and all(np.isscalar(x) for x in intervals)
    )
    if fixed:
        intervals = [intervals] * len(N_values)
    intervals = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals]
    if len(intervals) != len(N_values):
        raise InputError("need one interval per N value, or a single fixed interval")
    return intervals


def _trend(F, intervals, N_values, target, blockwise, workers):
    N_values = [int(N) for N in N_values]
    if not N_values or any(N < 1 for N in N_values):
        raise InputError("N values must be positive")
    target = target or F.default_target
    intervals = _interval_list(intervals, N_values)

    def one(args):
        N, iv = args
        blocks = _blocks(F, N, target)
        eig = np.concatenate([np.linalg.eigvals(A) for A, _ in blocks])
        guard = REGION_GUARD * (1.0 + float(np.max(np.abs(eig))))
        adjusted = _adjust(iv, eig, guard)
        try:
            if blockwise:
                nrm, inertia = _per_block_projection(blocks, adjusted, guard)
            else:
                op = truncate(F, N)
                A = block_operator(op.T, op.J, target)
                E = riesz_projection(A, adjusted, guard=guard)
                rank = int(round(np.trace(E).real))
                nrm = norm2(E)
                inertia = gram_inertia(range_basis(E, rank), op.J) if rank else Inertia(0, 0, 0)
        except BoundaryHit as exc:
            raise BoundaryHit(f"interval {iv} could not be adjusted off the spectrum at N={N}: {exc}") from exc
        return nrm, inertia, (adjusted.lo, adjusted.hi)

    results = parallel_map(one, list(zip(N_values, intervals)), workers)
    return N_values, results


def projection_trend(
    F: BlockFamily,
    intervals,
    N_values: Sequence[int],
    target: str | None = None,
    blockwise: bool = True,
    workers: int | None = None,
) -> TruncationTrend:
    """||E_N(D)|| for each N.

    ``intervals`` is one fixed interval or one interval per N.  With
    ``blockwise`` the projection of the direct sum is assembled block by
    block (its norm is the largest block norm), which avoids mixing the
    roundoff of badly conditioned blocks into well conditioned ones.
    """
    N_values, results = _trend(F, intervals, N_values, target, blockwise, workers)
    values = tuple(r[0] for r in results)
    return TruncationTrend(
        tuple(N_values), "ProjectionNorm", values, trend_verdict(values),
        tuple(r[2] for r in results), tuple(r[1] for r in results),
    )


def negative_rank_trend(
    F: BlockFamily,
    intervals,
    N_values: Sequence[int],
    target: str | None = None,
    blockwise: bool = True,
    workers: int | None = None,
) -> TruncationTrend:
    """Number of negative squares of the form on ran E_N(D) for each N."""
    N_values, results = _trend(F, intervals, N_values, target, blockwise, workers)
    values = tuple(float(r[1].n_minus) for r in results)
    return TruncationTrend(
        tuple(N_values), "NegativeRank", values, trend_verdict(values),
        tuple(r[2] for r in results), tuple(r[1] for r in results),
    )


def shrinking_intervals(F: BlockFamily, ks: Sequence[int], target: str | None = None) -> list[Interval]:
    """Intervals [-c_k, c_k] shrinking to 0.

    For GradedNeutrality c_k sits between lam_k and its partner, so the
    interval splits block k; otherwise c_k is the midpoint between the
    spectra of blocks k and k + 1.
    """
    target = target or F.default_target
    out = []
    for k in ks:
        if F.kind == "GradedNeutrality":
            lam = F.params["eigenvalues"]
            main = lam(k)
            partner = 0.5 * (lam(k) + lam(k - 1)) if k > 1 else 1.5 * lam(1)
            c = 0.5 * (main + partner)
        else:
            here = np.linalg.eigvals(block_operator(*F.block(k), target)).real
            nxt = np.linalg.eigvals(block_operator(*F.block(k + 1), target)).real
            c = 0.5 * (np.min(np.abs(here)) + np.max(np.abs(nxt)))
        out.append(Interval(-c, c))
    return out
