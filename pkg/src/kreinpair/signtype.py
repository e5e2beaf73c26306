"""Sign types of real eigenvalues of J-selfadjoint matrices.

For a J-selfadjoint ``A`` and a real eigenvalue ``lam``:

* positive (negative) type: ``lam`` is semisimple and the form is positive
  (negative) definite on ``ker(A - lam)``;
* critical: anything else.

The finer invariant is the sign characteristic, one sign per Jordan block.
It is read off the Hermitian forms ``[N^{k-1} x, y]`` on ``ker N^k`` where
``N = (A - lam)`` restricted to the root subspace: that form has exactly one
nonzero eigenvalue per block of size ``k`` and its sign is the block sign.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

from .errors import (
    DegenerateForm,
    MultiplicityTooLarge,
    NotAnEigenvalue,
    NotJSelfadjoint,
)
from .krein import (
    INERTIA_TOL,
    SELFADJOINT_TOL,
    FundamentalSymmetry,
    Inertia,
    KreinOperator,
    gram_inertia,
    krein_adjoint,
    selfadjoint_residual,
)
from .numerics import (
    CLUSTER_TOL,
    RANK_TOL,
    EigenCluster,
    Eigenstructure,
    Interval,
    as_square,
    eigenstructure,
    kernel_basis,
    norm2,
    parallel_map,
    range_basis,
    riesz_projection,
    root_subspace,
)

__all__ = [
    "SignType",
    "SignClassification",
    "DefinitizingPolynomial",
    "IntervalProjection",
    "ProductSignReport",
    "classify_real_eigenvalue",
    "sign_characteristic",
    "critical_points",
    "interval_spectral_projection",
    "definitize",
    "is_definitizing",
    "product_signtype_compare",
    "projection_norm_sup",
    "MAX_SIGN_MULTIPLICITY",
]

MAX_SIGN_MULTIPLICITY = 3
IDENTITY_TOL = 1e-9
PROJECTION_SELFADJOINT_TOL = 1e-9


class SignType(enum.Enum):
    PositiveType = "PositiveType"
    NegativeType = "NegativeType"
    Critical = "Critical"

    def swapped(self) -> "SignType":
        return {
            SignType.PositiveType: SignType.NegativeType,
            SignType.NegativeType: SignType.PositiveType,
        }.get(self, self)


@dataclass(frozen=True)
class SignClassification:
    eigenvalue: float
    sign_type: SignType
    eigenspace_inertia: Inertia
    semisimple: bool
    sign_characteristic: tuple[tuple[int, int], ...] | None = None
    weyr: tuple[int, ...] = ()


def _require_selfadjoint(A, J) -> None:
    r = selfadjoint_residual(A, J)
    if r > SELFADJOINT_TOL:
        raise NotJSelfadjoint(f"J A is not Hermitian (relative residual {r:.3g})")


def _real_tol(structure: Eigenstructure) -> float:
    return structure.cluster_tolerance


def _locate_real(structure: Eigenstructure, lam: float, within: float | None) -> EigenCluster:
    within = max(structure.cluster_tolerance, 1e-8 * (1.0 + structure.spectral_radius)) if within is None else within
    c = structure.locate(lam, within=within)
    if c is None or abs(c.value.imag) > _real_tol(structure):
        raise NotAnEigenvalue(f"{lam!r} is not a real eigenvalue")
    return c


def _tag(semisimple: bool, inertia: Inertia) -> SignType:
    k = inertia.dim
    if semisimple and inertia.n_plus == k:
        return SignType.PositiveType
    if semisimple and inertia.n_minus == k:
        return SignType.NegativeType
    return SignType.Critical


def classify_real_eigenvalue(
    A,
    J,
    lam: float,
    tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
    structure: Eigenstructure | None = None,
    with_characteristic: bool = False,
) -> SignClassification:
    """Tag the real eigenvalue of ``A`` nearest to ``lam``."""
    J = FundamentalSymmetry.coerce(J)
    A = as_square(A, "A")
    _require_selfadjoint(A, J)
    structure = structure or eigenstructure(A, tol, rank_tol)
    c = _locate_real(structure, lam, None)
    V = kernel_basis(A, c.value, 1, tol, rank_tol, structure=structure)
    inertia = gram_inertia(V, J, INERTIA_TOL)
    characteristic = None
    if with_characteristic and c.index <= MAX_SIGN_MULTIPLICITY:
        characteristic = tuple(_characteristic(A, J, c, tol))
    return SignClassification(
        float(c.value.real), _tag(c.semisimple, inertia), inertia, c.semisimple, characteristic, c.weyr
    )


# --------------------------------------------------------------------------
# sign characteristic
# --------------------------------------------------------------------------


def _block_forms(A, J: FundamentalSymmetry, c: EigenCluster, tol: float):
    """Yield (k, eigenvalues of the k-th block form, number of size-k blocks)."""
    Q, T11 = root_subspace(A, c.value, tol)
    m = Q.shape[1]
    G = Q.conj().T @ J.matrix @ Q
    N = T11 - c.value.real * np.eye(m)
    weyr = list(c.weyr) + [0]
    Nk_minus = np.eye(m, dtype=complex)
    for k in range(1, c.index + 1):
        count = weyr[k - 1] - weyr[k]
        Nk = Nk_minus @ N
        dim = c.kernel_dim(k)
        if count:
            if dim >= m:
                X = np.eye(m, dtype=complex)
            else:
                X = np.linalg.svd(Nk)[2][m - dim:].conj().T
            H = X.conj().T @ G @ Nk_minus @ X
            H = 0.5 * (H + H.conj().T)
            yield k, np.linalg.eigvalsh(H), count
        Nk_minus = Nk


def _signs_of(ev: np.ndarray, count: int) -> list[int]:
    order = np.argsort(-np.abs(ev))
    chosen, rest = ev[order[:count]], ev[order[count:]]
    lo = float(np.min(np.abs(chosen)))
    top = float(np.max(np.abs(ev)))
    if lo <= 1e-12 * max(top, 1.0) or (rest.size and float(np.max(np.abs(rest))) * 100.0 > lo):
        raise DegenerateForm("block form is numerically degenerate on the root subspace")
    return sorted((1 if x > 0 else -1 for x in chosen), reverse=True)


def _characteristic(A, J, c: EigenCluster, tol: float) -> list[tuple[int, int]]:
    out = []
    for k, ev, count in _block_forms(A, J, c, tol):
        out.extend((k, s) for s in _signs_of(ev, count))
    return out


def sign_characteristic(
    A,
    J,
    lam: float,
    tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
    max_multiplicity: int = MAX_SIGN_MULTIPLICITY,
) -> list[tuple[int, int]]:
    """One (partial multiplicity, sign) pair per Jordan block at ``lam``."""
    J = FundamentalSymmetry.coerce(J)
    A = as_square(A, "A")
    _require_selfadjoint(A, J)
    structure = eigenstructure(A, tol, rank_tol)
    c = _locate_real(structure, lam, None)
    if c.index > max_multiplicity:
        raise MultiplicityTooLarge(f"largest Jordan block has size {c.index} > {max_multiplicity}")
    return _characteristic(A, J, c, tol)


# --------------------------------------------------------------------------
# critical points and spectral projections
# --------------------------------------------------------------------------


def critical_points(
    A, J, tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL, workers: int | None = None
) -> list[float]:
    """Real eigenvalues of ``A`` that are not of definite type."""
    J = FundamentalSymmetry.coerce(J)
    A = as_square(A, "A")
    _require_selfadjoint(A, J)
    structure = eigenstructure(A, tol, rank_tol)
    real = structure.real_clusters()
    tags = parallel_map(
        lambda c: classify_real_eigenvalue(A, J, c.value.real, tol, rank_tol, structure), real, workers
    )
    return [t.eigenvalue for t in tags if t.sign_type is SignType.Critical]


@dataclass(frozen=True, eq=False)
class IntervalProjection:
    E: np.ndarray
    inertia_on_range: Inertia
    norm: float
    selfadjoint_residual: float

    @property
    def rank(self) -> int:
        return self.inertia_on_range.dim

    def __iter__(self):
        return iter((self.E, self.inertia_on_range, self.norm))


def interval_spectral_projection(
    A,
    J,
    interval: Interval | tuple[float, float],
    guard: float | None = None,
    tol: float = CLUSTER_TOL,
) -> IntervalProjection:
    """Riesz projection E of ``A`` for the real interval, its norm and the
    inertia of the form on its range."""
    J = FundamentalSymmetry.coerce(J)
    A = as_square(A, "A")
    _require_selfadjoint(A, J)
    if not isinstance(interval, Interval):
        interval = Interval(*interval)
    E = riesz_projection(A, interval, guard=guard, tol=tol)
    rank = int(round(np.trace(E).real))
    residual = norm2(krein_adjoint(E, J) - E) / max(1.0, norm2(E))
    if residual > PROJECTION_SELFADJOINT_TOL:
        raise NotJSelfadjoint(f"spectral projection fails J-selfadjointness ({residual:.3g})")
    inertia = gram_inertia(range_basis(E, rank), J) if rank else Inertia(0, 0, 0)
    return IntervalProjection(E, inertia, norm2(E), residual)


def projection_norm_sup(A, J, interval: Interval | tuple[float, float], tol: float = CLUSTER_TOL) -> float:
    """max ||E(D)|| over sub-intervals D whose endpoints sit at the gaps
    between consecutive real eigenvalues inside ``interval`` (or at its ends)."""
    A = as_square(A, "A")
    if not isinstance(interval, Interval):
        interval = Interval(*interval)
    structure = eigenstructure(A, tol)
    xs = sorted(
        c.value.real for c in structure.real_clusters() if interval.lo < c.value.real < interval.hi
    )
    cuts = [interval.lo] + [0.5 * (a + b) for a, b in zip(xs, xs[1:])] + [interval.hi]
    best = 0.0
    for i in range(len(cuts)):
        for j in range(i + 1, len(cuts)):
            best = max(best, interval_spectral_projection(A, J, (cuts[i], cuts[j]), tol=tol).norm)
    return best


# --------------------------------------------------------------------------
# definitizing polynomials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DefinitizingPolynomial:
    coefficients: tuple[float, ...]
    degree: int
    certified_min_eig: float
    route: str = ""

    def __call__(self, A) -> np.ndarray:
        return _poly_matrix(self.coefficients, as_square(A))


def _poly_matrix(coefficients, A) -> np.ndarray:
    n = A.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for a in reversed(coefficients):
        out = out @ A + a * np.eye(n)
    return out


def _trim(coefficients) -> tuple[float, ...]:
    c = [float(x) for x in coefficients]
    top = max(abs(x) for x in c)
    while len(c) > 1 and abs(c[-1]) <= 1e-13 * top:
        c.pop()
    return tuple(c)


def _certify(coefficients, A, J: FundamentalSymmetry) -> float | None:
    if not np.any(coefficients):
        return None
    P = _poly_matrix(coefficients, A)
    H = J.matrix @ P
    if norm2(H - H.conj().T) > 1e-8 * max(1.0, norm2(P)):
        return None
    m = float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0])
    return m if m >= -1e-10 * max(1.0, norm2(P)) else None


def is_definitizing(p: DefinitizingPolynomial | tuple, A, J) -> bool:
    """True iff the symmetrized J p(A) is positive semidefinite to 1e-10 * max(1, ||p(A)||)."""
    J = FundamentalSymmetry.coerce(J)
    A = as_square(A, "A")
    coefficients = p.coefficients if isinstance(p, DefinitizingPolynomial) else tuple(p)
    if not np.any(coefficients):
        return False
    P = _poly_matrix(coefficients, A)
    H = J.matrix @ P
    scale = max(1.0, norm2(P))
    if norm2(H - H.conj().T) > 1e-8 * scale:
        raise NotJSelfadjoint("J p(A) is not Hermitian; A is not J-selfadjoint")
    return bool(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0] >= -1e-10 * scale)


def _derivative_row(lam: complex, j: int, d: int, center: float, radius: float) -> np.ndarray:
    """Row r with r @ a = (d/dt)^j sum a_i ((t - center)/radius)^i at t = lam, times radius^j."""
    s = (lam - center) / radius
    row = np.zeros(d + 1, dtype=complex)
    for i in range(j, d + 1):
        coef = np.prod(np.arange(i - j + 1, i + 1, dtype=float)) if j else 1.0
        row[i] = coef * s ** (i - j)
    return row


def _to_monomial(b: np.ndarray, center: float, radius: float) -> np.ndarray:
    """Coefficients in t of sum b_i ((t - center)/radius)^i."""
    out = np.zeros(len(b))
    base = np.poly1d([1.0 / radius, -center / radius])
    acc = np.poly1d([0.0])
    for i, bi in enumerate(b):
        acc = acc + bi * base**i
    coeffs = acc.coeffs[::-1]
    out[: len(coeffs)] = coeffs
    return out


def _structure_constraints(A, J, structure: Eigenstructure, tol: float):
    """(equalities, inequalities) on derivatives at eigenvalues, as
    (lam, order) and (lam, order, sign) triples."""
    eq, ineq = [], []
    for c in structure.clusters:
        if abs(c.value.imag) > _real_tol(structure):
            if c.value.imag > 0:
                eq.extend((c.value, j) for j in range(c.index))
            continue
        lam = c.value.real
        s = c.index
        eq.extend((lam, j) for j in range(s - 1))
        ev, count = None, 0
        for k, e, cnt in _block_forms(A, J, c, tol):
            if k == s:
                ev, count = e, cnt
        order = np.argsort(-np.abs(ev))[:count]
        signs = {1 if x > 0 else -1 for x in ev[order]}
        if len(signs) == 1:
            ineq.append((lam, s - 1, signs.pop()))
        else:
            eq.append((lam, s - 1))
    return eq, ineq


def _structural_route(A, J, structure, max_degree, tol):
    eq, ineq = _structure_constraints(A, J, structure, tol)
    vals = structure.values
    center = float(np.mean(vals.real)) if vals.size else 0.0
    radius = max(1.0, float(np.max(np.abs(vals - center)))) if vals.size else 1.0
    for d in range(max_degree + 1):
        rows = []
        for lam, j in eq:
            r = _derivative_row(lam, j, d, center, radius)
            rows.extend([r.real, r.imag] if isinstance(lam, complex) else [r.real])
        E = np.array(rows) if rows else np.zeros((0, d + 1))
        basis = sla.null_space(E, rcond=1e-10) if rows else np.eye(d + 1)
        if basis.shape[1] == 0:
            continue
        D = np.array([sgn * _derivative_row(lam, j, d, center, radius).real for lam, j, sgn in ineq]) \
            if ineq else np.zeros((0, d + 1))
        candidates = []
        if D.shape[0]:
            DN = D @ basis
            res = linprog(
                -DN.sum(axis=0),
                A_ub=np.vstack([-DN, DN.sum(axis=0, keepdims=True)]),
                b_ub=np.concatenate([np.zeros(len(DN)), [1.0]]),
                bounds=[(None, None)] * basis.shape[1],
                method="highs",
            )
            if res.status == 0 and -res.fun > 1e-9:
                candidates.append(basis @ res.x)
            inner = sla.null_space(DN, rcond=1e-10)
            candidates.extend(basis @ inner[:, i] for i in range(inner.shape[1]))
        else:
            candidates.extend(basis[:, i] for i in range(basis.shape[1]))
        for b in candidates:
            a = _to_monomial(b, center, radius)
            if not np.any(a):
                continue
            a = a / np.max(np.abs(a))
            m = _certify(a, A, J)
            if m is not None:
                return a, m
    return None


def _alternating_route(A, J, max_degree, seed, restarts=32, iters=300):
    n = A.shape[0]
    scale = max(1.0, norm2(A))
    As = A / scale
    rng = np.random.default_rng(seed)
    for d in range(max_degree + 1):
        powers = [np.eye(n, dtype=complex)]
        for _ in range(d):
            powers.append(powers[-1] @ As)
        S = [J.matrix @ P for P in powers]
        S = [0.5 * (H + H.conj().T) for H in S]
        basis = np.column_stack([np.concatenate([H.real.ravel(), H.imag.ravel()]) for H in S])
        for _ in range(restarts):
            a = rng.standard_normal(d + 1)
            a /= np.linalg.norm(a)
            for _ in range(iters):
                X = sum(ai * H for ai, H in zip(a, S))
                w, U = np.linalg.eigh(X)
                if w[0] >= -1e-12 * max(1.0, abs(w[-1])):
                    break
                Y = (U * np.clip(w, 0.0, None)) @ U.conj().T
                target = np.concatenate([Y.real.ravel(), Y.imag.ravel()])
                a = np.linalg.lstsq(basis, target, rcond=None)[0]
                nrm = np.linalg.norm(a)
                if nrm == 0:
                    break
                a /= nrm
            coeffs = a / scale ** np.arange(d + 1)
            if not np.any(coeffs):
                continue
            coeffs = coeffs / np.max(np.abs(coeffs))
            m = _certify(coeffs, A, J)
            if m is not None:
                return coeffs, m
    return None


def _annihilator(structure: Eigenstructure) -> np.ndarray:
    roots = []
    for c in structure.clusters:
        roots.extend([c.value] * c.index)
    return np.real(np.poly(roots))[::-1] if roots else np.array([1.0])


def definitize(
    A,
    J,
    max_degree: int | None = None,
    seed: int = 0,
    tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
) -> DefinitizingPolynomial:
    """A real polynomial p with J p(A) positive semidefinite, lowest degree first.

    Route one works from the eigenstructure: J p(A) >= 0 holds exactly when p
    vanishes to full order at nonreal eigenvalues and, at a real eigenvalue
    with largest block size s, the first s - 1 derivatives vanish and the
    (s-1)-th derivative carries the sign of the largest blocks.  The sign
    condition is a small linear program.  Route two is seeded alternating
    projection onto the PSD cone.  If both fail up to ``max_degree`` an
    annihilating polynomial (p(A) = 0) is returned.
    """
    J = FundamentalSymmetry.coerce(J)
    A = as_square(A, "A")
    _require_selfadjoint(A, J)
    n = A.shape[0]
    max_degree = n if max_degree is None else int(max_degree)
    structure = eigenstructure(A, tol, rank_tol)
    try:
        found = _structural_route(A, J, structure, max_degree, tol)
        route = "structural"
    except DegenerateForm:
        found = None
    if found is None:
        found = _alternating_route(A, J, max_degree, seed)
        route = "alternating"
    if found is None:
        a = _annihilator(structure)
        found = (a, _certify(a, A, J))
        route = "annihilator"
        if found[1] is None:
            P = _poly_matrix(a, A)
            H = J.matrix @ P
            found = (a, float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0]))
    coefficients = _trim(found[0])
    return DefinitizingPolynomial(coefficients, len(coefficients) - 1, float(found[1]), route)


# --------------------------------------------------------------------------
# T^[*]T versus TT^[*]
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProductSignReport:
    first: dict = field(default_factory=dict)
    second: dict = field(default_factory=dict)
    positive_match: bool = True
    negative_swap: bool = True
    critical_equal: bool = True
    identity_max_residual: float = 0.0
    identity_ok: bool = True
    violations: tuple[str, ...] = ()

    @property
    def consistent(self) -> bool:
        return self.positive_match and self.negative_swap and self.critical_equal and self.identity_ok

    @property
    def critical_first(self) -> list[float]:
        return sorted(k for k, v in self.first.items() if v.sign_type is SignType.Critical)

    @property
    def critical_second(self) -> list[float]:
        return sorted(k for k, v in self.second.items() if v.sign_type is SignType.Critical)


def product_signtype_compare(
    T: KreinOperator, tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL
) -> ProductSignReport:
    """Classify the nonzero real eigenvalues of T^[*]T and TT^[*] and check
    that the tags agree on the positive axis and swap on the negative one."""
    J = T.J
    Ts = T.adjoint
    first, second = Ts @ T.T, T.T @ Ts
    thr = tol * max(1.0, norm2(T.T) * norm2(Ts))
    s1 = eigenstructure(first, tol, rank_tol)
    s2 = eigenstructure(second, tol, rank_tol)

    def nonzero_real(s):
        return [c for c in s.real_clusters() if abs(c.value) > thr]

    r1, r2 = nonzero_real(s1), nonzero_real(s2)
    violations = []
    c1 = {c.value.real: classify_real_eigenvalue(first, J, c.value.real, tol, rank_tol, s1) for c in r1}
    c2 = {c.value.real: classify_real_eigenvalue(second, J, c.value.real, tol, rank_tol, s2) for c in r2}

    positive_match = negative_swap = True
    match_tol = thr + s1.cluster_tolerance + s2.cluster_tolerance
    keys2 = list(c2)
    used = set()
    for lam, cls in c1.items():
        j = min(range(len(keys2)), key=lambda i: abs(keys2[i] - lam), default=None)
        if j is None or abs(keys2[j] - lam) > match_tol or j in used:
            violations.append(f"real eigenvalue {lam:.6g} of T[*]T has no partner in TT[*]")
            if lam > 0:
                positive_match = False
            else:
                negative_swap = False
            continue
        used.add(j)
        other = c2[keys2[j]].sign_type
        expected = cls.sign_type if lam > 0 else cls.sign_type.swapped()
        if other is not expected:
            violations.append(f"at {lam:.6g}: {cls.sign_type.value} vs {other.value}")
            if lam > 0:
                positive_match = False
            else:
                negative_swap = False
    for i, lam in enumerate(keys2):
        if i not in used:
            violations.append(f"real eigenvalue {lam:.6g} of TT[*] has no partner in T[*]T")
            if lam > 0:
                positive_match = False
            else:
                negative_swap = False

    crit1 = sorted(k for k, v in c1.items() if v.sign_type is SignType.Critical)
    crit2 = sorted(k for k, v in c2.items() if v.sign_type is SignType.Critical)
    critical_equal = len(crit1) == len(crit2) and all(
        abs(a - b) <= match_tol for a, b in zip(crit1, crit2)
    )

    worst = 0.0
    for c in s1.clusters:
        if abs(c.value) <= thr:
            continue
        V = kernel_basis(first, c.value, 1, tol, rank_tol, structure=s1)
        for x in V.T:
            Tx = T.T @ x
            lhs = J.form(Tx, Tx)
            rhs = c.value * J.form(x, x)
            worst = max(worst, abs(lhs - rhs) / (np.vdot(Tx, Tx).real + abs(c.value)))
    identity_ok = worst <= IDENTITY_TOL
    if not identity_ok:
        violations.append(f"[Tx, Tx] = lam [x, x] fails with relative residual {worst:.3g}")
    return ProductSignReport(
        c1, c2, positive_match, negative_swap, critical_equal, float(worst), identity_ok, tuple(violations)
    )
