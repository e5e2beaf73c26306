"""Acceptance suite: one test (or group) per criterion, named test_acNN_*.

The conftest prints a PASS/FAIL line per criterion at the end of the run.
"""

import json
import time

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from generators import FLIP, canonical_pair, cplx, disguise, planted_factors, random_J
from kreinpair import cli
from kreinpair.family import (
    Rule,
    example_one_family,
    graded_neutrality_family,
    growth_order_fit,
    negative_rank_trend,
    partner_growth_check,
    product_of_blocks_family,
    projection_trend,
    shrinking_intervals,
    truncate,
)
from kreinpair.krein import KreinOperator
from kreinpair.numerics import Interval
from kreinpair.products import (
    FactorPair,
    compare_nonzero_spectra,
    domination_constants,
    eigenspace_transport,
    resolvent_bound_check,
    resolvent_identity_residuals,
    sample_resolvent_points,
    zero_pole_order,
)
from kreinpair.signtype import (
    SignType,
    critical_points,
    definitize,
    is_definitizing,
    product_signtype_compare,
)

P_CANON = FactorPair(np.array([[1.0, 0.0]]), np.array([[1.0], [0.0]]))


def _random_pair(rng, trial):
    p = int(rng.integers(1, 9))
    if trial % 2:
        q = p
    else:
        q = int(rng.integers(1, 9))
        while q == p:
            q = int(rng.integers(1, 9))
    return FactorPair(cplx(rng, p, q), cplx(rng, q, p))


# ---------------------------------------------------------------- AC1


def test_ac01_nonzero_spectra_match():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    for trial in range(500):
        P = _random_pair(rng, trial)
        rep = compare_nonzero_spectra(P)
        assert rep.matched, trial
        assert rep.max_value_discrepancy <= 1e-8 * P.scale
        # independent route: raw eigenvalues, nonzero ones of the larger product
        small, big = sorted([P.AB, P.BA], key=len)
        ev_small = np.linalg.eigvals(small)
        ev_big = np.linalg.eigvals(big)
        ev_big = ev_big[np.argsort(np.abs(ev_big))][len(big) - len(small):]
        cost = np.abs(ev_small[:, None] - ev_big[None, :])
        if len(ev_small):
            r, c = linear_sum_assignment(cost)
            assert cost[r, c].max() <= 1e-6 * P.scale
    assert time.perf_counter() - start <= 30.0


# ---------------------------------------------------------------- AC2


def _kernel_dim(M, lam, n, rtol=1e-7):
    K = np.linalg.matrix_power(M - lam * np.eye(len(M)), n)
    s = np.linalg.svd(K, compute_uv=False)
    return int(np.sum(s <= rtol * max(1.0, s[0])))


def test_ac02_eigenspace_transport():
    rng = np.random.default_rng(202)
    checked = 0
    for trial in range(200):
        if trial % 4 == 0:
            n = int(rng.integers(3, 7))
            A, B = planted_factors(rng, n, 1.5 - 0.5j, multiplicity=2)
            P = FactorPair(A, B)
        else:
            P = _random_pair(rng, trial)
        rep = compare_nonzero_spectra(P)
        assert rep.matched
        for i, j in rep.pairs:
            cAB, cBA = rep.nonzero_clusters_AB[i], rep.nonzero_clusters_BA[j]
            for n in range(1, len(cBA.weyr) + 1):
                assert cBA.kernel_dim(n) == cAB.kernel_dim(n)
                assert cBA.kernel_dim(n) == _kernel_dim(P.BA, cBA.value, n)
                assert cAB.kernel_dim(n) == _kernel_dim(P.AB, cAB.value, n)
                tr = eigenspace_transport(P, cBA.value, n)
                assert tr.dim == cBA.kernel_dim(n)
                assert tr.residuals["roundtrip"] <= 1e-8
                if n == 1:
                    assert tr.residuals["scaled_inverse"] <= 1e-8 * max(1.0, P.scale)
                checked += 1
        if trial % 4 == 0:
            tr = eigenspace_transport(P, 1.5 - 0.5j, 1)
            assert tr.dim == 2
    assert checked > 200


# ---------------------------------------------------------------- AC3


def test_ac03_resolvent_identities_random():
    rng = np.random.default_rng(303)
    for trial in range(200):
        P = _random_pair(rng, trial)
        for lam, mu in sample_resolvent_points(P, rng, 5):
            res = resolvent_identity_residuals(P, lam, mu)
            scale = np.linalg.norm(np.linalg.inv(P.BA - lam * np.eye(len(P.BA))), 2)
            assert res.residual_ppp <= 1e-9 * scale
            assert res.residual_two_param <= 1e-9 * scale


def test_ac03_resolvent_identities_canonical():
    res = resolvent_identity_residuals(P_CANON, 2.0, 3.0)
    assert res.residual_ppp <= 1e-14 and res.residual_two_param <= 1e-14
    A, B, lam = P_CANON.A, P_CANON.B, 2.0
    via_ab = (B @ np.linalg.inv(A @ B - lam) @ A - np.eye(2)) / lam
    assert np.max(np.abs(via_ab - np.diag([-1.0, -0.5]))) <= 1e-14
    direct = np.linalg.inv(B @ A - lam * np.eye(2))
    assert np.max(np.abs(direct - np.diag([-1.0, -0.5]))) <= 1e-14


# ---------------------------------------------------------------- AC4


def test_ac04_resolvent_bound():
    rng = np.random.default_rng(404)
    total = 0
    for trial in range(100):
        P = _random_pair(rng, trial)
        consts = domination_constants(P, seed=trial)
        for lam, mu in sample_resolvent_points(P, rng, 5):
            b = resolvent_bound_check(P, lam, mu, consts)
            assert b.holds, (trial, lam, mu, b)
            total += 1
    assert total == 500


def test_ac04_canonical_domination_constant():
    d = domination_constants(P_CANON)
    assert abs(d.c1 - 0.5) <= 1e-6
    assert abs(d.c2 - 0.5) <= 1e-6
    assert d.C == 1.0


# ---------------------------------------------------------------- AC5


def test_ac05_zero_is_simple_pole():
    rng = np.random.default_rng(505)
    done = 0
    while done < 200:
        p = int(rng.integers(1, 7))
        q = int(rng.integers(p + 1, 9))
        P = FactorPair(cplx(rng, p, q), cplx(rng, q, p))
        if np.linalg.svd(P.AB, compute_uv=False)[-1] < 1e-6 * P.scale:
            continue
        po = zero_pole_order(P)
        assert po.corollary_applies
        assert po.order_BA == 1
        done += 1


# ---------------------------------------------------------------- AC6


def _j_unitary(rng, J, strength=0.4):
    n = len(J)
    H = cplx(rng, n, n)
    H = strength * (H - H.conj().T) / np.sqrt(n)
    return sla.expm(J @ H)


def _structured_T(rng):
    """A direct sum of neutral and random blocks, mixed by a J-unitary map,
    so the products carry critical points."""
    blocks, Js = [], []
    for _ in range(int(rng.integers(1, 4))):
        kind = rng.integers(3)
        if kind == 0:
            s = rng.uniform(0.3, 2.0)
            H = cplx(rng, 2, 2)
            U = sla.expm(FLIP @ (0.5 * (H - H.conj().T)))
            blocks.append(s * U)
            Js.append(FLIP)
        elif kind == 1:
            blocks.append(np.array([[rng.uniform(0.5, 2), 1.0], [0.0, rng.uniform(0.5, 2)]]))
            Js.append(FLIP)
        else:
            k = int(rng.integers(1, 3))
            blocks.append(cplx(rng, k, k))
            Js.append(np.diag(rng.choice([-1.0, 1.0], k)))
    T = sla.block_diag(*blocks).astype(complex)
    J = sla.block_diag(*Js).astype(complex)
    W = _j_unitary(rng, J)
    return W @ T @ np.linalg.inv(W), J


def test_ac06_sign_type_correspondence():
    rng = np.random.default_rng(606)
    saw_critical = 0
    for trial in range(300):
        if trial % 3 == 0:
            T, J = _structured_T(rng)
        else:
            n = int(rng.integers(1, 9))
            T, J = cplx(rng, n, n), random_J(rng, n)
        op = KreinOperator(T, J)
        rep = product_signtype_compare(op)
        assert rep.positive_match and rep.negative_swap, rep.violations
        assert rep.critical_equal
        assert rep.identity_ok and rep.identity_max_residual <= 1e-9
        saw_critical += bool(rep.critical_first)
        # independent identity check on raw eigenvectors
        Ts = op.adjoint
        w, X = np.linalg.eig(Ts @ T)
        for lam, x in zip(w, X.T):
            if abs(lam) < 1e-6 * max(1.0, np.linalg.norm(T, 2) ** 2):
                continue
            Tx = T @ x
            lhs = np.vdot(Tx, J @ Tx)
            rhs = lam * np.vdot(x, J @ x)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lam)) * np.linalg.norm(T, 2) ** 2
    assert saw_critical >= 20


def test_ac06_swap_fixture():
    op = KreinOperator(np.array([[0.0, 2.0], [1.0, 0.0]]), np.diag([1.0, -1.0]))
    rep = product_signtype_compare(op)
    first = {round(k, 12): v.sign_type for k, v in rep.first.items()}
    second = {round(k, 12): v.sign_type for k, v in rep.second.items()}
    assert first == {-1.0: SignType.PositiveType, -4.0: SignType.NegativeType}
    assert second == {-4.0: SignType.PositiveType, -1.0: SignType.NegativeType}
    assert rep.negative_swap and rep.positive_match and rep.critical_equal
    assert rep.consistent


# ---------------------------------------------------------------- AC7


def _random_canonical(rng, n_max=6):
    dim = 0
    parts = []
    while dim < n_max:
        room = n_max - dim
        if room >= 2 and rng.random() < 0.3:
            s = int(rng.integers(1, min(2, room // 2) + 1))
            lam = rng.uniform(-2, 2) + 1j * rng.uniform(0.2, 1.5)
            parts.append(("pair", lam, s))
            dim += 2 * s
        else:
            s = int(rng.integers(1, min(3, room) + 1))
            parts.append(("real", round(rng.uniform(-2, 2), 1), s, rng.choice([-1, 1])))
            dim += s
        if rng.random() < 0.35:
            break
    Ks, Gs = [], []
    for part in parts:
        if part[0] == "real":
            K, G = canonical_pair([(part[1], part[2], part[3])])
        else:
            lam, s = part[1], part[2]
            K = sla.block_diag(lam * np.eye(s) + np.eye(s, k=1), np.conj(lam) * np.eye(s) + np.eye(s, k=1))
            F = np.fliplr(np.eye(s))
            G = np.block([[np.zeros((s, s)), F], [F, np.zeros((s, s))]])
        Ks.append(K)
        Gs.append(G)
    return sla.block_diag(*Ks).astype(complex), sla.block_diag(*Gs).astype(complex)


def test_ac07_definitize_random():
    rng = np.random.default_rng(707)
    for trial in range(200):
        if trial % 2:
            K, G = _random_canonical(rng)
            A, J = disguise(K, G, rng)
        else:
            n = int(rng.integers(1, 7))
            J = random_J(rng, n)
            H = cplx(rng, n, n)
            A = J @ (H + H.conj().T)
        p = definitize(A, J, seed=trial)
        assert is_definitizing(p, A, J), trial


def test_ac07_diagonal_degree():
    A, J = np.diag([2.0, 3.0]), np.diag([1.0, -1.0])
    p = definitize(A, J)
    assert p.degree <= 1
    assert is_definitizing(p, A, J)


# ---------------------------------------------------------------- AC8


NORMAL_FIXTURES = [
    (np.diag([0.7, 0.7]), np.eye(2), 0.7),
    (np.diag([-1.0, -4.0]), np.diag([1.0, -1.0]), -1.0),
    (0.25 * np.eye(2), FLIP, 0.25),
]


@pytest.mark.parametrize("A, J, x0", NORMAL_FIXTURES)
def test_ac08_normal_fixtures(A, J, x0):
    fit = growth_order_fit(A, J, x0)
    assert abs(fit.m_hat - 1.0) <= 0.15


def test_ac08_jordan_fixture():
    lam0 = 0.6
    A = np.array([[lam0, 1.0], [0.0, lam0]])
    fit = growth_order_fit(A, FLIP, lam0)
    assert abs(fit.m_hat - 2.0) <= 0.15


def test_ac08_partner_bound():
    start = time.perf_counter()
    fixtures = [
        (example_one_family(0, mixing=0.0), 1.0, 4),
        (KreinOperator(np.array([[0.0, 2.0], [1.0, 0.0]]), np.diag([1.0, -1.0])), -1.0, 1),
        (product_of_blocks_family(0, x0=1.0), 1.0, 3),
    ]
    for F, x0, N in fixtures:
        rep = partner_growth_check(F, x0, N)
        assert rep.bound_holds
    eo = partner_growth_check(example_one_family(0, mixing=0.0), 1.0, 4)
    assert abs(eo.m_hat_product1 - 1) <= 0.15 and abs(eo.m_hat_product2 - 1) <= 0.15
    rng = np.random.default_rng(808)
    for seed in range(50):
        x0 = float(rng.uniform(0.5, 2.0))
        N = int(rng.integers(1, 6))
        rep = partner_growth_check(product_of_blocks_family(seed, x0=x0), x0, N)
        assert rep.bound_holds, seed
        assert abs(rep.m_hat_product2 - 2.0) <= 0.15
    assert time.perf_counter() - start <= 60.0


# ---------------------------------------------------------------- AC9

N_VALUES = (4, 8, 16, 32)
DELTA = Interval(0.05, 1.1)


def test_ac09_every_eigenvalue_critical():
    F = example_one_family(9, rule=Rule.power(1.0))
    for N in N_VALUES:
        op = truncate(F, N)
        Ts = op.adjoint
        expected = sorted(1.0 / n**2 for n in range(1, N + 1))
        for M in (Ts @ op.T, op.T @ Ts):
            crit = sorted(critical_points(M, op.J.matrix))
            assert len(crit) == N
            assert np.allclose(crit, expected, rtol=1e-8, atol=0)


def test_ac09_projection_norm_bounded():
    F = example_one_family(9)
    trend = projection_trend(F, DELTA, N_VALUES)
    assert all(abs(v - 1.0) <= 1e-8 for v in trend.values)
    assert trend.verdict == "Bounded"


def test_ac09_negative_rank_constant():
    F = example_one_family(9)
    trend = negative_rank_trend(F, DELTA, N_VALUES)
    assert trend.values == (4.0, 4.0, 4.0, 4.0)
    assert trend.verdict == "Bounded"


def test_ac09_graded_growing():
    F = graded_neutrality_family(0, kappa=Rule.geometric(2.0))
    trend = projection_trend(F, shrinking_intervals(F, N_VALUES), N_VALUES)
    assert trend.verdict == "Growing"
    assert list(trend.values) == sorted(trend.values)


# ---------------------------------------------------------------- AC10


def _write(path, doc):
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def test_ac10_byte_identical_reports(tmp_path):
    spec = _write(tmp_path / "swap.json", {"J": {"signature": [1, -1]}, "T": [[0, 2], [1, 0]]})
    for command in ("classify", "resolvent-bound", "definitize"):
        extra = ["--lambda", "2", "--mu", "0.5"] if command == "resolvent-bound" else []
        a = cli.run([command, spec, "--seed", "7", *extra])
        b = cli.run([command, spec, "--seed", "7", *extra])
        assert a[1] == b[1]
        assert a[0] == 0


def test_ac10_exit_codes(tmp_path, capsys):
    clean = _write(tmp_path / "clean.json", {"factors": {"A": [[1, 0]], "B": [[1], [0]]}})
    assert cli.main(["compare-spectra", clean]) == 0
    assert json.loads(capsys.readouterr().out)["results"]["matched"] is True

    bad = _write(
        tmp_path / "bad.json",
        {"J": {"flip_blocks": 1}, "T": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]], "expect": {"adjoint": [[0, 1], [0, 0.5]]}},
    )
    assert cli.main(["adjoint", bad]) == 2
    assert json.loads(capsys.readouterr().out)["status"] == "violations"

    broken = _write(tmp_path / "broken.json", '{"factors": {"A": [[1, 0]], ')
    assert cli.main(["compare-spectra", broken]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"]
