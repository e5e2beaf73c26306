import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import FLIP, cplx, random_J
from kreinpair.errors import DimensionMismatch, InvalidFundamentalSymmetry
from kreinpair.krein import (
    FundamentalSymmetry,
    Inertia,
    KreinOperator,
    gram_inertia,
    is_j_selfadjoint,
    krein_adjoint,
    product_pair,
)


def test_hilbert_case_adjoint_is_conjugate_transpose(rng):
    T = cplx(rng, 3, 3)
    assert np.allclose(krein_adjoint(T, np.eye(3)), T.conj().T)


def test_flip_adjoint_symbolic():
    a, b, c, d = 1 + 2j, 3 - 1j, -2 + 0.5j, 4j
    T = np.array([[a, b], [c, d]])
    want = np.conj(np.array([[d, b], [c, a]]))
    assert np.allclose(krein_adjoint(T, FLIP), want)


def test_nilpotent_flip_is_selfadjoint():
    T = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(krein_adjoint(T, FLIP), T)


def test_selfadjointness_examples():
    J = np.diag([1.0, -1.0])
    assert is_j_selfadjoint(J, J)
    assert not is_j_selfadjoint(1j * np.eye(2), np.eye(2))
    assert is_j_selfadjoint(np.diag([-1.0, -4.0]), J)


def test_gram_inertia_examples():
    assert gram_inertia(np.eye(2), FLIP).as_tuple() == (1, 0, 1)
    e1 = np.array([[1.0], [0.0]])
    assert gram_inertia(e1, np.diag([1.0, -1.0])).as_tuple() == (1, 0, 0)
    assert gram_inertia(e1, FLIP).as_tuple() == (0, 1, 0)


def test_inertia_arithmetic():
    s = Inertia(1, 0, 2) + Inertia(0, 1, 1)
    assert s.as_tuple() == (1, 1, 3) and s.dim == 5


def test_product_pair_examples():
    T1 = KreinOperator(np.array([[0.0, 1.0], [0.0, 0.0]]), FLIP)
    P1, P2 = product_pair(T1)
    assert np.allclose(P1, 0) and np.allclose(P2, 0)

    swap = KreinOperator(np.array([[0.0, 2.0], [1.0, 0.0]]), np.diag([1.0, -1.0]))
    P1, P2 = product_pair(swap)
    assert np.allclose(P1, np.diag([-1.0, -4.0]))
    assert np.allclose(P2, np.diag([-4.0, -1.0]))


def test_scaled_j_unitary_products(rng):
    import scipy.linalg as sla

    H = cplx(rng, 2, 2)
    U = sla.expm(FLIP @ (H - H.conj().T))
    n = 3
    P1, P2 = product_pair(KreinOperator(U / n, FLIP))
    assert np.allclose(P1, np.eye(2) / n**2, atol=1e-12)
    assert np.allclose(P2, np.eye(2) / n**2, atol=1e-12)


def test_fundamental_symmetry_forms():
    assert np.array_equal(FundamentalSymmetry.from_signature([1, -1]).matrix, np.diag([1.0, -1.0]))
    F = FundamentalSymmetry.flip_blocks(2).matrix
    assert F.shape == (4, 4) and np.allclose(F @ F, np.eye(4))
    with pytest.raises(InvalidFundamentalSymmetry):
        FundamentalSymmetry(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(InvalidFundamentalSymmetry):
        FundamentalSymmetry(2 * np.eye(2))
    with pytest.raises(InvalidFundamentalSymmetry):
        FundamentalSymmetry.from_signature([1, 0])


def test_operator_dimension_check():
    with pytest.raises(DimensionMismatch):
        KreinOperator(np.eye(3), np.eye(2))


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_adjoint_algebra(n, seed):
    rng = np.random.default_rng(seed)
    J = random_J(rng, n)
    A, B = cplx(rng, n, n), cplx(rng, n, n)
    adj = lambda M: krein_adjoint(M, J)  # noqa: E731
    assert np.linalg.norm(adj(adj(A)) - A, 2) <= 1e-14 * 10 * np.linalg.norm(A, 2)
    lhs, rhs = adj(A @ B), adj(B) @ adj(A)
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-12 * np.linalg.norm(A, 2) * np.linalg.norm(B, 2)
    X, Y = cplx(rng, n, 100), cplx(rng, n, 100)
    form = lambda x, y: np.einsum("ik,ij,jk->k", y.conj(), J, x)  # noqa: E731
    left, right = form(A @ X, Y), form(X, adj(A) @ Y)
    scale = np.linalg.norm(A, 2) * np.linalg.norm(X, axis=0) * np.linalg.norm(Y, axis=0)
    assert np.all(np.abs(left - right) <= 1e-10 * scale)


@settings(max_examples=500, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_products_are_selfadjoint(n, seed):
    rng = np.random.default_rng(seed)
    op = KreinOperator(cplx(rng, n, n), random_J(rng, n))
    for P in product_pair(op):
        assert is_j_selfadjoint(P, op.J.matrix)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 6), k=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_inertia_counts_dimension(n, k, seed):
    rng = np.random.default_rng(seed)
    V = cplx(rng, n, min(n, k))
    assert gram_inertia(V, random_J(rng, n)).dim == min(n, k)
