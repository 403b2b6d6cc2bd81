import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moritacp.algebra import Algebra
from moritacp.bimodule import (
    EquivalenceBimodule,
    bimodule_tensor,
    corner_bimodule,
    dual_bimodule,
    dual_pair,
    left_frame_residual,
    matrix_column_bimodule,
    right_frame_residual,
    trivial_bimodule,
)
from moritacp.errors import AlgebraMismatchError, AxiomViolationError
from moritacp.generate import random_bimodule
from moritacp.hilbmod import free_module

from conftest import small_algebra

seeds = st.integers(0, 2**32 - 1)


def scalar_bimodule(scale):
    C = Algebra([1])
    return EquivalenceBimodule(C, C, free_module(C, 1), np.ones((1, 1, 1)),
                               left_inner=lambda x, y: scale * x @ y.conj().T, validate=False)


@pytest.mark.parametrize("dims", [[1], [2], [1, 2]])
def test_trivial_bimodule_is_exact(dims):
    Y = trivial_bimodule(Algebra(dims))
    assert Y.certificate.max_residual() <= 1e-12
    x, y = Y.carrier.basis[0], Y.carrier.basis[-1]
    np.testing.assert_allclose(Y.left_inner(x, y), x @ y.conj().T, atol=1e-12)
    np.testing.assert_allclose(Y.right_inner(x, y), x.conj().T @ y, atol=1e-12)


def test_scaled_inner_product_fails_imprimitivity():
    assert scalar_bimodule(1.0).validate().passed
    cert = scalar_bimodule(2.0).validate()
    assert not cert.passed
    assert "imprimitivity" in cert.failing()
    # x . <y, z> = 1 while 2 <x, y> . z = 2
    assert cert.conditions["imprimitivity"] == pytest.approx(1.0)
    with pytest.raises(AxiomViolationError) as err:
        EquivalenceBimodule(Algebra([1]), Algebra([1]), free_module(Algebra([1]), 1), np.ones((1, 1, 1)),
                            left_inner=lambda x, y: 2 * x @ y.conj().T)
    assert err.value.axiom in ("imprimitivity", "left_inner_consistency")


def test_column_bimodule_is_defining_action():
    C = Algebra([1])
    Y = matrix_column_bimodule(C, 2)
    assert Y.left_alg == Algebra([2]) and Y.dim == 2
    for a, e in enumerate(Y.left_alg.basis_matrices):
        np.testing.assert_allclose(Y.left_iso[a], e)
    assert matrix_column_bimodule(C, 3).left_alg.vs_dim == 9
    assert matrix_column_bimodule(Algebra([2]), 1).left_alg == Algebra([2])


def test_bimodule_rejects_non_full_projection():
    with pytest.raises(AxiomViolationError):
        corner_bimodule(Algebra([1, 1]), np.diag([1.0, 0.0]))


def test_tensor_with_right_algebra_is_identity():
    rng = np.random.default_rng(5)
    Y = random_bimodule(rng, Algebra([1, 2]))
    T = bimodule_tensor(Y, trivial_bimodule(Y.right_alg))
    assert T.dim == Y.dim
    ys = Y.carrier.basis
    one = Y.right_alg.unit_matrix
    emb = np.array([T.embed(y, one) for y in ys])
    np.testing.assert_allclose(emb.conj().transpose(0, 2, 1)[:, None] @ emb[None, :],
                               ys.conj().transpose(0, 2, 1)[:, None] @ ys[None, :], atol=1e-10)
    col = bimodule_tensor(matrix_column_bimodule(Algebra([1]), 2), trivial_bimodule(Algebra([1])))
    assert col.dim == 2


def test_tensor_rejects_mismatch():
    with pytest.raises(AlgebraMismatchError):
        bimodule_tensor(trivial_bimodule(Algebra([1])), trivial_bimodule(Algebra([2])))


def test_tensor_with_dual_has_dimension_of_left_algebra():
    rng = np.random.default_rng(11)
    Y = random_bimodule(rng, Algebra([2, 1]))
    T = bimodule_tensor(Y, dual_bimodule(Y))
    # oracle: rank of the Gram matrix of all simple tensors y_i (x) y~_j
    Yt, tilde, _ = dual_pair(Y)
    ys = Y.carrier.basis
    simple = [T.embed(y, tilde(z)).ravel() for y in ys for z in ys]
    assert np.linalg.matrix_rank(np.array(simple), tol=1e-8) <= T.dim
    assert T.dim == Y.left_alg.vs_dim


def test_dual_examples():
    C, M2 = Algebra([1]), Algebra([2])
    triv = dual_bimodule(trivial_bimodule(M2))
    assert triv.left_alg == M2 and triv.dim == 4
    col = matrix_column_bimodule(C, 2)
    row = dual_bimodule(col)
    assert row.left_alg == C and row.right_alg == M2 and row.dim == col.dim == 2
    assert dual_bimodule(row) is col


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_random_bimodules_validate(seed):
    rng = np.random.default_rng(seed)
    Y = random_bimodule(rng, small_algebra(rng), max_n=2)
    assert Y.certificate.passed
    assert left_frame_residual(Y, Y.right_basis()) >= 0
    assert right_frame_residual(Y, Y.right_basis()) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_dual_inner_products_swap(seed):
    rng = np.random.default_rng(seed)
    Y = random_bimodule(rng, small_algebra(rng), max_n=2)
    Yt, tilde, untilde = dual_pair(Y)
    assert Yt.certificate.passed
    x, y = Y.carrier.random_element(rng).matrix, Y.carrier.random_element(rng).matrix
    xt, yt = tilde(x), tilde(y)
    np.testing.assert_allclose(Yt.right_inner(xt, yt), Y.left_inner(x, y), atol=1e-9)
    np.testing.assert_allclose(Yt.left_inner(xt, yt), Y.right_inner(x, y), atol=1e-9)
    np.testing.assert_allclose(untilde(xt), x, atol=1e-9)
    # conjugate linearity
    np.testing.assert_allclose(tilde(1j * x), -1j * xt, atol=1e-9)


def test_left_action_bijectivity_failure_is_named():
    C = Algebra([1])
    # M_2 acting on C^2 through its diagonal only is not injective
    L = np.zeros((4, 2, 2), dtype=complex)
    L[0, 0, 0] = L[3, 1, 1] = 1
    with pytest.raises(AxiomViolationError):
        EquivalenceBimodule(Algebra([2]), C, free_module(C, 2), L)
