import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moritacp.algebra import Algebra, AlgebraElement, faithful_trace, is_positive, make_algebra
from moritacp.errors import HermiticityError, InvalidShapeError

block_lists = st.lists(st.integers(1, 3), min_size=1, max_size=3)


@pytest.mark.parametrize("dims, vs, d", [([1], 1, 1), ([2], 4, 2), ([1, 2], 5, 3)])
def test_make_algebra_dimensions(dims, vs, d):
    alg = make_algebra(dims)
    assert alg.vs_dim == vs
    assert alg.d == d


@pytest.mark.parametrize("dims", [[], [0], [2, -1]])
def test_make_algebra_rejects_bad_dims(dims):
    with pytest.raises(InvalidShapeError):
        Algebra(dims)


def test_basis_order_is_block_major_row_major():
    alg = Algebra([1, 2])
    pos = [tuple(np.argwhere(m)[0]) for m in alg.basis_matrices]
    assert pos == [(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)]


def test_is_positive_examples():
    M2 = Algebra([2])
    assert is_positive(np.diag([1.0, 2.0]))
    assert not is_positive(np.array([[0, 1], [1, 0]]))
    CM2 = Algebra([1, 2])
    assert is_positive(CM2.element([[[1]], np.zeros((2, 2))]))
    with pytest.raises(HermiticityError) as err:
        is_positive(M2.from_coords([0, 1, 0, 0]))
    assert err.value.residual > 0


def test_faithful_trace_examples():
    assert faithful_trace(Algebra([2]).one()) == 2
    assert faithful_trace(Algebra([2]).from_coords([0, 1, 0, 0])) == 0
    assert faithful_trace(Algebra([1, 2]).one()) == 3


def test_element_rejects_off_block_entries():
    alg = Algebra([1, 1])
    with pytest.raises(InvalidShapeError):
        AlgebraElement(alg, np.ones((2, 2)))


def test_left_regular_is_multiplication():
    alg = Algebra([1, 2])
    rng = np.random.default_rng(0)
    a, b = alg.random(rng), alg.random(rng)
    np.testing.assert_allclose(alg.left_regular(a) @ alg.coords(b), alg.coords(a @ b), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(block_lists, st.integers(0, 2**32 - 1))
def test_star_algebra_laws(dims, seed):
    alg = Algebra(dims)
    rng = np.random.default_rng(seed)
    a, b = alg.random(rng), alg.random(rng)
    x, y = AlgebraElement(alg, a), AlgebraElement(alg, b)
    assert np.allclose(x.star.star.matrix, x.matrix, atol=1e-12)
    assert np.allclose((x * y).star.matrix, (y.star * x.star).matrix, atol=1e-12)
    n = x.norm()
    assert abs((x.star * x).norm() - n**2) <= 1e-12 * max(1.0, n**2)
    assert faithful_trace(x.star * x).real >= 0


@settings(max_examples=40, deadline=None)
@given(block_lists, st.integers(0, 2**32 - 1))
def test_coords_roundtrip(dims, seed):
    alg = Algebra(dims)
    v = np.random.default_rng(seed).standard_normal(alg.vs_dim)
    np.testing.assert_allclose(alg.coords(alg.from_coords(v)), v)
