"""Finite-dimensional C*-algebras as direct sums of full matrix blocks.

An algebra ``M_{n_1} + ... + M_{n_k}`` is stored through its faithful
block-diagonal representation on ``C^d`` with ``d = n_1 + ... + n_k``.
Elements are ``d x d`` complex matrices supported on the diagonal blocks,
so products, adjoints and norms are ordinary matrix operations.

The complex basis consists of matrix units ``e^t_{ij}``, ordered block-major
and then row-major; every coordinate table in the package is taken
relative to this order.
"""

from functools import cached_property
from numbers import Number

import numpy as np

from . import config
from ._linalg import dagger, hermitian_residual, opnorm
from .errors import HermiticityError, InvalidShapeError


class Algebra:
    """Direct sum of full complex matrix algebras."""

    def __init__(self, block_dims):
        dims = tuple(int(n) for n in block_dims)
        if not dims or any(n < 1 for n in dims):
            raise InvalidShapeError(f"block dimensions must be a nonempty list of positive integers, got {list(block_dims)}")
        self.block_dims = dims
        self.total_rep_dim = sum(dims)
        self.vs_dim = sum(n * n for n in dims)
        self.offsets = tuple(int(o) for o in np.concatenate([[0], np.cumsum(dims)[:-1]]))

    def __repr__(self):
        return f"Algebra({list(self.block_dims)})"

    def __eq__(self, other):
        return isinstance(other, Algebra) and other.block_dims == self.block_dims

    def __hash__(self):
        return hash(self.block_dims)

    @property
    def d(self):
        return self.total_rep_dim

    @cached_property
    def _index(self):
        rows, cols, blocks = [], [], []
        for t, (n, off) in enumerate(zip(self.block_dims, self.offsets)):
            for i in range(n):
                for j in range(n):
                    rows.append(off + i)
                    cols.append(off + j)
                    blocks.append(t)
        return np.array(rows), np.array(cols), np.array(blocks)

    @property
    def rows(self):
        return self._index[0]

    @property
    def cols(self):
        return self._index[1]

    @property
    def basis_block(self):
        return self._index[2]

    @cached_property
    def block_of_row(self):
        out = np.empty(self.d, dtype=int)
        for t, (n, off) in enumerate(zip(self.block_dims, self.offsets)):
            out[off:off + n] = t
        return out

    @cached_property
    def mask(self):
        """Boolean support pattern of elements in the faithful representation."""
        b = self.block_of_row
        return b[:, None] == b[None, :]

    @cached_property
    def basis_matrices(self):
        out = np.zeros((self.vs_dim, self.d, self.d), dtype=complex)
        out[np.arange(self.vs_dim), self.rows, self.cols] = 1.0
        return out

    @property
    def basis(self):
        return [AlgebraElement(self, m) for m in self.basis_matrices]

    @cached_property
    def star_perm(self):
        """Index of ``e_alpha^*`` in the basis for every ``alpha``."""
        lookup = {(r, c): k for k, (r, c) in enumerate(zip(self.rows, self.cols))}
        return np.array([lookup[(c, r)] for r, c in zip(self.rows, self.cols)])

    @cached_property
    def unit_matrix(self):
        return np.eye(self.d, dtype=complex)

    @cached_property
    def unit_coords(self):
        return self.coords(self.unit_matrix)

    def coords(self, a):
        """Matrix-unit coordinates of an element (shape ``(..., vs_dim)``)."""
        a = _matrix(a)
        return a[..., self.rows, self.cols]

    def from_coords(self, v):
        v = np.asarray(v, dtype=complex)
        out = np.zeros(v.shape[:-1] + (self.d, self.d), dtype=complex)
        out[..., self.rows, self.cols] = v
        return out

    def element(self, blocks):
        if len(blocks) != len(self.block_dims):
            raise InvalidShapeError(f"expected {len(self.block_dims)} blocks, got {len(blocks)}")
        m = np.zeros((self.d, self.d), dtype=complex)
        for n, off, blk in zip(self.block_dims, self.offsets, blocks):
            blk = np.asarray(blk, dtype=complex)
            if blk.shape != (n, n):
                raise InvalidShapeError(f"block of shape {blk.shape} does not match {n}x{n}")
            m[off:off + n, off:off + n] = blk
        return AlgebraElement(self, m)

    def one(self):
        return AlgebraElement(self, self.unit_matrix.copy())

    def zero(self):
        return AlgebraElement(self, np.zeros((self.d, self.d), dtype=complex))

    def blocks_of(self, a):
        a = _matrix(a)
        return [a[off:off + n, off:off + n] for n, off in zip(self.block_dims, self.offsets)]

    def left_regular(self, a):
        """Matrix of ``x -> a x`` on matrix-unit coordinates."""
        a = _matrix(a)
        return self.coords(a @ self.basis_matrices).T

    def random(self, rng, scale=1.0):
        """Random element with standard complex Gaussian block entries."""
        v = rng.standard_normal(self.vs_dim) + 1j * rng.standard_normal(self.vs_dim)
        return self.from_coords(scale * v / np.sqrt(2))

    def tensor_matrix(self, n):
        """The algebra ``self (x) M_n(C)``, i.e. blocks scaled by ``n``."""
        return Algebra([n * k for k in self.block_dims])

    def norm(self, a):
        return float(opnorm(_matrix(a)))


class AlgebraElement:
    """An element of an :class:`Algebra`, stored in the faithful representation."""

    __slots__ = ("parent", "matrix")

    def __init__(self, parent, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (parent.d, parent.d):
            raise InvalidShapeError(f"element of shape {matrix.shape} does not fit {parent}")
        if np.any(matrix[~parent.mask] != 0):
            raise InvalidShapeError("element has entries outside the diagonal blocks")
        self.parent = parent
        self.matrix = matrix

    @property
    def blocks(self):
        return self.parent.blocks_of(self.matrix)

    def adjoint(self):
        return AlgebraElement(self.parent, dagger(self.matrix))

    star = property(adjoint)

    def norm(self):
        return self.parent.norm(self.matrix)

    def coords(self):
        return self.parent.coords(self.matrix)

    def _wrap(self, m):
        return AlgebraElement(self.parent, m)

    def __add__(self, other):
        return self._wrap(self.matrix + _matrix(other))

    def __sub__(self, other):
        return self._wrap(self.matrix - _matrix(other))

    def __neg__(self):
        return self._wrap(-self.matrix)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._wrap(other * self.matrix)
        return self._wrap(self.matrix @ _matrix(other))

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self._wrap(other * self.matrix)
        return NotImplemented

    def __matmul__(self, other):
        return self.__mul__(other)

    def __repr__(self):
        return f"AlgebraElement({self.parent!r}, blocks={[b.tolist() for b in self.blocks]})"


def _matrix(a):
    return a.matrix if isinstance(a, AlgebraElement) else np.asarray(a)


def make_algebra(block_dims):
    return Algebra(block_dims)


def is_positive(a, tol=None):
    """Whether a self-adjoint element has spectrum in ``[-tol(1+|a|), inf)``.

    Raises :class:`HermiticityError` when ``a`` is not self-adjoint within
    ``tol * (1 + |a|)``.
    """
    tol = config.tol(tol)
    m = _matrix(a)
    scale = 1.0 + float(opnorm(m))
    res = hermitian_residual(m)
    if res > tol * scale:
        raise HermiticityError(res)
    evals = np.linalg.eigvalsh((m + dagger(m)) / 2)
    return bool(evals.min() >= -tol * scale)


def faithful_trace(a):
    """Sum of the block traces."""
    return complex(np.trace(_matrix(a)))
