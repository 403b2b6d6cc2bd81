"""Equivalence bimodules between finite-dimensional C*-algebras.

A bimodule keeps only its right-module realisation ``p B^n`` and a table of
the left action ``A -> B_B(p B^n)``; the left inner product is recovered as
``_A<x, y> = left_iso^{-1}(theta_{x,y})`` with ``theta_{x,y} = x y^*``.
"""

import numpy as np

from . import config
from ._linalg import column_rank, dagger, max_opnorm, relative, solve_map
from .algebra import Algebra
from .certificate import Certificate
from .errors import AlgebraMismatchError, AxiomViolationError, InvalidShapeError
from .hilbmod import (
    AbstractModule,
    ModuleTensor,
    ProjectiveModule,
    free_module,
    realize,
    tight_frame,
)


def apply_table(table, alg, a):
    """Evaluate a linear map given on the basis of ``alg`` at ``a`` (or a stack)."""
    return np.tensordot(alg.coords(a), table, axes=(-1, 0))


def multiplicativity_residual(table, alg):
    """Relative failure of ``L(ab) = L(a) L(b)`` for a table on matrix units.

    Uses ``e_ij e_jl = e_il`` inside each block and mutual orthogonality
    of all diagonal units, which together imply multiplicativity on every
    pair of basis elements without forming all ``vs_dim^2`` products.
    """
    index = {(r, c): k for k, (r, c) in enumerate(zip(alg.rows, alg.cols))}
    worst = 0.0
    for n, off in zip(alg.block_dims, alg.offsets):
        r = np.arange(off, off + n)
        units = np.array([[table[index[(i, j)]] for j in r] for i in r])  # (n, n, N, N)
        prod = np.einsum("ijab,jlbc->ijlac", units, units)
        worst = max(worst, max_opnorm(prod - units[:, None, :]))
    diag = table[[index[(i, i)] for i in range(alg.d)]]
    cross = diag[:, None] @ diag[None, :]
    cross[np.arange(alg.d), np.arange(alg.d)] = 0
    worst = max(worst, max_opnorm(cross))
    return worst / max(1.0, max_opnorm(table))


class EquivalenceBimodule:
    """An ``A``-``B`` equivalence bimodule.

    Args:
        left_alg: the algebra ``A`` acting on the left.
        right_alg: the algebra ``B``.
        carrier: the right Hilbert ``B``-module.
        left_iso: array ``(A.vs_dim, N, N)`` with the action of each basis
            element of ``A``.
        left_inner: optional override of the left inner product, a callable
            ``(x, y) -> A-element``. Meant for building counterexamples.
        validate: run the axiom checks and raise on failure.
    """

    def __init__(self, left_alg, right_alg, carrier, left_iso, left_inner=None,
                 validate=True, tol=None):
        if carrier.base != right_alg:
            raise AlgebraMismatchError("carrier must be a module over the right algebra")
        left_iso = np.asarray(left_iso, dtype=complex)
        if left_iso.shape != (left_alg.vs_dim, carrier.N, carrier.N):
            raise InvalidShapeError(f"left action table of shape {left_iso.shape} does not fit")
        self.left_alg = left_alg
        self.right_alg = right_alg
        self.carrier = carrier
        self.left_iso = left_iso
        self._left_inner_override = left_inner
        lmat = left_iso.reshape(left_alg.vs_dim, -1).T
        self._lmat = lmat
        self._lpinv = np.linalg.pinv(lmat, rcond=1e-10)
        self._dual = None
        self.certificate = None
        if validate:
            self.certificate = self.validate(tol)
            if not self.certificate.passed:
                worst = max(self.certificate.conditions, key=self.certificate.conditions.get)
                raise AxiomViolationError(worst, self.certificate.conditions[worst])

    def __repr__(self):
        return (f"{type(self).__name__}({self.left_alg!r} - {self.right_alg!r}, "
                f"dim={self.carrier.dim})")

    @property
    def dim(self):
        return self.carrier.dim

    def left_action(self, a):
        return apply_table(self.left_iso, self.left_alg, a)

    def left_act(self, a, x):
        return self.left_action(a) @ _mat(x)

    def left_iso_inverse(self, op):
        """The element of ``A`` acting as ``op`` (least squares on the table)."""
        op = np.asarray(op)
        flat = op.reshape(op.shape[:-2] + (-1,))
        coeffs = flat @ self._lpinv.T
        return self.left_alg.from_coords(coeffs)

    def left_inner(self, x, y):
        """``_A<x, y>``; broadcasts over leading axes."""
        if self._left_inner_override is not None:
            return np.asarray(self._left_inner_override(_mat(x), _mat(y)))
        x, y = _mat(x), _mat(y)
        return self.left_iso_inverse(x @ dagger(y))

    def right_inner(self, x, y):
        return dagger(_mat(x)) @ _mat(y)

    def left_basis(self):
        """Left ``A``-basis: ``{u_i}`` with ``sum_i _A<u_i, u_i> = 1``."""
        return tight_frame(self.carrier)

    def right_basis(self):
        """``{v_j}`` with ``sum_j <v_j, v_j>_B = 1_B``."""
        return tight_frame(self.carrier, normalized=True)

    def validate(self, tol=None):
        """Check the imprimitivity-bimodule axioms; returns a certificate."""
        tol = config.tol(tol)
        A, B, E = self.left_alg, self.right_alg, self.carrier
        L = self.left_iso
        conds = {}

        conds["left_action_multiplicative"] = multiplicativity_residual(L, A)
        conds["left_action_star"] = relative(L[A.star_perm] - dagger(L), L)
        unit = apply_table(L, A, A.unit_matrix)
        conds["left_action_unital"] = relative(unit - E.p, E.p)
        mask = np.tile(B.mask, (E.n, E.n))
        leak = np.where(mask, 0, L)
        conds["left_action_adjointable"] = relative(E.p @ L @ E.p - L, L) + relative(leak, L)

        rank = column_rank(self._lmat)
        target = sum(m * m for m in E.block_ranks)
        conds["left_action_bijective"] = float(abs(rank - A.vs_dim) + abs(rank - target))

        basis = E.basis
        right = dagger(basis)[:, None] @ basis[None, :]  # (k, l, d, d)
        right_coords = B.coords(right).reshape(-1, B.vs_dim)
        conds["right_fullness"] = float(B.vs_dim - column_rank(right_coords.T))

        left = self.left_inner(basis[:, None], basis[None, :])  # (k, l, dA, dA)
        left_coords = A.coords(left).reshape(-1, A.vs_dim)
        conds["left_fullness"] = float(A.vs_dim - column_rank(left_coords.T))

        gens = E.frame
        lact = apply_table(L, A, left)  # (k, l, N, N)
        lhs = np.einsum("klij,gjm->klgim", lact, gens)
        rhs = np.einsum("kij,lgjm->klgim", basis, dagger(basis)[:, None] @ gens[None, :])
        conds["imprimitivity"] = relative(lhs - rhs, rhs)

        ax = np.einsum("aij,kjm->akim", L, basis)  # a . b_k
        lhs = dagger(ax)[:, :, None] @ basis[None, None, :]
        astar_y = np.einsum("aij,kjm->akim", L[A.star_perm], basis)
        rhs = dagger(basis)[None, :, None] @ astar_y[:, None, :]
        conds["compatibility"] = relative(lhs - rhs, rhs)

        theta = basis[:, None] @ dagger(basis)[None, :]
        conds["left_inner_consistency"] = relative(lact - theta, theta)
        return Certificate("equivalence_bimodule", conds, tol,
                           info={"dim": E.dim, "left": list(A.block_dims), "right": list(B.block_dims)})


class TensorBimodule(EquivalenceBimodule):
    """``Y (x)_D W`` with its embedding of simple tensors."""

    def __init__(self, Y, W, tol=None):
        if Y.right_alg != W.left_alg:
            raise AlgebraMismatchError(f"middle algebras differ: {Y.right_alg} vs {W.left_alg}")
        self.factors = (Y, W)
        self.tensor = ModuleTensor(Y.carrier, W.carrier, W.left_iso)
        table = np.array([self.tensor.op(op) for op in Y.left_iso])
        super().__init__(Y.left_alg, W.right_alg, self.tensor.module, table, tol=tol)

    def embed(self, y, w):
        return self.tensor.embed(y, w)


class DualBimodule(EquivalenceBimodule):
    """Realised conjugate bimodule ``X~`` with the map ``x -> x~``."""

    def __init__(self, origin, carrier, left_iso, kappa, frame, tol=None):
        self.origin = origin
        self._kappa = kappa
        self._frame = frame
        super().__init__(origin.right_alg, origin.left_alg, carrier, left_iso, tol=tol)
        basis = origin.carrier.basis
        images = self.tilde(basis)
        self._untilde_pinv = np.linalg.pinv(images.reshape(len(basis), -1).T, rcond=1e-10)

    def _coefficients(self, x):
        """``(_A<v_i, x>)_i`` stacked as a column over ``A``."""
        left = self.origin.left_inner(self._frame, _mat(x)[..., None, :, :])
        return left.reshape(left.shape[:-3] + (-1, left.shape[-1]))

    def tilde(self, x):
        """The conjugate-linear map ``X -> X~``; broadcasts over stacks."""
        return self._kappa @ self._coefficients(x)

    def untilde(self, w):
        w = _mat(w)
        c = w.reshape(w.shape[:-2] + (-1,)) @ self._untilde_pinv.T
        return np.tensordot(c.conj(), self.origin.carrier.basis, axes=(-1, 0))


def _mat(x):
    return x.matrix if hasattr(x, "matrix") else np.asarray(x)


def make_equivalence_bimodule(A, B, carrier, left_iso, left_inner=None, tol=None):
    return EquivalenceBimodule(A, B, carrier, left_iso, left_inner=left_inner, tol=tol)


def corner_bimodule(D, p, tol=None):
    """The ``C``-``D`` bimodule ``p D^n`` with ``C = B_D(p D^n)`` computed.

    ``C`` has one block per block of ``D``, of size ``rank(p_t)``; every block
    of ``p`` must be nonzero for the bimodule to be full.
    """
    carrier = ProjectiveModule(D, p, tol=tol)
    return _corner(D, carrier, carrier.block_ranges, tol)


def _corner(D, carrier, ranges, tol):
    from .hilbmod import block_indices
    ranks = [q.shape[1] for q in ranges]
    if min(ranks) == 0:
        raise AxiomViolationError("right_fullness", float(ranks.count(0)))
    C = Algebra(ranks)
    N = carrier.N
    table = np.zeros((C.vs_dim, N, N), dtype=complex)
    for k, (r, c, t) in enumerate(zip(C.rows, C.cols, C.basis_block)):
        idx = block_indices(D, carrier.n, t)
        i, j = r - C.offsets[t], c - C.offsets[t]
        q = ranges[t]
        table[k][np.ix_(idx, idx)] = np.outer(q[:, i], q[:, j].conj())
    return EquivalenceBimodule(C, D, carrier, table, tol=tol)


def matrix_column_bimodule(B, n, tol=None):
    """``B^n`` as a ``B (x) M_n``-``B`` bimodule acting by matrix multiplication."""
    carrier = free_module(B, n)
    ranges = [np.eye(n * nt, dtype=complex) for nt in B.block_dims]
    return _corner(B, carrier, ranges, tol)


def trivial_bimodule(C, tol=None):
    """``C`` over itself with ``_C<x, y> = x y^*`` and ``<x, y>_C = x^* y``."""
    return matrix_column_bimodule(C, 1, tol=tol)


def bimodule_tensor(Y, W, tol=None):
    return TensorBimodule(Y, W, tol=tol)


def realize_dual(X, tol=None):
    """Realise the dual of ``X`` over its left algebra.

    With ``{v_i}`` satisfying ``sum_i <v_i, v_i>_B = 1`` every ``x`` equals
    ``sum_i _A<x, v_i> v_i``, so ``x~ = sum_i v_i~ . _A<v_i, x>``. The dual is
    the realisation of ``A^k`` with Gram ``[_A<v_i, v_j>]``.
    """
    A = X.left_alg
    frame = np.asarray([u.matrix for u in X.right_basis()])
    k = len(frame)
    gram_blocks = X.left_inner(frame[:, None], frame[None, :])  # (k, k, dA, dA)
    gram = gram_blocks.transpose(0, 2, 1, 3).reshape(k * A.d, k * A.d)
    R = realize(AbstractModule(free_module(A, k), gram))
    proto = _DualProto(X, R.kappa, frame)
    basis = X.carrier.basis
    inputs = np.concatenate(list(proto.tilde(basis)), axis=1)
    B = X.right_alg
    table = []
    for eb in B.basis_matrices:
        outputs = np.concatenate(list(proto.tilde(basis @ dagger(eb))), axis=1)
        op, _ = solve_map(inputs, outputs)
        table.append(R.module.p @ op @ R.module.p)
    return DualBimodule(X, R.module, np.array(table), R.kappa, frame, tol=tol)


class _DualProto:
    def __init__(self, X, kappa, frame):
        self.origin, self._kappa, self._frame = X, kappa, frame

    _coefficients = DualBimodule._coefficients
    tilde = DualBimodule.tilde


def dual_bimodule(Y):
    """The dual bimodule, identifying ``Y~~`` with ``Y`` canonically."""
    if isinstance(Y, DualBimodule):
        return Y.origin
    if Y._dual is None:
        Y._dual = realize_dual(Y)
    return Y._dual


def dual_pair(Y):
    """``(Y~, y -> y~, y~ -> y)``."""
    if isinstance(Y, DualBimodule):
        return Y.origin, Y.untilde, Y.tilde
    Yt = dual_bimodule(Y)
    return Yt, Yt.tilde, Yt.untilde


def left_frame_residual(Y, frame):
    """``|sum_i _A<u_i, u_i> - 1_A|`` for a candidate left basis."""
    us = np.asarray([_mat(u) for u in frame])
    total = Y.left_inner(us, us).sum(axis=0)
    return max_opnorm(total - Y.left_alg.unit_matrix)


def right_frame_residual(Y, frame):
    """``|sum_i <u_i, u_i>_B - 1_B|``."""
    us = np.asarray([_mat(u) for u in frame])
    total = (dagger(us) @ us).sum(axis=0)
    return max_opnorm(total - Y.right_alg.unit_matrix)
