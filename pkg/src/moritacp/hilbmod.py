"""Right Hilbert modules over finite-dimensional C*-algebras.

Every module is realised as ``p B^n`` for a projection ``p`` in ``M_n(B)``.
With ``d`` the faithful dimension of ``B``, an element of ``B^n`` is an
``nd x d`` matrix whose ``d x d`` slots lie in ``B``; the right action is
right multiplication and ``<x, y>_B = x^* y``. Adjointable maps
``p B^n -> q B^m`` are ``md x nd`` matrices over ``B`` with ``M = q M p``, so
the module adjoint is the conjugate transpose.

Quotients of semi-inner-product modules are handled by :func:`realize`.
An :class:`AbstractModule` is an ambient projective module together with a
positive operator ``G`` defining ``<x, y> = x^* G y``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import config
from ._linalg import column_rank, dagger, hermitian_function, max_opnorm, opnorm, psd_rank
from .algebra import Algebra
from .errors import (
    EmptyFrameError,
    GeneratorDeficiencyError,
    HermiticityError,
    InvalidSemiInnerProductError,
    InvalidShapeError,
    ProjectionError,
)


def over_mask(B, r, s):
    """Support pattern of an ``r x s`` matrix over ``B``."""
    return np.tile(B.mask, (r, s))


def slot_generators(B, n):
    """The standard generators ``e_1, ..., e_n`` of ``B^n`` (shape ``(n, nd, d)``)."""
    d = B.d
    out = np.zeros((n, n * d, d), dtype=complex)
    for i in range(n):
        out[i, i * d:(i + 1) * d, :] = np.eye(d)
    return out


def block_indices(B, n, t):
    """Indices of block ``t`` of ``M_n(B)`` inside ``C^{nd}``, slot-major."""
    off, nt = B.offsets[t], B.block_dims[t]
    return np.array([i * B.d + off + k for i in range(n) for k in range(nt)], dtype=int)


def amplify(table, alg, x):
    """Apply a linear map given on the basis of ``alg`` entrywise to ``x``.

    ``table`` has shape ``(vs_dim, K, L)`` and ``x`` is an ``r x s`` matrix
    over ``alg`` (shape ``(r d, s d)``). The result has shape ``(r K, s L)``.
    """
    d = alg.d
    x = np.asarray(x)
    r, s = x.shape[0] // d, x.shape[1] // d
    if x.shape != (r * d, s * d):
        raise InvalidShapeError(f"matrix of shape {x.shape} is not a matrix over {alg}")
    blocks = x.reshape(r, d, s, d)
    coeffs = blocks[:, alg.rows, :, alg.cols]  # (vs, r, s)
    _, K, L = table.shape
    out = np.tensordot(coeffs, table, axes=(0, 0)).transpose(0, 2, 1, 3)
    return out.reshape(r * K, s * L)


class ProjectiveModule:
    """The right Hilbert ``B``-module ``p B^n``."""

    def __init__(self, base, p, tol=None):
        if not isinstance(base, Algebra):
            raise TypeError("base must be an Algebra")
        p = np.asarray(p, dtype=complex)
        d = base.d
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] % d or p.shape[0] == 0:
            raise InvalidShapeError(f"projection of shape {p.shape} is not a square matrix over {base}")
        n = p.shape[0] // d
        tol = config.tol(tol)
        mask = over_mask(base, n, n)
        scale = 1.0 + float(opnorm(p))
        leak = float(np.abs(p[~mask]).max(initial=0.0))
        idem = float(opnorm(p @ p - p))
        sa = float(opnorm(p - dagger(p)))
        if leak > tol * scale:
            raise InvalidShapeError(f"projection has entries outside the algebra pattern ({leak:.3e})")
        if idem > tol * scale or sa > tol * scale:
            raise ProjectionError(idem, sa)
        self.base = base
        self.n = n
        self.p = np.where(mask, p, 0)

    def __repr__(self):
        return f"ProjectiveModule(base={self.base!r}, n={self.n}, dim={self.dim})"

    @property
    def N(self):
        """Row count of elements in the faithful picture."""
        return self.n * self.base.d

    @cached_property
    def block_ranges(self):
        """Orthonormal bases of the range of ``p`` restricted to each block."""
        out = []
        for t in range(len(self.base.block_dims)):
            idx = block_indices(self.base, self.n, t)
            pt = self.p[np.ix_(idx, idx)]
            evals, evecs = np.linalg.eigh((pt + dagger(pt)) / 2)
            out.append(evecs[:, evals > 0.5])
        return out

    @property
    def block_ranks(self):
        return [q.shape[1] for q in self.block_ranges]

    @property
    def rank(self):
        """Rank of ``p`` in the faithful representation."""
        return sum(self.block_ranks)

    @property
    def dim(self):
        """Complex dimension ``sum_t n_t rank(p_t)``."""
        return sum(nt * m for nt, m in zip(self.base.block_dims, self.block_ranks))

    @property
    def is_zero(self):
        return self.rank == 0

    @cached_property
    def basis(self):
        """Orthonormal complex basis for ``(x, y) = tau(<x, y>)``; shape ``(dim, N, d)``."""
        B = self.base
        out = np.zeros((self.dim, self.N, B.d), dtype=complex)
        k = 0
        for t, q in enumerate(self.block_ranges):
            idx = block_indices(B, self.n, t)
            off, nt = B.offsets[t], B.block_dims[t]
            for a in range(q.shape[1]):
                for b in range(nt):
                    out[k, idx, off + b] = q[:, a]
                    k += 1
        return out

    @cached_property
    def frame(self):
        """Module generators ``p e_i``; they satisfy ``sum_i u_i <u_i, z> = z``."""
        return self.p @ slot_generators(self.base, self.n)

    def coords(self, x):
        x = _mat(x)
        return np.einsum("kab,...ab->...k", self.basis.conj(), x)

    def from_coords(self, c):
        return np.tensordot(np.asarray(c), self.basis, axes=(-1, 0))

    def element(self, matrix):
        return ModuleElement(self, matrix)

    def zero(self):
        return ModuleElement(self, np.zeros((self.N, self.base.d), dtype=complex))

    def random_element(self, rng):
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return ModuleElement(self, self.from_coords(c / np.sqrt(2)))

    def identity(self):
        return ModuleMap(self, self, self.p.copy())

    def inner(self, x, y):
        return dagger(_mat(x)) @ _mat(y)


class ModuleElement:
    """A column ``x`` with ``p x = x``."""

    __slots__ = ("parent", "matrix")

    def __init__(self, parent, matrix, tol=None):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (parent.N, parent.base.d):
            raise InvalidShapeError(f"element of shape {matrix.shape} does not fit {parent}")
        tol = config.tol(tol)
        res = float(opnorm(parent.p @ matrix - matrix))
        if res > tol * (1.0 + float(opnorm(matrix))):
            raise InvalidShapeError(f"element is not in the range of p (residual {res:.3e})")
        self.parent = parent
        self.matrix = matrix

    def right_act(self, b):
        return ModuleElement(self.parent, self.matrix @ _mat(b))

    def inner(self, other):
        return dagger(self.matrix) @ _mat(other)

    def __add__(self, other):
        return ModuleElement(self.parent, self.matrix + _mat(other))

    def __sub__(self, other):
        return ModuleElement(self.parent, self.matrix - _mat(other))

    def __rmul__(self, scalar):
        return ModuleElement(self.parent, scalar * self.matrix)

    def __repr__(self):
        return f"ModuleElement({self.parent!r})"


class ModuleMap:
    """Adjointable map between projective modules over the same base."""

    __slots__ = ("source", "target", "matrix")

    def __init__(self, source, target, matrix, tol=None):
        if source.base != target.base:
            raise InvalidShapeError("module maps need a common base algebra")
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (target.N, source.N):
            raise InvalidShapeError(f"map of shape {matrix.shape} does not fit {source} -> {target}")
        tol = config.tol(tol)
        mask = over_mask(source.base, target.n, source.n)
        scale = 1.0 + float(opnorm(matrix))
        if np.abs(matrix[~mask]).max(initial=0.0) > tol * scale:
            raise InvalidShapeError("map has entries outside the algebra pattern")
        res = float(opnorm(target.p @ matrix @ source.p - matrix))
        if res > tol * scale:
            raise InvalidShapeError(f"map does not respect the module projections (residual {res:.3e})")
        self.source = source
        self.target = target
        self.matrix = np.where(mask, matrix, 0)

    def adjoint(self):
        return ModuleMap(self.target, self.source, dagger(self.matrix))

    def __call__(self, x):
        return ModuleElement(self.target, self.matrix @ _mat(x))

    def __matmul__(self, other):
        return ModuleMap(other.source, self.target, self.matrix @ other.matrix)

    def unitarity(self):
        """Residuals ``(|T*T - id|, |TT* - id|)``."""
        m = self.matrix
        return (float(opnorm(dagger(m) @ m - self.source.p)),
                float(opnorm(m @ dagger(m) - self.target.p)))

    def __repr__(self):
        return f"ModuleMap({self.source!r} -> {self.target!r})"


def _mat(x):
    if isinstance(x, (ModuleElement,)):
        return x.matrix
    return x.matrix if hasattr(x, "matrix") else np.asarray(x)


def free_module(B, n):
    if n < 1:
        raise InvalidShapeError(f"free module rank must be >= 1, got {n}")
    return ProjectiveModule(B, np.eye(n * B.d, dtype=complex))


def projective_module(B, p, tol=None):
    return ProjectiveModule(B, p, tol=tol)


def zero_module(B):
    return ProjectiveModule(B, np.zeros((B.d, B.d), dtype=complex))


def direct_sum_projection(*ps):
    """Block-diagonal stacking of projections (a direct sum of modules)."""
    size = sum(p.shape[0] for p in ps)
    out = np.zeros((size, size), dtype=complex)
    k = 0
    for p in ps:
        m = p.shape[0]
        out[k:k + m, k:k + m] = p
        k += m
    return out


class AbstractModule:
    """Semi-inner-product module ``(P, G)`` with ``<x, y> = x^* G y`` on ``P``.

    ``G`` is a positive element of ``B_B(P)``; right ``B``-linearity of the
    semi-inner product is automatic in this form.
    """

    def __init__(self, ambient, gram, tol=None):
        gram = np.asarray(gram, dtype=complex)
        if gram.shape != (ambient.N, ambient.N):
            raise InvalidShapeError(f"Gram operator of shape {gram.shape} does not fit {ambient}")
        tol = config.tol(tol)
        scale = 1.0 + float(opnorm(gram))
        res = float(opnorm(gram - dagger(gram)))
        if res > tol * scale:
            raise HermiticityError(res, "semi-inner product")
        evals = np.linalg.eigvalsh((gram + dagger(gram)) / 2)
        if evals.min() < -tol * scale:
            raise InvalidSemiInnerProductError(evals.min())
        self.ambient = ambient
        self.gram = (gram + dagger(gram)) / 2

    @property
    def base(self):
        return self.ambient.base

    @property
    def amb_dim(self):
        return self.ambient.dim

    def sip(self, x, y):
        return dagger(_mat(x)) @ self.gram @ _mat(y)

    def scalar_gram(self):
        """``H_ab = tau(<g_a, g_b>)`` over the ambient orthonormal basis."""
        g = self.ambient.basis
        return np.einsum("aij,ik,bkj->ab", g.conj(), self.gram, g)


@dataclass
class Realization:
    """Output of :func:`realize`.

    ``kappa`` maps ambient columns onto ``module`` and is isometric for the
    semi-inner product; ``section`` is a right inverse with
    ``kappa @ section = module.p``.
    """

    source: AbstractModule
    module: ProjectiveModule
    kappa: np.ndarray
    section: np.ndarray
    generators: list
    rank: int

    def quotient(self, x):
        return ModuleElement(self.module, self.kappa @ _mat(x))

    def lift(self, w):
        return self.section @ _mat(w)


def _greedy_generators(K, d, target_rank, cutoff, scale):
    """Indices of generator blocks whose columns reach ``target_rank``."""
    chosen = []
    basis = np.zeros((K.shape[0], 0), dtype=complex)
    thresh = cutoff * max(scale, 1.0)
    for i in range(K.shape[1] // d):
        if basis.shape[1] >= target_rank:
            break
        cols = K[:, i * d:(i + 1) * d]
        resid = cols - basis @ (dagger(basis) @ cols)
        u, s, _ = np.linalg.svd(resid, full_matrices=False)
        new = u[:, s ** 2 > thresh]
        if new.shape[1]:
            chosen.append(i)
            basis = np.hstack([basis, new])
            # re-orthonormalise to keep roundoff out of later projections
            basis, _ = np.linalg.qr(basis)
    return chosen


def realize(V, generators=None, cutoff=None, reduce=True):
    """Quotient ``V`` by its null space and realise the result as ``p B^m``.

    Follows the frame construction: with generators ``w_i`` of the
    quotient, the frame operator ``S = sum_i theta_{w_i, w_i}`` is inverted
    on the quotient, ``u_i = S^{-1/2} w_i`` is a normalised tight frame, the
    realised module has projection ``p = [<u_i, u_j>]`` and the quotient map
    is ``z -> (<u_i, z>)_i``.

    All computations go through ``G^{1/2}``, which identifies the quotient
    with the range of ``G``: there ``S`` becomes ``T = K K^*`` with
    ``K = G^{1/2} [w_1 ... w_m]``.
    """
    cutoff = config.cutoff(cutoff)
    B = V.base
    d = B.d
    G = V.gram
    g_half, r = hermitian_function(G, np.sqrt, cutoff)
    if r == 0:
        W = zero_module(B)
        return Realization(V, W, np.zeros((d, V.ambient.N), dtype=complex),
                           np.zeros((V.ambient.N, d), dtype=complex), [], 0)
    if generators is None:
        gens = V.ambient.frame
    else:
        gens = np.asarray([_mat(g) for g in generators])
        if gens.ndim != 3 or gens.shape[1:] != (V.ambient.N, d):
            raise InvalidShapeError("generators must be ambient elements")
    K_all = g_half @ np.concatenate(list(gens), axis=1)
    lam_max = float(np.linalg.eigvalsh(G).max())
    if reduce:
        chosen = _greedy_generators(K_all, d, r, cutoff, lam_max)
    else:
        chosen = list(range(len(gens)))
    if not chosen:
        raise GeneratorDeficiencyError("no generator has a nonzero image in the quotient")
    K = np.concatenate([K_all[:, i * d:(i + 1) * d] for i in chosen], axis=1)
    T = K @ dagger(K)
    evals, evecs = np.linalg.eigh((T + dagger(T)) / 2)
    keep = evals > cutoff * max(float(evals.max()), 1.0)
    if int(keep.sum()) != r or evals[keep].min() < config.FRAME_FLOOR:
        raise GeneratorDeficiencyError(
            f"frame operator has rank {int(keep.sum())} on a quotient of rank {r}")
    v, lam = evecs[:, keep], evals[keep]
    t_inv_half = (v / np.sqrt(lam)) @ dagger(v)
    t_inv = (v / lam) @ dagger(v)
    g_pinv_half = hermitian_function(G, lambda x: 1.0 / np.sqrt(x), cutoff)[0]
    p = dagger(K) @ t_inv @ K
    p = (p + dagger(p)) / 2
    W = ProjectiveModule(B, p)
    kappa = dagger(K) @ t_inv_half @ g_half
    section = g_pinv_half @ t_inv_half @ K
    mask = over_mask(B, W.n, V.ambient.n)
    kappa = np.where(mask, kappa, 0)
    section = np.where(mask.T, section, 0)
    return Realization(V, W, kappa, section, chosen, r)


def tight_frame(E, normalized=False):
    """A finite frame of ``E``.

    By default returns ``u_i = p e_i``, for which ``sum_i u_i <u_i, z> = z``.
    With ``normalized=True`` returns ``{u_j}`` with ``sum_j <u_j, u_j> = 1_B``
    instead (the fullness normalisation); this needs ``E`` to be full.
    """
    if E.is_zero:
        raise EmptyFrameError("the zero module has no frame")
    if not normalized:
        return [ModuleElement(E, u) for u in E.frame]
    b = E.basis
    F = np.einsum("kij,kil->jl", b.conj(), b)
    f_inv_half, r = hermitian_function(F, lambda x: 1.0 / np.sqrt(x))
    if r < E.base.d:
        raise GeneratorDeficiencyError("module is not full; no frame with sum <u, u> = 1 exists")
    return [ModuleElement(E, u @ f_inv_half) for u in b]


def frame_residuals(frame, normalized=False):
    """Reconstruction (or fullness) residual of a frame."""
    us = np.asarray([_mat(u) for u in frame])
    if normalized:
        B = frame[0].parent.base
        total = np.einsum("kij,kil->jl", us.conj(), us)
        return float(opnorm(total - B.unit_matrix))
    E = frame[0].parent
    S = np.einsum("kij,klj->il", us, us.conj())
    return float(opnorm(S - E.p))


class ModuleTensor:
    """Interior tensor product ``Y (x)_D F`` for ``Y = p D^n`` and ``pi_D`` on ``F``.

    ``D^n (x)_D F`` is identified with ``F^n`` through
    ``(y_i) (x) f -> (pi_D(y_i) f)``; the tensor product is then the range of
    the projection ``pi_D^{(n)}(p)``, re-realised with as few generators as
    possible.
    """

    def __init__(self, Y, F, table, cutoff=None):
        D = Y.base
        if table.shape != (D.vs_dim, F.N, F.N):
            raise InvalidShapeError("representation table does not match the modules")
        self.left = Y
        self.right = F
        self.table = table
        ambient = ProjectiveModule(F.base, np.kron(np.eye(Y.n), F.p))
        gram = amplify(table, D, Y.p)
        self.realization = realize(AbstractModule(ambient, gram), cutoff=cutoff)
        self.module = self.realization.module
        self.kappa = self.realization.kappa
        self.section = self.realization.section

    def embed(self, y, f):
        """The simple tensor ``y (x) f`` as an element matrix."""
        return self.kappa @ amplify(self.table, self.left.base, _mat(y)) @ _mat(f)

    def embed_operator(self, y):
        """The map ``f -> y (x) f`` from ``F`` to the tensor product."""
        return self.kappa @ amplify(self.table, self.left.base, _mat(y))

    def op(self, T):
        """``T (x) id_F`` for ``T`` in ``B_D(Y)``."""
        return self.kappa @ amplify(self.table, self.left.base, _mat(T)) @ self.section

    def map_from(self, other, T):
        """``T (x) id_F`` for ``T: other.left -> self.left``."""
        return self.kappa @ amplify(self.table, self.left.base, _mat(T)) @ other.section


def interior_tensor(Y, F, table, cutoff=None):
    """Realise ``Y (x)_D F``; returns a :class:`ModuleTensor`."""
    return ModuleTensor(Y, F, np.asarray(table), cutoff=cutoff)


def dual_module(X):
    """Freshly realised dual ``B``-``A`` bimodule of an ``A``-``B`` bimodule."""
    from .bimodule import realize_dual
    return realize_dual(X)


def cauchy_schwarz_gap(E, x, y):
    """``|x||y| - |<x, y>|``; nonnegative up to roundoff."""
    x, y = _mat(x), _mat(y)
    nx = np.sqrt(max_opnorm(dagger(x) @ x))
    ny = np.sqrt(max_opnorm(dagger(y) @ y))
    return nx * ny - max_opnorm(dagger(x) @ y)


__all__ = [
    "AbstractModule", "ModuleElement", "ModuleMap", "ModuleTensor", "ProjectiveModule",
    "Realization", "amplify", "block_indices", "cauchy_schwarz_gap", "column_rank",
    "direct_sum_projection", "dual_module", "frame_residuals", "free_module",
    "interior_tensor", "over_mask", "projective_module", "psd_rank", "realize",
    "slot_generators", "tight_frame", "zero_module",
]
