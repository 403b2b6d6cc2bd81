"""Representations on Hilbert modules and strong Morita equivalence witnesses.

A representation of ``C`` on ``E = p B^n`` is stored as the table of the
operators ``pi(e_alpha)`` on the matrix-unit basis of ``C``. A witness that
``(pi_C, E)`` and ``(pi_D, F)`` are strongly Morita equivalent over a
``C``-``D`` bimodule ``Y`` is the table of ``pi_Y`` on the orthonormal basis
of ``Y``; it must satisfy

* ``pi_Y(y) pi_Y(z)^* = pi_C(_C<y, z>)``,
* ``pi_Y(y)^* pi_Y(z) = pi_D(<y, z>_D)``,
* ``pi_Y(c . y . d) = pi_C(c) pi_Y(y) pi_D(d)``.
"""

import numpy as np

from . import config
from ._linalg import column_rank, dagger, max_opnorm, relative, solve_map
from .bimodule import (
    TensorBimodule,
    apply_table,
    dual_bimodule,
    dual_pair,
    multiplicativity_residual,
    trivial_bimodule,
)
from .certificate import Certificate
from .errors import (
    AlgebraMismatchError,
    HomomorphismError,
    InvalidShapeError,
    NondegeneracyError,
    PreconditionError,
)
from .hilbmod import ModuleTensor, over_mask, tight_frame


def _mat(x):
    return x.matrix if hasattr(x, "matrix") else np.asarray(x)


class Representation:
    """A unital *-representation ``pi: C -> B_B(E)``.

    Args:
        alg: the represented algebra ``C``.
        module: the projective module ``E``.
        table: array ``(C.vs_dim, N, N)`` with ``pi(e_alpha)``.
        tensor: optional :class:`ModuleTensor` that produced ``module``.
    """

    def __init__(self, alg, module, table, tensor=None, validate=True, tol=None):
        table = np.asarray(table, dtype=complex)
        if table.shape != (alg.vs_dim, module.N, module.N):
            raise InvalidShapeError(f"representation table of shape {table.shape} does not fit")
        self.alg = alg
        self.module = module
        self.table = table
        self.tensor = tensor
        self.certificate = None
        if validate:
            cert = self.validate(tol)
            self.certificate = cert
            for key in ("multiplicative", "star", "module_maps"):
                if cert.conditions[key] > cert.tol:
                    raise HomomorphismError(key, cert.conditions[key])
            for key in ("unital", "nondegenerate"):
                if cert.conditions[key] > cert.tol:
                    raise NondegeneracyError(key, cert.conditions[key])

    def __repr__(self):
        return f"Representation({self.alg!r} on {self.module!r})"

    @property
    def base(self):
        return self.module.base

    def __call__(self, c):
        return apply_table(self.table, self.alg, _mat(c))

    def validate(self, tol=None):
        tol = config.tol(tol)
        C, E, P = self.alg, self.module, self.table
        conds = {}
        conds["multiplicative"] = multiplicativity_residual(P, C)
        conds["star"] = relative(P[C.star_perm] - dagger(P), P)
        mask = over_mask(E.base, E.n, E.n)
        conds["module_maps"] = relative(np.where(mask, 0, P), P) + relative(E.p @ P @ E.p - P, P)
        conds["unital"] = relative(self(C.unit_matrix) - E.p, E.p)
        span = column_rank(np.concatenate(list(P), axis=1)) if E.rank else 0
        conds["nondegenerate"] = float(abs(column_rank(E.p) - span)) if E.rank else 0.0
        return Certificate("representation", conds, tol)


def make_representation(C, E, table, tol=None):
    return Representation(C, E, table, tol=tol)


class SMEWitness:
    """``pi_Y`` with ``(pi_C, E) ~ (pi_D, F)`` over the ``C``-``D`` bimodule ``Y``.

    ``table[k]`` is ``pi_Y(y_k)`` for the orthonormal basis ``y_k`` of ``Y``.
    """

    def __init__(self, left_rep, right_rep, bimodule, table, info=None):
        table = np.asarray(table, dtype=complex)
        shape = (bimodule.dim, left_rep.module.N, right_rep.module.N)
        if table.shape != shape:
            raise InvalidShapeError(f"witness table of shape {table.shape}, expected {shape}")
        if left_rep.alg != bimodule.left_alg or right_rep.alg != bimodule.right_alg:
            raise AlgebraMismatchError("bimodule does not connect the represented algebras")
        if left_rep.base != right_rep.base:
            raise AlgebraMismatchError("representations act on modules over different algebras")
        self.left_rep = left_rep
        self.right_rep = right_rep
        self.bimodule = bimodule
        self.table = table
        self.info = info or {}

    def __repr__(self):
        return f"SMEWitness({self.left_rep.alg!r} ~ {self.right_rep.alg!r} over {self.bimodule!r})"

    def __call__(self, y):
        """``pi_Y(y)``; broadcasts over stacks of elements."""
        c = self.bimodule.carrier.coords(_mat(y))
        return np.tensordot(c, self.table, axes=(-1, 0))

    def scaled(self, factor):
        return SMEWitness(self.left_rep, self.right_rep, self.bimodule, factor * self.table, self.info)

    def verify(self, tol=None):
        return verify_sme_witness(self, tol)


def verify_sme_witness(w, tol=None):
    """Residuals of the three witness identities on basis tuples."""
    tol = config.tol(tol)
    Y = w.bimodule
    piC, piD = w.left_rep, w.right_rep
    if Y.dim == 0 or w.left_rep.module.rank == 0 and w.right_rep.module.rank == 0:
        return Certificate("sme_witness", {k: 0.0 for k in _WITNESS_KEYS}, tol)
    ys = Y.carrier.basis
    P = w.table
    conds, absolute = {}, {}

    lhs = P[:, None] @ dagger(P)[None, :]
    rhs = piC(Y.left_inner(ys[:, None], ys[None, :]))
    conds["cond1_left_inner"] = relative(lhs - rhs, rhs)
    absolute["cond1_left_inner"] = max_opnorm(lhs - rhs)

    lhs = dagger(P)[:, None] @ P[None, :]
    rhs = piD(dagger(ys)[:, None] @ ys[None, :])
    conds["cond2_right_inner"] = relative(lhs - rhs, rhs)
    absolute["cond2_right_inner"] = max_opnorm(lhs - rhs)

    C, D = Y.left_alg, Y.right_alg
    cy = np.einsum("aij,kjm->akim", Y.left_iso, ys)
    lhs = w(cy)
    rhs = piC.table[:, None] @ P[None, :]
    conds["cond3_left_covariance"] = relative(lhs - rhs, rhs)
    absolute["cond3_left_covariance"] = max_opnorm(lhs - rhs)

    yd = ys[:, None] @ D.basis_matrices[None, :]
    lhs = w(yd)
    rhs = P[:, None] @ piD.table[None, :]
    conds["cond3_right_covariance"] = relative(lhs - rhs, rhs)
    absolute["cond3_right_covariance"] = max_opnorm(lhs - rhs)

    E, F = piC.module, piD.module
    mask = over_mask(E.base, E.n, F.n)
    conds["module_maps"] = relative(np.where(mask, 0, P), P) + relative(E.p @ P @ F.p - P, P)
    return Certificate("sme_witness", conds, tol, absolute,
                       info={"left": list(C.block_dims), "right": list(D.block_dims), "dim": Y.dim})


_WITNESS_KEYS = ("cond1_left_inner", "cond2_right_inner", "cond3_left_covariance",
                 "cond3_right_covariance", "module_maps")


def _require(w, tol=None):
    cert = verify_sme_witness(w, tol)
    if not cert.passed:
        raise PreconditionError(f"input witness fails: {', '.join(cert.failing())}")


def witness_reflexive(rep):
    """``pi_{Y_0} = pi_C`` over ``C`` viewed as a bimodule over itself."""
    Y0 = trivial_bimodule(rep.alg)
    return SMEWitness(rep, rep, Y0, rep(Y0.carrier.basis))


def witness_dual(w, check=True):
    """``pi_{Y~}(y~) = pi_Y(y)^*`` over the dual bimodule."""
    if check:
        _require(w)
    Yt, _, back = dual_pair(w.bimodule)
    table = dagger(w(back(Yt.carrier.basis)))
    return SMEWitness(w.right_rep, w.left_rep, Yt, table)


def _same_rep(r1, r2, tol):
    if r1.alg != r2.alg or r1.module.N != r2.module.N:
        return False
    diff = relative(r1.module.p - r2.module.p, r1.module.p) + relative(r1.table - r2.table, r1.table)
    return diff <= tol


def _solve_table(bimodule, samples, values):
    """Table of a linear map on ``bimodule`` from its values on samples."""
    coords = bimodule.carrier.coords(samples).reshape(-1, bimodule.dim)
    vals = values.reshape(coords.shape[0], -1)
    table = np.linalg.pinv(coords, rcond=1e-10) @ vals
    resid = relative((coords @ table - vals)[:, None, :], vals[:, None, :])
    return table.reshape((bimodule.dim,) + values.shape[-2:]), resid


def witness_compose(w1, w2, check=True, tol=None):
    """``pi_{Y (x) W}(y (x) w) = pi_Y(y) pi_W(w)``."""
    tol = config.tol(tol)
    if not _same_rep(w1.right_rep, w2.left_rep, tol):
        raise PreconditionError("middle representations of the witnesses differ")
    if check:
        _require(w1, tol)
        _require(w2, tol)
    YW = TensorBimodule(w1.bimodule, w2.bimodule)
    ys, ws = w1.bimodule.carrier.basis, w2.bimodule.carrier.basis
    samples = np.array([[YW.embed(y, z) for z in ws] for y in ys])
    values = w1.table[:, None] @ w2.table[None, :]
    table, resid = _solve_table(YW, samples, values)
    return SMEWitness(w1.left_rep, w2.right_rep, YW, table, info={"fit_residual": resid})


def witness_from_unitary(rep1, rep2, u, tol=None):
    """``pi_{Y_0}(y) = pi_1(y) u^*`` for a unitary ``u`` with ``pi_2 = u pi_1 u^*``."""
    tol = config.tol(tol)
    u = _mat(u)
    E1, E2 = rep1.module, rep2.module
    if u.shape != (E2.N, E1.N):
        raise InvalidShapeError(f"unitary of shape {u.shape} does not map {E1} to {E2}")
    iso = max(relative(dagger(u) @ u - E1.p, E1.p), relative(u @ dagger(u) - E2.p, E2.p))
    if iso > tol:
        raise PreconditionError(f"u is not unitary (residual {iso:.3e})")
    inter = relative(rep2.table - u @ rep1.table @ dagger(u), rep2.table)
    if inter > tol:
        raise PreconditionError(f"u does not intertwine the representations (residual {inter:.3e})")
    Y0 = trivial_bimodule(rep1.alg)
    return SMEWitness(rep1, rep2, Y0, rep1(Y0.carrier.basis) @ dagger(u))


def induce_representation(rep, Y):
    """Induce ``(pi_D, F)`` along the ``C``-``D`` bimodule ``Y``.

    Returns the representation ``c (y (x) f) = (c y) (x) f`` on ``Y (x)_D F``
    and the witness ``pi_Y(y) f = y (x) f``.
    """
    if rep.alg != Y.right_alg:
        raise AlgebraMismatchError("bimodule right algebra must be the represented algebra")
    T = ModuleTensor(Y.carrier, rep.module, rep.table)
    table = np.array([T.op(op) for op in Y.left_iso])
    induced = Representation(Y.left_alg, T.module, table, tensor=T)
    piY = np.array([T.embed_operator(y) for y in Y.carrier.basis])
    return induced, SMEWitness(induced, rep, Y, piY)


def tensor_representation(rep, Z):
    """``pi^Z(c)(f (x) z) = pi(c) f (x) z`` on ``F (x)_B Z``."""
    if rep.base != Z.left_alg:
        raise AlgebraMismatchError("bimodule left algebra must be the module's base")
    T = ModuleTensor(rep.module, Z.carrier, Z.left_iso)
    table = np.array([T.op(op) for op in rep.table])
    return Representation(rep.alg, T.module, table, tensor=T)


def witness_tensor(w, Z, check=True):
    """Transport a witness along ``Z``: ``pi_Y^Z(y) = pi_Y(y) (x) id_Z``."""
    if check:
        _require(w)
    left = tensor_representation(w.left_rep, Z)
    right = tensor_representation(w.right_rep, Z)
    TE, TF = left.tensor, right.tensor
    table = np.array([TE.map_from(TF, op) for op in w.table])
    return SMEWitness(left, right, w.bimodule, table)


def witness_roundtrip(rep, Z, tol=None):
    """Witness ``(pi, E) ~ ((pi^{Z~})^Z, E (x) Z~ (x) Z)`` over ``C`` itself.

    ``pi_{Y_0}(y)(e (x) z~ (x) z_1) = pi(y)(e <z, z_1>_A)``; the unitary
    ``Omega: e (x) z~ (x) z_1 -> e <z, z_1>`` is fitted on generators.
    ``info["adjoint_formula"]`` compares ``Omega^*`` with
    ``e -> sum_i e (x) u_i~ (x) u_i`` for a frame with ``sum <u_i, u_i> = 1``.
    """
    tol = config.tol(tol)
    if rep.base != Z.right_alg:
        raise AlgebraMismatchError("bimodule right algebra must be the module's base")
    Zt, tilde, _ = dual_pair(Z)
    first = tensor_representation(rep, Zt)
    second = tensor_representation(first, Z)
    T1, T2 = first.tensor, second.tensor
    E = rep.module
    if E.is_zero or second.module.is_zero:
        omega = np.zeros((E.N, second.module.N), dtype=complex)
        info = {"fit_residual": 0.0, "adjoint_formula": 0.0}
    else:
        es = E.frame
        zs = Z.carrier.basis
        z1s = Z.carrier.frame
        zts = tilde(zs)
        ins, outs = [], []
        for e in es:
            for z, zt in zip(zs, zts):
                ez = T1.embed(e, zt)
                for z1 in z1s:
                    ins.append(T2.embed(ez, z1))
                    outs.append(e @ (dagger(z) @ z1))
        omega, fit = solve_map(np.concatenate(ins, axis=1), np.concatenate(outs, axis=1))
        us = np.asarray([u.matrix for u in tight_frame(Z.carrier, normalized=True)])
        uts = tilde(us)
        adj = np.zeros((second.module.N, E.N), dtype=complex)
        # the formula is A-linear in e, so it suffices on the generators of E
        gens = E.frame
        ins2, outs2 = [], []
        for e in gens:
            total = sum(T2.embed(T1.embed(e, ut), u) for u, ut in zip(us, uts))
            ins2.append(e)
            outs2.append(total)
        adj, _ = solve_map(np.concatenate(ins2, axis=1), np.concatenate(outs2, axis=1))
        info = {"fit_residual": fit,
                "adjoint_formula": relative(adj - dagger(omega), omega)}
    Y0 = trivial_bimodule(rep.alg)
    table = rep(Y0.carrier.basis) @ omega
    return SMEWitness(rep, second, Y0, table, info=info)


def roundtrip_unitarity(w):
    """``(|Omega^* Omega - p|, |Omega Omega^* - p|)`` for a roundtrip witness."""
    rep, second = w.left_rep, w.right_rep
    omega = rep.module.p @ w(w.bimodule.left_alg.unit_matrix)
    return (relative(dagger(omega) @ omega - second.module.p, second.module.p),
            relative(omega @ dagger(omega) - rep.module.p, rep.module.p))
