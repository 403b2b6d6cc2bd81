"""GNS correspondences of CP maps and their strong Morita equivalence.

For a CP map ``phi: C -> A`` the correspondence ``E_phi`` is the KSGNS
module of ``phi`` viewed as a map into ``B_A(A)``, with ``C`` acting on the
left. Given an ``A``-``B`` equivalence bimodule ``X`` and a ``C``-``D``
equivalence bimodule ``Y``, an equivalence of ``E_phi`` and ``E_psi`` is a
unitary ``C``-``B`` bimodule map ``E_phi (x)_A X -> Y (x)_D E_psi``. This
module builds the two isomorphisms onto ``E_{phi_T}`` that connect such an
equivalence with a witness between the dilations of ``phi_T`` and ``psi``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import config
from ._linalg import column_rank, dagger, relative, solve_map
from .bimodule import apply_table, matrix_column_bimodule, multiplicativity_residual
from .certificate import Certificate, merge
from .cpmap import CPMap, induce_cp_map, ksgns, ksgns_unitary
from .errors import AlgebraMismatchError, InvalidShapeError, PreconditionError
from .hilbmod import ModuleTensor, free_module, over_mask
from .representation import SMEWitness, verify_sme_witness


@dataclass
class Correspondence:
    """A ``C``-``A`` correspondence: a right ``A``-module with a left ``C`` action."""

    left_alg: object
    right_alg: object
    module: object
    left_action: np.ndarray
    tensor: ModuleTensor = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.left_action = np.asarray(self.left_action, dtype=complex)
        if self.left_action.shape != (self.left_alg.vs_dim, self.module.N, self.module.N):
            raise InvalidShapeError("left action table does not fit the module")

    @property
    def dim(self):
        return self.module.dim

    def act(self, c):
        return apply_table(self.left_action, self.left_alg, c)

    def validate(self, tol=None):
        tol = config.tol(tol)
        L, E = self.left_action, self.module
        mask = over_mask(E.base, E.n, E.n)
        conds = {
            "multiplicative": multiplicativity_residual(L, self.left_alg),
            "star": relative(L[self.left_alg.star_perm] - dagger(L), L),
            "adjointable": relative(np.where(mask, 0, L), L) + relative(E.p @ L @ E.p - L, L),
        }
        return Certificate("correspondence", conds, tol)


def _as_algebra_map(phi):
    """``phi`` as a CP map into ``B_A(A)``; accepts a :class:`CPMap` on ``A^1``."""
    if phi.module.n != 1 or column_rank(phi.module.p) != phi.base.d:
        raise PreconditionError("GNS correspondences need a CP map into the algebra itself")
    return phi


def cp_into_algebra(C, A, table):
    """A CP map ``C -> A`` given by the values on the basis of ``C``."""
    return CPMap(C, free_module(A, 1), table)


def gns_correspondence(phi):
    """``E_phi``: the KSGNS module of ``phi`` with the left action of ``C``."""
    return dilation_correspondence(_as_algebra_map(phi))


def dilation_correspondence(phi):
    """The ``C``-``B`` correspondence of the minimal dilation of ``phi: C -> B_B(F)``."""
    k = ksgns(phi)
    return Correspondence(phi.source, phi.base, k.module, k.rep.table, info={"dilation": k})


def corner_transport(phi, X):
    """``phi_T = T o phi`` with ``T_a(x) = a . x``, a CP map into ``B_B(X)``."""
    phi = _as_algebra_map(phi)
    if X.left_alg != phi.base:
        raise AlgebraMismatchError("bimodule left algebra must be the target of the CP map")
    return CPMap(phi.source, X.carrier, X.left_action(phi.table))


def corner_untransport(phi_T, X):
    """``T^{-1} o phi_T``, a CP map into the left algebra of ``X``."""
    table = X.left_iso_inverse(phi_T.table)
    return cp_into_algebra(phi_T.source, X.left_alg, table)


def tensor_right(E, X):
    """``E (x)_A X`` as a correspondence."""
    T = ModuleTensor(E.module, X.carrier, X.left_iso)
    action = np.array([T.op(op) for op in E.left_action])
    return Correspondence(E.left_alg, X.right_alg, T.module, action, tensor=T)


def tensor_left(Y, E):
    """``Y (x)_D E`` as a correspondence."""
    T = ModuleTensor(Y.carrier, E.module, E.left_action)
    action = np.array([T.op(op) for op in Y.left_iso])
    return Correspondence(Y.left_alg, E.right_alg, T.module, action, tensor=T)


@dataclass
class CorrespondenceIso:
    """A linear map between correspondences with its checks."""

    source: Correspondence
    target: Correspondence
    matrix: np.ndarray
    inverse: np.ndarray = None
    info: dict = field(default_factory=dict)

    def verify(self, tol=None):
        return iso_certificate(self.source, self.target, self.matrix, tol)


def iso_certificate(source, target, M, tol=None):
    """Bimodule property, inner-product preservation and surjectivity of ``M``."""
    tol = config.tol(tol)
    S, T = source.module, target.module
    if M.shape != (T.N, S.N):
        raise InvalidShapeError(f"map of shape {M.shape} does not fit {S} -> {T}")
    if source.left_alg != target.left_alg or S.base != T.base:
        raise AlgebraMismatchError("correspondences have different coefficient algebras")
    if S.is_zero and T.is_zero:
        return Certificate("correspondence_iso", {"cond1_left_linear": 0.0, "cond1_right_linear": 0.0,
                                                  "cond2_inner": 0.0, "surjective": 0.0}, tol)
    lhs = M @ source.left_action
    rhs = target.left_action @ M
    mask = over_mask(S.base, T.n, S.n)
    conds = {
        "cond1_left_linear": relative(lhs - rhs, rhs),
        "cond1_right_linear": relative(np.where(mask, 0, M), M) + relative(T.p @ M @ S.p - M, M),
        "cond2_inner": relative(dagger(M) @ M - S.p, S.p),
        "surjective": float(abs(column_rank(T.p) - column_rank(M))) if T.rank else 0.0,
    }
    return Certificate("correspondence_iso", conds, tol)


def verify_correspondence_sme(E_phi, E_psi, Y, X, M, tol=None):
    """Check ``M: E_phi (x)_A X -> Y (x)_D E_psi`` as an equivalence of correspondences."""
    if E_phi.right_alg != X.left_alg or E_psi.left_alg != Y.right_alg:
        raise AlgebraMismatchError("bimodules do not match the correspondences")
    source = tensor_right(E_phi, X)
    target = tensor_left(Y, E_psi)
    cert = iso_certificate(source, target, np.asarray(M), tol)
    cert.name = "correspondence_sme"
    return cert


def _dilation(E):
    return E.info["dilation"]


def psi_iso(phi, X, tol=None):
    """``Psi: (c (x) a) (x) x -> c (x) a x`` from ``E_phi (x)_A X`` onto ``E_{phi_T}``.

    The inverse is fitted independently from
    ``c (x) x -> sum_j c (x) _A<x, v_j> (x) v_j`` with ``sum_j <v_j, v_j> = 1``.
    """
    tol = config.tol(tol)
    E_phi = gns_correspondence(phi)
    phi_T = corner_transport(phi, X)
    E_T = dilation_correspondence(phi_T)
    source = tensor_right(E_phi, X)
    k, kT = _dilation(E_phi), _dilation(E_T)
    T = source.tensor
    C = phi.source
    # (c (x) a) (x) x = (c (x) 1) (x) a x, so a = 1 and a complex basis of X suffice
    ins, outs = [], []
    for a in range(C.vs_dim):
        cV = k.rep.table[a] @ k.V
        cVT = kT.rep.table[a] @ kT.V
        for x in X.carrier.basis:
            ins.append(T.embed(cV, x))
            outs.append(cVT @ x)
    M, fit = solve_map(np.concatenate(ins, axis=1), np.concatenate(outs, axis=1))
    vs = np.asarray([v.matrix for v in X.right_basis()])
    ins, outs = [], []
    for a in range(C.vs_dim):
        cV = k.rep.table[a] @ k.V
        cVT = kT.rep.table[a] @ kT.V
        for x in X.carrier.basis:
            coeffs = X.left_inner(x, vs)
            ins.append(cVT @ x)
            outs.append(sum(T.embed(cV @ ax, v) for ax, v in zip(coeffs, vs)))
    Minv, fit_inv = solve_map(np.concatenate(ins, axis=1), np.concatenate(outs, axis=1))
    M = E_T.module.p @ M @ source.module.p
    Minv = source.module.p @ Minv @ E_T.module.p
    info = {
        "fit": fit,
        "inverse_fit": fit_inv,
        "psi_psi_inv": relative(M @ Minv - E_T.module.p, E_T.module.p),
        "psi_inv_psi": relative(Minv @ M - source.module.p, source.module.p),
    }
    return CorrespondenceIso(source, E_T, M, Minv, info)


def phi_iso(w, tol=None):
    """``Phi: y (x) xi -> pi_Y(y) xi`` from ``Y (x)_D E_psi`` onto ``E_{phi_T}``.

    ``w`` is a witness between the dilation representations of ``phi_T``
    (left) and ``psi`` (right).
    """
    tol = config.tol(tol)
    cert = verify_sme_witness(w, tol)
    if not cert.passed:
        raise PreconditionError(f"witness fails: {', '.join(cert.failing())}")
    Y = w.bimodule
    E_psi = Correspondence(w.right_rep.alg, w.right_rep.base, w.right_rep.module, w.right_rep.table)
    E_T = Correspondence(w.left_rep.alg, w.left_rep.base, w.left_rep.module, w.left_rep.table)
    source = tensor_left(Y, E_psi)
    T = source.tensor
    ins, outs = [], []
    for y, piy in zip(Y.carrier.basis, w.table):
        for xi in E_psi.module.frame:
            ins.append(T.embed(y, xi))
            outs.append(piy @ xi)
    if ins:
        M, fit = solve_map(np.concatenate(ins, axis=1), np.concatenate(outs, axis=1))
    else:
        M, fit = np.zeros((E_T.module.N, source.module.N), dtype=complex), 0.0
    M = E_T.module.p @ M @ source.module.p
    return CorrespondenceIso(source, E_T, M, dagger(M), {"fit": fit, "bimodule": Y})


def witness_from_iso(iso, Y, right_rep, left_rep):
    """``pi_Y(y) xi = Phi(y (x) xi)`` for ``Phi: Y (x)_D E_psi -> E_{phi_T}``."""
    T = iso.source.tensor
    table = np.array([iso.matrix @ T.embed_operator(y) for y in Y.carrier.basis])
    return SMEWitness(left_rep, right_rep, Y, table)


def sme_from_cp_witness(phi, X, w, tol=None):
    """From ``phi_T ~ psi`` (witness ``w``) to ``M = Phi^* Psi: E_phi (x) X -> Y (x) E_psi``."""
    P = psi_iso(phi, X, tol)
    F = phi_iso(w, tol)
    return F.matrix.conj().T @ P.matrix, P, F


def cp_witness_from_sme(phi, X, Y, psi_rep, M, tol=None):
    """From ``M: E_phi (x) X -> Y (x) E_psi`` to a witness ``phi_T ~ psi`` over ``Y``.

    Uses ``Phi = Psi o M^*`` from ``Y (x) E_psi`` onto ``E_{phi_T}``.
    """
    P = psi_iso(phi, X, tol)
    E_psi = Correspondence(psi_rep.alg, psi_rep.base, psi_rep.module, psi_rep.table)
    source = tensor_left(Y, E_psi)
    iso = CorrespondenceIso(source, P.target, P.matrix @ dagger(np.asarray(M)))
    return witness_from_iso(iso, Y, psi_rep, _dilation(P.target).rep)


def example_gns5(psi, Y, tol=None):
    """Run the full pipeline for ``psi: D -> B`` and a ``C``-``D`` bimodule ``Y``.

    Induce ``psi`` (viewed in ``B_B(B)``) along ``Y`` to ``phi_T`` on ``B^n``,
    set ``phi = T^{-1} o phi_T`` with ``T`` the action of ``B (x) M_n`` on the
    bimodule ``B^n``, and certify that ``E_phi`` and ``E_psi`` are equivalent
    correspondences. Returns ``(certificate, data)``.
    """
    tol = config.tol(tol)
    psi = _as_algebra_map(psi)
    ind = induce_cp_map(psi, Y, tol=tol)
    n = ind.phi.module.n
    X = matrix_column_bimodule(psi.base, n)
    phi = corner_untransport(ind.phi, X)
    phi_T = corner_transport(phi, X)
    k_T = ksgns(phi_T)
    U, ucert = ksgns_unitary(ind.dilation_phi, k_T, tol)
    w = SMEWitness(k_T.rep, ind.dilation_psi.rep, Y, U.matrix @ ind.witness.table)
    wcert = verify_sme_witness(w, tol)

    M, P, F = sme_from_cp_witness(phi, X, w, tol)
    E_phi = gns_correspondence(phi)
    E_psi = gns_correspondence(psi)
    scert = verify_correspondence_sme(E_phi, E_psi, Y, X, M, tol)

    back = cp_witness_from_sme(phi, X, Y, ind.dilation_psi.rep, M, tol)
    bcert = verify_sme_witness(back, tol)
    agree = relative(back.table - w.table, w.table)
    pcert = Certificate("psi_iso", {k: P.info[k] for k in ("psi_psi_inv", "psi_inv_psi")},
                        tol, info={"fit": P.info["fit"]})
    pcert.conditions.update({f"map.{k}": v for k, v in P.verify(tol).conditions.items()})
    fcert = F.verify(tol)
    fcert.name = "phi_iso"
    rcert = Certificate("witness_roundtrip", {"agreement": agree}, tol)
    bcert.name = "recovered_witness"
    ind.certificate.name = "induce_cp_map"
    cert = merge("example_gns5", [ind.certificate, ucert, wcert, pcert, fcert, scert, bcert, rcert],
                 info={"n": n, "dim_E_phi": E_phi.dim, "dim_E_psi": E_psi.dim})
    data = {"induced": ind, "X": X, "phi": phi, "phi_T": phi_T, "witness": w, "map": M,
            "psi_iso": P, "phi_iso": F, "E_phi": E_phi, "E_psi": E_psi}
    return cert, data
