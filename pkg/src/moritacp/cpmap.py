"""Completely positive maps into adjointable operators and their dilations.

A CP map ``psi: D -> B_B(F)`` is stored as the table of ``psi(e_alpha)``.
Its KSGNS dilation is built on ``F^{vs_dim}``, one copy of ``F`` for each
matrix unit of ``D``: ``d (x) f`` has components ``d_alpha f`` and the
semi-inner product is the block Gram ``[psi(e_alpha^* e_beta)]``. The
quotient is realised with :func:`realize`, ``pi(d)`` is left multiplication
by ``d`` on the ``D`` factor and ``V f = [1 (x) f]``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import config
from ._linalg import column_rank, dagger, max_opnorm, relative, solve_map
from .bimodule import apply_table, dual_bimodule, left_frame_residual, right_frame_residual
from .certificate import Certificate, merge
from .errors import (
    HermiticityError,
    InvalidShapeError,
    NotCompletelyPositiveError,
    PreconditionError,
    RankMismatchError,
)
from .hilbmod import (
    AbstractModule,
    ModuleMap,
    ModuleTensor,
    ProjectiveModule,
    over_mask,
    realize,
    tight_frame,
)
from .representation import (
    Representation,
    SMEWitness,
    induce_representation,
    tensor_representation,
    verify_sme_witness,
    witness_compose,
    witness_dual,
    witness_from_unitary,
    witness_roundtrip,
    witness_tensor,
)


def _mat(x):
    return x.matrix if hasattr(x, "matrix") else np.asarray(x)


def block_gram(table, alg):
    """The complex matrix ``[phi(e_alpha^* e_beta)]_{alpha, beta}``."""
    prods = alg.coords(dagger(alg.basis_matrices)[:, None] @ alg.basis_matrices[None, :])
    blocks = np.tensordot(prods, table, axes=(-1, 0))  # (vs, vs, N, N)
    vs, N = alg.vs_dim, table.shape[-1]
    return blocks.transpose(0, 2, 1, 3).reshape(vs * N, vs * N)


def unit_grams(table, alg):
    """``[phi(e_jl)]_{j,l}`` for each block; the block Gram is ``n_t`` copies of each."""
    N = table.shape[-1]
    out, k = [], 0
    for nt in alg.block_dims:
        units = table[k:k + nt * nt].reshape(nt, nt, N, N)
        out.append(units.transpose(0, 2, 1, 3).reshape(nt * N, nt * N))
        k += nt * nt
    return out


class CPMap:
    """A completely positive map ``C -> B_B(F)``.

    Raises :class:`NotCompletelyPositiveError` when the block Gram matrix
    has an eigenvalue below ``-tol (1 + |Gram|)``.
    """

    def __init__(self, source, module, table, validate=True, tol=None):
        table = np.asarray(table, dtype=complex)
        if table.shape != (source.vs_dim, module.N, module.N):
            raise InvalidShapeError(f"CP map table of shape {table.shape} does not fit")
        self.source = source
        self.module = module
        self.table = table
        self.certificate = None
        if validate:
            cert = self.validate(tol)
            self.certificate = cert
            if cert.conditions["hermitian"] > cert.tol:
                raise HermiticityError(cert.conditions["hermitian"], "CP map")
            if cert.conditions["module_maps"] > cert.tol:
                raise InvalidShapeError("CP map values are not adjointable maps on the module")
            if cert.conditions["positivity"] > cert.tol:
                raise NotCompletelyPositiveError(cert.info["min_eig"])

    def __repr__(self):
        return f"CPMap({self.source!r} -> B({self.module!r}))"

    @property
    def base(self):
        return self.module.base

    def __call__(self, c):
        return apply_table(self.table, self.source, _mat(c))

    def gram(self):
        return block_gram(self.table, self.source)

    def validate(self, tol=None):
        tol = config.tol(tol)
        C, F, P = self.source, self.module, self.table
        conds = {"hermitian": relative(P[C.star_perm] - dagger(P), P)}
        mask = over_mask(F.base, F.n, F.n)
        conds["module_maps"] = relative(np.where(mask, 0, P), P) + relative(F.p @ P @ F.p - P, P)
        evals = np.concatenate([np.linalg.eigvalsh((G + dagger(G)) / 2)
                                for G in unit_grams(P, C)])
        scale = 1.0 + float(np.abs(evals).max(initial=0.0))
        min_eig = float(evals.min(initial=0.0))
        conds["positivity"] = max(0.0, -min_eig) / scale
        return Certificate("cp_map", conds, tol, info={"min_eig": min_eig})


def make_cp_map(C, F, table, tol=None):
    return CPMap(C, F, table, tol=tol)


@dataclass
class KSGNSDilation:
    """``(pi, V, module)`` with ``of(d) = V^* pi(d) V``."""

    rep: Representation
    V: np.ndarray
    of: CPMap
    info: dict = field(default_factory=dict)

    @property
    def module(self):
        return self.rep.module

    def generators(self):
        """Columns of ``pi(e_alpha) V`` side by side."""
        return np.concatenate(list(self.rep.table @ self.V), axis=1)

    def verify(self, tol=None):
        tol = config.tol(tol)
        psi, P, V = self.of, self.rep.table, self.V
        rhs = psi.table
        lhs = dagger(V) @ P @ V
        conds = {"dilation": relative(lhs - rhs, rhs)}
        E = self.module
        conds["minimality"] = float(column_rank(E.p) - column_rank(self.generators())) if E.rank else 0.0
        conds["nondegenerate"] = self.rep.validate(tol).conditions["nondegenerate"]
        conds["unital"] = relative(self.rep(self.rep.alg.unit_matrix) - E.p, E.p)
        mask = over_mask(E.base, E.n, psi.module.n)
        conds["V_module_map"] = relative(np.where(mask, 0, V), V) + relative(E.p @ V @ psi.module.p - V, V)
        return Certificate("ksgns_dilation", conds, tol, absolute={"dilation": max_opnorm(lhs - rhs)},
                           info={"dim": E.dim})


def ksgns(psi):
    """The minimal KSGNS dilation of ``psi``.

    With matrix units the Gram ``[psi(e_a^* e_b)]`` splits into ``n_t``
    copies of ``[psi(e_jl)]_{j,l}`` for each block ``t``, so the quotient is
    realized once per block on ``F^{n_t}`` and ``pi(e_ab)`` acts by moving
    copy ``b`` to copy ``a``.
    """
    D, F = psi.source, psi.module
    N = F.N
    start = np.concatenate([[0], np.cumsum([n * n for n in D.block_dims])]).astype(int)
    parts = []
    for nt, gram in zip(D.block_dims, unit_grams(psi.table, D)):
        ambient = ProjectiveModule(F.base, np.kron(np.eye(nt), F.p))
        parts.append(realize(AbstractModule(ambient, gram)))

    # F_psi is the sum over blocks t and rows i of copies of parts[t].module
    copies = [(t, i) for t, nt in enumerate(D.block_dims) for i in range(nt)]
    sizes = [parts[t].module.N for t, _ in copies]
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    p = np.zeros((offs[-1], offs[-1]), dtype=complex)
    V = np.zeros((offs[-1], N), dtype=complex)
    for k, (t, i) in enumerate(copies):
        sl = slice(offs[k], offs[k + 1])
        p[sl, sl] = parts[t].module.p
        V[sl] = parts[t].kappa[:, i * N:(i + 1) * N] @ F.p
    module = ProjectiveModule(F.base, p)
    table = np.zeros((D.vs_dim, offs[-1], offs[-1]), dtype=complex)
    index = {c: k for k, c in enumerate(copies)}
    for t, nt in enumerate(D.block_dims):
        for a in range(nt):
            for b in range(nt):
                ka, kb = index[(t, a)], index[(t, b)]
                table[start[t] + a * nt + b, offs[ka]:offs[ka + 1], offs[kb]:offs[kb + 1]] = parts[t].module.p
    rep = Representation(D, module, table)
    return KSGNSDilation(rep, V, psi, info={"generators": sum(len(parts[t].generators) for t, _ in copies)})


def _as_dilation(d, psi):
    if isinstance(d, KSGNSDilation):
        return d
    rep, W = d[0], _mat(d[1])
    return KSGNSDilation(rep, W, psi)


def ksgns_unitary(d1, d2, tol=None):
    """The unitary ``U: [d (x) f] -> pi(d) W f`` between two minimal dilations.

    ``d2`` is a :class:`KSGNSDilation` or a pair ``(rep, W)``. Returns
    ``(ModuleMap, Certificate)``.
    """
    tol = config.tol(tol)
    d2 = _as_dilation(d2, d1.of)
    E1, E2 = d1.module, d2.module
    ins, outs = d1.generators(), d2.generators()
    r_in = column_rank(E1.p) if E1.rank else 0
    r_out = column_rank(outs) if E2.rank else 0
    r_tgt = column_rank(E2.p) if E2.rank else 0
    if r_out != r_tgt:
        raise RankMismatchError(r_tgt, r_out, "span of pi(D) W F inside the second dilation")
    if r_in != r_out:
        raise RankMismatchError(r_in, r_out, "dilation dimension")
    U, fit = solve_map(ins, outs)
    U = E2.p @ U @ E1.p
    conds = {
        "fit": fit,
        "isometry": relative(dagger(U) @ U - E1.p, E1.p),
        "coisometry": relative(U @ dagger(U) - E2.p, E2.p),
        "intertwining": relative(d2.rep.table - U @ d1.rep.table @ dagger(U), d2.rep.table),
        "maps_V_to_W": relative(U @ d1.V - d2.V, d2.V),
    }
    mask = over_mask(E1.base, E2.n, E1.n)
    U = np.where(mask, U, 0)
    return ModuleMap(E1, E2, U, tol=max(tol, 1e-8)), Certificate("ksgns_unitary", conds, tol)


def verify_cp_sme(phi, psi, Y, piY, tol=None):
    """Check ``piY`` as a witness between the minimal dilations of ``phi`` and ``psi``."""
    k_phi, k_psi = ksgns(phi), ksgns(psi)
    table = piY.table if isinstance(piY, SMEWitness) else np.asarray(piY)
    return verify_sme_witness(SMEWitness(k_phi.rep, k_psi.rep, Y, table), tol)


@dataclass
class InducedCP:
    """Output of :func:`induce_cp_map`."""

    phi: CPMap
    witness: SMEWitness
    unitary: ModuleMap
    certificate: Certificate
    dilation_phi: KSGNSDilation
    dilation_psi: KSGNSDilation

    def __iter__(self):
        return iter((self.phi, self.witness, self.unitary))


def induce_cp_map(psi, Y, basis=None, tol=None):
    """``phi(c)_ij = psi(<u_i, c . u_j>_D)`` on ``F^n`` for a left basis ``{u_i}``.

    The default basis satisfies ``sum_i <u_i, u_i>_D = 1``, so that
    ``y = sum_i _C<y, u_i> u_i``. Any family whose left ``C``-span is all of
    ``Y`` is accepted; otherwise the isometry below cannot be onto.

    Also builds the unitary ``U`` from the dilation of ``phi`` onto
    ``Y (x)_D F_psi`` and the witness ``U^* pi_Y(y)`` between the dilations.
    """
    tol = config.tol(tol)
    us = np.asarray([_mat(u) for u in (basis if basis is not None else Y.right_basis())])
    span = column_rank((Y.left_iso[:, None] @ us[None]).reshape(-1, us[0].size).T)
    if span != Y.dim:
        raise PreconditionError(f"left C-span of the basis has dimension {span}, bimodule has {Y.dim}")
    C, D, F = Y.left_alg, Y.right_alg, psi.module
    if psi.source != D:
        raise PreconditionError("CP map must be defined on the right algebra of the bimodule")
    n = len(us)
    inner = dagger(us)[:, None, None] @ (Y.left_iso[None, :, None] @ us[None, None, :])
    vals = psi(inner)  # (i, a, j, N, N)
    table = vals.transpose(1, 0, 3, 2, 4).reshape(C.vs_dim, n * F.N, n * F.N)
    Fn = ProjectiveModule(F.base, np.kron(np.eye(n), F.p))
    phi = CPMap(C, Fn, table, tol=tol)

    k_phi, k_psi = ksgns(phi), ksgns(psi)
    rep_C, wY = induce_representation(k_psi.rep, Y)
    T = rep_C.tensor
    xi = np.concatenate([T.embed_operator(u) @ k_psi.V for u in us], axis=1)
    U, ucert = ksgns_unitary(k_phi, (rep_C, xi), tol)
    witness = SMEWitness(k_phi.rep, k_psi.rep, Y, dagger(U.matrix) @ wY.table,
                         info={"unitary": ucert.to_dict()})
    info = {"frame_size": n, "dim_phi_dilation": k_phi.module.dim,
            "left_normalization": left_frame_residual(Y, us),
            "right_normalization": right_frame_residual(Y, us)}
    cert = merge("induce_cp_map", [phi.certificate, k_phi.verify(tol), ucert, verify_sme_witness(witness, tol)],
                 info=info)
    return InducedCP(phi, witness, U, cert, k_phi, k_psi)


@dataclass
class TensoredCP:
    """Output of :func:`tensor_cp_map`."""

    phi_Z: CPMap
    dilation: KSGNSDilation
    unitary: ModuleMap
    certificate: Certificate
    source_dilation: KSGNSDilation

    def __iter__(self):
        return iter((self.phi_Z, self.dilation))


def tensor_cp_map(phi, Z, tol=None):
    """``phi^Z(c) = phi(c) (x) id_Z`` with the dilation ``(pi_phi^Z, V (x) id, F_phi (x) Z)``."""
    tol = config.tol(tol)
    T = ModuleTensor(phi.module, Z.carrier, Z.left_iso)
    table = np.array([T.op(op) for op in phi.table])
    phi_Z = CPMap(phi.source, T.module, table, tol=tol)
    k_phi = ksgns(phi)
    rep_Z = tensor_representation(k_phi.rep, Z)
    V_Z = rep_Z.tensor.map_from(T, k_phi.V)
    dil = KSGNSDilation(rep_Z, V_Z, phi_Z)
    U, ucert = ksgns_unitary(ksgns(phi_Z), dil, tol)
    cert = merge("tensor_cp_map", [phi_Z.certificate, dil.verify(tol), ucert])
    return TensoredCP(phi_Z, dil, U, cert, k_phi)


@dataclass
class Transfer:
    """Output of :func:`transfer_cp_class`."""

    result: CPMap
    induced: InducedCP
    tensored: TensoredCP
    certificate: Certificate


def transfer_cp_class(psi, Y, Z, tol=None):
    """Induce ``psi`` along ``Y`` and then tensor with ``Z``."""
    ind = induce_cp_map(psi, Y, tol=tol)
    ten = tensor_cp_map(ind.phi, Z, tol=tol)
    cert = merge("transfer_cp_class", [ind.certificate, ten.certificate])
    return Transfer(ten.phi_Z, ind, ten, cert)


def transfer_roundtrip(psi, Y, Z, tol=None):
    """Transfer along ``(Y, Z)``, back along ``(Y~, Z~)``, and certify the result.

    Returns ``(forward, backward, witness)`` where the witness relates the
    minimal dilation of the returned map to that of ``psi``. It is the
    composite of

    1. the dilation unitary of the back-transferred map,
    2. the back-induction witness tensored with ``Z~``,
    3. the forward tensoring unitary tensored with ``Z~``,
    4. the dual of the roundtrip witness for ``Z~``,
    5. the forward induction witness.
    """
    tol = config.tol(tol)
    fwd = transfer_cp_class(psi, Y, Z, tol)
    Yt, Zt = dual_bimodule(Y), dual_bimodule(Z)
    back = transfer_cp_class(fwd.result, Yt, Zt, tol)

    w1 = witness_from_unitary(ksgns(back.result).rep, back.tensored.dilation.rep,
                              back.tensored.unitary.matrix, tol=max(tol, 1e-8))
    w2 = witness_tensor(back.induced.witness, Zt)
    # the forward tensoring unitary, carried through Z~
    src = w2.right_rep
    pi_phi = fwd.induced.dilation_phi.rep
    tgt = tensor_representation(tensor_representation(pi_phi, Z), Zt)
    Ushift = tgt.tensor.map_from(src.tensor, fwd.tensored.unitary.matrix)
    w3 = witness_from_unitary(src, tgt, Ushift, tol=max(tol, 1e-8))
    w4 = witness_dual(witness_roundtrip(pi_phi, Zt))
    w5 = fwd.induced.witness
    w = w1
    for nxt in (w2, w3, w4, w5):
        w = witness_compose(w, nxt, tol=max(tol, 1e-8))
    return fwd, back, w
