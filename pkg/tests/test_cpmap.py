import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moritacp.algebra import Algebra
from moritacp.bimodule import corner_bimodule, matrix_column_bimodule, trivial_bimodule
from moritacp.cpmap import (
    CPMap,
    KSGNSDilation,
    block_gram,
    induce_cp_map,
    ksgns,
    ksgns_unitary,
    tensor_cp_map,
    transfer_cp_class,
    transfer_roundtrip,
    verify_cp_sme,
)
from moritacp.errors import NotCompletelyPositiveError, PreconditionError, RankMismatchError
from moritacp.generate import random_cp_map, random_unitary
from moritacp.hilbmod import ProjectiveModule, free_module
from moritacp.representation import Representation, verify_sme_witness, witness_reflexive

from conftest import random_cp_instance, right_bimodule, small_algebra

seeds = st.integers(0, 2**32 - 1)


def choi_blocks(psi):
    """Brute-force Choi matrices ``sum_jl E_jl (x) psi(e^t_jl)`` of a map into ``M_m``."""
    D = psi.source
    m = psi.module.N
    out, k = [], 0
    for nt in D.block_dims:
        choi = np.zeros((nt * m, nt * m), dtype=complex)
        for j in range(nt):
            for l in range(nt):
                choi[j * m:(j + 1) * m, l * m:(l + 1) * m] = psi.table[k]
                k += 1
        out.append(choi)
    return out


def half_trace():
    M2 = Algebra([2])
    return CPMap(M2, free_module(Algebra([1]), 1), np.array([0.5, 0, 0, 0.5]).reshape(4, 1, 1))


def transpose_map():
    M2 = Algebra([2])
    return M2, free_module(Algebra([1]), 2), np.array([e.T for e in M2.basis_matrices])


def test_identity_on_scalars():
    C = Algebra([1])
    psi = CPMap(C, free_module(C, 1), np.ones((1, 1, 1)))
    np.testing.assert_allclose(psi.gram(), [[1]])
    k = ksgns(psi)
    assert k.module.dim == 1
    assert abs(abs(k.V[0, 0]) - 1) < 1e-12
    assert k.verify().passed


def test_half_trace_gram_and_dilation():
    psi = half_trace()
    np.testing.assert_allclose(psi.gram(), np.eye(4) / 2, atol=1e-15)
    k = ksgns(psi)
    assert k.module.dim == 4
    assert k.verify().max_residual() <= 1e-12


def test_transpose_is_rejected():
    M2, F, table = transpose_map()
    # oracle: the Gram [T(e_ji e_kl)] assembled entry by entry has eigenvalue -1
    units = [(i, j) for i in range(2) for j in range(2)]
    G = np.zeros((8, 8))
    for a, (i, j) in enumerate(units):
        for b, (k, l) in enumerate(units):
            if i == k:
                blk = np.zeros((2, 2))
                blk[l, j] = 1
                G[2 * a:2 * a + 2, 2 * b:2 * b + 2] = blk
    assert np.linalg.eigvalsh(G).min() == pytest.approx(-1.0)
    with pytest.raises(NotCompletelyPositiveError) as err:
        CPMap(M2, F, table)
    assert err.value.min_eig == pytest.approx(-1.0)
    cert = CPMap(M2, F, table, validate=False).validate()
    assert cert.failing() == ["positivity"]
    assert cert.info["min_eig"] == pytest.approx(-1.0)
    np.testing.assert_allclose(block_gram(table, M2), G)


def test_zero_map_has_zero_dilation():
    M2 = Algebra([2])
    psi = CPMap(M2, free_module(Algebra([1]), 1), np.zeros((4, 1, 1)))
    k = ksgns(psi)
    assert k.module.is_zero
    assert np.all(k.V == 0)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_dilation_dimension_matches_choi_rank(seed):
    rng = np.random.default_rng(seed)
    D = small_algebra(rng)
    F = free_module(Algebra([1]), int(rng.integers(1, 3)))
    psi = random_cp_map(rng, D, F)
    ranks = [np.linalg.matrix_rank(c, tol=1e-10 * max(1.0, np.abs(c).max())) for c in choi_blocks(psi)]
    k = ksgns(psi)
    assert k.module.dim == sum(nt * r for nt, r in zip(D.block_dims, ranks))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_dilation_property(seed):
    psi, _ = random_cp_instance(seed)
    k = ksgns(psi)
    cert = k.verify()
    assert cert.passed
    lhs = k.V.conj().T @ k.rep.table @ k.V
    assert np.abs(lhs - psi.table).max() <= 1e-8 * max(1.0, np.abs(psi.table).max())


def test_ksgns_unitary_identity_and_conjugate():
    rng = np.random.default_rng(4)
    psi, _ = random_cp_instance(4)
    k = ksgns(psi)
    U, cert = ksgns_unitary(k, k)
    assert cert.max_residual() <= 1e-10
    np.testing.assert_allclose(U.matrix, k.module.p, atol=1e-10)
    # conjugate the dilation by a unitary on the range of each block
    E = k.module
    u = np.zeros((E.N, E.N), dtype=complex)
    from moritacp.hilbmod import block_indices
    for t, q in enumerate(E.block_ranges):
        if q.shape[1] == 0:
            continue
        idx = block_indices(E.base, E.n, t)
        u[np.ix_(idx, idx)] = q @ random_unitary(rng, q.shape[1]) @ q.conj().T
    rep2 = Representation(psi.source, E, u @ k.rep.table @ u.conj().T)
    V2 = u @ k.V
    U2, cert2 = ksgns_unitary(k, (rep2, V2))
    assert cert2.passed
    np.testing.assert_allclose(U2.matrix, u, atol=1e-8)


def test_ksgns_unitary_rejects_non_minimal_dilation():
    psi = half_trace()
    k = ksgns(psi)
    E = k.module
    # pad with an extra summand on which the algebra acts but V vanishes
    from moritacp.hilbmod import direct_sum_projection
    big = ProjectiveModule(E.base, direct_sum_projection(E.p, np.eye(2)))
    table = np.zeros((4, big.N, big.N), dtype=complex)
    table[:, :E.N, :E.N] = k.rep.table
    table[:, E.N:, E.N:] = psi.source.basis_matrices
    rep = Representation(psi.source, big, table)
    V = np.vstack([k.V, np.zeros((2, 1))])
    assert KSGNSDilation(rep, V, psi).verify().failing() == ["minimality"]
    with pytest.raises(RankMismatchError):
        ksgns_unitary(k, (rep, V))


def test_verify_cp_sme_reflexive_and_wrong():
    psi, _ = random_cp_instance(9)
    k = ksgns(psi)
    w = witness_reflexive(k.rep)
    assert verify_cp_sme(psi, psi, w.bimodule, w).passed
    rng = np.random.default_rng(0)
    wrong = rng.standard_normal(w.table.shape)
    assert not verify_cp_sme(psi, psi, w.bimodule, wrong).passed


def test_worked_induction_gives_identity():
    C = Algebra([1])
    psi = CPMap(C, free_module(C, 1), np.ones((1, 1, 1)))
    Y = matrix_column_bimodule(C, 2)
    e = np.eye(2)[:, :, None]
    ind = induce_cp_map(psi, Y, basis=[e[0], e[1]])
    M2 = Y.left_alg
    for a, c in enumerate(M2.basis_matrices):
        np.testing.assert_allclose(ind.phi.table[a], c, atol=1e-12)
    assert ind.certificate.passed
    assert verify_sme_witness(ind.witness).passed


def test_induction_along_trivial_bimodule_is_identity():
    psi, _ = random_cp_instance(21)
    D = psi.source
    Y = trivial_bimodule(D)
    ind = induce_cp_map(psi, Y, basis=[D.unit_matrix])
    np.testing.assert_allclose(ind.phi.table, psi.table, atol=1e-12)


def test_induction_of_zero_map():
    C = Algebra([1])
    psi = CPMap(C, free_module(C, 1), np.zeros((1, 1, 1)))
    ind = induce_cp_map(psi, matrix_column_bimodule(C, 2))
    assert np.all(ind.phi.table == 0)
    assert ind.dilation_phi.module.is_zero
    assert ind.certificate.passed


def test_induction_rejects_basis_that_does_not_span():
    # u = e_11 in the row module of M_2 has _C<u, u> = 1 but spans only half of Y
    M2 = Algebra([2])
    Y = corner_bimodule(M2, np.diag([1.0, 0.0]))
    u = np.diag([1.0, 0.0]).astype(complex)
    assert np.allclose(Y.left_inner(u, u), 1)
    with pytest.raises(PreconditionError, match="span"):
        induce_cp_map(half_trace(), Y, basis=[u])
    assert induce_cp_map(half_trace(), Y).certificate.passed


@settings(max_examples=12, deadline=None)
@given(seeds)
def test_induced_map_is_equivalent(seed):
    psi, Y = random_cp_instance(seed)
    ind = induce_cp_map(psi, Y)
    cert = ind.certificate
    assert cert.passed, cert.failing()
    assert verify_cp_sme(ind.phi, psi, Y, ind.witness).passed


def test_tensor_with_trivial_and_column():
    psi, _ = random_cp_instance(3)
    ten = tensor_cp_map(psi, trivial_bimodule(psi.base))
    assert ten.phi_Z.module.dim == psi.module.dim
    assert ten.certificate.passed
    # B = M_2, Z = C^2 as an M_2 - C bimodule: dimensions divide by 2
    M2 = Algebra([2])
    phi = random_cp_map(np.random.default_rng(8), Algebra([1, 1]), free_module(M2, 1))
    ten = tensor_cp_map(phi, matrix_column_bimodule(Algebra([1]), 2))
    assert ten.certificate.passed
    assert ten.dilation.module.dim * 2 == ksgns(phi).module.dim
    C = Algebra([1])
    ident = CPMap(C, free_module(C, 1), np.ones((1, 1, 1)))
    assert tensor_cp_map(ident, trivial_bimodule(C)).phi_Z.module.dim == 1


def test_transfer_along_trivial_bimodules():
    psi, _ = random_cp_instance(13)
    tr = transfer_cp_class(psi, trivial_bimodule(psi.source), trivial_bimodule(psi.base))
    assert tr.certificate.passed
    assert ksgns(tr.result).module.dim == ksgns(psi).module.dim


@settings(max_examples=6, deadline=None)
@given(seeds)
def test_transfer_roundtrip_witness(seed):
    psi, Y = random_cp_instance(seed)
    Z = right_bimodule(np.random.default_rng(seed), psi.base)
    fwd, back, w = transfer_roundtrip(psi, Y, Z)
    assert fwd.certificate.passed and back.certificate.passed
    assert verify_sme_witness(w).max_residual() <= 1e-8
