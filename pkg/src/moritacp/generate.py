"""Seeded random instances: algebras, projections, bimodules, representations, CP maps."""

import numpy as np

from .algebra import Algebra
from .bimodule import corner_bimodule
from .cpmap import CPMap
from .hilbmod import ProjectiveModule, block_indices, over_mask
from .representation import Representation


def random_isometry(rng, m, r):
    z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    q, _ = np.linalg.qr(z)
    return q[:, :r]


def random_unitary(rng, m):
    return random_isometry(rng, m, m)


def random_algebra(rng, max_blocks=2, max_block=2):
    k = int(rng.integers(1, max_blocks + 1))
    return Algebra(rng.integers(1, max_block + 1, size=k).tolist())


def random_projection(rng, B, n, ranks):
    """Projection in ``M_n(B)`` with the given rank in each block."""
    p = np.zeros((n * B.d, n * B.d), dtype=complex)
    ranges = []
    for t, r in enumerate(ranks):
        idx = block_indices(B, n, t)
        q = random_isometry(rng, len(idx), r)
        p[np.ix_(idx, idx)] = q @ q.conj().T
        ranges.append(q)
    return p, ranges


def random_module(rng, B, max_n=2, full=True):
    n = int(rng.integers(1, max_n + 1))
    low = 1 if full else 0
    ranks = [int(rng.integers(low, n * nt + 1)) for nt in B.block_dims]
    p, _ = random_projection(rng, B, n, ranks)
    return ProjectiveModule(B, p)


def random_bimodule(rng, D, left_dims=None, max_n=2):
    """Random ``C``-``D`` equivalence bimodule ``p D^n``.

    ``left_dims`` fixes the block sizes of ``C`` (one per block of ``D``);
    otherwise they are drawn at random.
    """
    if left_dims is None:
        n = int(rng.integers(1, max_n + 1))
        left_dims = [int(rng.integers(1, n * nt + 1)) for nt in D.block_dims]
    else:
        n = max(-(-m // nt) for m, nt in zip(left_dims, D.block_dims))
    p, _ = random_projection(rng, D, n, left_dims)
    return corner_bimodule(D, p)


def random_representation(rng, C, B, max_mult=2):
    """Random unital representation of ``C`` on a module over ``B``.

    Each block ``s`` of the target carries ``c_t (x) 1_{mu_ts}`` in a random
    orthonormal frame of ``M_n(B)``; every such representation arises this
    way up to unitary equivalence.
    """
    mult = rng.integers(0, max_mult + 1, size=(len(C.block_dims), len(B.block_dims)))
    if mult.sum() == 0:
        mult[0, 0] = 1
    sizes = [int(sum(mult[t, s] * C.block_dims[t] for t in range(len(C.block_dims))))
             for s in range(len(B.block_dims))]
    n = max(1, max(-(-r // ns) for r, ns in zip(sizes, B.block_dims)))
    p, frames = random_projection(rng, B, n, sizes)
    E = ProjectiveModule(B, p)
    table = np.zeros((C.vs_dim, E.N, E.N), dtype=complex)
    for s, q in enumerate(frames):
        if q.shape[1] == 0:
            continue
        idx = block_indices(B, n, s)
        for a, e in enumerate(C.basis_matrices):
            rho = np.zeros((q.shape[1], q.shape[1]), dtype=complex)
            k = 0
            for t, (nt, off) in enumerate(zip(C.block_dims, C.offsets)):
                for _ in range(mult[t, s]):
                    rho[k:k + nt, k:k + nt] = e[off:off + nt, off:off + nt]
                    k += nt
            table[a][np.ix_(idx, idx)] = q @ rho @ q.conj().T
    return Representation(C, E, table)


def random_module_map(rng, F, E, scale=1.0):
    """Random adjointable map ``F -> E``."""
    B = F.base
    x = rng.standard_normal((E.N, F.N)) + 1j * rng.standard_normal((E.N, F.N))
    x = np.where(over_mask(B, E.n, F.n), x, 0)
    return scale * E.p @ x @ F.p / np.sqrt(2 * max(F.N, 1))


def random_cp_map(rng, D, F, max_mult=2):
    """``psi(d) = W^* pi(d) W`` for a random representation and a random map ``W``."""
    rep = random_representation(rng, D, F.base, max_mult)
    W = random_module_map(rng, F, rep.module)
    table = W.conj().T @ rep.table @ W
    return CPMap(D, F, table)
