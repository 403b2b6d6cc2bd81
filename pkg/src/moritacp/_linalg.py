"""Dense linear-algebra helpers shared by the modules."""

import numpy as np

from . import config


def opnorm(x):
    """Operator norm. Accepts a single matrix or a stack of matrices."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0 if x.ndim == 2 else np.zeros(x.shape[:-2])
    return np.linalg.norm(x, ord=2, axis=(-2, -1))


def max_opnorm(x):
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.max(opnorm(x)))


def dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def hermitian_residual(h):
    return max_opnorm(h - dagger(h))


def _kept(evals, cutoff):
    scale = max(float(evals.max(initial=0.0)), 1.0)
    return evals > cutoff * scale


def hermitian_function(h, func, cutoff=None):
    """Apply ``func`` to the eigenvalues of ``h`` above the relative cutoff.

    Eigenvalues at or below ``cutoff * max(lambda_max, 1)`` are treated as
    zero and mapped to zero. Returns ``(f(h), rank)``.
    """
    cutoff = config.cutoff(cutoff)
    if h.shape[0] == 0:
        return np.zeros_like(h), 0
    evals, evecs = np.linalg.eigh(h)
    keep = _kept(evals, cutoff)
    v = evecs[:, keep]
    out = (v * func(evals[keep])) @ dagger(v)
    return out, int(keep.sum())


def psd_rank(h, cutoff=None):
    cutoff = config.cutoff(cutoff)
    if h.shape[0] == 0:
        return 0
    return int(_kept(np.linalg.eigvalsh(h), cutoff).sum())


def column_rank(x, cutoff=None):
    """Rank of the column span of ``x`` with the Gram-matrix cutoff rule."""
    x = np.asarray(x)
    if x.size == 0:
        return 0
    if x.shape[0] <= x.shape[1]:
        return psd_rank(x @ dagger(x), cutoff)
    return psd_rank(dagger(x) @ x, cutoff)


def range_projection(h, cutoff=None):
    return hermitian_function(h, np.ones_like, cutoff)[0]


def sqrt_psd(h, cutoff=None):
    return hermitian_function(h, np.sqrt, cutoff)


def solve_map(inputs, outputs, rcond=1e-10):
    """Least-squares operator ``O`` with ``O @ inputs = outputs``.

    ``O`` vanishes on the orthogonal complement of the column span of
    ``inputs``. Returns ``(O, residual)`` where residual is the relative
    misfit on the samples.
    """
    inputs = np.asarray(inputs)
    outputs = np.asarray(outputs)
    op = outputs @ np.linalg.pinv(inputs, rcond=rcond)
    scale = max(max_opnorm(outputs), 1.0)
    resid = max_opnorm(op @ inputs - outputs) / scale
    return op, resid


def relative(diff_stack, ref_stack):
    """Largest ``|diff|`` over a stack, normalised by ``max(1, max |ref|)``."""
    return max_opnorm(diff_stack) / max(1.0, max_opnorm(ref_stack))
