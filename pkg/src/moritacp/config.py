"""Process-wide numerical defaults.

Values can be overridden through the environment (``MORITACP_TOL``,
``MORITACP_RANK_CUTOFF``) or per call. The CLI writes its flags here.
"""

import os

TOL = float(os.environ.get("MORITACP_TOL", "1e-9"))
RANK_CUTOFF = float(os.environ.get("MORITACP_RANK_CUTOFF", "1e-10"))
# eigenvalues of a frame operator below this are a generator deficiency
FRAME_FLOOR = 1e-12


def tol(value=None):
    return TOL if value is None else float(value)


def cutoff(value=None):
    return RANK_CUTOFF if value is None else float(value)


def set_defaults(tol=None, rank_cutoff=None):
    global TOL, RANK_CUTOFF
    if tol is not None:
        TOL = float(tol)
    if rank_cutoff is not None:
        RANK_CUTOFF = float(rank_cutoff)
