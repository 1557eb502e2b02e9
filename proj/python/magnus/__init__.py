"""Python front end for the MAGNUS SpGEMM library.

Matrices go in and come out as scipy.sparse.csr_matrix when scipy is
available; the raw-array functions live in magnus._core.
"""

from . import _core
from ._core import (
    ALGORITHMS,
    BudgetError,
    InputError,
    chunk_plans,
    detect_system,
    ideal_bound,
    measure_bandwidth,
)

__all__ = [
    "ALGORITHMS",
    "BudgetError",
    "InputError",
    "spgemm",
    "spgemm_info",
    "rmat",
    "uniform_random",
    "banded",
    "chunk_plans",
    "detect_system",
    "ideal_bound",
    "measure_bandwidth",
]


def _to_csr(m):
    import scipy.sparse as sp

    m = sp.csr_matrix(m)
    return m.indptr, m.indices, m.data, m.shape


def _from_tuple(t):
    import scipy.sparse as sp

    indptr, indices, data, shape = t
    # scipy wants a signed index type
    return sp.csr_matrix((data, indices.astype("int64"), indptr.astype("int64")), shape=shape)


def spgemm_info(a, b, algorithm="magnus", **options):
    """C = A @ B plus the timing/counter dict. Options are passed to _core.spgemm."""
    if a.shape[1] != b.shape[0]:
        raise InputError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    ca, cb = _to_csr(a), _to_csr(b)
    c, info = _core.spgemm(*ca, *cb, algorithm=algorithm, **options)
    return _from_tuple(c), info


def spgemm(a, b, algorithm="magnus", **options):
    return spgemm_info(a, b, algorithm, **options)[0]


def rmat(scale, edge_factor=16, seed=1, random_values=False, **kw):
    return _from_tuple(_core.gen_rmat(scale, edge_factor, seed=seed, random_values=random_values, **kw))


def uniform_random(n_rows, n_cols, nnz_per_row, seed=1, random_values=False, threads=0):
    return _from_tuple(_core.gen_uniform_random(n_rows, n_cols, nnz_per_row, seed, random_values, threads))


def banded(n, half_width, seed=1, random_values=False):
    return _from_tuple(_core.gen_banded(n, half_width, seed, random_values))
