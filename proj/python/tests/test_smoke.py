import numpy as np
import pytest
import scipy.sparse as sp

import magnus


def _random(rows, cols, density, seed):
    return sp.random(rows, cols, density=density, format="csr", random_state=seed, dtype=np.float64)


def _same(c, ref):
    c = c.tocsr()
    ref = ref.tocsr()
    ref.sort_indices()
    assert c.shape == ref.shape
    assert np.array_equal(c.indptr, ref.indptr)
    assert np.array_equal(c.indices, ref.indices)
    np.testing.assert_allclose(c.data, ref.data, rtol=1e-12, atol=0)


@pytest.mark.parametrize("algo", magnus.ALGORITHMS)
def test_matches_scipy(algo):
    a = _random(60, 80, 0.1, 1)
    b = _random(80, 50, 0.1, 2)
    ref = (a @ b).tocsr()
    ref.eliminate_zeros()
    _same(magnus.spgemm(a, b, algorithm=algo), ref)


def test_forced_coarse_level_on_small_cache():
    # tiny L2 forces every path, coarse included
    a = magnus.uniform_random(40, 4096, 200, seed=3, random_values=True)
    b = magnus.uniform_random(4096, 1 << 16, 64, seed=4, random_values=True)
    c, info = magnus.spgemm_info(a, b, l2_bytes=4096, cache_line=64)
    _same(c, a @ b)
    assert info["counters"]["use_coarse"] == 1
    assert sum(info["counters"][k] for k in ("rows_sort", "rows_dense", "rows_fine", "rows_coarse")) == 40


def test_generators():
    r = magnus.rmat(8, 4, seed=7)
    assert r.shape == (256, 256) and r.nnz == 1024
    assert r.has_sorted_indices
    e = magnus.uniform_random(10, 1000, 5, seed=3)
    assert np.all(np.diff(e.indptr) == 5)
    bnd = magnus.banded(10, 1)
    assert bnd.nnz == 28


def test_generator_determinism():
    x = magnus.rmat(9, 8, seed=11)
    y = magnus.rmat(9, 8, seed=11)
    assert (x != y).nnz == 0


def test_plans_and_bound():
    p = magnus.chunk_plans(1 << 20, l2_bytes=1 << 20, cache_line=64)
    assert p["numeric"]["n_chunks_fine"] * p["numeric"]["chunk_len_fine"] == p["numeric"]["padded_cols"]
    assert not p["numeric"]["use_coarse"]
    q = magnus.chunk_plans(1 << 34, l2_bytes=1 << 20, cache_line=64)
    assert q["symbolic"]["use_coarse"] and q["numeric"]["use_coarse"]
    b = magnus.ideal_bound(n_a=2, nnz_a=4, n_inter_prod=6, n_c=2, nnz_c=3)
    assert b["read_bytes"] == 2 * 3 * 8 + 4 * (32 + 8 + 8) + 6 * (8 + 8)


def test_errors():
    a = sp.identity(3, format="csr")
    b = sp.identity(4, format="csr")
    with pytest.raises(ValueError):
        magnus.spgemm(a, b)
    with pytest.raises(ValueError):
        magnus.spgemm(a, a, algorithm="mkl")
    with pytest.raises(ValueError):
        magnus.spgemm(a, a, l2_bytes=4096, cache_line=48)
