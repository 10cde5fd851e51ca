import numpy as np
import pytest

from ybeb import _kernels as K
from ybeb.subasis import gellmann_basis, structure_constants

pytestmark = pytest.mark.skipif(not K._HAVE_NUMBA, reason="numba not installed")


def _cmat(rng, d, cols=None):
    cols = d if cols is None else cols
    return rng.normal(size=(d, cols)) + 1j * rng.normal(size=(d, cols))


@pytest.mark.parametrize("n,k,traced", [(2, 3, [0]), (2, 3, [1, 2]), (3, 3, [2]), (2, 5, [0, 2, 4]), (4, 2, [1])])
def test_partial_trace_agrees(rng, n, k, traced):
    m = _cmat(rng, n ** k)
    a = K.partial_trace_numpy(m, n, k, traced)
    b = K.partial_trace_numba(m, n, k, traced)
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_triple_traces_agree(n):
    g = gellmann_basis(n).matrices
    assert np.abs(K.triple_traces_numpy(g) - K.triple_traces_numba(g)).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_explicit_conditions_agree(rng, n):
    sc = structure_constants(gellmann_basis(n))
    m = n * n - 1
    a = rng.normal(size=m) + 0.3j * rng.normal(size=m)
    b = rng.normal(size=m)
    f1, f2 = K.explicit_conditions_numpy(a, b, sc.f, sc.d)
    g1, g2 = K.explicit_conditions_numba(a, b, sc.f, sc.d)
    assert np.abs(f1 - g1).max() < 1e-10 and np.abs(f2 - g2).max() < 1e-10


@pytest.mark.parametrize("n,nsites,i,j", [(2, 3, 0, 1), (2, 4, 0, 3), (3, 3, 2, 0), (2, 5, 3, 1)])
def test_apply_two_site_agrees(rng, n, nsites, i, j):
    op = _cmat(rng, n * n)
    mat = _cmat(rng, n ** nsites, 3)
    a = K.apply_two_site_numpy(op, mat, n, nsites, i, j)
    b = K.apply_two_site_numba(op, mat, n, nsites, i, j)
    assert np.abs(a - b).max() < 1e-11


def test_apply_two_site_matches_kron(rng):
    n, nsites = 2, 3
    op = _cmat(rng, 4)
    mat = _cmat(rng, 8)
    full = np.kron(np.eye(2), op)        # op on factors 1, 2
    assert np.abs(K.apply_two_site_numpy(op, mat, n, nsites, 1, 2) - full @ mat).max() < 1e-12


def test_backend_flag_consistent():
    assert K.BACKEND in ("numba", "numpy")
    assert (K.partial_trace is K.partial_trace_numba) == (K.BACKEND == "numba")
