import numpy as np
import pytest

from ybeb.models import zoo
from ybeb.opalg import DenseOperator
from ybeb.subasis import gellmann_basis, pauli_basis


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def heis():
    return zoo("heisenberg").density


@pytest.fixture(scope="session")
def pauli():
    return pauli_basis()


@pytest.fixture(scope="session")
def gm3():
    return gellmann_basis(3)


def random_op(rng, n, k, hermitian=False):
    d = n ** k
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    if hermitian:
        m = m + m.conj().T
    return DenseOperator(m, n, k)
