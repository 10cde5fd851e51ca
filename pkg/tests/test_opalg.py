import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_op
from ybeb.errors import DimensionMismatch, InvalidSite, OutOfRange
from ybeb.opalg import (BivariateOperatorSeries, DenseOperator, PositionedOperatorSum, ShiftPolyOperator, commutator,
                        distance, embed, partial_trace_normalized, permutation_op, place, tensor)


def test_identity_arithmetic():
    a = DenseOperator(np.diag([1.0, 2.0]), 2)
    assert np.allclose((a + 3).mat, np.diag([4.0, 5.0]))
    assert np.allclose((3 - a).mat, np.diag([2.0, 1.0]))
    assert np.allclose((a ** 2).mat, np.diag([1.0, 4.0]))


def test_immutable():
    a = DenseOperator.identity(2)
    with pytest.raises(AttributeError):
        a.local_dim = 3
    with pytest.raises(ValueError):
        a.mat[0, 0] = 5


def test_shape_checks():
    with pytest.raises(DimensionMismatch):
        DenseOperator(np.eye(6), 4)
    with pytest.raises(DimensionMismatch):
        DenseOperator.identity(2, 2) + DenseOperator.identity(2, 1)


def test_site_one_is_most_significant():
    z = DenseOperator(np.diag([1.0, -1.0]), 2)
    e = embed(z, 1, 2)
    assert np.allclose(np.diag(e.mat), [1, 1, -1, -1])


def test_place_reorders(rng):
    a, b = random_op(rng, 2, 1), random_op(rng, 2, 1)
    ab = tensor(a, b)
    assert distance(place(ab, (3, 1), 3), tensor(tensor(b, DenseOperator.identity(2)), a)) < 1e-12
    with pytest.raises(InvalidSite):
        place(ab, (1, 1), 3)
    with pytest.raises(OutOfRange):
        place(ab, (1, 4), 3)


def test_partial_trace_normalized(rng):
    a, b = random_op(rng, 3, 1), random_op(rng, 3, 1)
    got = partial_trace_normalized(tensor(a, b), [2])
    assert distance(got, a * (np.trace(b.mat) / 3)) < 1e-12
    full = partial_trace_normalized(tensor(a, b), [1, 2])
    assert full.shape == (1, 1)
    assert np.isclose(full[0, 0], np.trace(a.mat) * np.trace(b.mat) / 9)


def test_permutation_swaps(rng):
    a, b = random_op(rng, 3, 1), random_op(rng, 3, 1)
    P = permutation_op(3)
    assert distance(P @ tensor(a, b) @ P, tensor(b, a)) < 1e-12


def test_distance_zero_reference():
    z = DenseOperator.zeros(2)
    assert distance(z, z) == 0
    # against a zero reference the distance is measured in units of the absolute tolerance
    assert distance(DenseOperator.identity(2) * 1e-13, z) <= 1
    assert distance(DenseOperator.identity(2) * 1e-11, z) > 1
    assert (DenseOperator.identity(2) * 1e-13).is_close(z)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 3), st.integers(1, 3))
def test_jacobi_property(seed, n, k):
    rng = np.random.default_rng(seed)
    a, b, c = (random_op(rng, n, k) for _ in range(3))
    j = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
    assert j.norm() <= 1e-10 * a.norm() * b.norm() * c.norm()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_traceless_part(seed):
    rng = np.random.default_rng(seed)
    a = random_op(rng, 2, 2)
    x, mu = a.traceless()
    assert abs(x.trace()) < 1e-10
    assert distance(x + mu, a) < 1e-12


def test_shift_poly_arithmetic(rng):
    a, b = random_op(rng, 2, 1), random_op(rng, 2, 1)
    p = ShiftPolyOperator([a, b])          # a + c b
    q = p @ p
    for c in (0.0, 1.5, 2j):
        assert distance(q.evaluate_at(c), (a + b * c) @ (a + b * c)) < 1e-12
    assert q.degree == 2
    assert (p - p).degree == 0


def test_bivariate_product_truncation(rng):
    a = [DenseOperator.identity(2), random_op(rng, 2, 1), random_op(rng, 2, 1)]
    s = BivariateOperatorSeries.from_univariate(a, "xi-zeta", 2)
    # (xi - zeta) coefficient pattern
    assert distance(s.coefficient(1, 0), a[1]) < 1e-12
    assert distance(s.coefficient(0, 1), -a[1]) < 1e-12
    assert distance(s.coefficient(1, 1), a[2] * -2) < 1e-12
    assert ((s @ s).K) == 2


def test_positioned_sum_exact(rng):
    h = random_op(rng, 2, 2)
    s = PositionedOperatorSum.single(h, 3, 2) + PositionedOperatorSum.single(h, 4, -1)
    t = s.shifted(-1).weighted(lambda x: x * x)
    assert t.weights == {(2, 0): 8, (3, 0): -9}
    assert (s - s).is_zero()
    dense = s.to_dense(3, 3)
    assert distance(dense, embed(h, 1, 3) * 2 - embed(h, 2, 3)) < 1e-12
    with pytest.raises(OutOfRange):
        s.to_dense(4, 3)
