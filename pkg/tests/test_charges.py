from fractions import Fraction

import numpy as np
import pytest

from ybeb.bootstrap import bootstrap_to_order
from ybeb.charges import (affine_fit, boost, boost_ladder_check, chain_hamiltonian, conformal_superops,
                          conformal_window_checks, group_commutator, op_D, op_K, op_P, poincare_demo,
                          random_positioned_sample, support_residual, three_local_charge, transfer_charges,
                          translation)
from ybeb.errors import InfeasibleSize, OutOfRange, TruncationTooShallow
from ybeb.models import zoo
from ybeb.opalg import DenseOperator, PositionedOperatorSum, commutator, embed


def test_three_local_heisenberg(heis):
    assert three_local_charge(heis, 6).commutator_norm < 1e-10


def test_three_local_classical_ising():
    zz = zoo("ising_longitudinal", J=1.0, hz=0.0).density
    r = three_local_charge(zz, 5)
    assert r.Q.norm() == 0 and r.commutator_norm == 0


def test_three_local_nonintegrable_spin1():
    assert three_local_charge(zoo("spin1_blbq", theta=np.pi / 5).density, 5).commutator_norm > 1e-3


def test_three_local_limits(heis):
    with pytest.raises(OutOfRange):
        three_local_charge(heis, 3)
    with pytest.raises(InfeasibleSize):
        three_local_charge(heis, 13)


@pytest.fixture(scope="module")
def heis_series():
    return bootstrap_to_order(zoo("heisenberg").density, 5).branches[0].R


def test_transfer_charges_commute(heis_series, heis):
    cs = transfer_charges(heis_series[:5], 6)
    assert sorted(cs.Q) == [2, 3, 4]
    assert max(cs.commutator_norms().values()) < 1e-8
    H = chain_hamiltonian(heis, 6)
    assert commutator(cs.Q[2], H).norm() < 1e-8
    assert commutator(cs.Q[3], H).norm() < 1e-8
    alpha, beta, res = cs.affine
    assert abs(alpha - 1) < 1e-10 and res < 1e-10


def test_transfer_q3_is_three_local(heis_series, heis):
    cs = transfer_charges(heis_series[:4], 6)
    alpha, beta, res = affine_fit(cs.Q[3], three_local_charge(heis, 6).Q)
    assert res < 1e-10 and abs(alpha - 1) < 1e-10


def test_transfer_limits(heis_series):
    with pytest.raises(TruncationTooShallow):
        transfer_charges(heis_series[:2], 6)
    with pytest.raises(InfeasibleSize):
        transfer_charges(heis_series[:3], 13)


def test_transfer_shift_changes_only_affine(heis):
    R = bootstrap_to_order(heis, 3, c_policy=0.7).branches[0].R
    cs = transfer_charges(R, 6, H=chain_hamiltonian(heis, 6))
    alpha, beta, res = cs.affine
    assert res < 1e-10 and abs(alpha - 1) < 1e-10 and abs(beta - 6 * 0.7) < 1e-10


def test_boost_ladder_heisenberg(heis):
    rep = boost_ladder_check(heis, 8)
    assert rep.ladder_residual < 1e-12
    assert rep.bulk_residual < 1e-9
    assert rep.boundary_norm > 1.0
    assert rep.rung_bulk_residual < 1e-9
    assert rep.rung_boundary_norm > 1.0
    assert max(rep.squid.values()) < 1e-12
    assert rep.passes


def test_boost_identity_density():
    rep = boost_ladder_check(DenseOperator.identity(2, 2), 6)
    assert rep.ladder_residual == 0 and rep.boundary_norm == 0 and rep.rung_boundary_norm == 0


def test_boost_nonintegrable_reaches_bulk():
    h = zoo("xyz", Jx=1.0, Jy=0.5, Jz=0.2).density
    h = h + embed(DenseOperator(np.diag([1.0, -1.0]), 2), 1, 2) * 0.6    # field on the left site only
    rep = boost_ladder_check(h, 8)
    assert rep.ladder_residual < 1e-12
    assert rep.bulk_residual > 1e-3
    assert not rep.passes


def test_boost_squid_diagonal_is_structural(heis):
    rep = boost_ladder_check(heis, 6, orders=5)
    assert all(rep.squid[(m, m)] == 0 for m in (2, 3, 4))
    assert rep.rung_bulk_residual is None


def test_support_residual():
    sz = DenseOperator(np.diag([1.0, -1.0]), 2)
    assert support_residual(embed(sz, 1, 6) + embed(sz, 6, 6), 1) < 1e-14
    assert support_residual(embed(sz, 3, 6), 2) > 0.5


def test_conformal_relations_exact(rng, heis):
    for _ in range(5):
        rep = conformal_superops(random_positioned_sample(heis, rng))
        assert rep.DP == 0 and rep.DK == 0 and rep.KP == 0
    single = PositionedOperatorSum.single(heis, 5)
    assert conformal_superops(single).max_residual == 0
    zero = PositionedOperatorSum([heis], {})
    assert conformal_superops(zero).max_residual == 0


def test_conformal_window(heis):
    assert all(v == 0 for v in conformal_window_checks(heis).values())


def test_superops_on_single_term(heis):
    s = PositionedOperatorSum.single(heis, 3)
    assert op_P(s).weights == {(3, 0): 1, (4, 0): -1}
    assert op_D(s).weights == {(2, 0): 3, (3, 0): -3}
    assert op_K(s).weights == {(1, 0): 6, (2, 0): -6}


def test_poincare_fibonacci():
    rep = poincare_demo(Fraction(3, 2), 10)
    assert rep.closure and rep.fibonacci and rep.t3_relation
    assert rep.coordinates[9] == (Fraction(21), Fraction(34))


def test_poincare_off_lattice():
    rep = poincare_demo(1.3, 6)
    assert not rep.closure and rep.first_offlattice == 3


def test_poincare_identity_boost():
    rep = poincare_demo(1, 5)
    assert rep.closure
    assert all(c == (0, 0) for c in rep.coordinates[1:])


@pytest.mark.parametrize("c,closed", [(Fraction(2), True), (Fraction(5, 2), True), (Fraction(7, 4), False),
                                      (Fraction(4, 3), False)])
def test_poincare_closure_iff_half_integer(c, closed):
    assert poincare_demo(c, 6).closure == closed


def test_group_element_algebra():
    b = boost(Fraction(3, 2))
    t = translation((1, 0))
    assert b * b.inverse() == translation((0, 0))
    t2 = group_commutator(b, t)
    assert t2.lam == translation((0, 0)).lam
    assert np.allclose(t2.translation_float, [0.5, np.sqrt(5) / 2])
    assert np.isclose(np.linalg.det(b.lambda_float), 1.0)


def test_poincare_input_checks():
    with pytest.raises(OutOfRange):
        poincare_demo(Fraction(1, 2), 5)
