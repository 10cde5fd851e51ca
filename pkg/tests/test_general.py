from dataclasses import replace

import numpy as np
import pytest

from ybeb.errors import BasisMismatch
from ybeb.general import (build_gRc_system, equation_count, generalized_lhs, hprime_from, solve_gRc,
                          unknown_count, verify_gRc_operator)
from ybeb.models import zoo
from ybeb.opalg import DenseOperator, tensor
from ybeb.bootstrap import reshetikhin_test
from ybeb.subasis import gellmann_basis, pauli_basis

from conftest import random_op

INTEGRABLE = [("heisenberg", {}), ("xyz", {"Jx": 0.3, "Jy": -1.1, "Jz": 0.8}), ("ising_longitudinal", {}),
              ("ising_transverse", {}), ("xyh", {}), ("spin1_blbq", {"theta": np.pi / 4}),
              ("takhtajan_babujian", {}), ("sutherland_suN", {"N": 3})]


def _basis(n):
    return pauli_basis() if n == 2 else gellmann_basis(n)


def hubbard_density(U):
    """Two-species hopping on C^2 x C^2 per site, with the on-site U term split over the bond."""
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    one = np.eye(2)
    # site space = sigma (x) tau; bond = (sigma tau)_1 (x) (sigma tau)_2
    def on(a, which, site):
        a = np.kron(a, one) if which == 0 else np.kron(one, a)
        return np.kron(a, np.eye(4)) if site == 0 else np.kron(np.eye(4), a)
    hop = sum(on(sp, w, 0) @ on(sp.T, w, 1) for w in (0, 1))
    hop = hop + hop.conj().T
    szz = np.kron(sz, sz)
    inter = U / 4 * (np.kron(szz, np.eye(4)) + np.kron(np.eye(4), szz))
    return DenseOperator(hop + inter, 4, 2)


@pytest.mark.parametrize("name,params", INTEGRABLE)
def test_original_holds_for_integrable_zoo(name, params):
    h = zoo(name, params).density
    assert reshetikhin_test(h).passes
    rep = solve_gRc(build_gRc_system(h, _basis(h.local_dim)))
    assert rep.status == "OriginalHolds"
    assert np.all(rep.u == 0)


@pytest.mark.parametrize("n,count", [(2, 12), (3, 252), (4, 1680)])
def test_equation_count(n, count):
    assert equation_count(n) == count
    assert unknown_count(n) == (n * n - 1) * n * n // 2


def test_system_dimensions_random_spin_half(rng, pauli):
    h = random_op(rng, 2, 2, hermitian=True)
    s = build_gRc_system(h, pauli)
    assert s.A.shape == (12, 6) and s.v.shape == (12,)
    assert np.linalg.norm(s.v) > 1e-3


def test_q_directions_are_gauge(gm3):
    s = build_gRc_system(zoo("spin1_blbq", theta=0.3).density, gm3)
    assert np.abs(s.A[:, 28:]).max() < 1e-12
    assert np.linalg.matrix_rank(s.A, tol=1e-10) <= 28


@pytest.mark.parametrize("name", ["xyh", "spin1_blbq"])
def test_round_trip_in_row_space(rng, name):
    h = zoo(name, {"theta": 0.3} if name == "spin1_blbq" else {}).density
    s = build_gRc_system(h, _basis(h.local_dim))
    u0 = np.linalg.pinv(s.A) @ (s.A @ rng.normal(size=s.n_unknowns))
    rep = solve_gRc(replace(s, v=s.A @ u0))
    assert rep.status == "UniqueSolution"
    assert np.abs(rep.u - u0).max() <= 1e-9
    assert rep.antisymmetry_ok and np.allclose(rep.q, -rep.r)


def test_inconsistent_system_reports_lstsq_distance(rng, gm3):
    s = build_gRc_system(zoo("spin1_blbq", theta=0.3).density, gm3)
    rep = solve_gRc(s)
    assert rep.status == "NoSolution"
    u, *_ = np.linalg.lstsq(s.A, s.v, rcond=None)
    dist = np.linalg.norm(s.A @ u - s.v) / max(1.0, np.linalg.norm(s.v))
    assert abs(rep.residual - dist) < 1e-12
    assert np.allclose(rep.p, -rep.p.T)


def test_hubbard_free_point_is_difference_form():
    h = hubbard_density(0.0)
    assert solve_gRc(build_gRc_system(h, gellmann_basis(4))).status == "OriginalHolds"


def test_hubbard_interacting_needs_hprime():
    h = hubbard_density(1.3)
    assert not reshetikhin_test(h, raise_on_fail=False).passes
    rep = solve_gRc(build_gRc_system(h, gellmann_basis(4)))
    assert rep.status == "UniqueSolution"
    assert rep.operator_residual <= 1e-9
    assert rep.antisymmetry_ok


def test_operator_reduces_to_reshetikhin(heis):
    zero = DenseOperator.zeros(2, 2)
    assert verify_gRc_operator(heis, zero) <= 1e-12
    h = zoo("spin1_blbq", theta=0.3).density
    assert verify_gRc_operator(h, DenseOperator.zeros(3, 2)) > 1e-3


def test_random_hprime_negative_control(rng):
    h = zoo("spin1_blbq", theta=0.3).density
    assert verify_gRc_operator(h, random_op(rng, 3, 2, hermitian=True)) > 1e-3


@pytest.mark.parametrize("mu", [0.0, 1.7, -3.2j])
def test_operator_residual_shift_invariant(rng, mu):
    h = zoo("xyh").density
    hp = random_op(rng, 2, 2)
    base = verify_gRc_operator(h, hp)
    shifted = verify_gRc_operator(h + DenseOperator.identity(2, 2) * mu, hp)
    assert abs(base - shifted) <= 1e-12 * max(1.0, base)


def test_generalized_lhs_hprime_zero_matches(heis):
    one = DenseOperator.identity(2)
    h12, h23 = tensor(heis, one), tensor(one, heis)
    from ybeb.opalg import commutator
    ref = commutator(h12 + h23, commutator(h23, h12))
    assert (generalized_lhs(heis, DenseOperator.zeros(2, 2)) - ref).norm() == 0


def test_hprime_from_rejects_wrong_shape(pauli):
    assert hprime_from(np.zeros((2, 2)), np.zeros(3), pauli) is None


def test_basis_mismatch(heis, gm3):
    with pytest.raises(BasisMismatch):
        build_gRc_system(heis, gm3)
    with pytest.raises(BasisMismatch):
        build_gRc_system(DenseOperator.identity(2, 3), pauli_basis())
