"""Generalized Reshetikhin test for R-matrices that are not of difference form.

The unknown is the derivative density

    h' = sum_{a<b} p_ab (T^a T^b - T^b T^a) + sum_a q_a (T^a 1 - 1 T^a),

i.e. p antisymmetric and r = -q imposed by the parametrization (the constant c'
commutes out and is dropped).  The operator condition is

    [h12 + h23, [h23, h12]] + [h12, h'23] + [h23, h'12] + ([h12, h'12] + [h23, h'23]) / 2
        = Y12 - Y23.

Its antisymmetric coefficient families, u_abc - u_cba (a < c) and
(v + x)_ab - (v + x)_ba (a < b), form a linear system that is solved by least
squares.  Coefficients come from trace projection of dense three-site operators.

The q directions never enter: h' = X 1 - 1 X contributes
([h, X 1 + 1 X] 1 - 1 [h, X 1 + 1 X]) / 2, itself a divergence.  The rank is at most
the number of p unknowns, and the least-squares solution reports q = 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatch
from .kennedy import invert_divergence
from .opalg import DEFAULT_TOL, DenseOperator, commutator, distance, tensor
from .subasis import TwoSiteCoefficients, project_coefficients, reconstruct

STATUSES = ("OriginalHolds", "UniqueSolution", "NoSolution")


def _h12_h23(x):
    one = DenseOperator.identity(x.local_dim)
    return tensor(x, one), tensor(one, x)


def generalized_lhs(h, hprime):
    """Left-hand side of the generalized condition as a dense three-site operator."""
    h12, h23 = _h12_h23(h)
    p12, p23 = _h12_h23(hprime)
    return (commutator(h12 + h23, commutator(h23, h12)) + commutator(h12, p23) + commutator(h23, p12)
            + (commutator(h12, p12) + commutator(h23, p23)) * 0.5)


def _hprime_part(h, hprime):
    """The h'-linear part of :func:`generalized_lhs`."""
    h12, h23 = _h12_h23(h)
    p12, p23 = _h12_h23(hprime)
    return commutator(h12, p23) + commutator(h23, p12) + (commutator(h12, p12) + commutator(h23, p23)) * 0.5


def _rows(A, basis):
    """Antisymmetric coefficient families of a three-site operator, as one vector."""
    c = project_coefficients(A, basis)
    m = basis.size
    ia, ic = np.triu_indices(m, 1)
    U = c.u[ia, :, ic] - c.u[ic, :, ia]          # (pairs, m)
    VX = c.v + c.x
    return np.concatenate([U.ravel(), (VX - VX.T)[ia, ic]])


def equation_count(n):
    return n * n * (n * n - 1) * (n * n - 2) // 2


def unknown_count(n):
    return n * n * (n * n - 1) // 2


def hprime_from(p, q, basis):
    """Assemble h' from the antisymmetric p matrix and the vector q (r = -q)."""
    m = basis.size
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    return reconstruct(TwoSiteCoefficients(p, q, -q, 0.0), basis) if p.shape == (m, m) else None


def _unknown_operators(basis):
    m = basis.size
    out = []
    for a, b in zip(*np.triu_indices(m, 1)):
        P = np.zeros((m, m))
        P[a, b], P[b, a] = 1.0, -1.0
        out.append(hprime_from(P, np.zeros(m), basis))
    for a in range(m):
        q = np.zeros(m)
        q[a] = 1.0
        out.append(hprime_from(np.zeros((m, m)), q, basis))
    return out


@dataclass(frozen=True)
class GeneralizedSystem:
    A: np.ndarray
    v: np.ndarray
    h: DenseOperator
    basis: object
    n_equations: int
    n_unknowns: int


def build_gRc_system(h, basis, consts=None):
    """Linear system A u = v with u = ((p_ab)_{a<b}, (q_a)).

    ``consts`` is only checked for consistency with ``basis``; the coefficients are
    obtained by projection.  Raises BasisMismatch if ``h`` does not round-trip
    through the basis.
    """
    if h.local_dim != basis.local_dim or h.sites != 2:
        raise BasisMismatch(f"density on {h.sites} sites of dim {h.local_dim} vs basis dim {basis.local_dim}")
    if consts is not None and consts.local_dim != basis.local_dim:
        raise BasisMismatch(f"structure constants for n={consts.local_dim}, basis n={basis.local_dim}")
    back = reconstruct(project_coefficients(h, basis), basis)
    if distance(back, h) > 1e-9:
        raise BasisMismatch("density is not spanned by products of the basis and the identity")
    cols = [_rows(_hprime_part(h, e), basis) for e in _unknown_operators(basis)]
    A = np.stack(cols, axis=1)
    h12, h23 = _h12_h23(h)
    v = -_rows(commutator(h12 + h23, commutator(h23, h12)), basis)
    return GeneralizedSystem(A, v, h, basis, A.shape[0], A.shape[1])


@dataclass(frozen=True)
class GeneralizedSolveReport:
    status: str
    p: np.ndarray                 # antisymmetric m x m
    q: np.ndarray
    r: np.ndarray
    residual: float               # |A u - v| / max(1, |v|)
    antisymmetry_ok: bool
    rank: int
    n_equations: int
    n_unknowns: int
    rhs_norm: float
    operator_residual: float = None    # divergence residual of the full operator condition

    @property
    def null_dimension(self):
        return self.n_unknowns - self.rank

    @property
    def u(self):
        iu = np.triu_indices(self.p.shape[0], 1)
        return np.concatenate([self.p[iu], self.q])


def solve_gRc(system, tol=DEFAULT_TOL):
    A, v = system.A, system.v
    m = system.basis.size
    vnorm = float(np.linalg.norm(v))
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if vnorm <= tol * scale:
        u = np.zeros(A.shape[1], dtype=complex)
        status, res = "OriginalHolds", vnorm
    else:
        u, *_ = np.linalg.lstsq(A, v, rcond=None)
        res = float(np.linalg.norm(A @ u - v)) / max(1.0, vnorm)
        status = "UniqueSolution" if res <= tol else "NoSolution"
    rank = int(np.linalg.matrix_rank(A, tol=1e-10 * scale))
    npair = m * (m - 1) // 2
    p = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    p[iu] = u[:npair]
    p = p - p.T
    q = u[npair:]
    op_res = None
    if status != "NoSolution":
        op_res = verify_gRc_operator(system.h, hprime_from(p, q, system.basis), tol)
    return GeneralizedSolveReport(status, p, q, -q, float(res), bool(np.allclose(p, -p.T, atol=tol)), rank,
                                  system.n_equations, system.n_unknowns, vnorm, op_res)


def verify_gRc_operator(h, hprime, tol=DEFAULT_TOL):
    """Divergence residual of the full operator condition (Y12 exists iff it is <= tol)."""
    return invert_divergence(generalized_lhs(h, hprime), tol, raise_on_fail=False).residual
