"""su(n) generator bases, structure constants and the coupling parametrization.

Structure constants are always read off from traces of the concrete generators:

    f[a, b, c] = -i tr([T^a, T^b] T^c) / kappa
    d[a, b, c] =    tr({T^a, T^b} T^c) / (2 kappa)

with ``tr(T^a T^b) = kappa delta^{ab}``.  With these, [T^a, T^b] = i f^{ab}_c T^c and
{T^a, T^b} = (2 kappa / n) delta^{ab} 1 + 2 d^{ab}_c T^c for any kappa.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BasisNotOrthogonal, DimensionMismatch, UnsupportedDim
from .opalg import DenseOperator

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SuBasis:
    local_dim: int
    generators: tuple
    kappa: float
    name: str = "custom"

    @property
    def size(self):
        return len(self.generators)

    @property
    def matrices(self):
        """Generators stacked as an array of shape (n^2 - 1, n, n)."""
        return np.stack([g.mat for g in self.generators])

    def gram(self):
        m = self.matrices
        return np.einsum("aij,bji->ab", m, m)

    def validate(self, tol=1e-12, hermitian=True):
        m = self.matrices
        if m.shape[0] != self.local_dim ** 2 - 1:
            raise BasisNotOrthogonal(f"expected {self.local_dim**2 - 1} generators, got {m.shape[0]}")
        if np.abs(np.trace(m, axis1=1, axis2=2)).max() > tol:
            raise BasisNotOrthogonal("generators are not traceless")
        if hermitian and np.abs(m - m.conj().transpose(0, 2, 1)).max() > tol:
            raise BasisNotOrthogonal("generators are not Hermitian")
        g = self.gram()
        if np.abs(g - self.kappa * np.eye(len(g))).max() > tol * max(1.0, abs(self.kappa)) * 10:
            raise BasisNotOrthogonal("trace pairing is not kappa * delta")
        return True


def gellmann_basis(n, scaled=True):
    """Generalized Gell-Mann matrices, divided by sqrt(2) unless ``scaled=False``.

    Ordering: for k = 1..n-1 the symmetric and antisymmetric off-diagonal pairs
    (j, k), j < k, followed by the k-th diagonal generator.  For n = 3 this is the
    standard lambda_1..lambda_8 order; for n = 2 with ``scaled=False`` it gives the
    Pauli matrices.
    """
    if not 2 <= n <= 6:
        raise UnsupportedDim(f"local dimension {n} not in 2..6")
    gens = []
    for k in range(1, n):
        for j in range(k):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1
            a = np.zeros((n, n), dtype=complex)
            a[j, k], a[k, j] = -1j, 1j
            gens += [s, a]
        dg = np.zeros(n, dtype=complex)
        dg[:k] = 1
        dg[k] = -k
        gens.append(np.diag(dg) * np.sqrt(2.0 / (k * (k + 1))))
    scale = 1 / SQRT2 if scaled else 1.0
    kappa = 1.0 if scaled else 2.0
    name = f"gellmann{n}" + ("" if scaled else "-unscaled")
    return SuBasis(n, tuple(DenseOperator(g * scale, n) for g in gens), kappa, name)


def pauli_basis():
    """Unscaled Pauli matrices (kappa = 2)."""
    b = gellmann_basis(2, scaled=False)
    return SuBasis(2, b.generators, 2.0, "pauli")


def spin_one_operators():
    """Spin-1 operators S^1, S^2, S^3 in the |+1>, |0>, |-1> basis.

    (S^+)^2 = (S^1 + i S^2)^2 / 2 is the single matrix unit e_{13}; this is why
    spin-1 isotropic densities need (S.S)^2 in addition to S.S.
    """
    s1 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
    s2 = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / SQRT2
    s3 = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return tuple(DenseOperator(s, 3) for s in (s1, s2, s3))


@dataclass(frozen=True)
class StructureConstants:
    f: np.ndarray
    d: np.ndarray
    delta_norm: float
    local_dim: int

    @property
    def anticomm_identity(self):
        """Coefficient of delta^{ab} 1 in {T^a, T^b}."""
        return 2.0 * self.delta_norm / self.local_dim

    def jacobi_residual(self):
        f = self.f
        t = np.einsum("abd,dce->abce", f, f)
        return float(np.abs(t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)).max())

    def graded_jacobi_residuals(self):
        f, d = self.f, self.d
        t1 = np.einsum("abd,dce->abce", d, f)
        r1 = t1 + t1.transpose(1, 2, 0, 3) + t1.transpose(2, 0, 1, 3)
        # d^{ab}_δ f^{δc}_ε + f^{cb}_δ d^{δa}_ε + f^{ca}_δ d^{δb}_ε
        r2 = t1 + np.einsum("cbd,dae->abce", f, d) + np.einsum("cad,dbe->abce", f, d)
        return float(np.abs(r1).max()), float(np.abs(r2).max())

    def symmetry_residuals(self):
        f, d = self.f, self.d
        anti = max(np.abs(f + f.transpose(1, 0, 2)).max(), np.abs(f + f.transpose(0, 2, 1)).max())
        sym = max(np.abs(d - d.transpose(1, 0, 2)).max(), np.abs(d - d.transpose(0, 2, 1)).max())
        return float(anti), float(sym)


def structure_constants(basis, tol=1e-10):
    g = basis.gram()
    kappa = basis.kappa
    if np.abs(g - kappa * np.eye(len(g))).max() > tol * max(1.0, abs(kappa)):
        raise BasisNotOrthogonal("trace pairing is not kappa * delta", max_offset=float(np.abs(g - kappa * np.eye(len(g))).max()))
    t = _kernels.triple_traces(basis.matrices)  # tr(T^a T^b T^c)
    f = -1j * (t - t.transpose(1, 0, 2)) / kappa
    d = (t + t.transpose(1, 0, 2)) / (2 * kappa)
    if np.abs(f.imag).max() < tol and np.abs(d.imag).max() < tol:
        f, d = f.real, d.real
    return StructureConstants(f, d, float(kappa), basis.local_dim)


# ---------------------------------------------------------------------------
# couplings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingSpec:
    """h = a_{ab} T^a x T^b + b_a (T^a x 1 + 1 x T^a) + shift.

    ``a`` may be given as a vector (diagonal coupling) or a symmetric matrix.
    """

    a: np.ndarray
    b: np.ndarray = None
    shift: complex = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        m = a.shape[0]
        b = np.zeros(m, dtype=complex) if self.b is None else np.asarray(self.b, dtype=complex)
        if a.ndim == 2 and (a.shape != (m, m) or np.abs(a - a.T).max() > 1e-12 * max(1.0, np.abs(a).max())):
            raise DimensionMismatch("coupling matrix must be square and symmetric")
        if b.shape != (m,):
            raise DimensionMismatch(f"b has shape {b.shape}, expected ({m},)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "shift", complex(self.shift))

    @property
    def a_matrix(self):
        return np.diag(self.a) if self.a.ndim == 1 else self.a

    def is_diagonal(self, tol=1e-12):
        if self.a.ndim == 1:
            return True
        return np.abs(self.a - np.diag(np.diag(self.a))).max() <= tol * max(1.0, np.abs(self.a).max())

    def diagonal(self):
        return self.a if self.a.ndim == 1 else np.diag(self.a).copy()


def build_hamiltonian(coupling, basis):
    n = basis.local_dim
    a = coupling.a_matrix
    if a.shape[0] != basis.size:
        raise DimensionMismatch(f"coupling has {a.shape[0]} components, basis has {basis.size}")
    T = basis.matrices
    eye = np.eye(n)
    h = np.einsum("ab,aij,bkl->ikjl", a, T, T).reshape(n * n, n * n)
    single = np.einsum("a,aij->ij", coupling.b, T)
    h = h + np.kron(single, eye) + np.kron(eye, single) + coupling.shift * np.eye(n * n)
    return DenseOperator(h, n, 2)


@dataclass(frozen=True)
class TwoSiteCoefficients:
    a: np.ndarray       # T x T
    b_left: np.ndarray  # T x 1
    b_right: np.ndarray  # 1 x T
    scalar: complex

    def is_parity_symmetric(self, tol=1e-10):
        scale = max(1.0, np.abs(self.a).max(), np.abs(self.b_left).max())
        return (np.abs(self.a - self.a.T).max() <= tol * scale
                and np.abs(self.b_left - self.b_right).max() <= tol * scale)

    def as_coupling(self):
        return CouplingSpec(0.5 * (self.a + self.a.T), 0.5 * (self.b_left + self.b_right), self.scalar)


@dataclass(frozen=True)
class ThreeSiteCoefficients:
    """A = u T1T2T3 + v T1T2 + w T1T3 + x T2T3 + y T1 + z T2 + t T3 + scalar."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    t: np.ndarray
    scalar: complex
    full: np.ndarray = field(repr=False, default=None)


def _extended(basis):
    n = basis.local_dim
    E = np.concatenate([np.eye(n, dtype=complex)[None], basis.matrices])
    g = np.concatenate([[n], np.full(basis.size, basis.kappa)])
    return E, g


def project_coefficients(A, basis):
    """Expand a 2- or 3-site operator over products of {1, T^a} by trace projection."""
    n = basis.local_dim
    if A.local_dim != n:
        raise DimensionMismatch(f"operator local dim {A.local_dim} vs basis {n}")
    E, g = _extended(basis)
    if A.sites == 2:
        t = A.mat.reshape(n, n, n, n)
        C = np.einsum("ikjl,aji,blk->ab", t, E, E, optimize=True) / np.outer(g, g)
        return TwoSiteCoefficients(C[1:, 1:], C[1:, 0], C[0, 1:], complex(C[0, 0]))
    if A.sites == 3:
        t = A.mat.reshape((n,) * 6)
        C = np.einsum("ikmjln,aji,blk,cnm->abc", t, E, E, E, optimize=True) / np.einsum("a,b,c->abc", g, g, g)
        return ThreeSiteCoefficients(C[1:, 1:, 1:], C[1:, 1:, 0], C[1:, 0, 1:], C[0, 1:, 1:],
                                     C[1:, 0, 0], C[0, 1:, 0], C[0, 0, 1:], complex(C[0, 0, 0]), C)
    raise DimensionMismatch("projection supports 2- and 3-site operators only")


def reconstruct(coeffs, basis):
    """Inverse of :func:`project_coefficients`."""
    n = basis.local_dim
    E, _ = _extended(basis)
    if isinstance(coeffs, TwoSiteCoefficients):
        m = basis.size
        C = np.zeros((m + 1, m + 1), dtype=complex)
        C[1:, 1:], C[1:, 0], C[0, 1:], C[0, 0] = coeffs.a, coeffs.b_left, coeffs.b_right, coeffs.scalar
        mat = np.einsum("ab,aij,bkl->ikjl", C, E, E).reshape(n * n, n * n)
        return DenseOperator(mat, n, 2)
    C = coeffs.full
    if C is None:
        m = basis.size
        C = np.zeros((m + 1,) * 3, dtype=complex)
        C[1:, 1:, 1:], C[1:, 1:, 0], C[1:, 0, 1:], C[0, 1:, 1:] = coeffs.u, coeffs.v, coeffs.w, coeffs.x
        C[1:, 0, 0], C[0, 1:, 0], C[0, 0, 1:], C[0, 0, 0] = coeffs.y, coeffs.z, coeffs.t, coeffs.scalar
    mat = np.einsum("abc,aij,bkl,cmn->ikmjln", C, E, E, E).reshape(n ** 3, n ** 3)
    return DenseOperator(mat, n, 3)


def closed_form_lhs_coefficients(a, b, consts):
    """u, v, w, x, y, z of [h12, [h12, h23]] for a diagonal coupling, in closed form.

    Index reading: f[x, y, z] = f^{xy}_z.  Terms born from the identity part of an
    anticommutator carry the factor kappa / n (1 for unscaled Pauli matrices).
    The a*a*b part of u and the a*a*a part of x are the terms that a hand
    simplification most easily drops; both are checked against trace projection
    in the tests.
    """
    f, d = consts.f, consts.d
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    s = consts.delta_norm / consts.local_dim
    u = (np.einsum("C,d,e,Cdz,edA,ezB->ABC", a, a, a, f, f, d)
         + np.einsum("C,d,e,Cdz,ezB,edA->ABC", a, a, a, f, f, d)
         - np.einsum("A,C,d,ACk,dkB->ABC", a, a, b, f, f)
         - np.einsum("A,C,d,dCk,AkB->ABC", a, a, b, f, f)
         + np.einsum("C,d,e,CeB,deA->ABC", a, b, a, f, f))
    v = (np.einsum("g,d,e,edz,gdA,gzB->AB", a, a, b, f, f, d)
         + np.einsum("g,d,e,edz,gzB,gdA->AB", a, a, b, f, f, d)
         + np.einsum("g,d,e,geB,deA->AB", b, b, a, f, f)
         - np.einsum("g,d,A,geA,deB->AB", b, b, a, f, f))
    w = s * np.einsum("B,g,d,gdA,dgB->AB", a, a, a, f, f)
    x = (np.einsum("B,g,d,geA,deB->AB", a, b, b, f, f)
         - s * np.einsum("g,g,B,gBk,gkA->AB", a, a, a, f, f))
    y = s * np.einsum("b,g,d,bgA,gbd->A", a, a, b, f, f)
    z = s * np.einsum("b,b,g,bdA,bdg->A", a, a, b, f, f)
    return {"u": u, "v": v, "w": w, "x": x, "y": y, "z": z}


# ---------------------------------------------------------------------------
# closed-form integrability conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExplicitConditionReport:
    max_residual: float
    family1_max: float
    family2_max: float
    violations: list
    tol: float

    @property
    def satisfied(self):
        return self.max_residual <= self.tol


def explicit_conditions(coupling, consts, tol=1e-9, max_violations=50):
    """Evaluate both closed-form families for a diagonal coupling.

    Family 1 is indexed by (alpha, beta) with alpha != beta, family 2 by
    (alpha, beta, gamma) with alpha != gamma.  Residuals are absolute.
    """
    if not coupling.is_diagonal():
        raise DimensionMismatch("explicit conditions need a diagonal coupling")
    a = coupling.diagonal()
    fam1, fam2 = _kernels.explicit_conditions(a, coupling.b, consts.f.astype(complex), consts.d.astype(complex))
    m = len(a)
    off = ~np.eye(m, dtype=bool)
    fam1 = np.where(off, np.abs(fam1), 0.0)
    fam2 = np.where(off[:, None, :], np.abs(fam2), 0.0)
    viol = [("family1", (int(i) + 1, int(j) + 1), float(fam1[i, j])) for i, j in zip(*np.nonzero(fam1 > tol))]
    viol += [("family2", (int(i) + 1, int(j) + 1, int(k) + 1), float(fam2[i, j, k]))
             for i, j, k in zip(*np.nonzero(fam2 > tol))]
    viol.sort(key=lambda t: -t[2])
    m1, m2 = float(fam1.max(initial=0.0)), float(fam2.max(initial=0.0))
    return ExplicitConditionReport(max(m1, m2), m1, m2, viol[:max_violations], tol)


def spin_half_products(a, b):
    """The six products a1a2b1, a1a2b2, a1a3b1, a1a3b3, a2a3b2, a2a3b3."""
    a1, a2, a3 = a
    b1, b2, b3 = b
    return np.array([a1 * a2 * b1, a1 * a2 * b2, a1 * a3 * b1, a1 * a3 * b3, a2 * a3 * b2, a2 * a3 * b3])


# ---------------------------------------------------------------------------
# diagonalization of a symmetric coupling
# ---------------------------------------------------------------------------

def _complex_orthonormalize(vecs, tol):
    out = []
    for v in vecs.T:
        for u in out:
            v = v - (u @ v) * u
        nrm = np.sqrt(v @ v + 0j)
        if abs(nrm) < tol:
            return None
        out.append(v / nrm)
    return np.array(out).T


def complex_orthogonal_diagonalize(a, tol=1e-8):
    """Return (O, D) with O^T O = 1 and a = O diag(D) O^T, or None if that fails.

    Real symmetric input goes through ``eigh``.  Complex symmetric input uses the
    eigenvectors of ``a`` re-orthonormalized under the bilinear form v^T w; a
    defective matrix or an isotropic eigenvector (v^T v = 0) returns None.
    """
    a = np.asarray(a, dtype=complex)
    if np.abs(a.imag).max() <= tol:
        w, O = np.linalg.eigh(a.real)
        return O.astype(complex), w.astype(complex)
    w, V = np.linalg.eig(a)
    order = np.argsort(w.real + 1e-3 * w.imag)
    w, V = w[order], V[:, order]
    blocks, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or abs(w[i] - w[start]) > 1e-6 * max(1.0, abs(w[start])):
            blocks.append((start, i))
            start = i
    cols = []
    for s, e in blocks:
        q = _complex_orthonormalize(V[:, s:e], tol)
        if q is None:
            return None
        cols.append(q)
    O = np.concatenate(cols, axis=1)
    if np.abs(O.T @ O - np.eye(len(w))).max() > 1e-6 or np.abs(O @ np.diag(w) @ O.T - a).max() > 1e-6 * max(1.0, np.abs(a).max()):
        return None
    return O, w


def diagonalize_coupling(coupling, basis):
    """Rotate to a basis in which ``a`` is diagonal.

    Returns (new_basis, diagonal CouplingSpec) or None when the symmetric matrix is
    not complex-orthogonally diagonalizable; callers then stay with the general
    (non-diagonal) form.
    """
    res = complex_orthogonal_diagonalize(coupling.a_matrix)
    if res is None:
        return None
    O, w = res
    T = basis.matrices
    newT = np.einsum("ba,bij->aij", O, T)
    new_b = O.T @ coupling.b
    nb = SuBasis(basis.local_dim, tuple(DenseOperator(t, basis.local_dim) for t in newT), basis.kappa, basis.name + "-rotated")
    return nb, CouplingSpec(w, new_b, coupling.shift)


__all__ = [
    "SuBasis", "StructureConstants", "CouplingSpec", "TwoSiteCoefficients", "ThreeSiteCoefficients",
    "ExplicitConditionReport", "gellmann_basis", "pauli_basis", "spin_one_operators",
    "structure_constants", "build_hamiltonian", "project_coefficients", "reconstruct",
    "closed_form_lhs_coefficients", "explicit_conditions", "spin_half_products",
    "complex_orthogonal_diagonalize", "diagonalize_coupling",
]
