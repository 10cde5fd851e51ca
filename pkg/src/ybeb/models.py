"""Model zoo and classification scans."""
from __future__ import annotations

import inspect
from dataclasses import dataclass

import numpy as np

from .bootstrap import reshetikhin_test
from .errors import BadParams, UnknownModel
from .opalg import DEFAULT_TOL, DenseOperator, commutator, permutation_op, tensor
from .subasis import (CouplingSpec, build_hamiltonian, gellmann_basis, pauli_basis, project_coefficients,
                      spin_half_products, spin_one_operators)

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    local_dim: int
    params: dict
    density: DenseOperator
    coupling: CouplingSpec = None
    basis_name: str = None
    expected_integrable: bool = None
    notes: str = ""

    def __post_init__(self):
        if self.density.sites != 2 or self.density.local_dim != self.local_dim:
            raise BadParams(f"{self.name}: builder produced a density with wrong shape")


def _pauli_density(a, b, shift=0.0):
    spec = CouplingSpec(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex), shift)
    return build_hamiltonian(spec, pauli_basis()), spec


def _heisenberg():
    h, spec = _pauli_density([1, 1, 1], [0, 0, 0])
    return h, spec, True, ""


def _xyz(Jx=1.0, Jy=1.0, Jz=1.0):
    h, spec = _pauli_density([Jx, Jy, Jz], [0, 0, 0])
    return h, spec, True, ""


def _ising_longitudinal(J=1.0, hz=0.5):
    h, spec = _pauli_density([0, 0, J], [0, 0, hz])
    return h, spec, True, "J sz.sz + hz (sz x 1 + 1 x sz)"


def _ising_transverse(J=1.0, g=0.5):
    h, spec = _pauli_density([0, 0, J], [g, 0, 0])
    return h, spec, True, "J sz.sz + g (sx x 1 + 1 x sx)"


def _xyh(Jx=1.0, Jy=0.7, hz=0.4):
    h, spec = _pauli_density([Jx, Jy, 0], [0, 0, hz])
    return h, spec, True, ""


def _spin1_products():
    S = spin_one_operators()
    SS = sum((tensor(s, s) for s in S[1:]), tensor(S[0], S[0]))
    return SS, SS @ SS


def _spin1_blbq(theta=0.0):
    SS, SS2 = _spin1_products()
    k = round(theta / (np.pi / 4))
    expected = bool(np.isclose(theta, k * np.pi / 4, atol=1e-12) and k % 4 != 0)
    return SS * np.cos(theta) + SS2 * np.sin(theta), None, expected, "cos(theta) S.S + sin(theta) (S.S)^2"


def _takhtajan_babujian(rescaled=True):
    SS, SS2 = _spin1_products()
    h = (SS - SS2) / SQRT2  # H1(-pi/4)
    if rescaled:
        h = h * SQRT2
    spec = takhtajan_babujian_coupling() if rescaled else None
    return h, spec, True, "sqrt(2) * H1(-pi/4) = S.S - (S.S)^2" if rescaled else "H1(-pi/4)"


def _sutherland_suN(N=2):
    N = int(N)
    if not 2 <= N <= 6:
        raise BadParams(f"N = {N} outside 2..6")
    return permutation_op(N), None, True, "sum e^{ab} x e^{ba}"


def _sN_broken(N=3, delta=(1.0, 1.0, 1.0)):
    N = int(N)
    delta = np.asarray(delta, dtype=complex).ravel()
    if delta.shape != (N,):
        raise BadParams(f"delta must have {N} entries, got {delta.shape[0]}")
    h = permutation_op(N).mat.copy()
    for a in range(N):
        idx = a * N + a
        h[idx, idx] = delta[a]
    expected = bool(np.all(np.isclose(np.abs(delta), 1.0) & np.isclose(delta.imag, 0.0)))
    return DenseOperator(h, N, 2), None, expected, "swap with diagonal weights delta_a on |aa>"


_ZOO = {
    "heisenberg": (2, _heisenberg),
    "xyz": (2, _xyz),
    "ising_longitudinal": (2, _ising_longitudinal),
    "ising_transverse": (2, _ising_transverse),
    "xyh": (2, _xyh),
    "spin1_blbq": (3, _spin1_blbq),
    "takhtajan_babujian": (3, _takhtajan_babujian),
    "sutherland_suN": (None, _sutherland_suN),
    "sN_broken": (None, _sN_broken),
}

MODEL_NAMES = tuple(_ZOO)


def zoo(name, params=None, **kwargs):
    """Build a named model.  Parameters may be passed as a dict or as keywords."""
    if name not in _ZOO:
        raise UnknownModel(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}", model=name)
    params = dict(params or {}, **kwargs)
    n, builder = _ZOO[name]
    allowed = set(inspect.signature(builder).parameters)
    extra = set(params) - allowed
    if extra:
        raise BadParams(f"{name}: unknown parameter(s) {sorted(extra)}; allowed {sorted(allowed)}")
    try:
        h, spec, expected, notes = builder(**params)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadParams):
            raise
        raise BadParams(f"{name}: {exc}") from exc
    basis = None
    if spec is not None:
        basis = "pauli" if h.local_dim == 2 else "gellmann3"
    return ModelSpec(name, h.local_dim, params, h, spec, basis, expected, notes)


def takhtajan_babujian_coupling():
    """Coupling of S.S - (S.S)^2 on Gell-Mann/sqrt(2) generators (kappa = 1).

    a11 = a22 = a66 = a77 = 1, a16 = a27 = 2, a44 = a55 = -1, a38 = sqrt(3),
    a88 = 2, no single-site terms, constant -4/3.
    """
    a = np.zeros((8, 8))
    for i in (0, 1, 5, 6):
        a[i, i] = 1.0
    a[0, 5] = a[5, 0] = a[1, 6] = a[6, 1] = 2.0
    a[3, 3] = a[4, 4] = -1.0
    a[2, 7] = a[7, 2] = SQRT3
    a[7, 7] = 2.0
    return CouplingSpec(a, np.zeros(8), -4.0 / 3.0)


def takhtajan_babujian_table_coupling():
    """A frequently quoted coefficient table for the same model, kept as a fixture.

    a11 = a16 = a66 = a22 = a27 = a77 = -a44 = 1, a33 = -1/4, a38 = 3 sqrt(3)/4,
    a88 = 5/4, constant -4/3.  This density is *not* S.S - (S.S)^2 (its spectrum
    differs) and it fails the Reshetikhin test; see tests/test_models.py.
    """
    a = np.zeros((8, 8))
    for i, j in [(0, 0), (0, 5), (5, 0), (5, 5), (1, 1), (1, 6), (6, 1), (6, 6)]:
        a[i, j] = 1.0
    a[3, 3] = -1.0
    a[2, 2] = -0.25
    a[2, 7] = a[7, 2] = 3 * SQRT3 / 4
    a[7, 7] = 1.25
    return CouplingSpec(a, np.zeros(8), -4.0 / 3.0)


def ad_power(x, y, k):
    """ad_x^k y."""
    for _ in range(k):
        y = commutator(x, y)
    return y


# ---------------------------------------------------------------------------
# spin-1/2 classification
# ---------------------------------------------------------------------------

SPIN_HALF_CLASSES = ("free", "XYZ", "longitudinal Ising", "XYh", "transverse Ising")


@dataclass(frozen=True)
class SpinHalfClassification:
    a: tuple
    b: tuple
    products: tuple
    product_verdict: bool
    label: str
    reshetikhin_residual: float
    reshetikhin_verdict: bool

    @property
    def agree(self):
        return self.product_verdict == self.reshetikhin_verdict


def _label(a, b, tol):
    za = np.abs(a) <= tol
    zb = np.abs(b) <= tol
    if za.all():
        return "free"
    if zb.all():
        return "XYZ"
    nz = np.nonzero(~za)[0]
    if len(nz) == 1:
        i = nz[0]
        others = [j for j in range(3) if j != i]
        if zb[i]:
            return "transverse Ising"
        if zb[others].all():
            return "longitudinal Ising"
        return "tilted-field Ising"
    if len(nz) == 2:
        if zb[list(nz)].all():
            return "XYh"
    return "interacting with field"


def spin_half_classify(a, b, tol=DEFAULT_TOL):
    """Six-product check, class label and Reshetikhin verdict for a diagonal spin-1/2 coupling.

    The products vanish for every named class, but they also vanish for a single
    Ising axis in a field with components both along and across that axis
    (label "tilted-field Ising"), which is not integrable; the Reshetikhin verdict
    is reported alongside so such disagreements are visible.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    prods = spin_half_products(a, b)
    scale = max(1.0, np.abs(a).max(), np.abs(b).max()) ** 3
    verdict = bool(np.abs(prods).max() <= tol * scale)
    h, _ = _pauli_density(a, b)
    rt = reshetikhin_test(h, tol, raise_on_fail=False)
    return SpinHalfClassification(tuple(a), tuple(b), tuple(prods), verdict, _label(a, b, tol * max(1.0, np.abs(a).max(), np.abs(b).max())),
                                  rt.residual, rt.passes)


def named_spin_half_examples():
    """One representative coupling (a, b) per named class."""
    return {
        "XYZ": ((1.0, 0.6, -0.3), (0.0, 0.0, 0.0)),
        "longitudinal Ising": ((0.0, 0.0, 1.0), (0.0, 0.0, 0.7)),
        "XYh": ((1.0, 0.5, 0.0), (0.0, 0.0, 0.8)),
        "transverse Ising": ((0.0, 0.0, 1.0), (0.9, 0.4, 0.0)),
        "free": ((0.0, 0.0, 0.0), (0.3, -0.2, 0.5)),
    }


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanPoint:
    parameter: object
    residual: float
    passes: bool


def spin1_theta_scan(angles, tol=DEFAULT_TOL):
    out = []
    for th in angles:
        rt = reshetikhin_test(zoo("spin1_blbq", theta=float(th)).density, tol, raise_on_fail=False)
        out.append(ScanPoint(float(th), rt.residual, rt.passes))
    return out


def theta_grid(step=np.pi / 36):
    """Angles k*step covering (-pi, pi]."""
    kmax = int(round(np.pi / step))
    return [k * step for k in range(-kmax + 1, kmax + 1)]


def suN_delta_scan(N, grid, tol=DEFAULT_TOL):
    out = []
    for delta in grid:
        delta = tuple(np.asarray(delta, dtype=float).ravel())
        rt = reshetikhin_test(zoo("sN_broken", N=N, delta=delta).density, tol, raise_on_fail=False)
        out.append(ScanPoint(delta, rt.residual, rt.passes))
    return out


def random_spin_half_couplings(count, seed):
    """Dense Gaussian couplings (a, b) from a seeded generator."""
    rng = np.random.default_rng(seed)
    return [(tuple(rng.normal(size=3)), tuple(rng.normal(size=3))) for _ in range(count)]


def project_density(h, basis=None):
    """Two-site coefficient tensors of a density on a Gell-Mann/sqrt(2) or Pauli basis."""
    if basis is None:
        basis = pauli_basis() if h.local_dim == 2 else gellmann_basis(h.local_dim)
    return project_coefficients(h, basis)
