"""Conserved charges: transfer-matrix series, the three-local charge, boost ladder
checks, the discrete conformal superoperators and the lattice Poincare demo.

Chains are periodic unless stated; sites are 1-based as elsewhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np
import sympy as sp

from . import _kernels
from .errors import InfeasibleSize, OutOfRange, TruncationTooShallow
from .opalg import DEFAULT_TOL, DenseOperator, PositionedOperatorSum, commutator, place, partial_trace_normalized, permutation_op

MAX_DIM = 4096


def _check_size(n, L):
    if n ** L > MAX_DIM:
        raise InfeasibleSize(f"n^L = {n}^{L} = {n ** L} exceeds {MAX_DIM}", local_dim=n, length=L)


def _bond_sites(x, L, periodic=True):
    return (x, x % L + 1) if periodic else (x, x + 1)


def chain_hamiltonian(h, L, periodic=True):
    """Sum of h over the bonds (x, x+1); on a periodic chain the bond (L, 1) is included."""
    _check_size(h.local_dim, L)
    bonds = range(1, L + 1) if periodic else range(1, L)
    out = DenseOperator.zeros(h.local_dim, L)
    for x in bonds:
        out = out + place(h, _bond_sites(x, L, periodic), L)
    return out


# ---------------------------------------------------------------------------
# three-local charge
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeLocalCharge:
    Q: DenseOperator
    H: DenseOperator
    commutator_norm: float


def three_local_charge(h, L):
    """Q = sum_x [h_{x,x+1}, h_{x-1,x}] on a periodic chain and the norm of [H, Q]."""
    if L < 4:
        raise OutOfRange(f"three_local_charge needs L >= 4, got {L}")
    _check_size(h.local_dim, L)
    bonds = [place(h, _bond_sites(x, L), L) for x in range(1, L + 1)]
    H = sum(bonds[1:], bonds[0])
    Q = DenseOperator.zeros(h.local_dim, L)
    for x in range(L):
        Q = Q + commutator(bonds[x], bonds[x - 1])
    return ThreeLocalCharge(Q, H, commutator(H, Q).norm())


# ---------------------------------------------------------------------------
# transfer-matrix charges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChargeSet:
    L: int
    n: int
    K: int
    Q: dict                      # order -> DenseOperator on L sites
    boundary: str = "periodic"
    affine: tuple = None         # (alpha, beta, residual) with Q[2] ~ alpha H + beta

    def commutator_norms(self):
        keys = sorted(self.Q)
        return {(a, b): commutator(self.Q[a], self.Q[b]).norm()
                for i, a in enumerate(keys) for b in keys[i + 1:]}


def _series_mul(a, b, K):
    out = [np.zeros_like(a[0]) for _ in range(K)]
    for i in range(K):
        for j in range(K - i):
            out[i + j] = out[i + j] + a[i] @ b[j]
    return out


def _series_log(Y, K):
    """log(1 + Y) for a matrix series with Y[0] = 0, truncated to K coefficients."""
    out = [np.zeros_like(Y[0]) for _ in range(K)]
    power = Y
    for j in range(1, K):
        sign = 1.0 if j % 2 else -1.0
        for k in range(K):
            out[k] = out[k] + sign / j * power[k]
        power = _series_mul(power, Y, K)
    return out


def transfer_charges(R, L, H=None):
    """Charges Q^(k+1) = k! [xi^k] ln t(xi) for k = 1 .. K-1 from R = [R^(0), ..., R^(K)].

    Each site carries R_{a,x}(xi) = P Ř(xi) with Ř(xi) = sum_k R^(k) xi^k / k!, the
    auxiliary space a sitting in front of the chain.  The monodromy R_{aL} ... R_{a1}
    is built one auxiliary basis column at a time, so memory stays at n^(L+1) x n^L
    per coefficient.  The series is normalized by t(0), the cyclic shift.  ``H``
    (optional) is used for the affine fit of Q^(2); otherwise the bond sum of R^(1)
    is used.
    """
    R = list(R)
    K = len(R) - 1
    if K < 2:
        raise TruncationTooShallow(f"need R up to order >= 2, got {K}", K=K)
    n = R[1].local_dim
    _check_size(n, L)
    if R[0] is None:
        R[0] = DenseOperator.identity(n, 2)
    P = permutation_op(n).mat
    site_series = [P @ (R[k].mat / factorial(k)) for k in range(K)]
    dim = n ** L
    t = [np.zeros((dim, dim), dtype=complex) for _ in range(K)]
    for alpha in range(n):
        cols = np.zeros((n * dim, dim), dtype=complex)
        cols[alpha * dim:(alpha + 1) * dim] = np.eye(dim)
        T = [cols] + [np.zeros_like(cols) for _ in range(K - 1)]
        for x in range(1, L + 1):
            new = [np.zeros_like(cols) for _ in range(K)]
            for j, r in enumerate(site_series):
                for i in range(K - j):
                    if T[i].any():
                        new[i + j] += _kernels.apply_two_site(r, T[i], n, L + 1, 0, x)
            T = new
        for k in range(K):
            t[k] += T[k][alpha * dim:(alpha + 1) * dim]
    t0 = t[0]
    Y = [np.zeros_like(t0)] + [np.linalg.solve(t0, t[k]) for k in range(1, K)]
    logs = _series_log(Y, K)
    Q = {k + 1: DenseOperator(factorial(k) * logs[k], n, L) for k in range(1, K)}
    if H is None:
        H = chain_hamiltonian(R[1], L)
    return ChargeSet(L, n, K, Q, affine=affine_fit(Q[2], H))


def affine_fit(A, H):
    """Least-squares alpha, beta with A ~ alpha H + beta 1, and the relative residual."""
    one = np.eye(H.dim).ravel()
    M = np.stack([H.mat.ravel(), one], axis=1)
    (alpha, beta), *_ = np.linalg.lstsq(M, A.mat.ravel(), rcond=None)
    res = np.linalg.norm(A.mat.ravel() - M @ np.array([alpha, beta])) / max(1.0, A.norm())
    return complex(alpha), complex(beta), float(res)


# ---------------------------------------------------------------------------
# boost operator on an open chain
# ---------------------------------------------------------------------------

def support_residual(O, window):
    """How far O is from acting trivially on the bulk sites window+1 .. L-window.

    Residual |O - (tr_bulk O) (x) 1_bulk| / max(1, |O|); zero exactly when O is a sum
    of terms living within ``window`` sites of either end.
    """
    L = O.sites
    bulk = list(range(window + 1, L - window + 1))
    if not bulk:
        return 0.0
    rest = [s for s in range(1, L + 1) if s not in bulk]
    if rest:
        reduced = place(partial_trace_normalized(O, bulk), rest, L)
    else:
        reduced = DenseOperator.identity(O.local_dim, L) * complex(partial_trace_normalized(O, bulk)[0, 0])
    return (O - reduced).norm() / max(1.0, O.norm())


def minimal_window(O, tol, start=0):
    """Smallest boundary width w for which O acts trivially on the bulk (None if none)."""
    for w in range(start, O.sites // 2 + 1):
        if support_residual(O, w) <= tol:
            return w
    return None


@dataclass
class BoostReport:
    L: int
    tol: float
    ladder_residual: float       # |[B,H] - sum_{x=2}^{L-1} rho_x| / |[B,H]|
    bulk_residual: float         # support check of [H, [B,H]] with boundary window 2
    boundary_norm: float         # |[H, [B,H]]|
    rung_bulk_residual: float    # support check of [H, [B,[B,H]]] with window ``rung_window`` (None if no bulk)
    rung_boundary_norm: float
    rung_window: int
    squid: dict = field(default_factory=dict)     # (m, n) -> Jacobi residual
    commutator_windows: dict = field(default_factory=dict)   # (m, n) -> minimal window

    @property
    def passes(self):
        return self.bulk_residual <= self.tol and (self.rung_bulk_residual is None or self.rung_bulk_residual <= self.tol)


def boost_ladder_check(h, L_open, tol=DEFAULT_TOL, window=2, rung_window=3, orders=4):
    """Ladder and conservation diagnostics for B = sum_x x h_{x-1,x} on an open chain.

    On the open chain [B, H] equals the interior sum of rho_x = [h_{x,x+1}, h_{x-1,x}]
    identically, so the ladder itself has no boundary correction.  The boundary
    enters through conservation: Q = [B, H] commutes with H up to terms within
    ``window`` sites of either end exactly when the Reshetikhin condition holds,
    and one rung higher [H, [B, Q]] is confined to ``rung_window`` sites.  The squid
    identity is evaluated on Q^(2) = H, Q^(k+1) = [B, Q^(k)] for k < ``orders``; on
    a finite chain it is the Jacobi identity and holds to rounding.
    """
    L = L_open
    if L < 6:
        raise OutOfRange(f"boost_ladder_check needs L >= 6, got {L}")
    n = h.local_dim
    _check_size(n, L)
    bonds = {x: place(h, (x - 1, x), L) for x in range(2, L + 1)}
    H = sum(bonds.values(), DenseOperator.zeros(n, L))
    B = sum((bonds[x] * x for x in bonds), DenseOperator.zeros(n, L))
    rho = sum((commutator(bonds[x + 1], bonds[x]) for x in range(2, L)), DenseOperator.zeros(n, L))
    Q3 = commutator(B, H)
    ladder_res = (Q3 - rho).norm() / max(1.0, Q3.norm())
    cons = commutator(H, Q3)
    rung = commutator(H, commutator(B, Q3))
    rung_bulk = support_residual(rung, rung_window) if L > 2 * rung_window else None
    charges = {2: H, 3: Q3}
    for k in range(3, orders):
        charges[k + 1] = commutator(B, charges[k])
    squid, windows = {}, {}
    top = max(charges)
    for m in range(2, top):
        for k in range(2, top):
            lhs = commutator(charges[m + 1], charges[k])
            rhs = commutator(charges[k + 1], charges[m]) + commutator(B, commutator(charges[m], charges[k]))
            squid[(m, k)] = (lhs - rhs).norm() / max(1.0, lhs.norm(), rhs.norm())
    for m in charges:
        for k in charges:
            if m < k:
                windows[(m, k)] = minimal_window(commutator(charges[m], charges[k]), tol)
    return BoostReport(L, tol, ladder_res, support_residual(cons, window), cons.norm(), rung_bulk, rung.norm(),
                       rung_window, squid, windows)


# ---------------------------------------------------------------------------
# discrete conformal superoperators on positioned sums
# ---------------------------------------------------------------------------
# Products of superoperators are read in written order, the leftmost factor acting
# first; with this reading the three sl_2 relations hold as stated.

def shift(s, k=1):
    """T^k: move every term k sites to the right."""
    return s.shifted(k)


def op_P(s):
    return s - shift(s)


def op_D(s):
    s = s.weighted(lambda x: x)
    return shift(s, -1) - s


def op_K(s):
    s = shift(s.weighted(lambda x: x * (x - 1)), -1)
    return shift(s, -1) - s


def super_commutator(A, B, s):
    return B(A(s)) - A(B(s))


@dataclass(frozen=True)
class ConformalReport:
    DP: object     # exact max |weight| of [D,P][s] - P[s]
    DK: object     # ... of [D,K][s] + K[s]
    KP: object     # ... of [K,P][s] - 2 D[s]

    @property
    def max_residual(self):
        return max(self.DP, self.DK, self.KP)


def conformal_superops(sample):
    """Residuals of [D,P] = P, [D,K] = -K and [K,P] = 2D applied to ``sample``."""
    return ConformalReport(
        (super_commutator(op_D, op_P, sample) - op_P(sample)).max_abs_weight(),
        (super_commutator(op_D, op_K, sample) + op_K(sample)).max_abs_weight(),
        (super_commutator(op_K, op_P, sample) - op_D(sample).scaled(2)).max_abs_weight(),
    )


def uniform_family(h, lo, hi, weight=lambda y: 1):
    """sum_{y=lo}^{hi} weight(y) h_y, with h_y the density whose first site is y."""
    return PositionedOperatorSum([h], {(y, 0): weight(y) for y in range(lo, hi + 1)})


def conformal_window_checks(h, half_width=30, window=20):
    """D[H] = H, K[H] = 2B and P[B] = H compared on sites |y| <= window.

    H = sum_y h_y and B = sum_y (y + 1) h_y are truncated to |y| <= half_width, so
    only sites well inside that range are meaningful.
    """
    H = uniform_family(h, -half_width, half_width)
    B = uniform_family(h, -half_width, half_width, lambda y: y + 1)

    def restricted(s):
        return PositionedOperatorSum(s.templates, {k: w for k, w in s.weights.items() if -window <= k[0] <= window})

    return {
        "D[H]-H": restricted(op_D(H) - H).max_abs_weight(),
        "K[H]-2B": restricted(op_K(H) - B.scaled(2)).max_abs_weight(),
        "P[B]-H": restricted(op_P(B) - H).max_abs_weight(),
    }


def random_positioned_sample(h, rng, terms=6, span=10):
    """Integer-weighted positioned copies of ``h`` at random sites."""
    sites = rng.integers(-span, span + 1, size=terms)
    weights = rng.integers(-5, 6, size=terms)
    out = {}
    for x, w in zip(sites, weights):
        out[(int(x), 0)] = out.get((int(x), 0), 0) + int(w)
    return PositionedOperatorSum([h], out)


# ---------------------------------------------------------------------------
# lattice Poincare group
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """(Lambda, alpha) in the (1+1)D Poincare group, held in exact arithmetic."""

    lam: sp.Matrix
    translation: sp.Matrix

    def __mul__(self, other):
        return GroupElement(_simplify(self.lam * other.lam),
                            _simplify(self.translation + self.lam * other.translation))

    def inverse(self):
        inv = _simplify(self.lam.inv())
        return GroupElement(inv, _simplify(-inv * self.translation))

    def __eq__(self, other):
        return isinstance(other, GroupElement) and all(
            sp.simplify(a - b) == 0 for a, b in zip(list(self.lam) + list(self.translation),
                                                   list(other.lam) + list(other.translation)))

    __hash__ = None

    @property
    def lambda_float(self):
        return np.array(self.lam.evalf(), dtype=float)

    @property
    def translation_float(self):
        return np.array(self.translation.evalf(), dtype=float).ravel()


def _simplify(M):
    return M.applyfunc(lambda e: sp.nsimplify(sp.radsimp(sp.expand(e))) if e.free_symbols == set() else e)


def boost(cosh_eta):
    c = sp.Rational(cosh_eta)
    s = sp.sqrt(c ** 2 - 1)
    return GroupElement(sp.Matrix([[c, s], [s, c]]), sp.Matrix([0, 0]))


def translation(v):
    return GroupElement(sp.eye(2), sp.Matrix([sp.nsimplify(v[0]), sp.nsimplify(v[1])]))


def group_commutator(g, h):
    return g * h * g.inverse() * h.inverse()


def lattice_coordinates(v, t1, t2):
    """Rational (x, y) with v = x t1 + y t2, or None if t1, t2 do not span v."""
    M = sp.Matrix.hstack(t1, t2)
    if sp.simplify(M.det()) == 0:
        # degenerate basis: only multiples of t1 are representable
        if sp.simplify(v[1] * t1[0] - v[0] * t1[1]) != 0:
            return None
        return (sp.nsimplify(sp.radsimp(v[0] / t1[0])), sp.Integer(0))
    sol = _simplify(M.LUsolve(v))
    return tuple(sol)


def _as_fraction(e):
    e = sp.nsimplify(e)
    if e.is_Rational:
        return Fraction(int(e.p), int(e.q))
    return None


@dataclass
class PoincareReport:
    cosh_eta: Fraction
    k_max: int
    closure: bool
    coordinates: list          # lattice coordinates of t_1 .. t_kmax (Fraction pairs or None)
    first_offlattice: int = None
    t3_relation: bool = None    # t_3 = (t_1 t_2)^{2(cosh eta - 1)}
    fibonacci: bool = None      # only evaluated at cosh eta = 3/2
    elements: list = field(default_factory=list)


def poincare_demo(cosh_eta, k_max=10):
    """Iterate t_{k+1} = b t_k b^-1 t_k^-1 from t_1 = (1, (1, 0)) with exact arithmetic.

    Closure means every t_k translation is an integer combination of t_1 and t_2.
    """
    c = Fraction(cosh_eta) if not isinstance(cosh_eta, float) else Fraction(str(cosh_eta))
    if c < 1:
        raise OutOfRange(f"cosh eta must be >= 1, got {c}")
    if k_max < 2:
        raise OutOfRange(f"k_max must be >= 2, got {k_max}")
    b = boost(sp.Rational(c.numerator, c.denominator))
    ts = [translation((1, 0))]
    while len(ts) < k_max:
        ts.append(group_commutator(b, ts[-1]))
    t1, t2 = ts[0].translation, ts[1].translation
    coords, first_bad = [], None
    for k, t in enumerate(ts, start=1):
        xy = lattice_coordinates(t.translation, t1, t2)
        fr = None if xy is None else tuple(_as_fraction(e) for e in xy)
        if fr is None or any(f is None for f in fr):
            fr = None
        coords.append(fr)
        if first_bad is None and (fr is None or any(f.denominator != 1 for f in fr)):
            first_bad = k
    rep = PoincareReport(c, k_max, first_bad is None, coords, first_bad, elements=ts)
    if k_max >= 3:
        power = 2 * (sp.Rational(c.numerator, c.denominator) - 1)
        rep.t3_relation = bool(all(sp.simplify(a - b) == 0 for a, b in
                                   zip(ts[2].translation, power * (t1 + t2))))
    if c == Fraction(3, 2):
        rec = all(ts[k + 1] == ts[k] * ts[k - 1] for k in range(1, k_max - 1))
        fib = [1, 1]
        while len(fib) < k_max + 2:
            fib.append(fib[-1] + fib[-2])
        # t_k = F_{k-2} t_1 + F_{k-1} t_2 for k >= 3, with F_0 = 0
        F = [0] + fib
        mags = all(coords[k - 1] == (Fraction(F[k - 2]), Fraction(F[k - 1])) for k in range(3, k_max + 1))
        rep.fibonacci = bool(rec and mags)
    return rep
