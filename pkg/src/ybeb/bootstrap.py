"""Order-by-order construction of the R-matrix series Ř(ξ) = Σ_k R^(k) ξ^k / k!.

R^(0) = 1 and R^(1) = h + c·1.  Even orders follow from unitarity, odd orders
from Kennedy inversion of the higher conditions.  The scalar ``c`` is carried as
a polynomial variable until it is either fixed by the caller or solved for.

Three-site notation: a_k = R^(k) (x) 1 and b_k = 1 (x) R^(k).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .errors import (HigherConditionViolated, NoAdmissibleShift, NotADivergence, NotIntegrable,
                     OddUnitarityViolation, TooManyBranches)
from .kennedy import divergence_of, invert_divergence
from .opalg import (DEFAULT_TOL, BivariateOperatorSeries, DenseOperator, ShiftPolyOperator, apply_linear,
                    commutator, tensor)

log = logging.getLogger(__name__)

MAX_BRANCHES = 8
ROOT_TOL = 1e-6


def _one(x):
    return DenseOperator.identity(x.local_dim, x.sites)


def _left(x):
    return apply_linear(x, lambda o: tensor(o, DenseOperator.identity(o.local_dim)))


def _right(x):
    return apply_linear(x, lambda o: tensor(DenseOperator.identity(o.local_dim), o))


def _comm(x, y):
    return x @ y - y @ x


def _norm(x):
    return x.norm()


def _rel(x, scale):
    return _norm(x) / max(1.0, scale)


# ---------------------------------------------------------------------------
# the lowest condition
# ---------------------------------------------------------------------------

def reshetikhin_lhs(h):
    """[h12, [h12, h23]] - [h23, [h23, h12]] on three sites."""
    h12, h23 = _left(h), _right(h)
    return commutator(h12, commutator(h12, h23)) - commutator(h23, commutator(h23, h12))


def reshetikhin_divergence(h):
    """[h12 + h23, [h23, h12]] = -reshetikhin_lhs(h); equals X12 - X23 when integrable."""
    h12, h23 = _left(h), _right(h)
    return commutator(h12 + h23, commutator(h23, h12))


@dataclass(frozen=True)
class ReshetikhinResult:
    passes: bool
    residual: float
    X: DenseOperator
    R3: ShiftPolyOperator
    trace_part: complex


def _r1_poly(h):
    return ShiftPolyOperator([h, _one(h)])


def reshetikhin_test(h, tol=DEFAULT_TOL, raise_on_fail=True):
    """Invert the Reshetikhin divergence; on success R^(3)(c) = X + (h + c)^3."""
    res = invert_divergence(reshetikhin_divergence(h), tol, raise_on_fail=False)
    R3 = res.candidate + _r1_poly(h) ** 3
    out = ReshetikhinResult(res.is_divergence, res.residual, res.candidate, R3, res.trace_part)
    if raise_on_fail and not out.passes:
        raise NotIntegrable(f"Reshetikhin condition fails: residual {res.residual:.3e}", res.residual, 3, out)
    return out


# ---------------------------------------------------------------------------
# unitarity
# ---------------------------------------------------------------------------

def unitarity_sum(R, N):
    """Σ_{k=0}^{N} (-1)^k C(N,k) R^(k) R^(N-k); vanishes when Ř(ζ)Ř(-ζ) = 1 to order N."""
    acc = None
    for k in range(N + 1):
        t = R[k] @ R[N - k] * ((-1) ** k * comb(N, k))
        acc = t if acc is None else acc + t
    return acc


def _scale(R, upto):
    return max(_norm(R[k]) for k in range(1, upto + 1))


def odd_unitarity_residual(R, N):
    s = unitarity_sum(R, N)
    return _rel(s, _scale(R, N) ** 2)


def even_order(R, m, tol=DEFAULT_TOL):
    """R^(2m) = ½ Σ_{k=1}^{2m-1} (-1)^{k-1} C(2m,k) R^(k) R^(2m-k).

    Also checks the odd identities for every odd order below 2m.
    """
    for N in range(1, 2 * m, 2):
        r = odd_unitarity_residual(R, N)
        if r > tol:
            raise OddUnitarityViolation(f"odd unitarity identity fails at order {N}: {r:.3e}", N, r)
    acc = None
    for k in range(1, 2 * m):
        t = R[k] @ R[2 * m - k] * (0.5 * (-1) ** (k - 1) * comb(2 * m, k))
        acc = t if acc is None else acc + t
    return acc


# ---------------------------------------------------------------------------
# higher conditions
# ---------------------------------------------------------------------------

def higher_lhs(R, m):
    """½ Σ_{k=1}^{2m-1} (-1)^k C(2m,k) ([a_k,[b_1,a_{2m-k}]] - [b_k,[a_1,b_{2m-k}]])."""
    a = {k: _left(R[k]) for k in range(1, 2 * m)}
    b = {k: _right(R[k]) for k in range(1, 2 * m)}
    acc = None
    for k in range(1, 2 * m):
        t = (_comm(a[k], _comm(b[1], a[2 * m - k])) - _comm(b[k], _comm(a[1], b[2 * m - k]))) * (
            0.5 * (-1) ** k * comb(2 * m, k))
        acc = t if acc is None else acc + t
    return acc


def known_rhs(R, m):
    """F = Σ_{k=1}^{2m} (-1)^k C(2m,k-1) R^(k) R^(2m+1-k): the two-site RHS without R^(2m+1)."""
    acc = None
    for k in range(1, 2 * m + 1):
        t = R[k] @ R[2 * m + 1 - k] * ((-1) ** k * comb(2 * m, k - 1))
        acc = t if acc is None else acc + t
    return acc


@dataclass(frozen=True)
class HigherConditionResult:
    m: int
    R_next: object
    residual: float
    identity_residual: float
    W: object
    lhs: object = field(repr=False, default=None)


def higher_condition_solve(R, m, tol=DEFAULT_TOL):
    """Solve the order-(2m+1) condition for R^(2m+1) = F - W, W the Kennedy candidate.

    The condition reads LHS = (F - R^(2m+1))_12 - (F - R^(2m+1))_23, so LHS must be a
    divergence of W and R^(2m+1) = F - W up to an identity multiple (the identity part
    of R^(2m+1) is a gauge choice, fixed here by W being traceless).
    """
    lhs = higher_lhs(R, m)
    try:
        inv = invert_divergence(lhs, tol)
    except NotADivergence as exc:
        raise HigherConditionViolated(f"order {2 * m + 1} condition fails: residual {exc.residual:.3e}",
                                      m, exc.residual) from exc
    F = known_rhs(R, m)
    Rn = F - inv.candidate
    # end-to-end: LHS - [(F - R)_12 - (F - R)_23]
    G = F - Rn
    full = lhs - (_left(G) - _right(G))
    ident = _norm(full) / max(1.0, _norm(lhs))
    return HigherConditionResult(m, Rn, inv.residual, ident, inv.candidate, lhs)


def higher_condition_residual(R, m):
    """Matrix-valued residual of the divergence test; polynomial in c for polynomial input."""
    lhs = higher_lhs(R, m)
    res = invert_divergence(lhs, np.inf, raise_on_fail=False)
    W = res.candidate
    return lhs - (_left(W) - _right(W)) if isinstance(lhs, ShiftPolyOperator) else lhs - divergence_of(W)


# ---------------------------------------------------------------------------
# the shift constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftSolution:
    status: str            # "unconstrained" | "roots" | "none"
    roots: tuple
    n_polynomials: int
    max_degree: int

    @property
    def chosen(self):
        return (0.0,) if self.status == "unconstrained" else self.roots


def _dedupe(vals, tol):
    out = []
    for v in vals:
        if not any(abs(v - u) <= tol * max(1.0, abs(u)) for u in out):
            out.append(v)
    return out


def common_roots(polys, atol=1e-10, root_tol=ROOT_TOL, seed=0):
    """Common roots of scalar polynomials (rows of coefficients, lowest power first).

    Rows whose coefficients are all below ``atol`` are dropped.  Candidate roots come
    from a random complex combination of the rows (every common root is one of its
    roots), via the companion matrix in ``np.roots``; a candidate survives when every
    row, evaluated there, is below ``root_tol`` relative to its coefficient scale.
    Returns (status, roots).
    """
    polys = np.asarray(polys, dtype=complex)
    if polys.ndim == 1:
        polys = polys[None]
    keep = np.abs(polys).max(axis=1) > atol
    polys = polys[keep]
    if len(polys) == 0:
        return "unconstrained", ()
    rng = np.random.default_rng(seed)
    w = rng.normal(size=len(polys)) + 1j * rng.normal(size=len(polys))
    combo = w @ (polys / np.abs(polys).max(axis=1, keepdims=True))
    cand = []
    nz = np.nonzero(np.abs(combo) > atol * np.abs(combo).max())[0]
    if len(nz) and nz[-1] > 0:
        cand = list(np.roots(combo[: nz[-1] + 1][::-1]))
    for p in polys:  # also the roots of each low-degree row, as polishing seeds
        nzp = np.nonzero(np.abs(p) > atol)[0]
        if len(nzp) and nzp[-1] == 1:
            cand.append(-p[0] / p[1])
    good = []
    for c in cand:
        powers = c ** np.arange(polys.shape[1])
        vals = np.abs(polys @ powers)
        scale = np.abs(polys) @ np.abs(powers)
        if np.all(vals <= root_tol * np.maximum(scale, atol)):
            good.append(complex(c))
    good = _dedupe(sorted(good, key=lambda z: (round(z.real, 6), round(z.imag, 6))), root_tol)
    return ("roots" if good else "none"), tuple(good)


def solve_shift_constant(R, m=2, tol=DEFAULT_TOL):
    """Common roots in c of every entry of the order-(2m+1) residual polynomial.

    ``R`` holds R^(1..2m) as polynomials in c.  Entry polynomials whose coefficients
    are all below ``tol`` times the condition's scale count as identically zero.
    """
    resid = higher_condition_residual(R, m)
    if not isinstance(resid, ShiftPolyOperator):
        resid = ShiftPolyOperator([resid])
    lhs_scale = max(1.0, higher_lhs(R, m).norm())
    arr = resid.array.reshape(resid.array.shape[0], -1).T  # one row per matrix entry
    status, roots = common_roots(arr, atol=tol * lhs_scale)
    live = int((np.abs(arr).max(axis=1) > tol * lhs_scale).sum())
    return ShiftSolution(status, roots, live, resid.degree)


# ---------------------------------------------------------------------------
# the full bootstrap
# ---------------------------------------------------------------------------

@dataclass
class OrderStatus:
    order: int
    kind: str        # "reshetikhin" | "even" | "higher" | "shift" | "scalar"
    residual: float
    passed: bool
    note: str = ""


@dataclass
class Branch:
    c: object                           # complex or "symbolic"
    R: list                             # R[0] = 1, R[k] DenseOperator or ShiftPolyOperator
    status_log: list = field(default_factory=list)
    failed_at: int = None

    @property
    def order(self):
        return len(self.R) - 1

    def record(self, order, kind, residual, passed, note=""):
        self.status_log.append(OrderStatus(order, kind, float(residual), bool(passed), note))


@dataclass
class BootstrapState:
    h: DenseOperator
    K: int
    tol: float
    c_policy: object
    branches: list = field(default_factory=list)
    pruned: list = field(default_factory=list)
    shift: ShiftSolution = None
    scalar_input: bool = False

    @property
    def passed_through(self):
        return max((b.order for b in self.branches), default=0)


def _is_scalar(h, tol):
    X, mu = h.traceless()
    return X.norm() <= tol * max(1.0, h.norm()), mu


def _evaluate_branch(R, c):
    return [r.evaluate_at(c) if isinstance(r, ShiftPolyOperator) else r for r in R]


def _advance(branch, K, tol, start, force=False):
    """Fill orders ``start..K`` on a concrete branch.  Returns False if it fails."""
    R = branch.R
    for order in range(start, K + 1):
        if order % 2 == 0:
            m = order // 2
            try:
                R.append(even_order(R, m, tol))
                branch.record(order, "even", 0.0, True)
            except OddUnitarityViolation as exc:
                branch.record(order, "even", exc.residual, False, str(exc))
                branch.failed_at = order
                return False
        else:
            m = (order - 1) // 2
            try:
                res = higher_condition_solve(R, m, tol)
            except HigherConditionViolated as exc:
                branch.record(order, "higher", exc.residual, False)
                if not force:
                    branch.failed_at = order
                    return False
                lhs = higher_lhs(R, m)
                inv = invert_divergence(lhs, tol, raise_on_fail=False)
                R.append(known_rhs(R, m) - inv.candidate)
                continue
            R.append(res.R_next)
            branch.record(order, "higher", res.residual, True, f"identity residual {res.identity_residual:.2e}")
    return True


def bootstrap_to_order(h, K, tol=DEFAULT_TOL, c_policy=0.0, force=False):
    """Build R^(1..K) for the density ``h``.

    ``c_policy`` is a number (fixed shift) or ``"solve"`` (branch on the common roots
    of the order-5 condition; an identically satisfied condition leaves c free and
    c = 0 is used).  ``force=True`` keeps going past failed conditions using the raw
    Kennedy candidate, which produces the negative-control series.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    solve = isinstance(c_policy, str)
    if solve and c_policy != "solve":
        raise ValueError(f"unknown c policy {c_policy!r}")
    state = BootstrapState(h, K, tol, c_policy)
    one = _one(h)

    scalar, lam = _is_scalar(h, tol)
    if scalar:
        c = 0.0 if solve else complex(c_policy)
        state.scalar_input = True
        if solve:
            state.shift = ShiftSolution("unconstrained", (), 0, 0)
        br = Branch(c, [one * ((lam + c) ** k) for k in range(K + 1)])
        br.record(1, "scalar", 0.0, True, "h is a multiple of the identity")
        state.branches.append(br)
        return state

    if solve:
        R = [one, _r1_poly(h)]
        br = Branch("symbolic", R)
    else:
        c = complex(c_policy)
        R = [one, h + c]
        br = Branch(c, R)
    br.record(1, "reshetikhin", 0.0, True, "R1 = h + c")
    if K >= 2:
        R.append(even_order(R, 1, tol))
        br.record(2, "even", 0.0, True)
    if K >= 3:
        rt = reshetikhin_test(h, tol, raise_on_fail=False)
        br.record(3, "reshetikhin", rt.residual, rt.passes)
        if not rt.passes and not force:
            br.failed_at = 3
            raise NotIntegrable(f"Reshetikhin condition fails: residual {rt.residual:.3e}", rt.residual, 3, state)
        R.append(rt.R3 if solve else rt.R3.evaluate_at(br.c))
    if K >= 4:
        R.append(even_order(R, 2, tol))
        br.record(4, "even", 0.0, True)

    if not solve or K < 5:
        state.branches.append(br)
        if K >= 5:
            ok = _advance(br, K, tol, 5, force)
            if not ok:
                state.branches.remove(br)
                state.pruned.append(br)
                raise HigherConditionViolated(f"failed at order {br.failed_at}", (br.failed_at - 1) // 2,
                                              br.status_log[-1].residual, state)
        return state

    sol = solve_shift_constant(R, 2, tol)
    state.shift = sol
    if sol.status == "none":
        br.record(5, "shift", np.nan, False, "no admissible c")
        state.pruned.append(br)
        raise NoAdmissibleShift("order-5 condition has no common root in c", 2, state)
    if len(sol.chosen) > MAX_BRANCHES:
        raise TooManyBranches(f"{len(sol.chosen)} candidate shifts exceed the limit of {MAX_BRANCHES}")
    note = "c unconstrained; using c = 0" if sol.status == "unconstrained" else f"{len(sol.roots)} root(s)"
    for c in sol.chosen:
        nb = Branch(complex(c), _evaluate_branch(R, c), list(br.status_log))
        nb.record(5, "shift", 0.0, True, note)
        if _advance(nb, K, tol, 5, force):
            state.branches.append(nb)
        else:
            log.info("pruning branch c=%s at order %s", c, nb.failed_at)
            state.pruned.append(nb)
    if not state.branches:
        last = state.pruned[-1]
        raise HigherConditionViolated(f"every c branch fails (last at order {last.failed_at})",
                                      (last.failed_at - 1) // 2, last.status_log[-1].residual, state)
    return state


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YbeReport:
    K: int
    max_residual: float
    residuals: dict
    unitarity: dict

    @property
    def max_unitarity(self):
        return max(self.unitarity.values(), default=0.0)


def verify_truncated(R, K=None, tol=DEFAULT_TOL):
    """Coefficientwise residuals of the braided YBE

        Ř23(ζ) Ř12(ξ) Ř23(ξ-ζ) = Ř12(ξ-ζ) Ř23(ξ) Ř12(ζ)

    truncated at total degree K, plus the unitarity sums for orders 1..K.  ``R`` is
    the list R^(0..K) of concrete operators (R^(0) may be omitted by passing R[1:]
    with R[0] set to None).
    """
    R = list(R)
    if R[0] is None:
        R[0] = _one(R[1])
    K = len(R) - 1 if K is None else K
    if len(R) < K + 1:
        raise ValueError(f"series has order {len(R) - 1}, need {K}")
    coef = [R[k] / factorial(k) for k in range(K + 1)]
    a = [_left(x) for x in coef]
    b = [_right(x) for x in coef]
    S = BivariateOperatorSeries.from_univariate
    lhs = S(b, "zeta", K) @ S(a, "xi", K) @ S(b, "xi-zeta", K)
    rhs = S(a, "xi-zeta", K) @ S(b, "xi", K) @ S(a, "zeta", K)
    res = {}
    for i in range(K + 1):
        for j in range(K + 1 - i):
            x, y = lhs.coefficient(i, j), rhs.coefficient(i, j)
            res[(i, j)] = (x - y).norm() / max(1.0, x.norm(), y.norm())
    uni = {N: _rel(unitarity_sum(R, N), _scale(R, N) ** 2) for N in range(1, K + 1)}
    return YbeReport(K, max(res.values()), res, uni)


def appendixA_check(R, m):
    """Residuals of the two rearrangement identities behind the higher conditions.

    (i)  Σ_{k=0}^{2m} (-1)^k C(2m,k) b_{2m-k} b_{k+1} = Σ_{k=0}^{2m} (-1)^k C(2m,k) b_{k+1} b_{2m-k}
    (ii) Σ_{k=0}^{2m} (-1)^k C(2m,k) (a_k b_1 a_{2m-k} - b_{2m-k} a_1 b_k) = higher_lhs(R, m)

    A missing R^(2m+1) is padded with zero: it enters (i) only through the k = 2m
    terms b_0 b_{2m+1} and b_{2m+1} b_0, which cancel.
    """
    R = list(R)
    if R[0] is None:
        R[0] = _one(R[1])
    if len(R) < 2 * m + 1:
        raise ValueError(f"need R up to order {2 * m}")
    if len(R) < 2 * m + 2:
        R.append(R[0] * 0.0)
    a = [_left(x) for x in R]
    b = [_right(x) for x in R]
    s1 = s2 = t = None
    for k in range(2 * m + 1):
        w = (-1) ** k * comb(2 * m, k)
        x1 = b[2 * m - k] @ b[k + 1] * w
        x2 = b[k + 1] @ b[2 * m - k] * w
        y = (a[k] @ b[1] @ a[2 * m - k] - b[2 * m - k] @ a[1] @ b[k]) * w
        s1 = x1 if s1 is None else s1 + x1
        s2 = x2 if s2 is None else s2 + x2
        t = y if t is None else t + y
    target = higher_lhs(R, m)
    r1 = (s1 - s2).norm() / max(1.0, s1.norm())
    r2 = (t - target).norm() / max(1.0, target.norm())
    return r1, r2
