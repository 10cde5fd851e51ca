"""Inversion of telescoping divergences by normalized partial traces.

Convention: a k-site operator D is a divergence of the (k-1)-site operator X when

    D = X (x) 1 - 1 (x) X.

For k = 3 the candidate is  X~ = tr_3 D_123 + tr_34 D_234,  where D_234 is the same
operator moved one site to the right on a four-site window.  On an exact divergence
this returns X minus its identity component, which is why candidates are reported
traceless and the discarded identity component is recorded separately.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonTerminating, NotADivergence
from .opalg import (DEFAULT_TOL, DenseOperator, PositionedOperatorSum, ShiftPolyOperator, embed,
                    partial_trace_normalized, tensor)


@dataclass(frozen=True)
class DivergenceResult:
    candidate: object          # DenseOperator or ShiftPolyOperator on k-1 sites
    residual: float
    is_divergence: bool
    trace_part: object = 0.0   # identity component removed from the raw candidate
    tol: float = DEFAULT_TOL
    residuals_by_power: tuple = ()


def divergence_of(X):
    """X (x) 1 - 1 (x) X."""
    one = DenseOperator.identity(X.local_dim)
    return tensor(X, one) - tensor(one, X)


def _general_candidate(D):
    """Traced telescoping sum for a k-site D, k >= 2, giving a (k-1)-site operator."""
    k = D.sites
    keep = k - 1
    out = None
    for r in range(k - 1):
        term = partial_trace_normalized(embed(D, r + 1, k + r), range(keep + 1, k + r + 1))
        out = term if out is None else out + term
    return out


def candidate_current(D):
    """Raw candidate tr_3 D_123 + tr_34 D_234 (no canonicalization)."""
    if D.sites != 3:
        raise DimensionMismatch(f"candidate_current needs a 3-site operator, got {D.sites}")
    return _general_candidate(D)


def verify_divergence(D, X, tol=DEFAULT_TOL):
    if D.sites != X.sites + 1 or D.local_dim != X.local_dim:
        raise DimensionMismatch("D must act on one more site than X with the same local dimension")
    diff = D - divergence_of(X)
    res = diff.norm() / max(1.0, D.norm())
    return DivergenceResult(X, res, res <= tol, 0.0, tol)


def _invert_dense(D, tol):
    raw = _general_candidate(D)
    X, mu = raw.traceless()
    check = verify_divergence(D, X, tol)
    return DivergenceResult(X, check.residual, check.is_divergence, mu, tol)


def invert_divergence(D, tol=DEFAULT_TOL, raise_on_fail=True):
    """Candidate plus verification.  Polynomials in c are handled power by power.

    Raises NotADivergence (carrying the residual, the worst c-power and the full
    result) unless ``raise_on_fail`` is False.
    """
    if isinstance(D, ShiftPolyOperator):
        parts = [_invert_dense(cf, tol) for cf in D.coeffs]
        cand = ShiftPolyOperator([p.candidate for p in parts])
        res_by_power = tuple(p.residual for p in parts)
        worst = int(np.argmax(res_by_power))
        res = res_by_power[worst]
        result = DivergenceResult(cand, res, all(p.is_divergence for p in parts),
                                  tuple(p.trace_part for p in parts), tol, res_by_power)
        if raise_on_fail and not result.is_divergence:
            raise NotADivergence(f"not a divergence: residual {res:.3e} at c^{worst}", res, worst, result)
        return result
    result = _invert_dense(D, tol)
    if raise_on_fail and not result.is_divergence:
        raise NotADivergence(f"not a divergence: residual {result.residual:.3e}", result.residual, 0, result)
    return result


# ---------------------------------------------------------------------------
# currents of longer-range densities
# ---------------------------------------------------------------------------

def _merge(rate):
    """Collapse a positioned sum into one dense operator on its covering window."""
    terms = [(x, rate.templates[t], w) for (x, t), w in rate.weights.items()]
    start = min(x for x, _, _ in terms)
    stop = max(x + o.sites - 1 for x, o, _ in terms)
    return rate.to_dense(start, stop - start + 1), start


def generalized_inversion(rate, support_bound, tol=1e-12):
    """Current j_x with  rate = j_x - j_{x+1}  for a translation-covariant rate.

    The rate covers sites s..s+m-1; the current is returned on s..s+m-2.  It is
    accumulated as the sum over r of the rate shifted r sites right and traced over
    every site beyond the current's window.  The sum stops at the first shift whose
    term is fully traced and vanishes; reaching ``support_bound`` shifts with a
    nonzero term raises NonTerminating.
    """
    if rate.is_zero():
        return PositionedOperatorSum(rate.templates or (), {})
    R, s = _merge(rate)
    m = R.sites
    if m < 2:
        raise NonTerminating("a single-site rate cannot be a divergence of a local current")
    keep = m - 1
    acc = None
    r = 0
    while True:
        if r >= support_bound:
            raise NonTerminating(f"term at shift {r} still nonzero (support bound {support_bound})", shift=r)
        total = m + r
        traced = range(keep + 1, total + 1)
        if r >= keep:
            scalar = complex(np.trace(R.mat)) / R.dim
            if abs(scalar) <= tol * max(1.0, R.norm()):
                break
            # every later shift repeats the same nonzero scalar
            raise NonTerminating(f"fully traced term {abs(scalar):.3e} does not vanish", shift=r)
        term = partial_trace_normalized(embed(R, r + 1, total), traced)
        acc = term if acc is None else acc + term
        r += 1
    return PositionedOperatorSum.single(acc, s, 1)


def continuity_residual(rate, current):
    """|rate - (j_x - j_{x+1})| on the rate's window, relative to max(1, |rate|)."""
    R, s = _merge(rate)
    J = current.templates[0] * complex(current.weights[(s, 0)]) if (s, 0) in current.weights else None
    if J is None:
        raise DimensionMismatch("current must be a single operator positioned at the rate's first site")
    return (R - divergence_of(J)).norm() / max(1.0, R.norm())
