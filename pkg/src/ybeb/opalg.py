"""Dense operators on small tensor-product spaces.

Site ordering is most-significant-first: the basis state (i_1, ..., i_k) has flat
index sum_j i_j * n**(k - j), so site 1 is the leftmost Kronecker factor.
Site labels in the public API are 1-based.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb
from numbers import Number

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidSite, OutOfRange

DEFAULT_TOL = 1e-9
ZERO_ATOL = 1e-12


def _as_matrix(mat):
    arr = np.array(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"operator must be a square matrix, got shape {arr.shape}")
    return arr


def _infer_sites(dim, n):
    k, d = 0, 1
    while d < dim:
        d *= n
        k += 1
    if d != dim or k == 0:
        raise DimensionMismatch(f"dimension {dim} is not a positive power of local dimension {n}")
    return k


class DenseOperator:
    """Complex matrix acting on ``sites`` adjacent sites of local dimension ``local_dim``.

    Instances are immutable; arithmetic returns new objects.  Adding a plain number
    adds that multiple of the identity.
    """

    __slots__ = ("mat", "local_dim", "sites")
    __array_priority__ = 1000

    def __init__(self, mat, local_dim, sites=None):
        arr = _as_matrix(mat)
        if local_dim < 2:
            raise DimensionMismatch("local dimension must be at least 2")
        k = _infer_sites(arr.shape[0], local_dim)
        if sites is not None and sites != k:
            raise DimensionMismatch(f"matrix of side {arr.shape[0]} does not act on {sites} sites of dim {local_dim}")
        arr.setflags(write=False)
        object.__setattr__(self, "mat", arr)
        object.__setattr__(self, "local_dim", int(local_dim))
        object.__setattr__(self, "sites", k)

    def __setattr__(self, name, value):
        raise AttributeError("DenseOperator is immutable")

    @classmethod
    def identity(cls, n, k=1):
        return cls(np.eye(n ** k), n, k)

    @classmethod
    def zeros(cls, n, k=1):
        return cls(np.zeros((n ** k, n ** k)), n, k)

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def shape_key(self):
        return (self.local_dim, self.sites)

    def _check(self, other):
        if not isinstance(other, DenseOperator):
            raise TypeError(f"expected DenseOperator, got {type(other).__name__}")
        if self.shape_key != other.shape_key:
            raise DimensionMismatch(f"operator shapes differ: (n, k) = {self.shape_key} vs {other.shape_key}")

    def _wrap(self, mat):
        return DenseOperator(mat, self.local_dim, self.sites)

    def __add__(self, other):
        if isinstance(other, Number):
            return self._wrap(self.mat + complex(other) * np.eye(self.dim))
        if isinstance(other, DenseOperator):
            self._check(other)
            return self._wrap(self.mat + other.mat)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Number):
            return self._wrap(self.mat - complex(other) * np.eye(self.dim))
        if isinstance(other, DenseOperator):
            self._check(other)
            return self._wrap(self.mat - other.mat)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Number):
            return self._wrap(complex(other) * np.eye(self.dim) - self.mat)
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self.mat)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._wrap(complex(other) * self.mat)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self._wrap(self.mat / complex(other))
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            self._check(other)
            return self._wrap(self.mat @ other.mat)
        return NotImplemented

    def __pow__(self, p):
        if not isinstance(p, int) or p < 0:
            raise ValueError("only non-negative integer powers are supported")
        return self._wrap(np.linalg.matrix_power(self.mat, p))

    def dag(self):
        return self._wrap(self.mat.conj().T)

    def trace(self):
        return complex(np.trace(self.mat))

    def norm(self):
        return float(np.linalg.norm(self.mat))

    def traceless(self):
        """Return the operator with its identity component removed, and that component."""
        mu = self.trace() / self.dim
        return self - mu, mu

    def is_close(self, other, tol=DEFAULT_TOL, atol=ZERO_ATOL):
        if not np.any(other.mat):
            return distance(self, other, atol=atol) <= 1.0
        return distance(self, other, atol=atol) <= tol

    def __repr__(self):
        return f"DenseOperator(n={self.local_dim}, sites={self.sites})"


def distance(a, b, atol=ZERO_ATOL):
    """Relative Frobenius distance of ``a`` from reference ``b``.

    When ``b`` vanishes the absolute norm of ``a`` is returned divided by ``atol``,
    so that ``distance <= 1`` means ``|a| <= atol``.
    """
    diff = np.linalg.norm(a.mat - b.mat)
    ref = np.linalg.norm(b.mat)
    if ref == 0.0:
        return float(diff / atol) if diff > 0 else 0.0
    return float(diff / ref)


def op(mat, n=None):
    """Build a DenseOperator, inferring ``n`` as the matrix side when omitted."""
    arr = _as_matrix(mat)
    return DenseOperator(arr, n or arr.shape[0])


def tensor(a, b):
    if a.local_dim != b.local_dim:
        raise DimensionMismatch(f"local dims differ: {a.local_dim} vs {b.local_dim}")
    return DenseOperator(np.kron(a.mat, b.mat), a.local_dim, a.sites + b.sites)


def embed(a, position, total_sites):
    """Pad ``a`` with identities so that its first site lands on ``position`` of ``total_sites``."""
    if position < 1 or position + a.sites - 1 > total_sites:
        raise OutOfRange(f"support {position}..{position + a.sites - 1} exceeds 1..{total_sites}")
    n = a.local_dim
    left = np.eye(n ** (position - 1))
    right = np.eye(n ** (total_sites - position - a.sites + 1))
    return DenseOperator(np.kron(np.kron(left, a.mat), right), n, total_sites)


def place(a, sites, total_sites):
    """Put ``a`` on an arbitrary ordered tuple of distinct 1-based ``sites``."""
    sites = tuple(sites)
    if len(sites) != a.sites or len(set(sites)) != len(sites):
        raise InvalidSite(f"need {a.sites} distinct sites, got {sites}")
    if any(s < 1 or s > total_sites for s in sites):
        raise OutOfRange(f"sites {sites} outside 1..{total_sites}")
    n, k, L = a.local_dim, a.sites, total_sites
    full = np.kron(a.mat, np.eye(n ** (L - k))).reshape((n,) * (2 * L))
    rest = [s for s in range(1, L + 1) if s not in sites]
    order = list(sites) + rest  # factor j of `full` acts on site order[j]
    perm = [order.index(s) for s in range(1, L + 1)]
    full = full.transpose(perm + [L + p for p in perm])
    return DenseOperator(full.reshape(n ** L, n ** L), n, L)


def partial_trace_normalized(a, sites_to_trace):
    """Partial trace over the listed 1-based sites, each divided by the local dimension.

    Tracing every site returns a 1x1 matrix (the normalized trace).
    """
    traced = set(sites_to_trace)
    if any(s < 1 or s > a.sites for s in traced):
        raise InvalidSite(f"sites {sorted(traced)} not all in 1..{a.sites}")
    if not traced:
        return a
    n, k = a.local_dim, a.sites
    if len(traced) == k:
        return np.array([[np.trace(a.mat) / n ** k]])
    mat = _kernels.partial_trace(a.mat, n, k, [s - 1 for s in traced])
    return DenseOperator(mat, n, k - len(traced))


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def permutation_op(n):
    """Swap operator on two sites: P (u x v) = v x u."""
    p = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            p[j * n + i, i * n + j] = 1.0
    return DenseOperator(p, n, 2)


# ---------------------------------------------------------------------------
# polynomials in the shift constant
# ---------------------------------------------------------------------------

class ShiftPolyOperator:
    """Polynomial in a scalar unknown ``c`` with DenseOperator coefficients.

    ``coeffs[p]`` multiplies ``c**p``.  Exactly-zero trailing coefficients are trimmed.
    """

    __slots__ = ("_c", "local_dim", "sites")
    __array_priority__ = 1000

    def __init__(self, coeffs, local_dim=None, sites=None):
        if isinstance(coeffs, np.ndarray) and coeffs.ndim == 3:
            arr = np.array(coeffs, dtype=np.complex128)
            if local_dim is None:
                raise ValueError("local_dim required with raw coefficient arrays")
            sites = _infer_sites(arr.shape[1], local_dim)
        else:
            coeffs = list(coeffs)
            if not coeffs:
                raise ValueError("at least one coefficient is required")
            first = coeffs[0]
            for cf in coeffs[1:]:
                first._check(cf)
            arr = np.stack([cf.mat for cf in coeffs]).astype(np.complex128)
            local_dim, sites = first.local_dim, first.sites
        last = arr.shape[0]
        while last > 1 and not np.any(arr[last - 1]):
            last -= 1
        arr = arr[:last]
        arr.setflags(write=False)
        object.__setattr__(self, "_c", arr)
        object.__setattr__(self, "local_dim", int(local_dim))
        object.__setattr__(self, "sites", int(sites))

    def __setattr__(self, name, value):
        raise AttributeError("ShiftPolyOperator is immutable")

    @classmethod
    def constant(cls, a):
        return cls([a])

    @classmethod
    def variable(cls, n, k=1):
        """The polynomial ``c * 1``."""
        return cls([DenseOperator.zeros(n, k), DenseOperator.identity(n, k)])

    @classmethod
    def lift(cls, x, like):
        if isinstance(x, ShiftPolyOperator):
            return x
        if isinstance(x, DenseOperator):
            return cls([x])
        if isinstance(x, Number):
            return cls([DenseOperator.identity(like.local_dim, like.sites) * x])
        raise TypeError(f"cannot lift {type(x).__name__} to ShiftPolyOperator")

    @property
    def array(self):
        return self._c

    @property
    def coeffs(self):
        return tuple(DenseOperator(m, self.local_dim, self.sites) for m in self._c)

    @property
    def degree(self):
        return self._c.shape[0] - 1

    @property
    def dim(self):
        return self._c.shape[1]

    @property
    def shape_key(self):
        return (self.local_dim, self.sites)

    def _wrap(self, arr):
        return ShiftPolyOperator(arr, self.local_dim, self.sites)

    def _coerce(self, other):
        other = ShiftPolyOperator.lift(other, self)
        if other.shape_key != self.shape_key:
            raise DimensionMismatch(f"polynomial shapes differ: {self.shape_key} vs {other.shape_key}")
        return other

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        m = max(self._c.shape[0], other._c.shape[0])
        out = np.zeros((m,) + self._c.shape[1:], dtype=np.complex128)
        out[: self._c.shape[0]] += self._c
        out[: other._c.shape[0]] += other._c
        return self._wrap(out)

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self._c)

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._wrap(complex(other) * self._c)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self._wrap(self._c / complex(other))
        return NotImplemented

    def __matmul__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        p, q = self._c.shape[0], other._c.shape[0]
        prod = np.einsum("pij,qjk->pqik", self._c, other._c)
        out = np.zeros((p + q - 1,) + self._c.shape[1:], dtype=np.complex128)
        for i in range(p):
            out[i : i + q] += prod[i]
        return self._wrap(out)

    def __rmatmul__(self, other):
        return self._coerce(other) @ self

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = ShiftPolyOperator.lift(1.0, self)
        for _ in range(e):
            out = out @ self
        return out

    def evaluate_at(self, c0):
        c0 = complex(c0)
        acc = np.zeros(self._c.shape[1:], dtype=np.complex128)
        for m in self._c[::-1]:  # Horner
            acc = acc * c0 + m
        return DenseOperator(acc, self.local_dim, self.sites)

    def map_coeffs(self, fn):
        """Apply a linear map DenseOperator -> DenseOperator to every coefficient."""
        return ShiftPolyOperator([fn(cf) for cf in self.coeffs])

    def coeff_norms(self):
        return np.linalg.norm(self._c.reshape(self._c.shape[0], -1), axis=1)

    def norm(self):
        return float(np.linalg.norm(self._c))

    def trimmed(self, atol):
        """Drop trailing coefficients whose Frobenius norm is at most ``atol``."""
        norms = self.coeff_norms()
        last = len(norms)
        while last > 1 and norms[last - 1] <= atol:
            last -= 1
        return self._wrap(self._c[:last])

    def __repr__(self):
        return f"ShiftPolyOperator(n={self.local_dim}, sites={self.sites}, degree={self.degree})"


def poly_add(p, q):
    return ShiftPolyOperator.lift(p, q if isinstance(q, (DenseOperator, ShiftPolyOperator)) else p) + q


def poly_mul(p, q):
    return ShiftPolyOperator.lift(p, q) @ q


def poly_scale(p, s):
    return p * s


def evaluate_at(p, c0):
    return p.evaluate_at(c0) if isinstance(p, ShiftPolyOperator) else p


def apply_linear(x, fn):
    """Apply an operator-linear map to a DenseOperator or coefficient-wise to a polynomial."""
    if isinstance(x, ShiftPolyOperator):
        return x.map_coeffs(fn)
    return fn(x)


# ---------------------------------------------------------------------------
# bivariate truncated series in (xi, zeta)
# ---------------------------------------------------------------------------

class BivariateOperatorSeries:
    """Truncated series sum_{a+b<=K} xi^a zeta^b C[a, b] with DenseOperator coefficients."""

    def __init__(self, terms, max_total_degree, local_dim, sites):
        self.K = int(max_total_degree)
        self.local_dim = local_dim
        self.sites = sites
        self.terms = {}
        for (a, b), cf in terms.items():
            if a + b > self.K:
                continue
            if (cf.local_dim, cf.sites) != (local_dim, sites):
                raise DimensionMismatch("all coefficients must share (n, k)")
            self.terms[(a, b)] = cf

    @classmethod
    def from_univariate(cls, coeffs, argument, K):
        """Series of F(arg) where F(t) = sum_j coeffs[j] t^j and arg is 'xi', 'zeta' or 'xi-zeta'."""
        first = coeffs[0]
        terms = {}
        for j, cf in enumerate(coeffs[: K + 1]):
            if argument == "xi":
                contrib = {(j, 0): cf}
            elif argument == "zeta":
                contrib = {(0, j): cf}
            elif argument == "xi-zeta":
                contrib = {(j - p, p): cf * (comb(j, p) * (-1) ** p) for p in range(j + 1)}
            else:
                raise ValueError(f"unknown argument {argument!r}")
            for key, val in contrib.items():
                terms[key] = terms[key] + val if key in terms else val
        return cls(terms, K, first.local_dim, first.sites)

    def __matmul__(self, other):
        K = min(self.K, other.K)
        out = {}
        for (a, b), x in self.terms.items():
            for (c, d), y in other.terms.items():
                if a + b + c + d > K:
                    continue
                key = (a + c, b + d)
                val = x @ y
                out[key] = out[key] + val if key in out else val
        return BivariateOperatorSeries(out, K, self.local_dim, self.sites)

    def __sub__(self, other):
        K = min(self.K, other.K)
        out = {}
        zero = DenseOperator.zeros(self.local_dim, self.sites)
        for key in set(self.terms) | set(other.terms):
            if sum(key) <= K:
                out[key] = self.terms.get(key, zero) - other.terms.get(key, zero)
        return BivariateOperatorSeries(out, K, self.local_dim, self.sites)

    def coefficient(self, a, b):
        return self.terms.get((a, b), DenseOperator.zeros(self.local_dim, self.sites))


# ---------------------------------------------------------------------------
# formal sums of positioned operators
# ---------------------------------------------------------------------------

class PositionedOperatorSum:
    """Formal sum  sum_x sum_t w[x, t] * O_t placed with its first site at x.

    Templates O_t are DenseOperators; weights are kept exact (int, Fraction or
    complex with integer parts) so that the superoperator algebra in
    :mod:`ybeb.charges` is exact combinatorics.  Terms with equal (site, support)
    are held together in one linear combination of templates.
    """

    def __init__(self, templates, weights=None):
        self.templates = tuple(templates)
        self.weights = {}
        for (x, t), w in (weights or {}).items():
            if w != 0:
                self.weights[(int(x), int(t))] = w

    @classmethod
    def single(cls, op_, site, weight=1):
        return cls([op_], {(site, 0): weight})

    def _like(self, weights):
        return PositionedOperatorSum(self.templates, weights)

    def terms(self):
        """Grouped view: {(site, support): {template index: weight}}."""
        out = {}
        for (x, t), w in sorted(self.weights.items()):
            out.setdefault((x, self.templates[t].sites), {})[t] = w
        return out

    def __add__(self, other):
        self._check(other)
        w = dict(self.weights)
        for key, val in other.weights.items():
            w[key] = w.get(key, 0) + val
        return self._like(w)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, s):
        return self._like({k: v * s for k, v in self.weights.items()})

    def shifted(self, k):
        return self._like({(x + k, t): w for (x, t), w in self.weights.items()})

    def weighted(self, fn):
        """Multiply each term by an exact function of its site label."""
        return self._like({(x, t): w * fn(x) for (x, t), w in self.weights.items()})

    def _check(self, other):
        if self.templates is not other.templates and (
            len(self.templates) != len(other.templates)
            or any(a is not b and not np.array_equal(a.mat, b.mat) for a, b in zip(self.templates, other.templates))
        ):
            raise DimensionMismatch("positioned sums must share operator templates")

    def is_zero(self):
        return not self.weights

    def max_abs_weight(self):
        return max((abs(w) for w in self.weights.values()), default=0)

    def sites(self):
        return sorted({x for x, _ in self.weights})

    def to_dense(self, first_site, total_sites):
        """Materialize on the window first_site .. first_site + total_sites - 1."""
        n = self.templates[0].local_dim
        out = DenseOperator.zeros(n, total_sites)
        for (x, t), w in self.weights.items():
            o = self.templates[t]
            pos = x - first_site + 1
            if pos < 1 or pos + o.sites - 1 > total_sites:
                raise OutOfRange(f"term at site {x} with support {o.sites} leaves the window")
            out = out + embed(o, pos, total_sites) * complex(w)
        return out

    def __repr__(self):
        return f"PositionedOperatorSum({len(self.weights)} terms, {len(self.templates)} templates)"


def exact(x):
    """Coerce a number to an exact type where possible."""
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x
