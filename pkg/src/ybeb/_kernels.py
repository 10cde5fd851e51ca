"""Numeric inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``YBEB_NUMBA`` is not ``0``.
``YBEB_THREADS`` caps the numba thread pool.  Both paths must agree to
round-off; ``tests/test_kernels.py`` and ``benchmarks/bench_kernels.py``
exercise them side by side.
"""
from __future__ import annotations

import os

import numpy as np

# the bundled TBB is too old for numba; pick a layer that does not probe it
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:  # pragma: no cover - import guard
    import numba
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("YBEB_NUMBA", "1") != "0"

if _HAVE_NUMBA and os.environ.get("YBEB_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["YBEB_THREADS"]), numba.config.NUMBA_NUM_THREADS)))


def _digit_offsets(n, k, positions):
    """Flat-index offsets spanned by the tensor factors at ``positions`` (0-based)."""
    offs = np.zeros(1, dtype=np.int64)
    for p in positions:
        stride = n ** (k - 1 - p)
        offs = (offs[:, None] + stride * np.arange(n, dtype=np.int64)[None, :]).ravel()
    return offs


# ---------------------------------------------------------------------------
# partial trace
# ---------------------------------------------------------------------------

def partial_trace_numpy(mat, n, k, traced):
    traced = sorted(traced)
    keep = [s for s in range(k) if s not in traced]
    t = mat.reshape((n,) * (2 * k))
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = [letters[i] for i in range(k)]
    cols = [letters[k + i] for i in range(k)]
    for s in traced:
        cols[s] = rows[s]
    out = "".join(rows[s] for s in keep) + "".join(cols[s] for s in keep)
    res = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dk = n ** len(keep)
    return res.reshape(dk, dk) / n ** len(traced)


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _ptrace_loop(mat, keep_off, trace_off, scale):
        dk = keep_off.shape[0]
        dt = trace_off.shape[0]
        out = np.zeros((dk, dk), dtype=np.complex128)
        for r in prange(dk):
            for c in range(dk):
                acc = 0j
                for t in range(dt):
                    acc += mat[keep_off[r] + trace_off[t], keep_off[c] + trace_off[t]]
                out[r, c] = acc * scale
        return out


def partial_trace_numba(mat, n, k, traced):
    traced = sorted(traced)
    keep = [s for s in range(k) if s not in traced]
    keep_off = _digit_offsets(n, k, keep)
    trace_off = _digit_offsets(n, k, traced)
    return _ptrace_loop(np.ascontiguousarray(mat, dtype=np.complex128), keep_off, trace_off,
                        1.0 / n ** len(traced))


# ---------------------------------------------------------------------------
# triple traces tr(T^a T^b T^c)
# ---------------------------------------------------------------------------

def triple_traces_numpy(gens):
    return np.einsum("aij,bjk,cki->abc", gens, gens, gens)


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _triple_loop(gens):
        m, n, _ = gens.shape
        out = np.zeros((m, m, m), dtype=np.complex128)
        for a in prange(m):
            for b in range(m):
                ab = gens[a] @ gens[b]
                for c in range(m):
                    acc = 0j
                    for i in range(n):
                        for j in range(n):
                            acc += ab[i, j] * gens[c][j, i]
                    out[a, b, c] = acc
        return out


def triple_traces_numba(gens):
    return _triple_loop(np.ascontiguousarray(gens, dtype=np.complex128))


# ---------------------------------------------------------------------------
# closed-form integrability conditions for diagonal su(n) couplings
# ---------------------------------------------------------------------------
# Index convention: f[x, y, z] = f^{xy}_z, d[x, y, z] = d^{xy}_z.
# family1[al, be]      = sum_{ga,de,ep,ze} (f[ep,de,al] d[ep,ga,be] - f[ep,de,be] d[ep,ga,al])
#                                          f[ga,de,ze] (a_ga + a_de) a_ep b_ze
# family2[al, be, ga]  = sum a_de a_ep [ d[de,ze,be] (a_ga f[ga,ep,ze] f[al,ep,de] - a_al f[al,ep,ze] f[ga,ep,de])
#                                      + f[de,ze,be] (a_ga f[ep,ga,ze] d[de,ep,al] - a_al f[ep,al,ze] d[de,ep,ga]) ]
#                       + sum a_ep b_de (a_ga f[ep,ga,be] f[de,ep,al] - a_al f[ep,al,be] f[de,ep,ga])

def explicit_conditions_numpy(a, b, f, d):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    asum = a[:, None] + a[None, :]
    fam1 = (np.einsum("edA,egB,gdz,gd,e,z->AB", f, d, f, asum, a, b)
            - np.einsum("edB,egA,gdz,gd,e,z->AB", f, d, f, asum, a, b))
    t1 = np.einsum("d,e,dzB,C,Cez,Aed->ABC", a, a, d, a, f, f)
    t2 = np.einsum("d,e,dzB,A,Aez,Ced->ABC", a, a, d, a, f, f)
    t3 = np.einsum("d,e,dzB,C,eCz,deA->ABC", a, a, f, a, f, d)
    t4 = np.einsum("d,e,dzB,A,eAz,deC->ABC", a, a, f, a, f, d)
    t5 = np.einsum("e,d,C,eCB,deA->ABC", a, b, a, f, f)
    t6 = np.einsum("e,d,A,eAB,deC->ABC", a, b, a, f, f)
    fam2 = t1 - t2 + t3 - t4 + t5 - t6
    return fam1, fam2


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _explicit_loop(a, b, f, d):
        m = a.shape[0]
        fam1 = np.zeros((m, m), dtype=np.complex128)
        fam2 = np.zeros((m, m, m), dtype=np.complex128)
        for al in prange(m):
            for be in range(m):
                acc = 0j
                for ga in range(m):
                    for de in range(m):
                        for ep in range(m):
                            w = (a[ga] + a[de]) * a[ep]
                            if w == 0:
                                continue
                            g = f[ep, de, al] * d[ep, ga, be] - f[ep, de, be] * d[ep, ga, al]
                            if g == 0:
                                continue
                            for ze in range(m):
                                acc += g * f[ga, de, ze] * w * b[ze]
                fam1[al, be] = acc
                for ga in range(m):
                    acc = 0j
                    for de in range(m):
                        for ep in range(m):
                            ade = a[de] * a[ep]
                            if ade != 0:
                                for ze in range(m):
                                    acc += ade * (
                                        d[de, ze, be] * (a[ga] * f[ga, ep, ze] * f[al, ep, de]
                                                         - a[al] * f[al, ep, ze] * f[ga, ep, de])
                                        + f[de, ze, be] * (a[ga] * f[ep, ga, ze] * d[de, ep, al]
                                                           - a[al] * f[ep, al, ze] * d[de, ep, ga]))
                            acc += a[ep] * b[de] * (a[ga] * f[ep, ga, be] * f[de, ep, al]
                                                    - a[al] * f[ep, al, be] * f[de, ep, ga])
                    fam2[al, be, ga] = acc
        return fam1, fam2


def explicit_conditions_numba(a, b, f, d):
    c = np.complex128
    return _explicit_loop(np.ascontiguousarray(a, dtype=c), np.ascontiguousarray(b, dtype=c),
                          np.ascontiguousarray(f, dtype=c), np.ascontiguousarray(d, dtype=c))


# ---------------------------------------------------------------------------
# two-site operator applied from the left to a many-site matrix
# ---------------------------------------------------------------------------

def apply_two_site_numpy(op, mat, n, nsites, i, j):
    """Return ``op_{ij} @ mat`` with ``op`` an n^2 x n^2 operator on factors i, j (0-based)."""
    dim = mat.shape[0]
    t = mat.reshape((n,) * nsites + (mat.shape[1],))
    o = op.reshape(n, n, n, n)
    res = np.tensordot(o, t, axes=([2, 3], [i, j]))
    res = np.moveaxis(res, [0, 1], [i, j])
    return res.reshape(dim, mat.shape[1])


if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _apply_loop(op, mat, si, sj, n, rest_off):
        dim, cols = mat.shape
        out = np.zeros((dim, cols), dtype=np.complex128)
        nr = rest_off.shape[0]
        for r in prange(nr):
            base = rest_off[r]
            for a in range(n):
                for b in range(n):
                    row = base + a * si + b * sj
                    for c in range(n):
                        for e in range(n):
                            w = op[a * n + b, c * n + e]
                            if w == 0:
                                continue
                            src = base + c * si + e * sj
                            for col in range(cols):
                                out[row, col] += w * mat[src, col]
        return out


def apply_two_site_numba(op, mat, n, nsites, i, j):
    rest = [s for s in range(nsites) if s not in (i, j)]
    rest_off = _digit_offsets(n, nsites, rest)
    return _apply_loop(np.ascontiguousarray(op, dtype=np.complex128),
                       np.ascontiguousarray(mat, dtype=np.complex128),
                       n ** (nsites - 1 - i), n ** (nsites - 1 - j), n, rest_off)


if USE_NUMBA:
    partial_trace = partial_trace_numba
    triple_traces = triple_traces_numba
    explicit_conditions = explicit_conditions_numba
    apply_two_site = apply_two_site_numba
else:
    partial_trace = partial_trace_numpy
    triple_traces = triple_traces_numpy
    explicit_conditions = explicit_conditions_numpy
    apply_two_site = apply_two_site_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
