# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled routing hot loop.

Same API as ``_kernels_py``. ``exp(iH)`` is computed by scaling and
squaring a Taylor series (the matrices are at most a few modes wide), and
only the four channel rows of ``S sigma1 S^T`` are formed. The batch loop
runs without the GIL.
"""
import numpy as np

from libc.math cimport sqrt, ceil, log2

ctypedef double complex cplx

NAME = "cython"


cdef void _assemble(const double[:] th, Py_ssize_t off, Py_ssize_t d,
                    cplx[:, ::1] h) noexcept nogil:
    cdef Py_ssize_t i, j, k = 0
    cdef Py_ssize_t m = d * (d - 1) // 2
    cdef double re, im
    for i in range(d):
        for j in range(d):
            h[i, j] = 0
        h[i, i] = th[off + i]
    for i in range(d):
        for j in range(i + 1, d):
            re = th[off + d + k]
            im = th[off + d + m + k]
            h[i, j] = re + 1j * im
            h[j, i] = re - 1j * im
            k += 1


cdef void _matmul(cplx[:, ::1] a, cplx[:, ::1] b, cplx[:, ::1] out,
                  Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef cplx acc
    for i in range(d):
        for j in range(d):
            acc = 0
            for k in range(d):
                acc = acc + a[i, k] * b[k, j]
            out[i, j] = acc


cdef double _norm1(cplx[:, ::1] a, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double best = 0.0, col
    for j in range(d):
        col = 0.0
        for i in range(d):
            col = col + sqrt(a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag)
        if col > best:
            best = col
    return best


cdef void _expi(cplx[:, ::1] h, Py_ssize_t d, cplx[:, ::1] out,
                cplx[:, ::1] term, cplx[:, ::1] tmp) noexcept nogil:
    # out <- exp(i h); h is overwritten with the scaled generator
    cdef Py_ssize_t i, j, k, s = 0, sq
    cdef double nrm = _norm1(h, d), scale = 1.0, tnorm
    if nrm > 0.5:
        s = <Py_ssize_t> ceil(log2(nrm / 0.5))
        for sq in range(s):
            scale = scale * 0.5
    for i in range(d):
        for j in range(d):
            h[i, j] = 1j * h[i, j] * scale
            term[i, j] = 1.0 if i == j else 0.0
            out[i, j] = term[i, j]
    for k in range(1, 40):
        _matmul(term, h, tmp, d)
        for i in range(d):
            for j in range(d):
                term[i, j] = tmp[i, j] / k
                out[i, j] = out[i, j] + term[i, j]
        tnorm = _norm1(term, d)
        if tnorm < 1e-18:
            break
    for sq in range(s):
        _matmul(out, out, tmp, d)
        for i in range(d):
            for j in range(d):
                out[i, j] = tmp[i, j]


cdef inline (Py_ssize_t, Py_ssize_t) _party(Py_ssize_t row, Py_ssize_t n,
                                            Py_ssize_t N) noexcept nogil:
    # mode range [lo, hi) of the party owning quadrature row ``row``
    cdef Py_ssize_t mode = row - N if row >= N else row
    if mode < n:
        return 0, n
    return n, N


def hermitian_from_params(theta, Py_ssize_t d):
    cdef const double[:, ::1] th = np.ascontiguousarray(np.atleast_2d(theta), dtype=float)
    cdef Py_ssize_t L = th.shape[0], r
    res = np.zeros((L, d, d), dtype=complex)
    cdef cplx[:, :, ::1] out = res
    for r in range(L):
        _assemble(th[r], 0, d, out[r])
    return res


def expi_hermitian(theta, Py_ssize_t d):
    """``exp(i H)`` for every row of ``theta``."""
    cdef const double[:, ::1] th = np.ascontiguousarray(np.atleast_2d(theta), dtype=float)
    cdef Py_ssize_t L = th.shape[0], r
    if th.shape[1] != d * d:
        raise ValueError(f"expected {d * d} parameters per row, got {th.shape[1]}")
    res = np.empty((L, d, d), dtype=complex)
    cdef cplx[:, :, ::1] out = res
    cdef cplx[:, ::1] h = np.empty((d, d), dtype=complex)
    cdef cplx[:, ::1] term = np.empty((d, d), dtype=complex)
    cdef cplx[:, ::1] tmp = np.empty((d, d), dtype=complex)
    with nogil:
        for r in range(L):
            _assemble(th[r], 0, d, h)
            _expi(h, d, out[r], term, tmp)
    return res


def routing_residuals(theta, sigma1, rows, target, Py_ssize_t n, Py_ssize_t p):
    """Frobenius distance between ``target`` and the selected rows of ``S sigma1 S^T``."""
    cdef const double[:, ::1] th = np.ascontiguousarray(np.atleast_2d(theta), dtype=float)
    cdef const double[:, ::1] sig = np.ascontiguousarray(sigma1, dtype=float)
    cdef const double[:, ::1] tgt = np.ascontiguousarray(target, dtype=float)
    cdef const Py_ssize_t[::1] rw = np.ascontiguousarray(rows, dtype=np.intp)
    cdef Py_ssize_t L = th.shape[0], N = n + p, M = 2 * (n + p)
    cdef Py_ssize_t nr = rw.shape[0]
    if th.shape[1] != n * n + p * p:
        raise ValueError(f"expected {n * n + p * p} parameters per row, got {th.shape[1]}")
    if sig.shape[0] != M or sig.shape[1] != M:
        raise ValueError("sigma1 does not match n + p modes")
    if tgt.shape[0] != nr or tgt.shape[1] != M:
        raise ValueError("target shape does not match rows")

    res = np.empty(L, dtype=float)
    cdef double[::1] f = res
    cdef Py_ssize_t dmax = n if n > p else p
    cdef cplx[:, ::1] h = np.empty((dmax, dmax), dtype=complex)
    cdef cplx[:, ::1] term = np.empty((dmax, dmax), dtype=complex)
    cdef cplx[:, ::1] tmp = np.empty((dmax, dmax), dtype=complex)
    cdef cplx[:, ::1] ua = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] ub = np.empty((p, p), dtype=complex)
    cdef cplx[:, ::1] ha = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] hb = np.empty((p, p), dtype=complex)
    cdef cplx[:, ::1] ta = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] tb = np.empty((p, p), dtype=complex)
    cdef cplx[:, ::1] wa = np.empty((n, n), dtype=complex)
    cdef cplx[:, ::1] wb = np.empty((p, p), dtype=complex)
    cdef double[:, ::1] S = np.zeros((M, M), dtype=float)
    cdef double[:, ::1] t1 = np.empty((nr, M), dtype=float)
    cdef Py_ssize_t r, i, j, a, b, c, lo, hi
    cdef double acc, diff, tot

    with nogil:
        for r in range(L):
            _assemble(th[r], 0, n, ha)
            _expi(ha, n, ua, ta, wa)
            _assemble(th[r], n * n, p, hb)
            _expi(hb, p, ub, tb, wb)
            for i in range(n):
                for j in range(n):
                    S[i, j] = ua[i, j].real
                    S[i, N + j] = -ua[i, j].imag
                    S[N + i, j] = ua[i, j].imag
                    S[N + i, N + j] = ua[i, j].real
            for i in range(p):
                for j in range(p):
                    S[n + i, n + j] = ub[i, j].real
                    S[n + i, N + n + j] = -ub[i, j].imag
                    S[N + n + i, n + j] = ub[i, j].imag
                    S[N + n + i, N + n + j] = ub[i, j].real
            # S is block diagonal per party: row k only touches its party's q and p columns
            for a in range(nr):
                lo, hi = _party(rw[a], n, N)
                for c in range(M):
                    acc = 0.0
                    for b in range(lo, hi):
                        acc = acc + S[rw[a], b] * sig[b, c] + S[rw[a], N + b] * sig[N + b, c]
                    t1[a, c] = acc
            tot = 0.0
            for a in range(nr):
                for b in range(M):
                    lo, hi = _party(b, n, N)
                    acc = 0.0
                    for c in range(lo, hi):
                        acc = acc + t1[a, c] * S[b, c] + t1[a, N + c] * S[b, N + c]
                    diff = acc - tgt[a, b]
                    tot = tot + diff * diff
            f[r] = sqrt(tot)
    return res
