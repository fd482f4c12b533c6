# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Two loops dominate runtime: the sparse-times-sparse product of packed
integer polynomials (exact identity verification) and the per-cell sweep of
marching squares (level-set extraction). ``_pykernels`` carries the same
functions in pure Python/numpy and is used when this module is unavailable.
"""

import numpy as np
cimport numpy as cnp

from libc.stdint cimport int64_t

cnp.import_array()

cdef extern from *:
    """
    static inline int hg_mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int hg_add_ovf(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    """
    bint hg_mul_ovf(long long a, long long b, long long *r) nogil
    bint hg_add_ovf(long long a, long long b, long long *r) nogil


# dense accumulator above this many slots is refused; caller falls back
cdef int64_t MAX_DENSE = 50_000_000


def poly_mul_packed(keys_a, coefs_a, keys_b, coefs_b):
    """Multiply two polynomials given as packed monomial keys.

    Keys are mixed-radix encodings of exponent vectors chosen by the caller
    so that key addition never carries. Coefficients are 64-bit integers.

    Returns ``(keys, coefs)`` with zero coefficients dropped, keys ascending.
    Raises ``OverflowError`` if any coefficient leaves the int64 range.
    """
    cdef cnp.ndarray[int64_t, ndim=1] ka = np.ascontiguousarray(keys_a, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] kb = np.ascontiguousarray(keys_b, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] ca = np.ascontiguousarray(coefs_a, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] cb = np.ascontiguousarray(coefs_b, dtype=np.int64)
    cdef Py_ssize_t na = ka.shape[0], nb = kb.shape[0]
    if na == 0 or nb == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    cdef int64_t kmax = ka.max() + kb.max() + 1
    if kmax > MAX_DENSE:
        raise OverflowError("packed key range too large for dense accumulation")
    cdef cnp.ndarray[int64_t, ndim=1] acc = np.zeros(kmax, dtype=np.int64)
    cdef int64_t[::1] accv = acc
    cdef int64_t[::1] kav = ka, kbv = kb, cav = ca, cbv = cb
    cdef Py_ssize_t i, j
    cdef long long prod, tot, ai, aki
    cdef bint bad = False
    with nogil:
        for i in range(na):
            ai = cav[i]
            aki = kav[i]
            for j in range(nb):
                if hg_mul_ovf(ai, cbv[j], &prod):
                    bad = True
                    break
                if hg_add_ovf(accv[aki + kbv[j]], prod, &tot):
                    bad = True
                    break
                accv[aki + kbv[j]] = tot
            if bad:
                break
    if bad:
        raise OverflowError("int64 overflow in polynomial product")
    nz = np.flatnonzero(acc)
    return nz.astype(np.int64), acc[nz]


def marching_squares(double[:, :] f, double level):
    """Extract level-crossing segments cell by cell.

    ``f`` is indexed ``f[i, j]`` with ``i`` along the first axis. Returns
    ``(segments, cells)`` where ``segments`` has rows ``(i0, j0, i1, j1)``
    in fractional index coordinates and ``cells`` the ``(i, j)`` of the
    lower-left corner of the cell that produced each segment. Saddle cells
    are resolved with the cell-center average.
    """
    cdef Py_ssize_t ni = f.shape[0], nj = f.shape[1]
    cdef Py_ssize_t i, j, e, n = 0
    cdef double v0, v1, v2, v3, center
    cdef int code
    cdef double px[4]
    cdef double py[4]
    cdef int ea, eb
    cap = 16 + 2 * (ni + nj)
    seg = np.empty((cap, 4), dtype=np.float64)
    cel = np.empty((cap, 2), dtype=np.int64)
    cdef double[:, ::1] segv = seg
    cdef int64_t[:, ::1] celv = cel
    # corner order: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edge e joins corner e and e+1
    for i in range(ni - 1):
        for j in range(nj - 1):
            v0 = f[i, j] - level
            v1 = f[i + 1, j] - level
            v2 = f[i + 1, j + 1] - level
            v3 = f[i, j + 1] - level
            code = (v0 > 0) | ((v1 > 0) << 1) | ((v2 > 0) << 2) | ((v3 > 0) << 3)
            if code == 0 or code == 15:
                continue
            _edge_point(0, i, j, v0, v1, &px[0], &py[0])
            _edge_point(1, i, j, v1, v2, &px[1], &py[1])
            _edge_point(2, i, j, v2, v3, &px[2], &py[2])
            _edge_point(3, i, j, v3, v0, &px[3], &py[3])
            if code == 5 or code == 10:
                center = 0.25 * (v0 + v1 + v2 + v3)
                if (code == 5) == (center > 0):
                    # corners 0 and 2 joined through the center
                    n = _push(segv, celv, n, px, py, 0, 1, i, j)
                    n = _push(segv, celv, n, px, py, 2, 3, i, j)
                else:
                    n = _push(segv, celv, n, px, py, 3, 0, i, j)
                    n = _push(segv, celv, n, px, py, 1, 2, i, j)
            else:
                ea = -1
                eb = -1
                for e in range(4):
                    if _crosses(e, code):
                        if ea < 0:
                            ea = e
                        else:
                            eb = e
                n = _push(segv, celv, n, px, py, ea, eb, i, j)
            if n + 2 >= segv.shape[0]:
                seg = np.concatenate([seg, np.empty_like(seg)])
                cel = np.concatenate([cel, np.empty_like(cel)])
                segv = seg
                celv = cel
    return seg[:n].copy(), cel[:n].copy()


cdef inline bint _crosses(int e, int code) nogil:
    cdef int a = (code >> e) & 1
    cdef int b = (code >> ((e + 1) & 3)) & 1
    return a != b


cdef inline void _edge_point(int e, Py_ssize_t i, Py_ssize_t j, double va, double vb,
                             double *x, double *y) nogil:
    cdef double t
    if va == vb:
        t = 0.5
    else:
        t = va / (va - vb)
    if e == 0:
        x[0] = i + t
        y[0] = j
    elif e == 1:
        x[0] = i + 1
        y[0] = j + t
    elif e == 2:
        x[0] = i + 1 - t
        y[0] = j + 1
    else:
        x[0] = i
        y[0] = j + 1 - t


cdef inline Py_ssize_t _push(double[:, ::1] segv, int64_t[:, ::1] celv, Py_ssize_t n,
                             double *px, double *py, int a, int b,
                             Py_ssize_t i, Py_ssize_t j):
    segv[n, 0] = px[a]
    segv[n, 1] = py[a]
    segv[n, 2] = px[b]
    segv[n, 3] = py[b]
    celv[n, 0] = i
    celv[n, 1] = j
    return n + 1
