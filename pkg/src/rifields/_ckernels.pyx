# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_kernels_py`` for the contract."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def lower_hull(double[::1] y, double[::1] f):
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.intp_t[::1] hull = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t k = 0, i, a, b
    cdef double cross
    for i in range(n):
        while k >= 2:
            a = hull[k - 2]
            b = hull[k - 1]
            cross = (y[b] - y[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (y[i] - y[a])
            if cross <= 0.0:
                k -= 1
            else:
                break
        hull[k] = i
        k += 1
    return np.asarray(hull[:k]).copy()


def legendre_max(y, f, u):
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef cnp.intp_t[::1] hull = lower_hull(yv, fv)
    cdef Py_ssize_t k = hull.shape[0], m = uv.shape[0]
    cdef double[::1] slopes = np.empty(max(k - 1, 1))
    cdef Py_ssize_t j, lo, hi, mid, i, a, b
    cdef double uj
    for j in range(k - 1):
        a = hull[j]
        b = hull[j + 1]
        slopes[j] = (fv[b] - fv[a]) / (yv[b] - yv[a])
    values = np.empty(m)
    arg = np.empty(m, dtype=np.intp)
    cdef double[::1] vv = values
    cdef cnp.intp_t[::1] av = arg
    for j in range(m):
        lo = 0
        hi = k - 1
        uj = uv[j]
        while lo < hi:
            mid = (lo + hi) // 2
            if slopes[mid] < uj:
                lo = mid + 1
            else:
                hi = mid
        i = hull[lo]
        av[j] = i
        vv[j] = uj * yv[i] - fv[i]
    return values, arg


def greedy_cover(dist, double eps, Py_ssize_t start):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0], j, j_far
    cdef double[::1] mind = np.empty(n)
    cdef double far
    for j in range(n):
        mind[j] = d[start, j]
    centers = [start]
    while True:
        far = -1.0
        j_far = -1
        for j in range(n):
            if mind[j] > far:
                far = mind[j]
                j_far = j
        if far <= eps:
            break
        centers.append(j_far)
        for j in range(n):
            if d[j_far, j] < mind[j]:
                mind[j] = d[j_far, j]
    return np.asarray(centers, dtype=np.intp)


def greedy_packing(dist, double sep):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0], i, c, k = 0
    cdef cnp.intp_t[::1] chosen = np.empty(n, dtype=np.intp)
    cdef bint ok
    for i in range(n):
        ok = True
        for c in range(k):
            if d[i, chosen[c]] <= sep:
                ok = False
                break
        if ok:
            chosen[k] = i
            k += 1
    return np.asarray(chosen[:k]).copy()


def ball_max(dist, weights, double delta):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0], i, j, arg = 0
    cdef double s, best = -1.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            if d[i, j] <= delta:
                s += w[j]
        if s > best:
            best = s
            arg = i
    return best, arg


def nearest(dist, net):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef cnp.intp_t[::1] nv = np.ascontiguousarray(net, dtype=np.intp)
    cdef Py_ssize_t n = d.shape[0], m = nv.shape[0], i, c, arg
    cdef double best, dd
    out = np.empty(n, dtype=np.intp)
    cdef cnp.intp_t[::1] ov = out
    for i in range(n):
        best = np.inf
        arg = -1
        for c in range(m):
            dd = d[i, nv[c]]
            if dd < best:
                best = dd
                arg = nv[c]
        ov[i] = arg
    return out
