# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels. Mirrors the contracts of ``pure.py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, fabs, sqrt

cnp.import_array()

NAME = "fast"


def mean_point_distance(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k
    cdef double dx, dy, dz, acc = 0.0
    for k in range(n):
        dx = a[k, 0] - b[k, 0]
        dy = a[k, 1] - b[k, 1]
        dz = a[k, 2] - b[k, 2]
        acc += sqrt(dx * dx + dy * dy + dz * dz)
    return acc / n


cdef inline double _relative_angle(double aw, double ax, double ay, double az,
                                   double bw, double bx, double by, double bz) nogil:
    # conj(a) ⊗ b, then 2*atan2(||vec||, |w|); antisymmetric pair grouping
    # makes identical inputs cancel to an exact zero vector part
    cdef double w = aw * bw + ax * bx + ay * by + az * bz
    cdef double x = (aw * bx - ax * bw) + (az * by - ay * bz)
    cdef double y = (aw * by - ay * bw) + (ax * bz - az * bx)
    cdef double z = (aw * bz - az * bw) + (ay * bx - ax * by)
    return 2.0 * atan2(sqrt(x * x + y * y + z * z), fabs(w))


def mean_quat_angle(const double[:, ::1] qa, const double[:, ::1] qb):
    # arccos(|qa . qb|) == half the relative rotation angle for unit inputs
    cdef Py_ssize_t n = qa.shape[0]
    cdef Py_ssize_t k
    cdef double acc = 0.0
    for k in range(n):
        acc += 0.5 * _relative_angle(qa[k, 0], qa[k, 1], qa[k, 2], qa[k, 3],
                                     qb[k, 0], qb[k, 1], qb[k, 2], qb[k, 3])
    return acc / n


def mean_pose_distance(const double[:, ::1] pa, const double[:, ::1] qa,
                       const double[:, ::1] pb, const double[:, ::1] qb, double weight):
    cdef Py_ssize_t n = pa.shape[0]
    cdef Py_ssize_t k
    cdef double dx, dy, dz, angle, acc = 0.0
    for k in range(n):
        dx = pb[k, 0] - pa[k, 0]
        dy = pb[k, 1] - pa[k, 1]
        dz = pb[k, 2] - pa[k, 2]
        angle = _relative_angle(qa[k, 0], qa[k, 1], qa[k, 2], qa[k, 3],
                                qb[k, 0], qb[k, 1], qb[k, 2], qb[k, 3])
        acc += sqrt(angle * angle + weight * (dx * dx + dy * dy + dz * dz))
    return acc / n


def forward_difference(const double[:, ::1] x, double dt):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k, j
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for k in range(n - 1):
        for j in range(m):
            out[k, j] = (x[k + 1, j] - x[k, j]) / dt
    for j in range(m):
        out[n - 1, j] = out[n - 2, j]
    return out_arr


def row_norms(const double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k, j
    cdef double acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for k in range(n):
        acc = 0.0
        for j in range(m):
            acc += x[k, j] * x[k, j]
        out[k] = sqrt(acc)
    return out_arr


def abs_row_sums(const double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k, j
    cdef double acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for k in range(n):
        acc = 0.0
        for j in range(m):
            acc += fabs(x[k, j])
        out[k] = acc
    return out_arr


def row_sums(const double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k, j
    cdef double acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for k in range(n):
        acc = 0.0
        for j in range(m):
            acc += x[k, j]
        out[k] = acc
    return out_arr


def moving_mask(const double[::1] speed, double eps, int min_run):
    cdef Py_ssize_t n = speed.shape[0]
    cdef Py_ssize_t k = 0, start, j
    out_arr = np.zeros(n, dtype=np.bool_)
    cdef cnp.uint8_t[::1] out = out_arr.view(np.uint8)
    while k < n:
        if speed[k] >= eps:
            start = k
            while k < n and speed[k] >= eps:
                k += 1
            if k - start >= min_run:
                for j in range(start, k):
                    out[j] = 1
        else:
            k += 1
    return out_arr
