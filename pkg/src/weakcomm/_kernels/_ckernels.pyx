# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels. Same counter layout and arithmetic order as
``_pykernels``; see that module for the layout."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, cos, exp, hypot, M_PI
from libc.stdint cimport uint64_t, int8_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_PI = 2.0 * M_PI
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z ^ (z >> 30)
    z = z * 0xBF58476D1CE4E5B9ULL
    z = z ^ (z >> 27)
    z = z * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform_at(uint64_t key, uint64_t ctr) noexcept nogil:
    return <double>(mix64(key + (ctr + 1) * GOLDEN) >> 11) * INV_2_53


cdef inline double box_muller(double u1, double u2) noexcept nogil:
    return sqrt(-2.0 * log(1.0 - u1)) * cos(TWO_PI * u2)


cdef struct Eig:
    double pu, pdr, pdi, mu, mdr, mdi


cdef inline Eig eigvecs(double nx, double ny, double nz) noexcept nogil:
    cdef Eig e
    cdef double r = hypot(nx, ny)
    cdef double ph_r = 1.0, ph_i = 0.0
    cdef double a
    if r > 0.0:
        ph_r = nx / r
        ph_i = ny / r
    a = (1.0 + nz) * 0.5
    a = 0.0 if a < 0.0 else (1.0 if a > 1.0 else a)
    e.pu = sqrt(a)
    a = (1.0 - nz) * 0.5
    a = 0.0 if a < 0.0 else (1.0 if a > 1.0 else a)
    e.mu = sqrt(a)
    if e.pu == 0.0:
        e.pdr = 1.0
        e.pdi = 0.0
    else:
        e.pdr = e.mu * ph_r
        e.pdi = e.mu * ph_i
    if e.mu == 0.0:
        e.mdr = 1.0
        e.mdi = 0.0
    else:
        e.mdr = -(e.pu * ph_r)
        e.mdi = -(e.pu * ph_i)
    return e


def splitmix_block(uint64_t key, uint64_t start, Py_ssize_t n):
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t j
    for j in range(n):
        o[j] = mix64(key + (start + <uint64_t>j + 1) * GOLDEN)
    return out


def uniform_block(uint64_t key, uint64_t start, Py_ssize_t n):
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    for j in range(n):
        o[j] = uniform_at(key, start + <uint64_t>j)
    return out


def normal_block(uint64_t key, uint64_t start, Py_ssize_t n):
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    cdef uint64_t c
    for j in range(n):
        c = start + 2 * <uint64_t>j
        o[j] = box_muller(uniform_at(key, c), uniform_at(key, c + 1))
    return out


def weak_measure(up, down, axis, double delta_p, uint64_t key, uint64_t start):
    cdef const double complex[::1] ups = np.ascontiguousarray(up, dtype=np.complex128)
    cdef const double complex[::1] downs = np.ascontiguousarray(down, dtype=np.complex128)
    cdef Py_ssize_t n = ups.shape[0]
    p_arr = np.empty(n, dtype=np.float64)
    up_arr = np.empty(n, dtype=np.complex128)
    down_arr = np.empty(n, dtype=np.complex128)
    cdef double[::1] p_out = p_arr
    cdef double complex[::1] up_out = up_arr
    cdef double complex[::1] down_out = down_arr
    cdef Eig e = eigvecs(axis[0], axis[1], axis[2])
    cdef double inv_var = 1.0 / (delta_p * delta_p)
    cdef Py_ssize_t i
    cdef uint64_t c
    cdef double ur, ui, dr, di, cpr, cpi, cmr, cmi, p, wp, wm
    cdef double apr, api, amr, ami, nur, nui, ndr, ndi, norm
    cdef bint plus
    with nogil:
        for i in range(n):
            ur = ups[i].real
            ui = ups[i].imag
            dr = downs[i].real
            di = downs[i].imag
            cpr = e.pu * ur + (e.pdr * dr + e.pdi * di)
            cpi = e.pu * ui + (e.pdr * di - e.pdi * dr)
            cmr = e.mu * ur + (e.mdr * dr + e.mdi * di)
            cmi = e.mu * ui + (e.mdr * di - e.mdi * dr)
            c = start + 3 * <uint64_t>i
            plus = uniform_at(key, c) < (cpr * cpr + cpi * cpi)
            p = (1.0 if plus else -1.0) + delta_p * box_muller(
                uniform_at(key, c + 1), uniform_at(key, c + 2))
            if p >= 0.0:
                wp = 1.0
                wm = exp(-p * inv_var)
            else:
                wp = exp(p * inv_var)
                wm = 1.0
            apr = cpr * wp
            api = cpi * wp
            amr = cmr * wm
            ami = cmi * wm
            nur = apr * e.pu + amr * e.mu
            nui = api * e.pu + ami * e.mu
            ndr = (apr * e.pdr - api * e.pdi) + (amr * e.mdr - ami * e.mdi)
            ndi = (apr * e.pdi + api * e.pdr) + (amr * e.mdi + ami * e.mdr)
            norm = sqrt((nur * nur + nui * nui) + (ndr * ndr + ndi * ndi))
            if norm == 0.0:
                if plus:
                    nur = e.pu
                    ndr = e.pdr
                    ndi = e.pdi
                else:
                    nur = e.mu
                    ndr = e.mdr
                    ndi = e.mdi
                nui = 0.0
                norm = 1.0
            p_out[i] = p
            up_out[i].real = nur / norm
            up_out[i].imag = nui / norm
            down_out[i].real = ndr / norm
            down_out[i].imag = ndi / norm
    return p_arr, up_arr, down_arr


def strong_measure(up, down, axes, uint64_t key, uint64_t start):
    axes = np.asarray(axes, dtype=np.float64)
    if axes.ndim == 1:
        return _strong_single(up, down, axes[0], axes[1], axes[2], key, start)
    cdef const double complex[::1] ups = np.ascontiguousarray(up, dtype=np.complex128)
    cdef const double complex[::1] downs = np.ascontiguousarray(down, dtype=np.complex128)
    cdef const double[:, ::1] ax = np.ascontiguousarray(axes)
    cdef Py_ssize_t n = ups.shape[0]
    out_arr = np.empty(n, dtype=np.int8)
    up_arr = np.empty(n, dtype=np.complex128)
    down_arr = np.empty(n, dtype=np.complex128)
    cdef int8_t[::1] outcomes = out_arr
    cdef double complex[::1] up_out = up_arr
    cdef double complex[::1] down_out = down_arr
    cdef Py_ssize_t i
    cdef double ur, ui, dr, di, nx, ny, nz, bx, by, bz, prob_plus
    cdef Eig e
    with nogil:
        for i in range(n):
            ur = ups[i].real
            ui = ups[i].imag
            dr = downs[i].real
            di = downs[i].imag
            nx = ax[i, 0]
            ny = ax[i, 1]
            nz = ax[i, 2]
            bx = 2.0 * (ur * dr + ui * di)
            by = 2.0 * (ur * di - ui * dr)
            bz = (ur * ur + ui * ui) - (dr * dr + di * di)
            prob_plus = 0.5 * (1.0 + ((nx * bx + ny * by) + nz * bz))
            e = eigvecs(nx, ny, nz)
            if uniform_at(key, start + <uint64_t>i) < prob_plus:
                outcomes[i] = 1
                up_out[i].real = e.pu
                up_out[i].imag = 0.0
                down_out[i].real = e.pdr
                down_out[i].imag = e.pdi
            else:
                outcomes[i] = -1
                up_out[i].real = e.mu
                up_out[i].imag = 0.0
                down_out[i].real = e.mdr
                down_out[i].imag = e.mdi
    return out_arr, up_arr, down_arr


def _strong_single(up, down, double nx, double ny, double nz, uint64_t key, uint64_t start):
    cdef const double complex[::1] ups = np.ascontiguousarray(up, dtype=np.complex128)
    cdef const double complex[::1] downs = np.ascontiguousarray(down, dtype=np.complex128)
    cdef Py_ssize_t n = ups.shape[0]
    out_arr = np.empty(n, dtype=np.int8)
    up_arr = np.empty(n, dtype=np.complex128)
    down_arr = np.empty(n, dtype=np.complex128)
    cdef int8_t[::1] outcomes = out_arr
    cdef double complex[::1] up_out = up_arr
    cdef double complex[::1] down_out = down_arr
    cdef Eig e = eigvecs(nx, ny, nz)
    cdef Py_ssize_t i
    cdef double ur, ui, dr, di, bx, by, bz, prob_plus
    with nogil:
        for i in range(n):
            ur = ups[i].real
            ui = ups[i].imag
            dr = downs[i].real
            di = downs[i].imag
            bx = 2.0 * (ur * dr + ui * di)
            by = 2.0 * (ur * di - ui * dr)
            bz = (ur * ur + ui * ui) - (dr * dr + di * di)
            prob_plus = 0.5 * (1.0 + ((nx * bx + ny * by) + nz * bz))
            if uniform_at(key, start + <uint64_t>i) < prob_plus:
                outcomes[i] = 1
                up_out[i].real = e.pu
                up_out[i].imag = 0.0
                down_out[i].real = e.pdr
                down_out[i].imag = e.pdi
            else:
                outcomes[i] = -1
                up_out[i].real = e.mu
                up_out[i].imag = 0.0
                down_out[i].real = e.mdr
                down_out[i].imag = e.mdi
    return out_arr, up_arr, down_arr
