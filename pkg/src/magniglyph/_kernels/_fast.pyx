# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Arithmetic mirrors ``_pure`` bit-for-bit: same
expression structure, same operand order, no fast-math."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def bilinear_resample(src, int out_h, int out_w):
    """Bilinear resample of a float64 (H, W, C) array. Unrounded output."""
    cdef double[:, :, ::1] s = np.ascontiguousarray(src, dtype=np.float64)
    cdef Py_ssize_t h = s.shape[0]
    cdef Py_ssize_t w = s.shape[1]
    cdef Py_ssize_t nc = s.shape[2]

    out_arr = np.empty((out_h, out_w, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    y0_a = np.empty(out_h, dtype=np.intp)
    y1_a = np.empty(out_h, dtype=np.intp)
    fy_a = np.empty(out_h, dtype=np.float64)
    x0_a = np.empty(out_w, dtype=np.intp)
    x1_a = np.empty(out_w, dtype=np.intp)
    fx_a = np.empty(out_w, dtype=np.float64)
    cdef Py_ssize_t[::1] y0 = y0_a
    cdef Py_ssize_t[::1] y1 = y1_a
    cdef double[::1] fy = fy_a
    cdef Py_ssize_t[::1] x0 = x0_a
    cdef Py_ssize_t[::1] x1 = x1_a
    cdef double[::1] fx = fx_a

    cdef double scale, sc
    cdef Py_ssize_t i, j, c, lo
    cdef double p00, p01, p10, p11, top, bot, gxj, gyi

    scale = (<double> h) / (<double> out_h)
    for i in range(out_h):
        sc = ((<double> i) + 0.5) * scale - 0.5
        if sc < 0.0:
            sc = 0.0
        if sc > <double> (h - 1):
            sc = <double> (h - 1)
        lo = <Py_ssize_t> sc  # sc >= 0, truncation == floor
        y0[i] = lo
        y1[i] = lo + 1 if lo + 1 < h else h - 1
        fy[i] = sc - <double> lo

    scale = (<double> w) / (<double> out_w)
    for j in range(out_w):
        sc = ((<double> j) + 0.5) * scale - 0.5
        if sc < 0.0:
            sc = 0.0
        if sc > <double> (w - 1):
            sc = <double> (w - 1)
        lo = <Py_ssize_t> sc
        x0[j] = lo
        x1[j] = lo + 1 if lo + 1 < w else w - 1
        fx[j] = sc - <double> lo

    for i in range(out_h):
        gyi = 1.0 - fy[i]
        for j in range(out_w):
            gxj = 1.0 - fx[j]
            for c in range(nc):
                p00 = s[y0[i], x0[j], c]
                p01 = s[y0[i], x1[j], c]
                p10 = s[y1[i], x0[j], c]
                p11 = s[y1[i], x1[j], c]
                top = p00 * gxj + p01 * fx[j]
                bot = p10 * gxj + p11 * fx[j]
                out[i, j, c] = top * gyi + bot * fy[i]
    return out_arr


def diffuse_fill(values, hole, int max_iterations, double tolerance):
    """Jacobi 4-neighbor diffusion over the hole pixels.

    Same contract as the pure kernel: returns (filled float64 array,
    sweeps run).  ``hole`` must contain at least one true bit.
    """
    cur_arr = np.array(values, dtype=np.float64, copy=True, order="C")
    nxt_arr = cur_arr.copy()
    hole_arr = np.ascontiguousarray(hole, dtype=np.uint8)

    cdef double[:, :, ::1] cur = cur_arr
    cdef double[:, :, ::1] nxt = nxt_arr
    cdef unsigned char[:, ::1] hm = hole_arr
    cdef Py_ssize_t h = cur.shape[0]
    cdef Py_ssize_t w = cur.shape[1]
    cdef Py_ssize_t nc = cur.shape[2]

    cdef Py_ssize_t y, x, c
    cdef int sweeps = 0
    cdef double acc, cnt, nv, d, delta
    cdef double[:, :, ::1] tmp

    while sweeps < max_iterations:
        delta = 0.0
        for y in range(h):
            for x in range(w):
                if hm[y, x] == 0:
                    continue
                for c in range(nc):
                    # Accumulation order matches the pure kernel:
                    # up, down, left, right.
                    acc = 0.0
                    cnt = 0.0
                    if y > 0:
                        acc = acc + cur[y - 1, x, c]
                        cnt = cnt + 1.0
                    if y < h - 1:
                        acc = acc + cur[y + 1, x, c]
                        cnt = cnt + 1.0
                    if x > 0:
                        acc = acc + cur[y, x - 1, c]
                        cnt = cnt + 1.0
                    if x < w - 1:
                        acc = acc + cur[y, x + 1, c]
                        cnt = cnt + 1.0
                    nv = acc / cnt
                    d = nv - cur[y, x, c]
                    if d < 0.0:
                        d = -d
                    if d > delta:
                        delta = d
                    nxt[y, x, c] = nv
        tmp = cur
        cur = nxt
        nxt = tmp
        sweeps += 1
        if delta <= tolerance:
            break
    # cur view points at whichever buffer holds the latest sweep
    return np.asarray(cur).copy(), sweeps
