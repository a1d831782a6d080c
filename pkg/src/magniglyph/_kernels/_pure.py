"""Pure NumPy reference kernels.

These mirror the Cython kernels operation-for-operation so that both
backends produce bit-identical float64 results.  Keep the arithmetic
expression structure in sync with ``_fast.pyx`` when editing.
"""

import numpy as np


def _axis_maps(src_size: int, dst_size: int):
    """Half-pixel-center source coordinates for one axis.

    Returns (lo index, hi index, hi weight, lo weight) arrays of length
    ``dst_size``.  Source coordinate = (dst + 0.5) * src/dst - 0.5,
    clamped to the border.
    """
    scale = src_size / dst_size
    s = (np.arange(dst_size, dtype=np.float64) + 0.5) * scale - 0.5
    s = np.clip(s, 0.0, float(src_size - 1))
    i0 = np.floor(s).astype(np.intp)
    i1 = np.minimum(i0 + 1, src_size - 1)
    f = s - i0
    return i0, i1, f, 1.0 - f


def bilinear_resample(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of a float64 (H, W, C) array. Unrounded output."""
    h, w = src.shape[:2]
    y0, y1, fy, gy = _axis_maps(h, out_h)
    x0, x1, fx, gx = _axis_maps(w, out_w)

    p00 = src[y0[:, None], x0[None, :]]
    p01 = src[y0[:, None], x1[None, :]]
    p10 = src[y1[:, None], x0[None, :]]
    p11 = src[y1[:, None], x1[None, :]]

    fx = fx[None, :, None]
    gx = gx[None, :, None]
    top = p00 * gx + p01 * fx
    bot = p10 * gx + p11 * fx
    return top * gy[:, None, None] + bot * fy[:, None, None]


def diffuse_fill(values: np.ndarray, hole: np.ndarray,
                 max_iterations: int, tolerance: float):
    """Jacobi 4-neighbor diffusion over the hole pixels.

    ``values`` is float64 (H, W, C); ``hole`` is bool (H, W).  Pixels
    outside the hole are fixed boundary values.  Sweeps stop when the
    largest per-channel change over hole pixels is <= ``tolerance`` or
    after ``max_iterations`` sweeps.  Returns (filled array, sweeps run).
    """
    vals = values.copy()
    hole3 = hole[:, :, None]
    sweeps = 0
    for _ in range(max_iterations):
        acc = np.zeros_like(vals)
        cnt = np.zeros(vals.shape[:2], dtype=np.float64)
        # Neighbor accumulation order (up, down, left, right) matches the
        # compiled kernel so partial sums are bit-identical.
        acc[1:, :] += vals[:-1, :]
        cnt[1:, :] += 1.0
        acc[:-1, :] += vals[1:, :]
        cnt[:-1, :] += 1.0
        acc[:, 1:] += vals[:, :-1]
        cnt[:, 1:] += 1.0
        acc[:, :-1] += vals[:, 1:]
        cnt[:, :-1] += 1.0
        new = acc / cnt[:, :, None]
        delta = np.abs(new - vals)[hole].max()
        vals = np.where(hole3, new, vals)
        sweeps += 1
        if delta <= tolerance:
            break
    return vals, sweeps
