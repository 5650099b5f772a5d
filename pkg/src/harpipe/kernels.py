"""Hot numeric kernels with numba-accelerated and pure-numpy implementations.

Set HARPIPE_NO_NUMBA=1 to force the numpy path (useful on platforms where the
JIT is unavailable and for A/B benchmarking; see benchmarks/kernel_bench.py).
Both paths compute the same float64 arithmetic in the same order, so outputs
are bit-identical.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("HARPIPE_NO_NUMBA", "") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _resize_coords(dst_size: int, src_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source sample positions for a center-aligned stretch resize."""
    scale = src_size / dst_size
    pos = (np.arange(dst_size, dtype=np.float64) + 0.5) * scale - 0.5
    pos = np.clip(pos, 0.0, src_size - 1.0)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, src_size - 1)
    frac = pos - lo
    return lo, hi, frac


def _bilinear_resize_np(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    x0, x1, fx = _resize_coords(out_w, src.shape[1])
    y0, y1, fy = _resize_coords(out_h, src.shape[0])
    s = src.astype(np.float64)
    top = s[y0][:, x0] * (1.0 - fx)[None, :, None] + s[y0][:, x1] * fx[None, :, None]
    bot = s[y1][:, x0] * (1.0 - fx)[None, :, None] + s[y1][:, x1] * fx[None, :, None]
    val = top * (1.0 - fy)[:, None, None] + bot * fy[:, None, None]
    return np.floor(val + 0.5).astype(np.uint8)


@njit(cache=True)
def _bilinear_resize_jit(src, out_h, out_w):  # pragma: no cover - exercised via wrapper
    src_h, src_w, ch = src.shape
    out = np.empty((out_h, out_w, ch), dtype=np.uint8)
    scale_y = src_h / out_h
    scale_x = src_w / out_w
    for oy in range(out_h):
        py = (oy + 0.5) * scale_y - 0.5
        if py < 0.0:
            py = 0.0
        if py > src_h - 1.0:
            py = src_h - 1.0
        y0 = int(np.floor(py))
        y1 = min(y0 + 1, src_h - 1)
        fy = py - y0
        for ox in range(out_w):
            px = (ox + 0.5) * scale_x - 0.5
            if px < 0.0:
                px = 0.0
            if px > src_w - 1.0:
                px = src_w - 1.0
            x0 = int(np.floor(px))
            x1 = min(x0 + 1, src_w - 1)
            fx = px - x0
            for c in range(ch):
                top = src[y0, x0, c] * (1.0 - fx) + src[y0, x1, c] * fx
                bot = src[y1, x0, c] * (1.0 - fx) + src[y1, x1, c] * fx
                out[oy, ox, c] = np.uint8(np.floor(top * (1.0 - fy) + bot * fy + 0.5))
    return out


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Stretch-resize an (H, W, 3) uint8 image to (out_h, out_w, 3)."""
    if src.ndim != 3 or src.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) image")
    if out_h <= 0 or out_w <= 0:
        raise ValueError("output size must be positive")
    src = np.ascontiguousarray(src, dtype=np.uint8)
    if NUMBA_ENABLED:
        return _bilinear_resize_jit(src, out_h, out_w)
    return _bilinear_resize_np(src, out_h, out_w)


def _patch_median_np(depth: np.ndarray, row: int, col: int, radius: int) -> float:
    h, w = depth.shape
    patch = depth[max(0, row - radius):min(h, row + radius + 1),
                  max(0, col - radius):min(w, col + radius + 1)]
    nz = patch[patch > 0]
    if nz.size == 0:
        return 0.0
    return float(np.median(nz.astype(np.float64)))


@njit(cache=True)
def _patch_median_jit(depth, row, col, radius):  # pragma: no cover - exercised via wrapper
    h, w = depth.shape
    vals = np.empty((2 * radius + 1) * (2 * radius + 1), dtype=np.float64)
    cnt = 0
    for r in range(max(0, row - radius), min(h, row + radius + 1)):
        for c in range(max(0, col - radius), min(w, col + radius + 1)):
            v = depth[r, c]
            if v > 0:
                vals[cnt] = v
                cnt += 1
    if cnt == 0:
        return 0.0
    return float(np.median(vals[:cnt]))


def nonzero_patch_median(depth: np.ndarray, row: int, col: int, radius: int = 2) -> float:
    """Median of nonzero depth values in a clipped square neighborhood; 0.0 if all zero."""
    depth = np.ascontiguousarray(depth, dtype=np.uint16)
    if NUMBA_ENABLED:
        return _patch_median_jit(depth, row, col, radius)
    return _patch_median_np(depth, row, col, radius)


def warmup() -> None:
    """Trigger JIT compilation ahead of timing-sensitive runs."""
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    bilinear_resize(img, 2, 2)
    nonzero_patch_median(np.zeros((8, 8), dtype=np.uint16), 3, 3)
