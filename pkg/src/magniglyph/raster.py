"""Raster, mask and rectangle primitives plus PNG I/O.

All operations are pure: inputs are never mutated and identical inputs
produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ._kernels import bilinear_resample

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def round_half_up(x):
    """Round to nearest integer, halves up. Works on scalars and arrays."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle: [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rect {self}")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def clipped(self, width: int, height: int) -> "Rect | None":
        """Intersection with [0, width) x [0, height), or None if empty."""
        x0 = max(self.x0, 0)
        y0 = max(self.y0, 0)
        x1 = min(self.x1, width)
        y1 = min(self.y1, height)
        if x0 >= x1 or y0 >= y1:
            return None
        return Rect(x0, y0, x1, y1)

    def contains(self, other: "Rect") -> bool:
        return (self.x0 <= other.x0 and self.y0 <= other.y0
                and other.x1 <= self.x1 and other.y1 <= self.y1)

    def as_list(self) -> list[int]:
        return [self.x0, self.y0, self.x1, self.y1]


@dataclass(frozen=True)
class Raster:
    """Dense 8-bit RGB image; ``pixels`` is an (H, W, 3) uint8 array.

    Treated as immutable: operations return new rasters.
    """

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError("raster pixels must be (H, W, 3) uint8")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("raster must be at least 1x1")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def full_rect(self) -> Rect:
        return Rect(0, 0, self.width, self.height)

    def same_pixels(self, other: "Raster") -> bool:
        return np.array_equal(self.pixels, other.pixels)

    @staticmethod
    def from_array(arr) -> "Raster":
        return Raster(np.ascontiguousarray(arr, dtype=np.uint8))

    @staticmethod
    def filled(width: int, height: int, color=(0, 0, 0)) -> "Raster":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = color
        return Raster(px)


@dataclass(frozen=True)
class Mask:
    """Binary pixel map; ``bits`` is an (H, W) bool array."""

    bits: np.ndarray

    def __post_init__(self):
        b = self.bits
        if b.ndim != 2 or b.dtype != np.bool_:
            raise ValueError("mask bits must be (H, W) bool")
        if b.shape[0] < 1 or b.shape[1] < 1:
            raise ValueError("mask must be at least 1x1")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def popcount(self) -> int:
        return int(self.bits.sum())

    def same_bits(self, other: "Mask") -> bool:
        return np.array_equal(self.bits, other.bits)

    @staticmethod
    def from_array(arr) -> "Mask":
        return Mask(np.ascontiguousarray(arr, dtype=np.bool_))

    @staticmethod
    def filled(width: int, height: int, value: bool = False) -> "Mask":
        return Mask(np.full((height, width), value, dtype=np.bool_))


def crop(src: Raster, region: Rect) -> Raster:
    """Extract ``region`` (clipped to image bounds) as a new raster."""
    r = region.clipped(src.width, src.height)
    if r is None:
        raise ValueError("empty crop region")
    return Raster(src.pixels[r.y0:r.y1, r.x0:r.x1].copy())


def crop_mask(src: Mask, region: Rect) -> Mask:
    r = region.clipped(src.width, src.height)
    if r is None:
        raise ValueError("empty crop region")
    return Mask(src.bits[r.y0:r.y1, r.x0:r.x1].copy())


def scale_bilinear(src: Raster, new_w: int, new_h: int) -> Raster:
    """Bilinear resample with half-pixel-center coordinates.

    Source coordinate = (dst + 0.5) * src/dst - 0.5, clamped to borders.
    Channels are rounded half-up to the nearest integer.
    """
    if new_w < 1 or new_h < 1:
        raise ValueError("target size must be at least 1x1")
    vals = bilinear_resample(src.pixels.astype(np.float64), new_h, new_w)
    out = np.clip(round_half_up(vals), 0, 255).astype(np.uint8)
    return Raster(out)


def _nearest_index(src_size: int, dst_size: int) -> np.ndarray:
    s = (np.arange(dst_size, dtype=np.float64) + 0.5) * (src_size / dst_size) - 0.5
    return np.clip(round_half_up(s), 0, src_size - 1).astype(np.intp)


def scale_nearest(src: Mask, new_w: int, new_h: int) -> Mask:
    """Nearest-neighbor mask resample; output is strictly binary."""
    if new_w < 1 or new_h < 1:
        raise ValueError("target size must be at least 1x1")
    iy = _nearest_index(src.height, new_h)
    ix = _nearest_index(src.width, new_w)
    return Mask(src.bits[iy[:, None], ix[None, :]].copy())


def blit_masked(dst: Raster, src: Raster, src_mask: Mask,
                offset: tuple[int, int]) -> Raster:
    """Copy masked ``src`` pixels into ``dst`` at ``offset``.

    Out-of-bounds source pixels are silently dropped.
    """
    if (src.width, src.height) != (src_mask.width, src_mask.height):
        raise ValueError("src and src_mask dimensions differ")
    dx, dy = offset
    out = dst.pixels.copy()
    sx0 = max(0, -dx)
    sy0 = max(0, -dy)
    sx1 = min(src.width, dst.width - dx)
    sy1 = min(src.height, dst.height - dy)
    if sx0 < sx1 and sy0 < sy1:
        m = src_mask.bits[sy0:sy1, sx0:sx1]
        view = out[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx]
        view[m] = src.pixels[sy0:sy1, sx0:sx1][m]
    return Raster(out)


def to_luma(src: Raster) -> np.ndarray:
    """Rec. 601 luma plane, float64 in [0, 255], not rounded."""
    p = src.pixels.astype(np.float64)
    wr, wg, wb = LUMA_WEIGHTS
    return wr * p[:, :, 0] + wg * p[:, :, 1] + wb * p[:, :, 2]


def dilate(mask: Mask, radius: int) -> Mask:
    """4-neighbor (diamond) dilation iterated ``radius`` times."""
    if radius < 0:
        raise ValueError("dilation radius must be >= 0")
    bits = mask.bits.copy()
    for _ in range(radius):
        grown = bits.copy()
        grown[1:, :] |= bits[:-1, :]
        grown[:-1, :] |= bits[1:, :]
        grown[:, 1:] |= bits[:, :-1]
        grown[:, :-1] |= bits[:, 1:]
        bits = grown
    return Mask(bits)


def load_raster(path) -> Raster:
    """Read an 8-bit RGB PNG (alpha ignored)."""
    with Image.open(path) as im:
        return Raster(np.asarray(im.convert("RGB"), dtype=np.uint8).copy())


def save_raster(raster: Raster, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(raster.pixels, mode="RGB").save(path, format="PNG")


def load_mask(path) -> Mask:
    """Read a mask from an 8-bit grayscale PNG (0 = false, 255 = true)."""
    with Image.open(path) as im:
        gray = np.asarray(im.convert("L"), dtype=np.uint8)
    return Mask(gray >= 128)


def save_mask(mask: Mask, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    gray = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(gray, mode="L").save(path, format="PNG")
