"""Structural similarity, global and per-region, plus report aggregation.

SSIM follows the standard definition: an 11x11 Gaussian window (sigma 1.5,
normalized to sum 1), K1 = 0.01, K2 = 0.03, L = 255, evaluated at valid
window centers only (no padding), on the luma plane.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .raster import Raster, Rect, to_luma


@dataclass(frozen=True)
class SsimConfig:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def window(self) -> np.ndarray:
        """Normalized 2-D Gaussian window (weights sum to 1)."""
        half = (self.window_size - 1) / 2.0
        x = np.arange(self.window_size, dtype=np.float64) - half
        g = np.exp(-(x ** 2) / (2.0 * self.sigma ** 2))
        win = np.outer(g, g)
        return win / win.sum()


def ssim_map(a: np.ndarray, b: np.ndarray,
             cfg: SsimConfig = SsimConfig()) -> np.ndarray:
    """SSIM value per valid window center for two luma planes."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("plane dimensions differ")
    n = cfg.window_size
    if a.shape[0] < n or a.shape[1] < n:
        raise ValueError(f"image smaller than the {n}x{n} window")
    win = cfg.window()

    def wmean(x):
        v = sliding_window_view(x, (n, n))
        return np.tensordot(v, win, axes=([2, 3], [0, 1]))

    mu_a = wmean(a)
    mu_b = wmean(b)
    e_aa = wmean(a * a)
    e_bb = wmean(b * b)
    e_ab = wmean(a * b)
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b

    c1, c2 = cfg.c1, cfg.c2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def mssim(a: Raster, b: Raster, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean SSIM over the luma planes of two rasters."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("raster dimensions differ")
    return float(ssim_map(to_luma(a), to_luma(b), cfg).mean())


def expand_region(region: Rect, image_size: tuple[int, int],
                  min_size: int = 11) -> Rect:
    """Clip ``region`` to the image, then grow it symmetrically to at
    least ``min_size`` per axis, shifting inward at the borders."""
    W, H = image_size
    clipped = region.clipped(W, H)
    if clipped is None:
        raise ValueError("region does not intersect the image")
    if W < min_size or H < min_size:
        raise ValueError(f"image smaller than the {min_size}x{min_size} window")

    def axis(lo, hi, limit):
        need = min_size - (hi - lo)
        if need > 0:
            lo -= need // 2
            hi += need - need // 2
        if lo < 0:
            hi -= lo
            lo = 0
        if hi > limit:
            lo -= hi - limit
            hi = limit
        return lo, hi

    x0, x1 = axis(clipped.x0, clipped.x1, W)
    y0, y1 = axis(clipped.y0, clipped.y1, H)
    return Rect(x0, y0, x1, y1)


def regional_ssim(a: Raster, b: Raster, region: Rect,
                  cfg: SsimConfig = SsimConfig()) -> float:
    """Mean SSIM over one (window-expanded) region crop."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("raster dimensions differ")
    r = expand_region(region, (a.width, a.height), cfg.window_size)
    ca = Raster(a.pixels[r.y0:r.y1, r.x0:r.x1])
    cb = Raster(b.pixels[r.y0:r.y1, r.x0:r.x1])
    return mssim(ca, cb, cfg)


@dataclass(frozen=True)
class RegionScore:
    char_index: int
    region: Rect
    ssim: float


@dataclass(frozen=True)
class EvalReport:
    per_image: tuple[tuple[str, tuple[RegionScore, ...]], ...]
    mean_per_image: tuple[float, ...]
    grand_mean: float  # pooled over all characters
    pooling: str = "pooled"

    def to_json(self) -> str:
        doc = {
            "pooling": self.pooling,
            "grand_mean": self.grand_mean,
            "mean_per_image": list(self.mean_per_image),
            "per_image": [
                {
                    "image_id": image_id,
                    "chars": [
                        {"char_index": s.char_index,
                         "region": s.region.as_list(),
                         "ssim": s.ssim}
                        for s in scores
                    ],
                }
                for image_id, scores in self.per_image
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image_id", "char_index", "x0", "y0", "x1", "y1", "ssim"])
        for image_id, scores in self.per_image:
            for s in scores:
                writer.writerow([image_id, s.char_index, *s.region.as_list(),
                                 f"{s.ssim:.9f}"])
        return buf.getvalue()


def evaluate(pairs, cfg: SsimConfig = SsimConfig(),
             pooling: str = "pooled") -> EvalReport:
    """Score prediction/ground-truth pairs over character regions.

    ``pairs`` is an iterable of (image_id, pred Raster, gt Raster,
    regions: list of Rect).  ``pooling`` selects the grand mean: ``pooled``
    averages all character scores together, ``per-image`` averages the
    per-image means.
    """
    if pooling not in ("pooled", "per-image"):
        raise ValueError(f"unknown pooling {pooling!r}")
    per_image = []
    image_means = []
    all_scores = []
    for image_id, pred, gt, regions in pairs:
        if (pred.width, pred.height) != (gt.width, gt.height):
            raise ValueError(f"image {image_id!r}: pred/gt dimensions differ")
        scores = []
        for i, region in enumerate(regions):
            s = regional_ssim(pred, gt, region, cfg)
            scores.append(RegionScore(char_index=i, region=region, ssim=s))
            all_scores.append(s)
        per_image.append((image_id, tuple(scores)))
        if scores:
            image_means.append(float(np.mean([s.ssim for s in scores])))
        else:
            image_means.append(math.nan)
    if pooling == "pooled":
        grand = float(np.mean(all_scores)) if all_scores else math.nan
    else:
        finite = [m for m in image_means if not math.isnan(m)]
        grand = float(np.mean(finite)) if finite else math.nan
    return EvalReport(per_image=tuple(per_image),
                      mean_per_image=tuple(image_means),
                      grand_mean=grand, pooling=pooling)
