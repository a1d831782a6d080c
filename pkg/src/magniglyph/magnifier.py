"""Character magnification: scale, place, resolve overlaps, composite.

Strategies:

* ``component-center`` — scale each character about its own bbox center,
  composite character pixels only, earlier (upper-left) characters keep
  contested pixels.
* ``image-center`` — centers move away from the image center by the rate,
  so characters translate outward and may leave the image; same
  compositing as component-center.
* ``rect-lower-right`` — paste full rectangular crops (background
  included), later pastes overwriting earlier ones.  Reproduces the
  background-concealing artifact of rectangle pastes; kept for comparison.
* ``detection-paste`` — the no-erase baseline: magnify the bbox crop and
  paste it back centered on the original bbox, directly on the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .annotations import CharAnnotation, SceneAnnotation, extract_components, order_components
from .eraser import InpaintConfig, erase_text
from .raster import Mask, Raster, Rect, crop, dilate, round_half_up, scale_bilinear, scale_nearest

STRATEGIES = ("component-center", "rect-lower-right", "image-center",
              "detection-paste")
PRIORITIES = ("upper-left", "lower-right")


@dataclass(frozen=True)
class MagnifyConfig:
    rate: float = 1.2
    strategy: str = "component-center"
    inpaint: InpaintConfig = field(default_factory=InpaintConfig)

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be > 0")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; "
                             f"expected one of {STRATEGIES}")


@dataclass(frozen=True)
class CharPlacement:
    original_bbox: Rect
    magnified_bbox: Rect | None  # clipped to the image; None if fully outside
    visible_pixels: int


@dataclass(frozen=True)
class MagnifiedScene:
    image: Raster
    magnified_union_mask: Mask
    per_char: tuple[CharPlacement, ...]


def scaled_size(bbox: Rect, rate: float) -> tuple[int, int]:
    w = max(1, int(round_half_up(rate * bbox.width)))
    h = max(1, int(round_half_up(rate * bbox.height)))
    return w, h


def scale_component(ch: CharAnnotation, src: Raster,
                    rate: float) -> tuple[Raster, Mask, tuple[int, int]]:
    """Scale one character's pixels (non-character pixels zeroed) and mask."""
    if not rate > 0:
        raise ValueError("rate must be > 0")
    new_w, new_h = scaled_size(ch.bbox, rate)
    patch = crop(src, ch.bbox).pixels.copy()
    patch[~ch.mask.bits] = 0
    pixels = scale_bilinear(Raster(patch), new_w, new_h)
    mask = scale_nearest(ch.mask, new_w, new_h)
    return pixels, mask, (new_w, new_h)


def _rect_at(center: tuple[float, float], size: tuple[int, int]) -> Rect:
    # Integer top-left corner = floor(center - size/2); the bottom-right
    # follows from the size, keeping the center within 0.5 px per axis.
    cx, cy = center
    w, h = size
    x0 = math.floor(cx - w / 2.0)
    y0 = math.floor(cy - h / 2.0)
    return Rect(x0, y0, x0 + w, y0 + h)


def place_component_center(ch: CharAnnotation, new_size: tuple[int, int]) -> Rect:
    """Target rect preserving the original bbox center (may overhang)."""
    return _rect_at(ch.bbox.center, new_size)


def place_image_center(ch: CharAnnotation, new_size: tuple[int, int],
                       image_size: tuple[int, int], rate: float) -> Rect:
    """Target rect whose center moves away from the image center by rate."""
    if not rate > 0:
        raise ValueError("rate must be > 0")
    W, H = image_size
    cx, cy = ch.bbox.center
    tx = W / 2.0 + rate * (cx - W / 2.0)
    ty = H / 2.0 + rate * (cy - H / 2.0)
    return _rect_at((tx, ty), new_size)


def compose(erased: Raster, components, priority: str) -> tuple[Raster, Mask, list[int]]:
    """Composite placed components over the erased background.

    ``components`` is a sequence of (pixels, mask, target Rect) in reading
    order.  Under ``upper-left`` priority earlier components keep contested
    pixels; under ``lower-right`` later components overwrite.  Returns the
    composite, the union of written pixels, and per-component written-pixel
    counts.
    """
    if priority not in PRIORITIES:
        raise ValueError(f"unknown priority {priority!r}")
    out = erased.pixels.copy()
    claimed = np.zeros((erased.height, erased.width), dtype=np.bool_)
    union = np.zeros_like(claimed)
    visible = []
    for pixels, mask, target in components:
        if (pixels.width, pixels.height) != (mask.width, mask.height):
            raise ValueError("component pixel/mask dimension mismatch")
        clip = target.clipped(erased.width, erased.height)
        if clip is None:
            visible.append(0)
            continue
        sx0, sy0 = clip.x0 - target.x0, clip.y0 - target.y0
        m = mask.bits[sy0:sy0 + clip.height, sx0:sx0 + clip.width]
        if priority == "upper-left":
            m = m & ~claimed[clip.y0:clip.y1, clip.x0:clip.x1]
        out[clip.y0:clip.y1, clip.x0:clip.x1][m] = \
            pixels.pixels[sy0:sy0 + clip.height, sx0:sx0 + clip.width][m]
        claimed[clip.y0:clip.y1, clip.x0:clip.x1] |= m
        union[clip.y0:clip.y1, clip.x0:clip.x1] |= m
        visible.append(int(m.sum()))
    return Raster(out), Mask(union), visible


def _placed_components(image: Raster, ann: SceneAnnotation, cfg: MagnifyConfig):
    """Scale and place every character, in reading order."""
    order = order_components(ann)
    placed = []
    for idx in order:
        ch = ann.characters[idx]
        if cfg.strategy == "rect-lower-right":
            new_size = scaled_size(ch.bbox, cfg.rate)
            pixels = scale_bilinear(crop(image, ch.bbox), *new_size)
            mask = Mask.filled(new_size[0], new_size[1], True)
        else:
            pixels, mask, new_size = scale_component(ch, image, cfg.rate)
        if cfg.strategy == "image-center":
            target = place_image_center(ch, new_size,
                                        (image.width, image.height), cfg.rate)
        else:
            target = place_component_center(ch, new_size)
        placed.append((ch.bbox, pixels, mask, target))
    return placed


def magnify_scene(image: Raster, ann: SceneAnnotation,
                  cfg: MagnifyConfig) -> MagnifiedScene:
    """Run the full erase / extract / magnify / synthesize pipeline."""
    if (ann.image_size[0], ann.image_size[1]) != (image.width, image.height):
        raise ValueError(
            f"image {ann.image_id!r}: annotation size does not match image")
    if cfg.strategy == "detection-paste":
        return _detection_paste_scene(image, ann, cfg.rate)

    erased = erase_text(image, ann, cfg.inpaint)
    placed = _placed_components(image, ann, cfg)
    priority = "lower-right" if cfg.strategy == "rect-lower-right" else "upper-left"
    composite, union, visible = compose(
        erased, [(p, m, t) for _, p, m, t in placed], priority)

    # Pixels erased only because of mask dilation and not covered by any
    # magnified character revert to the original image: only character
    # pixels are erased permanently, so rate 1.0 is an exact identity.
    out = composite.pixels.copy()
    if ann.characters and cfg.inpaint.dilation_radius > 0:
        orig_union = ann.union_mask().bits
        grown = dilate(Mask(orig_union), cfg.inpaint.dilation_radius).bits
        ring = grown & ~orig_union & ~union.bits
        out[ring] = image.pixels[ring]

    per_char = tuple(
        CharPlacement(original_bbox=b,
                      magnified_bbox=t.clipped(image.width, image.height),
                      visible_pixels=v)
        for (b, _, _, t), v in zip(placed, visible))
    return MagnifiedScene(image=Raster(out), magnified_union_mask=union,
                          per_char=per_char)


def _detection_paste_scene(image: Raster, ann: SceneAnnotation,
                           rate: float) -> MagnifiedScene:
    placed = []
    for idx in order_components(ann):
        ch = ann.characters[idx]
        new_size = scaled_size(ch.bbox, rate)
        pixels = scale_bilinear(crop(image, ch.bbox), *new_size)
        mask = Mask.filled(new_size[0], new_size[1], True)
        placed.append((ch.bbox, pixels, mask,
                       place_component_center(ch, new_size)))
    composite, union, visible = compose(
        image, [(p, m, t) for _, p, m, t in placed], "lower-right")
    per_char = tuple(
        CharPlacement(original_bbox=b,
                      magnified_bbox=t.clipped(image.width, image.height),
                      visible_pixels=v)
        for (b, _, _, t), v in zip(placed, visible))
    return MagnifiedScene(image=composite, magnified_union_mask=union,
                          per_char=per_char)


def detection_paste_baseline(image: Raster, ann: SceneAnnotation,
                             rate: float) -> Raster:
    """Magnify each bbox crop and paste it back centered, without erasing."""
    if not rate > 0:
        raise ValueError("rate must be > 0")
    return _detection_paste_scene(image, ann, rate).image
