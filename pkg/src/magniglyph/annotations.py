"""Per-character pixel-level annotations: parsing, validation, extraction.

Annotation documents are UTF-8 JSON: a top-level list of objects with keys
``image_id`` (string), ``image`` (relative PNG path), ``size`` ([w, h]) and
``chars`` (list of {``label``: string or null, ``bbox``: [x0, y0, x1, y1],
``mask``: relative PNG path}).  Mask paths are resolved relative to the
document's directory.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .raster import Mask, Raster, Rect, load_mask, save_mask


class AnnotationError(ValueError):
    """Schema or invariant violation, tagged with image id / char index."""


@dataclass(frozen=True)
class CharAnnotation:
    label: str | None
    bbox: Rect
    mask: Mask  # cropped to bbox dimensions

    def __post_init__(self):
        if (self.mask.width, self.mask.height) != (self.bbox.width, self.bbox.height):
            raise AnnotationError(
                f"mask {self.mask.width}x{self.mask.height} does not match "
                f"bbox {self.bbox.width}x{self.bbox.height}")
        if self.mask.popcount() == 0:
            raise AnnotationError("character mask has no true pixels")


@dataclass(frozen=True)
class SceneAnnotation:
    image_id: str
    image_size: tuple[int, int]  # (width, height)
    characters: tuple[CharAnnotation, ...] = field(default_factory=tuple)
    image_path: str | None = None  # relative path from the document dir

    def __post_init__(self):
        w, h = self.image_size
        for i, ch in enumerate(self.characters):
            if not Rect(0, 0, w, h).contains(ch.bbox):
                raise AnnotationError(
                    f"image {self.image_id!r} char {i}: bbox "
                    f"{ch.bbox.as_list()} outside image size {w}x{h}")

    def union_mask(self) -> Mask:
        w, h = self.image_size
        bits = np.zeros((h, w), dtype=np.bool_)
        for ch in self.characters:
            b = ch.bbox
            bits[b.y0:b.y1, b.x0:b.x1] |= ch.mask.bits
        return Mask(bits)


def _require(cond, image_id, index, msg):
    if not cond:
        where = f"image {image_id!r}"
        if index is not None:
            where += f" char {index}"
        raise AnnotationError(f"{where}: {msg}")


def parse_annotations(document, base_dir) -> list[SceneAnnotation]:
    """Parse and validate an annotation document (JSON text or parsed list).

    ``base_dir`` anchors the relative mask paths.
    """
    if isinstance(document, (str, bytes)):
        try:
            records = json.loads(document)
        except json.JSONDecodeError as e:
            raise AnnotationError(f"invalid JSON: {e}") from e
    else:
        records = document
    if not isinstance(records, list):
        raise AnnotationError("top level must be a list of image records")
    base = Path(base_dir)

    scenes = []
    for rec in records:
        _require(isinstance(rec, dict), rec, None, "record must be an object")
        image_id = rec.get("image_id")
        _require(isinstance(image_id, str), image_id, None, "missing image_id")
        size = rec.get("size")
        _require(isinstance(size, (list, tuple)) and len(size) == 2,
                 image_id, None, "size must be [width, height]")
        w, h = int(size[0]), int(size[1])
        _require(w >= 1 and h >= 1, image_id, None, "size must be positive")
        chars_raw = rec.get("chars")
        _require(isinstance(chars_raw, list), image_id, None,
                 "chars must be a list")

        chars = []
        for i, c in enumerate(chars_raw):
            _require(isinstance(c, dict), image_id, i, "char must be an object")
            label = c.get("label")
            _require(label is None or isinstance(label, str), image_id, i,
                     "label must be a string or null")
            bbox_raw = c.get("bbox")
            _require(isinstance(bbox_raw, (list, tuple)) and len(bbox_raw) == 4,
                     image_id, i, "bbox must be [x0, y0, x1, y1]")
            x0, y0, x1, y1 = (int(v) for v in bbox_raw)
            _require(x0 < x1 and y0 < y1, image_id, i, "degenerate bbox")
            _require(x0 >= 0 and y0 >= 0 and x1 <= w and y1 <= h, image_id, i,
                     f"bbox [{x0}, {y0}, {x1}, {y1}] outside image {w}x{h}")
            mask_rel = c.get("mask")
            _require(isinstance(mask_rel, str), image_id, i,
                     "mask must be a relative path")
            mask_path = base / mask_rel
            _require(mask_path.is_file(), image_id, i,
                     f"mask file not found: {mask_path}")
            mask = load_mask(mask_path)
            bbox = Rect(x0, y0, x1, y1)
            _require((mask.width, mask.height) == (bbox.width, bbox.height),
                     image_id, i, "mask dimensions do not match bbox")
            _require(mask.popcount() >= 1, image_id, i, "empty character mask")
            chars.append(CharAnnotation(label=label, bbox=bbox, mask=mask))

        scenes.append(SceneAnnotation(
            image_id=image_id, image_size=(w, h), characters=tuple(chars),
            image_path=rec.get("image")))
    return scenes


def load_annotations(path) -> list[SceneAnnotation]:
    path = Path(path)
    return parse_annotations(path.read_text(encoding="utf-8"), path.parent)


def serialize_annotations(scenes, out_dir, doc_name="annotations.json",
                          mask_subdir="masks") -> Path:
    """Write scenes as a document + mask PNGs; inverse of parse."""
    out_dir = Path(out_dir)
    (out_dir / mask_subdir).mkdir(parents=True, exist_ok=True)
    records = []
    for scene in scenes:
        chars = []
        for i, ch in enumerate(scene.characters):
            rel = f"{mask_subdir}/{scene.image_id}_{i}.png"
            save_mask(ch.mask, out_dir / rel)
            chars.append({"label": ch.label, "bbox": ch.bbox.as_list(),
                          "mask": rel})
        records.append({
            "image_id": scene.image_id,
            "image": scene.image_path or f"{scene.image_id}.png",
            "size": [scene.image_size[0], scene.image_size[1]],
            "chars": chars,
        })
    doc_path = out_dir / doc_name
    doc_path.write_text(json.dumps(records, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    return doc_path


def extract_components(image: Raster, ann: SceneAnnotation) -> tuple[Raster, Mask]:
    """Character pixels keep their original colors, everything else black."""
    if (ann.image_size[0], ann.image_size[1]) != (image.width, image.height):
        raise AnnotationError(
            f"image {ann.image_id!r}: annotation size {ann.image_size} does "
            f"not match image {image.width}x{image.height}")
    union = ann.union_mask()
    out = np.zeros_like(image.pixels)
    out[union.bits] = image.pixels[union.bits]
    return Raster(out), union


def order_components(ann: SceneAnnotation) -> list[int]:
    """Reading order: line band, then left edge, then top edge.

    The line band is the bbox vertical center quantized by the median
    character height, which reproduces left-priority within a line and
    top-priority across lines (horizontal layouts only).
    """
    n = len(ann.characters)
    if n == 0:
        return []
    med_h = statistics.median(ch.bbox.height for ch in ann.characters)

    def key(i):
        b = ann.characters[i].bbox
        band = int((b.y0 + b.y1) / 2.0 // med_h)
        return (band, b.x0, b.y0, b.x1, b.y1)

    return sorted(range(n), key=key)
