"""Training-data generation: sample packs plus a procedural scene generator.

A SamplePack bundles the four training products for one (image, rate)
pair: the erased scene, the character components and mask, their magnified
counterparts, and the final magnified scene.  The synthetic generator
renders glyphs from the built-in 5x7 font over a smooth background and
keeps the pre-text plate around as an oracle for eraser tests.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fonts
from .annotations import CharAnnotation, SceneAnnotation, extract_components, serialize_annotations, load_annotations
from .eraser import erase_text
from .magnifier import MagnifyConfig, _placed_components, compose, dilate
from .raster import Mask, Raster, Rect, load_mask, load_raster, round_half_up, save_mask, save_raster, scale_nearest

PACK_FILES = ("original.png", "erased.png", "component.png",
              "component_mask.png", "mag_component.png", "mag_mask.png",
              "magnified.png", "meta.json")


@dataclass(frozen=True)
class SamplePack:
    image_id: str
    rate: float
    original: Raster
    erased: Raster
    component_image: Raster
    component_mask: Mask
    magnified_component_image: Raster
    magnified_mask: Mask
    magnified_scene: Raster
    original_bboxes: tuple[Rect, ...]       # in reading order
    magnified_bboxes: tuple[Rect | None, ...]  # clipped; None if off-image
    dilation_radius: int
    background_plate: Raster | None = None  # synthetic scenes only
    annotation: SceneAnnotation | None = None


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    image_size: tuple[int, int] = (96, 64)  # (W, H)
    char_count: tuple[int, int] = (2, 4)
    glyph_height: tuple[int, int] = (12, 18)
    bg_range: tuple[int, int] = (120, 230)
    fg_range: tuple[int, int] = (0, 70)
    distractor_count: int = 0
    distractor_adjacent: bool = False  # place one object right next to text
    layout: str = "line"  # "line" or "grid"

    def __post_init__(self):
        if self.char_count[0] < 0 or self.char_count[0] > self.char_count[1]:
            raise ValueError("invalid char_count range")
        if self.layout not in ("line", "grid"):
            raise ValueError(f"unknown layout {self.layout!r}")
        w, h = self.image_size
        gw = int(round_half_up(fonts.GLYPH_WIDTH * self.glyph_height[1]
                               / fonts.GLYPH_HEIGHT))
        if self.glyph_height[1] > h - 2 or gw > w - 2:
            raise ValueError("glyph size range does not fit the image")


def _glyph_size(height: int) -> tuple[int, int]:
    w = max(1, int(round_half_up(fonts.GLYPH_WIDTH * height
                                 / fonts.GLYPH_HEIGHT)))
    return w, height


def _smooth_background(rng, width, height, lo, hi) -> Raster:
    from .raster import scale_bilinear

    coarse = rng.integers(lo, hi + 1, size=(4, 4, 3)).astype(np.uint8)
    return scale_bilinear(Raster(coarse), width, height)


def _draw_rect(pixels, rng, x0, y0, x1, y1, color):
    pixels[max(0, y0):y1, max(0, x0):x1] = color


def synth_scene(spec: SynthSpec) -> tuple[Raster, SceneAnnotation, Raster]:
    """Render a deterministic synthetic scene.

    Returns (image, annotation, background plate).  The plate contains the
    background and distractors but no glyphs; annotation masks are the
    exact rendered glyph pixels.
    """
    rng = np.random.default_rng(spec.seed)
    W, H = spec.image_size

    n_chars = int(rng.integers(spec.char_count[0], spec.char_count[1] + 1))
    labels = [fonts.ALPHABET[int(rng.integers(len(fonts.ALPHABET)))]
              for _ in range(n_chars)]
    heights = [int(rng.integers(spec.glyph_height[0], spec.glyph_height[1] + 1))
               for _ in range(n_chars)]
    sizes = [_glyph_size(h) for h in heights]

    # Layout before rendering so adjacency-aware distractors can be placed.
    margin = 2
    boxes: list[Rect] = []
    if n_chars:
        if spec.layout == "line":
            gaps = [int(rng.integers(2, 6)) for _ in range(n_chars)]
            total = sum(w for w, _ in sizes) + sum(gaps[1:])
            if total > W - 2 * margin:
                raise ValueError("layout overflow: glyphs do not fit the line")
            x = margin + int(rng.integers(0, W - 2 * margin - total + 1))
            cy = H // 2 + int(rng.integers(-2, 3))
            for i, (w, h) in enumerate(sizes):
                if i:
                    x += gaps[i]
                y0 = int(np.clip(cy - h // 2, margin, H - margin - h))
                boxes.append(Rect(x, y0, x + w, y0 + h))
                x += w
        else:  # grid
            max_w = max(w for w, _ in sizes)
            max_h = max(h for _, h in sizes)
            cols = max(1, (W - 2 * margin) // (max_w + 3))
            rows = -(-n_chars // cols)
            if margin + rows * (max_h + 3) > H:
                raise ValueError("layout overflow: grid does not fit")
            for i, (w, h) in enumerate(sizes):
                r, c = divmod(i, cols)
                x0 = margin + c * (max_w + 3)
                y0 = margin + r * (max_h + 3)
                boxes.append(Rect(x0, y0, x0 + w, y0 + h))

    plate_px = _smooth_background(rng, W, H, *spec.bg_range).pixels.copy()

    for _ in range(spec.distractor_count):
        color = rng.integers(spec.fg_range[0], spec.fg_range[1] + 1, size=3)
        dw = int(rng.integers(4, max(5, W // 6)))
        dh = int(rng.integers(4, max(5, H // 6)))
        x0 = int(rng.integers(0, W - dw))
        y0 = int(rng.integers(0, H - dh))
        _draw_rect(plate_px, rng, x0, y0, x0 + dw, y0 + dh, color)

    if spec.distractor_adjacent and boxes:
        # Object hugging the first character so a magnified rectangle
        # paste must run it over.
        b = boxes[0]
        color = rng.integers(spec.fg_range[0], spec.fg_range[1] + 1, size=3)
        x0 = min(b.x1 + 1, W - 2)
        x1 = min(x0 + 3, W)
        _draw_rect(plate_px, rng, x0, b.y0, x1, b.y1, color)

    plate = Raster(plate_px)
    image_px = plate_px.copy()
    chars = []
    for label, box in zip(labels, boxes):
        mask = scale_nearest(fonts.glyph_mask(label), box.width, box.height)
        color = rng.integers(spec.fg_range[0], spec.fg_range[1] + 1, size=3)
        region = image_px[box.y0:box.y1, box.x0:box.x1]
        region[mask.bits] = color
        chars.append(CharAnnotation(label=label, bbox=box, mask=mask))

    ann = SceneAnnotation(image_id=f"synth{spec.seed:06d}",
                          image_size=(W, H), characters=tuple(chars))
    return Raster(image_px), ann, plate


def generate_sample(image: Raster, ann: SceneAnnotation, rate: float,
                    cfg: MagnifyConfig | None = None,
                    background_plate: Raster | None = None) -> SamplePack:
    """Produce the training products for one (image, rate) pair.

    Uses component-center placement with upper-left priority; pixels
    erased only by mask dilation and left uncovered revert to the
    original, so rate 1.0 reproduces the input exactly.
    """
    if not rate > 0:
        raise ValueError("rate must be > 0")
    cfg = cfg or MagnifyConfig()
    cfg = replace(cfg, rate=rate, strategy="component-center")

    erased = erase_text(image, ann, cfg.inpaint)
    component_image, component_mask = extract_components(image, ann)

    placed = _placed_components(image, ann, cfg)
    comps = [(p, m, t) for _, p, m, t in placed]
    scene_raw, mag_mask, _ = compose(erased, comps, "upper-left")
    black = Raster.filled(image.width, image.height)
    mag_component, _, _ = compose(black, comps, "upper-left")

    scene_px = scene_raw.pixels.copy()
    if ann.characters and cfg.inpaint.dilation_radius > 0:
        grown = dilate(component_mask, cfg.inpaint.dilation_radius).bits
        ring = grown & ~component_mask.bits & ~mag_mask.bits
        scene_px[ring] = image.pixels[ring]

    return SamplePack(
        image_id=ann.image_id,
        rate=rate,
        original=Raster(image.pixels.copy()),
        erased=erased,
        component_image=component_image,
        component_mask=component_mask,
        magnified_component_image=mag_component,
        magnified_mask=mag_mask,
        magnified_scene=Raster(scene_px),
        original_bboxes=tuple(b for b, _, _, _ in placed),
        magnified_bboxes=tuple(
            t.clipped(image.width, image.height) for _, _, _, t in placed),
        dilation_radius=cfg.inpaint.dilation_radius,
        background_plate=background_plate,
        annotation=ann,
    )


def pack_id(image_id: str, rate: float) -> str:
    return f"{image_id}_r{rate:g}"


def write_pack(pack: SamplePack, out_dir) -> Path:
    """Write one pack directory; layout is fixed (see PACK_FILES)."""
    d = Path(out_dir) / pack_id(pack.image_id, pack.rate)
    d.mkdir(parents=True, exist_ok=True)
    save_raster(pack.original, d / "original.png")
    save_raster(pack.erased, d / "erased.png")
    save_raster(pack.component_image, d / "component.png")
    save_mask(pack.component_mask, d / "component_mask.png")
    save_raster(pack.magnified_component_image, d / "mag_component.png")
    save_mask(pack.magnified_mask, d / "mag_mask.png")
    save_raster(pack.magnified_scene, d / "magnified.png")
    meta = {
        "image_id": pack.image_id,
        "rate": pack.rate,
        "dilation_radius": pack.dilation_radius,
        "bboxes_original": [b.as_list() for b in pack.original_bboxes],
        "bboxes_magnified": [b.as_list() if b else None
                             for b in pack.magnified_bboxes],
    }
    (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                 encoding="utf-8")
    if pack.background_plate is not None:
        save_raster(pack.background_plate, d / "plate.png")
    if pack.annotation is not None:
        serialize_annotations([pack.annotation], d, doc_name="annotation.json",
                              mask_subdir="charmasks")
    return d


def read_pack(pack_dir) -> SamplePack:
    d = Path(pack_dir)
    meta = json.loads((d / "meta.json").read_text(encoding="utf-8"))
    plate = d / "plate.png"
    ann_doc = d / "annotation.json"
    ann = load_annotations(ann_doc)[0] if ann_doc.is_file() else None
    return SamplePack(
        image_id=meta["image_id"],
        rate=meta["rate"],
        original=load_raster(d / "original.png"),
        erased=load_raster(d / "erased.png"),
        component_image=load_raster(d / "component.png"),
        component_mask=load_mask(d / "component_mask.png"),
        magnified_component_image=load_raster(d / "mag_component.png"),
        magnified_mask=load_mask(d / "mag_mask.png"),
        magnified_scene=load_raster(d / "magnified.png"),
        original_bboxes=tuple(Rect(*b) for b in meta["bboxes_original"]),
        magnified_bboxes=tuple(Rect(*b) if b else None
                               for b in meta["bboxes_magnified"]),
        dilation_radius=meta["dilation_radius"],
        background_plate=load_raster(plate) if plate.is_file() else None,
        annotation=ann,
    )


def validate_pack(pack: SamplePack) -> None:
    """Check internal consistency; raises ValueError on any violation."""
    dims = {(r.width, r.height) for r in (
        pack.original, pack.erased, pack.component_image,
        pack.magnified_component_image, pack.magnified_scene)}
    dims.add((pack.component_mask.width, pack.component_mask.height))
    dims.add((pack.magnified_mask.width, pack.magnified_mask.height))
    if len(dims) != 1:
        raise ValueError(f"pack {pack.image_id!r}: inconsistent dimensions")

    # Recompute the composite: magnified components blitted over the
    # erased image, with the uncovered dilation ring reverted.
    out = pack.erased.pixels.copy()
    mm = pack.magnified_mask.bits
    out[mm] = pack.magnified_component_image.pixels[mm]
    if pack.dilation_radius > 0:
        grown = dilate(pack.component_mask, pack.dilation_radius).bits
        ring = grown & ~pack.component_mask.bits & ~mm
        out[ring] = pack.original.pixels[ring]
    if not np.array_equal(out, pack.magnified_scene.pixels):
        raise ValueError(
            f"pack {pack.image_id!r}: magnified scene fails the blit check")

    cm = pack.component_mask.bits
    comp = pack.component_image.pixels
    if comp[~cm].any():
        raise ValueError(
            f"pack {pack.image_id!r}: component image not black off-mask")
    if not np.array_equal(comp[cm], pack.original.pixels[cm]):
        raise ValueError(
            f"pack {pack.image_id!r}: component image differs from original")


def generate_dataset(corpus, rates, split_fraction: float, out_dir,
                     seed: int = 0, jobs: int = 1,
                     cfg: MagnifyConfig | None = None) -> dict:
    """Write one pack per (image, rate) and a manifest with a seeded split.

    ``corpus`` is a list of (Raster, SceneAnnotation) or
    (Raster, SceneAnnotation, plate Raster) tuples.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    if not 0.0 <= split_fraction <= 1.0:
        raise ValueError("split fraction must be in [0, 1]")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for item in corpus:
        image, ann = item[0], item[1]
        plate = item[2] if len(item) > 2 else None
        for rate in rates:
            entries.append((image, ann, rate, plate))

    def build(entry):
        image, ann, rate, plate = entry
        return generate_sample(image, ann, rate, cfg, background_plate=plate)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            packs = list(pool.map(build, entries))
    else:
        packs = [build(e) for e in entries]

    for pack in packs:
        write_pack(pack, out_dir)

    ids = [pack_id(p.image_id, p.rate) for p in packs]
    order = np.random.default_rng(seed).permutation(len(ids))
    n_train = int(round_half_up(split_fraction * len(ids)))
    split = {}
    for pos, idx in enumerate(order):
        split[ids[idx]] = "train" if pos < n_train else "test"

    manifest = {
        "seed": seed,
        "split_fraction": split_fraction,
        "packs": [{"id": pid, "dir": pid, "rate": p.rate, "split": split[pid]}
                  for pid, p in zip(ids, packs)],
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def load_manifest(dataset_dir) -> dict:
    return json.loads((Path(dataset_dir) / "manifest.json").read_text(encoding="utf-8"))
