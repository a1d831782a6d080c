"""Reading magniglyph dataset directories into training tensors.

This module only touches the on-disk interchange formats (manifest.json,
pack directories of PNGs); it does not import the primary toolkit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

IMAGE_KEYS = ("original", "erased", "component", "mag_component", "magnified")
MASK_KEYS = ("component_mask", "mag_mask")


def _load_image(path: Path) -> torch.Tensor:
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1)  # CHW in [0, 1]


def _load_mask(path: Path) -> torch.Tensor:
    arr = np.asarray(Image.open(path).convert("L"), dtype=np.float32)
    return torch.from_numpy((arr >= 128).astype(np.float32)).unsqueeze(0)


@dataclass(frozen=True)
class Pack:
    pack_id: str
    rate: float
    tensors: dict  # key -> CHW float tensor
    bboxes_magnified: tuple

    @property
    def size(self) -> tuple[int, int]:
        _, h, w = self.tensors["original"].shape
        return h, w


def load_pack(pack_dir: Path) -> Pack:
    pack_dir = Path(pack_dir)
    meta = json.loads((pack_dir / "meta.json").read_text(encoding="utf-8"))
    tensors = {k: _load_image(pack_dir / f"{k}.png") for k in IMAGE_KEYS}
    tensors.update({k: _load_mask(pack_dir / f"{k}.png") for k in MASK_KEYS})
    boxes = tuple(tuple(b) if b is not None else None
                  for b in meta["bboxes_magnified"])
    return Pack(pack_id=meta["image_id"] + f"_r{meta['rate']:g}",
                rate=float(meta["rate"]), tensors=tensors,
                bboxes_magnified=boxes)


def load_dataset(root: Path, split: str | None = None) -> list[Pack]:
    root = Path(root)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    packs = []
    for entry in manifest["packs"]:
        if split is not None and entry["split"] != split:
            continue
        packs.append(load_pack(root / entry["dir"]))
    if not packs:
        raise ValueError(f"no packs selected from {root}")
    return packs


# stage name -> (input keys, target keys), matching the pack file layout
STAGE_IO = {
    "erase": (("original",), ("erased",)),
    "extract": (("original", "erased"), ("component", "component_mask")),
    "magnify": (("component", "component_mask"), ("mag_component", "mag_mask")),
    "synthesize": (("erased", "mag_component", "mag_mask"), ("magnified",)),
}


def stage_batch(packs: list[Pack], stage: str, indices) -> tuple[list, list]:
    """Stack the given packs into input and target batches for one stage."""
    in_keys, out_keys = STAGE_IO[stage]
    chosen = [packs[i] for i in indices]
    inputs = [torch.stack([p.tensors[k] for p in chosen]) for k in in_keys]
    targets = [torch.stack([p.tensors[k] for p in chosen]) for k in out_keys]
    return inputs, targets
