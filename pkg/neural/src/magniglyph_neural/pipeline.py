"""Inference over a trained cascade, emitting PNGs in the toolkit layout.

The outputs (an ``<id>.png`` prediction plus the erased / component /
mask side outputs) use the same file names the primary toolkit's
``magnify --emit-intermediates`` writes, so they can be scored with its
``evaluate`` command unchanged.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .train import cascade_forward

INTERMEDIATE_FILES = ("erased.png", "component.png", "component_mask.png",
                      "magnified_mask.png")


def _to_uint8(t: torch.Tensor) -> np.ndarray:
    """Clamp a CHW [0,1] tensor to 8-bit HWC."""
    arr = t.detach().clamp(0.0, 1.0).permute(1, 2, 0).numpy()
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def run_pipeline(nets: dict, image: torch.Tensor, out_path: Path,
                 intermediates_dir: Path | None = None) -> Path:
    """Run the cascade on one CHW [0,1] image and write the outputs.

    Writes the magnified prediction to ``out_path`` and, optionally, the
    four side outputs to ``intermediates_dir``.
    """
    _, h, w = image.shape
    if h % 16 or w % 16:
        raise ValueError("image dimensions must be divisible by 16")
    for net in nets.values():
        net.eval()
    with torch.no_grad():
        magnified, erased, component, mask, _, mag_mask = cascade_forward(
            nets, image.unsqueeze(0))
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(_to_uint8(magnified[0])).save(out_path)
    if intermediates_dir is not None:
        d = Path(intermediates_dir)
        d.mkdir(parents=True, exist_ok=True)
        Image.fromarray(_to_uint8(erased[0])).save(d / "erased.png")
        Image.fromarray(_to_uint8(component[0])).save(d / "component.png")
        for name, m in (("component_mask.png", mask),
                        ("magnified_mask.png", mag_mask)):
            bits = (m[0, 0].detach().numpy() >= 0.5)
            Image.fromarray((bits * np.uint8(255))).save(d / name)
    return out_path
