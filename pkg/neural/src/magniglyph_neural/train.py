"""Per-stage training and end-to-end fine-tuning of the cascade."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import Pack, stage_batch
from .stages import STAGE_IDS, HourglassStage, build_stage, default_specs


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 1000
    finetune_iterations: int = 300
    batch_size: int = 8
    learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if (self.iterations < 0 or self.finetune_iterations < 0
                or self.batch_size < 1 or not self.learning_rate > 0):
            raise ValueError("invalid training configuration")


def _mse_multi(outputs, targets) -> torch.Tensor:
    loss = outputs[0].new_zeros(())
    for out, tgt in zip(outputs, targets):
        loss = loss + nn.functional.mse_loss(out, tgt)
    return loss


def train_stage(net: HourglassStage, packs: list[Pack],
                cfg: TrainConfig) -> tuple[HourglassStage, list[float]]:
    """Train one stage with MSE against its pack targets.

    Returns the (in-place trained) network and the per-iteration loss curve.
    Zero iterations leaves the parameters untouched.
    """
    stage = net.spec.stage
    rng = np.random.default_rng(cfg.seed)
    torch.manual_seed(cfg.seed)
    opt = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)
    curve = []
    net.train()
    for _ in range(cfg.iterations):
        idx = rng.integers(0, len(packs), size=min(cfg.batch_size, len(packs)))
        inputs, targets = stage_batch(packs, stage, idx)
        opt.zero_grad()
        loss = _mse_multi(net(*inputs), targets)
        loss.backward()
        opt.step()
        curve.append(float(loss.detach()))
    return net, curve


def cascade_forward(nets: dict, original: torch.Tensor):
    """Run the wired cascade: erase feeds both extract and synthesize."""
    erased, = nets["erase"](original)
    component, mask = nets["extract"](original, erased)
    mag_component, mag_mask = nets["magnify"](component, mask)
    magnified, = nets["synthesize"](erased, mag_component, mag_mask)
    return magnified, erased, component, mask, mag_component, mag_mask


def finetune_end_to_end(nets: dict, packs: list[Pack],
                        cfg: TrainConfig) -> tuple[dict, list[float]]:
    """Fine-tune all four stages jointly on the final-scene MSE."""
    missing = [s for s in STAGE_IDS if s not in nets]
    if missing:
        raise ValueError(f"missing stages: {missing}")
    rng = np.random.default_rng(cfg.seed)
    torch.manual_seed(cfg.seed)
    params = [p for s in STAGE_IDS for p in nets[s].parameters()]
    opt = torch.optim.Adam(params, lr=cfg.learning_rate)
    curve = []
    for net in nets.values():
        net.train()
    for _ in range(cfg.finetune_iterations):
        idx = rng.integers(0, len(packs), size=min(cfg.batch_size, len(packs)))
        original = torch.stack([packs[i].tensors["original"] for i in idx])
        target = torch.stack([packs[i].tensors["magnified"] for i in idx])
        opt.zero_grad()
        magnified = cascade_forward(nets, original)[0]
        loss = nn.functional.mse_loss(magnified, target)
        loss.backward()
        opt.step()
        curve.append(float(loss.detach()))
    return nets, curve


def build_cascade(seed: int = 0) -> dict:
    torch.manual_seed(seed)
    return {name: build_stage(spec) for name, spec in default_specs().items()}


def save_run(out_dir: Path, cfg: TrainConfig, stage_curves: dict,
             finetune_curve: list[float], nets: dict | None = None) -> Path:
    """Write checkpoints plus run.json with the config and loss curves."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "config": asdict(cfg),
        "stage_loss_curves": stage_curves,
        "finetune_loss_curve": finetune_curve,
    }
    path = out_dir / "run.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    if nets is not None:
        torch.save({name: net.state_dict() for name, net in nets.items()},
                   out_dir / "cascade.pt")
    return path


def load_cascade(path: Path) -> dict:
    nets = build_cascade()
    states = torch.load(path, map_location="cpu")
    for name, net in nets.items():
        net.load_state_dict(states[name])
        net.eval()
    return nets
