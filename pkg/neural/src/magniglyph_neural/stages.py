"""Hourglass encoder-decoder stages of the magnification cascade.

Each stage maps H x W inputs to H x W outputs through a 4-layer strided
encoder and a 4-layer transposed-convolution decoder (kernel 4, stride 2,
so H and W must be divisible by 16).  Stages with several input images run
one encoder per branch and concatenate the bottleneck features; stages
with several outputs share the decoder trunk and split into per-head
final deconvolutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

STAGE_IDS = ("erase", "extract", "magnify", "synthesize")

# branch input channels and head output channels per stage
_BRANCHES = {
    "erase": (3,),               # original
    "extract": (3, 3),           # original, erased
    "magnify": (3, 1),           # component, mask
    "synthesize": (3, 3, 1),     # erased, magnified component, magnified mask
}
_HEADS = {
    "erase": (3,),
    "extract": (3, 1),
    "magnify": (3, 1),
    "synthesize": (3,),
}


@dataclass(frozen=True)
class StageSpec:
    stage: str
    channels: tuple[int, ...] = (32, 64, 128, 256)
    kernel: int = 4
    stride: int = 2
    coordconv: bool = False

    def __post_init__(self):
        if self.stage not in STAGE_IDS:
            raise ValueError(f"unknown stage {self.stage!r}")
        if len(self.channels) != 4 or any(c < 1 for c in self.channels):
            raise ValueError("channels must be 4 positive widths")
        if self.coordconv and self.stage != "magnify":
            raise ValueError("coordconv is only used by the magnify stage")

    @property
    def branch_channels(self) -> tuple[int, ...]:
        return _BRANCHES[self.stage]

    @property
    def head_channels(self) -> tuple[int, ...]:
        return _HEADS[self.stage]

    @property
    def final_activation(self) -> str:
        return "linear" if self.stage == "synthesize" else "sigmoid"


def default_specs() -> dict[str, StageSpec]:
    return {
        "erase": StageSpec("erase"),
        "extract": StageSpec("extract"),
        "magnify": StageSpec("magnify", coordconv=True),
        "synthesize": StageSpec("synthesize"),
    }


def coordconv_augment(x: torch.Tensor) -> torch.Tensor:
    """Append x/y coordinate channels normalized to [-1, 1].

    The channels depend only on the spatial size, never on the content;
    a 1-pixel axis maps to coordinate 0.
    """
    n, _, h, w = x.shape
    ys = torch.linspace(-1.0, 1.0, h, dtype=x.dtype) if h > 1 else torch.zeros(1, dtype=x.dtype)
    xs = torch.linspace(-1.0, 1.0, w, dtype=x.dtype) if w > 1 else torch.zeros(1, dtype=x.dtype)
    yc = ys.view(1, 1, h, 1).expand(n, 1, h, w)
    xc = xs.view(1, 1, 1, w).expand(n, 1, h, w)
    return torch.cat([x, xc.to(x.device), yc.to(x.device)], dim=1)


def _enc_block(cin, cout, k, s):
    return nn.Sequential(
        nn.Conv2d(cin, cout, k, s, padding=(k - s) // 2),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


def _dec_block(cin, cout, k, s):
    return nn.Sequential(
        nn.ConvTranspose2d(cin, cout, k, s, padding=(k - s) // 2),
        nn.BatchNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class HourglassStage(nn.Module):
    """One pipeline stage: per-branch encoders, shared trunk, per-head deconvs."""

    def __init__(self, spec: StageSpec):
        super().__init__()
        self.spec = spec
        c1, c2, c3, c4 = spec.channels
        k, s = spec.kernel, spec.stride
        extra = 2 if spec.coordconv else 0
        self.encoders = nn.ModuleList()
        for cin in spec.branch_channels:
            self.encoders.append(nn.Sequential(
                _enc_block(cin + extra, c1, k, s),
                _enc_block(c1, c2, k, s),
                _enc_block(c2, c3, k, s),
                _enc_block(c3, c4, k, s),
            ))
        bottleneck = c4 * len(spec.branch_channels)
        self.trunk = nn.Sequential(
            _dec_block(bottleneck, c3, k, s),
            _dec_block(c3, c2, k, s),
            _dec_block(c2, c1, k, s),
        )
        self.heads = nn.ModuleList(
            nn.ConvTranspose2d(c1, cout, k, s, padding=(k - s) // 2)
            for cout in spec.head_channels)

    def forward(self, *branches: torch.Tensor) -> tuple[torch.Tensor, ...]:
        if len(branches) != len(self.encoders):
            raise ValueError(
                f"{self.spec.stage} stage expects {len(self.encoders)} "
                f"inputs, got {len(branches)}")
        feats = []
        for x, enc in zip(branches, self.encoders):
            h, w = x.shape[-2:]
            if h % 16 or w % 16:
                raise ValueError("spatial size must be divisible by 16")
            if self.spec.coordconv:
                x = coordconv_augment(x)
            feats.append(enc(x))
        shared = self.trunk(torch.cat(feats, dim=1))
        outs = []
        for head in self.heads:
            y = head(shared)
            if self.spec.final_activation == "sigmoid":
                y = torch.sigmoid(y)
            outs.append(y)
        return tuple(outs)


def build_stage(spec: StageSpec) -> HourglassStage:
    return HourglassStage(spec)


def stage_param_count(spec: StageSpec) -> int:
    """Closed-form parameter count from the layer table.

    conv / deconv: k*k*cin*cout + cout (bias); batchnorm: 2*cout.
    """
    c1, c2, c3, c4 = spec.channels
    k = spec.kernel
    extra = 2 if spec.coordconv else 0

    def conv(cin, cout):
        return k * k * cin * cout + cout

    def block(cin, cout):
        return conv(cin, cout) + 2 * cout

    total = 0
    for cin in spec.branch_channels:
        total += (block(cin + extra, c1) + block(c1, c2)
                  + block(c2, c3) + block(c3, c4))
    bottleneck = c4 * len(spec.branch_channels)
    total += block(bottleneck, c3) + block(c3, c2) + block(c2, c1)
    total += sum(conv(c1, cout) for cout in spec.head_channels)
    return total
