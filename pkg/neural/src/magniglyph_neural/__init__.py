from .data import Pack, load_dataset, load_pack, stage_batch
from .pipeline import run_pipeline
from .stages import (STAGE_IDS, HourglassStage, StageSpec, build_stage,
                     coordconv_augment, default_specs, stage_param_count)
from .train import (TrainConfig, build_cascade, cascade_forward,
                    finetune_end_to_end, load_cascade, save_run, train_stage)

__version__ = "0.1.0"

__all__ = [
    "HourglassStage", "Pack", "STAGE_IDS", "StageSpec", "TrainConfig",
    "build_cascade", "build_stage", "cascade_forward", "coordconv_augment",
    "default_specs", "finetune_end_to_end", "load_cascade", "load_dataset",
    "load_pack", "run_pipeline", "save_run", "stage_batch",
    "stage_param_count", "train_stage",
]
