"""Scene-text magnification toolkit.

Enlarges characters about their original centers without disturbing the
background: deterministic erase / extract / magnify / synthesize pipeline,
training-data generation, and regional-SSIM evaluation.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .annotations import (AnnotationError, CharAnnotation, SceneAnnotation,
                          extract_components, load_annotations,
                          order_components, parse_annotations,
                          serialize_annotations)
from .eraser import InpaintConfig, erase_text, inpaint
from .magnifier import (MagnifiedScene, MagnifyConfig,
                        detection_paste_baseline, magnify_scene,
                        place_component_center, place_image_center,
                        scale_component, compose)
from .metrics import EvalReport, SsimConfig, evaluate, mssim, regional_ssim, ssim_map
from .datasetgen import (SamplePack, SynthSpec, generate_dataset,
                         generate_sample, synth_scene, validate_pack)
from .raster import (Mask, Raster, Rect, blit_masked, crop, load_mask,
                     load_raster, save_mask, save_raster, scale_bilinear,
                     scale_nearest, to_luma)

__version__ = "0.1.0"
