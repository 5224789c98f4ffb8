"""Model-agnostic nighttime-dehazing pipeline harness.

Building blocks: PNG-backed image buffers, the 8-way flip/transpose
self-ensemble, weighted snapshot fusion, overlap-tiled inference,
embedding-similarity data curation, and the PSNR/SSIM (Y and RGB)
evaluation protocol with CSV/JSON reports.
"""

from .curation import (
    CurationConfig,
    Embedding,
    SimilarityRecord,
    load_embeddings,
    score_candidates,
    select,
    target_centroid,
)
from .errors import DehazekitError
from .fusion import FusionWeights, fuse
from .geometry import ALL_TRANSFORMS, DihedralTransform, apply_transform, inverse, self_ensemble
from .image import ImageBuffer, LumaPlane, crop_to_multiple, load_png, rgb_to_luma, save_png
from .manifest import PairManifest, build_manifest
from .metrics import MetricEntry, MetricReport, aggregate, evaluate_pair, psnr, ssim
from .pipeline import PipelineConfig, RunResult, load_pipeline_config, run_pipeline
from .restorers import RestorerSpec, as_function, restore
from .tiling import TileConfig, tiled_restore

__version__ = "0.1.0"

__all__ = [
    "ALL_TRANSFORMS",
    "CurationConfig",
    "DehazekitError",
    "DihedralTransform",
    "Embedding",
    "FusionWeights",
    "ImageBuffer",
    "LumaPlane",
    "MetricEntry",
    "MetricReport",
    "PairManifest",
    "PipelineConfig",
    "RestorerSpec",
    "RunResult",
    "SimilarityRecord",
    "TileConfig",
    "aggregate",
    "apply_transform",
    "as_function",
    "build_manifest",
    "crop_to_multiple",
    "evaluate_pair",
    "fuse",
    "inverse",
    "load_embeddings",
    "load_pipeline_config",
    "load_png",
    "psnr",
    "restore",
    "rgb_to_luma",
    "run_pipeline",
    "save_png",
    "score_candidates",
    "select",
    "self_ensemble",
    "ssim",
    "target_centroid",
    "tiled_restore",
]
