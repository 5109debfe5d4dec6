"""tryonkit: clothing-agnostic virtual try-on preprocessing and evaluation.

The pipeline runs in two stages: skin restoration first (remove the
existing garment silhouette, inpaint plausible skin, match the person's
tone), then masked try-on synthesis on the restored image. All heavy
generative models sit behind pluggable backends with deterministic stubs,
and a metrics suite (FID, SSIM, LPIPS, normal output rate) plus a dataset
harness evaluate the results.
"""

from .backends import (
    BackendError,
    BackendSet,
    BackendUnavailable,
    ContractViolation,
    InpaintBackend,
    ParserBackend,
    PoseBackend,
    StubParser,
    StubPose,
    StubSkinInpainter,
    StubTryOn,
    TryOnBackend,
    build_backends,
)
from .color import hsv_to_rgb, rgb_to_hsv, rgb_to_ycrcb, ycrcb_to_rgb
from .config import PipelineConfig, default_config, load_config
from .generate_skin import GenerateSkinConfig, GenerateSkinResult, generate_skin
from .harness import (
    DatasetIndex,
    DatasetItem,
    EmptyDataset,
    EmptyInput,
    MissingFile,
    RunRecord,
    build_index,
    compare_configs,
    derangement,
    emit_grid,
    run_eval,
)
from .masking import (
    DegeneratePoseWarning,
    MaskSpec,
    MissingRegionWarning,
    build_agnostic_mask,
    build_skin_inpaint_mask,
    mask_spec_for,
    overlay_mask,
)
from .skin_tone import (
    EmptySkinRegionWarning,
    SkinToneEstimate,
    UnreliableToneWarning,
    blend_to_tone,
    detect_skin,
    estimate_tone,
)
from .tryon import EnsembleConfig, TryOnResult, tryon, tryon_direct
from .types import (
    BinaryMask,
    GarmentCategory,
    ParseMap,
    PoseSkeleton,
    RasterImage,
    SleeveClass,
    dilate,
)

__version__ = "0.1.0"
