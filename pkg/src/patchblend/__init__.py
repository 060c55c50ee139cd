"""patchblend: patch-based video deflickering and a latent sampling harness."""

__version__ = "0.1.0"

from .blend import (
    IdentityRemapProvider,
    RemapProvider,
    RemapTable,
    TableEntry,
    blend_all,
    blend_all_bruteforce,
    blend_window,
    build_table,
    query_depths,
    query_prefix,
)
from .frames import Frame, FrameSequence, PixelAccumulator, accumulate, finalize
from .imageio import load_frame, load_sequence, save_frame, save_sequence
from .latent import (
    AlphaSchedule,
    GenerationConfig,
    IdentityCodec,
    LatentState,
    TargetDenoiser,
    ddim_step,
    deflicker_step,
    estimate_clean,
    identity_deflicker,
    run_generation,
)
from .metrics import ConsistencyReport, pixel_mse
from .patchmatch import (
    BACKEND,
    Nnf,
    PatchConfig,
    brute_force_nnf,
    estimate_nnf,
    nnf_cost,
    remap,
)
from .smoothing import KeypointTrack, sg_coefficients, smooth_series, smooth_track

__all__ = [
    "__version__",
    "BACKEND",
    "AlphaSchedule",
    "ConsistencyReport",
    "Frame",
    "FrameSequence",
    "GenerationConfig",
    "IdentityCodec",
    "IdentityRemapProvider",
    "KeypointTrack",
    "LatentState",
    "Nnf",
    "PatchConfig",
    "PixelAccumulator",
    "RemapProvider",
    "RemapTable",
    "TableEntry",
    "TargetDenoiser",
    "accumulate",
    "blend_all",
    "blend_all_bruteforce",
    "blend_window",
    "brute_force_nnf",
    "build_table",
    "ddim_step",
    "deflicker_step",
    "estimate_clean",
    "estimate_nnf",
    "finalize",
    "identity_deflicker",
    "load_frame",
    "load_sequence",
    "nnf_cost",
    "pixel_mse",
    "query_depths",
    "query_prefix",
    "remap",
    "run_generation",
    "save_frame",
    "save_sequence",
    "sg_coefficients",
    "smooth_series",
    "smooth_track",
]
