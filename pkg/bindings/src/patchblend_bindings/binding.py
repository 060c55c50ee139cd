"""Array-in, array-out deflicker calls with structured error reporting."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

import patchblend
from patchblend.blend import RemapProvider, blend_all, blend_window
from patchblend.errors import ConfigError, PatchBlendError, ShapeMismatchError
from patchblend.frames import Frame, FrameSequence
from patchblend.patchmatch import PatchConfig

OK = 0
ERR_CONFIG = 2
ERR_SHAPE = 4
ERR_INTERNAL = 5

ERROR_CODES = {
    OK: "ok",
    ERR_CONFIG: "configuration error",
    ERR_SHAPE: "shape error",
    ERR_INTERNAL: "internal error",
}

_CONFIG_KEYS = {"mode", "window", "patch_size", "pm_iters", "seed"}
_DEFAULTS = {"mode": "window", "window": 7, "patch_size": 7, "pm_iters": 6,
             "seed": 0}


@dataclass(frozen=True)
class BindingResult:
    """Outcome of one boundary call.

    `code` is 0 on success with `frames` set; otherwise `frames` is None and
    `message` explains the failure.
    """

    code: int
    message: str
    frames: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.code == OK


def _parse_config(config_json: str | None) -> dict:
    opts = dict(_DEFAULTS)
    if config_json is None or config_json == "":
        return opts
    try:
        doc = json.loads(config_json)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config JSON must be an object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    opts.update(doc)
    return opts


def _as_sequence(array, what: str) -> FrameSequence:
    arr = np.asarray(array)
    if arr.ndim != 4 or arr.shape[3] != 3:
        raise ShapeMismatchError(
            f"{what} must have shape (frames, height, width, 3), "
            f"got {arr.shape}"
        )
    if arr.shape[0] < 1:
        raise ShapeMismatchError(f"{what} must contain at least one frame")
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatchError(f"{what} contains non-finite values")
    return FrameSequence([Frame(arr[i].copy()) for i in range(arr.shape[0])])


def bind_deflicker(synth, guides=None, config_json: str | None = None) -> BindingResult:
    """Deflicker a frame stack.

    `synth` (and `guides`, when given) are (n, h, w, 3) float arrays with
    intensities in [0, 1]; `guides=None` means self-guided.  `config_json`
    may set {mode, window, patch_size, pm_iters, seed}.  Returns a
    BindingResult; the output array is newly allocated, inputs are never
    modified.
    """
    try:
        opts = _parse_config(config_json)
        synth_seq = _as_sequence(synth, "synth")
        if guides is None:
            guide_seq = synth_seq
        else:
            guide_seq = _as_sequence(guides, "guides")
            if len(guide_seq) != len(synth_seq):
                raise ShapeMismatchError(
                    f"guides has {len(guide_seq)} frames, synth has "
                    f"{len(synth_seq)}"
                )
            if (guide_seq.height, guide_seq.width) != (
                synth_seq.height, synth_seq.width
            ):
                raise ShapeMismatchError("guide and synth frame sizes differ")

        mode = opts["mode"]
        window = opts["window"]
        if isinstance(window, str) and window.lower() == "full":
            mode = "full"
        if mode not in ("window", "full"):
            raise ConfigError(f"unknown mode {mode!r}")

        cfg = PatchConfig(
            patch_size=int(opts["patch_size"]),
            iterations=int(opts["pm_iters"]),
            rng_seed=int(opts["seed"]),
        )
        provider = RemapProvider(guide_seq, cfg)
        if mode == "full":
            out = blend_all(synth_seq, guide_seq, provider)
        else:
            window = int(window)
            if window < 1 or window % 2 == 0:
                raise ConfigError(f"window must be odd and >= 1, got {window}")
            out = blend_window(synth_seq, guide_seq, window // 2, provider)

        stacked = np.stack([out[i + 1].data for i in range(len(out))])
        return BindingResult(OK, "", stacked)
    except ConfigError as e:
        return BindingResult(ERR_CONFIG, str(e))
    except ShapeMismatchError as e:
        return BindingResult(ERR_SHAPE, str(e))
    except (TypeError, ValueError) as e:
        return BindingResult(ERR_CONFIG, str(e))
    except PatchBlendError as e:
        return BindingResult(ERR_INTERNAL, str(e))


def bind_version() -> str:
    """Version of the underlying library, as MAJOR.MINOR.PATCH."""
    return patchblend.__version__
