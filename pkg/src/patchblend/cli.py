"""Batch command-line entry point.

Subcommands: deflicker, nnf, blend-compare, latent-demo, smooth, metrics.
Options may come from a JSON config file (--config); explicit flags win.
Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 shape mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .blend import (
    RemapProvider,
    blend_all,
    blend_all_bruteforce,
    blend_all_pairs,
    blend_window,
    window_pairs,
)
from .errors import (
    ConfigError,
    FormatError,
    PatchBlendError,
    SequenceGapError,
    ShapeMismatchError,
)
from .imageio import load_frame, load_sequence, save_sequence
from .latent import (
    AlphaSchedule,
    GenerationConfig,
    IdentityCodec,
    flickering_denoisers,
    run_generation,
)
from .metrics import pixel_mse
from .patchmatch import PatchConfig, estimate_nnf, nnf_cost
from .smoothing import read_tracks_csv, smooth_track, write_tracks_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SHAPE = 4


def _add_patch_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--patch-size", type=int, default=None)
    p.add_argument("--pm-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON file with default option values")
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patchblend")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deflicker", help="remap-and-blend a frame sequence")
    p.add_argument("--input", required=True)
    p.add_argument("--guide", default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=["window", "full"], default=None)
    p.add_argument("--window", default=None, help="odd window size, or 'full'")
    p.add_argument("--format", choices=["ppm", "png"], default=None)
    _add_patch_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("nnf", help="dump the correspondence field of two frames")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--output", default=None, help="dump file (default: stdout)")
    _add_patch_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("blend-compare", help="fast full blend vs exhaustive oracle")
    p.add_argument("--input", required=True)
    p.add_argument("--guide", default=None)
    p.add_argument("--tolerance", type=float, default=None)
    _add_patch_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("latent-demo", help="toy sampler run with deflicker on/off")
    p.add_argument("--output", required=True)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--size", default=None, help="frame size as WxH")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--freq", type=int, default=None)
    _add_patch_flags(p)
    _add_common_flags(p)

    p = sub.add_parser("smooth", help="smooth a keypoint coordinate CSV")
    p.add_argument("input_csv")
    p.add_argument("output_csv")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--conf-threshold", type=float, default=None)
    _add_common_flags(p)

    p = sub.add_parser("metrics", help="adjacent-frame consistency report")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None, help="report file (default: stdout)")
    _add_common_flags(p)

    return parser


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge option values: flag > config file > built-in default."""
    file_values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except OSError as e:
            raise FormatError(f"cannot read config {args.config}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad JSON in config {args.config}: {e}") from None
        for key in file_values:
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r} in {args.config}")
    out = {}
    for key, builtin in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_values:
            out[key] = file_values[key]
        else:
            out[key] = builtin
    return out


def _patch_config(opts: dict) -> PatchConfig:
    return PatchConfig(
        patch_size=int(opts["patch_size"]),
        iterations=int(opts["pm_iters"]),
        rng_seed=int(opts["seed"]),
    )


def _load_pair(input_dir: str, guide_dir: str | None):
    synth = load_sequence(input_dir)
    if guide_dir is None or guide_dir == input_dir:
        return synth, synth
    guides = load_sequence(guide_dir)
    if len(guides) != len(synth):
        raise ShapeMismatchError(
            f"guide sequence has {len(guides)} frames, input has {len(synth)}"
        )
    return synth, guides


def cmd_deflicker(args) -> int:
    opts = _resolve(args, {
        "input": None, "guide": None, "output": None, "mode": "window",
        "window": 7, "format": "ppm", "patch_size": 7, "pm_iters": 6,
        "seed": 0, "threads": 1,
    })
    synth, guides = _load_pair(opts["input"], opts["guide"])
    n = len(synth)

    mode = opts["mode"]
    window = opts["window"]
    if isinstance(window, str) and window.lower() == "full":
        mode = "full"
    elif mode == "window":
        window = int(window)
        if window < 1 or window % 2 == 0:
            raise ConfigError(f"window size must be odd and >= 1, got {window}")

    provider = RemapProvider(guides, _patch_config(opts))
    threads = int(opts["threads"])
    if mode == "full":
        provider.warm(blend_all_pairs(n), threads)
        out = blend_all(synth, guides, provider)
    else:
        radius = int(window) // 2
        provider.warm(window_pairs(n, radius), threads)
        out = blend_window(synth, guides, radius, provider)

    pattern = f"frame_%05d.{opts['format']}"
    save_sequence(out, opts["output"], pattern, opts["format"])
    echo = {k: v for k, v in opts.items()}
    with open(os.path.join(opts["output"], "run_config.json"), "w") as fh:
        json.dump(echo, fh, sort_keys=True, indent=2)
        fh.write("\n")

    if n >= 2:
        before = pixel_mse(synth).mean
        after = pixel_mse(out).mean
        print(f"pixel_mse_before {before!r}")
        print(f"pixel_mse_after {after!r}")
    else:
        print("pixel_mse_before n/a")
        print("pixel_mse_after n/a")
    return EXIT_OK


def cmd_nnf(args) -> int:
    opts = _resolve(args, {
        "output": None, "patch_size": 7, "pm_iters": 6, "seed": 0, "threads": 1,
    })
    src = load_frame(args.source)
    tgt = load_frame(args.target)
    nnf = estimate_nnf(src, tgt, _patch_config(opts))
    dump = nnf.dump()
    if opts["output"]:
        with open(opts["output"], "w") as fh:
            fh.write(dump)
    else:
        sys.stdout.write(dump)
    print(f"total_cost {nnf.total_cost()!r}")
    return EXIT_OK


def cmd_blend_compare(args) -> int:
    opts = _resolve(args, {
        "input": None, "guide": None, "tolerance": 0.02, "patch_size": 7,
        "pm_iters": 6, "seed": 0, "threads": 1,
    })
    synth, guides = _load_pair(opts["input"], opts["guide"])
    n = len(synth)
    cfg = _patch_config(opts)

    fast_provider = RemapProvider(guides, cfg)
    fast_provider.warm(blend_all_pairs(n), int(opts["threads"]))
    fast = blend_all(synth, guides, fast_provider)

    brute_provider = RemapProvider(guides, cfg, cache_size=max(1024, n * n))
    brute = blend_all_bruteforce(synth, guides, brute_provider)

    diffs = np.stack([
        np.abs(fast[i].data - brute[i].data) for i in range(1, n + 1)
    ])
    mean_diff = float(diffs.mean())
    max_diff = float(diffs.max())
    print(f"mean_abs_diff {mean_diff!r}")
    print(f"max_abs_diff {max_diff!r}")
    print(f"fast_remaps {fast_provider.remap_count}")
    print(f"fast_nnf_estimations {fast_provider.nnf_estimations}")
    print(f"brute_nnf_estimations {brute_provider.nnf_estimations}")
    return EXIT_OK if mean_diff <= float(opts["tolerance"]) else 1


def _toy_flicker_run(frames, height, width, steps, freq, seed, cfg, deflicker_on):
    """Shared sampler setup for the latent demo; returns the result object."""
    schedule = AlphaSchedule.linear(steps, scale=10.0)
    codec = IdentityCodec(height, width)
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.25, 0.75, size=(4, 4, 3))
    base_img = np.repeat(np.repeat(base, height // 4 + 1, 0), width // 4 + 1, 1)
    base_lat = np.clip(base_img[:height, :width], 0.0, 1.0).reshape(-1)
    denoisers = flickering_denoisers(schedule, base_lat, 0.05, frames, seed)

    if deflicker_on:
        def f(seq, guides=None):
            provider = RemapProvider(seq if guides is None else guides, cfg)
            return blend_all(seq, seq if guides is None else guides, provider)
    else:
        def f(seq, guides=None):
            return seq

    gen = GenerationConfig(
        frames=frames, latent_dim=codec.latent_dim, steps=steps,
        deflicker_frequency=freq, seed=seed,
    )
    return run_generation(gen, schedule, denoisers, codec, f)


def cmd_latent_demo(args) -> int:
    opts = _resolve(args, {
        "output": None, "frames": 8, "size": "16x16", "steps": 20, "freq": 5,
        "patch_size": 5, "pm_iters": 4, "seed": 0, "threads": 1,
    })
    try:
        w, h = (int(v) for v in str(opts["size"]).lower().split("x"))
    except ValueError:
        raise ConfigError(f"bad --size {opts['size']!r}, expected WxH") from None
    frames, steps, freq = int(opts["frames"]), int(opts["steps"]), int(opts["freq"])
    seed = int(opts["seed"])
    cfg = _patch_config(opts)

    on = _toy_flicker_run(frames, h, w, steps, freq, seed, cfg, deflicker_on=True)
    off = _toy_flicker_run(frames, h, w, steps, freq, seed, cfg, deflicker_on=False)

    os.makedirs(opts["output"], exist_ok=True)
    save_sequence(on.frames, os.path.join(opts["output"], "deflicker_on"))
    save_sequence(off.frames, os.path.join(opts["output"], "deflicker_off"))
    report = {
        "deflicker_steps": on.deflicker_steps,
        "pixel_mse_on": pixel_mse(on.frames).mean if frames >= 2 else None,
        "pixel_mse_off": pixel_mse(off.frames).mean if frames >= 2 else None,
    }
    path = os.path.join(opts["output"], "report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_smooth(args) -> int:
    opts = _resolve(args, {
        "window": 9, "order": 2, "conf_threshold": 0.1, "threads": 1,
    })
    tracks = read_tracks_csv(args.input_csv)
    smoothed = [
        smooth_track(t, int(opts["window"]), int(opts["order"]),
                     float(opts["conf_threshold"]))
        for t in tracks
    ]
    write_tracks_csv(smoothed, args.output_csv)
    return EXIT_OK


def cmd_metrics(args) -> int:
    opts = _resolve(args, {"input": None, "output": None, "threads": 1})
    seq = load_sequence(opts["input"])
    report = json.dumps(pixel_mse(seq).to_dict(), sort_keys=True, indent=2) + "\n"
    if opts["output"]:
        with open(opts["output"], "w") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return EXIT_OK


_COMMANDS = {
    "deflicker": cmd_deflicker,
    "nnf": cmd_nnf,
    "blend-compare": cmd_blend_compare,
    "latent-demo": cmd_latent_demo,
    "smooth": cmd_smooth,
    "metrics": cmd_metrics,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ShapeMismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SHAPE
    except (FormatError, SequenceGapError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except PatchBlendError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
