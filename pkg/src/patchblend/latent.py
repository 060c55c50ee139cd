"""Latent-space sampling harness with in-iteration deflickering.

A deterministic DDIM-style sampler over per-frame latents, where every k-th
step routes the per-frame clean estimates through decode -> video deflicker
-> encode and re-derives the noise prediction, so frame-to-frame drift is
corrected inside the iteration instead of accumulating.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeMismatchError
from .frames import CHANNELS, Frame, FrameSequence


@dataclass(frozen=True)
class AlphaSchedule:
    """Cumulative signal coefficients alpha[0..T]; alpha[0] = 1, strictly
    decreasing, all in (0, 1]."""

    alphas: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise ConfigError("alpha schedule must be a 1-D array")
        if a[0] != 1.0:
            raise ConfigError("alpha[0] must be exactly 1")
        if np.any(a <= 0) or np.any(a > 1):
            raise ConfigError("alpha values must lie in (0, 1]")
        if np.any(np.diff(a) >= 0):
            raise ConfigError("alpha schedule must be strictly decreasing")
        object.__setattr__(self, "alphas", a)

    @property
    def T(self) -> int:
        return self.alphas.size - 1

    def alpha(self, t: int) -> float:
        return float(self.alphas[t])

    @classmethod
    def linear(cls, steps: int, scale: float = 1.0) -> "AlphaSchedule":
        """Cumulative products of (1 - beta) with beta linear in the step."""
        betas = np.linspace(1e-4 * scale, 2e-2 * scale, steps)
        alphas = np.concatenate([[1.0], np.cumprod(1.0 - betas)])
        return cls(alphas)


@dataclass
class LatentState:
    """Step index plus one flat latent vector per frame, shape (n, dim)."""

    t: int
    x: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            raise ConfigError("latent state must have shape (frames, dim)")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("latent state contains non-finite values")


def _eps_all(denoiser, x: np.ndarray, t: int) -> np.ndarray:
    """Evaluate the denoiser per frame; accepts one callable or one per frame."""
    n = x.shape[0]
    if isinstance(denoiser, (list, tuple)):
        if len(denoiser) != n:
            raise ShapeMismatchError(
                f"{len(denoiser)} denoisers for {n} frames"
            )
        rows = [np.asarray(d(x[i], t), dtype=np.float64) for i, d in enumerate(denoiser)]
    else:
        rows = [np.asarray(denoiser(x[i], t), dtype=np.float64) for i in range(n)]
    out = np.stack(rows)
    if out.shape != x.shape:
        raise ShapeMismatchError("denoiser changed the latent dimension")
    return out


def estimate_clean(state: LatentState, schedule: AlphaSchedule, denoiser) -> np.ndarray:
    """Per-frame clean-signal estimates at the current step."""
    if state.t < 1:
        raise ConfigError("cannot estimate below step 1")
    at = schedule.alpha(state.t)
    eps = _eps_all(denoiser, state.x, state.t)
    return (state.x - math.sqrt(1.0 - at) * eps) / math.sqrt(at)


def ddim_step(state: LatentState, schedule: AlphaSchedule, denoiser) -> LatentState:
    """One deterministic denoising step applied independently per frame."""
    if state.t < 1:
        raise ConfigError("cannot step below t=0")
    at = schedule.alpha(state.t)
    atp = schedule.alpha(state.t - 1)
    eps = _eps_all(denoiser, state.x, state.t)
    x0 = (state.x - math.sqrt(1.0 - at) * eps) / math.sqrt(at)
    return LatentState(state.t - 1, math.sqrt(atp) * x0 + math.sqrt(1.0 - atp) * eps)


class IdentityCodec:
    """1:1 mapping between flat latents and frame pixels (dim = h * w * 3).

    Decoded frames may carry values outside [0, 1]; clamping happens only
    when a final image is produced.
    """

    def __init__(self, height: int, width: int):
        self.height = height
        self.width = width

    @property
    def latent_dim(self) -> int:
        return self.height * self.width * CHANNELS

    def encode(self, frame: Frame) -> np.ndarray:
        if frame.shape != (self.height, self.width):
            raise ShapeMismatchError("frame does not match codec dimensions")
        return frame.data.reshape(-1).copy()

    def decode(self, latent: np.ndarray) -> Frame:
        latent = np.asarray(latent, dtype=np.float64)
        if latent.size != self.latent_dim:
            raise ShapeMismatchError(
                f"latent of size {latent.size}, codec expects {self.latent_dim}"
            )
        return Frame(latent.reshape(self.height, self.width, CHANNELS).copy())


def identity_deflicker(seq: FrameSequence, guides=None) -> FrameSequence:
    return seq


def deflicker_step(state: LatentState, schedule: AlphaSchedule, denoiser,
                   codec, f, guides: FrameSequence | None = None) -> LatentState:
    """Denoising step with the clean estimates routed through the video
    deflicker: estimate, decode, deflicker, encode, re-derive the noise
    prediction, then advance one step."""
    if state.t < 1:
        raise ConfigError("cannot step below t=0")
    n = state.x.shape[0]
    if guides is not None and len(guides) != n:
        raise ShapeMismatchError(f"{len(guides)} guide frames for {n} latents")
    at = schedule.alpha(state.t)
    atp = schedule.alpha(state.t - 1)

    eps = _eps_all(denoiser, state.x, state.t)
    x0 = (state.x - math.sqrt(1.0 - at) * eps) / math.sqrt(at)
    frames = FrameSequence([codec.decode(x0[i]) for i in range(n)])
    smoothed = f(frames, guides)
    if len(smoothed) != n or (smoothed.height, smoothed.width) != (frames.height, frames.width):
        raise ShapeMismatchError("deflicker method changed sequence shape")
    xbar = np.stack([codec.encode(smoothed[i + 1]) for i in range(n)])
    eps_bar = (state.x - math.sqrt(at) * xbar) / math.sqrt(1.0 - at)
    return LatentState(state.t - 1, math.sqrt(atp) * xbar + math.sqrt(1.0 - atp) * eps_bar)


@dataclass
class GenerationConfig:
    frames: int
    latent_dim: int
    steps: int
    deflicker_frequency: int = 1
    seed: int = 0
    mode: str = "from-noise"
    strength: float = 0.8

    def __post_init__(self):
        if self.frames < 1:
            raise ConfigError("frames must be >= 1")
        if self.latent_dim < 1:
            raise ConfigError("latent_dim must be >= 1")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.deflicker_frequency < 1:
            raise ConfigError("deflicker_frequency must be >= 1")
        if self.mode not in ("from-noise", "img2img"):
            raise ConfigError(f"unknown start mode {self.mode!r}")
        if self.mode == "img2img" and not 0.0 < self.strength <= 1.0:
            raise ConfigError("img2img strength must be in (0, 1]")

    @classmethod
    def from_json(cls, text: str) -> "GenerationConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad generation config JSON: {e}") from None
        if "latent_dim" in doc:
            dim = doc["latent_dim"]
        elif "height" in doc and "width" in doc:
            dim = int(doc["height"]) * int(doc["width"]) * CHANNELS
        else:
            raise ConfigError("config needs latent_dim or height/width")
        return cls(
            frames=int(doc["frames"]),
            latent_dim=int(dim),
            steps=int(doc["steps"]),
            deflicker_frequency=int(doc.get("deflicker_frequency", 1)),
            seed=int(doc.get("seed", 0)),
            mode=doc.get("mode", "from-noise"),
            strength=float(doc.get("strength", 0.8)),
        )


@dataclass
class GenerationResult:
    frames: FrameSequence
    deflicker_steps: list
    final_state: LatentState


def run_generation(config: GenerationConfig, schedule: AlphaSchedule, denoiser,
                   codec, f, guides: FrameSequence | None = None) -> GenerationResult:
    """Run the full sampling loop.

    All frames start from one shared seeded Gaussian draw; deflickering fires
    on the first step and every `deflicker_frequency`-th step after it.
    """
    if schedule.T < config.steps:
        raise ConfigError(
            f"schedule has {schedule.T} steps, config asks for {config.steps}"
        )
    rng = np.random.default_rng(config.seed)
    noise = rng.standard_normal(config.latent_dim)

    if config.mode == "from-noise":
        t0 = config.steps
        x = np.tile(noise, (config.frames, 1))
    else:
        if guides is None:
            raise ConfigError("img2img mode requires guide frames")
        if len(guides) != config.frames:
            raise ShapeMismatchError(
                f"{len(guides)} guide frames for {config.frames} configured"
            )
        t0 = max(1, round(config.strength * config.steps))
        a0 = schedule.alpha(t0)
        enc = np.stack([codec.encode(guides[i + 1]) for i in range(config.frames)])
        x = math.sqrt(a0) * enc + math.sqrt(1.0 - a0) * noise

    state = LatentState(t0, x)
    fired = []
    step_idx = 0
    while state.t > 0:
        step_idx += 1
        if (step_idx - 1) % config.deflicker_frequency == 0:
            state = deflicker_step(state, schedule, denoiser, codec, f, guides)
            fired.append(step_idx)
        else:
            state = ddim_step(state, schedule, denoiser)
    frames = FrameSequence(
        [codec.decode(state.x[i]).clipped() for i in range(config.frames)]
    )
    return GenerationResult(frames, fired, state)


class TargetDenoiser:
    """Toy denoiser whose noise prediction drives the sampler toward a fixed
    clean latent: the one-step clean estimate is exactly that target."""

    def __init__(self, schedule: AlphaSchedule, target: np.ndarray):
        self.schedule = schedule
        self.target = np.asarray(target, dtype=np.float64)

    def __call__(self, x: np.ndarray, t: int) -> np.ndarray:
        a = self.schedule.alpha(t)
        return (x - math.sqrt(a) * self.target) / math.sqrt(1.0 - a)


class DriftDenoiser:
    """Toy denoiser with a constant per-frame bias on the noise prediction.

    The unbiased part relaxes the clean estimate toward a base latent; the
    bias makes frames drift apart, mostly during the early high-noise steps,
    so the drift accumulates unless something re-aligns the frames mid-run.
    """

    def __init__(self, schedule: AlphaSchedule, base: np.ndarray,
                 drift: float, retain: float = 0.9):
        self.schedule = schedule
        self.base = np.asarray(base, dtype=np.float64)
        self.drift = drift
        self.retain = retain

    def __call__(self, x: np.ndarray, t: int) -> np.ndarray:
        a = self.schedule.alpha(t)
        x0 = self.base + self.retain * (x - self.base)
        return (x - math.sqrt(a) * x0) / math.sqrt(1.0 - a) + self.drift


def flickering_denoisers(schedule: AlphaSchedule, base: np.ndarray,
                         jitter_scale: float, frames: int, seed: int = 0):
    """One drift denoiser per frame with seeded per-frame drift offsets;
    emulates a sampler whose frames flicker apart over the iterations."""
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, jitter_scale, size=frames)
    return [DriftDenoiser(schedule, base, off) for off in offsets]
