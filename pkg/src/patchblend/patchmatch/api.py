"""Public NNF API: estimation, exhaustive oracle, remap and cost audit."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, FormatError, ShapeMismatchError
from ..frames import Frame, PixelAccumulator


@dataclass(frozen=True)
class PatchConfig:
    """Parameters of the patch correspondence search.

    `init_radius=None` means the largest frame dimension at call time.
    """

    patch_size: int = 7
    iterations: int = 6
    init_radius: int | None = None
    radius_decay: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ConfigError(f"patch_size must be an odd integer >= 3, got {self.patch_size}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.init_radius is not None and self.init_radius < 1:
            raise ConfigError(f"init_radius must be >= 1, got {self.init_radius}")
        if not 0.0 < self.radius_decay < 1.0:
            raise ConfigError(f"radius_decay must be in (0, 1), got {self.radius_decay}")


@dataclass
class Nnf:
    """Per-patch-center correspondence from a target frame into a source frame.

    Entries exist for every valid patch center, i.e. positions where the full
    patch fits inside the frame; `sy`/`sx` are absolute source coordinates and
    `cost` the SSD over guide intensities.
    """

    width: int
    height: int
    patch_size: int
    sy: np.ndarray
    sx: np.ndarray
    cost: np.ndarray

    @property
    def half(self) -> int:
        return self.patch_size // 2

    @property
    def lo(self) -> int:
        return self.half

    def total_cost(self) -> float:
        return float(self.cost.sum())

    def validate(self) -> None:
        """Check that every stored coordinate keeps its patch in bounds."""
        half = self.half
        if np.any(self.sy < half) or np.any(self.sy > self.height - 1 - half):
            raise ValueError("NNF row coordinate leaves patch out of bounds")
        if np.any(self.sx < half) or np.any(self.sx > self.width - 1 - half):
            raise ValueError("NNF column coordinate leaves patch out of bounds")
        if np.any(self.cost < 0):
            raise ValueError("NNF cost must be non-negative")

    def dump(self) -> str:
        """Serialize as the text dump format: header then one line per entry."""
        out = io.StringIO()
        out.write(f"NNF {self.width} {self.height}\n")
        lo = self.lo
        ih, iw = self.sy.shape
        for yy in range(ih):
            for xx in range(iw):
                out.write(
                    f"{xx + lo} {yy + lo} {self.sx[yy, xx]} {self.sy[yy, xx]} "
                    f"{float(self.cost[yy, xx])!r}\n"
                )
        return out.getvalue()


def parse_nnf_dump(text: str, patch_size: int) -> Nnf:
    lines = text.strip().splitlines()
    head = lines[0].split()
    if len(head) != 3 or head[0] != "NNF":
        raise FormatError("bad NNF dump header")
    w, h = int(head[1]), int(head[2])
    half = patch_size // 2
    ih, iw = h - 2 * half, w - 2 * half
    sy = np.zeros((ih, iw), dtype=np.int32)
    sx = np.zeros((ih, iw), dtype=np.int32)
    cost = np.zeros((ih, iw), dtype=np.float64)
    for line in lines[1:]:
        xs, ys, sxs, sys_, cs = line.split()
        x, y = int(xs) - half, int(ys) - half
        sx[y, x] = int(sxs)
        sy[y, x] = int(sys_)
        cost[y, x] = float(cs)
    return Nnf(w, h, patch_size, sy, sx, cost)


def _check_pair(source: Frame, target: Frame, cfg: PatchConfig):
    if source.shape != target.shape:
        raise ShapeMismatchError(
            f"guide frames differ: {source.shape} vs {target.shape}"
        )
    h, w = target.shape
    if h < cfg.patch_size or w < cfg.patch_size:
        raise ShapeMismatchError(
            f"frame {w}x{h} smaller than patch size {cfg.patch_size}"
        )
    return h, w


def estimate_nnf(source_guide: Frame, target_guide: Frame, cfg: PatchConfig) -> Nnf:
    """PatchMatch search: identity init, alternating propagation scans and
    exponentially decaying random search.  Deterministic for a fixed seed."""
    from . import _search

    h, w = _check_pair(source_guide, target_guide, cfg)
    radius = cfg.init_radius if cfg.init_radius is not None else max(w, h)
    sy, sx, cost = _search(
        source_guide.data, target_guide.data,
        cfg.patch_size, cfg.iterations, radius, cfg.radius_decay, cfg.rng_seed,
    )
    return Nnf(w, h, cfg.patch_size, sy, sx, cost)


def brute_force_nnf(source_guide: Frame, target_guide: Frame, cfg: PatchConfig) -> Nnf:
    """Exhaustive minimum-cost match; ties resolved to smallest (sy, sx).

    O(W^2 H^2): intended as a test oracle for small frames.
    """
    h, w = _check_pair(source_guide, target_guide, cfg)
    p = cfg.patch_size
    half = p // 2
    lo, hi_y, hi_x = half, h - 1 - half, w - 1 - half
    ih, iw = hi_y - lo + 1, hi_x - lo + 1
    src, tgt = source_guide.data, target_guide.data

    best = np.full((ih, iw), np.inf)
    bsy = np.zeros((ih, iw), dtype=np.int32)
    bsx = np.zeros((ih, iw), dtype=np.int32)

    # Displacements scanned in ascending (dy, dx) give per-target candidates in
    # ascending (sy, sx), so keeping the first strict minimum realizes the
    # lexicographic tie-break.
    for dy in range(-(ih - 1), ih):
        yt0, yt1 = max(lo, lo - dy), min(hi_y, hi_y - dy)
        if yt0 > yt1:
            continue
        for dx in range(-(iw - 1), iw):
            xt0, xt1 = max(lo, lo - dx), min(hi_x, hi_x - dx)
            if xt0 > xt1:
                continue
            rows = slice(yt0 - half, yt1 + half + 1)
            cols = slice(xt0 - half, xt1 + half + 1)
            diff = (tgt[rows, cols]
                    - src[yt0 - half + dy : yt1 + half + 1 + dy,
                          xt0 - half + dx : xt1 + half + 1 + dx])
            e = np.einsum("ijk,ijk->ij", diff, diff)
            s = np.cumsum(np.cumsum(e, axis=0), axis=1)
            s = np.pad(s, ((1, 0), (1, 0)))
            win = (s[p:, p:] - s[:-p, p:] - s[p:, :-p] + s[:-p, :-p])

            r0, r1 = yt0 - lo, yt1 - lo + 1
            c0, c1 = xt0 - lo, xt1 - lo + 1
            better = win < best[r0:r1, c0:c1]
            if np.any(better):
                best[r0:r1, c0:c1][better] = win[better]
                ys, xs = np.nonzero(better)
                bsy[r0:r1, c0:c1][better] = (ys + yt0 + dy).astype(np.int32)
                bsx[r0:r1, c0:c1][better] = (xs + xt0 + dx).astype(np.int32)
    return Nnf(w, h, p, bsy, bsx, best)


def nnf_cost(nnf: Nnf, source_guide: Frame, target_guide: Frame) -> float:
    """Recompute the total SSD implied by the stored coordinates."""
    if source_guide.shape != target_guide.shape:
        raise ShapeMismatchError("guide frames differ in size")
    if target_guide.shape != (nnf.height, nnf.width):
        raise ShapeMismatchError("NNF does not match guide dimensions")
    half, lo = nnf.half, nnf.lo
    ih, iw = nnf.sy.shape
    src, tgt = source_guide.data, target_guide.data
    total = 0.0
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            t = tgt[lo + dy : lo + ih + dy, lo + dx : lo + iw + dx]
            s = src[nnf.sy + dy, nnf.sx + dx]
            total += float(np.sum((t - s) ** 2))
    return total


def _remap_buffer(buf: np.ndarray, nnf: Nnf) -> np.ndarray:
    half, lo = nnf.half, nnf.lo
    ih, iw = nnf.sy.shape
    h, w = buf.shape[0], buf.shape[1]
    votes = np.zeros_like(buf)
    cnt = np.zeros((h, w, 1), dtype=np.float64)
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            rows = slice(lo + dy, lo + ih + dy)
            cols = slice(lo + dx, lo + iw + dx)
            votes[rows, cols] += buf[nnf.sy + dy, nnf.sx + dx]
            cnt[rows, cols] += 1.0
    return votes / cnt


def remap(payload, nnf: Nnf):
    """Reconstruct a target-aligned payload by uniform patch voting.

    Every patch center votes its matched source pixels into the pixels it
    covers; each output pixel is the average of its votes.  Linear in the
    payload, which is what lets remapping distribute over accumulation.
    """
    if isinstance(payload, Frame):
        if payload.shape != (nnf.height, nnf.width):
            raise ShapeMismatchError("payload does not match NNF dimensions")
        return Frame(_remap_buffer(payload.data, nnf))
    if isinstance(payload, PixelAccumulator):
        if payload.shape != (nnf.height, nnf.width):
            raise ShapeMismatchError("payload does not match NNF dimensions")
        return PixelAccumulator(_remap_buffer(payload.sum, nnf), payload.count)
    raise TypeError(f"cannot remap {type(payload).__name__}")
