"""Pure-Python nearest-neighbor-field search.

Mirrors the compiled core exactly: same scan order, same candidate rule,
same counter-based RNG, so both backends make identical accept/reject
decisions whenever patch costs are exactly representable.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX_Y = 0xC2B2AE3D27D4EB4F
_MIX_I = 0xD6E8FEB86659FD93

# Search intensity; must stay in lockstep with the compiled core.
SAMPLES_PER_RADIUS = 8
POLISH_RADIUS = 1


def _stream_init(seed: int, x: int, y: int, it: int) -> int:
    s = seed & _MASK
    s ^= ((x + 1) * _GAMMA) & _MASK
    s ^= ((y + 1) * _MIX_Y) & _MASK
    s ^= ((it + 1) * _MIX_I) & _MASK
    return s


def _next64(state: int) -> tuple[int, int]:
    state = (state + _GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def nnf_search(src, tgt, patch_size, iterations, init_radius, decay, seed):
    """Serial PatchMatch over valid patch centers; returns (sy, sx, cost)."""
    h, w = tgt.shape[0], tgt.shape[1]
    half = patch_size // 2
    lo = half
    hi_y = h - 1 - half
    hi_x = w - 1 - half

    sy = np.zeros((h, w), dtype=np.int32)
    sx = np.zeros((h, w), dtype=np.int32)
    cost = np.zeros((h, w), dtype=np.float64)

    def ssd(ty, tx, cy, cx):
        dt = (tgt[ty - half : ty + half + 1, tx - half : tx + half + 1]
              - src[cy - half : cy + half + 1, cx - half : cx + half + 1])
        return float(np.sum(dt * dt))

    for y in range(lo, hi_y + 1):
        for x in range(lo, hi_x + 1):
            sy[y, x] = y
            sx[y, x] = x
            cost[y, x] = ssd(y, x, y, x)

    for it in range(iterations):
        if it % 2 == 0:
            ys = range(lo, hi_y + 1)
            xs = range(lo, hi_x + 1)
            d = -1
        else:
            ys = range(hi_y, lo - 1, -1)
            xs = range(hi_x, lo - 1, -1)
            d = 1
        for y in ys:
            for x in xs:
                by, bx, best = int(sy[y, x]), int(sx[y, x]), float(cost[y, x])

                nx = x + d
                if lo <= nx <= hi_x:
                    cy = int(sy[y, nx])
                    cx = min(max(int(sx[y, nx]) - d, lo), hi_x)
                    if (cy, cx) != (by, bx):
                        c = ssd(y, x, cy, cx)
                        if c < best:
                            by, bx, best = cy, cx, c

                ny = y + d
                if lo <= ny <= hi_y:
                    cy = min(max(int(sy[ny, x]) - d, lo), hi_y)
                    cx = int(sx[ny, x])
                    if (cy, cx) != (by, bx):
                        c = ssd(y, x, cy, cx)
                        if c < best:
                            by, bx, best = cy, cx, c

                state = _stream_init(seed, x, y, it)
                r = int(init_radius)
                while r >= 1:
                    span = 2 * r + 1
                    for _ in range(SAMPLES_PER_RADIUS):
                        state, a = _next64(state)
                        state, b = _next64(state)
                        cy = min(max(by + int(a % span) - r, lo), hi_y)
                        cx = min(max(bx + int(b % span) - r, lo), hi_x)
                        if (cy, cx) != (by, bx):
                            c = ssd(y, x, cy, cx)
                            if c < best:
                                by, bx, best = cy, cx, c
                    r = int(r * decay)

                for py in range(-POLISH_RADIUS, POLISH_RADIUS + 1):
                    for px in range(-POLISH_RADIUS, POLISH_RADIUS + 1):
                        cy = min(max(by + py, lo), hi_y)
                        cx = min(max(bx + px, lo), hi_x)
                        if (cy, cx) != (by, bx):
                            c = ssd(y, x, cy, cx)
                            if c < best:
                                by, bx, best = cy, cx, c

                sy[y, x] = by
                sx[y, x] = bx
                cost[y, x] = best

    sl = np.s_[lo : hi_y + 1, lo : hi_x + 1]
    return sy[sl].copy(), sx[sl].copy(), cost[sl].copy()
