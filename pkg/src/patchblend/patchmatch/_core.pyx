# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled nearest-neighbor-field search kernel.

Semantics are identical to `_fallback.nnf_search`; only the inner loops are
compiled.  The early cost abort below is decision-equivalent: a candidate is
only ever accepted on a strictly smaller, fully summed cost.
"""

import numpy as np

cimport numpy as cnp

ctypedef unsigned long long u64

cdef u64 _GAMMA = 0x9E3779B97F4A7C15ULL
cdef u64 _MIX_Y = 0xC2B2AE3D27D4EB4FULL
cdef u64 _MIX_I = 0xD6E8FEB86659FD93ULL

# Search intensity; must stay in lockstep with the Python fallback.
DEF SAMPLES_PER_RADIUS = 8
DEF POLISH_RADIUS = 1


cdef inline u64 _next64(u64* state) noexcept nogil:
    state[0] = state[0] + _GAMMA
    cdef u64 z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline long _clamp(long v, long lo, long hi) noexcept nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef inline double _ssd(const double[:, :, ::1] src, const double[:, :, ::1] tgt,
                        long ty, long tx, long cy, long cx, long half,
                        double bound) noexcept nogil:
    cdef double total = 0.0
    cdef double d
    cdef long dy, dx, c
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            for c in range(3):
                d = tgt[ty + dy, tx + dx, c] - src[cy + dy, cx + dx, c]
                total += d * d
        if total >= bound:
            return total
    return total


def nnf_search(const double[:, :, ::1] src, const double[:, :, ::1] tgt,
               long patch_size, long iterations, long init_radius,
               double decay, object seed):
    cdef long h = tgt.shape[0]
    cdef long w = tgt.shape[1]
    cdef long half = patch_size // 2
    cdef long lo = half
    cdef long hi_y = h - 1 - half
    cdef long hi_x = w - 1 - half
    cdef u64 seed64 = <u64> (int(seed) & 0xFFFFFFFFFFFFFFFF)

    sy_arr = np.zeros((h, w), dtype=np.int32)
    sx_arr = np.zeros((h, w), dtype=np.int32)
    cost_arr = np.zeros((h, w), dtype=np.float64)
    cdef int[:, ::1] sy = sy_arr
    cdef int[:, ::1] sx = sx_arr
    cdef double[:, ::1] cost = cost_arr

    cdef long x, y, it, d, y0, y1, ystep, x0, x1, xstep
    cdef long by, bx, cy, cx, nx, ny, r, span, k, py, px
    cdef double best, c
    cdef u64 state, a, b
    cdef double inf = float("inf")

    with nogil:
        for y in range(lo, hi_y + 1):
            for x in range(lo, hi_x + 1):
                sy[y, x] = <int> y
                sx[y, x] = <int> x
                cost[y, x] = _ssd(src, tgt, y, x, y, x, half, inf)

        for it in range(iterations):
            if it % 2 == 0:
                y0 = lo; y1 = hi_y + 1; ystep = 1
                x0 = lo; x1 = hi_x + 1; xstep = 1
                d = -1
            else:
                y0 = hi_y; y1 = lo - 1; ystep = -1
                x0 = hi_x; x1 = lo - 1; xstep = -1
                d = 1
            y = y0
            while y != y1:
                x = x0
                while x != x1:
                    by = sy[y, x]
                    bx = sx[y, x]
                    best = cost[y, x]

                    nx = x + d
                    if lo <= nx <= hi_x:
                        cy = sy[y, nx]
                        cx = _clamp(sx[y, nx] - d, lo, hi_x)
                        if cy != by or cx != bx:
                            c = _ssd(src, tgt, y, x, cy, cx, half, best)
                            if c < best:
                                by = cy; bx = cx; best = c

                    ny = y + d
                    if lo <= ny <= hi_y:
                        cy = _clamp(sy[ny, x] - d, lo, hi_y)
                        cx = sx[ny, x]
                        if cy != by or cx != bx:
                            c = _ssd(src, tgt, y, x, cy, cx, half, best)
                            if c < best:
                                by = cy; bx = cx; best = c

                    state = seed64
                    state = state ^ (<u64> (x + 1) * _GAMMA)
                    state = state ^ (<u64> (y + 1) * _MIX_Y)
                    state = state ^ (<u64> (it + 1) * _MIX_I)
                    r = init_radius
                    while r >= 1:
                        span = 2 * r + 1
                        for k in range(SAMPLES_PER_RADIUS):
                            a = _next64(&state)
                            b = _next64(&state)
                            cy = _clamp(by + <long> (a % <u64> span) - r, lo, hi_y)
                            cx = _clamp(bx + <long> (b % <u64> span) - r, lo, hi_x)
                            if cy != by or cx != bx:
                                c = _ssd(src, tgt, y, x, cy, cx, half, best)
                                if c < best:
                                    by = cy; bx = cx; best = c
                        r = <long> (r * decay)

                    for py in range(-POLISH_RADIUS, POLISH_RADIUS + 1):
                        for px in range(-POLISH_RADIUS, POLISH_RADIUS + 1):
                            cy = _clamp(by + py, lo, hi_y)
                            cx = _clamp(bx + px, lo, hi_x)
                            if cy != by or cx != bx:
                                c = _ssd(src, tgt, y, x, cy, cx, half, best)
                                if c < best:
                                    by = cy; bx = cx; best = c

                    sy[y, x] = <int> by
                    sx[y, x] = <int> bx
                    cost[y, x] = best
                    x += xstep
                y += ystep

    sl = np.s_[lo : hi_y + 1, lo : hi_x + 1]
    return sy_arr[sl].copy(), sx_arr[sl].copy(), cost_arr[sl].copy()
