"""Sliding-window and full-sequence deflickering via remap-and-blend.

The full-sequence path uses a dyadic remapping table: column c accumulates
blends of frame ranges whose lengths are powers of two, so the blend of any
prefix decomposes into O(log n) stored chunks, each remapped to the target
frame once.  A reversed-direction table covers the suffix.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ConfigError, ShapeMismatchError
from .frames import FrameSequence, PixelAccumulator, accumulate, finalize
from .patchmatch import PatchConfig, estimate_nnf, remap


class RemapProvider:
    """Computes, caches and applies guide-pair correspondences.

    NNFs are keyed by the ordered guide pair (source j, target i); the cache
    is LRU-bounded and single-flight so concurrent queries for the same pair
    estimate it once.  Counters record estimations and remap applications.
    """

    def __init__(self, guides: FrameSequence, cfg: PatchConfig | None = None,
                 cache_size: int = 1024):
        self.guides = guides
        self.cfg = cfg if cfg is not None else PatchConfig()
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        self._pending: dict = {}
        self._lock = threading.Lock()
        self.nnf_estimations = 0
        self.remap_count = 0

    def nnf(self, j: int, i: int):
        key = (j, i)
        while True:
            with self._lock:
                if key in self._cache:
                    self._cache.move_to_end(key)
                    return self._cache[key]
                ev = self._pending.get(key)
                if ev is None:
                    self._pending[key] = threading.Event()
                    break
            ev.wait()
        try:
            nnf = estimate_nnf(self.guides[j], self.guides[i], self.cfg)
        except BaseException:
            with self._lock:
                self._pending.pop(key).set()
            raise
        with self._lock:
            self.nnf_estimations += 1
            self._cache[key] = nnf
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
            self._pending.pop(key).set()
        return nnf

    def remap(self, payload, j: int, i: int):
        if j == i:
            raise ValueError("self-remap [i->i] must be taken as the payload itself")
        nnf = self.nnf(j, i)
        with self._lock:
            self.remap_count += 1
        return remap(payload, nnf)

    def warm(self, pairs, threads: int = 1) -> None:
        """Precompute NNFs for the given ordered pairs, optionally in parallel."""
        pairs = [p for p in dict.fromkeys(pairs) if p[0] != p[1]]
        if threads <= 1:
            for j, i in pairs:
                self.nnf(j, i)
            return
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda p: self.nnf(*p), pairs))


class IdentityRemapProvider:
    """Provider whose remaps are passthrough copies.

    Useful for structural checks of the table machinery (ranges, depths and
    operation counts do not depend on pixel content) and for blending
    sequences whose guides are known to be static.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.nnf_estimations = 0
        self.remap_count = 0
        self._seen = set()

    def remap(self, payload, j: int, i: int):
        if j == i:
            raise ValueError("self-remap [i->i] must be taken as the payload itself")
        with self._lock:
            self.remap_count += 1
            if (j, i) not in self._seen:
                self._seen.add((j, i))
                self.nnf_estimations += 1
        if isinstance(payload, PixelAccumulator):
            return payload.copy()
        return payload


@dataclass
class TableEntry:
    """One stored blend: an accumulator over a contiguous column range.

    `sources` maps each contributing home frame index to the number of remap
    applications its contribution has undergone; `depth` is their maximum.
    """

    payload: PixelAccumulator
    col_lo: int
    col_hi: int
    depth: int
    sources: dict = field(default_factory=dict)


@dataclass
class RemapTable:
    direction: str
    n: int
    entries: dict = field(default_factory=dict)  # (level, column) -> TableEntry
    column_sum: list = field(default_factory=list)  # 1-based, [0] unused

    def home(self, c: int) -> int:
        """Original frame index stored at column c."""
        return c if self.direction == "forward" else self.n + 1 - c


def _check_lengths(synth: FrameSequence, guides: FrameSequence) -> int:
    if len(synth) != len(guides):
        raise ShapeMismatchError(
            f"synthesized and guide sequences differ: {len(synth)} vs {len(guides)}"
        )
    if (synth.height, synth.width) != (guides.height, guides.width):
        raise ShapeMismatchError("synthesized and guide frame sizes differ")
    return len(synth)


def build_table(synth: FrameSequence, guides: FrameSequence, provider,
                direction: str = "forward") -> RemapTable:
    """Fill the dyadic remapping table with O(n) remap applications."""
    if direction not in ("forward", "reversed"):
        raise ConfigError(f"unknown table direction {direction!r}")
    n = _check_lengths(synth, guides)
    table = RemapTable(direction, n)
    table.column_sum = [None] * (n + 1)

    for c in range(1, n + 1):
        f = table.home(c)
        entry = TableEntry(PixelAccumulator.of(synth[f]), c, c, 0, {f: 0})
        table.entries[(0, c)] = entry
        table.column_sum[c] = TableEntry(entry.payload.copy(), c, c, 0, dict(entry.sources))

    k = 1
    while (1 << k) <= n:
        step = 1 << k
        for c in range(step, n + 1, step):
            src = table.column_sum[c - step // 2]
            payload = provider.remap(src.payload, table.home(c - step // 2), table.home(c))
            entry = TableEntry(
                payload, src.col_lo, src.col_hi, src.depth + 1,
                {f: d + 1 for f, d in src.sources.items()},
            )
            table.entries[(k, c)] = entry
            cs = table.column_sum[c]
            table.column_sum[c] = TableEntry(
                accumulate(cs.payload, entry.payload),
                min(cs.col_lo, entry.col_lo), max(cs.col_hi, entry.col_hi),
                max(cs.depth, entry.depth),
                {**cs.sources, **entry.sources},
            )
        k += 1
    return table


def _prefix_chunks(table: RemapTable, p: int):
    c = p
    while c > 0:
        yield c
        c -= c & (-c)


def query_prefix(table: RemapTable, p: int, g: int, provider) -> PixelAccumulator:
    """Approximate blend of columns 1..p remapped to original frame g.

    Walks the dyadic chunk decomposition of the prefix; the chunk homed at g
    itself is taken directly, every other chunk costs exactly one remap.
    """
    if not 1 <= p <= table.n:
        raise ConfigError(f"prefix position {p} out of range 1..{table.n}")
    if not 1 <= g <= table.n:
        raise ConfigError(f"target frame {g} out of range 1..{table.n}")
    acc = None
    for c in _prefix_chunks(table, p):
        cs = table.column_sum[c]
        if table.home(c) == g:
            part = cs.payload
        else:
            part = provider.remap(cs.payload, table.home(c), g)
        acc = part.copy() if acc is None else accumulate(acc, part)
    return acc


def query_depths(table: RemapTable, p: int, g: int) -> dict:
    """Per-frame remap depths the prefix query would produce, symbolically."""
    depths = {}
    for c in _prefix_chunks(table, p):
        cs = table.column_sum[c]
        bump = 0 if table.home(c) == g else 1
        for f, d in cs.sources.items():
            depths[f] = d + bump
    return depths


def blend_window(synth: FrameSequence, guides: FrameSequence, radius: int,
                 provider) -> FrameSequence:
    """Average each frame with its remapped neighbors within +-radius."""
    n = _check_lengths(synth, guides)
    if radius < 0:
        raise ConfigError("window radius must be >= 0")
    out = []
    for i in range(1, n + 1):
        acc = PixelAccumulator.of(synth[i])
        for j in range(max(1, i - radius), min(n, i + radius) + 1):
            if j != i:
                acc = accumulate(acc, provider.remap(synth[j], j, i))
        out.append(finalize(acc))
    return FrameSequence(out)


def blend_all(synth: FrameSequence, guides: FrameSequence, provider) -> FrameSequence:
    """Blend every frame into every other via two dyadic tables.

    Needs O(n) remaps to build the tables plus O(log n) per output frame,
    versus O(n^2) for the exhaustive path.
    """
    n = _check_lengths(synth, guides)
    fwd = build_table(synth, guides, provider, "forward")
    rev = build_table(synth, guides, provider, "reversed")
    out = []
    for i in range(1, n + 1):
        acc = query_prefix(fwd, i, i, provider)
        if i < n:
            acc = accumulate(acc, query_prefix(rev, n - i, i, provider))
        out.append(finalize(acc))
    return FrameSequence(out)


def blend_all_bruteforce(synth: FrameSequence, guides: FrameSequence,
                         provider) -> FrameSequence:
    """Exact all-pairs blend; every contribution has remap depth <= 1."""
    n = _check_lengths(synth, guides)
    out = []
    for i in range(1, n + 1):
        acc = PixelAccumulator.of(synth[i])
        for j in range(1, n + 1):
            if j != i:
                acc = accumulate(acc, provider.remap(synth[j], j, i))
        out.append(finalize(acc))
    return FrameSequence(out)


def window_pairs(n: int, radius: int):
    """Ordered guide pairs the sliding-window blend will request."""
    pairs = []
    for i in range(1, n + 1):
        for j in range(max(1, i - radius), min(n, i + radius) + 1):
            if j != i:
                pairs.append((j, i))
    return pairs


def blend_all_pairs(n: int):
    """Ordered guide pairs the full dyadic blend will request."""
    pairs = []
    for direction in ("forward", "reversed"):
        home = (lambda c: c) if direction == "forward" else (lambda c: n + 1 - c)
        k = 1
        while (1 << k) <= n:
            step = 1 << k
            for c in range(step, n + 1, step):
                pairs.append((home(c - step // 2), home(c)))
            k += 1
    for i in range(1, n + 1):
        for c in _prefix_chunks(RemapTable("forward", n), i):
            if c != i:
                pairs.append((c, i))
        if i < n:
            for c in _prefix_chunks(RemapTable("reversed", n), n - i):
                if n + 1 - c != i:
                    pairs.append((n + 1 - c, i))
    return pairs
