"""Blend engine: providers, the dyadic remapping table and both blend paths."""

import math

import numpy as np
import pytest

from patchblend.blend import (
    IdentityRemapProvider,
    RemapProvider,
    blend_all,
    blend_all_bruteforce,
    blend_all_pairs,
    blend_window,
    build_table,
    query_depths,
    query_prefix,
    window_pairs,
)
from patchblend.errors import ConfigError, ShapeMismatchError
from patchblend.frames import Frame, FrameSequence, finalize
from patchblend.patchmatch import PatchConfig

from conftest import dyadic_frame, jitter_sequence, random_frame


def cfg():
    return PatchConfig(patch_size=5, iterations=4)


def dyadic_sequence(n, h=10, w=10, seed0=100):
    return FrameSequence([dyadic_frame(seed0 + i, h, w) for i in range(n)])


def fast_count_bound(n):
    return 2 * (n - 1) + n * (2 * math.ceil(math.log2(n)) + 2) if n > 1 else 0


class TestRemapProvider:
    def test_cache_returns_identical_object(self):
        guides = dyadic_sequence(3)
        p = RemapProvider(guides, cfg())
        a = p.nnf(1, 2)
        b = p.nnf(1, 2)
        assert a is b
        assert p.nnf_estimations == 1

    def test_directed_pairs_distinct(self):
        guides = dyadic_sequence(2)
        p = RemapProvider(guides, cfg())
        p.nnf(1, 2)
        p.nnf(2, 1)
        assert p.nnf_estimations == 2

    def test_self_remap_rejected(self):
        guides = dyadic_sequence(2)
        p = RemapProvider(guides, cfg())
        with pytest.raises(ValueError):
            p.remap(guides[1], 1, 1)

    def test_lru_eviction(self):
        guides = dyadic_sequence(4)
        p = RemapProvider(guides, cfg(), cache_size=2)
        p.nnf(1, 2)
        p.nnf(1, 3)
        p.nnf(1, 4)  # evicts (1,2)
        assert p.nnf_estimations == 3
        p.nnf(1, 3)  # still cached
        assert p.nnf_estimations == 3
        p.nnf(1, 2)  # recomputed
        assert p.nnf_estimations == 4

    def test_warm_threads_equivalent(self):
        guides = dyadic_sequence(4)
        pairs = blend_all_pairs(4)
        serial = RemapProvider(guides, cfg())
        serial.warm(pairs, threads=1)
        threaded = RemapProvider(guides, cfg())
        threaded.warm(pairs, threads=4)
        assert serial.nnf_estimations == threaded.nnf_estimations
        for key in serial._cache:
            a, b = serial._cache[key], threaded._cache[key]
            assert np.array_equal(a.sy, b.sy)
            assert np.array_equal(a.sx, b.sx)


class TestTableStructure:
    @pytest.mark.parametrize("n", list(range(1, 18)) + [31, 32, 33])
    def test_closed_form_ranges_and_depths(self, n):
        seq = FrameSequence([Frame.filled(6, 6, 0.5)] * n)
        for direction in ("forward", "reversed"):
            table = build_table(seq, seq, IdentityRemapProvider(), direction)
            for (k, c), entry in table.entries.items():
                if k == 0:
                    assert (entry.col_lo, entry.col_hi) == (c, c)
                    assert entry.depth == 0
                    assert entry.sources == {table.home(c): 0}
                else:
                    assert c % (1 << k) == 0
                    assert (entry.col_lo, entry.col_hi) == (
                        c - (1 << k) + 1, c - (1 << (k - 1))
                    )
                    assert entry.depth <= k
                    assert entry.payload.count == entry.col_hi - entry.col_lo + 1
            for c in range(1, n + 1):
                cs = table.column_sum[c]
                low = c & (-c)
                assert (cs.col_lo, cs.col_hi) == (c - low + 1, c)
                assert cs.payload.count == low
                assert set(cs.sources) == {
                    table.home(j) for j in range(c - low + 1, c + 1)
                }

    def test_n8_table1_pattern(self):
        # column_sum[4] holds frame 3, frame 4 and the twice/once-remapped
        # frames 1 and 2; level-3 column 8 carries all of 1..4 one remap
        # deeper.
        seq = FrameSequence([Frame.filled(6, 6, 0.5)] * 8)
        table = build_table(seq, seq, IdentityRemapProvider(), "forward")
        assert table.entries[(1, 2)].sources == {1: 1}
        assert table.entries[(2, 4)].sources == {1: 2, 2: 1}
        assert table.entries[(3, 8)].sources == {1: 3, 2: 2, 3: 2, 4: 1}
        assert table.column_sum[4].sources == {1: 2, 2: 1, 3: 1, 4: 0}

    def test_build_remap_count(self):
        seq = FrameSequence([Frame.filled(6, 6, 0.5)] * 8)
        p = IdentityRemapProvider()
        build_table(seq, seq, p, "forward")
        assert p.remap_count == 7  # 4 + 2 + 1

    def test_n1_no_levels(self):
        seq = FrameSequence([Frame.filled(6, 6, 0.5)])
        p = IdentityRemapProvider()
        table = build_table(seq, seq, p, "forward")
        assert set(table.entries) == {(0, 1)}
        assert p.remap_count == 0

    def test_bad_direction(self):
        seq = FrameSequence([Frame.filled(6, 6, 0.5)])
        with pytest.raises(ConfigError):
            build_table(seq, seq, IdentityRemapProvider(), "sideways")


class TestQueryPrefix:
    def _tables(self, n):
        seq = FrameSequence([Frame.filled(6, 6, 0.5)] * n)
        p = IdentityRemapProvider()
        fwd = build_table(seq, seq, p, "forward")
        rev = build_table(seq, seq, p, "reversed")
        return fwd, rev, p

    def test_depth_pattern_i6_n8(self):
        fwd, rev, _ = self._tables(8)
        assert query_depths(fwd, 6, 6) == {1: 3, 2: 2, 3: 2, 4: 1, 5: 1, 6: 0}
        assert query_depths(rev, 2, 6) == {7: 1, 8: 2}

    def test_single_position_self_home(self):
        fwd, rev, p = self._tables(8)
        before = p.remap_count
        acc = query_prefix(fwd, 1, 1, p)
        assert p.remap_count == before  # chunk homed at the target: no remap
        assert acc.count == 1

    def test_remap_count_bounded_by_log(self):
        fwd, _, p = self._tables(33)
        for pos in range(1, 34):
            before = p.remap_count
            query_prefix(fwd, pos, pos, p)
            assert p.remap_count - before <= math.ceil(math.log2(33)) + 1

    def test_out_of_range(self):
        fwd, _, p = self._tables(4)
        with pytest.raises(ConfigError):
            query_prefix(fwd, 0, 1, p)
        with pytest.raises(ConfigError):
            query_prefix(fwd, 5, 1, p)
        with pytest.raises(ConfigError):
            query_prefix(fwd, 2, 5, p)


class TestCoverageAndDepths:
    @pytest.mark.parametrize("n", list(range(1, 17)) + [32, 33])
    def test_each_frame_exactly_once(self, n):
        seq = FrameSequence([Frame.filled(4, 4, 0.5)] * n)
        p = IdentityRemapProvider()
        fwd = build_table(seq, seq, p, "forward")
        rev = build_table(seq, seq, p, "reversed")
        bound = math.ceil(math.log2(n)) + 1 if n > 1 else 0
        for i in range(1, n + 1):
            depths = dict(query_depths(fwd, i, i))
            if i < n:
                suffix = query_depths(rev, n - i, i)
                assert not set(depths) & set(suffix)
                depths.update(suffix)
            assert set(depths) == set(range(1, n + 1))
            assert max(depths.values()) <= bound
            # moving away from i, depth is non-decreasing within each stored
            # chunk (it can drop by one at a chunk boundary, where the next
            # chunk's own home frame re-enters at depth 1)
            left = [depths[j] for j in range(i, 0, -1)]
            assert all(b <= a + 1 for a, b in zip(left, left[1:]))
            right = [depths[j] for j in range(i, n + 1)]
            assert all(b <= a + 1 for a, b in zip(right, right[1:]))


class TestBlendWindow:
    def test_radius_zero_identity(self):
        synth = dyadic_sequence(4)
        out = blend_window(synth, synth, 0, IdentityRemapProvider())
        for i in range(1, 5):
            assert np.array_equal(out[i].data, synth[i].data)

    def test_identical_frames_identity(self):
        f = dyadic_frame(0, 10, 10)
        seq = FrameSequence([f] * 5)
        p = RemapProvider(seq, cfg())
        out = blend_window(seq, seq, 2, p)
        for i in range(1, 6):
            assert np.array_equal(out[i].data, f.data)

    def test_brightness_offsets_closed_form(self):
        base = np.full((8, 8, 3), 0.5)
        synth = FrameSequence([Frame(base + o) for o in (-0.1, 0.0, 0.1)])
        guides = FrameSequence([Frame(base.copy())] * 3)
        out = blend_window(synth, guides, 1, RemapProvider(guides, cfg()))
        assert np.allclose(out[1].data, 0.45, atol=1e-12)  # mean(0.4, 0.5)
        assert np.allclose(out[2].data, 0.5, atol=1e-12)   # mean of all three
        assert np.allclose(out[3].data, 0.55, atol=1e-12)

    def test_negative_radius(self):
        seq = dyadic_sequence(2)
        with pytest.raises(ConfigError):
            blend_window(seq, seq, -1, IdentityRemapProvider())

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            blend_window(dyadic_sequence(3), dyadic_sequence(2), 1,
                         IdentityRemapProvider())


class TestBlendAll:
    def test_n1_identity(self):
        seq = dyadic_sequence(1)
        out = blend_all(seq, seq, IdentityRemapProvider())
        assert np.array_equal(out[1].data, seq[1].data)

    def test_identical_frames_exact(self):
        f = dyadic_frame(1, 10, 10)
        seq = FrameSequence([f] * 8)
        out = blend_all(seq, seq, RemapProvider(seq, cfg()))
        for i in range(1, 9):
            assert np.array_equal(out[i].data, f.data)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
    def test_matches_bruteforce_with_identity_remaps(self, n):
        # identity remaps make both paths the exact all-frames average
        synth = dyadic_sequence(n, seed0=200)
        fast = blend_all(synth, synth, IdentityRemapProvider())
        brute = blend_all_bruteforce(synth, synth, IdentityRemapProvider())
        for i in range(1, n + 1):
            assert np.array_equal(fast[i].data, brute[i].data)

    def test_static_jitter_matches_bruteforce(self):
        synth, guides = jitter_sequence(8, 16, 16, 0.05, seed=3)
        c = cfg()
        fast = blend_all(synth, guides, RemapProvider(guides, c))
        brute = blend_all_bruteforce(synth, guides, RemapProvider(guides, c))
        diff = np.mean([
            np.abs(fast[i].data - brute[i].data).mean() for i in range(1, 9)
        ])
        assert diff <= 0.02

    def test_window_covering_all_equals_bruteforce(self):
        synth, guides = jitter_sequence(5, 12, 12, 0.05, seed=4)
        c = cfg()
        win = blend_window(synth, guides, 4, RemapProvider(guides, c))
        brute = blend_all_bruteforce(synth, guides, RemapProvider(guides, c))
        for i in range(1, 6):
            assert np.max(np.abs(win[i].data - brute[i].data)) <= 1e-5


class TestOperationCounts:
    @pytest.mark.parametrize("n", list(range(1, 33)) + [64])
    def test_fast_estimation_bound(self, n):
        seq = FrameSequence([Frame.filled(2, 2, 0.5)] * n)
        p = IdentityRemapProvider()
        blend_all(seq, seq, p)
        assert p.nnf_estimations <= fast_count_bound(n)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 12])
    def test_bruteforce_count_exact(self, n):
        seq = FrameSequence([Frame.filled(2, 2, 0.5)] * n)
        p = IdentityRemapProvider()
        blend_all_bruteforce(seq, seq, p)
        assert p.nnf_estimations == n * (n - 1)
        assert p.remap_count == n * (n - 1)


class TestPairPlanners:
    @pytest.mark.parametrize("n,radius", [(1, 0), (4, 1), (6, 2), (8, 7)])
    def test_window_pairs_match_actual_requests(self, n, radius):
        seq = FrameSequence([Frame.filled(2, 2, 0.5)] * n)
        p = IdentityRemapProvider()
        blend_window(seq, seq, radius, p)
        assert p._seen == set(window_pairs(n, radius))

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 8, 9, 16, 33])
    def test_blend_all_pairs_match_actual_requests(self, n):
        seq = FrameSequence([Frame.filled(2, 2, 0.5)] * n)
        p = IdentityRemapProvider()
        blend_all(seq, seq, p)
        assert p._seen == set(blend_all_pairs(n))
