"""Shared fixtures: deterministic frame builders and on-disk sequences."""

import numpy as np
import pytest

from patchblend.frames import Frame, FrameSequence
from patchblend.imageio import save_sequence


def dyadic_frame(seed: int, height: int, width: int, denom: int = 64) -> Frame:
    """Random frame whose intensities are exact multiples of 1/denom.

    Sums and averages of such values over power-of-two counts are exact in
    float arithmetic, which makes cross-implementation comparisons bit-exact.
    """
    rng = np.random.default_rng(seed)
    ints = rng.integers(0, denom + 1, size=(height, width, 3))
    return Frame(ints.astype(np.float64) / denom)


def random_frame(seed: int, height: int, width: int) -> Frame:
    rng = np.random.default_rng(seed)
    return Frame(rng.random((height, width, 3)))


def jitter_sequence(n: int, height: int, width: int, sigma: float,
                    seed: int = 0):
    """Static random scene plus a per-frame constant brightness offset.

    Returns (synth, guides): guides are the clean static scene repeated,
    synth carries the jitter.
    """
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.2, 0.8, size=(height, width, 3))
    offsets = rng.normal(0.0, sigma, size=n)
    synth = FrameSequence([Frame(np.clip(base + o, 0.0, 1.0)) for o in offsets])
    guides = FrameSequence([Frame(base.copy()) for _ in range(n)])
    return synth, guides


@pytest.fixture
def ppm_dir_factory(tmp_path):
    """Write a FrameSequence as numbered PPM files; returns the directory."""
    made = [0]

    def write(seq):
        d = tmp_path / f"seq{made[0]}"
        made[0] += 1
        save_sequence(seq, str(d))
        return str(d)

    return write
