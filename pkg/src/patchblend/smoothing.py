"""Least-squares polynomial (Savitzky-Golay) smoothing of keypoint tracks."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UntrackableError


def _check_params(window: int, order: int) -> None:
    if window < 3 or window % 2 == 0:
        raise ConfigError(f"window must be an odd integer >= 3, got {window}")
    if not 0 <= order < window:
        raise ConfigError(f"order must satisfy 0 <= order < window, got {order}")


def sg_coefficients(window: int, order: int) -> np.ndarray:
    """Convolution weights of the centered least-squares polynomial fit.

    The smoothed center value is the fitted polynomial evaluated at the
    window center, which is a fixed linear combination of the samples.
    """
    _check_params(window, order)
    half = window // 2
    pos = np.arange(-half, half + 1, dtype=np.float64)
    vander = np.vander(pos, order + 1, increasing=True)
    # center row of the hat matrix A (A^T A)^-1 A^T; position 0 selects the
    # constant coefficient, so the weights are the first row of the
    # pseudo-inverse.
    return np.linalg.pinv(vander)[0]


def _fit_at(values: np.ndarray, i: int, window: int, order: int) -> float:
    """Value of the order-`order` least-squares fit over the window around i,
    truncated at the series ends, evaluated at i."""
    n = values.size
    half = window // 2
    j0, j1 = max(0, i - half), min(n - 1, i + half)
    pos = np.arange(j0, j1 + 1, dtype=np.float64) - i
    vander = np.vander(pos, order + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(vander, values[j0 : j1 + 1], rcond=None)
    return float(coeffs[0])


def smooth_series(values: np.ndarray, window: int, order: int) -> np.ndarray:
    """Smooth a 1-D series; interior via convolution weights, boundaries by
    refitting the same polynomial on the truncated window."""
    _check_params(window, order)
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    half = window // 2
    out = np.empty(n)
    weights = sg_coefficients(window, order)
    for i in range(n):
        if half <= i < n - half:
            out[i] = float(weights @ values[i - half : i + half + 1])
        else:
            out[i] = _fit_at(values, i, window, order)
    return out


@dataclass
class KeypointTrack:
    """Per-frame positions and confidences of one tracked keypoint."""

    keypoint_id: int
    x: np.ndarray
    y: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)
        if not (self.x.size == self.y.size == self.confidence.size):
            raise ConfigError("track series lengths differ")
        if np.any(self.confidence < 0) or np.any(self.confidence > 1):
            raise ConfigError("confidences must lie in [0, 1]")

    def __len__(self) -> int:
        return self.x.size


def _interpolate_low_confidence(values: np.ndarray, good: np.ndarray) -> np.ndarray:
    """Replace low-confidence samples by linear interpolation between the
    nearest confident neighbors; end gaps hold the nearest confident value."""
    idx = np.nonzero(good)[0]
    out = values.copy()
    bad = np.nonzero(~good)[0]
    out[bad] = np.interp(bad, idx, values[idx])
    return out


def smooth_track(track: KeypointTrack, window: int = 9, order: int = 2,
                 conf_threshold: float = 0.1) -> KeypointTrack:
    """Smooth a keypoint's coordinates over time.

    Samples below the confidence threshold are interpolated away before
    smoothing and reported with confidence 0 in the output.
    """
    _check_params(window, order)
    good = track.confidence >= conf_threshold
    if not np.any(good):
        raise UntrackableError(
            f"keypoint {track.keypoint_id}: no samples at or above "
            f"confidence {conf_threshold}"
        )
    xs = _interpolate_low_confidence(track.x, good)
    ys = _interpolate_low_confidence(track.y, good)
    conf = np.where(good, track.confidence, 0.0)
    return KeypointTrack(
        track.keypoint_id,
        smooth_series(xs, window, order),
        smooth_series(ys, window, order),
        conf,
    )


CSV_HEADER = ["frame", "keypoint", "x", "y", "confidence"]


def read_tracks_csv(path: str) -> list[KeypointTrack]:
    rows: dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ConfigError(
                f"{path}: expected header {','.join(CSV_HEADER)}, "
                f"got {reader.fieldnames}"
            )
        for rec in reader:
            rows.setdefault(int(rec["keypoint"]), []).append(
                (int(rec["frame"]), float(rec["x"]), float(rec["y"]),
                 float(rec["confidence"]))
            )
    tracks = []
    for kp in sorted(rows):
        series = sorted(rows[kp])
        xs = np.array([s[1] for s in series])
        ys = np.array([s[2] for s in series])
        conf = np.array([s[3] for s in series])
        tracks.append(KeypointTrack(kp, xs, ys, conf))
    return tracks


def write_tracks_csv(tracks: list[KeypointTrack], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for track in tracks:
            for i in range(len(track)):
                writer.writerow([
                    i + 1, track.keypoint_id,
                    repr(float(track.x[i])), repr(float(track.y[i])),
                    repr(float(track.confidence[i])),
                ])
