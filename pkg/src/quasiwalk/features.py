"""Aesthetic feature metrics for animation frames.

Four per-image scores:

* ``benford_feature``: deviation of the sorted 9-bin luminance histogram from
  Benford's first-digit law, scaled to [0, 1]; higher means less natural.
* ``global_contrast_factor``: Matkovic et al. weighted sum of mean local
  lightness contrast over nine superpixel resolutions.
* ``colorfulness``: Hasler & Suesstrunk opponent-channel colorfulness on
  0-255 channels.
* ``mean_hue``: arithmetic mean of per-pixel HSV hue in degrees.
"""

from __future__ import annotations

import io
from collections.abc import Iterable
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from ._atomic import atomic_write
from .imaging import ImageBuffer, rgb_to_hsv

BENFORD = np.log10(1.0 + 1.0 / np.arange(1, 10))

# Rec. 709 luma weights
LUMA = np.array([0.2126, 0.7152, 0.0722])

GCF_SUPERPIXELS = (1, 2, 4, 8, 16, 25, 50, 100, 200)
GCF_GAMMA = 2.2


def gcf_weights() -> np.ndarray:
    x = np.arange(1, 10) / 9.0
    return (-0.406385 * x + 0.334573) * x + 0.0877526


def luminance(img: ImageBuffer) -> np.ndarray:
    return img.pixels.astype(np.float64) @ LUMA


def luminance_histogram(img: ImageBuffer) -> np.ndarray:
    """Counts of luma in nine equal-width bins over [0, 255]."""
    bins = np.minimum(np.floor(luminance(img) * 9.0 / 255.0), 8).astype(np.int64)
    return np.bincount(bins.ravel(), minlength=9)


def benford_max_deviation() -> float:
    # worst case: all mass in a single bin, i.e. sorted proportions (1, 0, ..., 0)
    return float(2.0 * (1.0 - BENFORD[0]))


def benford_deviation(proportions) -> float:
    """Scaled deviation of histogram proportions (any order) from Benford's law."""
    q = np.sort(np.asarray(proportions, dtype=np.float64))[::-1]
    d = float(np.abs(q - BENFORD).sum())
    return min(max(d / benford_max_deviation(), 0.0), 1.0)


def benford_feature(img: ImageBuffer) -> float:
    counts = luminance_histogram(img)
    return benford_deviation(counts / counts.sum())


def _mean_local_contrast(lightness: np.ndarray) -> float:
    m, n = lightness.shape
    total = np.zeros((m, n))
    count = np.zeros((m, n))
    dv = np.abs(np.diff(lightness, axis=0))
    dh = np.abs(np.diff(lightness, axis=1))
    total[:-1, :] += dv
    total[1:, :] += dv
    count[:-1, :] += 1
    count[1:, :] += 1
    total[:, :-1] += dh
    total[:, 1:] += dh
    count[:, :-1] += 1
    count[:, 1:] += 1
    local = np.divide(total, count, out=np.zeros_like(total), where=count > 0)
    return float(local.mean())


def gcf_contrasts(img: ImageBuffer) -> np.ndarray:
    """Mean local contrast at each of the nine superpixel resolutions.

    Superpixels average linear luminance over non-overlapping blocks anchored
    at the top-left; trailing partial blocks are dropped. A resolution with
    no complete block contributes 0.
    """
    linear = (luminance(img) / 255.0) ** GCF_GAMMA
    m, n = linear.shape
    out = np.zeros(len(GCF_SUPERPIXELS))
    for i, s in enumerate(GCF_SUPERPIXELS):
        mm, nn = m // s, n // s
        if mm == 0 or nn == 0:
            continue
        blocks = linear[: mm * s, : nn * s].reshape(mm, s, nn, s).mean(axis=(1, 3))
        out[i] = _mean_local_contrast(100.0 * np.sqrt(blocks))
    return out


def global_contrast_factor(img: ImageBuffer) -> float:
    return float(gcf_weights() @ gcf_contrasts(img))


def colorfulness(img: ImageBuffer) -> float:
    px = img.pixels.astype(np.float64)
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    rg = r - g
    yb = 0.5 * (r + g) - b
    spread = np.sqrt(rg.var() + yb.var())
    magnitude = np.sqrt(rg.mean() ** 2 + yb.mean() ** 2)
    return float(spread + 0.3 * magnitude)


def mean_hue(img: ImageBuffer) -> float:
    h, _, _ = rgb_to_hsv(img.pixels)
    return float(h.mean())


@dataclass(frozen=True)
class FeatureRecord:
    step: int
    benford: float
    gcf: float
    colorfulness: float
    mean_hue: float

    @classmethod
    def of(cls, step: int, img: ImageBuffer) -> FeatureRecord:
        return cls(
            step,
            benford_feature(img),
            global_contrast_factor(img),
            colorfulness(img),
            mean_hue(img),
        )

    def values(self) -> tuple[float, float, float, float]:
        return astuple(self)[1:]


def feature_series(snapshots: Iterable[tuple[int, ImageBuffer]]) -> list[FeatureRecord]:
    return [FeatureRecord.of(step, img) for step, img in snapshots]


CSV_HEADER = "step,benford,gcf,colorfulness,mean_hue"


def format_csv(records: Iterable[FeatureRecord]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        buf.write(
            f"{r.step},{r.benford:.6f},{r.gcf:.6f},{r.colorfulness:.6f},{r.mean_hue:.6f}\n"
        )
    return buf.getvalue()


def write_csv(records: Iterable[FeatureRecord], path) -> None:
    """Write the feature series as LF-terminated CSV, atomically."""
    atomic_write(path, format_csv(records).encode("ascii"))


def read_csv(path) -> list[FeatureRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing header {CSV_HEADER!r}")
    out = []
    for line in lines[1:]:
        step, *vals = line.split(",")
        out.append(FeatureRecord(int(step), *map(float, vals)))
    return out
