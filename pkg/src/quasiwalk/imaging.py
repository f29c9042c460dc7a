"""Image buffers, PNG I/O, HSV hue rotation and coverage helpers."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ._atomic import atomic_write


class ImageError(Exception):
    """Base class for image loading/saving problems."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


class ImageNotFoundError(ImageError):
    pass


class UnsupportedImageError(ImageError):
    pass


class ImageDecodeError(ImageError):
    pass


class ImageWriteError(ImageError):
    pass


@dataclass(eq=False)
class ImageBuffer:
    """An m x n RGB image stored as a ``(m, n, 3)`` uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected an (m, n, 3) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must have at least one row and one column")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise ValueError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        self.pixels = np.ascontiguousarray(px)

    @classmethod
    def solid(cls, m: int, n: int, rgb) -> ImageBuffer:
        px = np.empty((m, n, 3), dtype=np.uint8)
        px[...] = np.asarray(rgb, dtype=np.uint8)
        return cls(px)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[0], self.pixels.shape[1]

    def copy(self) -> ImageBuffer:
        return ImageBuffer(self.pixels.copy())

    def __getitem__(self, pos) -> tuple[int, int, int]:
        r, g, b = self.pixels[pos[0], pos[1]]
        return int(r), int(g), int(b)

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(
            self.pixels, other.pixels
        )

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()


_ACCEPTED_MODES = {"RGB", "RGBA", "L", "LA", "P", "PA"}


def load_png(path) -> ImageBuffer:
    """Read an 8-bit PNG as opaque RGB.

    Alpha is dropped (not composited) and grayscale/palette images are
    expanded to RGB. Anything deeper than 8 bits per channel is rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageNotFoundError(path, "no such file")
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise UnsupportedImageError(path, f"not a PNG file ({im.format})")
            if im.mode not in _ACCEPTED_MODES:
                raise UnsupportedImageError(
                    path, f"unsupported pixel mode {im.mode!r}; need 8-bit RGB(A) or grayscale"
                )
            im.load()
            rgb = im.convert("RGB")
            px = np.array(rgb, dtype=np.uint8)
    except ImageError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageDecodeError(path, f"cannot decode PNG: {exc}") from exc
    return ImageBuffer(px)


def save_png(buf: ImageBuffer, path) -> None:
    """Write ``buf`` as an 8-bit RGB PNG, atomically (temp file + rename)."""
    data = io.BytesIO()
    Image.fromarray(buf.pixels).save(data, format="PNG")
    try:
        atomic_write(path, data.getvalue())
    except OSError as exc:
        raise ImageWriteError(path, f"cannot write: {exc.strerror or exc}") from exc


def rgb_to_hsv(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexcone RGB -> HSV on a ``(..., 3)`` array of 0..255 values.

    Returns hue in degrees [0, 360), saturation and value in [0, 1].
    Achromatic pixels (max == min) get hue 0.
    """
    rgb = np.asarray(pixels, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = v - mn
    s = np.where(v > 0, delta / np.where(v > 0, v, 1.0), 0.0)

    safe = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(v)
    red_max = (v == r) & (delta > 0)
    green_max = (v == g) & (delta > 0) & ~red_max
    blue_max = (delta > 0) & ~red_max & ~green_max
    h = np.where(red_max, np.mod((g - b) / safe, 6.0), h)
    h = np.where(green_max, (b - r) / safe + 2.0, h)
    h = np.where(blue_max, (r - g) / safe + 4.0, h)
    h = h * 60.0
    h = np.where(h >= 360.0, h - 360.0, h)
    return h, s, v


def hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_hsv`; returns uint8 RGB rounded half-up."""
    h = np.mod(np.asarray(h, dtype=np.float64), 360.0) / 60.0
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    sector = np.floor(h).astype(np.int64) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))

    r = np.choose(sector, [v, q, p, p, t, v])
    g = np.choose(sector, [t, v, v, q, p, p])
    b = np.choose(sector, [p, p, t, v, v, q])
    out = np.stack([r, g, b], axis=-1) * 255.0
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class HueShiftSpec:
    rotation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rotation", float(self.rotation) % 360.0)


def recolor(buf: ImageBuffer, spec: HueShiftSpec) -> ImageBuffer:
    """Rotate every pixel's hue by ``spec.rotation`` degrees.

    Saturation and value are kept; gray pixels are fixed points.
    """
    h, s, v = rgb_to_hsv(buf.pixels)
    return ImageBuffer(hsv_to_rgb(h + spec.rotation, s, v))


def coverage(painted: np.ndarray) -> float:
    painted = np.asarray(painted, dtype=bool)
    return float(np.count_nonzero(painted)) / painted.size


def changed_pixels(a: ImageBuffer, b: ImageBuffer) -> int:
    """Number of pixel positions where two equally sized images differ."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(np.any(a.pixels != b.pixels, axis=-1)))


def parse_hex_color(text: str) -> tuple[int, int, int]:
    s = text.strip().lstrip("#")
    if len(s) != 6:
        raise ValueError(f"expected #RRGGBB, got {text!r}")
    try:
        return int(s[0:2], 16), int(s[2:4], 16), int(s[4:6], 16)
    except ValueError:
        raise ValueError(f"expected #RRGGBB, got {text!r}") from None


# Stand-ins for the painting inputs. Deterministic, structure-rich gradients.

def _grid(m, n):
    rows = np.arange(m, dtype=np.float64)[:, None] / max(m - 1, 1)
    cols = np.arange(n, dtype=np.float64)[None, :] / max(n - 1, 1)
    return np.broadcast_to(rows, (m, n)), np.broadcast_to(cols, (m, n))


def _to_buffer(r, g, b):
    px = np.stack([r, g, b], axis=-1)
    return ImageBuffer(np.clip(np.floor(px * 255.0 + 0.5), 0, 255).astype(np.uint8))


def _warm(m, n):
    y, x = _grid(m, n)
    return _to_buffer(0.55 + 0.45 * x, 0.15 + 0.7 * y * (1 - x), 0.2 * (1 - y))


def _cool(m, n):
    y, x = _grid(m, n)
    return _to_buffer(0.1 * x * y, 0.25 + 0.5 * y, 0.45 + 0.55 * (1 - x))


def _rings(m, n):
    y, x = _grid(m, n)
    d = np.hypot(x - 0.5, y - 0.5)
    band = 0.5 + 0.5 * np.cos(d * 6 * np.pi)
    return _to_buffer(0.9 * band + 0.1 * x, 0.3 + 0.4 * (1 - band), 0.2 + 0.6 * y)


def _bands(m, n):
    y, x = _grid(m, n)
    stripe = (np.floor(x * 8) % 2).astype(np.float64)
    return _to_buffer(0.2 + 0.6 * stripe * y, 0.6 * (1 - y) + 0.2, 0.3 + 0.5 * stripe)


SYNTHETIC_IMAGES = {"warm": _warm, "cool": _cool, "rings": _rings, "bands": _bands}


def synthetic(name: str, m: int, n: int) -> ImageBuffer:
    try:
        fn = SYNTHETIC_IMAGES[name]
    except KeyError:
        raise ValueError(
            f"unknown synthetic image {name!r}; choose from {sorted(SYNTHETIC_IMAGES)}"
        ) from None
    return fn(m, n)
