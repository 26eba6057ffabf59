"""Image types, PGM/PPM file I/O and colour-space reductions.

Grey and colour rasters are thin immutable wrappers around uint8 numpy
arrays. Binary netpbm (P5/P6) is the canonical on-disk format; the ASCII
variants (P2/P3) are accepted on read only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DataError,
    MalformedHeaderError,
    PnmError,
    TruncatedPayloadError,
    UnsupportedMaxvalError,
)

__all__ = [
    "GreyImage",
    "ColorImage",
    "HlsPixel",
    "HlsImage",
    "read_pgm",
    "read_ppm",
    "write_pgm",
    "write_ppm",
    "intensity",
    "to_hls",
    "hls_pixel",
    "histogram",
]


def _as_uint8_plane(data, what: str) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise DataError(f"{what} must be a 2-D raster, got shape {arr.shape}")
    if not (np.issubdtype(arr.dtype, np.integer) or arr.dtype == np.bool_):
        raise DataError(f"{what} values must be integers, got dtype {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise DataError(f"{what} values must lie in [0, 255]")
    out = arr.astype(np.uint8, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class GreyImage:
    """A grey-level raster: integer values in [0, 255] on a rectangular grid."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _as_uint8_plane(self.pixels, "GreyImage"))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GreyImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"GreyImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class ColorImage:
    """An RGB raster with three uint8 planes of identical dimensions."""

    pixels: np.ndarray  # shape (height, width, 3)

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DataError(f"ColorImage needs shape (h, w, 3), got {arr.shape}")
        if not (np.issubdtype(arr.dtype, np.integer) or arr.dtype == np.bool_):
            raise DataError(f"ColorImage values must be integers, got dtype {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise DataError("ColorImage values must lie in [0, 255]")
        out = arr.astype(np.uint8, copy=True)
        out.flags.writeable = False
        object.__setattr__(self, "pixels", out)

    @classmethod
    def from_planes(cls, r, g, b) -> "ColorImage":
        planes = [np.asarray(p) for p in (r, g, b)]
        if not (planes[0].shape == planes[1].shape == planes[2].shape):
            raise DataError("r, g, b planes must share dimensions")
        return cls(np.stack(planes, axis=-1))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def r(self) -> np.ndarray:
        return self.pixels[:, :, 0]

    @property
    def g(self) -> np.ndarray:
        return self.pixels[:, :, 1]

    @property
    def b(self) -> np.ndarray:
        return self.pixels[:, :, 2]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ColorImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"ColorImage({self.width}x{self.height})"


class HlsPixel(NamedTuple):
    """Hue in [0, 359], luminance and saturation in [0, 255]."""

    h: int
    l: int
    s: int


@dataclass(frozen=True, eq=False)
class HlsImage:
    """Per-pixel HLS components; hue needs uint16 for the [0, 359] range."""

    h: np.ndarray
    l: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        if not (self.h.shape == self.l.shape == self.s.shape):
            raise DataError("HLS planes must share dimensions")

    @property
    def width(self) -> int:
        return self.h.shape[1]

    @property
    def height(self) -> int:
        return self.h.shape[0]


# --- netpbm -----------------------------------------------------------------

_WHITESPACE = b" \t\n\r\x0b\x0c"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token, skipping whitespace and # comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise MalformedHeaderError("unexpected end of file in header")
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _parse_header(data: bytes, magics: tuple[bytes, ...]) -> tuple[bytes, int, int, int, int]:
    magic, pos = _next_token(data, 0)
    if magic not in magics:
        raise MalformedHeaderError(f"bad magic {magic!r}, expected one of {magics}")
    dims = []
    for _ in range(3):
        tok, pos = _next_token(data, pos)
        if not tok.isdigit():
            raise MalformedHeaderError(f"non-numeric header field {tok!r}")
        dims.append(int(tok))
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"bad dimensions {width}x{height}")
    if maxval > 255:
        raise UnsupportedMaxvalError(f"maxval {maxval} exceeds 255")
    if maxval < 1:
        raise MalformedHeaderError(f"bad maxval {maxval}")
    return magic, width, height, maxval, pos


def _read_binary_raster(data: bytes, pos: int, count: int) -> np.ndarray:
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise MalformedHeaderError("missing whitespace after maxval")
    pos += 1
    raster = data[pos : pos + count]
    if len(raster) < count:
        raise TruncatedPayloadError(f"raster holds {len(raster)} bytes, expected {count}")
    return np.frombuffer(raster, dtype=np.uint8)


def _read_ascii_raster(data: bytes, pos: int, count: int, maxval: int) -> np.ndarray:
    values = np.empty(count, dtype=np.uint8)
    for i in range(count):
        try:
            tok, pos = _next_token(data, pos)
        except MalformedHeaderError:
            raise TruncatedPayloadError(f"raster holds {i} samples, expected {count}") from None
        if not tok.isdigit():
            raise PnmError(f"non-numeric sample {tok!r}")
        v = int(tok)
        if v > maxval:
            raise PnmError(f"sample value {v} exceeds maxval {maxval}")
        values[i] = v
    return values


def read_pgm(path) -> GreyImage:
    """Read a P5 (binary) or P2 (ASCII) PGM file with maxval <= 255."""
    data = open(path, "rb").read()
    magic, width, height, maxval, pos = _parse_header(data, (b"P5", b"P2"))
    count = width * height
    if magic == b"P5":
        flat = _read_binary_raster(data, pos, count)
    else:
        flat = _read_ascii_raster(data, pos, count, maxval)
    return GreyImage(flat.reshape(height, width))


def read_ppm(path) -> ColorImage:
    """Read a P6 (binary) or P3 (ASCII) PPM file with maxval <= 255."""
    data = open(path, "rb").read()
    magic, width, height, maxval, pos = _parse_header(data, (b"P6", b"P3"))
    count = width * height * 3
    if magic == b"P6":
        flat = _read_binary_raster(data, pos, count)
    else:
        flat = _read_ascii_raster(data, pos, count, maxval)
    return ColorImage(flat.reshape(height, width, 3))


def write_pgm(img: GreyImage, path) -> None:
    """Write canonical binary PGM: single-whitespace header, maxval 255."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.pixels.tobytes())


def write_ppm(img: ColorImage, path) -> None:
    """Write canonical binary PPM: single-whitespace header, maxval 255."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(img.pixels.tobytes())


# --- colour reductions ------------------------------------------------------

def intensity(img: ColorImage) -> GreyImage:
    """Average the three channels, rounding half up.

    (r+g+b)/3 never lands exactly on .5, so integer round-half-up reduces
    to floor((2(r+g+b)+3)/6).
    """
    s = img.pixels.astype(np.int32).sum(axis=2)
    return GreyImage(((2 * s + 3) // 6).astype(np.uint8))


def hls_pixel(r: int, g: int, b: int) -> HlsPixel:
    """Double-hexcone HLS of one RGB pixel, integer channels in [0, 255]."""
    mx = max(r, g, b)
    mn = min(r, g, b)
    l_out = (mx + mn + 1) // 2  # round-half-up of 255*(max+min)/2 on unit scale
    if mx == mn:
        return HlsPixel(0, l_out, 0)
    d = mx - mn
    denom = (mx + mn) if (mx + mn) <= 255 else (510 - mx - mn)
    s_out = int(255.0 * d / denom + 0.5)
    if mx == r:
        hue = (60.0 * (g - b) / d) % 360.0
    elif mx == g:
        hue = 60.0 * (b - r) / d + 120.0
    else:
        hue = 60.0 * (r - g) / d + 240.0
    h_out = int(hue + 0.5) % 360
    return HlsPixel(h_out, l_out, s_out)


def to_hls(img: ColorImage) -> HlsImage:
    """Double-hexcone HLS for every pixel; achromatic hue canonicalized to 0."""
    r = img.r.astype(np.int64)
    g = img.g.astype(np.int64)
    b = img.b.astype(np.int64)
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    d = mx - mn
    chroma = d > 0

    l_plane = ((mx + mn + 1) // 2).astype(np.uint8)

    denom = np.where(mx + mn <= 255, mx + mn, 510 - mx - mn)
    denom_safe = np.where(chroma, denom, 1)
    s_plane = np.where(chroma, np.floor(255.0 * d / denom_safe + 0.5), 0).astype(np.uint8)

    d_safe = np.where(chroma, d, 1).astype(np.float64)
    hue = np.where(
        mx == r,
        (60.0 * (g - b) / d_safe) % 360.0,
        np.where(mx == g, 60.0 * (b - r) / d_safe + 120.0, 60.0 * (r - g) / d_safe + 240.0),
    )
    h_plane = np.where(chroma, np.floor(hue + 0.5).astype(np.int64) % 360, 0).astype(np.uint16)

    for plane in (h_plane, l_plane, s_plane):
        plane.flags.writeable = False
    return HlsImage(h_plane, l_plane, s_plane)


def histogram(values, bins: int, vmax: int = 255) -> np.ndarray:
    """Normalized frequencies over `bins` uniform-width bins spanning [0, vmax].

    The last bin is closed, so the bin index of value v is
    min(bins-1, v*bins // vmax). Accepts a GreyImage, an array or a sequence.
    """
    if bins < 1:
        raise DataError(f"bins must be >= 1, got {bins}")
    if isinstance(values, GreyImage):
        values = values.pixels
    arr = np.asarray(values).ravel()
    if arr.size == 0:
        raise DataError("histogram of empty input")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() > vmax:
        raise DataError(f"histogram values must lie in [0, {vmax}]")
    idx = np.minimum(arr * bins // vmax, bins - 1) if vmax > 0 else np.zeros_like(arr)
    counts = np.bincount(idx, minlength=bins).astype(np.float64)
    return counts / arr.size
