"""Flat grey-scale erosion, dilation, opening and closing.

Structuring elements come in three families: hexagon (6-connectivity
emulated on the square raster with row-parity-alternating offsets),
square (8-neighbourhood) and diamond (4-neighbourhood). A size-r element
is the r-fold dilation of the unit neighbourhood, so sizes compose
additively and openings of increasing size form a sieve.

Border rule: the neighbourhood is clamped to the image domain; pixels
outside the frame are ignored, never padded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .imagecore import GreyImage

__all__ = [
    "FAMILIES",
    "StructuringElement",
    "se_family",
    "erode",
    "dilate",
    "opening",
    "closing",
    "volume",
    "area_nonzero",
]

FAMILIES = ("hexagon", "square", "diamond")

_ALIASES = {
    "hex": "hexagon",
    "hexagon": "hexagon",
    "square": "square",
    "diamond": "diamond",
}

# (dy, dx) neighbour offsets, origin excluded (it is applied implicitly).
_SQUARE = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
_DIAMOND = ((-1, 0), (0, -1), (0, 1), (1, 0))
_HEX_COMMON = ((-1, 0), (0, -1), (0, 1), (1, 0))
_HEX_EVEN = ((-1, -1), (1, -1))  # extra diagonals when the centre row is even
_HEX_ODD = ((-1, 1), (1, 1))


def se_family(name: str) -> str:
    """Canonicalize a family name, accepting the 'hex' shorthand."""
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise DataError(f"unknown structuring-element family {name!r}") from None


@dataclass(frozen=True)
class StructuringElement:
    """A size-parameterized probe shape; size 0 is the single origin pixel."""

    family: str
    size: int

    def __post_init__(self):
        object.__setattr__(self, "family", se_family(self.family))
        if not isinstance(self.size, (int, np.integer)) or self.size < 0:
            raise DataError(f"size must be a non-negative integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))


def _fold_offset(acc: np.ndarray, src: np.ndarray, dy: int, dx: int, op, parity=None) -> None:
    """acc[y,x] = op(acc[y,x], src[y+dy, x+dx]) where the shift stays in frame."""
    h, w = src.shape
    y0, y1 = max(0, -dy), min(h, h - dy)
    x0, x1 = max(0, -dx), min(w, w - dx)
    if parity is not None and y0 % 2 != parity:
        y0 += 1
    if y0 >= y1 or x0 >= x1:
        return
    step = 1 if parity is None else 2
    dst = acc[y0:y1:step, x0:x1]
    op(dst, src[y0 + dy : y1 + dy : step, x0 + dx : x1 + dx], out=dst)


def _unit_step(arr: np.ndarray, family: str, op) -> np.ndarray:
    acc = arr.copy()
    if family == "square":
        offsets = _SQUARE
    elif family == "diamond":
        offsets = _DIAMOND
    else:
        offsets = _HEX_COMMON
    for dy, dx in offsets:
        _fold_offset(acc, arr, dy, dx, op)
    if family == "hexagon":
        for dy, dx in _HEX_EVEN:
            _fold_offset(acc, arr, dy, dx, op, parity=0)
        for dy, dx in _HEX_ODD:
            _fold_offset(acc, arr, dy, dx, op, parity=1)
    return acc


def erode_raw(arr: np.ndarray, family: str, size: int) -> np.ndarray:
    """Erosion on a raw array; exposed for in-package reuse on binary masks."""
    out = arr if size else arr.copy()
    for _ in range(size):
        out = _unit_step(out, family, np.minimum)
    return out


def dilate_raw(arr: np.ndarray, family: str, size: int) -> np.ndarray:
    out = arr if size else arr.copy()
    for _ in range(size):
        out = _unit_step(out, family, np.maximum)
    return out


def erode(f: GreyImage, se: StructuringElement) -> GreyImage:
    """Minimum of f over the size-r neighbourhood of each pixel."""
    return GreyImage(erode_raw(f.pixels, se.family, se.size))


def dilate(f: GreyImage, se: StructuringElement) -> GreyImage:
    """Maximum of f over the size-r neighbourhood (all families are symmetric)."""
    return GreyImage(dilate_raw(f.pixels, se.family, se.size))


def opening(f: GreyImage, se: StructuringElement) -> GreyImage:
    """Erosion followed by dilation: anti-extensive, increasing, idempotent."""
    return GreyImage(dilate_raw(erode_raw(f.pixels, se.family, se.size), se.family, se.size))


def closing(f: GreyImage, se: StructuringElement) -> GreyImage:
    """Dilation followed by erosion: extensive, increasing, idempotent."""
    return GreyImage(erode_raw(dilate_raw(f.pixels, se.family, se.size), se.family, se.size))


def volume(f: GreyImage) -> int:
    """Sum of all pixel values."""
    return int(f.pixels.astype(np.int64).sum())


def area_nonzero(f: GreyImage) -> int:
    """Count of pixels with a non-zero value."""
    return int(np.count_nonzero(f.pixels))
