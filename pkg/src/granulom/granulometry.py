"""Granulometric curves and size-intensity diagrams.

The opening curve value at size r is the normalized volume removed by an
opening of that size; it is a cumulative size distribution: zero at r=0,
non-decreasing, at most 1. The closing curve mirrors it, normalized by
the grey-level headroom above the image.

The size-intensity diagram couples size and grey level: cell (r, k) is
the pixel count of the binary opening of size r applied to the threshold
set {f >= k}. Column r=0 is therefore the survival count of the grey
histogram, and each fixed-k row is the binary granulometric area sequence
of that threshold set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .imagecore import GreyImage
from .morphology import dilate_raw, erode_raw, se_family

__all__ = [
    "GranulometryCurve",
    "SizeIntensityDiagram",
    "granulometry_openings",
    "granulometry_closings",
    "size_intensity",
    "export_curve",
    "read_curve_csv",
    "read_diagram_csv",
]


@dataclass(frozen=True)
class GranulometryCurve:
    family: str
    kind: str  # "openings" | "closings"
    sizes: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.sizes) != len(self.values):
            raise DataError("sizes and values must align")
        if self.kind not in ("openings", "closings"):
            raise DataError(f"unknown curve kind {self.kind!r}")


@dataclass(frozen=True, eq=False)
class SizeIntensityDiagram:
    family: str
    r_max: int
    k_max: int
    levels: tuple[int, ...]  # grey levels actually sampled, ascending
    cells: np.ndarray = field(repr=False)  # shape (r_max+1, len(levels)), int64

    def value(self, r: int, k: int) -> int:
        return int(self.cells[r, self.levels.index(k)])


def _opened_volumes(arr: np.ndarray, family: str, r_max: int) -> list[int]:
    """Volumes of openings of size 0..r_max, reusing the growing erosion."""
    vols = [int(arr.astype(np.int64).sum())]
    eroded = arr
    for r in range(1, r_max + 1):
        eroded = erode_raw(eroded, family, 1)
        opened = dilate_raw(eroded, family, r)
        vols.append(int(opened.astype(np.int64).sum()))
    return vols


def granulometry_openings(f: GreyImage, family: str, r_max: int) -> GranulometryCurve:
    """Cumulative size distribution by openings of increasing size."""
    family = se_family(family)
    if r_max < 0:
        raise DataError("r_max must be >= 0")
    total = int(f.pixels.astype(np.int64).sum())
    if total == 0:
        raise DataError("opening granulometry of an all-zero image (zero volume)")
    vols = _opened_volumes(f.pixels, family, r_max)
    values = tuple((total - v) / total for v in vols)
    return GranulometryCurve(family, "openings", tuple(range(r_max + 1)), values)


def granulometry_closings(f: GreyImage, family: str, r_max: int) -> GranulometryCurve:
    """Mirror curve by closings, normalized by the headroom above f."""
    family = se_family(family)
    if r_max < 0:
        raise DataError("r_max must be >= 0")
    total = int(f.pixels.astype(np.int64).sum())
    headroom = 255 * f.width * f.height - total
    if headroom == 0:
        raise DataError("closing granulometry of a fully saturated image")
    values = [0.0]
    dilated = f.pixels
    for r in range(1, r_max + 1):
        dilated = dilate_raw(dilated, family, 1)
        closed = erode_raw(dilated, family, r)
        values.append((int(closed.astype(np.int64).sum()) - total) / headroom)
    return GranulometryCurve(family, "closings", tuple(range(r_max + 1)), tuple(values))


def size_intensity(
    f: GreyImage, family: str, r_max: int, k_max: int = 255, k_step: int = 1
) -> SizeIntensityDiagram:
    """Areas of binary openings of every threshold set {f >= k}."""
    family = se_family(family)
    if r_max < 0:
        raise DataError("r_max must be >= 0")
    if not 1 <= k_max <= 255:
        raise DataError(f"k_max must lie in [1, 255], got {k_max}")
    if k_step < 1:
        raise DataError("k_step must be >= 1")
    levels = tuple(range(1, k_max + 1, k_step))
    cells = np.zeros((r_max + 1, len(levels)), dtype=np.int64)

    # {f >= k} only changes when k crosses a value present in the image, so
    # levels sharing the same effective threshold share one column.
    present = np.unique(f.pixels)
    for col, k in enumerate(levels):
        pos = np.searchsorted(present, k)
        if pos == len(present):
            continue  # empty threshold set, column stays zero
        if col and levels[col - 1] > (int(present[pos - 1]) if pos else -1):
            cells[:, col] = cells[:, col - 1]  # same effective threshold
            continue
        mask = (f.pixels >= k).astype(np.uint8)
        cells[0, col] = int(np.count_nonzero(mask))
        eroded = mask
        for r in range(1, r_max + 1):
            eroded = erode_raw(eroded, family, 1)
            if not eroded.any():
                break
            opened = dilate_raw(eroded, family, r)
            cells[r, col] = int(np.count_nonzero(opened))
    return SizeIntensityDiagram(family, r_max, k_max, levels, cells)


def export_curve(obj, path) -> None:
    """Write a curve as r,value rows or a diagram as r,k,count rows (CSV)."""
    if isinstance(obj, GranulometryCurve):
        lines = ["r,value"]
        lines += [f"{r},{float(v)!r}" for r, v in zip(obj.sizes, obj.values)]
    elif isinstance(obj, SizeIntensityDiagram):
        lines = ["r,k,count"]
        for r in range(obj.r_max + 1):
            for col, k in enumerate(obj.levels):
                lines.append(f"{r},{k},{int(obj.cells[r, col])}")
    else:
        raise DataError(f"cannot export object of type {type(obj).__name__}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curve_csv(path) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Parse an exported curve back into (sizes, values)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "r,value":
        raise DataError("not a granulometry curve CSV")
    sizes, values = [], []
    for ln in lines[1:]:
        r_txt, v_txt = ln.split(",")
        sizes.append(int(r_txt))
        values.append(float(v_txt))
    return tuple(sizes), tuple(values)


def read_diagram_csv(path) -> tuple[tuple[int, int, int], ...]:
    """Parse an exported diagram back into (r, k, count) triples."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "r,k,count":
        raise DataError("not a size-intensity CSV")
    out = []
    for ln in lines[1:]:
        r_txt, k_txt, c_txt = ln.split(",")
        out.append((int(r_txt), int(k_txt), int(c_txt)))
    return tuple(out)
