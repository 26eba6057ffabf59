"""Synthetic granite-like textures from a Boolean disc model.

Grains are discs dropped at Poisson-random locations; later discs
overwrite earlier ones, so grey-level sets stay crisp. Grain radius
drives the opening granulometry directly and the per-channel tint
separates classes in colour space, which makes generated corpora usable
as ground truth for the feature extractors. Generation is a pure
function of (spec, size, seed); corpora derive one child seed per image
from the corpus seed and the class/sample indices.
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError
from .imagecore import ColorImage, write_ppm

__all__ = [
    "TextureSpec",
    "CorpusSpec",
    "ManifestEntry",
    "generate_texture",
    "generate_corpus",
    "write_manifest",
    "read_manifest",
    "parse_corpus_config",
    "format_corpus_config",
    "load_corpus_spec",
    "builtin_corpus_names",
    "builtin_corpus_spec",
]


@dataclass(frozen=True)
class TextureSpec:
    class_label: str
    grain_radius: tuple[int, int]  # uniform integer radius in [min, max]
    grain_intensity: tuple[int, int]  # (mean, spread): uniform in mean +/- spread, clamped
    background_intensity: int
    grain_density: float  # expected grains per 1000 px^2
    rgb_tint: tuple[float, float, float]

    def __post_init__(self):
        rmin, rmax = self.grain_radius
        if rmin < 1 or rmax < rmin:
            raise DataError(f"bad grain radius range {self.grain_radius}")
        if not 0 <= self.background_intensity <= 255:
            raise DataError("background intensity must lie in [0, 255]")
        mean, spread = self.grain_intensity
        if spread < 0 or not 0 <= mean <= 255:
            raise DataError(f"bad grain intensity {self.grain_intensity}")
        if self.grain_density <= 0:
            raise DataError("grain density must be positive")
        if len(self.rgb_tint) != 3 or any(not 0.5 <= t <= 1.5 for t in self.rgb_tint):
            raise DataError("tint multipliers must lie in [0.5, 1.5]")


@dataclass(frozen=True)
class CorpusSpec:
    classes: tuple[TextureSpec, ...]
    samples_per_class: tuple[int, ...]
    image_size: int
    seed: int

    def __post_init__(self):
        if len(self.classes) < 2:
            raise DataError("a corpus needs at least 2 classes")
        if len(self.samples_per_class) != len(self.classes):
            raise DataError("samples_per_class must align with classes")
        if any(c < 1 for c in self.samples_per_class):
            raise DataError("every class needs at least one sample")
        if self.image_size < 32:
            raise DataError("image_size must be >= 32")
        labels = [c.class_label for c in self.classes]
        if len(set(labels)) != len(labels):
            raise DataError("class labels must be unique")

    @property
    def total_samples(self) -> int:
        return sum(self.samples_per_class)


class ManifestEntry(NamedTuple):
    sample_id: str
    label: str
    path: str  # relative to the manifest's directory


def generate_texture(spec: TextureSpec, size: int, seed) -> ColorImage:
    """One synthetic texture; identical bytes for identical (spec, size, seed)."""
    if size < 1:
        raise DataError("size must be positive")
    rng = np.random.default_rng(seed)
    grey = np.full((size, size), spec.background_intensity, dtype=np.int32)
    count = int(rng.poisson(spec.grain_density * size * size / 1000.0))
    rmin, rmax = spec.grain_radius
    mean, spread = spec.grain_intensity
    for _ in range(count):
        cx = rng.uniform(0.0, size)
        cy = rng.uniform(0.0, size)
        rad = int(rng.integers(rmin, rmax + 1))
        val = int(np.clip(rng.integers(mean - spread, mean + spread + 1), 0, 255))
        y0 = max(0, int(np.floor(cy - rad)))
        y1 = min(size, int(np.ceil(cy + rad)) + 1)
        x0 = max(0, int(np.floor(cx - rad)))
        x1 = min(size, int(np.ceil(cx + rad)) + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        yy, xx = np.mgrid[y0:y1, x0:x1]
        inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= rad * rad
        grey[y0:y1, x0:x1][inside] = val
    planes = [
        np.clip(np.floor(grey * t + 0.5), 0, 255).astype(np.uint8) for t in spec.rgb_tint
    ]
    return ColorImage(np.stack(planes, axis=-1))


def _image_seed(corpus_seed: int, class_index: int, sample_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([corpus_seed, class_index, sample_index])


def generate_corpus(spec: CorpusSpec, out_dir) -> list[ManifestEntry]:
    """Write one PPM per sample plus manifest.csv; byte-reproducible."""
    os.makedirs(out_dir, exist_ok=True)
    entries: list[ManifestEntry] = []
    for ci, (ts, count) in enumerate(zip(spec.classes, spec.samples_per_class)):
        for si in range(count):
            img = generate_texture(ts, spec.image_size, _image_seed(spec.seed, ci, si))
            sample_id = f"{ts.class_label}-{si + 1}"
            fname = f"{sample_id}.ppm"
            write_ppm(img, os.path.join(out_dir, fname))
            entries.append(ManifestEntry(sample_id, ts.class_label, fname))
    write_manifest(entries, os.path.join(out_dir, "manifest.csv"))
    return entries


def write_manifest(entries, path) -> None:
    lines = ["sample_id,label,path"]
    lines += [f"{e.sample_id},{e.label},{e.path}" for e in entries]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path) -> list[ManifestEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "sample_id,label,path":
        raise DataError("not a corpus manifest CSV")
    out = []
    for ln in lines[1:]:
        sid, lab, rel = ln.split(",")
        out.append(ManifestEntry(sid, lab, rel))
    return out


# --- corpus config files ------------------------------------------------------

def parse_corpus_config(text: str) -> CorpusSpec:
    """Corpus spec from INI-style text: one [corpus] section, one [class X] each."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise DataError(f"bad corpus config: {exc}") from None
    if "corpus" not in cp:
        raise DataError("corpus config needs a [corpus] section")
    top = cp["corpus"]
    try:
        image_size = top.getint("image_size")
        seed = top.getint("seed")
        default_samples = top.getint("samples_per_class", fallback=0)
    except ValueError as exc:
        raise DataError(f"bad [corpus] value: {exc}") from None

    classes: list[TextureSpec] = []
    counts: list[int] = []
    for section in cp.sections():
        if not section.startswith("class "):
            continue
        label = section.split(" ", 1)[1].strip()
        sec = cp[section]
        try:
            rmin, rmax = (int(v) for v in sec.get("grain_radius").split())
            imean, ispread = (int(v) for v in sec.get("grain_intensity").split())
            background = sec.getint("background")
            density = sec.getfloat("density")
            tint = tuple(float(v) for v in sec.get("tint").split())
            samples = sec.getint("samples", fallback=default_samples)
        except (ValueError, AttributeError) as exc:
            raise DataError(f"bad [class {label}] value: {exc}") from None
        if samples < 1:
            raise DataError(f"class {label} needs samples >= 1 (or a corpus default)")
        classes.append(
            TextureSpec(label, (rmin, rmax), (imean, ispread), background, density, tint)
        )
        counts.append(samples)
    return CorpusSpec(tuple(classes), tuple(counts), image_size, seed)


def format_corpus_config(spec: CorpusSpec) -> str:
    out = io.StringIO()
    out.write("[corpus]\n")
    out.write(f"image_size = {spec.image_size}\n")
    out.write(f"seed = {spec.seed}\n")
    for ts, count in zip(spec.classes, spec.samples_per_class):
        out.write(f"\n[class {ts.class_label}]\n")
        out.write(f"samples = {count}\n")
        out.write(f"grain_radius = {ts.grain_radius[0]} {ts.grain_radius[1]}\n")
        out.write(f"grain_intensity = {ts.grain_intensity[0]} {ts.grain_intensity[1]}\n")
        out.write(f"background = {ts.background_intensity}\n")
        out.write(f"density = {ts.grain_density:g}\n")
        out.write(f"tint = {ts.rgb_tint[0]:g} {ts.rgb_tint[1]:g} {ts.rgb_tint[2]:g}\n")
    return out.getvalue()


def load_corpus_spec(path) -> CorpusSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus_config(fh.read())


def builtin_corpus_names() -> tuple[str, ...]:
    return ("granite14",)


def builtin_corpus_spec(name: str) -> CorpusSpec:
    """Load a corpus spec that ships with the package (currently granite14)."""
    if name not in builtin_corpus_names():
        raise DataError(f"unknown builtin corpus {name!r}")
    from importlib.resources import files

    text = files("granulom.data").joinpath(f"{name}.cfg").read_text(encoding="utf-8")
    return parse_corpus_config(text)
