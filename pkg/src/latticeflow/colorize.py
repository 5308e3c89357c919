"""Domain coloring: map extended-complex values to colors.

Hue follows the argument through a cyclic palette; the modulus can add
contour shading (one shading period per factor of 10^(1/contours_per_decade)).
Infinity gets a dedicated pole color and zero an optional darkening, so the
two special values of a meromorphic function stay visually identifiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import PaletteFormatError, TooFewSamples, UnknownPalette

MIN_SAMPLES = 8

RGB = tuple[float, float, float]


@dataclass(frozen=True)
class Palette:
    """Cyclic color ramp: an ordered list of RGB triples in [0, 1]."""

    samples: np.ndarray  # shape (n, 3), float64
    name: str

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError("palette samples must have shape (n, 3)")
        if arr.shape[0] < MIN_SAMPLES:
            raise TooFewSamples(f"{arr.shape[0]} samples; need at least {MIN_SAMPLES}")
        if np.any(arr < 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
            raise ValueError("palette channels must lie in [0, 1]")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class ColorScheme:
    """Knobs of the coloring map; all fields range-checked."""

    contour_strength: float = 0.0  # 0 disables modulus contours
    contours_per_decade: float = 1.0
    pole_color: RGB = (1.0, 1.0, 1.0)
    zero_darkening: float = 0.0
    hue_offset: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.contour_strength <= 1.0:
            raise ValueError("contour_strength must be in [0, 1]")
        if not self.contours_per_decade > 0:
            raise ValueError("contours_per_decade must be positive")
        if not 0.0 <= self.zero_darkening <= 1.0:
            raise ValueError("zero_darkening must be in [0, 1]")
        if not 0.0 <= self.hue_offset < 1.0:
            raise ValueError("hue_offset must be in [0, 1)")
        if len(self.pole_color) != 3 or any(not 0.0 <= c <= 1.0 for c in self.pole_color):
            raise ValueError("pole_color channels must be in [0, 1]")


def load_palette(path) -> Palette:
    """Load a palette file: one `r g b` triple per line, '#' comments allowed."""
    rows = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 3:
            raise PaletteFormatError(lineno, f"expected 3 channels, got {len(parts)}")
        try:
            rgb = [float(p) for p in parts]
        except ValueError:
            raise PaletteFormatError(lineno, f"non-numeric channel in {body!r}") from None
        if any(not 0.0 <= c <= 1.0 for c in rgb):
            raise PaletteFormatError(lineno, f"channel out of [0, 1] in {body!r}")
        rows.append(rgb)
    if len(rows) < MIN_SAMPLES:
        raise TooFewSamples(f"{len(rows)} samples; need at least {MIN_SAMPLES}")
    return Palette(np.array(rows), Path(path).stem)


BUILTIN_PALETTE_NAMES = ("cyclic-rainbow", "cyclic-twilight")
_builtin_cache: dict[str, Palette] = {}


def builtin_palette(name: str) -> Palette:
    if name not in BUILTIN_PALETTE_NAMES:
        raise UnknownPalette(name)
    if name not in _builtin_cache:
        ref = resources.files("latticeflow").joinpath("data", f"{name}.pal")
        with resources.as_file(ref) as p:
            _builtin_cache[name] = load_palette(p)
    return _builtin_cache[name]


def resolve_palette(name_or_path: str) -> Palette:
    """Builtin name first, then a palette file path."""
    if name_or_path in BUILTIN_PALETTE_NAMES:
        return builtin_palette(name_or_path)
    if Path(name_or_path).is_file():
        return load_palette(name_or_path)
    raise UnknownPalette(name_or_path)


def _sample_array(p: Palette, u: np.ndarray) -> np.ndarray:
    """Cyclic linear interpolation at fractional positions u (wrapped)."""
    n = len(p)
    pos = (u - np.floor(u)) * n
    k = np.floor(pos).astype(np.int64) % n
    frac = (pos - np.floor(pos))[..., None]
    return p.samples[k] * (1.0 - frac) + p.samples[(k + 1) % n] * frac


def sample_palette(p: Palette, u: float) -> RGB:
    """Cyclic interpolation; sample_palette(p, k/len) hits samples[k] exactly."""
    rgb = _sample_array(p, np.asarray(float(u)))
    return (float(rgb[0]), float(rgb[1]), float(rgb[2]))


def colorize_values(w, p: Palette, s: ColorScheme) -> np.ndarray:
    """Vectorized domain coloring; returns float RGB in [0, 1], shape w.shape + (3,)."""
    arr = np.asarray(w, dtype=np.complex128)
    with np.errstate(all="ignore"):
        hue = np.angle(arr) / (2.0 * math.pi) + s.hue_offset
        rgb = _sample_array(p, hue)
        if s.contour_strength > 0:
            mag = np.abs(arr)
            level = s.contours_per_decade * np.log10(mag)
            factor = 1.0 - s.contour_strength * (level - np.floor(level))
            rgb = rgb * factor[..., None]
        zero = arr == 0
        if np.any(zero):
            rgb = np.where(zero[..., None], rgb * (1.0 - s.zero_darkening), rgb)
        bad = ~np.isfinite(arr.real) | ~np.isfinite(arr.imag)
        rgb = np.where(bad[..., None], np.asarray(s.pole_color), rgb)
    return np.clip(np.nan_to_num(rgb, nan=0.0), 0.0, 1.0)


def color_value(w: complex, p: Palette, s: ColorScheme) -> RGB:
    """Scalar domain coloring (total: poles, zeros, NaN all map to valid RGB)."""
    rgb = colorize_values(np.asarray(w, dtype=np.complex128), p, s)
    return (float(rgb[..., 0]), float(rgb[..., 1]), float(rgb[..., 2]))
