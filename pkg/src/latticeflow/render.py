"""Rasterize domain-colored frames of a flowing elliptic function.

A frame samples the expression on a pixel grid over a viewport, colors the
values, and optionally supersamples (averaging sub-pixel colors in linear
light). An animation renders frames at t_k = k*t0/frames so that the frame
after the last would exactly replicate frame 0.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .colorize import ColorScheme, Palette, colorize_values
from .elliptic import invariants_of
from .expr import EllipticExpr, eval_expr
from .lattice import Lattice, PeriodicOrbit, flow

_GAMMA = 2.2


@dataclass(frozen=True)
class Viewport:
    """Rectangular window in the complex plane mapped onto a pixel grid.

    Height in complex units is width * pixels_y / pixels_x. Pixel (0, 0) is the
    top-left corner; samples land on (sub)pixel centers.
    """

    center: complex
    width: float
    pixels_x: int
    pixels_y: int
    supersample: int = 1

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.pixels_x < 1 or self.pixels_y < 1:
            raise ValueError("pixel counts must be positive")
        if self.supersample < 1:
            raise ValueError("supersample must be >= 1")

    @property
    def height(self) -> float:
        return self.width * self.pixels_y / self.pixels_x


@dataclass(frozen=True)
class Image:
    """Row-major RGB8 buffer."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != 3 * self.width * self.height:
            raise ValueError("pixel buffer length must be 3*width*height")


@dataclass(frozen=True)
class RenderJob:
    orbit: PeriodicOrbit
    expr: EllipticExpr
    viewport: Viewport
    palette: Palette
    scheme: ColorScheme
    frames: int
    seconds: float
    output_dir: str
    gif: bool = False

    def __post_init__(self):
        if self.frames < 2:
            raise ValueError("frames must be >= 2")
        if not self.seconds > 0:
            raise ValueError("seconds must be positive")

    def frame_time(self, k: int) -> float:
        # absolute, never incremental: frame `frames` would land back on t=0.
        # The ratio is formed first so the midpoint frame hits t0/2 exactly.
        return (k / self.frames) * self.orbit.t0


def sample_grid(vp: Viewport) -> np.ndarray:
    """Complex sample positions, shape (pixels_y*ss, pixels_x*ss)."""
    ss = vp.supersample
    nx, ny = vp.pixels_x * ss, vp.pixels_y * ss
    left = vp.center.real - vp.width / 2
    top = vp.center.imag + vp.height / 2
    xs = left + (np.arange(nx) + 0.5) * (vp.width / nx)
    ys = top - (np.arange(ny) + 0.5) * (vp.height / ny)
    return xs[None, :] + 1j * ys[:, None]


def _quantize(rgb: np.ndarray) -> bytes:
    return np.floor(rgb * 255.0 + 0.5).astype(np.uint8).tobytes()


def render_frame(
    expr: EllipticExpr, L: Lattice, vp: Viewport, p: Palette, s: ColorScheme
) -> Image:
    """Render one frame; identical inputs give identical bytes."""
    inv = invariants_of(L)
    grid = sample_grid(vp)
    vals = eval_expr(expr, grid, L, inv)
    rgb = colorize_values(vals, p, s)
    ss = vp.supersample
    if ss > 1:
        # average sub-samples in linear light, then back to display space
        linear = rgb**_GAMMA
        linear = linear.reshape(vp.pixels_y, ss, vp.pixels_x, ss, 3).mean(axis=(1, 3))
        rgb = linear ** (1.0 / _GAMMA)
    return Image(vp.pixels_x, vp.pixels_y, _quantize(rgb))


def render_animation(job: RenderJob, threads: int = 0) -> list[Image]:
    """Render all frames of a job; output order is frame order.

    threads = 0 lets the executor pick; any thread count yields identical
    bytes because frames are independent and each is deterministic.
    """
    base = job.orbit.lattice

    def one(k: int) -> Image:
        L = flow(base, job.frame_time(k))
        return render_frame(job.expr, L, job.viewport, job.palette, job.scheme)

    if threads == 1:
        return [one(k) for k in range(job.frames)]
    workers = threads if threads > 0 else None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(job.frames)))
