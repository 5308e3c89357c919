"""Command-line entry point.

Subcommands: `orbit` solves a periodic orbit and prints its closure
certificate; `render` runs an animation job described by a flat key=value
config file; `validate` runs the embedded cross-validation suites;
`palette` lists and previews palettes.

Exit codes: 0 ok, 1 config/IO error, 2 bad mathematical input,
3 validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata, resources
from pathlib import Path

from .colorize import (
    BUILTIN_PALETTE_NAMES,
    ColorScheme,
    Palette,
    builtin_palette,
    resolve_palette,
    sample_palette,
)
from .encode import write_gif, write_png
from .errors import LatticeFlowError, NotHyperbolic, NotUnimodular, UnknownPalette
from .expr import parse_expr
from .lattice import UnimodularMatrix, solve_periodic_orbit, verify_closure
from .render import Image, RenderJob, Viewport, render_animation
from .validate import run_suites

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BAD_MATH = 2
EXIT_VALIDATION = 3


class ConfigError(LatticeFlowError):
    """Malformed or inconsistent job configuration."""


def _parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    s = re.sub(r"i\b", "j", s.replace("I", "i"))
    s = re.sub(r"(?<![\d.)])j", "1j", s)  # bare i / -i
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"cannot parse complex value {text!r}") from None


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"cannot parse boolean value {text!r}")


def _parse_ints(text: str, count: int, what: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != count or not all(re.fullmatch(r"-?\d+", p) for p in parts):
        raise ConfigError(f"{what} needs {count} comma-separated integers, got {text!r}")
    return tuple(int(p) for p in parts)


@dataclass
class JobConfig:
    """Resolved render configuration; one field per config key."""

    B: tuple[int, int, int, int] = (2, 1, 1, 1)
    expression: str = "P"
    frames: int = 50
    seconds: float = 2.0
    center: complex = 0j
    width: float = 2.4
    resolution: tuple[int, int] = (256, 256)
    supersample: int = 1
    palette: str = "cyclic-rainbow"
    contour_strength: float = 0.0
    contours_per_decade: float = 1.0
    hue_offset: float = 0.0
    zero_darkening: float = 0.0
    gif: bool = False
    output_dir: str = "out"
    threads: int = 0

    def as_dict(self) -> dict:
        return {
            "B": ",".join(str(v) for v in self.B),
            "expression": self.expression,
            "frames": self.frames,
            "seconds": self.seconds,
            "center": f"{self.center.real:g}{self.center.imag:+g}i",
            "width": self.width,
            "resolution": f"{self.resolution[0]},{self.resolution[1]}",
            "supersample": self.supersample,
            "palette": self.palette,
            "contour_strength": self.contour_strength,
            "contours_per_decade": self.contours_per_decade,
            "hue_offset": self.hue_offset,
            "zero_darkening": self.zero_darkening,
            "gif": self.gif,
            "output_dir": self.output_dir,
            "threads": self.threads,
        }


_SETTERS = {
    "B": lambda c, v: setattr(c, "B", _parse_ints(v, 4, "B")),
    "expression": lambda c, v: setattr(c, "expression", v),
    "frames": lambda c, v: setattr(c, "frames", int(v)),
    "seconds": lambda c, v: setattr(c, "seconds", float(v)),
    "center": lambda c, v: setattr(c, "center", _parse_complex(v)),
    "width": lambda c, v: setattr(c, "width", float(v)),
    "resolution": lambda c, v: setattr(c, "resolution", _parse_ints(v, 2, "resolution")),
    "supersample": lambda c, v: setattr(c, "supersample", int(v)),
    "palette": lambda c, v: setattr(c, "palette", v),
    "contour_strength": lambda c, v: setattr(c, "contour_strength", float(v)),
    "contours_per_decade": lambda c, v: setattr(c, "contours_per_decade", float(v)),
    "hue_offset": lambda c, v: setattr(c, "hue_offset", float(v)),
    "zero_darkening": lambda c, v: setattr(c, "zero_darkening", float(v)),
    "gif": lambda c, v: setattr(c, "gif", _parse_bool(v)),
    "output_dir": lambda c, v: setattr(c, "output_dir", v),
    "threads": lambda c, v: setattr(c, "threads", int(v)),
}


def apply_setting(cfg: JobConfig, key: str, value: str) -> None:
    setter = _SETTERS.get(key)
    if setter is None:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        setter(cfg, value)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"bad value for {key!r}: {e}") from None


def load_config(path, overrides=()) -> JobConfig:
    """Flat UTF-8 key = value lines, '#' comments; overrides applied last."""
    cfg = JobConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {body!r}")
        key, _, value = body.partition("=")
        try:
            apply_setting(cfg, key.strip(), value.strip())
        except ConfigError as e:
            raise ConfigError(f"{path}:{lineno}: {e}") from None
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        apply_setting(cfg, key.strip(), value.strip())
    _check_config(cfg)
    return cfg


def _check_config(cfg: JobConfig) -> None:
    if cfg.frames < 2:
        raise ConfigError(f"frames must be >= 2, got {cfg.frames}")
    if not cfg.seconds > 0:
        raise ConfigError(f"seconds must be positive, got {cfg.seconds}")
    if not cfg.width > 0:
        raise ConfigError(f"width must be positive, got {cfg.width}")
    if cfg.resolution[0] < 1 or cfg.resolution[1] < 1:
        raise ConfigError(f"resolution must be positive, got {cfg.resolution}")
    if cfg.supersample < 1:
        raise ConfigError(f"supersample must be >= 1, got {cfg.supersample}")
    B = UnimodularMatrix(*cfg.B)  # may raise NotUnimodular
    if abs(B.trace) <= 2:
        raise NotHyperbolic(f"B has trace {B.trace}; |trace| <= 2 is not hyperbolic")


def bundled_config_path(name: str) -> Path:
    ref = resources.files("latticeflow").joinpath("data", f"{name}.cfg")
    with resources.as_file(ref) as p:
        return Path(p)


def _version() -> str:
    try:
        return metadata.version("latticeflow")
    except metadata.PackageNotFoundError:
        return "unknown"


def build_job(cfg: JobConfig) -> RenderJob:
    orbit = solve_periodic_orbit(UnimodularMatrix(*cfg.B))
    expr = parse_expr(cfg.expression)
    vp = Viewport(cfg.center, cfg.width, cfg.resolution[0], cfg.resolution[1], cfg.supersample)
    palette = resolve_palette(cfg.palette)
    scheme = ColorScheme(
        contour_strength=cfg.contour_strength,
        contours_per_decade=cfg.contours_per_decade,
        hue_offset=cfg.hue_offset,
        zero_darkening=cfg.zero_darkening,
    )
    return RenderJob(
        orbit=orbit,
        expr=expr,
        viewport=vp,
        palette=palette,
        scheme=scheme,
        frames=cfg.frames,
        seconds=cfg.seconds,
        output_dir=cfg.output_dir,
        gif=cfg.gif,
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_orbit(args) -> int:
    try:
        a, b, c, d = _parse_ints(args.B, 4, "-B")
        orbit = solve_periodic_orbit(UnimodularMatrix(a, b, c, d))
    except (NotHyperbolic, NotUnimodular, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_MATH
    cert = verify_closure(orbit)
    L = orbit.lattice
    print(f"t0      = {orbit.t0:.15f}")
    print(f"lambda1 = {orbit.lambda1:.15f}")
    print(f"omega1  = {L.omega1.real:+.15f} {L.omega1.imag:+.15f}i")
    print(f"omega2  = {L.omega2.real:+.15f} {L.omega2.imag:+.15f}i")
    print(f"closure = [[{cert.a}, {cert.b}], [{cert.c}, {cert.d}]]")
    return EXIT_OK


def cmd_render(args) -> int:
    t_start = time.perf_counter()
    try:
        cfg = load_config(args.config, args.set or ())
    except (ConfigError, LatticeFlowError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(e, ConfigError) else EXIT_BAD_MATH
    if args.threads is not None:
        cfg.threads = args.threads
    try:
        job = build_job(cfg)
    except UnknownPalette as e:
        print(f"error: unknown palette {e}", file=sys.stderr)
        return EXIT_CONFIG
    except LatticeFlowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_MATH

    out = Path(cfg.output_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        frames = render_animation(job, threads=cfg.threads)
        render_seconds = time.perf_counter() - t0
        entries = []
        for k, img in enumerate(frames, start=1):
            t_frame = time.perf_counter()
            path = out / f"frame-{k:06d}.png"
            write_png(img, path)
            written.append(path)
            entries.append(
                {
                    "file": path.name,
                    "sha256": _sha256(path),
                    "write_seconds": round(time.perf_counter() - t_frame, 6),
                }
            )
        gif_name = None
        if cfg.gif:
            delay_cs = max(1, round(100 * cfg.seconds / cfg.frames))
            gif_path = out / "animation.gif"
            write_gif(frames, gif_path, delay_cs)
            written.append(gif_path)
            gif_name = gif_path.name
        manifest = {
            "config": cfg.as_dict(),
            "t0": job.orbit.t0,
            "version": _version(),
            "frames": entries,
            "gif": gif_name,
            "render_seconds": round(render_seconds, 6),
            "total_seconds": round(time.perf_counter() - t_start, 6),
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except (OSError, LatticeFlowError) as e:
        for path in written:
            path.unlink(missing_ok=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.verbose:
        print(f"wrote {len(frames)} frames to {out} in {render_seconds:.2f}s")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_suites(args.level)
    ok = True
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.name:24s} max residual {r.residual:.3e} (threshold {r.threshold:.1e}) {status}")
        ok = ok and r.passed
    return EXIT_OK if ok else EXIT_VALIDATION


def _sweep_card(palette: Palette, width=512, height=64) -> Image:
    rows = bytearray()
    row = bytearray()
    for x in range(width):
        r, g, b = sample_palette(palette, x / width)
        row += bytes((int(r * 255 + 0.5), int(g * 255 + 0.5), int(b * 255 + 0.5)))
    for _ in range(height):
        rows += row
    return Image(width, height, bytes(rows))


def cmd_palette(args) -> int:
    if args.action == "list":
        for name in BUILTIN_PALETTE_NAMES:
            print(f"{name} (builtin, {len(builtin_palette(name))} samples)")
        return EXIT_OK
    try:
        palette = resolve_palette(args.name)
    except UnknownPalette as e:
        print(f"error: unknown palette {e}", file=sys.stderr)
        return EXIT_BAD_MATH
    out = args.output or f"{palette.name}.png"
    write_png(_sweep_card(palette), out)
    if args.verbose:
        print(f"wrote {out}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticeflow",
        description="Exactly-looping animations of elliptic functions under the modular flow.",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker thread count (0 = auto)")
    parser.add_argument("--verbose", action="store_true")
    # accepted both before and after the subcommand; SUPPRESS keeps a
    # subcommand-position default from clobbering a global-position value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p_orbit = sub.add_parser(
        "orbit", parents=[common], help="solve a periodic orbit for an integer matrix"
    )
    p_orbit.add_argument("-B", required=True, help="matrix entries a,b,c,d (row-major)")
    p_orbit.set_defaults(func=cmd_orbit)

    p_render = sub.add_parser("render", parents=[common], help="render a job config to PNG frames (+ GIF)")
    p_render.add_argument("config", help="path to a key = value config file")
    p_render.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p_render.set_defaults(func=cmd_render)

    p_val = sub.add_parser("validate", parents=[common], help="run the numerical cross-validation suites")
    p_val.add_argument("level", choices=("quick", "full"))
    p_val.set_defaults(func=cmd_validate)

    p_pal = sub.add_parser("palette", parents=[common], help="list palettes or write a sweep test card")
    pal_sub = p_pal.add_subparsers(dest="action", required=True)
    pal_list = pal_sub.add_parser("list", parents=[common])
    pal_list.set_defaults(func=cmd_palette)
    pal_show = pal_sub.add_parser("show", parents=[common])
    pal_show.add_argument("name")
    pal_show.add_argument("-o", "--output", default=None)
    pal_show.set_defaults(func=cmd_palette)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
