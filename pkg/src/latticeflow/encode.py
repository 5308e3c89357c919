"""File encoders: truecolor PNG and looping animated GIF.

Both are written from scratch on top of the stdlib so output bytes are
reproducible: PNG uses filter type 0 on every row and a fixed zlib level,
GIF uses a deterministic median-cut 256-color global table and LZW.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import DimensionMismatch
from .render import Image

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6
_GIF_COLORS = 256
_QUANT_SAMPLE_CAP = 65536

_BAYER4 = (
    np.array(
        [[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]],
        dtype=np.float64,
    )
    / 16.0
    - 0.46875  # centers the 4x4 threshold matrix on zero
)


def _png_chunk(tag: bytes, data: bytes) -> bytes:
    body = tag + data
    return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body))


def write_png(img: Image, path) -> None:
    """8-bit truecolor, non-interlaced, filter 0 per row; byte-reproducible."""
    stride = 3 * img.width
    raw = bytearray()
    for y in range(img.height):
        raw.append(0)
        raw += img.pixels[y * stride : (y + 1) * stride]
    ihdr = struct.pack(">IIBBBBB", img.width, img.height, 8, 2, 0, 0, 0)
    blob = (
        _PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(bytes(raw), _ZLIB_LEVEL))
        + _png_chunk(b"IEND", b"")
    )
    with open(path, "wb") as f:
        f.write(blob)


def median_cut(samples: np.ndarray, colors: int = _GIF_COLORS) -> np.ndarray:
    """Deterministic median-cut palette, shape (colors, 3) uint8.

    Splits the box with the widest channel range along that channel at the
    median; ties resolve to the lowest box index and the lowest channel, so
    identical inputs always give an identical palette.
    """
    boxes = [samples.astype(np.int32)]
    while len(boxes) < colors:
        widest, pick, chan = 0, -1, 0
        for i, box in enumerate(boxes):
            if len(box) < 2:
                continue
            spread = box.max(axis=0) - box.min(axis=0)
            if spread.max() > widest:
                widest, pick, chan = spread.max(), i, int(spread.argmax())
        if pick < 0:
            break  # every box is a single color already
        box = boxes.pop(pick)
        box = box[np.argsort(box[:, chan], kind="stable")]
        half = len(box) // 2
        boxes.append(box[:half])
        boxes.append(box[half:])
    pal = np.zeros((colors, 3), dtype=np.uint8)
    for i, box in enumerate(boxes):
        pal[i] = np.floor(box.mean(axis=0) + 0.5).astype(np.uint8)
    return pal


def _nearest_indices(pixels: np.ndarray, palette: np.ndarray) -> np.ndarray:
    """Map (N, 3) uint8 pixels to nearest palette entries, chunked."""
    pal = palette.astype(np.int32)
    out = np.empty(len(pixels), dtype=np.uint8)
    for start in range(0, len(pixels), 8192):
        chunk = pixels[start : start + 8192].astype(np.int32)
        d = chunk[:, None, :] - pal[None, :, :]
        out[start : start + 8192] = np.einsum("ijk,ijk->ij", d, d).argmin(axis=1)
    return out


def _lzw_encode(indices: np.ndarray, min_code_size: int) -> bytes:
    clear = 1 << min_code_size
    end = clear + 1
    out = bytearray()
    acc = 0
    nbits = 0

    def emit(code: int, size: int):
        nonlocal acc, nbits
        acc |= code << nbits
        nbits += size
        while nbits >= 8:
            out.append(acc & 0xFF)
            acc >>= 8
            nbits -= 8

    table: dict[tuple[int, int], int] = {}
    code_size = min_code_size + 1
    next_code = end + 1
    emit(clear, code_size)
    cur = int(indices[0])
    for sym in indices[1:]:
        sym = int(sym)
        key = (cur, sym)
        if key in table:
            cur = table[key]
            continue
        emit(cur, code_size)
        table[key] = next_code
        next_code += 1
        if next_code > (1 << code_size) and code_size < 12:
            code_size += 1
        if next_code >= 4096:
            emit(clear, code_size)
            table.clear()
            code_size = min_code_size + 1
            next_code = end + 1
        cur = sym
    emit(cur, code_size)
    emit(end, code_size)
    if nbits:
        out.append(acc & 0xFF)
    return bytes(out)


def _sub_blocks(data: bytes) -> bytes:
    out = bytearray()
    for start in range(0, len(data), 255):
        chunk = data[start : start + 255]
        out.append(len(chunk))
        out += chunk
    out.append(0)
    return bytes(out)


def build_gif_palette(frames: list[Image]) -> np.ndarray:
    """Median-cut over a uniform sample of all frames' pixels (capped)."""
    arrays = [np.frombuffer(f.pixels, dtype=np.uint8).reshape(-1, 3) for f in frames]
    allpix = np.concatenate(arrays)
    step = max(1, -(-len(allpix) // _QUANT_SAMPLE_CAP))
    return median_cut(allpix[::step])


def write_gif(
    frames: list[Image], path, delay_cs: int, loop: int = 0, dither: bool = False
) -> None:
    """GIF89a with a global 256-color table and infinite-loop extension.

    delay_cs is the per-frame delay in centiseconds. Ordered (Bayer 4x4)
    dithering is off by default; the median-cut palette alone keeps smooth
    gradients within tens of levels.
    """
    if len(frames) < 2:
        raise ValueError("need at least 2 frames")
    w, h = frames[0].width, frames[0].height
    for f in frames:
        if f.width != w or f.height != h:
            raise DimensionMismatch(f"{f.width}x{f.height} frame in a {w}x{h} animation")

    palette = build_gif_palette(frames)
    out = bytearray()
    out += b"GIF89a"
    out += struct.pack("<HHBBB", w, h, 0xF7, 0, 0)  # global table, 256 entries
    out += palette.tobytes()
    out += b"\x21\xff\x0bNETSCAPE2.0\x03\x01" + struct.pack("<H", loop) + b"\x00"

    for f in frames:
        pix = np.frombuffer(f.pixels, dtype=np.uint8).reshape(h, w, 3)
        if dither:
            ty = np.tile(_BAYER4, (-(-h // 4), -(-w // 4)))[:h, :w]
            pix = np.clip(pix + (ty * 24.0)[..., None], 0, 255).astype(np.uint8)
        idx = _nearest_indices(pix.reshape(-1, 3), palette)
        out += b"\x21\xf9\x04\x04" + struct.pack("<H", delay_cs) + b"\x00\x00"
        out += b"\x2c" + struct.pack("<HHHHB", 0, 0, w, h, 0)
        out.append(8)  # LZW minimum code size
        out += _sub_blocks(_lzw_encode(idx, 8))
    out += b"\x3b"
    with open(path, "wb") as fh:
        fh.write(out)
