"""8-bit grayscale images: PGM I/O, block-loss simulation, quality metrics.

Images are plain 2-D ``numpy`` arrays of dtype ``uint8``, shape
``(height, width)``. All functions are pure; ``corrupt`` is deterministic
given its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParseError

PEAK = 255

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _require_image(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.ndim != 2 or img.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if img.dtype != np.uint8:
        if not np.issubdtype(img.dtype, np.integer):
            raise ValueError("image must hold integer intensities")
        if img.min() < 0 or img.max() > PEAK:
            raise ValueError("intensities must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


@dataclass(frozen=True)
class LossMask:
    """Per-block loss indicator on the ``block_size`` grid (True = lost)."""

    block_size: int
    grid: np.ndarray  # bool, shape (height // B, width // B)

    def __post_init__(self):
        if self.block_size < 1 or self.grid.ndim != 2 or self.grid.size == 0:
            raise ConfigError("mask needs a positive block size and 2-D grid")

    def pixel_mask(self) -> np.ndarray:
        """Expand the block grid to a per-pixel boolean mask."""
        b = self.block_size
        return np.repeat(np.repeat(self.grid, b, axis=0), b, axis=1)

    def lost_fraction(self) -> float:
        return float(self.grid.mean())


# ---------------------------------------------------------------------------
# PGM parsing / writing
# ---------------------------------------------------------------------------


def _skip_space(data: bytes, pos: int) -> int:
    # Whitespace and '#' comments are interchangeable between header tokens.
    while pos < len(data):
        if data[pos] == ord("#"):
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    return pos


def _read_uint(data: bytes, pos: int, what: str) -> tuple[int, int]:
    pos = _skip_space(data, pos)
    start = pos
    while pos < len(data) and data[pos : pos + 1].isdigit():
        pos += 1
    if pos == start:
        raise ParseError(f"expected {what}", offset=start)
    return int(data[start:pos]), pos


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a binary (P5) or ASCII (P2) PGM with maxval <= 255."""
    if data[:2] not in (b"P5", b"P2"):
        raise ParseError("not a P5/P2 PGM file", offset=0)
    binary = data[:2] == b"P5"
    width, pos = _read_uint(data, 2, "width")
    height, pos = _read_uint(data, pos, "height")
    maxval_at = _skip_space(data, pos)
    maxval, pos = _read_uint(data, pos, "maxval")
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}", offset=2)
    if not 1 <= maxval <= PEAK:
        raise ParseError(f"unsupported maxval {maxval}", offset=maxval_at)

    n = width * height
    if binary:
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise ParseError("missing whitespace before raster", offset=pos)
        pos += 1
        if len(data) - pos < n:
            raise ParseError(
                f"raster truncated: need {n} bytes, have {len(data) - pos}",
                offset=len(data),
            )
        img = np.frombuffer(data[pos : pos + n], dtype=np.uint8)
        if maxval < PEAK and img.max() > maxval:
            bad = int(np.argmax(img > maxval))
            raise ParseError(
                f"sample above maxval {maxval}", offset=pos + bad
            )
    else:
        values = np.empty(n, dtype=np.uint8)
        for i in range(n):
            try:
                v, pos = _read_uint(data, pos, "pixel value")
            except ParseError:
                if _skip_space(data, pos) >= len(data):
                    raise ParseError(
                        f"raster truncated: need {n} samples, have {i}",
                        offset=len(data),
                    ) from None
                raise
            if v > maxval:
                raise ParseError(f"sample {v} above maxval {maxval}", offset=pos)
            values[i] = v
        img = values
    return img.reshape(height, width)


def write_pgm(image: np.ndarray) -> bytes:
    """Encode as canonical binary PGM: ``P5\\n<w> <h>\\n255\\n`` + raw rows."""
    img = _require_image(image)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


# ---------------------------------------------------------------------------
# Loss-mask sidecar (text format: "<grid_w> <grid_h> <B>" then '0'/'1' rows)
# ---------------------------------------------------------------------------


def mask_to_text(mask: LossMask) -> str:
    gh, gw = mask.grid.shape
    rows = ["".join("1" if v else "0" for v in row) for row in mask.grid]
    return f"{gw} {gh} {mask.block_size}\n" + "\n".join(rows) + "\n"


def mask_from_text(text: str) -> LossMask:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty mask file")
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError(f"bad mask header {lines[0]!r}")
    try:
        gw, gh, block = (int(t) for t in head)
    except ValueError:
        raise ParseError(f"bad mask header {lines[0]!r}") from None
    body = lines[1 : 1 + gh]
    if len(body) != gh or any(len(row) != gw for row in body):
        raise ParseError(f"mask body does not match {gw}x{gh} header")
    if any(ch not in "01" for row in body for ch in row):
        raise ParseError("mask rows may only contain '0' and '1'")
    grid = np.array([[ch == "1" for ch in row] for row in body], dtype=bool)
    return LossMask(block_size=block, grid=grid)


# ---------------------------------------------------------------------------
# Corruption model and metrics
# ---------------------------------------------------------------------------


def corrupt(
    image: np.ndarray, loss_ratio: float, block_size: int, seed: int
) -> tuple[np.ndarray, LossMask]:
    """Drop each block independently with probability ``loss_ratio``.

    Lost blocks are zero-filled. Dimensions must be exact multiples of
    ``block_size``; no padding is performed.
    """
    img = _require_image(image)
    if not 0.0 <= loss_ratio <= 1.0:
        raise ConfigError(f"loss ratio {loss_ratio} outside [0, 1]")
    h, w = img.shape
    if block_size < 1 or h % block_size or w % block_size:
        raise ConfigError(
            f"image {w}x{h} is not a multiple of block size {block_size}"
        )
    rng = np.random.default_rng(seed)
    grid = rng.random((h // block_size, w // block_size)) < loss_ratio
    mask = LossMask(block_size=block_size, grid=grid)
    out = img.copy()
    out[mask.pixel_mask()] = 0
    return out, mask


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared intensity difference over all pixels."""
    if a.shape != b.shape:
        raise ConfigError(f"image shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.int64) - b.astype(np.int64)
    return float(np.mean(diff * diff))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / err)
