"""Deterministic synthetic images shared across the test modules."""

import numpy as np


def natural_image(size: int = 512, seed: int = 7, slope: float = 1.6) -> np.ndarray:
    """Grayscale field with a natural-image power spectrum (~1/f^slope)."""
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft2(rng.standard_normal((size, size)))
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    radius = np.hypot(fy, fx)
    radius[0, 0] = radius[0, 1]
    field = np.fft.irfft2(spectrum / radius**slope, s=(size, size))
    field = (field - field.min()) / np.ptp(field)
    return np.round(field * 215.0 + 20.0).astype(np.uint8)


def random_image(height: int, width: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(height, width), dtype=np.uint8)


def periodic_image(size: int = 64, tile: int = 8, seed: int = 5) -> np.ndarray:
    """Image tiled with one high-variance random tile (period = tile)."""
    rng = np.random.default_rng(seed)
    patch = rng.integers(0, 256, size=(tile, tile), dtype=np.uint8)
    reps = size // tile
    return np.tile(patch, (reps, reps))
