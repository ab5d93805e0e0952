"""Raster input and heatmap output (netpbm via Pillow) plus count-image CSV files.

Images on disk are stored row = y, column = x; in memory arrays are [x, y],
so every read transposes and every write transposes back.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

__all__ = [
    "read_graymap", "load_raster_field", "write_gray16", "write_phase_hsv",
    "write_field_heatmaps", "save_count_image", "load_count_image",
]


def read_graymap(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    """Read an 8- or 16-bit grayscale image; returns ([x, y] array, maxval)."""
    try:
        img = Image.open(path)
        img.load()
    except (OSError, ValueError) as exc:
        raise ValueError(f"cannot read raster {path}: {exc}") from exc
    if img.mode in ("L", "P", "RGB", "RGBA", "1"):
        arr = np.asarray(img.convert("L"), dtype=np.float64)
        maxval = 255
    elif img.mode.startswith("I"):
        arr = np.asarray(img, dtype=np.float64)
        maxval = 65535
    else:
        raise ValueError(f"unsupported raster mode {img.mode!r} in {path}")
    return arr.T.copy(), maxval


def _fit_to_grid(arr: np.ndarray, n: int) -> np.ndarray:
    if arr.shape == (n, n):
        return arr
    zoom = (n / arr.shape[0], n / arr.shape[1])
    out = ndimage.zoom(arr, zoom, order=1, grid_mode=True, mode="grid-constant")
    return out[:n, :n]


def load_raster_field(mode, grid) -> np.ndarray:
    """Complex samples for a RasterImage mode.

    The images are stretched over the whole grid and modulate a Gaussian
    illumination of waist ``mode.w``, as a shaped beam would.
    """
    amp, maxval = read_graymap(mode.amplitude)
    amp = _fit_to_grid(amp / maxval, grid.n)
    phasor = 1.0
    if mode.phase is not None:
        ph, pmax = read_graymap(mode.phase)
        ph = ph * (2 * np.pi / (pmax + 1))
        # resample the phasor, not the wrapped phase, so 2π jumps stay sharp
        re, im = _fit_to_grid(np.cos(ph), grid.n), _fit_to_grid(np.sin(ph), grid.n)
        phasor = np.exp(1j * np.arctan2(im, re))
    x, y = grid.coords()
    envelope = np.exp(-(x ** 2 + y ** 2) / mode.w ** 2)
    return np.clip(amp, 0, None) * envelope * phasor


def write_gray16(arr: np.ndarray, path: str | os.PathLike) -> None:
    """Write a nonnegative [x, y] array as a 16-bit grayscale image scaled to its max."""
    a = np.asarray(arr, dtype=np.float64)
    peak = a.max() if a.size else 0.0
    scaled = np.zeros_like(a) if peak <= 0 else a / peak * 65535
    Image.fromarray(np.round(scaled).astype(np.uint16).T.copy()).save(path)


def _hsv_to_rgb(h, s, v):
    i = np.floor(h * 6).astype(int) % 6
    f = h * 6 - np.floor(h * 6)
    p, q, t = v * (1 - s), v * (1 - f * s), v * (1 - (1 - f) * s)
    choices = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)]
    rgb = np.zeros(h.shape + (3,))
    for k, (r, g, b) in enumerate(choices):
        sel = i == k
        rgb[sel, 0], rgb[sel, 1], rgb[sel, 2] = r[sel], g[sel], b[sel]
    return rgb


def write_phase_hsv(values: np.ndarray, path: str | os.PathLike, weight_by_amplitude=True):
    """Phase as hue; brightness follows the amplitude unless disabled."""
    hue = (np.angle(values) % (2 * np.pi)) / (2 * np.pi)
    amp = np.abs(values)
    val = amp / amp.max() if weight_by_amplitude and amp.max() > 0 else np.ones_like(amp)
    rgb = _hsv_to_rgb(hue, np.ones_like(hue), val)
    img = np.round(rgb * 255).astype(np.uint8).transpose(1, 0, 2).copy()
    Image.fromarray(img, mode="RGB").save(path)


def write_field_heatmaps(values: np.ndarray, stem: str | os.PathLike) -> list[Path]:
    stem = Path(stem)
    amp_path = stem.with_name(stem.name + "_amplitude.pgm")
    phase_path = stem.with_name(stem.name + "_phase.ppm")
    write_gray16(np.abs(values), amp_path)
    write_phase_hsv(values, phase_path)
    return [amp_path, phase_path]


# ---------------------------------------------------------------------------
# Coincidence image CSV + sidecar header
# ---------------------------------------------------------------------------

def _sidecar(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".hdr")


def save_count_image(image, path: str | os.PathLike) -> list[Path]:
    """CSV matrix (row i = x index) plus ``<file>.hdr`` holding ``n pitch plane=...``."""
    path = Path(path)
    counts = np.asarray(image.counts)
    integral = np.all(counts == np.round(counts))
    np.savetxt(path, counts, delimiter=",", fmt="%d" if integral else "%.17g")
    _sidecar(path).write_text(f"{image.grid.n} {image.grid.pitch!r} plane={image.plane}\n")
    return [path, _sidecar(path)]


def load_count_image(path: str | os.PathLike):
    from .fields import GridSpec
    from .spdc import CoincidenceImage

    path = Path(path)
    hdr = _sidecar(path)
    if not hdr.exists():
        raise FileNotFoundError(f"missing header sidecar {hdr}")
    parts = hdr.read_text().split()
    if len(parts) < 2:
        raise ValueError(f"{hdr}: malformed header")
    n, pitch = int(parts[0]), float(parts[1])
    plane = "image"
    for tok in parts[2:]:
        if tok.startswith("plane="):
            plane = tok.split("=", 1)[1]
    counts = np.loadtxt(path, delimiter=",", ndmin=2)
    if counts.shape != (n, n):
        raise ValueError(f"{path}: shape {counts.shape} does not match header n={n}")
    return CoincidenceImage(GridSpec(n, pitch), counts, plane=plane)
