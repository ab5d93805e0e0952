"""Complex scalar fields on square grids and analytic spatial modes.

Arrays are indexed ``values[i, j]`` with ``i`` along x and ``j`` along y.
Pixel ``(i, j)`` sits at ``((i - n/2) * pitch, (j - n/2) * pitch)``, so the
origin is the pixel at index ``n/2`` on both axes.
"""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import ndimage
from scipy.special import eval_genlaguerre, eval_hermite, gammaln

from .errors import BiphotonWarning, GridMismatchError

__all__ = [
    "GridSpec", "ComplexField", "LG", "HG", "OAMGauss", "Superposition",
    "RasterImage", "ModeSpec", "evaluate_mode", "inner_product", "overlap",
    "fourier_transform", "resample_scaled", "mode_from_dict", "mode_to_dict",
    "save_cfield", "load_cfield", "lg_profile", "hg_profile", "oam_profile",
]


@dataclass(frozen=True)
class GridSpec:
    """Square sampling grid: ``n`` pixels per side, ``pitch`` mm per pixel."""

    n: int = 256
    pitch: float = 0.055

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")
        if not (self.pitch > 0 and math.isfinite(self.pitch)):
            raise ValueError(f"pitch must be positive, got {self.pitch}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "pitch", float(self.pitch))

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.pitch

    @property
    def extent(self) -> float:
        """Half-width of the grid (distance from origin to the first pixel)."""
        return self.n // 2 * self.pitch

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.coords()
        return np.hypot(x, y), np.arctan2(y, x)

    def reciprocal(self) -> GridSpec:
        """Grid of the centered DFT of a field on this grid (rad/mm per pixel)."""
        return GridSpec(self.n, 2 * np.pi / (self.n * self.pitch))


@dataclass
class ComplexField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.grid.pitch)

    def normalized(self) -> ComplexField:
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize a zero field")
        return ComplexField(self.grid, self.values / nrm)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def _check_same_grid(f: ComplexField, g: ComplexField) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")


# ---------------------------------------------------------------------------
# Mode descriptors
# ---------------------------------------------------------------------------

def _check_waist(w):
    if not w > 0:
        raise ValueError(f"waist must be positive, got {w}")


@dataclass(frozen=True)
class LG:
    """Laguerre-Gaussian mode with radial index ``p`` and azimuthal index ``l``."""

    p: int
    l: int
    w: float

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("radial index p must be >= 0")
        _check_waist(self.w)


@dataclass(frozen=True)
class HG:
    m: int
    n: int
    w: float

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError("HG indices must be >= 0")
        _check_waist(self.w)


@dataclass(frozen=True)
class OAMGauss:
    """Gaussian radial profile carrying ``l`` units of OAM: exp(-r²/w²) exp(ilφ)."""

    l: int
    w: float

    def __post_init__(self):
        _check_waist(self.w)


@dataclass(frozen=True)
class Superposition:
    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), m) for c, m in self.terms)
        if not terms or all(c == 0 for c, _ in terms):
            raise ValueError("superposition weights must not all be zero")
        object.__setattr__(self, "terms", terms)

    @property
    def w(self) -> float:
        return max(m.w for _, m in self.terms)


@dataclass(frozen=True)
class RasterImage:
    """Amplitude and optional phase images (netpbm) on a Gaussian beam of waist ``w``."""

    amplitude: str
    phase: str | None = None
    w: float = 1.0

    def __post_init__(self):
        _check_waist(self.w)


ModeSpec = Union[LG, HG, OAMGauss, Superposition, RasterImage]


def mode_from_dict(d: dict) -> ModeSpec:
    kind = d["kind"].lower()
    if kind == "lg":
        return LG(int(d.get("p", 0)), int(d.get("l", 0)), float(d["w"]))
    if kind == "hg":
        return HG(int(d.get("m", 0)), int(d.get("n", 0)), float(d["w"]))
    if kind in ("oam", "oamgauss"):
        return OAMGauss(int(d.get("l", 0)), float(d["w"]))
    if kind == "superposition":
        terms = []
        for t in d["terms"]:
            wt = t.get("weight", 1.0)
            if isinstance(wt, (list, tuple)):
                wt = complex(wt[0], wt[1])
            terms.append((complex(wt), mode_from_dict(t["mode"])))
        return Superposition(tuple(terms))
    if kind in ("raster", "rasterimage"):
        return RasterImage(d["amplitude"], d.get("phase"), float(d.get("w", 1.0)))
    raise ValueError(f"unknown mode kind {d['kind']!r}")


def mode_to_dict(mode: ModeSpec) -> dict:
    if isinstance(mode, LG):
        return {"kind": "LG", "p": mode.p, "l": mode.l, "w": mode.w}
    if isinstance(mode, HG):
        return {"kind": "HG", "m": mode.m, "n": mode.n, "w": mode.w}
    if isinstance(mode, OAMGauss):
        return {"kind": "OAMGauss", "l": mode.l, "w": mode.w}
    if isinstance(mode, Superposition):
        return {"kind": "superposition",
                "terms": [{"weight": [c.real, c.imag], "mode": mode_to_dict(m)}
                          for c, m in mode.terms]}
    if isinstance(mode, RasterImage):
        return {"kind": "raster", "amplitude": mode.amplitude, "phase": mode.phase,
                "w": mode.w}
    raise TypeError(f"not a mode spec: {mode!r}")


# ---------------------------------------------------------------------------
# Analytic profiles (unit norm in the continuum)
# ---------------------------------------------------------------------------

def lg_profile(p: int, l: int, w: float, r, phi):
    """Continuum-normalized LG_{p,l} sampled at polar coordinates."""
    al = abs(l)
    log_c = 0.5 * (math.log(2 / math.pi) + gammaln(p + 1) - gammaln(p + al + 1))
    u = 2 * r ** 2 / w ** 2
    radial = np.exp(log_c) / w * (np.sqrt(u) ** al) * eval_genlaguerre(p, al, u) * np.exp(-u / 2)
    return radial * np.exp(1j * l * phi)


def hg_profile(m: int, n: int, w: float, x, y):
    log_c = 0.5 * (math.log(2 / math.pi) - (m + n) * math.log(2)
                   - gammaln(m + 1) - gammaln(n + 1))
    sx = np.sqrt(2) * x / w
    sy = np.sqrt(2) * y / w
    return (np.exp(log_c) / w * eval_hermite(m, sx) * eval_hermite(n, sy)
            * np.exp(-(x ** 2 + y ** 2) / w ** 2))


def oam_profile(l: int, w: float, r, phi):
    return math.sqrt(2 / math.pi) / w * np.exp(-r ** 2 / w ** 2) * np.exp(1j * l * phi)


def _sample_analytic(mode: ModeSpec, grid: GridSpec) -> np.ndarray:
    if isinstance(mode, RasterImage):
        from .imaging import load_raster_field

        return load_raster_field(mode, grid)
    if isinstance(mode, Superposition):
        total = np.zeros((grid.n, grid.n), dtype=np.complex128)
        for c, m in mode.terms:
            total += c * _normalized(_sample_analytic(m, grid), grid)
        return total

    if mode.w < 2 * grid.pitch:
        raise ValueError(
            f"grid too coarse: waist {mode.w} mm < 2 pixels ({2 * grid.pitch} mm)")
    if isinstance(mode, LG):
        r, phi = grid.polar()
        vals = lg_profile(mode.p, mode.l, mode.w, r, phi)
    elif isinstance(mode, HG):
        x, y = grid.coords()
        vals = hg_profile(mode.m, mode.n, mode.w, x, y).astype(np.complex128)
    elif isinstance(mode, OAMGauss):
        r, phi = grid.polar()
        vals = oam_profile(mode.l, mode.w, r, phi)
    else:
        raise TypeError(f"not a mode spec: {mode!r}")

    inside = float(np.sum(np.abs(vals) ** 2)) * grid.pitch ** 2
    if inside < 0.99:
        warnings.warn(
            f"{mode} keeps only {inside:.4f} of its energy on the grid",
            BiphotonWarning, stacklevel=3)
    return vals


def _normalized(vals: np.ndarray, grid: GridSpec) -> np.ndarray:
    nrm = np.sqrt(np.sum(np.abs(vals) ** 2)) * grid.pitch
    if nrm == 0:
        raise ValueError("mode evaluates to zero on this grid")
    return vals / nrm


def evaluate_mode(mode: ModeSpec, grid: GridSpec) -> ComplexField:
    """Sample ``mode`` at pixel centers and normalize to unit norm."""
    return ComplexField(grid, _normalized(_sample_analytic(mode, grid), grid))


# ---------------------------------------------------------------------------
# Linear algebra and transforms
# ---------------------------------------------------------------------------

def inner_product(f: ComplexField, g: ComplexField) -> complex:
    """Discrete overlap integral ⟨f|g⟩ = Σ conj(f)·g·pitch²."""
    _check_same_grid(f, g)
    return complex(np.vdot(f.values, g.values) * f.grid.pitch ** 2)


def overlap(f: ComplexField, g: ComplexField) -> float:
    """Global-phase invariant fidelity |⟨f|g⟩|² / (‖f‖²‖g‖²)."""
    ip = inner_product(f, g)
    return float(abs(ip) ** 2 / (f.norm() ** 2 * g.norm() ** 2))


def fourier_transform(f: ComplexField, direction: str = "forward") -> ComplexField:
    """Centered unitary DFT approximating (1/2π)∬ f(ρ) exp(∓i q·ρ) d²ρ.

    The output grid pitch is 2π/(n·pitch) in reciprocal units; applying the
    transform to a reciprocal-space field maps back onto the original pitch.
    """
    grid = f.grid
    out_grid = grid.reciprocal()
    if direction == "forward":
        spec = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(f.values)))
        scale = grid.pitch ** 2 / (2 * np.pi)
    elif direction == "inverse":
        spec = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(f.values)))
        scale = grid.pitch ** 2 * grid.n ** 2 / (2 * np.pi)
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return ComplexField(out_grid, spec * scale)


def resample_scaled(f: ComplexField, scale: float) -> ComplexField:
    """Return g with g(ρ) = f(scale·ρ), bilinear, zero outside the input grid."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    n = f.grid.n
    idx = scale * (np.arange(n) - n // 2) + n // 2
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    coords = np.stack([ii, jj])
    # mode="grid-constant" zeros anything outside [0, n-1] without edge blending
    re = ndimage.map_coordinates(f.values.real, coords, order=1, mode="grid-constant", cval=0.0)
    im = ndimage.map_coordinates(f.values.imag, coords, order=1, mode="grid-constant", cval=0.0)
    outside = (ii < 0) | (ii > n - 1) | (jj < 0) | (jj > n - 1)
    out = re + 1j * im
    out[outside] = 0
    return ComplexField(f.grid, out)


# ---------------------------------------------------------------------------
# .cfield text format
# ---------------------------------------------------------------------------

def save_cfield(f: ComplexField, path: str | os.PathLike) -> None:
    """Write ``n pitch_mm`` then n·n lines ``re im`` in row-major order."""
    flat = f.values.reshape(-1)
    data = np.column_stack([flat.real, flat.imag])
    header = f"{f.grid.n} {f.grid.pitch!r}"
    np.savetxt(path, data, fmt="%.17g", header=header, comments="")


def load_cfield(path: str | os.PathLike) -> ComplexField:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 2:
            raise ValueError(f"{path}: malformed .cfield header")
        n, pitch = int(head[0]), float(head[1])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (n * n, 2):
        raise ValueError(f"{path}: expected {n * n} rows of 're im', got {data.shape[0]}")
    vals = (data[:, 0] + 1j * data[:, 1]).reshape(n, n)
    return ComplexField(GridSpec(n, pitch), vals)
