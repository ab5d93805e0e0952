"""Off-axis holographic recovery of the biphoton wavefunction.

The interferogram is |P + R|² with R a tilted Gaussian reference.  Its
spectrum holds the term P·conj(R) displaced to the carrier wavevector; that
sideband is windowed, demodulated and divided by the reference envelope.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BiphotonWarning, CarrierNotFoundError, GridMismatchError
from .fields import ComplexField, fourier_transform
from .spdc import CoincidenceImage, ReferenceSpec

__all__ = [
    "SidebandFilter", "SidebandResult", "reconstruct_offaxis",
    "amplitude_from_counts", "combine_amplitude_phase", "reconstruct_state",
]

ENVELOPE_FLOOR = 1e-3
PEAK_TO_FLOOR = 3.0
# relative spectral floor for noiseless input, where the median is roundoff
ROUNDOFF_FLOOR = 1e-12


@dataclass(frozen=True)
class SidebandFilter:
    """Disk around the sideband center in reciprocal space.

    ``carrier`` and ``radius`` default to the reference's nominal carrier on
    the image plane and half its distance from DC.  ``taper`` is the fraction
    of the radius over which the raised-cosine window rolls off.

    ``refine`` re-centers the filter on the measured sideband, for carriers
    that drift from the nominal value: ``"peak"`` takes the sub-pixel maximum
    and ``"centroid"`` the power centroid.  Either estimate also absorbs any
    net transverse momentum of the field itself (a tilt, or the ring spectrum
    of a vortex for ``"peak"``), so the nominal carrier is used by default.
    """

    carrier: tuple[float, float] | None = None
    radius: float | None = None
    window: str = "raised-cosine"
    taper: float = 0.5
    refine: str | None = None

    def __post_init__(self):
        if self.window not in ("hard", "raised-cosine"):
            raise ValueError(f"unknown window {self.window!r}")
        if self.radius is not None and not self.radius > 0:
            raise ValueError("filter radius must be positive")
        if not 0 < self.taper <= 1:
            raise ValueError("taper must lie in (0, 1]")
        if self.refine not in (None, "peak", "centroid"):
            raise ValueError(f"unknown carrier refinement {self.refine!r}")

    def resolve(self, ref: ReferenceSpec) -> tuple[np.ndarray, float]:
        c = np.asarray(self.carrier if self.carrier is not None else ref.carrier("image"),
                       dtype=float)
        dist = float(np.hypot(*c))
        radius = self.radius if self.radius is not None else dist / 2
        if radius > dist / 2 * (1 + 1e-12):
            raise ValueError(
                f"filter radius {radius:.4g} overlaps DC (carrier distance {dist:.4g})")
        return c, radius

    def weights(self, dist: np.ndarray, radius: float) -> np.ndarray:
        if self.window == "hard":
            return (dist < radius).astype(float)
        flat = radius * (1 - self.taper)
        w = np.zeros_like(dist)
        w[dist <= flat] = 1.0
        roll = (dist > flat) & (dist < radius)
        w[roll] = 0.5 * (1 + np.cos(np.pi * (dist[roll] - flat) / (radius - flat)))
        return w


@dataclass
class SidebandResult:
    field: ComplexField
    carrier: tuple[float, float]
    nominal_carrier: tuple[float, float]
    peak_to_floor: float
    sideband_energy: float
    kept_energy: float
    discarded_energy: float

    @property
    def discarded_fraction(self) -> float:
        if self.sideband_energy == 0:
            return 0.0
        return self.discarded_energy / self.sideband_energy


def _refine_center(power, kx, ky, center, radius, n_iter=20):
    # windowed centroid iteration; fixed point is the sideband's center of mass
    for _ in range(n_iter):
        d = np.hypot(kx - center[0], ky - center[1])
        sel = d < radius
        wsum = power[sel].sum()
        if wsum <= 0:
            break
        new = np.array([(power[sel] * kx[sel]).sum(), (power[sel] * ky[sel]).sum()]) / wsum
        if np.hypot(*(new - center)) < 1e-9 * radius:
            center = new
            break
        center = new
    return center


def _refine_peak(power, kx, ky, center, radius):
    d = np.hypot(kx - center[0], ky - center[1])
    masked = np.where(d < radius, power, -np.inf)
    i, j = np.unravel_index(np.argmax(masked), power.shape)
    step = kx[1, 0] - kx[0, 0]
    out = np.array([kx[i, j], ky[i, j]], dtype=float)
    # three-point parabola on each axis for the sub-pixel offset
    for axis, (a, b) in enumerate((((i - 1, j), (i + 1, j)), ((i, j - 1), (i, j + 1)))):
        try:
            lo, mid, hi = power[a], power[i, j], power[b]
        except IndexError:
            continue
        den = lo - 2 * mid + hi
        if den < 0:
            out[axis] += 0.5 * (lo - hi) / den * step
    return out


def reconstruct_offaxis(interferogram: CoincidenceImage, ref: ReferenceSpec,
                        filt: SidebandFilter | None = None, *,
                        require_carrier: bool = True, full_output: bool = False):
    """Recover the field ∝ E_p(2ρ) from an off-axis coincidence interferogram.

    Returns the unnormalized complex field, or a :class:`SidebandResult`
    when ``full_output`` is set.
    """
    filt = filt or SidebandFilter()
    grid = interferogram.grid
    img = ComplexField(grid, np.asarray(interferogram.counts, dtype=float))
    spec = fourier_transform(img, "forward")
    kx, ky = spec.grid.coords()
    mag = np.abs(spec.values)
    floor = max(float(np.median(mag)), ROUNDOFF_FLOOR * float(mag.max()))

    nominal, radius = filt.resolve(ref)
    in_disk = np.hypot(kx - nominal[0], ky - nominal[1]) < radius
    peak = float(mag[in_disk].max()) if in_disk.any() else 0.0
    ratio = peak / floor if floor > 0 else (np.inf if peak > 0 else 0.0)
    if require_carrier and not ratio > PEAK_TO_FLOOR:
        raise CarrierNotFoundError(
            f"no carrier peak near q={tuple(np.round(nominal, 3))} rad/mm "
            f"(peak/floor = {ratio:.2f} <= {PEAK_TO_FLOOR}); check the reference "
            "period and that the interferogram contains the reference beam")

    # spectral noise power is ~exponential, so its mean is median/ln 2
    noise_power = float(np.median(mag ** 2)) / np.log(2)
    excess = np.clip(mag ** 2 - noise_power, 0, None)
    center = nominal.copy()
    if filt.refine == "centroid" and ratio > PEAK_TO_FLOOR:
        center = _refine_center(excess, kx, ky, center, radius)
    elif filt.refine == "peak" and ratio > PEAK_TO_FLOOR:
        center = _refine_peak(excess, kx, ky, center, radius)

    dist = np.hypot(kx - center[0], ky - center[1])
    w = filt.weights(dist, radius)

    # energy bookkeeping over the Voronoi cell of the sideband (vs DC and twin)
    d_dc = np.hypot(kx, ky)
    d_twin = np.hypot(kx + center[0], ky + center[1])
    cell = (dist < d_dc) & (dist < d_twin)
    power = mag[cell] ** 2
    total = max(float(power.sum() - noise_power * cell.sum()), 0.0)
    kept = min(max(float((w[cell] ** 2 * power).sum() - noise_power * (w[cell] ** 2).sum()),
                   0.0), total)
    discarded = total - kept
    if total > 0 and discarded / total > 0.05:
        warnings.warn(
            f"sideband filter discards {discarded / total:.1%} of the sideband energy",
            BiphotonWarning, stacklevel=2)

    filtered = fourier_transform(ComplexField(spec.grid, spec.values * w), "inverse")
    x, y = grid.coords()
    demod = filtered.values * np.exp(-1j * (center[0] * x + center[1] * y))

    env = ref.a * np.exp(-4 * (x ** 2 + y ** 2) / ref.w_r ** 2)
    ok = env > ENVELOPE_FLOOR * env.max() if env.max() > 0 else np.zeros_like(env, bool)
    out = np.zeros_like(demod)
    out[ok] = demod[ok] / env[ok]
    field = ComplexField(grid, out)
    if not full_output:
        return field
    return SidebandResult(field, tuple(center), tuple(nominal), ratio, total, kept, discarded)


def amplitude_from_counts(pump_only: CoincidenceImage) -> ComplexField:
    counts = np.asarray(pump_only.counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    if not np.any(counts > 0):
        raise ValueError("pump-only image is empty")
    return ComplexField(pump_only.grid, np.sqrt(counts)).normalized()


def combine_amplitude_phase(amp: ComplexField, phase_source: ComplexField) -> ComplexField:
    """``|amp|·exp(i·arg(phase_source))``, normalized."""
    if amp.grid != phase_source.grid:
        raise GridMismatchError(f"grid mismatch: {amp.grid} vs {phase_source.grid}")
    vals = np.abs(amp.values) * np.exp(1j * np.angle(phase_source.values))
    return ComplexField(amp.grid, vals).normalized()


def reconstruct_state(interference: CoincidenceImage, ref: ReferenceSpec,
                      pump_only: CoincidenceImage | None = None,
                      filt: SidebandFilter | None = None):
    """Full pipeline: phase from the hologram, amplitude from the pump-only image.

    Without a pump-only image both come from the sideband.  Returns
    ``(field, SidebandResult, mode)`` with ``mode`` in {"combined", "hologram-only"}.
    """
    res = reconstruct_offaxis(interference, ref, filt, full_output=True)
    if pump_only is None:
        return res.field.normalized(), res, "hologram-only"
    if pump_only.grid != interference.grid:
        raise GridMismatchError("pump-only and interference images are on different grids")
    amp = amplitude_from_counts(pump_only)
    return combine_amplitude_phase(amp, res.field), res, "combined"
