"""Thin-crystal biphoton states, coincidence-image synthesis and phase matching.

In the thin-crystal limit the diagonal two-photon amplitude on the crystal
plane is the pump evaluated at twice the coordinate, ψ(ρ) ∝ E_p(2ρ).  Both
live on the same GridSpec here: ``psi`` is the pump resampled by a factor 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .fields import ComplexField, GridSpec, resample_scaled

__all__ = [
    "BiphotonState", "PhaseMatchingParams", "CoincidenceImage", "ReferenceSpec",
    "thin_crystal_state", "reference_field", "coincidence_diagonal",
    "phase_matching_amplitude", "far_field_singles", "add_poisson_noise",
    "synthesize_hologram_pair", "sinc", "PM_MODELS",
]

PM_MODELS = ("sinc", "sinc2")


@dataclass
class BiphotonState:
    psi: ComplexField
    w_p: float | None = None


@dataclass(frozen=True)
class PhaseMatchingParams:
    A: float
    alpha: float
    zeta: float

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("phase-matching amplitude A must be positive")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


@dataclass
class CoincidenceImage:
    """Counts on a grid.  ``plane`` is ``"image"`` (crystal plane) or ``"farfield"``.

    Values are expected rates (float) or sampled counts (integers).  Signed
    values only arise from the amplitude-level ``sinc`` far-field model.
    """

    grid: GridSpec
    counts: np.ndarray
    plane: str = "image"

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.counts.shape != (self.grid.n, self.grid.n):
            raise ValueError("counts shape does not match grid")
        if not np.all(np.isfinite(self.counts)):
            raise ValueError("counts must be finite")
        if self.plane not in ("image", "farfield"):
            raise ValueError(f"unknown plane {self.plane!r}")

    @property
    def total(self) -> float:
        return float(self.counts.sum())


@dataclass(frozen=True)
class ReferenceSpec:
    """Tilted wide Gaussian a·exp(-r²/w_r²)·exp(i2π(x+y)/Λ) on the pump plane."""

    w_r: float
    Lambda: float
    a: float = 1.0

    def __post_init__(self):
        if not self.w_r > 0:
            raise ValueError("reference waist must be positive")
        if not self.Lambda > 0:
            raise ValueError("carrier period must be positive")
        if self.a < 0:
            raise ValueError("amplitude ratio must be >= 0")

    def carrier(self, plane: str = "image") -> tuple[float, float]:
        """Nominal wavevector of the ``E_p·conj(E_ref)`` term (rad/mm per axis).

        On the crystal image plane the reference is seen at 2ρ, which doubles
        the carrier.  The sign follows the forward transform exp(-iq·ρ).
        """
        k = 2 * np.pi / self.Lambda
        if plane == "image":
            k *= 2
        return (-k, -k)


def thin_crystal_state(pump: ComplexField, w_p: float | None = None) -> BiphotonState:
    """ψ(ρ) = normalize(E_p(2ρ)) on the pump grid."""
    pump_norm2 = pump.norm() ** 2
    if pump_norm2 == 0:
        raise ValueError("pump field is zero")
    psi = resample_scaled(pump, 2.0)
    # ∬|E(2ρ)|² d²ρ = ¼ ∬|E|² d²ρ when nothing is lost
    kept = 4 * psi.norm() ** 2 / pump_norm2
    if abs(1 - kept) > 0.01:
        raise ValueError(
            f"pump under-resolved by the 2ρ rescale: energy changes by {1 - kept:.3%}")
    return BiphotonState(psi.normalized(), w_p)


def reference_field(ref: ReferenceSpec, grid: GridSpec, peak: float = 1.0) -> ComplexField:
    """Reference pump on ``grid``; ``peak`` sets the pump peak the ratio refers to."""
    if ref.Lambda <= 2 * grid.pitch:
        raise ValueError(
            f"carrier period {ref.Lambda} mm aliases on a {grid.pitch} mm grid")
    x, y = grid.coords()
    env = ref.a * peak * np.exp(-(x ** 2 + y ** 2) / ref.w_r ** 2)
    if math.isinf(ref.Lambda):
        return ComplexField(grid, env.astype(np.complex128))
    return ComplexField(grid, env * np.exp(1j * 2 * np.pi * (x + y) / ref.Lambda))


def _reference_at_2rho(ref: ReferenceSpec, grid: GridSpec, peak: float) -> np.ndarray:
    # sampling on a doubled pitch is E_ref(2ρ) without cutting it at the grid edge
    return reference_field(ref, GridSpec(grid.n, 2 * grid.pitch), peak).values


def coincidence_diagonal(pump: ComplexField, ref: ComplexField | ReferenceSpec | None = None,
                         total_counts: float | None = None,
                         ref_peak: float = 1.0) -> CoincidenceImage:
    """Expected diagonal coincidences |E_p(2ρ) + E_ref(2ρ)|².

    ``ref`` may be a pump-plane field (resampled like the pump) or a
    ReferenceSpec, evaluated in closed form at 2ρ with amplitude
    ``ref.a * ref_peak``.
    """
    amp = resample_scaled(pump, 2.0).values
    if isinstance(ref, ReferenceSpec):
        amp = amp + _reference_at_2rho(ref, pump.grid, ref_peak)
    elif ref is not None:
        if ref.grid != pump.grid:
            raise GridMismatchError(f"grid mismatch: {pump.grid} vs {ref.grid}")
        amp = amp + resample_scaled(ref, 2.0).values
    counts = np.abs(amp) ** 2
    if total_counts is not None:
        s = counts.sum()
        if s > 0:
            counts = counts * (total_counts / s)
    return CoincidenceImage(pump.grid, counts, plane="image")


def sinc(x):
    """sin(x)/x with sinc(0) = 1 (unnormalized, unlike numpy.sinc)."""
    return np.sinc(np.asarray(x) / np.pi)


def phase_matching_amplitude(q_i, q_s, pm: PhaseMatchingParams) -> float:
    dq2 = (q_i[0] - q_s[0]) ** 2 + (q_i[1] - q_s[1]) ** 2
    return float(pm.A * sinc(pm.alpha * dq2 + pm.zeta))


def far_field_singles(pm: PhaseMatchingParams, grid: GridSpec,
                      model: str = "sinc2") -> CoincidenceImage:
    """A·f(4α|q|² + ζ) on a wavevector grid (pitch in rad/mm), q_s = -q_i."""
    if model not in PM_MODELS:
        raise ValueError(f"model must be one of {PM_MODELS}")
    qx, qy = grid.coords()
    s = sinc(4 * pm.alpha * (qx ** 2 + qy ** 2) + pm.zeta)
    vals = pm.A * (s ** 2 if model == "sinc2" else s)
    return CoincidenceImage(grid, vals, plane="farfield")


def add_poisson_noise(image: CoincidenceImage, seed: int) -> CoincidenceImage:
    counts = np.asarray(image.counts, dtype=np.float64)
    if np.any(counts < 0):
        raise ValueError("Poisson means must be nonnegative")
    rng = np.random.default_rng(seed)
    return CoincidenceImage(image.grid, rng.poisson(counts), plane=image.plane)


def synthesize_hologram_pair(pump: ComplexField, ref: ReferenceSpec,
                             total_counts: float | None = None,
                             seed: int | None = None):
    """Pump-only and interference coincidence images for one pump.

    The reference amplitude is scaled to the pump peak times ``ref.a``.
    Returns ``(pump_only, interference)``; Poisson-sampled when ``seed`` is given.
    """
    peak = float(np.abs(pump.values).max())
    pump_only = coincidence_diagonal(pump, None, total_counts)
    interference = coincidence_diagonal(pump, ref, total_counts, ref_peak=peak)
    if seed is not None:
        ss = np.random.SeedSequence(seed).spawn(2)
        pump_only = add_poisson_noise(pump_only, int(ss[0].generate_state(1)[0]))
        interference = add_poisson_noise(interference, int(ss[1].generate_state(1)[0]))
    return pump_only, interference
