"""Modal decomposition of thin-crystal biphoton states.

A two-photon amplitude ψ(ρ_i, ρ_s) = E_p(ρ_i + ρ_s) δ(ρ_i - ρ_s) projects onto
a product mode u_i ⊗ u_s as ∬ E_p(ρ) u_i*(ρ) u_s*(ρ) d²ρ (pump plane).  The
inputs here are crystal-plane fields ψ(ρ) ∝ E_p(2ρ); substituting ρ → 2ρ the
same integral is a quadrature of ψ against modes of half the waist, so no
resampling of the field is needed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BiphotonWarning
from .fields import ComplexField, hg_profile, lg_profile
from .spdc import BiphotonState, CoincidenceImage, add_poisson_noise

__all__ = [
    "ModalCoefficients", "CorrelationMatrix", "oam_coefficients", "lg_decompose",
    "hg_decompose", "correlation_matrix", "fidelity", "bell_state_coefficients",
    "conservation_diagnostics", "bootstrap_uncertainty", "BootstrapResult",
]

DEFAULT_L = 5
DEFAULT_P_MAX = 10
DEFAULT_N_MAX = 6
CAPTURE_WARN = 0.9
CORE_FLOOR = 1e-3

_AXES = {
    "OAM": ("l_i", "l_s"),
    "LG": ("p_i", "l_i", "p_s", "l_s"),
    "HG": ("m_i", "n_i", "m_s", "n_s"),
}


@dataclass
class ModalCoefficients:
    """Coefficient tensor over (idler indices..., signal indices...).

    ``index`` maps each axis name to the mode index carried by that axis.
    ``captured_fraction`` is the share of the state resolved by the truncated
    basis before block renormalization.
    """

    basis: str
    index: dict
    coeffs: np.ndarray
    waist: float | None = None
    captured_fraction: float = 1.0

    @property
    def axes(self) -> tuple[str, ...]:
        return _AXES[self.basis]

    def normalized(self) -> ModalCoefficients:
        nrm = np.sqrt(np.sum(np.abs(self.coeffs) ** 2))
        if nrm == 0:
            raise ValueError("coefficient block is identically zero")
        return ModalCoefficients(self.basis, self.index, self.coeffs / nrm, self.waist,
                                 self.captured_fraction)

    def rows(self):
        """Yield ``(idx_i..., idx_s..., re, im)`` for CSV export."""
        grids = np.meshgrid(*[self.index[a] for a in self.axes], indexing="ij")
        flat_idx = [g.reshape(-1) for g in grids]
        flat = self.coeffs.reshape(-1)
        for k in range(flat.size):
            yield tuple(int(ix[k]) for ix in flat_idx) + (flat[k].real, flat[k].imag)


@dataclass
class CorrelationMatrix:
    basis: str
    axes: tuple
    index: dict
    probabilities: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """Idler index tuples as rows, signal index tuples as columns."""
        half = self.probabilities.ndim // 2
        if self.probabilities.ndim % 2:
            return self.probabilities.reshape(1, -1)
        rows = int(np.prod(self.probabilities.shape[:half]))
        return self.probabilities.reshape(rows, -1)


def _crystal_field(state) -> ComplexField:
    f = state.psi if isinstance(state, BiphotonState) else state
    if not isinstance(f, ComplexField):
        raise TypeError("expected a BiphotonState or ComplexField")
    return f


def _project_pairs(psi: ComplexField, modes: np.ndarray) -> tuple[np.ndarray, float]:
    """C[a, b] = Σ ψ·conj(u_a)·conj(u_b)·pitch² over the support of ψ.

    ``modes`` has shape (M, npix) restricted to the same support.
    """
    vals = psi.values
    support = np.abs(vals) > 0
    v = vals[support]
    uc = np.conj(modes)
    c = (uc * v) @ uc.T
    c = 0.5 * (c + c.T)  # exact idler/signal swap symmetry
    # single-photon projection of the normalized field onto the truncated basis
    single = uc @ v * psi.grid.pitch ** 2
    norm2 = np.sum(np.abs(v) ** 2) * psi.grid.pitch ** 2
    captured = float(np.sum(np.abs(single) ** 2) / norm2) if norm2 > 0 else 0.0
    return c * psi.grid.pitch ** 2, captured


def _warn_capture(basis, captured):
    if captured < CAPTURE_WARN:
        warnings.warn(
            f"{basis} truncation captures only {captured:.3f} of the state",
            BiphotonWarning, stacklevel=3)


def _normalize_block(c: np.ndarray) -> np.ndarray:
    nrm = np.sqrt(np.sum(np.abs(c) ** 2))
    if nrm == 0:
        raise ValueError("state has no overlap with the truncated basis")
    return c / nrm


def _azimuthal_spectrum(psi: ComplexField, weight, r_max: float,
                        n_r: int = 192, n_phi: int = 256):
    """Radial nodes/weights and F_m(r) = (1/2π)∮ ψ·weight·exp(-imφ) dφ.

    ψ is spline-interpolated onto a polar grid; a Cartesian pixel sum would
    alias exp(-imφ) near the origin onto the square lattice.  A field that is
    bright at the origin and winds around it (exp(ilφ) on a Gaussian) is
    discontinuous there, so its winding is divided out before a second
    interpolation and restored exactly on the polar nodes.
    """
    from scipy import ndimage

    grid = psi.grid
    xg, wg = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * r_max * (xg + 1)
    wr = 0.5 * r_max * wg
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    coords = np.stack([rr * np.cos(pp), rr * np.sin(pp)]) / grid.pitch + grid.n // 2
    m = np.fft.fftfreq(n_phi, 1.0 / n_phi).astype(int)

    def spectrum(values, l0):
        re = ndimage.map_coordinates(values.real, coords, order=3, mode="grid-constant")
        im = ndimage.map_coordinates(values.imag, coords, order=3, mode="grid-constant")
        samples = (re + 1j * im) * weight(rr) * np.exp(1j * l0 * pp)
        return np.fft.fft(samples, axis=1) / n_phi

    fm = spectrum(psi.values, 0)
    center = abs(psi.values[grid.n // 2, grid.n // 2])
    if center <= CORE_FLOOR * np.abs(psi.values).max():
        return r, wr, m, fm
    # winding carried by the bright core, read two pixels out
    ring = np.argmin(np.abs(r - 2 * grid.pitch))
    l0 = int(m[np.argmax(np.abs(fm[ring]))])
    if l0 != 0:
        _, phi_grid = grid.polar()
        fm = spectrum(psi.values * np.exp(-1j * l0 * phi_grid), l0)
    return r, wr, m, fm


def oam_coefficients(state, w_p: float, L: int = DEFAULT_L) -> ModalCoefficients:
    """OAM coefficients with Gaussian radial kets of pump-plane waist ``w_p``.

    c_{l_i, l_s} = ∬ E_p exp(-2r²/w_p²) exp(-i(l_i+l_s)φ) depends on the sum
    only.  ``captured_fraction`` is the share of the kernel-weighted field's
    azimuthal power at |l_i + l_s| <= 2L.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    if not w_p > 0:
        raise ValueError("waist must be positive")
    psi = _crystal_field(state)
    # crystal-plane kernel of two kets: exp(-2(2r)²/w_p²); negligible beyond 2 w_p
    r_max = min(2 * w_p, (psi.grid.n // 2 - 2) * psi.grid.pitch)
    r, wr, m, fm = _azimuthal_spectrum(psi, lambda rr: np.exp(-8 * rr ** 2 / w_p ** 2), r_max)
    spectrum = 2 * np.pi * (wr * r) @ fm
    power = (wr * r) @ np.abs(fm) ** 2
    total = power.sum()
    captured = float(power[np.abs(m) <= 2 * L].sum() / total) if total > 0 else 0.0
    _warn_capture("OAM", captured)

    ells = np.arange(-L, L + 1)
    sums = ells[:, None] + ells[None, :]
    lookup = dict(zip(m.tolist(), spectrum))
    block = np.array([[lookup[int(s)] for s in row] for row in sums])
    return ModalCoefficients("OAM", {"l_i": ells, "l_s": ells}, _normalize_block(block),
                             w_p, captured)


def lg_decompose(state, w: float, p_max: int = DEFAULT_P_MAX,
                 l_range: Sequence[int] | None = None) -> ModalCoefficients:
    if not w > 0:
        raise ValueError("waist must be positive")
    if p_max < 0:
        raise ValueError("p_max must be >= 0")
    psi = _crystal_field(state)
    ps = np.arange(p_max + 1)
    ls = np.asarray(l_range if l_range is not None else range(-DEFAULT_L, DEFAULT_L + 1))
    r, phi = psi.grid.polar()
    support = np.abs(psi.values) > 0
    rs, phs = r[support], phi[support]
    modes = np.array([lg_profile(int(p), int(l), w / 2, rs, phs) for p in ps for l in ls])
    c, captured = _project_pairs(psi, modes)
    _warn_capture("LG", captured)
    P, Lr = ps.size, ls.size
    block = _normalize_block(c.reshape(P, Lr, P, Lr))
    index = {"p_i": ps, "l_i": ls, "p_s": ps, "l_s": ls}
    return ModalCoefficients("LG", index, block, w, captured)


def hg_decompose(state, w: float, N_max: int = DEFAULT_N_MAX) -> ModalCoefficients:
    if not w > 0:
        raise ValueError("waist must be positive")
    if N_max < 0:
        raise ValueError("N_max must be >= 0")
    psi = _crystal_field(state)
    x, y = psi.grid.coords()
    support = np.abs(psi.values) > 0
    xs, ys = x[support], y[support]
    ms = np.arange(N_max + 1)
    modes = np.array([hg_profile(int(m), int(n), w / 2, xs, ys) for m in ms for n in ms])
    c, captured = _project_pairs(psi, modes.astype(np.complex128))
    _warn_capture("HG", captured)
    N = ms.size
    block = _normalize_block(c.reshape(N, N, N, N))
    index = {"m_i": ms, "n_i": ms, "m_s": ms, "n_s": ms}
    return ModalCoefficients("HG", index, block, w, captured)


def correlation_matrix(coeffs: ModalCoefficients, fixed: dict | None = None) -> CorrelationMatrix:
    """|C|² over the block (optionally sliced at fixed index values), summing to 1.

    ``fixed`` maps axis names to index values, e.g. ``{"l_i": 0, "l_s": 2}``.
    """
    probs = np.abs(coeffs.coeffs) ** 2
    axes = list(coeffs.axes)
    index = dict(coeffs.index)
    for name, value in (fixed or {}).items():
        if name not in axes:
            raise ValueError(f"unknown axis {name!r} for basis {coeffs.basis}")
        hits = np.flatnonzero(np.asarray(index[name]) == value)
        if hits.size == 0:
            raise ValueError(f"{name}={value} outside the truncated range")
        probs = np.take(probs, hits[0], axis=axes.index(name))
        axes.remove(name)
        index.pop(name)
    s = probs.sum()
    if s == 0:
        raise ValueError("selected slice carries no probability")
    return CorrelationMatrix(coeffs.basis, tuple(axes), index, probs / s)


def _same_ranges(a: ModalCoefficients, b: ModalCoefficients) -> bool:
    if a.basis != b.basis or a.coeffs.shape != b.coeffs.shape:
        return False
    return all(np.array_equal(a.index[k], b.index[k]) for k in a.axes)


def fidelity(measured: ModalCoefficients, theory: ModalCoefficients) -> float:
    """|Σ conj(C_meas)·C_th|² after renormalizing both blocks."""
    if not _same_ranges(measured, theory):
        raise ValueError("coefficient sets use different bases or index ranges")
    a = measured.normalized().coeffs
    b = theory.normalized().coeffs
    return float(min(abs(np.vdot(a, b)) ** 2, 1.0))


def bell_state_coefficients(l_p: int, L: int = DEFAULT_L) -> ModalCoefficients:
    """Uniform superposition of |l⟩|l_p - l⟩ over all pairs inside [-L, L]²."""
    ells = np.arange(-L, L + 1)
    pairs = (ells[:, None] + ells[None, :]) == l_p
    count = int(pairs.sum())
    if L < 0 or count == 0:
        raise ValueError(f"no OAM pairs summing to {l_p} within |l| <= {L}")
    block = pairs / np.sqrt(count)
    return ModalCoefficients("OAM", {"l_i": ells, "l_s": ells}, block.astype(complex))


def conservation_diagnostics(corr: CorrelationMatrix, pump) -> dict:
    """Probability mass obeying the selection rule of the pump.

    OAM: ``pump`` is l_p and the law is l_i + l_s = l_p.  HG: ``pump`` is
    (m_p, n_p) and the law is parity (m_i+m_s, n_i+n_s) ≡ (m_p, n_p) mod 2.
    """
    P = corr.probabilities
    if corr.basis == "OAM":
        if corr.axes != ("l_i", "l_s"):
            raise ValueError("OAM diagnostics need the full (l_i, l_s) matrix")
        sums = corr.index["l_i"][:, None] + corr.index["l_s"][None, :]
        on = sums == int(pump)
        uniq = np.unique(sums)
        per_sum = np.array([P[sums == s].sum() for s in uniq])
        report = {"law": "l_i + l_s = l_p", "dominant_sum": int(uniq[np.argmax(per_sum)])}
    elif corr.basis == "HG":
        if corr.axes != _AXES["HG"]:
            raise ValueError("HG diagnostics need the full (m_i, n_i, m_s, n_s) tensor")
        m_p, n_p = pump
        mi, ni, msg, nsg = np.meshgrid(*[corr.index[a] for a in corr.axes], indexing="ij")
        on = (((mi + msg) % 2) == m_p % 2) & (((ni + nsg) % 2) == n_p % 2)
        report = {"law": "(m_i+m_s, n_i+n_s) = (m_p, n_p) mod 2"}
    else:
        raise ValueError(f"no conservation law implemented for basis {corr.basis}")
    mass = float(P[on].sum())
    report.update(mass_on_law=mass, leakage=float(max(1.0 - mass, 0.0)))
    return report


@dataclass
class BootstrapResult:
    mean: float
    std: float
    values: np.ndarray = field(repr=False)


def bootstrap_uncertainty(closure: Callable, image, n_resamples: int = 20,
                          seed: int = 0) -> BootstrapResult:
    """Spread of a scalar diagnostic over Poisson re-draws of the count image(s).

    ``image`` is a CoincidenceImage or a tuple of them; ``closure`` receives
    the perturbed object with the same structure.
    """
    if n_resamples < 2:
        raise ValueError("need at least two resamples")
    images = (image,) if isinstance(image, CoincidenceImage) else tuple(image)
    children = np.random.SeedSequence(seed).spawn(n_resamples)
    values = []
    for child in children:
        seeds = child.generate_state(len(images))
        perturbed = tuple(add_poisson_noise(im, int(s)) for im, s in zip(images, seeds))
        values.append(float(closure(perturbed[0] if isinstance(image, CoincidenceImage)
                                    else perturbed)))
    values = np.asarray(values)
    return BootstrapResult(float(values.mean()), float(values.std(ddof=1)), values)
