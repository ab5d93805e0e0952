import numpy as np
import pytest
from scipy import ndimage

from biphoton.errors import GridMismatchError
from biphoton.fields import LG, ComplexField, GridSpec, Superposition, evaluate_mode, overlap
from biphoton.spdc import (CoincidenceImage, PhaseMatchingParams, ReferenceSpec,
                           add_poisson_noise, coincidence_diagonal, far_field_singles,
                           phase_matching_amplitude, reference_field, sinc,
                           synthesize_hologram_pair, thin_crystal_state)

W = 1.76


def test_state_of_lg_is_lg_at_half_waist(grid):
    st = thin_crystal_state(evaluate_mode(LG(0, 1, W), grid))
    assert np.isclose(st.psi.norm(), 1.0)
    assert st.psi.grid == grid
    assert overlap(st.psi, evaluate_mode(LG(0, 1, W / 2), grid)) > 1 - 1e-12


def test_cos3phi_pump_gives_six_phase_sectors(grid):
    pump = evaluate_mode(Superposition(((1, LG(1, 3, W)), (1, LG(1, -3, W)))), grid)
    psi = thin_crystal_state(pump).psi.values
    x, y = grid.coords()
    r, phi = np.hypot(x, y), np.arctan2(y, x)
    ring = (np.abs(r - W / 4) < 0.1) & (np.abs(np.cos(3 * phi)) > 0.3)
    ph = np.angle(psi[ring] * np.sign(np.cos(3 * phi[ring])))
    # relative phase between neighbouring sectors is π; within a sector it is flat
    ph = np.angle(np.exp(1j * (ph - ph[0])))
    assert np.abs(ph).max() < 1e-9


def test_under_resolved_pump_is_rejected(grid):
    with pytest.raises(ValueError):
        thin_crystal_state(evaluate_mode(LG(0, 0, 2 * grid.pitch), grid))
    with pytest.raises(ValueError):
        thin_crystal_state(ComplexField(grid, np.zeros((grid.n, grid.n), complex)))


# --- reference -------------------------------------------------------------

def test_reference_without_tilt_is_plain_gaussian(grid):
    f = reference_field(ReferenceSpec(3.0, np.inf, 1.0), grid)
    x, y = grid.coords()
    np.testing.assert_allclose(f.values, np.exp(-(x ** 2 + y ** 2) / 9.0), atol=1e-15)


def test_reference_phase_step(grid):
    lam = 0.55
    f = reference_field(ReferenceSpec(3.0, lam, 0.7), grid)
    step = np.angle(f.values[1:, :] * np.conj(f.values[:-1, :]))
    assert np.allclose(step, 2 * np.pi * grid.pitch / lam, atol=1e-12)
    assert np.isclose(np.abs(f.values).max(), 0.7)


def test_reference_spectrum_peaks_at_carrier(grid):
    lam = 0.55
    f = reference_field(ReferenceSpec(3.0, lam), grid)
    spec = np.abs(np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(f.values))))
    # forward kernel exp(-iq·ρ): exp(+i k x) lands at +k
    dq = 2 * np.pi / (grid.n * grid.pitch)
    i, j = np.unravel_index(np.argmax(spec), spec.shape)
    k = 2 * np.pi / lam
    assert abs((i - grid.n // 2) * dq - k) <= dq / 2
    assert abs((j - grid.n // 2) * dq - k) <= dq / 2


def test_reference_validation(grid):
    with pytest.raises(ValueError):
        ReferenceSpec(-1.0, 0.5)
    with pytest.raises(ValueError):
        ReferenceSpec(1.0, 0.5, -0.1)
    with pytest.raises(ValueError):
        reference_field(ReferenceSpec(3.0, 2 * grid.pitch), grid)
    assert ReferenceSpec(3.0, 0.5).carrier("pump") == pytest.approx((-4 * np.pi, -4 * np.pi))
    assert ReferenceSpec(3.0, 0.5).carrier() == pytest.approx((-8 * np.pi, -8 * np.pi))


# --- coincidence images ----------------------------------------------------

def test_pump_only_image_is_state_intensity(grid):
    pump = evaluate_mode(LG(1, -2, W), grid)
    img = coincidence_diagonal(pump, None, total_counts=1e5)
    psi2 = np.abs(thin_crystal_state(pump).psi.values) ** 2
    assert np.isclose(img.total, 1e5)
    np.testing.assert_allclose(img.counts / img.total, psi2 / psi2.sum(), atol=1e-15)


def test_reference_equal_to_pump_quadruples(grid):
    pump = evaluate_mode(LG(0, 2, W), grid)
    alone = coincidence_diagonal(pump).counts
    both = coincidence_diagonal(pump, pump).counts
    np.testing.assert_allclose(both, 4 * alone, rtol=1e-12, atol=1e-300)


def test_grid_mismatch(grid, small_grid):
    pump = evaluate_mode(LG(0, 0, W), grid)
    with pytest.raises(GridMismatchError):
        coincidence_diagonal(pump, evaluate_mode(LG(0, 0, W), small_grid))


def test_fringe_period_is_half_lambda(grid):
    lam = 0.55
    pump = evaluate_mode(LG(0, 0, W), grid)
    img = coincidence_diagonal(pump, ReferenceSpec(3.0, lam), ref_peak=np.abs(pump.values).max())
    row = img.counts[:, grid.n // 2]
    x = (np.arange(grid.n) - grid.n // 2) * grid.pitch
    sel = np.abs(x) < 1.0
    peaks = [i for i in np.flatnonzero(sel)[1:-1] if row[i] > row[i - 1] and row[i] >= row[i + 1]]
    # sub-pixel peak positions by parabola
    pos = []
    for i in peaks:
        lo, mid, hi = row[i - 1], row[i], row[i + 1]
        pos.append(x[i] + 0.5 * (lo - hi) / (lo - 2 * mid + hi) * grid.pitch)
    spacing = np.diff(pos)
    assert np.isclose(np.mean(spacing), lam / 2, rtol=0.02)


def test_interference_bound(grid, ref):
    pump = evaluate_mode(LG(1, 1, W), grid)
    peak = np.abs(pump.values).max()
    c = coincidence_diagonal(pump, ref, ref_peak=peak).counts
    p = np.abs(coincidence_diagonal(pump).counts)
    x, y = grid.coords()
    r = (ref.a * peak) ** 2 * np.exp(-8 * (x ** 2 + y ** 2) / ref.w_r ** 2)
    lo = p + r - 2 * np.sqrt(p * r)
    hi = p + r + 2 * np.sqrt(p * r)
    tol = 1e-12 * hi.max()
    assert np.all(c >= lo - tol) and np.all(c <= hi + tol)


def test_closed_form_reference_matches_resampled(grid, ref):
    # inside |ρ| < extent/2 the resampled pump-plane field is exact
    pump = evaluate_mode(LG(0, 0, W), grid)
    a = coincidence_diagonal(pump, ref).counts
    b = coincidence_diagonal(pump, reference_field(ref, grid)).counts
    q = slice(grid.n // 4 + 1, 3 * grid.n // 4)
    np.testing.assert_allclose(a[q, q], b[q, q], rtol=1e-10)


def test_image_validation(small_grid):
    with pytest.raises(ValueError):
        CoincidenceImage(small_grid, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        CoincidenceImage(small_grid, np.full((64, 64), np.inf))
    with pytest.raises(ValueError):
        CoincidenceImage(small_grid, np.zeros((64, 64)), plane="pupil")


# --- phase matching --------------------------------------------------------

def test_phase_matching_amplitude_examples():
    pm = PhaseMatchingParams(93.0, 9.1e-6, 0.0)
    assert phase_matching_amplitude((3.0, 1.0), (3.0, 1.0), pm) == pytest.approx(93.0)
    dq = np.sqrt(np.pi / pm.alpha)
    assert abs(phase_matching_amplitude((dq, 0.0), (0.0, 0.0), pm)) < 1e-12
    pm = PhaseMatchingParams(93.0, 9.1e-6, 0.30)
    assert phase_matching_amplitude((0, 0), (0, 0), pm) == pytest.approx(93 * np.sin(0.3) / 0.3)
    with pytest.raises(ValueError):
        PhaseMatchingParams(0.0, 1e-6, 0)
    with pytest.raises(ValueError):
        PhaseMatchingParams(1.0, -1e-6, 0)


def test_sinc_is_unnormalized():
    assert sinc(0.0) == 1.0
    assert np.isclose(sinc(np.pi / 2), 2 / np.pi)


def test_far_field_center_and_zero_ring():
    g = GridSpec(128, 8.0)
    pm = PhaseMatchingParams(93.0, 9.1e-6, 0.0)
    img = far_field_singles(pm, g)
    assert img.plane == "farfield"
    assert img.counts[64, 64] == pytest.approx(93.0)
    pm = PhaseMatchingParams(93.0, 9.1e-6, 0.3)
    q0 = np.sqrt((np.pi - 0.3) / (4 * pm.alpha))
    for model in ("sinc", "sinc2"):
        one = far_field_singles(pm, GridSpec(8, q0 / 2), model)
        # pixel (n/2 + 2, n/2) sits exactly on the zero ring
        assert abs(one.counts[6, 4]) < 1e-12
    with pytest.raises(ValueError):
        far_field_singles(pm, g, "gauss")


def test_sinc_model_is_signed():
    pm = PhaseMatchingParams(93.0, 9.1e-6, 0.3)
    img = far_field_singles(pm, GridSpec(128, 8.0), "sinc")
    assert img.counts.min() < 0
    sq = far_field_singles(pm, GridSpec(128, 8.0), "sinc2")
    np.testing.assert_allclose(sq.counts, img.counts ** 2 / 93.0, rtol=1e-12)


def test_far_field_is_radially_symmetric():
    g = GridSpec(256, 2.0)
    img = far_field_singles(PhaseMatchingParams(93.0, 9.1e-6, 0.3), g).counts
    np.testing.assert_array_equal(img, img.T)
    inner = img[1:, 1:]
    np.testing.assert_allclose(inner, inner[::-1, ::-1], rtol=1e-12)
    rot = ndimage.rotate(img, 30.0, reshape=False, order=3)
    q = slice(64, 193)
    assert np.abs(rot[q, q] - img[q, q]).max() < 1e-2 * img.max()


# --- noise -----------------------------------------------------------------

def test_poisson_zero_image(small_grid):
    img = CoincidenceImage(small_grid, np.zeros((64, 64)))
    assert add_poisson_noise(img, 3).total == 0


def test_poisson_total_and_determinism(grid):
    pump = evaluate_mode(LG(0, 0, W), grid)
    mean = coincidence_diagonal(pump, total_counts=1e6)
    a, b = add_poisson_noise(mean, 11), add_poisson_noise(mean, 11)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert abs(a.total - 1e6) < 4e3
    assert not np.array_equal(a.counts, add_poisson_noise(mean, 12).counts)


def test_poisson_variance_matches_mean():
    g = GridSpec(8, 1.0)
    means = np.linspace(2, 60, 64).reshape(8, 8)
    img = CoincidenceImage(g, means)
    draws = np.stack([add_poisson_noise(img, s).counts for s in range(10_000)])
    np.testing.assert_allclose(draws.var(axis=0, ddof=1), means, rtol=0.05)


def test_poisson_keeps_zero_set(grid):
    mean = coincidence_diagonal(evaluate_mode(LG(0, 3, W), grid), total_counts=1e5)
    noisy = add_poisson_noise(mean, 5).counts
    assert np.all(noisy[mean.counts == 0] == 0)
    with pytest.raises(ValueError):
        add_poisson_noise(CoincidenceImage(GridSpec(8, 1.0), -np.ones((8, 8))), 0)


def test_hologram_pair_shares_total(grid, ref):
    pump = evaluate_mode(LG(0, 1, W), grid)
    only, inter = synthesize_hologram_pair(pump, ref, total_counts=1e5)
    assert np.isclose(only.total, 1e5) and np.isclose(inter.total, 1e5)
    n_only, n_inter = synthesize_hologram_pair(pump, ref, total_counts=1e5, seed=4)
    assert n_only.counts.dtype.kind == "i"
    assert not np.array_equal(n_only.counts, n_inter.counts)
