import numpy as np
import pytest

from biphoton.errors import BiphotonWarning
from biphoton.fields import HG, LG, ComplexField, OAMGauss, Superposition, evaluate_mode
from biphoton.holography import reconstruct_state
from biphoton.modal import (ModalCoefficients, bell_state_coefficients, bootstrap_uncertainty,
                            conservation_diagnostics, correlation_matrix, fidelity,
                            hg_decompose, lg_decompose, oam_coefficients)
from biphoton.spdc import CoincidenceImage, synthesize_hologram_pair, thin_crystal_state

W = 1.76


def _state(mode, grid):
    return thin_crystal_state(evaluate_mode(mode, grid))


def _law_mass(coeffs, l_p):
    return conservation_diagnostics(correlation_matrix(coeffs), l_p)["mass_on_law"]


# --- OAM -------------------------------------------------------------------

@pytest.mark.parametrize("l", [2, 4, -1])
def test_oam_gauss_obeys_selection_rule(grid, l):
    c = oam_coefficients(_state(OAMGauss(l, W), grid), W)
    assert abs(_law_mass(c, l) - 1) < 1e-6


def test_gaussian_pump_is_anti_diagonal(grid):
    c = oam_coefficients(_state(LG(0, 0, W), grid), W)
    diag = conservation_diagnostics(correlation_matrix(c), 0)
    assert diag["dominant_sum"] == 0
    assert diag["mass_on_law"] > 1 - 1e-6
    assert diag["leakage"] < 1e-6


def test_cosine_pump_splits_evenly(grid):
    x, y = grid.coords()
    r2, phi = x ** 2 + y ** 2, np.arctan2(y, x)
    vals = (r2 ** 1.5) * np.exp(-r2 / W ** 2) * np.cos(3 * phi)
    st = thin_crystal_state(ComplexField(grid, vals.astype(complex)).normalized())
    c = oam_coefficients(st, W)
    P = correlation_matrix(c)
    plus, minus = _law_mass(c, 3), _law_mass(c, -3)
    assert abs(plus - minus) < 1e-9
    assert plus + minus > 1 - 1e-6
    assert P.probabilities.shape == (11, 11)


def test_oam_block_depends_on_sum_only(grid):
    c = oam_coefficients(_state(Superposition(((1, LG(0, 1, W)), (0.5j, LG(0, -2, W)))), grid),
                         W, L=3)
    ells = c.index["l_i"]
    for s in range(-6, 7):
        vals = c.coeffs[(ells[:, None] + ells[None, :]) == s]
        assert np.allclose(vals, vals[0], atol=1e-14)


def test_oam_truncation_warning(grid):
    with pytest.warns(BiphotonWarning, match="captures"):
        c = oam_coefficients(_state(OAMGauss(4, W), grid), W, L=1)
    assert c.captured_fraction < 0.9
    with pytest.raises(ValueError):
        oam_coefficients(_state(LG(0, 0, W), grid), W, L=-1)


# --- LG --------------------------------------------------------------------

@pytest.mark.parametrize("p_p,l_p", [(2, 0), (1, 1), (1, 2)])
def test_radial_slice_peaks_at_pump_index(grid, p_p, l_p):
    c = lg_decompose(_state(LG(p_p, l_p, W), grid), W, p_max=4)
    P = correlation_matrix(c, {"l_i": 0, "l_s": l_p}).probabilities
    peak = tuple(int(k) for k in np.unravel_index(np.argmax(P), P.shape))
    assert peak in {(p_p, 0), (0, p_p)}
    if l_p == 0:
        assert np.isclose(P[p_p, 0], P[0, p_p], rtol=1e-12)


def test_matched_gaussian_peaks_at_origin(grid):
    # the delta-correlated thin-crystal state spreads over many (p, l) pairs, so
    # the origin is the largest entry without holding most of the block
    c = lg_decompose(_state(LG(0, 0, W), grid), W, p_max=3, l_range=range(-2, 3))
    P = correlation_matrix(c).probabilities
    assert np.unravel_index(np.argmax(P), P.shape) == (0, 2, 0, 2)
    li, ls = np.meshgrid(c.index["l_i"], c.index["l_s"], indexing="ij")
    assert P.sum(axis=(0, 2))[li + ls != 0].max() < 1e-12


def test_lg_swap_symmetry_is_exact(grid):
    c = lg_decompose(_state(LG(1, 3, W), grid), W, p_max=3, l_range=range(-3, 4))
    np.testing.assert_array_equal(c.coeffs, c.coeffs.transpose(2, 3, 0, 1))
    assert np.isclose(np.sum(np.abs(c.coeffs) ** 2), 1.0)
    assert c.captured_fraction <= 1 + 1e-12


def test_lg_validation(grid):
    st = _state(LG(0, 0, W), grid)
    with pytest.raises(ValueError):
        lg_decompose(st, -1.0)
    with pytest.raises(ValueError):
        lg_decompose(st, W, p_max=-1)
    with pytest.raises(TypeError):
        lg_decompose(np.zeros((4, 4)), W)


# --- HG --------------------------------------------------------------------

@pytest.mark.parametrize("m_p,n_p", [(1, 0), (0, 1), (1, 1), (2, 1)])
def test_hg_parity_selection(grid, m_p, n_p):
    c = hg_decompose(_state(HG(m_p, n_p, W), grid), W)
    mi, ni, ms, ns = np.meshgrid(*[c.index[a] for a in c.axes], indexing="ij")
    off = (((mi + ms) % 2) != m_p % 2) | (((ni + ns) % 2) != n_p % 2)
    assert np.abs(c.coeffs[off]).max() < 1e-6
    diag = conservation_diagnostics(correlation_matrix(c), (m_p, n_p))
    assert abs(diag["mass_on_law"] - 1) < 1e-6


def test_hg_gaussian_peaks_at_zero(grid):
    c = hg_decompose(_state(HG(0, 0, W), grid), W)
    assert np.unravel_index(np.argmax(np.abs(c.coeffs)), c.coeffs.shape) == (0, 0, 0, 0)


def test_hg11_chessboard(grid):
    c = hg_decompose(_state(HG(1, 1, W), grid), W, N_max=4)
    board = correlation_matrix(c, {"n_i": 0, "n_s": 1}).probabilities
    zeros = (np.add.outer(np.arange(5), np.arange(5)) % 2) == 0
    assert board[zeros].max() < 1e-12
    assert board[~zeros].max() > 0.1
    np.testing.assert_array_equal(c.coeffs, c.coeffs.transpose(2, 3, 0, 1))


# --- correlation matrices and fidelity -------------------------------------

def test_correlation_sums_to_one_and_scale_invariance(grid):
    c = oam_coefficients(_state(LG(0, 1, W), grid), W)
    P = correlation_matrix(c)
    assert abs(P.probabilities.sum() - 1) < 1e-12
    assert np.all(P.probabilities >= 0)
    ells = c.index["l_i"]
    off = (ells[:, None] + ells[None, :]) != 1
    assert P.probabilities[off].max() < 1e-12
    scaled = ModalCoefficients("OAM", c.index, (3 - 2j) * c.coeffs)
    np.testing.assert_allclose(correlation_matrix(scaled).probabilities, P.probabilities,
                               rtol=1e-12, atol=1e-300)
    assert P.as_matrix().shape == (11, 11)


def test_correlation_slice_errors(grid):
    c = oam_coefficients(_state(LG(0, 1, W), grid), W, L=2)
    with pytest.raises(ValueError):
        correlation_matrix(c, {"p_i": 0})
    with pytest.raises(ValueError):
        correlation_matrix(c, {"l_i": 9})
    empty = ModalCoefficients("OAM", c.index, np.zeros_like(c.coeffs))
    with pytest.raises(ValueError):
        correlation_matrix(empty)


def test_fidelity_properties():
    rng = np.random.default_rng(3)
    idx = {"l_i": np.arange(-2, 3), "l_s": np.arange(-2, 3)}
    a = ModalCoefficients("OAM", idx, rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    b = ModalCoefficients("OAM", idx, rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
    assert np.isclose(fidelity(a, a), 1.0)
    assert np.isclose(fidelity(a, b), fidelity(b, a))
    rot = ModalCoefficients("OAM", idx, np.exp(0.7j) * b.coeffs)
    assert np.isclose(fidelity(a, rot), fidelity(a, b))
    left = np.zeros((5, 5), complex)
    left[:2] = 1
    right = np.zeros((5, 5), complex)
    right[3:] = 1
    assert fidelity(ModalCoefficients("OAM", idx, left), ModalCoefficients("OAM", idx, right)) == 0
    other = ModalCoefficients("OAM", {"l_i": np.arange(5), "l_s": np.arange(5)}, b.coeffs)
    with pytest.raises(ValueError):
        fidelity(a, other)


def test_pipeline_fidelity_cos3phi(grid, ref):
    pump = evaluate_mode(Superposition(((1, LG(1, 3, W)), (1, LG(1, -3, W)))), grid)
    only, inter = synthesize_hologram_pair(pump, ref)
    field, _, _ = reconstruct_state(inter, ref, only)
    theory = oam_coefficients(thin_crystal_state(pump), W)
    assert fidelity(oam_coefficients(field, W), theory) > 0.99


# --- Bell states -----------------------------------------------------------

def test_bell_state_examples():
    b = bell_state_coefficients(0, 5)
    nz = b.coeffs[np.abs(b.coeffs) > 0]
    assert nz.size == 11 and np.allclose(nz, 1 / np.sqrt(11))
    b = bell_state_coefficients(2, 5)
    nz = b.coeffs[np.abs(b.coeffs) > 0]
    assert nz.size == 9 and np.allclose(nz, 1 / 3)
    for l_p, L in [(0, 0), (3, 4), (-2, 3), (1, 7)]:
        assert np.isclose(np.sum(np.abs(bell_state_coefficients(l_p, L).coeffs) ** 2), 1)
    with pytest.raises(ValueError):
        bell_state_coefficients(11, 5)


def test_diagnostics_reject_other_bases(grid):
    c = lg_decompose(_state(LG(0, 0, W), grid), W, p_max=1, l_range=range(-1, 2))
    with pytest.raises(ValueError):
        conservation_diagnostics(correlation_matrix(c), 0)


def test_noisy_pipeline_keeps_law(grid, ref):
    pump = evaluate_mode(LG(0, 2, W), grid)
    only, inter = synthesize_hologram_pair(pump, ref, total_counts=1e5, seed=8)
    field, _, _ = reconstruct_state(inter, ref, only)
    assert _law_mass(oam_coefficients(field, W), 2) > 0.9


# --- bootstrap -------------------------------------------------------------

def test_bootstrap_spread_shrinks_with_counts(small_grid):
    def mean_level(img):
        return img.counts.mean() / level

    stds = []
    for level in (1e2, 1e6):
        img = CoincidenceImage(small_grid, np.full((64, 64), level))
        stds.append(bootstrap_uncertainty(mean_level, img, n_resamples=20, seed=1).std)
    assert stds[1] < stds[0] / 50
    with pytest.raises(ValueError):
        bootstrap_uncertainty(mean_level, img, n_resamples=1)


def test_bootstrap_fidelity_is_tight_at_high_counts(grid, ref):
    pump = evaluate_mode(LG(0, 1, W), grid)
    only, inter = synthesize_hologram_pair(pump, ref, total_counts=1e6)
    theory = oam_coefficients(thin_crystal_state(pump), W)

    def fid(images):
        o, i = images
        field, _, _ = reconstruct_state(i, ref, o)
        return fidelity(oam_coefficients(field, W), theory)

    res = bootstrap_uncertainty(fid, (only, inter), n_resamples=20, seed=2)
    assert res.values.shape == (20,)
    assert res.std < 0.01
    again = bootstrap_uncertainty(fid, (only, inter), n_resamples=20, seed=2)
    np.testing.assert_array_equal(res.values, again.values)
