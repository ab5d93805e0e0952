"""Acceptance criteria 1-9, one PASS/FAIL line each in the terminal summary."""
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, write_smiley
from oracles import hg_oracle, lg_oracle, oam_oracle

from biphoton.events import (BACKEND, EventTable, RegionLayout, background_filter,
                             find_coincidences, matching_scores, spatial_correlation,
                             synthesize_event_stream)
from biphoton.fields import (HG, LG, GridSpec, OAMGauss, RasterImage, Superposition,
                             evaluate_mode, overlap)
from biphoton.fitting import derive_crystal_length, fit_phase_matching
from biphoton.holography import reconstruct_state
from biphoton.modal import (bell_state_coefficients, conservation_diagnostics, correlation_matrix,
                            fidelity, hg_decompose, lg_decompose, oam_coefficients)
from biphoton.spdc import (PhaseMatchingParams, add_poisson_noise, coincidence_diagonal,
                           far_field_singles, synthesize_hologram_pair, thin_crystal_state)

W = 1.76
ROOT = Path(__file__).resolve().parent.parent


def _report(cid, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} {cid}: {detail}")
    assert ok, detail


def _phase_aligned_error(c, oracle):
    ph = np.vdot(oracle, c)
    return float(np.abs(c - oracle * ph / abs(ph)).max())


def test_c1_round_trip_reconstruction(grid, ref, tmp_path):
    amp, phase = write_smiley(tmp_path)
    pumps = ([LG(0, l, W) for l in range(5)] + [LG(1, l, W) for l in range(5)]
             + [HG(1, 0, W), HG(1, 1, W), Superposition(((1, LG(1, 3, W)), (1, LG(1, -3, W)))),
                RasterImage(amp, phase, W)])
    worst_clean, worst_noisy, slowest = 1.0, 1.0, 0.0
    for mode in pumps:
        t0 = time.perf_counter()
        pump = evaluate_mode(mode, grid)
        truth = thin_crystal_state(pump).psi
        only, inter = synthesize_hologram_pair(pump, ref)
        worst_clean = min(worst_clean, overlap(reconstruct_state(inter, ref, only)[0], truth))
        for seed in range(3):
            only, inter = synthesize_hologram_pair(pump, ref, total_counts=1e5, seed=seed)
            f = overlap(reconstruct_state(inter, ref, only)[0], truth)
            worst_noisy = min(worst_noisy, f)
        slowest = max(slowest, time.perf_counter() - t0)
    ok = worst_clean > 0.99 and worst_noisy > 0.90 and slowest < 10
    _report("C1", ok, f"{len(pumps)} pumps, min fidelity noiseless {worst_clean:.5f}, "
                      f"Poisson 1e5 {worst_noisy:.4f}, slowest case {slowest:.2f} s")


def test_c2_phase_matching_fit():
    truth = PhaseMatchingParams(93.0, 9.1e-6, 0.30)
    img = far_field_singles(truth, GridSpec(128, 8.0))
    p = fit_phase_matching(img).params
    clean = max(abs(p.A / 93 - 1), abs(p.alpha / 9.1e-6 - 1), abs(p.zeta / 0.3 - 1))
    noisy = max(abs(fit_phase_matching(add_poisson_noise(img, s)).params.alpha / 9.1e-6 - 1)
                for s in range(10))
    L = derive_crystal_length(9.1e-6, 405e-6)
    ok = clean < 0.005 and noisy < 0.025 and abs(L - 0.565) < 5e-4 and abs(L - 0.56) <= 0.01
    _report("C2", ok, f"noiseless max rel err {clean:.1e}, Poisson alpha err {noisy:.3%} "
                      f"(10 seeds), L = {L:.4f} mm")


def test_c3_oam_conservation(grid, ref):
    masses, offsets_ok = [], True
    for l_p in range(5):
        pump = evaluate_mode(LG(0, l_p, W), grid)
        only, inter = synthesize_hologram_pair(pump, ref)
        field, _, _ = reconstruct_state(inter, ref, only)
        corr = correlation_matrix(oam_coefficients(field, W))
        diag = conservation_diagnostics(corr, l_p)
        masses.append(diag["mass_on_law"])
        P, ells = corr.probabilities, corr.index["l_i"]
        rows = [i for i, li in enumerate(ells) if abs(l_p - li) <= ells.max()]
        line = {int(ells[i] + ells[np.argmax(P[i])]) for i in rows}
        offsets_ok &= line == {l_p} and diag["dominant_sum"] == l_p
    ok = min(masses) >= 0.999 and offsets_ok
    _report("C3", ok, f"l_p = 0..4, min mass on law {min(masses):.9f}, "
                      f"peak-line offset equals l_p: {offsets_ok}")


def test_c4_parity_conservation(grid):
    worst = 0.0
    for m_p, n_p in [(0, 1), (1, 0), (1, 1), (2, 1)]:
        c = hg_decompose(thin_crystal_state(evaluate_mode(HG(m_p, n_p, W), grid)), W)
        mi, ni, ms, ns = np.meshgrid(*[c.index[a] for a in c.axes], indexing="ij")
        bad = (((mi + ms) % 2) != m_p % 2) | (((ni + ns) % 2) != n_p % 2)
        worst = max(worst, float(np.abs(c.coeffs[bad]).max()))
    _report("C4", worst < 1e-6, f"max parity-violating |C| {worst:.1e}")


def test_c5_radial_correlations(grid):
    # l_p in {0, 1}: for l_p >= 2 at p_p = 0 the exact integral ties or moves the maximum
    peaks, ok = [], True
    for p_p in range(3):
        for l_p in (0, 1):
            c = lg_decompose(thin_crystal_state(evaluate_mode(LG(p_p, l_p, W), grid)), W)
            P = correlation_matrix(c, {"l_i": 0, "l_s": l_p}).probabilities
            peak = tuple(int(k) for k in np.unravel_index(np.argmax(P), P.shape))
            peaks.append(peak)
            ok &= peak in {(p_p, 0), (0, p_p)}
    _report("C5", ok, f"peaks for (p_p, l_p) in {{0,1,2}}x{{0,1}}: {peaks}")


def test_c6_bell_fidelity(grid):
    c = oam_coefficients(thin_crystal_state(evaluate_mode(LG(0, 0, W), grid)), W, L=5)
    f = fidelity(c, bell_state_coefficients(0, 5))
    _report("C6", f > 0.9, f"Gaussian pump vs Bell(l_p=0, L=5) fidelity {f:.6f}")


def test_c7_event_pipeline():
    layout = RegionLayout((0, 0, 64, 64), (128, 0, 64, 64))
    small = GridSpec(64, 0.11)
    expected = coincidence_diagonal(evaluate_mode(LG(0, 0, 0.8), small))
    events, truth = synthesize_event_stream(expected, layout, 1e4, 1.0, 0.0, 1e4, seed=0)
    # planted B events offset uniformly in +-2 ns
    toa = events.toa.copy()
    toa[truth.b] += np.random.default_rng(1).uniform(-2, 2, truth.b.size)
    events = EventTable(events.x, events.y, np.clip(toa, 0, None))
    pairs = find_coincidences(events, layout, 5.0)
    recall = matching_scores(pairs, truth)["recall"]
    precision = matching_scores(background_filter(pairs, layout, 1), truth)["precision"]
    diag = spatial_correlation(pairs, layout, "x").diagonal_fraction

    big, _ = synthesize_event_stream(expected, layout, 1e6, 1.0, 1.5, 1e6, seed=2)
    find_coincidences(big, layout)
    t0 = time.perf_counter()
    find_coincidences(big, layout)
    rate = len(big) / (time.perf_counter() - t0)
    ok = recall > 0.95 and precision > 0.98 and diag > 0.8 and rate >= 1e6
    _report("C7", ok, f"recall {recall:.4f}, precision {precision:.4f}, diagonal {diag:.3f}, "
                      f"{rate:.2e} events/s ({BACKEND})")


def test_c8_numerical_substrate():
    select = ("orthonormality or raw_hg or hg_parity_is_exact or parseval or forward_inverse "
              "or forward_twice or gaussian_transform or jacobian")
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           "tests/test_fields.py", "tests/test_fitting.py", "-k", select],
                          cwd=ROOT, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and elapsed < 60
    _report("C8", ok, f"{tail} in {elapsed:.1f} s")


def test_c9_oracle_equivalence(grid):
    errs = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for mode in [LG(1, 2, W), OAMGauss(3, W), Superposition(((1, LG(1, 3, W)),
                                                                  (1, LG(1, -3, W))))]:
            st = thin_crystal_state(evaluate_mode(mode, grid))
            errs[f"oam {mode}"] = _phase_aligned_error(oam_coefficients(st, W).coeffs,
                                                       oam_oracle(mode, W, 5))
        for mode in [LG(0, 0, W), LG(1, 2, W)]:
            st = thin_crystal_state(evaluate_mode(mode, grid))
            errs[f"lg {mode}"] = _phase_aligned_error(
                lg_decompose(st, W).coeffs, lg_oracle(mode, grid, W, 10, range(-5, 6)))
        for mode in [HG(0, 0, W), HG(2, 1, W)]:
            st = thin_crystal_state(evaluate_mode(mode, grid))
            errs[f"hg {mode}"] = _phase_aligned_error(hg_decompose(st, W).coeffs,
                                                      hg_oracle(mode, grid, W, 6))
    worst = max(errs, key=errs.get)
    _report("C9", errs[worst] < 1e-4, f"max |C - oracle| {errs[worst]:.1e} ({worst}), "
                                      f"{len(errs)} cases at default truncation")


@pytest.mark.parametrize("p_p,l_p,expected", [(0, 3, (1, 0)), (0, 4, (1, 0)), (1, 3, (2, 0))])
def test_radial_peak_beyond_low_oam_follows_exact_integral(grid, p_p, l_p, expected):
    # documents where the radial claim stops holding; the location is the exact one
    c = lg_decompose(thin_crystal_state(evaluate_mode(LG(p_p, l_p, W), grid)), W, p_max=4)
    P = correlation_matrix(c, {"l_i": 0, "l_s": l_p}).probabilities
    assert tuple(int(k) for k in np.unravel_index(np.argmax(P), P.shape)) == expected
