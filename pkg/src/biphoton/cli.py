"""Command-line pipeline: simulate, reconstruct, decompose, fit-pm, events, report.

Every subcommand writes its outputs into ``--out`` (or ``io.output_dir``),
embeds the resolved configuration in its JSON summary and records every
output file with its SHA-256 in ``manifest.json``.

Exit codes: 0 success, 2 usage or configuration, 3 I/O, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import events as ev
from . import fitting, holography, imaging, modal, spdc
from .config import ConfigError, PipelineConfig
from .errors import (BiphotonWarning, CarrierNotFoundError, EventParseError, FitError,
                     GridMismatchError, SingularFitError)
from .fields import HG, LG, OAMGauss, Superposition, evaluate_mode, load_cfield, save_cfield

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class _IOFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


class _Run:
    """Collects outputs of one subcommand and writes the manifest."""

    def __init__(self, command: str, out_dir: Path, cfg: PipelineConfig):
        self.command = command
        self.out = out_dir
        self.cfg = cfg
        self.files: list[Path] = []
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            probe = out_dir / ".write_probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise _IOFailure(f"cannot write to {out_dir}: {exc}") from exc

    def path(self, name: str) -> Path:
        return self.out / name

    def add(self, *paths) -> None:
        for p in paths:
            if isinstance(p, (list, tuple)):
                self.add(*p)
            else:
                self.files.append(Path(p))

    def summary(self, name: str, payload: dict) -> Path:
        payload = dict(payload, command=self.command, config=self.cfg.to_dict())
        p = self.path(name)
        _dump_json(payload, p)
        self.add(p)
        return p

    def finish(self) -> dict:
        entries = [{"path": p.name if p.parent == self.out else str(p),
                    "sha256": _sha256(p), "bytes": p.stat().st_size}
                   for p in sorted(set(self.files))]
        manifest = {"command": self.command, "outputs": entries, "config": self.cfg.to_dict()}
        _dump_json(manifest, self.path("manifest.json"))
        print(json.dumps(manifest["outputs"], indent=2))
        return manifest


def _config(args, overrides=None) -> PipelineConfig:
    over = overrides or {}
    if getattr(args, "seed", None) is not None:
        over.setdefault("noise", {})["seed"] = args.seed
    cfg = PipelineConfig.from_sources(args.config, over)
    return cfg


def _out_dir(args, cfg) -> Path:
    return Path(args.out or cfg.data["io"]["output_dir"])


def _pump_override(args, over: dict) -> None:
    if getattr(args, "pump", None) is not None:
        try:
            over["pump"] = json.loads(args.pump)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--pump is not valid JSON: {exc}") from exc


def _heatmaps(run: _Run, values, stem: str) -> None:
    if run.cfg.data["io"]["heatmaps"]:
        run.add(imaging.write_field_heatmaps(values, run.path(stem)))


def _pump_indices(mode):
    """(l_p or None, (m_p, n_p) or None) for pumps with a definite symmetry."""
    if isinstance(mode, (LG, OAMGauss)):
        return mode.l, None
    if isinstance(mode, HG):
        return None, (mode.m, mode.n)
    if isinstance(mode, Superposition):
        ls = {m.l for _, m in mode.terms if isinstance(m, (LG, OAMGauss))}
        if len(ls) == 1 and all(isinstance(m, (LG, OAMGauss)) for _, m in mode.terms):
            return ls.pop(), None
    return None, None


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    over = {}
    if args.no_reference:
        over["reference"] = None
    if args.total_counts is not None:
        over.setdefault("noise", {})["total_counts"] = args.total_counts
    if args.poisson:
        over.setdefault("noise", {})["poisson"] = True
    if args.events:
        over.setdefault("events", {})["enabled"] = True
    _pump_override(args, over)
    cfg = _config(args, over)
    run = _Run("simulate", _out_dir(args, cfg), cfg)
    noise = cfg.data["noise"]
    total = noise["total_counts"]
    seed = cfg.seed if noise["poisson"] else None
    ss = np.random.SeedSequence(cfg.seed).spawn(3)

    pump = evaluate_mode(cfg.pump, cfg.grid)
    state = spdc.thin_crystal_state(pump, cfg.pump.w)
    save_cfield(pump, run.path("pump.cfield"))
    save_cfield(state.psi, run.path("state.cfield"))
    run.add(run.path("pump.cfield"), run.path("state.cfield"))
    _heatmaps(run, pump.values, "pump")
    _heatmaps(run, state.psi.values, "state")

    summary = {"pump_peak": float(np.abs(pump.values).max())}
    if cfg.reference is not None:
        po_seed = int(ss[0].generate_state(1)[0]) if seed is not None else None
        pump_only, interference = spdc.synthesize_hologram_pair(pump, cfg.reference, total,
                                                                po_seed)
        run.add(imaging.save_count_image(interference, run.path("interference.csv")))
        summary["interference_total"] = interference.total
    else:
        pump_only = spdc.coincidence_diagonal(pump, None, total)
        if seed is not None:
            pump_only = spdc.add_poisson_noise(pump_only, int(ss[0].generate_state(1)[0]))
    run.add(imaging.save_count_image(pump_only, run.path("pump_only.csv")))
    summary["pump_only_total"] = pump_only.total
    if cfg.reference is not None:
        res = holography.reconstruct_offaxis(interference, cfg.reference, require_carrier=False,
                                             full_output=True)
        summary["sideband_peak_to_floor"] = res.peak_to_floor

    ff = cfg.data["farfield"]
    if ff["enabled"]:
        far = spdc.far_field_singles(cfg.pm, cfg.farfield_grid, ff["model"])
        if seed is not None:
            far = spdc.add_poisson_noise(far, int(ss[1].generate_state(1)[0]))
        run.add(imaging.save_count_image(far, run.path("farfield.csv")))

    e = cfg.data["events"]
    if e["enabled"]:
        layout = cfg.layout()
        expected = interference if cfg.reference is not None and args.events_from == "interference" \
            else spdc.coincidence_diagonal(pump)
        if layout.size != (cfg.grid.n, cfg.grid.n):
            raise ConfigError("event regions must match the simulation grid size")
        stream, truth = ev.synthesize_event_stream(
            spdc.CoincidenceImage(expected.grid, np.clip(np.asarray(expected.counts, float),
                                                         0, None)),
            layout, e["pair_rate_hz"], e["duration_s"], e["jitter_ns"],
            e["background_rate_hz"], int(ss[2].generate_state(1)[0]))
        ev.write_events(stream, run.path("events.csv"))
        tp = run.path("events_truth.csv")
        np.savetxt(tp, np.column_stack([truth.a, truth.b]), fmt="%d", delimiter=",",
                   header="ia,ib", comments="")
        run.add(run.path("events.csv"), tp)
        summary["events"] = len(stream)
        summary["planted_pairs"] = int(truth.a.size)

    run.summary("simulate.json", summary)
    run.finish()
    return EXIT_OK


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------

def _load_image(path) -> spdc.CoincidenceImage:
    try:
        return imaging.load_count_image(path)
    except FileNotFoundError as exc:
        raise _IOFailure(str(exc)) from exc
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc


def cmd_reconstruct(args) -> int:
    cfg = _config(args)
    if cfg.reference is None:
        raise ConfigError("reconstruction needs a reference beam in the config")
    interference = _load_image(args.interference)
    flags = []
    pump_only = None
    if args.pump_only is not None:
        if Path(args.pump_only).exists():
            pump_only = _load_image(args.pump_only)
            if pump_only.grid != interference.grid:
                raise GridMismatchError(
                    f"pump-only grid {pump_only.grid} differs from interference grid "
                    f"{interference.grid}")
        else:
            flags.append("pump_only_missing")
            print(f"warning: {args.pump_only} not found; using the hologram alone",
                  file=sys.stderr)
    else:
        flags.append("pump_only_missing")
    filt = holography.SidebandFilter(radius=args.filter_radius,
                                     window=args.window or "raised-cosine")
    run = _Run("reconstruct", _out_dir(args, cfg), cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BiphotonWarning)
        field, res, mode = holography.reconstruct_state(interference, cfg.reference,
                                                        pump_only, filt)
    flags += [str(w.message) for w in caught if issubclass(w.category, BiphotonWarning)]
    out = run.path("reconstructed.cfield")
    save_cfield(field, out)
    run.add(out)
    _heatmaps(run, field.values, "reconstructed")
    summary = {
        "mode": mode,
        "warnings": flags,
        "carrier": list(res.carrier),
        "nominal_carrier": list(res.nominal_carrier),
        "peak_to_floor": res.peak_to_floor,
        "discarded_fraction": res.discarded_fraction,
    }
    if args.truth:
        truth = _load_field(args.truth)
        if truth.grid != field.grid:
            raise GridMismatchError("ground-truth field is on a different grid")
        summary["fidelity"] = _field_fidelity(field, truth)
    run.summary("reconstruct.json", summary)
    run.finish()
    return EXIT_OK


def _field_fidelity(a, b) -> float:
    from .fields import overlap
    return float(overlap(a, b))


def _load_field(path):
    try:
        return load_cfield(path)
    except FileNotFoundError as exc:
        raise _IOFailure(f"{path}: not found") from exc


# ---------------------------------------------------------------------------
# decompose
# ---------------------------------------------------------------------------

def _decompose(basis, state, cfg, args):
    a = cfg.data["analysis"]
    w = args.waist if args.waist is not None else cfg.waist
    if basis == "oam":
        return modal.oam_coefficients(state, w, args.L if args.L is not None else a["L"])
    if basis == "lg":
        return modal.lg_decompose(state, w, args.pmax if args.pmax is not None else a["p_max"])
    return modal.hg_decompose(state, w, args.nmax if args.nmax is not None else a["N_max"])


def _write_coeffs(coeffs: modal.ModalCoefficients, path: Path) -> None:
    names = [f"{ax}" for ax in coeffs.axes]
    with open(path, "w") as fh:
        fh.write(",".join(names + ["re", "im"]) + "\n")
        for row in coeffs.rows():
            idx = ",".join(str(v) for v in row[:-2])
            fh.write(f"{idx},{float(row[-2])!r},{float(row[-1])!r}\n")


def cmd_decompose(args) -> int:
    over = {}
    _pump_override(args, over)
    cfg = _config(args, over)
    basis = args.basis
    psi = _load_field(args.state)
    run = _Run("decompose", _out_dir(args, cfg), cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BiphotonWarning)
        coeffs = _decompose(basis, psi, cfg, args)
    corr = modal.correlation_matrix(coeffs)
    cpath = run.path(f"coefficients_{basis}.csv")
    _write_coeffs(coeffs, cpath)
    mpath = run.path(f"correlation_{basis}.csv")
    np.savetxt(mpath, corr.as_matrix(), delimiter=",", fmt="%.17g")
    run.add(cpath, mpath)
    if cfg.data["io"]["heatmaps"]:
        hp = run.path(f"correlation_{basis}.pgm")
        imaging.write_gray16(corr.as_matrix(), hp)
        run.add(hp)

    l_p, mn_p = _pump_indices(cfg.pump)
    if args.pump_l is not None:
        l_p = args.pump_l
    if args.pump_mn is not None:
        mn_p = tuple(int(v) for v in args.pump_mn.split(","))
    diag = {"basis": basis, "captured_fraction": coeffs.captured_fraction,
            "waist_mm": coeffs.waist,
            "warnings": [str(w.message) for w in caught]}
    if basis == "oam":
        law = modal.conservation_diagnostics(corr, l_p if l_p is not None else 0)
        if l_p is None:
            law = modal.conservation_diagnostics(corr, law["dominant_sum"])
        diag.update(law)
    elif basis == "hg" and mn_p is not None:
        diag.update(modal.conservation_diagnostics(corr, mn_p))

    # theory: thin-crystal state of the configured pump
    theory_state = spdc.thin_crystal_state(evaluate_mode(cfg.pump, psi.grid))
    theory = _decompose(basis, theory_state, cfg, args)
    diag["fidelity"] = modal.fidelity(coeffs, theory)
    if basis == "oam" and l_p is not None:
        try:
            bell = modal.bell_state_coefficients(l_p, coeffs.index["l_i"].max())
            diag["bell_fidelity"] = modal.fidelity(coeffs, bell)
        except ValueError:
            pass

    if args.counts is not None:
        if cfg.reference is None:
            raise ConfigError("bootstrap from counts needs a reference beam in the config")
        images = [_load_image(args.counts)]
        if args.pump_only is not None:
            images.append(_load_image(args.pump_only))

        def closure(perturbed):
            po = perturbed[1] if len(perturbed) > 1 else None
            f, _, _ = holography.reconstruct_state(perturbed[0], cfg.reference, po)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", BiphotonWarning)
                c = _decompose(basis, f, cfg, args)
            return modal.fidelity(c, theory)

        n_boot = cfg.data["analysis"]["bootstrap"]
        if n_boot >= 2:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", BiphotonWarning)
                bs = modal.bootstrap_uncertainty(closure, tuple(images), n_boot, cfg.seed)
            diag["fidelity_bootstrap_mean"] = bs.mean
            diag["fidelity_err"] = bs.std
    diag.setdefault("fidelity_err", None)
    run.summary(f"diagnostics_{basis}.json", diag)
    run.finish()
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit-pm
# ---------------------------------------------------------------------------

def cmd_fit_pm(args) -> int:
    over = {}
    if args.model is not None:
        over["farfield"] = {"model": args.model}
    if args.lambda_p_mm is not None:
        over.setdefault("farfield", {})["lambda_p_mm"] = args.lambda_p_mm
    cfg = _config(args, over)
    ff = cfg.data["farfield"]
    image = _load_image(args.farfield)
    if image.plane != "farfield":
        print(f"warning: {args.farfield} is labelled plane={image.plane}", file=sys.stderr)
    run = _Run("fit-pm", _out_dir(args, cfg), cfg)
    try:
        res = fitting.fit_phase_matching(image, model=ff["model"], binned=not args.no_binning)
    except FitError as exc:
        kind = "singular" if isinstance(exc, SingularFitError) else "not converged"
        run.summary("fit.json", {"error": kind, "message": str(exc), "model": ff["model"]})
        run.finish()
        print(f"error: fit failed ({kind}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    payload = res.to_dict(ff["lambda_p_mm"])
    payload["lambda_p_mm"] = ff["lambda_p_mm"]
    n_boot = args.bootstrap if args.bootstrap is not None else 0
    if n_boot >= 2:
        bs = fitting.fit_uncertainty_bootstrap(image, n_boot, cfg.seed, ff["model"],
                                               guess=res.params, binned=not args.no_binning)
        payload["bootstrap"] = {"mean": bs.mean, "std": bs.std, "failed": bs.n_failed,
                                "n_resamples": n_boot}
    run.summary("fit.json", payload)
    run.finish()
    return EXIT_OK


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------

def cmd_events(args) -> int:
    over = {"events": {}}
    for key, val in (("window_ns", args.window_ns), ("max_offset_px", args.max_offset_px),
                     ("region_a", args.region_a), ("region_b", args.region_b)):
        if val is not None:
            over["events"][key] = val
    cfg = _config(args, over)
    e = cfg.data["events"]
    layout = cfg.layout()
    try:
        table = ev.parse_events(args.events)
    except FileNotFoundError as exc:
        raise _IOFailure(f"{args.events}: not found") from exc
    run = _Run("events", _out_dir(args, cfg), cfg)
    pairs = ev.find_coincidences(table, layout, e["window_ns"])
    kept = ev.background_filter(pairs, layout, e["max_offset_px"])
    accidentals = ev.estimate_accidentals(table, layout, e["window_ns"]) if len(table) else 0

    ppath = run.path("pairs.csv")
    ev.write_pairs(kept, ppath)
    run.add(ppath)
    summary = {"events": len(table), "rejected_lines": table.rejected,
               "pairs": len(pairs), "pairs_filtered": len(kept),
               "accidentals_estimate": accidentals, "backend": ev.BACKEND}
    for axis in ("x", "y"):
        if len(pairs):
            sc = ev.spatial_correlation(pairs, layout, axis)
            hist, frac = sc.histogram, sc.diagonal_fraction
        else:
            w, h = layout.size
            size = w if axis == "x" else h
            hist, frac = np.zeros((size, size), dtype=np.int64), None
        hp = run.path(f"correlation_{axis}.csv")
        np.savetxt(hp, hist, fmt="%d", delimiter=",")
        run.add(hp)
        summary[f"diagonal_fraction_{axis}"] = frac
    w, h = layout.size
    if w == h and w % 2 == 0 and w >= 8:
        img = ev.coincidence_image_from_pairs(kept, layout, pitch=cfg.grid.pitch)
        run.add(imaging.save_count_image(img, run.path("coincidence_image.csv")))
    if args.truth:
        t = np.loadtxt(args.truth, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        truth = ev.StreamTruth(t[:, 0], t[:, 1]) if t.size else \
            ev.StreamTruth(np.zeros(0, np.int64), np.zeros(0, np.int64))
        if table.rejected:
            print("warning: rejected lines shift event indices; scores are approximate",
                  file=sys.stderr)
        scores = ev.matching_scores(kept, truth)
        summary.update(recall=scores["recall"], precision=scores["precision"])
        print(f"recall={scores['recall']:.4f} precision={scores['precision']:.4f}")
    run.summary("events.json", summary)
    run.finish()
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    cfg = _config(args)
    reports = {}
    for d in args.dirs:
        d = Path(d)
        if not d.is_dir():
            raise _IOFailure(f"{d}: not a directory")
        for p in sorted(d.glob("*.json")):
            if p.name == "manifest.json":
                continue
            try:
                reports[str(p)] = json.loads(p.read_text())
            except json.JSONDecodeError as exc:
                raise _IOFailure(f"{p}: invalid JSON ({exc})") from exc
    run = _Run("report", _out_dir(args, cfg), cfg)
    run.summary("report.json", {"reports": reports, "count": len(reports)})
    run.finish()
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory (overrides io.output_dir)")
        p.add_argument("--seed", type=int, help="seed (overrides config and BIPHOTON_SEED)")

    p = sub.add_parser("simulate", help="synthesize states, coincidence images and events")
    common(p)
    p.add_argument("--pump", help="pump mode as JSON, e.g. '{\"kind\": \"LG\", \"p\": 0, "
                                  "\"l\": 2, \"w\": 1.76}'")
    p.add_argument("--no-reference", action="store_true", help="omit the reference beam")
    p.add_argument("--total-counts", type=float, help="scale images to this total")
    p.add_argument("--poisson", action="store_true", help="Poisson-sample the images")
    p.add_argument("--events", action="store_true", help="also write an event stream")
    p.add_argument("--events-from", choices=("pump_only", "interference"), default="pump_only",
                   help="expected image the event stream is drawn from")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="off-axis holographic reconstruction")
    common(p)
    p.add_argument("interference", help="interference count image (CSV + .hdr)")
    p.add_argument("--pump-only", help="pump-only count image for the amplitude")
    p.add_argument("--truth", help="ground-truth .cfield for a fidelity figure")
    p.add_argument("--filter-radius", type=float, help="sideband radius in rad/mm")
    p.add_argument("--window", choices=("raised-cosine", "hard"))
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("decompose", help="modal decomposition and diagnostics")
    common(p)
    p.add_argument("state", help="crystal-plane state (.cfield)")
    p.add_argument("--pump", help="pump mode as JSON; sets the theory state and pump indices")
    p.add_argument("--basis", choices=("oam", "lg", "hg"), required=True)
    p.add_argument("--L", type=int, help="OAM cap |l| <= L")
    p.add_argument("--pmax", type=int, help="LG radial cap")
    p.add_argument("--nmax", type=int, help="HG index cap")
    p.add_argument("--waist", type=float, help="decomposition waist in mm (default pump waist)")
    p.add_argument("--pump-l", type=int, help="pump OAM for the conservation check")
    p.add_argument("--pump-mn", help="pump HG indices m,n for the parity check")
    p.add_argument("--counts", help="interference image for bootstrap error bars")
    p.add_argument("--pump-only", help="pump-only image used with --counts")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("fit-pm", help="fit the phase-matching envelope to a far-field image")
    common(p)
    p.add_argument("farfield", help="far-field image (CSV + .hdr, pitch in rad/mm)")
    p.add_argument("--model", choices=spdc.PM_MODELS)
    p.add_argument("--lambda-p-mm", type=float, help="pump wavelength in mm")
    p.add_argument("--bootstrap", type=int, help="Poisson bootstrap resamples")
    p.add_argument("--no-binning", action="store_true", help="fit pixels, not radial bins")
    p.set_defaults(func=cmd_fit_pm)

    p = sub.add_parser("events", help="coincidence matching of a time-tagged event file")
    common(p)
    p.add_argument("events", help="event CSV with header x,y,toa_ns")
    p.add_argument("--window-ns", type=float)
    p.add_argument("--max-offset-px", type=int)
    p.add_argument("--region-a", help="x0,y0,w,h")
    p.add_argument("--region-b", help="x0,y0,w,h")
    p.add_argument("--truth", help="planted-pair indices (ia,ib) for recall/precision")
    p.set_defaults(func=cmd_events)

    p = sub.add_parser("report", help="aggregate JSON summaries into one report")
    common(p)
    p.add_argument("dirs", nargs="+", help="run directories")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (_IOFailure, EventParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CarrierNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FitError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
