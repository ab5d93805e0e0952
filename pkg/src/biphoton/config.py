"""Pipeline configuration: one JSON document, validated before any computation.

Precedence, lowest first: built-in defaults, the config file, command-line
flags.  The seed falls back to ``BIPHOTON_SEED`` and then to 0.
"""
from __future__ import annotations

import copy
import json
import math
import os
from pathlib import Path

from .fields import GridSpec, Superposition, mode_from_dict, mode_to_dict
from .spdc import PM_MODELS, PhaseMatchingParams, ReferenceSpec

__all__ = ["ConfigError", "DEFAULTS", "PipelineConfig", "resolve_seed"]

SEED_ENV = "BIPHOTON_SEED"

DEFAULTS = {
    "grid": {"n": 256, "pitch_mm": 0.055},
    "pump": {"kind": "LG", "p": 0, "l": 0, "w": 1.76},
    "reference": {"w_r": 3.0, "Lambda": 0.55, "a": 1.0},
    "noise": {"total_counts": None, "poisson": False, "seed": None},
    "analysis": {"bases": ["oam", "lg", "hg"], "L": 5, "p_max": 10, "N_max": 6,
                 "waist": None, "bootstrap": 20},
    "farfield": {"enabled": True, "n": 128, "pitch_rad_per_mm": 8.0, "A": 93.0,
                 "alpha_mm2": 9.1e-6, "zeta": 0.30, "model": "sinc2",
                 "lambda_p_mm": 405e-6, "lambda_spdc_mm": 810e-6},
    "events": {"enabled": False, "pair_rate_hz": 1e4, "duration_s": 1.0, "jitter_ns": 1.5,
               "background_rate_hz": 1e4, "window_ns": 5.0, "max_offset_px": 1,
               "region_a": None, "region_b": None},
    "io": {"output_dir": "out", "heatmaps": True},
}

_NULLABLE = {("reference",), ("noise", "total_counts"), ("noise", "seed"),
             ("analysis", "waist"), ("events", "region_a"), ("events", "region_b")}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict, path=()) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = path + (key,)
        if key not in base:
            raise ConfigError(f"unknown config key {'.'.join(where)!r}")
        if key == "pump":
            out[key] = val
        elif isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, where)
        elif val is None and where not in _NULLABLE:
            raise ConfigError(f"config key {'.'.join(where)!r} may not be null")
        else:
            out[key] = val
    return out


def resolve_seed(flag=None, config_seed=None) -> int:
    for cand in (flag, config_seed, os.environ.get(SEED_ENV)):
        if cand is None or cand == "":
            continue
        try:
            seed = int(cand)
        except (TypeError, ValueError):
            raise ConfigError(f"seed must be an integer, got {cand!r}") from None
        if seed < 0:
            raise ConfigError("seed must be >= 0")
        return seed
    return 0


def _num(d, key, where, positive=True, integer=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if integer and int(v) != v:
        raise ConfigError(f"{where}.{key} must be an integer")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be positive")
    if not math.isfinite(v) and not (key == "Lambda" and v == math.inf):
        raise ConfigError(f"{where}.{key} must be finite")
    return int(v) if integer else float(v)


class PipelineConfig:
    """Resolved configuration with typed accessors; ``data`` is the full JSON."""

    def __init__(self, data: dict):
        self.data = data
        self._validate()

    @classmethod
    def from_sources(cls, path=None, overrides: dict | None = None) -> PipelineConfig:
        user = {}
        if path is not None:
            try:
                user = json.loads(Path(path).read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
            if not isinstance(user, dict):
                raise ConfigError(f"{path}: top level must be an object")
        data = _merge(DEFAULTS, user)
        if overrides:
            data = _merge(data, overrides)
        data["noise"]["seed"] = resolve_seed(None, data["noise"]["seed"])
        return cls(data)

    def _validate(self):
        d = self.data
        g = d["grid"]
        n = _num(g, "n", "grid", integer=True)
        pitch = _num(g, "pitch_mm", "grid")
        try:
            self.grid = GridSpec(n, pitch)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc

        if not isinstance(d["pump"], dict) or "kind" not in d["pump"]:
            raise ConfigError("pump must be an object with a 'kind'")
        try:
            self.pump = mode_from_dict(d["pump"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"pump: {exc}") from exc
        d["pump"] = mode_to_dict(self.pump)
        waists = ([m.w for _, m in self.pump.terms] if isinstance(self.pump, Superposition)
                  else [self.pump.w])
        if min(waists) < 4 * pitch:
            raise ConfigError(
                f"pump waist {min(waists)} mm under-resolved by the 2ρ rescale on a "
                f"{pitch} mm grid (need >= {4 * pitch} mm)")
        if max(waists) > self.grid.extent / 4:
            raise ConfigError(
                f"pump waist {max(waists)} mm too large for the grid half-width "
                f"{self.grid.extent} mm")

        r = d["reference"]
        if r is None:
            self.reference = None
        else:
            for key in ("w_r", "Lambda"):
                _num(r, key, "reference")
            _num(r, "a", "reference", positive=False)
            try:
                self.reference = ReferenceSpec(float(r["w_r"]), float(r["Lambda"]), float(r["a"]))
            except ValueError as exc:
                raise ConfigError(f"reference: {exc}") from exc
            # the image-plane carrier is 4π/Λ; it must stay below the Nyquist limit
            if 2 * self.grid.pitch >= r["Lambda"] / 2 and math.isfinite(r["Lambda"]):
                raise ConfigError(
                    f"reference period {r['Lambda']} mm aliases on a {pitch} mm grid "
                    f"(need Lambda > {4 * pitch} mm)")

        nz = d["noise"]
        if nz["total_counts"] is not None:
            _num(nz, "total_counts", "noise")
        if not isinstance(nz["poisson"], bool):
            raise ConfigError("noise.poisson must be true or false")

        a = d["analysis"]
        if not isinstance(a["bases"], list) or not set(a["bases"]) <= {"oam", "lg", "hg"}:
            raise ConfigError("analysis.bases must be a list drawn from oam, lg, hg")
        for key in ("L", "p_max", "N_max"):
            _num(a, key, "analysis", positive=False, integer=True)
            if a[key] < 0:
                raise ConfigError(f"analysis.{key} must be >= 0")
        if a["waist"] is not None:
            _num(a, "waist", "analysis")
        _num(a, "bootstrap", "analysis", positive=False, integer=True)

        f = d["farfield"]
        for key in ("n", "pitch_rad_per_mm", "A", "alpha_mm2", "lambda_p_mm", "lambda_spdc_mm"):
            _num(f, key, "farfield", integer=key == "n")
        _num(f, "zeta", "farfield", positive=False)
        if f["model"] not in PM_MODELS:
            raise ConfigError(f"farfield.model must be one of {PM_MODELS}")
        self.farfield_grid = GridSpec(int(f["n"]), float(f["pitch_rad_per_mm"]))
        self.pm = PhaseMatchingParams(float(f["A"]), float(f["alpha_mm2"]), float(f["zeta"]))

        e = d["events"]
        for key in ("pair_rate_hz", "duration_s", "jitter_ns", "background_rate_hz"):
            _num(e, key, "events", positive=False)
            if e[key] < 0:
                raise ConfigError(f"events.{key} must be >= 0")
        _num(e, "window_ns", "events")
        _num(e, "max_offset_px", "events", positive=False, integer=True)

    @property
    def seed(self) -> int:
        return self.data["noise"]["seed"]

    @property
    def waist(self) -> float:
        w = self.data["analysis"]["waist"]
        return float(w) if w is not None else float(self.pump.w)

    def layout(self, region_a=None, region_b=None):
        from .events import RegionLayout

        n = self.grid.n
        e = self.data["events"]
        a = region_a or e["region_a"] or f"0,0,{n},{n}"
        b = region_b or e["region_b"] or f"{n},0,{n},{n}"
        try:
            return RegionLayout.from_strings(a, b)
        except ValueError as exc:
            raise ConfigError(f"regions: {exc}") from exc

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)
