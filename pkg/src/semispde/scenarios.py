"""Scenario configuration: strict parsing, canonical form, assembly.

A scenario file is one YAML mapping with nested sections (grid,
coefficients, forcing, drift, initial, time, noise, estimators, output).
Parsing is strict: unknown keys anywhere raise a :class:`ConfigError`
listing their full dotted paths, and every value is type-checked.  The
canonical form fills in every default, so parsing the dump of a canonical
config returns it unchanged, and the fingerprint -- a short hash of the
canonical form together with the package version -- identifies the run in
output file names and reports.

The full key reference with defaults ships in ``configs/reference.yaml``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from semispde._version import __version__
from semispde.coefficients import (
    CoefficientSet,
    ForcingSet,
    coefficients_from_preset,
    forcing_from_preset,
)
from semispde.geometry import Grid, build_grid
from semispde.noise import NoisePath, brownian_bridge_refine, sample_path
from semispde.semilinear import (
    SemilinearTerm,
    normalize_decreasing,
    normalize_zero_at_origin,
    term_from_preset,
    truncate,
)
from semispde.solver import SolverConfig

__all__ = [
    "ConfigError",
    "Scenario",
    "canonicalize_config",
    "load_config",
    "dump_config",
    "config_fingerprint",
]


class ConfigError(ValueError):
    """Scenario configuration is malformed or violates a precondition."""


# ---------------------------------------------------------------------------
# scalar validators


def _fail(path: str, msg: str) -> "ConfigError":
    return ConfigError(f"{path}: {msg}")


def _mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise _fail(path, f"expected a mapping, got {type(value).__name__}")
    return dict(value)


def _bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise _fail(path, f"expected a boolean, got {value!r}")
    return value


def _int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise _fail(path, f"must be at least {minimum}, got {value}")
    return int(value)


def _float(value, path: str, positive: bool = False, nonnegative: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise _fail(path, f"must be finite, got {value!r}")
    if positive and out <= 0:
        raise _fail(path, f"must be positive, got {value!r}")
    if nonnegative and out < 0:
        raise _fail(path, f"must be nonnegative, got {value!r}")
    return out


def _choice(value, path: str, choices: tuple[str, ...]) -> str:
    if value not in choices:
        raise _fail(path, f"expected one of {', '.join(choices)}; got {value!r}")
    return str(value)


def _number_tree(value, path: str):
    """Scalars or (nested) lists of scalars, for matrix-valued parameters."""
    if isinstance(value, list):
        return [_number_tree(v, f"{path}[{i}]") for i, v in enumerate(value)]
    return _float(value, path)


def _float_list(value, path: str, positive: bool = False) -> list[float]:
    if not isinstance(value, list) or not value:
        raise _fail(path, f"expected a nonempty list, got {value!r}")
    return [_float(v, f"{path}[{i}]", positive=positive) for i, v in enumerate(value)]


def _int_list(value, path: str, minimum: int = 1) -> list[int]:
    if not isinstance(value, list) or not value:
        raise _fail(path, f"expected a nonempty list, got {value!r}")
    return [_int(v, f"{path}[{i}]", minimum=minimum) for i, v in enumerate(value)]


class _Section:
    """One mapping being consumed; leftover keys become unknown-key errors."""

    def __init__(self, raw: dict, path: str, unknown: list[str]):
        self.raw = raw
        self.path = path
        self.unknown = unknown

    def take(self, key: str, default):
        return self.raw.pop(key, default)

    def finish(self) -> None:
        for key in self.raw:
            self.unknown.append(f"{self.path}.{key}" if self.path else str(key))


# ---------------------------------------------------------------------------
# section canonicalizers

_COEFF_PRESETS = ("constant", "smooth", "anisotropic", "csv")
_F0_PRESETS = ("zero", "constant", "sine")
_G_PRESETS = ("zero", "constant", "single_mode", "sine")
_DRIFT_PRESETS = ("ginzburg_landau", "lipschitz_tanh", "zero")
_INITIAL_PRESETS = ("zero", "sine", "bump")
_SCHEMES = ("semi_implicit", "explicit")
_OUTPUT_FORMATS = ("csv", "binary")


def _canon_grid(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "grid", unknown)
    extents = _float_list(sec.take("extents", [1.0]), "grid.extents", positive=True)
    points = _int_list(sec.take("points", [64]), "grid.points", minimum=4)
    sec.finish()
    if len(extents) != len(points):
        raise _fail("grid", f"extents ({len(extents)}) and points ({len(points)}) differ in length")
    if not 1 <= len(points) <= 2:
        raise _fail("grid.points", f"only 1 or 2 axes supported, got {len(points)}")
    return {"extents": extents, "points": points}


def _canon_coefficients(raw: dict, dim: int, unknown: list[str]) -> dict:
    sec = _Section(raw, "coefficients", unknown)
    preset = _choice(sec.take("preset", "constant"), "coefficients.preset", _COEFF_PRESETS)
    modes = _int(sec.take("modes", 8), "coefficients.modes", minimum=0)
    out = {"preset": preset, "modes": modes}
    p = "coefficients"
    if preset == "constant":
        out["a"] = _number_tree(sec.take("a", 1.0), f"{p}.a")
        out["b"] = _number_tree(sec.take("b", 0.0), f"{p}.b")
        out["c"] = _float(sec.take("c", 0.0), f"{p}.c")
        out["sigma"] = _number_tree(sec.take("sigma", 0.0), f"{p}.sigma")
        out["mu"] = _number_tree(sec.take("mu", 0.0), f"{p}.mu")
    elif preset == "smooth":
        out["a"] = _number_tree(sec.take("a", 1.0), f"{p}.a")
        out["a_variation"] = _float(sec.take("a_variation", 0.25), f"{p}.a_variation", nonnegative=True)
        out["b_amplitude"] = _float(sec.take("b_amplitude", 0.0), f"{p}.b_amplitude")
        out["c_amplitude"] = _float(sec.take("c_amplitude", 0.0), f"{p}.c_amplitude")
        out["sigma_amplitude"] = _float(sec.take("sigma_amplitude", 0.0), f"{p}.sigma_amplitude")
        out["mu_amplitude"] = _float(sec.take("mu_amplitude", 0.0), f"{p}.mu_amplitude")
    elif preset == "anisotropic":
        if dim != 2:
            raise _fail(p, "the anisotropic preset needs a two-dimensional grid")
        out["ax"] = _float(sec.take("ax", 2.0), f"{p}.ax", positive=True)
        out["ay"] = _float(sec.take("ay", 3.0), f"{p}.ay", positive=True)
        out["cross"] = _float(sec.take("cross", 0.0), f"{p}.cross")
        out["sigma"] = _number_tree(sec.take("sigma", 0.0), f"{p}.sigma")
        out["mu"] = _number_tree(sec.take("mu", 0.0), f"{p}.mu")
    else:  # csv
        files = _mapping(sec.take("files", None), f"{p}.files")
        for key, value in files.items():
            if not isinstance(value, str):
                raise _fail(f"{p}.files.{key}", f"expected a path string, got {value!r}")
        out["files"] = dict(sorted(files.items()))
        kappa = sec.take("kappa", None)
        bound = sec.take("bound", None)
        if kappa is None or bound is None:
            raise _fail(p, "sampled coefficients need declared kappa and bound")
        out["kappa"] = _float(kappa, f"{p}.kappa", positive=True)
        out["bound"] = _float(bound, f"{p}.bound", positive=True)
        sec.finish()
        return out
    kappa = sec.take("kappa", None)
    bound = sec.take("bound", None)
    out["kappa"] = None if kappa is None else _float(kappa, f"{p}.kappa", positive=True)
    out["bound"] = None if bound is None else _float(bound, f"{p}.bound", positive=True)
    sec.finish()
    return out


def _canon_forcing(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "forcing", unknown)
    out = {
        "f0": _choice(sec.take("f0", "zero"), "forcing.f0", _F0_PRESETS),
        "f0_value": _float(sec.take("f0_value", 0.0), "forcing.f0_value"),
        "g": _choice(sec.take("g", "zero"), "forcing.g", _G_PRESETS),
        "g_value": _float(sec.take("g_value", 0.0), "forcing.g_value"),
        "g_mode": _int(sec.take("g_mode", 0), "forcing.g_mode", minimum=0),
    }
    sec.finish()
    return out


def _canon_drift(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "drift", unknown)
    preset = _choice(sec.take("preset", "ginzburg_landau"), "drift.preset", _DRIFT_PRESETS)
    out = {"preset": preset}
    if preset == "ginzburg_landau":
        alpha = _float(sec.take("alpha", 4.0), "drift.alpha")
        if alpha < 1:
            raise _fail("drift.alpha", f"must be at least 1, got {alpha}")
        out["alpha"] = alpha
    elif preset == "lipschitz_tanh":
        out["scale"] = _float(sec.take("scale", 1.0), "drift.scale", nonnegative=True)
    trunc = sec.take("truncation", 1.0e4)
    out["truncation"] = None if trunc is None else _float(trunc, "drift.truncation", positive=True)
    out["normalize_decreasing"] = _bool(sec.take("normalize_decreasing", False), "drift.normalize_decreasing")
    out["normalize_zero_origin"] = _bool(sec.take("normalize_zero_origin", False), "drift.normalize_zero_origin")
    sec.finish()
    return out


def _canon_initial(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "initial", unknown)
    preset = _choice(sec.take("preset", "sine"), "initial.preset", _INITIAL_PRESETS)
    out = {"preset": preset}
    if preset != "zero":
        out["amplitude"] = _float(sec.take("amplitude", 1.0), "initial.amplitude")
    if preset == "sine":
        out["mode"] = _int(sec.take("mode", 1), "initial.mode", minimum=1)
    sec.finish()
    return out


def _canon_time(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "time", unknown)
    out = {
        "t_final": _float(sec.take("t_final", 0.25), "time.t_final", positive=True),
        "dt": _float(sec.take("dt", 1.0e-3), "time.dt", positive=True),
        "scheme": _choice(sec.take("scheme", "semi_implicit"), "time.scheme", _SCHEMES),
        "snapshot_stride": _int(sec.take("snapshot_stride", 1), "time.snapshot_stride", minimum=1),
        "linear_tol": _float(sec.take("linear_tol", 1.0e-10), "time.linear_tol", positive=True),
        "linear_maxiter": _int(sec.take("linear_maxiter", 2000), "time.linear_maxiter", minimum=1),
        "blowup_threshold": _float(sec.take("blowup_threshold", 1.0e8), "time.blowup_threshold", positive=True),
    }
    sec.finish()
    if out["dt"] > out["t_final"]:
        raise _fail("time.dt", f"dt {out['dt']} exceeds the horizon t_final {out['t_final']}")
    steps = round(out["t_final"] / out["dt"])
    if steps < 1 or abs(steps * out["dt"] - out["t_final"]) > 1e-9 * out["t_final"]:
        raise _fail("time.dt", f"t_final {out['t_final']} is not an integer multiple of dt {out['dt']}")
    return out


def _canon_noise(raw: dict, time_sec: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "noise", unknown)
    seed = _int(sec.take("seed", 1234), "noise.seed", minimum=0)
    coupling = sec.take("coupling_dt", None)
    out = {"seed": seed, "coupling_dt": None}
    if coupling is not None:
        coupling = _float(coupling, "noise.coupling_dt", positive=True)
        dt = time_sec["dt"]
        ratio = coupling / dt
        rounds = round(math.log2(ratio)) if ratio > 0 else -1
        if rounds < 0 or abs(ratio - 2.0**rounds) > 1e-9 * 2.0**rounds:
            raise _fail(
                "noise.coupling_dt",
                f"must be dt times a power of two (got {coupling} over dt {dt})",
            )
        t_final = time_sec["t_final"]
        base_steps = round(t_final / coupling)
        if base_steps < 1 or abs(base_steps * coupling - t_final) > 1e-9 * t_final:
            raise _fail("noise.coupling_dt", f"t_final {t_final} is not an integer multiple of {coupling}")
        out["coupling_dt"] = coupling
    sec.finish()
    return out


def _canon_estimators(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "estimators", unknown)
    theta = sec.take("theta", None)
    out = {
        "p": _float(sec.take("p", 4.0), "estimators.p", positive=True),
        "q": _float(sec.take("q", 8.0), "estimators.q", positive=True),
        "theta": None if theta is None else _float(theta, "estimators.theta"),
        "samples": _int(sec.take("samples", 64), "estimators.samples", minimum=2),
        "interior_margin": _float(sec.take("interior_margin", 0.25), "estimators.interior_margin", positive=True),
        "m_levels": _float_list(sec.take("m_levels", [1.0, 2.0, 4.0, 8.0]), "estimators.m_levels", positive=True),
        "lag_steps": _int_list(sec.take("lag_steps", [2, 4, 8, 16, 32]), "estimators.lag_steps", minimum=1),
        "pairs_per_lag": _int(sec.take("pairs_per_lag", 64), "estimators.pairs_per_lag", minimum=1),
    }
    sec.finish()
    return out


def _canon_output(raw: dict, unknown: list[str]) -> dict:
    sec = _Section(raw, "output", unknown)
    out = {"format": _choice(sec.take("format", "csv"), "output.format", _OUTPUT_FORMATS)}
    sec.finish()
    return out


def canonicalize_config(raw: dict | None) -> dict:
    """Validate a raw config mapping and fill in every default.

    Raises :class:`ConfigError` on type errors, out-of-range values, or
    unknown keys (all unknown key paths are listed in one error).
    """
    raw = _mapping(raw, "<config>")
    unknown: list[str] = []
    top = _Section(raw, "", unknown)

    label = top.take("label", "scenario")
    if not isinstance(label, str) or not label:
        raise _fail("label", f"expected a nonempty string, got {label!r}")

    grid = _canon_grid(_mapping(top.take("grid", None), "grid"), unknown)
    dim = len(grid["points"])
    coefficients = _canon_coefficients(_mapping(top.take("coefficients", None), "coefficients"), dim, unknown)
    forcing = _canon_forcing(_mapping(top.take("forcing", None), "forcing"), unknown)
    drift = _canon_drift(_mapping(top.take("drift", None), "drift"), unknown)
    initial = _canon_initial(_mapping(top.take("initial", None), "initial"), unknown)
    time_sec = _canon_time(_mapping(top.take("time", None), "time"), unknown)
    noise_sec = _canon_noise(_mapping(top.take("noise", None), "noise"), time_sec, unknown)
    estimators = _canon_estimators(_mapping(top.take("estimators", None), "estimators"), unknown)
    output = _canon_output(_mapping(top.take("output", None), "output"), unknown)
    top.finish()

    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(sorted(unknown)))

    if forcing["g"] == "single_mode" and coefficients["modes"] and forcing["g_mode"] >= coefficients["modes"]:
        raise _fail("forcing.g_mode", f"mode {forcing['g_mode']} outside [0, {coefficients['modes']})")

    return {
        "label": label,
        "grid": grid,
        "coefficients": coefficients,
        "forcing": forcing,
        "drift": drift,
        "initial": initial,
        "time": time_sec,
        "noise": noise_sec,
        "estimators": estimators,
        "output": output,
    }


def load_config(path) -> dict:
    """Read a YAML scenario file and return its canonical form."""
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return canonicalize_config(raw)


def dump_config(config: dict) -> str:
    """Serialize a canonical config; parsing the dump reproduces it."""
    return yaml.safe_dump(config, sort_keys=True, default_flow_style=False)


def config_fingerprint(config: dict) -> str:
    """Short stable hash of the canonical config plus the package version."""
    payload = json.dumps(config, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256((payload + "\n" + __version__).encode()).hexdigest()
    return digest[:12]


def _deep_merge(base: dict, updates: dict) -> dict:
    out = dict(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


# ---------------------------------------------------------------------------
# assembly


def _build_initial(cfg: dict, grid: Grid) -> np.ndarray:
    preset = cfg["preset"]
    if preset == "zero":
        return grid.zero_field()
    amp = cfg["amplitude"]
    coords = grid.coords()
    field = np.full(grid.shape, amp)
    if preset == "sine":
        mode = cfg["mode"]
        for x, L in zip(coords, grid.extents):
            field = field * np.sin(mode * np.pi * x / L)
    else:  # bump
        for x, L in zip(coords, grid.extents):
            field = field * 4.0 * x * (L - x) / L**2
    field[grid.boundary_mask()] = 0.0
    return field


def _build_coefficients(cfg: dict, dim: int, extents, grid: Grid) -> CoefficientSet:
    preset = cfg["preset"]
    params = {k: v for k, v in cfg.items() if k not in ("preset", "modes")}
    if preset == "smooth":
        params["extents"] = extents
    if preset == "csv":
        params["grid"] = grid
    return coefficients_from_preset(preset, dim, cfg["modes"], **params)


@dataclass(frozen=True)
class Scenario:
    """A fully assembled experiment: grid, equation data, and run settings."""

    config: dict
    fingerprint: str
    grid: Grid
    coeffs: CoefficientSet
    forcing: ForcingSet
    term: SemilinearTerm
    initial: np.ndarray

    @classmethod
    def from_config(cls, source) -> "Scenario":
        """Build a scenario from a canonical/raw mapping or a YAML file path."""
        if isinstance(source, dict):
            config = canonicalize_config(source)
        else:
            config = load_config(source)
        grid = build_grid(config["grid"]["extents"], config["grid"]["points"])
        try:
            coeffs = _build_coefficients(config["coefficients"], grid.dim, grid.extents, grid)
            forcing = forcing_from_preset(grid.dim, config["coefficients"]["modes"], extents=grid.extents, **config["forcing"])
            drift = config["drift"]
            params = {k: drift[k] for k in ("alpha", "scale") if k in drift}
            term = term_from_preset(drift["preset"], **params)
            if drift["truncation"] is not None:
                term = truncate(term, drift["truncation"])
            if drift["normalize_decreasing"]:
                term, coeffs = normalize_decreasing(term, coeffs)
            if drift["normalize_zero_origin"]:
                term, forcing = normalize_zero_at_origin(term, forcing)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        initial = _build_initial(config["initial"], grid)
        return cls(
            config=config,
            fingerprint=config_fingerprint(config),
            grid=grid,
            coeffs=coeffs,
            forcing=forcing,
            term=term,
            initial=initial,
        )

    def with_updates(self, updates: dict) -> "Scenario":
        """New scenario with nested config values replaced (deep merge)."""
        return Scenario.from_config(_deep_merge(self.config, updates))

    # -- run settings ------------------------------------------------------

    @property
    def seed(self) -> int:
        return self.config["noise"]["seed"]

    @property
    def dt(self) -> float:
        return self.config["time"]["dt"]

    @property
    def t_final(self) -> float:
        return self.config["time"]["t_final"]

    @property
    def modes(self) -> int:
        return self.config["coefficients"]["modes"]

    @property
    def estimator_params(self) -> dict:
        return self.config["estimators"]

    def solver_config(self, track_p: float | None = None, snapshot_stride: int | None = None) -> SolverConfig:
        t = self.config["time"]
        return SolverConfig(
            dt=t["dt"],
            t_final=t["t_final"],
            scheme=t["scheme"],
            snapshot_stride=t["snapshot_stride"] if snapshot_stride is None else snapshot_stride,
            track_p=track_p,
            linear_tol=t["linear_tol"],
            linear_maxiter=t["linear_maxiter"],
            blowup_threshold=t["blowup_threshold"],
        )

    def noise_path(self, stream: int, seed: int | None = None) -> NoisePath:
        """Driving increments for one trajectory at the solver step size.

        The path is drawn at ``noise.coupling_dt`` (default: the solver dt)
        and bridge-refined down to dt, so scenarios that share a coupling
        step and differ only in dt are driven by the same underlying noise.
        """
        t = self.config["time"]
        use_seed = self.seed if seed is None else int(seed)
        coupling = self.config["noise"]["coupling_dt"] or t["dt"]
        base_steps = round(t["t_final"] / coupling)
        path = sample_path(base_steps, self.modes, coupling, use_seed, stream)
        factor = round(coupling / t["dt"])
        if factor > 1:
            path = brownian_bridge_refine(path, factor)
        return path
