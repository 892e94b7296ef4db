"""Experiment configuration: one JSON document per run."""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

MODES = ("profile", "sweep", "limits", "converge", "verify")
FORMATS = ("csv", "json")
SOLVERS = ("transfer", "dense", "both")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending field."""


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _number(doc: dict, key: str, path: str, default=None, positive=True) -> float:
    if key not in doc:
        if default is None:
            _fail(f"{path}.{key}", "missing")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(f"{path}.{key}", f"expected a finite number, got {value!r}")
    if positive and value <= 0:
        _fail(f"{path}.{key}", f"must be positive, got {value!r}")
    return float(value)


def _integer(doc: dict, key: str, path: str, default: int, minimum: int) -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(f"{path}.{key}", f"expected an integer >= {minimum}, got {value!r}")
    return value


def _section(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        _fail(key, f"expected an object, got {type(value).__name__}")
    return value


@dataclass(frozen=True)
class StepProfileSpec:
    jump_points: tuple[float, ...] = ()
    viscosities: tuple[float, ...] = (1.0,)


@dataclass(frozen=True)
class ContinuousProfileSpec:
    """K(z) = k0 + slope * z on [0, z_cap], K(z_cap) above."""

    name: str = "linear"
    k0: float = 1.0
    slope: float = 1.0
    z_cap: float = 2.0
    steps: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)

    def viscosity(self, z: float) -> float:
        return self.k0 + self.slope * min(z, self.z_cap)


@dataclass(frozen=True)
class LogRange:
    min: float
    max: float
    count: int

    def values(self) -> list[float]:
        if self.count == 1:
            return [self.min]
        lo, hi = math.log10(self.min), math.log10(self.max)
        return [10.0 ** (lo + (hi - lo) * i / (self.count - 1)) for i in range(self.count)]


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    profile: StepProfileSpec | None = None
    continuous: ContinuousProfileSpec | None = None
    u_g: float = 1.0
    v_g: float = 0.0
    z_max: float | None = None
    count: int = 2000
    sweep_l: LogRange = LogRange(1e-4, 1e4, 9)
    sweep_h: LogRange = LogRange(1e-3, 1e2, 6)
    random_profiles: int = 100
    out_dir: str = "out"
    format: str = "csv"
    solver: str = "transfer"
    seed: int = 20240101
    source: dict = field(default_factory=dict, compare=False)

    @property
    def psi_g(self) -> complex:
        return complex(self.u_g, self.v_g)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("source")
        return d

    def digest(self) -> str:
        """SHA-256 of the effective configuration."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_profile(doc: dict) -> tuple[StepProfileSpec | None, ContinuousProfileSpec | None]:
    if "profile" not in doc:
        return None, None
    sec = _section(doc, "profile")
    if "continuous" in sec:
        name = sec["continuous"]
        if name != "linear":
            _fail("profile.continuous", f"unknown profile {name!r}; only 'linear' is available")
        steps = sec.get("steps", list(ContinuousProfileSpec.steps))
        if not isinstance(steps, list) or not steps or any(
            isinstance(s, bool) or not isinstance(s, int) or s < 1 for s in steps
        ):
            _fail("profile.steps", f"expected a non-empty list of positive integers, got {steps!r}")
        spec = ContinuousProfileSpec(
            name=name,
            k0=_number(sec, "k0", "profile", 1.0),
            slope=_number(sec, "slope", "profile", 1.0, positive=False),
            z_cap=_number(sec, "z_cap", "profile", 2.0),
            steps=tuple(sorted(set(steps))),
        )
        if spec.viscosity(spec.z_cap) <= 0:
            _fail("profile.slope", "viscosity becomes non-positive below z_cap")
        return None, spec
    jumps = sec.get("jump_points", [])
    visc = sec.get("viscosities")
    for key, val in (("jump_points", jumps), ("viscosities", visc)):
        if not isinstance(val, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in val
        ):
            _fail(f"profile.{key}", f"expected a list of numbers, got {val!r}")
    if not visc:
        _fail("profile.viscosities", "empty layer list")
    return StepProfileSpec(tuple(map(float, jumps)), tuple(map(float, visc))), None


def _parse_range(sec: dict, key: str, default: LogRange) -> LogRange:
    if key not in sec:
        return default
    sub = sec[key]
    path = f"sweep.{key}"
    if not isinstance(sub, dict):
        _fail(path, "expected an object with min, max, count")
    r = LogRange(_number(sub, "min", path), _number(sub, "max", path), _integer(sub, "count", path, 0, 1))
    if r.max < r.min:
        _fail(path, "max is below min")
    return r


def parse_config(doc: dict, mode: str, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a parsed JSON document for ``mode``; ``overrides`` come from CLI flags."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    if mode not in MODES:
        _fail("mode", f"unknown mode {mode!r}")
    if "mode" in doc and doc["mode"] != mode:
        _fail("mode", f"config is for {doc['mode']!r} but the {mode!r} command was run")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}

    step, cont = _parse_profile(doc)
    if mode == "converge" and step is not None:
        _fail("profile", "converge mode needs a continuous profile")
    if mode == "profile" and cont is not None:
        _fail("profile", "profile mode needs jump_points and viscosities")
    if mode == "profile" and step is None:
        step = StepProfileSpec()
    if mode == "converge" and cont is None:
        cont = ContinuousProfileSpec()

    wind = _section(doc, "wind")
    u_g = _number(wind, "u_g", "wind", 1.0, positive=False)
    v_g = _number(wind, "v_g", "wind", 0.0, positive=False)
    if u_g == 0 and v_g == 0:
        _fail("wind", "geostrophic wind must be non-zero")

    sampling = _section(doc, "sampling")
    z_max = _number(sampling, "z_max", "sampling", math.nan)
    count = _integer(sampling, "count", "sampling", 2000, 2)

    sweep = _section(doc, "sweep")
    verify = _section(doc, "verify")
    output = _section(doc, "output")
    fmt = overrides.get("format", output.get("format", "csv"))
    if fmt not in FORMATS:
        _fail("output.format", f"expected one of {FORMATS}, got {fmt!r}")
    solver = overrides.get("solver", doc.get("solver", "transfer"))
    if solver not in SOLVERS:
        _fail("solver", f"expected one of {SOLVERS}, got {solver!r}")
    out_dir = overrides.get("out_dir", output.get("dir", "out"))
    if not isinstance(out_dir, str) or not out_dir:
        _fail("output.dir", "expected a path")
    seed = overrides.get("seed", doc.get("seed", ExperimentConfig.seed))
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        _fail("seed", f"expected an unsigned 64-bit integer, got {seed!r}")

    return ExperimentConfig(
        mode=mode,
        profile=step,
        continuous=cont,
        u_g=u_g,
        v_g=v_g,
        z_max=None if math.isnan(z_max) else z_max,
        count=count,
        sweep_l=_parse_range(sweep, "l", ExperimentConfig.sweep_l),
        sweep_h=_parse_range(sweep, "h", ExperimentConfig.sweep_h),
        random_profiles=_integer(verify, "random_profiles", "verify", 100, 1),
        out_dir=out_dir,
        format=fmt,
        solver=solver,
        seed=seed,
        source=doc,
    )


def load_config(path: str | os.PathLike | None, mode: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read and validate a JSON config file; ``None`` means all defaults."""
    if path is None:
        doc: Any = {}
    else:
        text = Path(path).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(doc, mode, overrides)


def ensure_output_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output.dir: cannot create {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output.dir: {out} is not writable")
    return out
