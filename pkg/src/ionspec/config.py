"""JSON experiment configs: schema validation, line-referenced errors and default resolution.

Ion and spin labels in config files are one-based; everything below the
config layer uses zero-based indices.
"""

from __future__ import annotations

import copy
import json
import re
from pathlib import Path

import jsonschema

SCHEMA_VERSION = 1
EXPERIMENTS = ("chain-modes", "sqc", "dqc", "spins-lineshape", "gate-error-scan")

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_label = {"type": "integer", "minimum": 1, "maximum": 12}


def _pair(item):
    return {"oneOf": [item, {"type": "array", "items": item, "minItems": 2, "maxItems": 2}]}


SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "ionspec experiment config",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "experiment"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"enum": list(EXPERIMENTS)},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "chain": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "n_ions": {"type": "integer", "minimum": 1, "maximum": 12},
                "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "U": {"type": "number", "minimum": -1, "maximum": 1},
                "excitation_cap": {"type": "integer", "minimum": 1, "maximum": 8},
            },
        },
        "ms": {
            "type": "object", "additionalProperties": False,
            "properties": {"omega": _pos},
        },
        "pulses": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "sites": {"type": "array", "items": _label, "minItems": 2, "maxItems": 4},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "model": {"enum": ["linearized", "exact"]},
            },
        },
        "readout": {
            "type": "object", "additionalProperties": False,
            "properties": {"site": _label},
        },
        "fixed_delays": {"type": "array", "items": _nonneg, "minItems": 2, "maxItems": 4},
        "noise": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["none", "local", "collective"]},
                "gamma": _nonneg,
            },
        },
        "grid": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "n": _pair({"type": "integer", "minimum": 1, "maximum": 8192}),
                "dt": _pair(_pos),
            },
        },
        "spectrum": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "eta": {"oneOf": [{"type": "null"}, _nonneg,
                                  {"type": "array", "items": _nonneg, "minItems": 2, "maxItems": 2}]},
                "pad_factor": {"type": "integer", "minimum": 1, "maximum": 16},
                "axes": {"enum": ["both", "first_only"]},
                "peak_threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "arcsinh_scale": {"oneOf": [{"type": "null"}, _pos]},
            },
        },
        "mode": {"enum": ["direct", "phase-cycled"]},
        "gammas": {"type": "array", "items": _nonneg, "minItems": 2},
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "prefix": {"type": "string"}},
        },
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1, "maximum": 64},
    },
}

_COMMON = {
    "name": "",
    "description": "",
    "output": {"dir": "out", "prefix": None},
    "seed": 0,
    "threads": 1,
}

DEFAULTS = {
    "chain-modes": {"chain": {"n_ions": 5, "beta": 0.1, "U": 0.0}},
    "sqc": {
        "chain": {"n_ions": 5, "beta": 0.1, "U": 0.0, "excitation_cap": 2},
        "pulses": {"sites": [1, 1], "alpha": 0.1, "model": "linearized"},
        "readout": {"site": 3},
        "fixed_delays": [0.0, 0.0],
        "noise": {"kind": "none", "gamma": 0.0},
        "grid": {"n": [512, 512], "dt": [500 / 512, 500 / 512]},
        "spectrum": {"eta": None, "pad_factor": 2, "axes": "both", "peak_threshold": 0.05,
                     "arcsinh_scale": None},
        "mode": "direct",
    },
    "dqc": {
        "chain": {"n_ions": 2, "beta": 0.1, "U": 0.0, "excitation_cap": 2},
        "pulses": {"sites": [1, 1, 1, 1], "alpha": 0.1, "model": "linearized"},
        "readout": {"site": 1},
        "fixed_delays": [0.0, 0.0, 0.0, 0.0],
        "noise": {"kind": "none", "gamma": 0.0},
        "grid": {"n": [512, 512], "dt": [500 / 512, 500 / 512]},
        "spectrum": {"eta": None, "pad_factor": 2, "axes": "both", "peak_threshold": 1e-3,
                     "arcsinh_scale": None},
        "mode": "direct",
    },
    "spins-lineshape": {
        "ms": {"omega": 1.0},
        "pulses": {"beta": 0.1},
        "noise": {"kind": "none", "gamma": 0.0},
        "grid": {"n": [256, 256], "dt": [60 / 256, 60 / 256]},
        "spectrum": {"eta": None, "pad_factor": 8, "axes": "both", "peak_threshold": 0.05,
                     "arcsinh_scale": None},
        "mode": "direct",
    },
    "gate-error-scan": {
        "ms": {"omega": 1.0},
        "pulses": {"beta": 0.1},
        "gammas": [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08],
        "grid": {"n": [256, 256], "dt": [60 / 256, 60 / 256]},
        "spectrum": {"eta": None, "pad_factor": 8, "axes": "both", "peak_threshold": 0.05,
                     "arcsinh_scale": None},
        "mode": "direct",
    },
}

# sections that make sense for each experiment; anything else is rejected
_ALLOWED = {
    "chain-modes": {"chain"},
    "sqc": {"chain", "pulses", "readout", "fixed_delays", "noise", "grid", "spectrum", "mode"},
    "dqc": {"chain", "pulses", "readout", "fixed_delays", "noise", "grid", "spectrum", "mode"},
    "spins-lineshape": {"ms", "pulses", "noise", "grid", "spectrum", "mode"},
    "gate-error-scan": {"ms", "pulses", "gammas", "grid", "spectrum", "mode"},
}
_BASE_KEYS = {"schema_version", "experiment", "name", "description", "output", "seed", "threads"}


class ConfigError(ValueError):
    """Invalid config; ``line`` is one-based when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = f"line {line}: " if line else ""
        name = f"{field}: " if field else ""
        super().__init__(f"{where}{name}{message}")


def _locate(text: str, path) -> int | None:
    """Best-effort line of the JSON key at ``path`` (nested keys searched in order)."""
    pos, line = 0, None
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


def _dotted(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _as_pair(v):
    return list(v) if isinstance(v, (list, tuple)) else [v, v]


def validate(raw: dict, text: str | None = None) -> None:
    """Raise :class:`ConfigError` for the first schema or consistency violation."""
    validator = jsonschema.Draft7Validator(SCHEMA)
    err = jsonschema.exceptions.best_match(validator.iter_errors(raw))
    if err is not None:
        # oneOf failures: report the branch that got furthest
        while err.context:
            err = jsonschema.exceptions.best_match(err.context)
        path = list(err.absolute_path)
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            path = path + extra[:1]
            msg = f"unknown key {extra[0]!r}" if extra else err.message
        else:
            msg = err.message
        raise ConfigError(msg, _dotted(path) or None, _locate(text, path) if text else None)
    exp = raw["experiment"]
    stray = set(raw) - _BASE_KEYS - _ALLOWED[exp]
    if stray:
        key = sorted(stray)[0]
        raise ConfigError(f"not used by experiment {exp!r}", key, _locate(text, [key]) if text else None)


def _check_consistency(cfg: dict, text) -> None:
    exp = cfg["experiment"]

    def fail(msg, path):
        raise ConfigError(msg, _dotted(path), _locate(text, path) if text else None)

    if exp in ("sqc", "dqc"):
        n = cfg["chain"]["n_ions"]
        want = 2 if exp == "sqc" else 4
        sites = cfg["pulses"]["sites"]
        if len(sites) != want:
            fail(f"{exp} needs {want} pulse sites, got {len(sites)}", ["pulses", "sites"])
        if len(cfg["fixed_delays"]) != want:
            fail(f"{exp} needs {want} delays", ["fixed_delays"])
        if any(s > n for s in sites):
            fail(f"pulse site exceeds n_ions={n}", ["pulses", "sites"])
        if cfg["readout"]["site"] > n:
            fail(f"readout site exceeds n_ions={n}", ["readout", "site"])
        if cfg["noise"]["kind"] == "collective":
            fail("collective dephasing is defined for spins only", ["noise", "kind"])
    if "grid" in cfg:
        for key in ("n", "dt"):
            if len(cfg["grid"][key]) != 2:
                fail("expected a scalar or a pair", ["grid", key])


def resolve(raw: dict, text: str | None = None) -> dict:
    """Validate ``raw`` and fill every default; the result is what a run uses."""
    validate(raw, text)
    exp = raw["experiment"]
    cfg = _merge(_merge(_COMMON, DEFAULTS[exp]), raw)
    if "grid" in cfg:
        cfg["grid"] = {"n": _as_pair(cfg["grid"]["n"]), "dt": _as_pair(cfg["grid"]["dt"])}
    if "spectrum" in cfg and cfg["spectrum"]["eta"] is None:
        spans = [n * dt for n, dt in zip(cfg["grid"]["n"], cfg["grid"]["dt"])]
        cfg["spectrum"]["eta"] = [3.0 / s for s in spans]
    elif "spectrum" in cfg:
        cfg["spectrum"]["eta"] = _as_pair(cfg["spectrum"]["eta"])
    if cfg["output"]["prefix"] is None:
        cfg["output"]["prefix"] = cfg["name"] or exp
    _check_consistency(cfg, text)
    return cfg


def loads(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, None, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", None, 1)
    return resolve(raw, text)


def load(path) -> dict:
    return loads(Path(path).read_text())
