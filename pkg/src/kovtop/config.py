"""Run configuration: documented JSON schema, strict validation.

Schema (JSON object), by key:

  command       one of: simulate, painleve-test, classify, separate-check,
                reconstruct-check, theta-check, design-model
  seed          unsigned integer (default 0)
  body          {"c0": float}  or
                {"A","B","C" [,"Mg","x0","y0","z0"]}  (general form)
  state0        {"p","q","r","gamma","gamma1","gamma2"}
  invariants    {"l1","l","k"}  (k is the positive square root of k^2)
  t_end         float > 0
  tol           float in [1e-14, 1e-3]
  sample_step   float > 0
  renormalize   bool (default false)
  method        "RK45" | "DOP853" (default "RK45")
  orientation   bool: carry the full direction-cosine matrix (default false)
  classify      {"l1","k0","l0"}           (classify command)
  design        {"A1","B1","C1" [,"M"]}    (design-model command)
  n_samples     int >= 1 (theta-check comparison points, default 100)

Unknown keys are rejected with the offending key named.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import SchemaError
from .euler_poisson import BodyParameters, MotionState, kovalevskaya_parameters

__all__ = ["RunConfig", "parse_config", "COMMANDS"]

COMMANDS = (
    "simulate",
    "painleve-test",
    "classify",
    "separate-check",
    "reconstruct-check",
    "theta-check",
    "design-model",
)

_TOP_KEYS = {
    "command", "seed", "body", "state0", "invariants", "t_end", "tol",
    "sample_step", "renormalize", "method", "orientation", "classify",
    "design", "n_samples",
}


def _require_finite(value: float, key: str) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"{key} must be finite, got {value!r}")
    return v


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    for k in obj:
        if k not in allowed:
            raise SchemaError(f"unknown key {k!r} in {where}")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    command: str
    seed: int = 0
    body: BodyParameters | None = None
    state0: MotionState | None = None
    invariants: dict[str, float] | None = None
    t_end: float = 10.0
    tol: float = 1e-12
    sample_step: float = 1e-3
    renormalize: bool = False
    method: str = "RK45"
    orientation: bool = False
    classify: dict[str, float] | None = None
    design: dict[str, float] | None = None
    n_samples: int = 100
    raw: dict = field(default_factory=dict, repr=False)


def _parse_body(obj: dict) -> BodyParameters:
    if "c0" in obj:
        _check_keys(obj, {"c0"}, "body")
        return kovalevskaya_parameters(_require_finite(obj["c0"], "body.c0"))
    _check_keys(obj, {"A", "B", "C", "Mg", "x0", "y0", "z0"}, "body")
    for k in ("A", "B", "C"):
        if k not in obj:
            raise SchemaError(f"body is missing required key {k!r}")
    return BodyParameters(
        A=_require_finite(obj["A"], "body.A"),
        B=_require_finite(obj["B"], "body.B"),
        C=_require_finite(obj["C"], "body.C"),
        mg=_require_finite(obj.get("Mg", 1.0), "body.Mg"),
        x0=_require_finite(obj.get("x0", 0.0), "body.x0"),
        y0=_require_finite(obj.get("y0", 0.0), "body.y0"),
        z0=_require_finite(obj.get("z0", 0.0), "body.z0"),
    )


def _parse_state(obj: dict) -> MotionState:
    keys = {"p", "q", "r", "gamma", "gamma1", "gamma2"}
    _check_keys(obj, keys, "state0")
    missing = keys - set(obj)
    if missing:
        raise SchemaError(f"state0 is missing {sorted(missing)}")
    return MotionState(**{k: _require_finite(obj[k], f"state0.{k}") for k in keys})


def _parse_triplet(obj: dict, keys: tuple[str, ...], where: str, defaults=None) -> dict:
    allowed = set(keys) | set(defaults or {})
    _check_keys(obj, allowed, where)
    out = dict(defaults or {})
    for k in keys:
        if k not in obj and k not in out:
            raise SchemaError(f"{where} is missing required key {k!r}")
    for k, v in obj.items():
        out[k] = _require_finite(v, f"{where}.{k}")
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object")
    _check_keys(data, _TOP_KEYS, "config")
    if "command" not in data:
        raise SchemaError("config is missing required key 'command'")
    command = data["command"]
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}; expected one of {COMMANDS}")

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ValueError("seed must be a nonnegative integer")

    cfg: dict[str, Any] = {"command": command, "seed": seed, "raw": data}
    if "body" in data:
        cfg["body"] = _parse_body(data["body"])
    if "state0" in data:
        cfg["state0"] = _parse_state(data["state0"])
    if "invariants" in data:
        cfg["invariants"] = _parse_triplet(data["invariants"], ("l1", "l", "k"), "invariants")
    if "classify" in data:
        cfg["classify"] = _parse_triplet(data["classify"], ("l1", "k0", "l0"), "classify")
    if "design" in data:
        cfg["design"] = _parse_triplet(data["design"], ("A1", "B1", "C1"), "design", {"M": 1.0})
    for key in ("t_end", "tol", "sample_step"):
        if key in data:
            cfg[key] = _require_finite(data[key], key)
    if "renormalize" in data:
        if not isinstance(data["renormalize"], bool):
            raise SchemaError("renormalize must be a boolean")
        cfg["renormalize"] = data["renormalize"]
    if "orientation" in data:
        if not isinstance(data["orientation"], bool):
            raise SchemaError("orientation must be a boolean")
        cfg["orientation"] = data["orientation"]
    if "method" in data:
        if data["method"] not in ("RK45", "DOP853"):
            raise SchemaError("method must be RK45 or DOP853")
        cfg["method"] = data["method"]
    if "n_samples" in data:
        if not isinstance(data["n_samples"], int) or data["n_samples"] < 1:
            raise ValueError("n_samples must be a positive integer")
        cfg["n_samples"] = data["n_samples"]

    out = RunConfig(**cfg)
    _validate_command(out)
    return out


def _validate_command(cfg: RunConfig) -> None:
    cmd = cfg.command
    if cmd == "classify":
        if cfg.classify is None:
            raise SchemaError("classify command needs the 'classify' block")
        return
    if cmd == "design-model":
        if cfg.design is None:
            raise SchemaError("design-model command needs the 'design' block")
        return
    if cmd == "painleve-test":
        if cfg.body is None:
            raise SchemaError("painleve-test needs a 'body' block")
        return
    if cmd == "simulate":
        if cfg.body is None:
            raise SchemaError("simulate needs a 'body' block")
        if cfg.state0 is None and cfg.invariants is None:
            raise SchemaError("simulate needs 'state0' or 'invariants'")
    else:  # separate-check, reconstruct-check, theta-check
        if cfg.body is None or not cfg.body.is_kovalevskaya:
            raise SchemaError(f"{cmd} needs a Kovalevskaya body (give body.c0)")
        if cfg.invariants is None:
            raise SchemaError(f"{cmd} needs the 'invariants' block")
    if not cfg.t_end > 0:
        raise ValueError("t_end must be positive")
    if not 1e-14 <= cfg.tol <= 1e-3:
        raise ValueError("tol must lie in [1e-14, 1e-3]")
    if not cfg.sample_step > 0:
        raise ValueError("sample_step must be positive")
