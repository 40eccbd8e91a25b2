"""Strict run-configuration parsing for the batch front door.

Configs are JSON documents with a fixed schema: unknown keys and
out-of-range values abort before any computation.  The parsed RunConfig
carries everything a mode needs, so a run is a pure function of
(config, seed).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError

MODES = (
    "solve-linear",
    "solve-nonlinear",
    "ladder",
    "sweep",
    "verify",
    "oracle-compare",
)

_TOP_KEYS = {
    "mode",
    "k",
    "N",
    "Q",
    "seed",
    "drift",
    "fixed_point",
    "ladder",
    "sweep",
    "verify",
    "oracle_compare",
    "output",
}

_DRIFT_KEYS = {
    "constant": {"kind", "h"},
    "clipped-potential": {"kind", "lam", "width"},
    "rotational": {"kind", "scale", "offset"},
    "vlasov": {"kind", "kernel"},
    "componentwise-tanh": {"kind", "scale", "n_components", "mean_shift"},
    "componentwise-decoupled-tanh": {"kind", "scale", "n_components"},
}

_KERNEL_KEYS = {
    "constant": {"kind", "h"},
    "tanh": {"kind", "scale"},
    "gaussian-lobe": {"kind", "scale"},
    "clipped-linear": {"kind", "scale", "cap"},
}

_FIXED_POINT_KEYS = {"damping", "tolerance", "max_iterations"}
_LADDER_KEYS = {
    "weights",
    "component_bound",
    "levels",
    "degrees",
    "quad_orders",
    "tail_levels",
}
_SWEEP_KEYS = {"family", "values", "direction", "kernel_scale_max"}
_VERIFY_KEYS = {"density"}
_ORACLE_KEYS = {"oracle", "tolerance", "span", "n_points", "n_cells", "dt", "n_steps", "n_particles"}
_OUTPUT_KEYS = {"dir"}

_SWEEP_FAMILIES = ("constant-scale", "vlasov-tanh-scale")
_ORACLES = ("1d", "fd2d", "sde")


def _require_keys(block: dict, allowed: set, context: str, required: set = frozenset()):
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")
    missing = required - set(block)
    if missing:
        raise ConfigError(f"missing required key(s) {sorted(missing)} in {context}")


def _check_range(name, value, low, high, integer=False):
    if integer and not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{name} must be numeric, got {value!r}")
    if not (low <= value <= high) or not math.isfinite(value):
        raise ConfigError(f"{name}={value} outside the documented range [{low}, {high}]")
    return value


@dataclass(frozen=True)
class RunConfig:
    mode: str
    k: int = 1
    degree: int = 8
    quad_order: int = 0  # 0: default 2 * degree
    seed: int = 0
    drift: dict = field(default_factory=dict)
    fixed_point: dict = field(default_factory=dict)
    ladder: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    oracle_compare: dict = field(default_factory=dict)
    output_dir: str | None = None
    raw: dict = field(default_factory=dict)

    @property
    def effective_quad_order(self) -> int:
        return self.quad_order if self.quad_order else max(2 * self.degree, self.degree + 1)


def _validate_drift(block, context="drift"):
    if not isinstance(block, dict) or "kind" not in block:
        raise ConfigError(f"{context} block must be an object with a 'kind'")
    kind = block["kind"]
    if kind not in _DRIFT_KEYS:
        raise ConfigError(f"unknown drift kind {kind!r}")
    _require_keys(block, _DRIFT_KEYS[kind], context)
    if kind == "constant":
        if "h" not in block or not isinstance(block["h"], list):
            raise ConfigError("constant drift needs a vector 'h'")
        for c in block["h"]:
            _check_range("drift.h entry", c, -100.0, 100.0)
    elif kind == "clipped-potential":
        _check_range("drift.lam", block.get("lam", None), -10.0, 10.0)
        if "width" in block:
            _check_range("drift.width", block["width"], 1e-3, 100.0)
    elif kind == "rotational":
        _check_range("drift.scale", block.get("scale", None), -10.0, 10.0)
        if "offset" in block:
            for c in block["offset"]:
                _check_range("drift.offset entry", c, -10.0, 10.0)
    elif kind == "vlasov":
        kernel = block.get("kernel")
        if not isinstance(kernel, dict) or kernel.get("kind") not in _KERNEL_KEYS:
            raise ConfigError("vlasov drift needs a kernel block with a known kind")
        _require_keys(kernel, _KERNEL_KEYS[kernel["kind"]], f"{context}.kernel")
        for key in set(kernel) - {"kind", "h"}:
            _check_range(f"kernel.{key}", kernel[key], -100.0, 100.0)
        if kernel["kind"] == "constant":
            for c in kernel.get("h", []):
                _check_range("kernel.h entry", c, -100.0, 100.0)
    else:
        _check_range("drift.scale", block.get("scale", None), -100.0, 100.0)
        _check_range("drift.n_components", block.get("n_components", None), 1, 64, integer=True)
        if "mean_shift" in block and not isinstance(block["mean_shift"], bool):
            raise ConfigError("drift.mean_shift must be a boolean")


def parse_config(doc: dict) -> RunConfig:
    """Validate a parsed JSON document into a RunConfig; strict on keys."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(doc, _TOP_KEYS, "config", required={"mode"})
    mode = doc["mode"]
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")

    k = _check_range("k", doc.get("k", 1), 1, 8, integer=True)
    degree = _check_range("N", doc.get("N", 8), 0, 64, integer=True)
    quad_order = _check_range("Q", doc.get("Q", 0), 0, 512, integer=True)
    seed = _check_range("seed", doc.get("seed", 0), 0, 2**64 - 1, integer=True)

    drift = doc.get("drift", {})
    if mode in ("solve-linear", "solve-nonlinear", "sweep", "verify", "oracle-compare"):
        if mode != "sweep":
            _validate_drift(drift)
    if mode == "ladder":
        ladder = doc.get("ladder")
        if not isinstance(ladder, dict):
            raise ConfigError("ladder mode requires a ladder block")
        _require_keys(
            ladder,
            _LADDER_KEYS,
            "ladder",
            required={"weights", "component_bound", "levels", "degrees", "quad_orders"},
        )
        _validate_drift(drift, "drift")
        if drift.get("kind") not in ("componentwise-tanh", "componentwise-decoupled-tanh"):
            raise ConfigError("ladder mode requires a componentwise drift kind")
    if mode == "sweep":
        sweep = doc.get("sweep")
        if not isinstance(sweep, dict):
            raise ConfigError("sweep mode requires a sweep block")
        _require_keys(sweep, _SWEEP_KEYS, "sweep", required={"family", "values"})
        if sweep["family"] not in _SWEEP_FAMILIES:
            raise ConfigError(f"unknown sweep family {sweep['family']!r}")
        if not isinstance(sweep["values"], list) or not sweep["values"]:
            raise ConfigError("sweep.values must be a non-empty list")
        for u in sweep["values"]:
            _check_range("sweep value", u, -100.0, 100.0)
    if mode == "verify":
        verify = doc.get("verify")
        if not isinstance(verify, dict):
            raise ConfigError("verify mode requires a verify block")
        _require_keys(verify, _VERIFY_KEYS, "verify", required={"density"})
    if mode == "oracle-compare":
        oc = doc.get("oracle_compare")
        if not isinstance(oc, dict):
            raise ConfigError("oracle-compare mode requires an oracle_compare block")
        _require_keys(oc, _ORACLE_KEYS, "oracle_compare", required={"oracle"})
        if oc["oracle"] not in _ORACLES:
            raise ConfigError(f"unknown oracle {oc['oracle']!r}")
    fp = doc.get("fixed_point", {})
    if fp:
        _require_keys(fp, _FIXED_POINT_KEYS, "fixed_point")
        if "damping" in fp:
            _check_range("fixed_point.damping", fp["damping"], 1e-6, 1.0)
        if "tolerance" in fp:
            _check_range("fixed_point.tolerance", fp["tolerance"], 1e-16, 1.0)
        if "max_iterations" in fp:
            _check_range("fixed_point.max_iterations", fp["max_iterations"], 1, 100000, integer=True)
    output = doc.get("output", {})
    if output:
        _require_keys(output, _OUTPUT_KEYS, "output")

    return RunConfig(
        mode=mode,
        k=k,
        degree=degree,
        quad_order=quad_order,
        seed=int(seed),
        drift=drift,
        fixed_point=fp,
        ladder=doc.get("ladder", {}),
        sweep=doc.get("sweep", {}),
        verify=doc.get("verify", {}),
        oracle_compare=doc.get("oracle_compare", {}),
        output_dir=output.get("dir"),
        raw=doc,
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(doc)
