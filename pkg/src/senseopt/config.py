"""Strict TOML run-config parsing.

Configs are plain key-value TOML with dotted sections.  Unknown keys are
rejected (typos in physics parameters must not pass silently) with the
offending key and its line in the file.
"""

from __future__ import annotations

import json
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .fields import MultiToneField, PhotocurrentField
from .noise import PowerSpectralDensity, default_bath_psd


class ConfigError(ValueError):
    """Invalid run configuration; message carries the offending key/line."""


EXPERIMENTS = (
    "optimize_pi",
    "optimize_continuous",
    "optimize_pump",
    "glass_analyze",
    "noise_check",
)

_FIELD_KEYS = {
    "field": {"type", "amplitude_ut"},
    "field.multitone": {"weights", "freqs_khz", "phases"},
    "field.photocurrent": {"bmax_mg", "tau_rise_us", "switch_times_us"},
}
_PSD_KEYS = {"psd": {"default", "floor", "components"}}
_PROTOCOL_KEYS = {
    "protocol": {
        "type",
        "n_pulses",
        "sensing_time_us",
        "dt_ns",
        "init_range_rad",
        "minibatch",
        "pool_size",
        "init_jitter_ns",
    }
}
_OPT_KEYS = {"opt": {"iterations", "momentum", "epsilon", "record_stride", "seed"}}

# experiment -> {section -> allowed keys}; "" is the top level
_SCHEMAS = {
    "optimize_pi": {
        "": {"experiment"},
        **_FIELD_KEYS,
        **_PSD_KEYS,
        **_PROTOCOL_KEYS,
        **_OPT_KEYS,
    },
    "optimize_continuous": {
        "": {"experiment"},
        **_FIELD_KEYS,
        **_PSD_KEYS,
        **_PROTOCOL_KEYS,
        **_OPT_KEYS,
    },
    "optimize_pump": {
        "": {"experiment", "t0_us", "sensing_time_us", "bmax_mg", "tau_rise_us"},
        **_PSD_KEYS,
        **_OPT_KEYS,
        "pump": {"n_pulses", "tau_us", "init_jitter_ns"},
        "probe": {"mode", "tau_us"},
    },
    "glass_analyze": {
        "": {"experiment"},
        **_FIELD_KEYS,
        **_PSD_KEYS,
        **_PROTOCOL_KEYS,
        **_OPT_KEYS,
        "glass": {
            "families",
            "records",
            "n_w",
            "runs",
            "iterations_pi",
            "iterations_continuous",
        },
        "pump": {"n_pulses", "tau_us", "init_jitter_ns"},
        "probe": {"mode", "tau_us"},
    },
    "noise_check": {
        "": {"experiment"},
        **_PSD_KEYS,
        "noise_check": {"n_omega", "traces", "sensing_time_us", "dt_ns"},
    },
}


def _flatten(d: dict, prefix: str = ""):
    for key, val in d.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(val, dict):
            yield from _flatten(val, path)
        else:
            yield path, val


def _key_line(text: str, dotted: str):
    """Best-effort line anchor: first line assigning the key's last part."""
    leaf = dotted.split(".")[-1]
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith(leaf) and "=" in stripped:
            name = stripped.split("=", 1)[0].strip().strip('"')
            if name == leaf:
                return i
    return None


def validate_config(cfg: dict, raw_text: str = "") -> dict:
    """Check experiment kind and reject unknown keys; returns cfg."""
    kind = cfg.get("experiment")
    if kind not in EXPERIMENTS:
        raise ConfigError(
            f"experiment must be one of {', '.join(EXPERIMENTS)}; got {kind!r}"
        )
    schema = _SCHEMAS[kind]
    for path, _ in _flatten(cfg):
        section, _, leaf = path.rpartition(".")
        allowed = schema.get(section)
        if allowed is None or leaf not in allowed:
            line = _key_line(raw_text, path)
            at = f" (line {line})" if line else ""
            raise ConfigError(f"unknown config key '{path}' for {kind}{at}")
    return cfg


def load_config(path) -> dict:
    """Load a TOML run config, or the resolved config of a manifest.json."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
        if "resolved_config" in data:
            return validate_config(data["resolved_config"], "")
        return validate_config(data, "")
    try:
        cfg = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path.name}: {exc}") from None
    return validate_config(cfg, text)


def build_psd(cfg: dict) -> PowerSpectralDensity:
    sec = cfg.get("psd", {"default": True})
    if sec.get("default", False):
        if "floor" in sec or "components" in sec:
            raise ConfigError("psd.default = true excludes explicit floor/components")
        return default_bath_psd()
    if "floor" not in sec:
        raise ConfigError("psd needs either default = true or an explicit floor")
    comps = tuple(tuple(c) for c in sec.get("components", []))
    for c in comps:
        if len(c) != 3:
            raise ConfigError(f"psd.components entries are [height, center, sigma]; got {c}")
    try:
        return PowerSpectralDensity(floor=float(sec["floor"]), components=comps)
    except ValueError as exc:
        raise ConfigError(f"psd: {exc}") from None


def build_field(cfg: dict):
    sec = cfg.get("field")
    if sec is None:
        raise ConfigError("missing [field] section")
    kind = sec.get("type")
    amplitude = float(sec.get("amplitude_ut", 1.0))
    if kind == "multitone":
        mt = sec.get("multitone")
        if mt is None:
            raise ConfigError("field.type = multitone needs a [field.multitone] section")
        try:
            return MultiToneField(
                weights=tuple(mt["weights"]),
                freqs_hz=tuple(1e3 * f for f in mt["freqs_khz"]),
                phases=tuple(mt["phases"]),
                amplitude_ut=amplitude,
            )
        except KeyError as exc:
            raise ConfigError(f"field.multitone is missing key {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"field.multitone.weights: {exc}") from None
    if kind == "photocurrent":
        ph = sec.get("photocurrent")
        if ph is None:
            raise ConfigError("field.type = photocurrent needs a [field.photocurrent] section")
        try:
            return PhotocurrentField(
                b_max_mg=float(ph["bmax_mg"]),
                tau_rise=1e-6 * float(ph["tau_rise_us"]),
                switch_times=tuple(1e-6 * t for t in ph["switch_times_us"]),
            )
        except KeyError as exc:
            raise ConfigError(f"field.photocurrent is missing key {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"field.photocurrent: {exc}") from None
    raise ConfigError(f"field.type must be multitone or photocurrent, got {kind!r}")


def opt_params(cfg: dict, default_epsilon: float) -> dict:
    sec = cfg.get("opt", {})
    return {
        "iterations": int(sec.get("iterations", 500)),
        "momentum": float(sec.get("momentum", 0.95)),
        "epsilon": float(sec.get("epsilon", default_epsilon)),
        "record_stride": int(sec.get("record_stride", 1)),
        "seed": int(sec.get("seed", 0)),
    }
