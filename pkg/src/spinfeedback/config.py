"""Run configuration: a flat JSON object plus command-line overrides."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from .coupling import ChannelParams, PhysicalParams, channel_from_config
from .errors import ConfigError
from .gaussian import FeedbackConfig

MODES = ("calibrate", "sweep", "exact", "multicycle")

PHYSICAL_KEYS = ("gamma_mhz", "sigma0_m2", "w0_um", "s0", "delta_mhz", "n_photons", "n_atoms")
CHANNEL_KEYS = ("kappa", "eps_l", "eps_a", "eps_l_prime")
FEEDBACK_KEYS = ("gain", "x0", "clamp_enabled", "cycles", "gain_scale")
RUN_KEYS = ("mode", "gain_grid", "n_shots", "seed", "output_path", "n_spins", "n_resamples")
KNOWN_KEYS = frozenset(PHYSICAL_KEYS + CHANNEL_KEYS + FEEDBACK_KEYS + RUN_KEYS)

DEFAULT_SHOTS = 10_000
DEFAULT_RESAMPLES = 1000


@dataclass(frozen=True)
class RunConfig:
    mode: str
    physical: Optional[PhysicalParams] = None
    channel: Optional[ChannelParams] = None
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    gain_grid: Optional[tuple] = None
    n_shots: int = DEFAULT_SHOTS
    seed: int = 0
    output_path: Optional[str] = None
    n_spins: Optional[int] = None
    n_resamples: int = DEFAULT_RESAMPLES
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def config_hash(self) -> str:
        """SHA-256 of the canonical resolved settings (output path excluded)."""
        payload = {k: v for k, v in self.raw.items() if k != "output_path"}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _as_int(raw, key, minimum):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{key} must be an integer, got {value!r}", field=key)
    value = int(value)
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}", field=key)
    return value


def _as_float(raw, key):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key} must be a finite number, got {value!r}", field=key)
    return float(value)


def build_config(raw: Mapping[str, Any]) -> RunConfig:
    """Validate a flat mapping and resolve it into a :class:`RunConfig`."""
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}", field=unknown[0])
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}", field="mode")

    physical = None
    if any(k in raw for k in PHYSICAL_KEYS):
        physical = PhysicalParams.from_config(raw)
    channel = None
    if physical is not None or any(k in raw for k in CHANNEL_KEYS):
        channel = channel_from_config(raw, physical)

    fb = {}
    for key in ("gain", "x0", "gain_scale"):
        if raw.get(key) is not None:
            fb[key] = _as_float(raw, key)
    if raw.get("cycles") is not None:
        fb["cycles"] = _as_int(raw, "cycles", 1)
    if raw.get("clamp_enabled") is not None:
        if not isinstance(raw["clamp_enabled"], bool):
            raise ConfigError("clamp_enabled must be true or false", field="clamp_enabled")
        fb["clamp_enabled"] = raw["clamp_enabled"]
    feedback = FeedbackConfig(**fb)

    grid = None
    if raw.get("gain_grid") is not None:
        g = raw["gain_grid"]
        if not isinstance(g, list) or not g:
            raise ConfigError("gain_grid must be a non-empty list of numbers", field="gain_grid")
        grid = tuple(_as_float({"gain_grid": v}, "gain_grid") for v in g)

    n_shots = _as_int(raw, "n_shots", 1) if "n_shots" in raw else DEFAULT_SHOTS
    seed = _as_int(raw, "seed", 0) if "seed" in raw else 0
    if seed >= 1 << 64:
        raise ConfigError("seed must fit in 64 bits", field="seed")
    n_spins = _as_int(raw, "n_spins", 1) if raw.get("n_spins") is not None else None
    n_resamples = _as_int(raw, "n_resamples", 0) if "n_resamples" in raw else DEFAULT_RESAMPLES
    if 0 < n_resamples < 100:
        raise ConfigError("n_resamples must be 0 (off) or >= 100", field="n_resamples")
    output_path = raw.get("output_path")

    if mode == "calibrate" and physical is None:
        raise ConfigError("calibrate needs physical parameters", field="gamma_mhz")
    if mode in ("sweep", "multicycle"):
        if channel is None:
            raise ConfigError(f"{mode} needs a channel (kappa/eps_a or physical parameters)", field="kappa")
        if n_shots < 100:
            raise ConfigError("n_shots must be >= 100 for sweeps", field="n_shots")
    if mode == "multicycle" and feedback.cycles < 2:
        raise ConfigError("multicycle needs cycles >= 2", field="cycles")
    if mode == "exact" and n_spins is None:
        raise ConfigError("exact needs n_spins", field="n_spins")

    return RunConfig(
        mode=mode,
        physical=physical,
        channel=channel,
        feedback=feedback,
        gain_grid=grid,
        n_shots=n_shots,
        seed=seed,
        output_path=output_path,
        n_spins=n_spins,
        n_resamples=n_resamples,
        raw=dict(raw),
    )


def load_config(path, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(raw)
