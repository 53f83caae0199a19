"""Flat key/value run configuration files.

Grammar: one ``key = value`` pair per line, ``#`` comments, blank lines
ignored. Keys are dotted paths into the run config (``budget.window_s``),
values are scalars; optional fields accept ``none`` and the score weights
are a comma-separated triple. A ``schema_version`` field pins the layout.

The same key set drives command-line overrides (``--set key=value``);
unknown keys are rejected, never ignored.
"""

from __future__ import annotations

from typing import Optional

from .budget import CostModel
from .domain import BudgetConfig, EvalConfig, FrameClock, PolicyConfig
from .engine import RunConfig
from .errors import ConfigError, ParseError
from .tracker import TrackerConfig

SCHEMA_VERSION = 1

# key -> (type tag, default-as-text, help). Order here is the documented
# order in --help and in dumped files.
CONFIG_SCHEMA: dict[str, tuple[str, str, str]] = {
    "schema_version": ("int", "1", "config layout version (must be 1)"),
    "clock.fps": ("float", "15.0", "source frame rate in frames/s"),
    "clock.frame_stride": ("int", "5", "process every Nth frame"),
    "budget.b_total": ("float", "800000.0", "total bitrate cap in bits/s"),
    "budget.b_video": ("float", "650000.0", "base video bitrate in bits/s"),
    "budget.b_roi": ("float", "150000.0", "ROI side-channel bitrate in bits/s"),
    "budget.window_s": ("float", "2.0", "rolling budget window length in s"),
    "policy.variant": ("str", "M5", "policy name (M0..M5 or preset_*)"),
    "policy.period_frames": ("int", "15", "M1 refresh period in frames"),
    "policy.conf_threshold": ("opt_float", "none", "M3 confidence gate"),
    "policy.area_threshold": ("opt_float", "none", "M4 area gate in px^2"),
    "policy.score_threshold": ("opt_float", "none", "M5 minimum score"),
    "policy.top_k": ("opt_int", "none", "per-frame selection cap override"),
    "policy.cooldown_frames": ("int", "30", "novelty-term cooldown in frames"),
    "policy.weights": ("weights", "0.5,0.3,0.2", "score weights w_u,w_s,w_n"),
    "tracker.iou_min": ("float", "0.3", "minimum IoU to extend a track"),
    "tracker.max_misses": ("int", "10", "processed-frame misses before retiring"),
    "tracker.use_hints": ("bool", "false", "trust annotation track ids"),
    "cost.header_bytes": ("int", "400", "fixed per-ROI container overhead"),
    "cost.bits_per_pixel": ("float", "0.55", "compressed still bits per pixel"),
    "cost.resize_edge": ("opt_float", "none", "model crops at this square edge"),
    "cost.pad_ratio": ("float", "0.15", "context padding per box side"),
    "eval.lambda_cls": ("opt_float", "none", "utility weight for semantic gain"),
    "eval.duration_s": ("opt_float", "none", "explicit evaluation duration in s"),
    "base_bitrate_measured": ("opt_float", "none", "measured base bitrate in bits/s"),
    "seed": ("int", "0", "run seed (synthetic inputs, noise injection)"),
}


def _parse_value(key: str, kind: str, text: str):
    text = text.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "str":
            return text
        if kind == "bool":
            low = text.lower()
            if low in ("true", "false"):
                return low == "true"
            raise ValueError(text)
        if kind == "opt_float":
            return None if text.lower() == "none" else float(text)
        if kind == "opt_int":
            return None if text.lower() == "none" else int(text)
        if kind == "weights":
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 3:
                raise ValueError(text)
            return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r} (expected {kind})") from None
    raise ConfigError(f"unknown schema kind {kind!r} for {key}")


def _format_value(kind: str, value) -> str:
    if value is None:
        return "none"
    if kind == "bool":
        return "true" if value else "false"
    if kind == "weights":
        return ",".join(repr(float(w)) for w in value)
    if kind in ("float", "opt_float"):
        return repr(float(value))
    return str(value)


def parse_kv_text(text: str) -> dict[str, str]:
    """Split a config document into raw key/value strings."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(line_no, f"expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ParseError(line_no, "empty key")
        if key in values:
            raise ParseError(line_no, f"duplicate key {key!r}")
        values[key] = value.strip()
    return values


def build_config(values: dict[str, str]) -> RunConfig:
    """Construct a RunConfig from raw strings, applying schema defaults."""
    unknown = sorted(set(values) - set(CONFIG_SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    parsed = {}
    for key, (kind, default, _) in CONFIG_SCHEMA.items():
        parsed[key] = _parse_value(key, kind, values.get(key, default))

    if parsed["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {parsed['schema_version']} (expected {SCHEMA_VERSION})"
        )

    return RunConfig(
        clock=FrameClock(
            fps=parsed["clock.fps"], frame_stride=parsed["clock.frame_stride"]
        ),
        budget=BudgetConfig(
            b_total=parsed["budget.b_total"],
            b_video=parsed["budget.b_video"],
            b_roi=parsed["budget.b_roi"],
            window_s=parsed["budget.window_s"],
        ),
        policy=PolicyConfig(
            variant=parsed["policy.variant"],
            period_frames=parsed["policy.period_frames"],
            conf_threshold=parsed["policy.conf_threshold"],
            area_threshold=parsed["policy.area_threshold"],
            score_threshold=parsed["policy.score_threshold"],
            top_k=parsed["policy.top_k"],
            cooldown_frames=parsed["policy.cooldown_frames"],
            weights=parsed["policy.weights"],
        ),
        tracker=TrackerConfig(
            iou_min=parsed["tracker.iou_min"],
            max_misses=parsed["tracker.max_misses"],
            use_hints=parsed["tracker.use_hints"],
        ),
        cost=CostModel(
            header_bytes=parsed["cost.header_bytes"],
            bits_per_pixel=parsed["cost.bits_per_pixel"],
            resize_edge=parsed["cost.resize_edge"],
            pad_ratio=parsed["cost.pad_ratio"],
        ),
        eval=EvalConfig(
            lambda_cls=parsed["eval.lambda_cls"],
            duration_s=parsed["eval.duration_s"],
        ),
        base_bitrate_measured=parsed["base_bitrate_measured"],
        seed=parsed["seed"],
    )


def load_config(text: str) -> RunConfig:
    return build_config(parse_kv_text(text))


def dump_config(cfg: RunConfig) -> dict[str, str]:
    """Canonical flat form of a RunConfig; load(dump(cfg)) == cfg."""
    raw = {
        "schema_version": SCHEMA_VERSION,
        "clock.fps": cfg.clock.fps,
        "clock.frame_stride": cfg.clock.frame_stride,
        "budget.b_total": cfg.budget.b_total,
        "budget.b_video": cfg.budget.b_video,
        "budget.b_roi": cfg.budget.b_roi,
        "budget.window_s": cfg.budget.window_s,
        "policy.variant": cfg.policy.variant,
        "policy.period_frames": cfg.policy.period_frames,
        "policy.conf_threshold": cfg.policy.conf_threshold,
        "policy.area_threshold": cfg.policy.area_threshold,
        "policy.score_threshold": cfg.policy.score_threshold,
        "policy.top_k": cfg.policy.top_k,
        "policy.cooldown_frames": cfg.policy.cooldown_frames,
        "policy.weights": cfg.policy.weights,
        "tracker.iou_min": cfg.tracker.iou_min,
        "tracker.max_misses": cfg.tracker.max_misses,
        "tracker.use_hints": cfg.tracker.use_hints,
        "cost.header_bytes": cfg.cost.header_bytes,
        "cost.bits_per_pixel": cfg.cost.bits_per_pixel,
        "cost.resize_edge": cfg.cost.resize_edge,
        "cost.pad_ratio": cfg.cost.pad_ratio,
        "eval.lambda_cls": cfg.eval.lambda_cls,
        "eval.duration_s": cfg.eval.duration_s,
        "base_bitrate_measured": cfg.base_bitrate_measured,
        "seed": cfg.seed,
    }
    return {
        key: _format_value(CONFIG_SCHEMA[key][0], raw[key]) for key in CONFIG_SCHEMA
    }


def config_to_text(cfg: RunConfig) -> str:
    """Render a RunConfig back to the file grammar (schema order)."""
    flat = dump_config(cfg)
    return "\n".join(f"{key} = {flat[key]}" for key in CONFIG_SCHEMA) + "\n"


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``key=value`` overrides on top of a config; unknown keys fail."""
    flat = dump_config(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"unknown config keys: {key}")
        flat[key] = value.strip()
    return build_config(flat)


def schema_help() -> str:
    """One line per config key, for --help output."""
    lines = []
    for key, (kind, default, help_text) in CONFIG_SCHEMA.items():
        lines.append(f"  {key} ({kind}, default {default}): {help_text}")
    return "\n".join(lines)
