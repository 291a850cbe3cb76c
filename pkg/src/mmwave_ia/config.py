"""JSON run configuration.

Every key is optional; an empty object ``{}`` gives the default desk-scale
setting. Unknown keys are rejected. Schema (defaults shown)::

    {
      "sample_count": 100000,
      "conditions": ["LoS", "NLoS"],
      "m_values": [2, 4, 6, 8, 12, 24],
      "master_seed": 0,
      "half_side": 25.0,
      "exclusion_radius": 1.0,
      "carrier_hz": 28e9,
      "ref_distance_m": 1.0,
      "channel_overrides": {"NLoS": {"ple": 4.5, "shadow_sigma_db": 10.0}},
      "normalization": "global",              # or "per_sample"
      "array": {"elements_x": 10, "elements_y": 10, "element_spacing": 0.5,
                "boresight_elevation": 90.0, "backlobe_penalty_db": 10.0,
                "backlobe_region": "rear", "resolution_deg": 0.01},
      "budget": {"tx_power_dbm": 20.0, "tx_gain_dbi": 0.0, "rx_gain_dbi": 0.0},
      "split": {"train": 0.65, "val": 0.15, "test": 0.2},
      "train": {"learning_rate": 0.001, "batch_size": 1024,
                "epochs": {"2": 35, "4": 55, "6": 65, "8": 70, "12": 75, "24": 90},
                "adam_beta1": 0.9, "adam_beta2": 0.999, "adam_eps": 1e-8,
                "bn_momentum": 0.1, "bn_eps": 1e-5, "bn_position": "post",
                "bn_recalibrate": true, "dtype": "float64"},
      "timing": {"slot_per_beam_ms": 0.078125, "comparator_count": 1,
                 "comparator_period_us": 0.01, "dnn_latency_us": 6.9}
    }

Overrides use dotted paths with JSON values, e.g. ``train.dtype="float32"``
or ``channel_overrides.NLoS.shadow_sigma_db=8``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .experiment import PAPER_SAMPLES, ConfigError, ExperimentConfig, config_from_dict


def parse_override(text: str) -> tuple[list[str], object]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key.path=value")
    key, raw = text.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings such as LoS
    return path, value


def apply_override(d: dict, path: list[str], value) -> None:
    node = d
    for p in path[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into non-object at {p!r}")
    node[path[-1]] = value


def load_config(path=None, overrides=(), seed: int | None = None,
                paper_scale: bool = False) -> ExperimentConfig:
    """Read a JSON config (or start from defaults), then apply overrides.

    Everything is validated here, before any work starts.
    """
    d: dict = {}
    if path is not None:
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a JSON object")
    for text in overrides:
        apply_override(d, *parse_override(text))
    if paper_scale:
        d["sample_count"] = PAPER_SAMPLES
    if seed is not None:
        d["master_seed"] = seed
    return config_from_dict(d)
