"""Initial-access time budget: sweep time, prediction time, coherence time."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import SPEED_OF_LIGHT

# Cited hardware figures for the network on an FPGA; not measured here.
CITED_DNN_LATENCY_US = 6.9
CITED_DNN_POWER_W = 1.03
# Quoted sweep time for 8 beams; the linear model gives 0.625 ms.
QUOTED_SWEEP_8_BEAMS_MS = 0.675


@dataclass(frozen=True)
class TimingConfig:
    slot_per_beam_ms: float = 5.0 / 64  # 64 SSB beams in 5 ms
    comparator_count: int = 1
    comparator_period_us: float = 0.01
    dnn_latency_us: float = CITED_DNN_LATENCY_US

    def __post_init__(self):
        if min(self.slot_per_beam_ms, self.comparator_period_us, self.dnn_latency_us) <= 0:
            raise ValueError("timing values must be positive")
        if self.comparator_count < 1:
            raise ValueError("comparator_count must be >= 1")


def sweep_time_ms(m: int, cfg: TimingConfig = TimingConfig()) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return m * cfg.slot_per_beam_ms


def cbs_prediction_time_us(m: int, cfg: TimingConfig = TimingConfig()) -> float:
    """Time to take the max over ``m`` RSS values with one or two comparators."""
    if m < 1:
        raise ValueError("m must be >= 1")
    T = cfg.comparator_period_us
    if cfg.comparator_count == 1:
        return m * T
    if cfg.comparator_count == 2:
        return (math.ceil(m / 2) + 1) * T
    raise ValueError(f"only 1 or 2 comparators are modeled, got {cfg.comparator_count}")


def doppler_spread_hz(carrier_hz: float, speed_mps: float) -> float:
    return carrier_hz * speed_mps / SPEED_OF_LIGHT


def coherence_time_ms(carrier_hz: float, speed_mps: float) -> float:
    """``1 / D_S`` in milliseconds, with ``D_S = f_c v / c``."""
    if carrier_hz <= 0 or speed_mps <= 0:
        raise ValueError("carrier and speed must be positive")
    return 1e3 / doppler_spread_hz(carrier_hz, speed_mps)


def timing_table(m_values, cfg: TimingConfig = TimingConfig()) -> list[dict]:
    rows = []
    for m in m_values:
        rows.append({
            "m": m,
            "sweep_time_ms": sweep_time_ms(m, cfg),
            "cbs_prediction_us": cbs_prediction_time_us(m, cfg),
            "dnn_prediction_us_cited": cfg.dnn_latency_us,
        })
    return rows


def timing_report(m_values, carrier_hz: float = 28e9, speeds_mps=(1.4, 25.0),
                  cfg: TimingConfig = TimingConfig()) -> str:
    """Plain-text budget: per-m sweep and prediction times plus coherence times."""
    lines = ["m,sweep_time_ms,cbs_prediction_us,dnn_prediction_us_cited"]
    for r in timing_table(m_values, cfg):
        lines.append(f"{r['m']},{r['sweep_time_ms']:.6g},{r['cbs_prediction_us']:.6g},"
                     f"{r['dnn_prediction_us_cited']:.6g}")
    lines.append("")
    lines.append("speed_mps,carrier_hz,coherence_time_ms")
    for v in speeds_mps:
        lines.append(f"{v:g},{carrier_hz:g},{coherence_time_ms(carrier_hz, v):.6g}")
    lines.append("")
    lines.append(f"# comparators={cfg.comparator_count} T={cfg.comparator_period_us:g}us; "
                 f"DNN latency {cfg.dnn_latency_us:g} us and {CITED_DNN_POWER_W:g} W are cited "
                 "FPGA figures, not measurements")
    if 8 in list(m_values):
        lines.append(f"# sweep for 8 beams: linear model {sweep_time_ms(8, cfg):g} ms; "
                     f"the quoted figure {QUOTED_SWEEP_8_BEAMS_MS:g} ms does not fit the model")
    return "\n".join(lines) + "\n"
