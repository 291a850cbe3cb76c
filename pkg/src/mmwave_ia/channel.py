"""Close-in (CI) path loss with log-normal shadowing and per-beam RSS synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import BeamPattern, default_pattern
from .scene import Receiver, Scene

SPEED_OF_LIGHT = 299_792_458.0

LOS = "LoS"
NLOS = "NLoS"

# (path-loss exponent, shadow std in dB)
CONDITION_DEFAULTS = {LOS: (1.9, 1.1), NLOS: (4.5, 10.0)}


@dataclass(frozen=True)
class ChannelParams:
    condition: str = LOS
    ple: float = 1.9
    shadow_sigma_db: float = 1.1
    carrier_hz: float = 28e9
    ref_distance_m: float = 1.0

    def __post_init__(self):
        if self.condition not in CONDITION_DEFAULTS:
            raise ValueError(f"condition must be one of {list(CONDITION_DEFAULTS)}")
        if not self.ple > 0:
            raise ValueError("ple must be positive")
        if not self.shadow_sigma_db >= 0:
            raise ValueError("shadow_sigma_db must be >= 0")
        if not self.carrier_hz > 0:
            raise ValueError("carrier_hz must be positive")
        if not self.ref_distance_m > 0:
            raise ValueError("ref_distance_m must be positive")

    @classmethod
    def for_condition(cls, condition: str, **overrides) -> ChannelParams:
        ple, sigma = CONDITION_DEFAULTS[condition]
        kw = dict(condition=condition, ple=ple, shadow_sigma_db=sigma)
        kw.update(overrides)
        return cls(**kw)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float = 20.0
    tx_gain_dbi: float = 0.0  # absolute array gain added to the normalized pattern
    rx_gain_dbi: float = 0.0  # omnidirectional receiver

    def __post_init__(self):
        for v in (self.tx_power_dbm, self.tx_gain_dbi, self.rx_gain_dbi):
            if not math.isfinite(v):
                raise ValueError("link budget terms must be finite")


def reference_path_loss_db(params: ChannelParams) -> float:
    """Free-space loss at the reference distance, ``20 log10(4 pi d0 / lambda)``."""
    return 20.0 * math.log10(4.0 * math.pi * params.ref_distance_m / params.wavelength_m)


def path_loss_db(d, params: ChannelParams, shadow_db=0.0):
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < params.ref_distance_m):
        raise ValueError(f"distance below reference distance {params.ref_distance_m} m")
    pl = (reference_path_loss_db(params)
          + 10.0 * params.ple * np.log10(d / params.ref_distance_m)
          + shadow_db)
    return float(pl) if np.ndim(pl) == 0 else pl


def draw_shadowing(rng: np.random.Generator, params: ChannelParams, shape) -> np.ndarray:
    """Independent zero-mean Gaussian shadow terms (dB), one per measurement."""
    if params.shadow_sigma_db == 0:
        return np.zeros(shape)
    return rng.normal(0.0, params.shadow_sigma_db, size=shape)


def rss_dbm(receiver: Receiver, beam_index: int, params: ChannelParams,
            budget: LinkBudget = LinkBudget(), rng: np.random.Generator | None = None,
            pattern: BeamPattern | None = None) -> float:
    """RSS of one (receiver, beam) measurement with a fresh shadow draw."""
    pattern = pattern or default_pattern()
    shadow = 0.0
    if params.shadow_sigma_db > 0:
        if rng is None:
            raise ValueError("rng required when shadowing is enabled")
        shadow = float(rng.normal(0.0, params.shadow_sigma_db))
    gain = float(pattern.beam_gain_db(beam_index, receiver.azimuth))
    return (budget.tx_power_dbm + budget.tx_gain_dbi + gain + budget.rx_gain_dbi
            - path_loss_db(receiver.distance, params, shadow))


def rss_matrix_dbm(scene: Scene, params: ChannelParams, budget: LinkBudget = LinkBudget(),
                   rng: np.random.Generator | None = None,
                   pattern: BeamPattern | None = None) -> np.ndarray:
    """RSS [receivers x beams] in dBm, shadowing i.i.d. per entry.

    Shadow draws are consumed row-major (receiver, then beam).
    """
    pattern = pattern or default_pattern()
    gains = pattern.gain_matrix(scene.azimuth)
    shadow = 0.0
    if params.shadow_sigma_db > 0:
        if rng is None:
            raise ValueError("rng required when shadowing is enabled")
        shadow = draw_shadowing(rng, params, gains.shape)
    pl = path_loss_db(scene.distance, params)[:, None] + shadow
    return budget.tx_power_dbm + budget.tx_gain_dbi + gains + budget.rx_gain_dbi - pl


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=np.float64) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=np.float64))
