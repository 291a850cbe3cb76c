"""Transmitter beam patterns.

The front pattern is the azimuth cut (theta = 90 deg) of a uniform planar
array lying in the x-y plane and steered to (theta0 = 90 deg, phi0 = 0),
i.e. the textbook product of two uniform linear array factors::

    psi_x = k dx (cos(phi) - 1),    psi_y = k dy sin(phi)
    AF    = |sin(Mx psi_x / 2) / (Mx sin(psi_x / 2))| * |sin(My psi_y / 2) / (My sin(psi_y / 2))|

With half-wavelength spacing the steered end-fire factor has a full grating
lobe at phi = 180 deg, so the raw cut has a back lobe as strong as the main
lobe. A fixed backlobe penalty is then subtracted over a region of relative
offsets, and every beam reuses the same pattern rotated to its boresight.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .scene import N_BEAMS, boresight_deg

FLOOR_DB = -100.0

# Offsets (deg, relative to boresight) that receive the backlobe penalty.
# "rear": open interval (90, 270), the half-plane behind the array.
# "lower": open interval (180, 360), i.e. clockwise of boresight.
BACKLOBE_REGIONS = {"rear": (90.0, 270.0), "lower": (180.0, 360.0)}


@dataclass(frozen=True)
class ArrayConfig:
    elements_x: int = 10
    elements_y: int = 10
    element_spacing: float = 0.5  # wavelengths
    boresight_elevation: float = 90.0
    backlobe_penalty_db: float = 10.0
    backlobe_region: str = "rear"
    resolution_deg: float = 0.01

    def __post_init__(self):
        if self.elements_x < 1 or self.elements_y < 1:
            raise ValueError("element counts must be >= 1")
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")
        if self.backlobe_penalty_db < 0:
            raise ValueError("backlobe_penalty_db must be >= 0")
        if self.backlobe_region not in BACKLOBE_REGIONS:
            raise ValueError(f"backlobe_region must be one of {sorted(BACKLOBE_REGIONS)}")
        if not 0 < self.resolution_deg <= 1 or not np.isclose(360 / self.resolution_deg,
                                                              round(360 / self.resolution_deg)):
            raise ValueError("resolution_deg must divide 360")


def _ula_factor(psi, n):
    """|sin(n psi/2) / (n sin(psi/2))| with the removable singularities set to 1."""
    psi = np.asarray(psi, dtype=np.float64)
    half = psi / 2.0
    den = n * np.sin(half)
    singular = np.abs(np.sin(half)) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(singular, 1.0, np.sin(n * half) / np.where(singular, 1.0, den))
    return np.abs(out)


def array_factor(offset_deg, cfg: ArrayConfig = ArrayConfig()):
    """Normalized linear magnitude of the azimuth cut, peak 1 at offset 0."""
    phi = np.radians(np.mod(np.asarray(offset_deg, dtype=np.float64), 360.0))
    theta = np.radians(cfg.boresight_elevation)
    kd = 2.0 * np.pi * cfg.element_spacing
    # steering phases for (theta0, phi0) = (boresight_elevation, 0)
    beta_x = -kd * np.sin(theta)
    psi_x = kd * np.sin(theta) * np.cos(phi) + beta_x
    psi_y = kd * np.sin(theta) * np.sin(phi)
    return _ula_factor(psi_x, cfg.elements_x) * _ula_factor(psi_y, cfg.elements_y)


def array_factor_db(offset_deg, cfg: ArrayConfig = ArrayConfig()):
    af = array_factor(offset_deg, cfg)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(af)
    return np.maximum(db, FLOOR_DB)


def in_backlobe(offset_deg, region: str = "rear"):
    lo, hi = BACKLOBE_REGIONS[region]
    o = np.mod(np.asarray(offset_deg, dtype=np.float64), 360.0)
    return (o > lo) & (o < hi)


def pattern_db(offset_deg, cfg: ArrayConfig = ArrayConfig()):
    """Exact (untabulated) beam pattern: array factor plus backlobe penalty."""
    g = array_factor_db(offset_deg, cfg)
    return g - cfg.backlobe_penalty_db * in_backlobe(offset_deg, cfg.backlobe_region)


def half_power_beamwidth(cfg: ArrayConfig = ArrayConfig()) -> float:
    """Width between the -3 dB crossings of the main lobe, found by bisection."""
    target = 10 ** (-3 / 20)

    def f(o):
        return float(array_factor(o, cfg)) - target

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        hi *= 2
        if hi > 180:
            raise RuntimeError("no -3 dB crossing in the front half")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) > 0 else (lo, mid)
    # array_factor is even in the offset, so the width is twice the crossing
    return lo + hi


class BeamPattern:
    """Tabulated pattern shared by all beams, sampled every ``resolution_deg``.

    Lookups use the nearest table sample. The table is read-only once built.
    """

    def __init__(self, cfg: ArrayConfig = ArrayConfig(), n_beams: int = N_BEAMS):
        if n_beams != N_BEAMS:
            raise ValueError(f"only {N_BEAMS} beams are supported")
        self.cfg = cfg
        self.n_beams = n_beams
        self.size = int(round(360.0 / cfg.resolution_deg))
        self.offsets = np.arange(self.size) * cfg.resolution_deg
        self.gain_db = pattern_db(self.offsets, cfg)
        self.gain_db.setflags(write=False)

    @cached_property
    def boresights(self) -> np.ndarray:
        return np.array([boresight_deg(i) for i in range(1, self.n_beams + 1)])

    def lookup(self, offset_deg):
        idx = np.rint(np.mod(np.asarray(offset_deg, dtype=np.float64), 360.0)
                      / self.cfg.resolution_deg).astype(np.int64) % self.size
        return self.gain_db[idx]

    def _check(self, beam_index):
        b = np.asarray(beam_index)
        if np.any((b < 1) | (b > self.n_beams)):
            raise ValueError(f"beam index must be in [1, {self.n_beams}]")

    def beam_gain_db(self, beam_index, azimuth_deg):
        self._check(beam_index)
        bore = self.boresights[np.asarray(beam_index) - 1]
        return self.lookup(np.asarray(azimuth_deg) - bore)

    def gain_matrix(self, azimuth_deg, beams=None):
        """Gains [receivers x beams] for continuous azimuths."""
        beams = np.arange(1, self.n_beams + 1) if beams is None else np.asarray(beams)
        self._check(beams)
        az = np.asarray(azimuth_deg, dtype=np.float64)
        return self.lookup(az[:, None] - self.boresights[beams - 1][None, :])

    def export(self, path) -> None:
        """Two-column text: offset_deg gain_db."""
        np.savetxt(Path(path), np.column_stack([self.offsets, self.gain_db]),
                   fmt=["%.2f", "%.6f"], header="offset_deg gain_db")


_default_patterns: dict[ArrayConfig, BeamPattern] = {}


def default_pattern(cfg: ArrayConfig = ArrayConfig()) -> BeamPattern:
    if cfg not in _default_patterns:
        _default_patterns[cfg] = BeamPattern(cfg)
    return _default_patterns[cfg]


def beam_gain_db(beam_index, azimuth_deg, cfg: ArrayConfig = ArrayConfig()):
    return default_pattern(cfg).beam_gain_db(beam_index, azimuth_deg)
