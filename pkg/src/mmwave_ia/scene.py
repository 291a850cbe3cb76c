"""Receiver topologies around a transmitter at the origin.

Angles are measured counterclockwise from the +x axis in degrees. The same
convention is used by :mod:`mmwave_ia.antenna`, so labels and beam gains stay
consistent with each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_BEAMS = 24
SECTOR_DEG = 15
SECTOR_OFFSET_DEG = 8


@dataclass(frozen=True)
class SceneConfig:
    receiver_count: int
    half_side: float = 25.0
    exclusion_radius: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.receiver_count < 1:
            raise ValueError(f"receiver_count must be >= 1, got {self.receiver_count}")
        if not 0 <= self.exclusion_radius < self.half_side:
            raise ValueError("need 0 <= exclusion_radius < half_side")


@dataclass(frozen=True)
class Receiver:
    x: float
    y: float
    distance: float
    azimuth: float  # continuous, degrees in [0, 360)
    azimuth_int: int


@dataclass
class Scene:
    """Columnar receiver set. Row ``k`` is receiver ``k``."""

    x: np.ndarray
    y: np.ndarray
    distance: np.ndarray
    azimuth: np.ndarray
    azimuth_int: np.ndarray
    labels: np.ndarray
    config: SceneConfig | None = None

    def __len__(self):
        return len(self.x)

    def __getitem__(self, k) -> Receiver:
        return Receiver(float(self.x[k]), float(self.y[k]), float(self.distance[k]),
                        float(self.azimuth[k]), int(self.azimuth_int[k]))

    def receivers(self) -> list[Receiver]:
        return [self[k] for k in range(len(self))]

    @classmethod
    def from_xy(cls, x, y, n_beams: int = N_BEAMS, config: SceneConfig | None = None) -> Scene:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        az = azimuth_deg(x, y)
        az_int = np.floor(az).astype(np.int64)
        return cls(x, y, np.hypot(x, y), az, az_int, true_beam(az_int, n_beams), config)


def sample_positions(cfg: SceneConfig) -> tuple[np.ndarray, np.ndarray]:
    """Uniform points on the square ``[-half_side, half_side]^2`` outside the exclusion disk."""
    rng = np.random.default_rng(cfg.seed)
    xs, ys = [], []
    need = cfg.receiver_count
    while need > 0:
        # oversample a little so one pass almost always suffices
        batch = int(need * 1.01) + 16
        pts = rng.uniform(-cfg.half_side, cfg.half_side, size=(batch, 2))
        keep = pts[np.hypot(pts[:, 0], pts[:, 1]) >= cfg.exclusion_radius][:need]
        xs.append(keep[:, 0])
        ys.append(keep[:, 1])
        need -= len(keep)
    return np.concatenate(xs), np.concatenate(ys)


def sample_scene(cfg: SceneConfig, n_beams: int = N_BEAMS) -> Scene:
    x, y = sample_positions(cfg)
    return Scene.from_xy(x, y, n_beams, cfg)


def sample_receivers(cfg: SceneConfig) -> list[Receiver]:
    return sample_scene(cfg).receivers()


def azimuth_deg(x, y):
    """Counterclockwise angle from +x in ``[0, 360)``; vectorized."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any((x == 0) & (y == 0)):
        raise ValueError("azimuth undefined at the origin")
    az = np.mod(np.degrees(np.arctan2(y, x)), 360.0)
    # tiny negative angles can round up to exactly 360.0
    return np.where(az >= 360.0, 0.0, az)


def azimuth_int(x: float, y: float) -> int:
    return int(math.floor(azimuth_deg(x, y)))


def true_beam(azimuth_int, n_beams: int = N_BEAMS):
    """Map floored azimuth(s) to the 1-based sector label.

    Integer angles in ``(-8, 7]`` go to beam 1, ``(7, 22]`` to beam 2 and so on;
    ``ceil((a + 8) / 15)`` overflows to 25 for ``a >= 353``, which wraps to 1.
    Works on scalars and arrays.
    """
    if n_beams != N_BEAMS:
        raise ValueError(f"only {N_BEAMS} beams are supported, got {n_beams}")
    a = np.asarray(azimuth_int)
    if not np.issubdtype(a.dtype, np.integer):
        if np.any(a != np.floor(a)):
            raise ValueError("azimuth_int must be integral")
        a = a.astype(np.int64)
    if np.any((a < 0) | (a > 359)):
        raise ValueError("azimuth_int must lie in [0, 359]")
    # integer ceil division
    idx = -((-(a + SECTOR_OFFSET_DEG)) // SECTOR_DEG)
    idx = np.where(idx > n_beams, 1, idx)
    return int(idx) if idx.ndim == 0 else idx.astype(np.int64)


def boresight_deg(beam_index: int) -> float:
    return float(SECTOR_DEG * (beam_index - 1))


SCENE_HEADER = "# x_m y_m distance_m azimuth_int label"


def save_scene(scene: Scene, path) -> None:
    """Write one receiver per row, whitespace separated, with a header line."""
    table = np.column_stack([scene.x, scene.y, scene.distance,
                             scene.azimuth_int, scene.labels])
    np.savetxt(Path(path), table, fmt=["%.9f", "%.9f", "%.9f", "%d", "%d"],
               header=SCENE_HEADER[2:], comments="# ")


def load_scene(path) -> Scene:
    table = np.loadtxt(Path(path), ndmin=2)
    return Scene.from_xy(table[:, 0], table[:, 1])
