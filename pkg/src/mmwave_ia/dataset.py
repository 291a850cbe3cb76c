"""RSS datasets: generation, beam subsets, splits and the binary file format.

Binary layout (version 1, little-endian, no padding)::

    offset  size  field
    0       4     magic b"MWDS"
    4       2     version (uint16)
    6       8     sample count R (uint64)
    14      2     beam count N (uint16)
    16      1     condition (uint8: 0 LoS, 1 NLoS)
    17      1     normalization (uint8: 0 global, 1 per_sample)
    18      8     path-loss exponent (float64)
    26      8     shadow std, dB (float64)
    34      8     carrier, Hz (float64)
    42      8     reference distance, m (float64)
    50      8     generation seed (uint64)
    58      8     normalization constant, mW (float64)
    66      8*3   train/val/test fractions (float64)
    90      8     split seed (uint64)
    98      4*R*N features, float32, row-major, clipped to [0, 1]
    ...     R     labels (uint8, 1..N)

Features are stored in single precision, so a reloaded dataset reproduces
the in-memory RSS only to float32 accuracy.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .antenna import BeamPattern
from .channel import LOS, NLOS, ChannelParams, LinkBudget, dbm_to_mw, mw_to_dbm, rss_matrix_dbm
from .scene import N_BEAMS, Scene

MAGIC = b"MWDS"
VERSION = 1
_HEADER = struct.Struct("<4sHQHBBddddQddddQ")
_CONDITIONS = (LOS, NLOS)
NORMALIZATIONS = ("global", "per_sample")
SUPPORTED_M = (2, 4, 6, 8, 12, 24)


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class BeamSubset:
    m: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = self.indices
        if len(idx) != self.m or len(set(idx)) != self.m:
            raise ValueError("indices must be m distinct beams")
        if any(not 1 <= i <= N_BEAMS for i in idx) or list(idx) != sorted(idx):
            raise ValueError("indices must be sorted and within 1..24")

    @property
    def columns(self) -> np.ndarray:
        return np.asarray(self.indices) - 1


def beam_subset(m: int) -> BeamSubset:
    """Evenly spaced beams ``1, 1 + 24/m, 1 + 2*24/m, ...``."""
    if m not in SUPPORTED_M:
        raise ValueError(f"unsupported subset size {m}; choose from {SUPPORTED_M}")
    stride = N_BEAMS // m
    return BeamSubset(m, tuple(range(1, N_BEAMS + 1, stride)))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.65
    val_frac: float = 0.15
    test_frac: float = 0.20
    seed: int = 0

    def __post_init__(self):
        fr = (self.train_frac, self.val_frac, self.test_frac)
        if any(f < 0 for f in fr) or not np.isclose(sum(fr), 1.0):
            raise ValueError("split fractions must be nonnegative and sum to 1")


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    perm = np.random.default_rng(spec.seed).permutation(n)
    n_train = int(round(n * spec.train_frac))
    n_val = int(round(n * spec.val_frac))
    n_val = min(n_val, n - n_train)
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


@dataclass
class Dataset:
    rss_dbm: np.ndarray  # [R x 24]
    labels: np.ndarray  # 1..24
    norm_max_linear: float  # mW
    channel: ChannelParams
    seed: int
    split_spec: SplitSpec = field(default_factory=SplitSpec)
    normalization: str = "global"

    def __len__(self):
        return len(self.labels)

    @property
    def rss_mw(self) -> np.ndarray:
        return dbm_to_mw(self.rss_dbm)

    @property
    def features(self) -> np.ndarray:
        """Linear RSS over the stored constant, clamped to 1 outside the training split."""
        return np.minimum(self.rss_mw / self.norm_max_linear, 1.0)

    def take(self, idx) -> Dataset:
        return replace(self, rss_dbm=self.rss_dbm[idx], labels=self.labels[idx])


def generate(scene: Scene, channel: ChannelParams, budget: LinkBudget = LinkBudget(),
             seed: int = 0, split_spec: SplitSpec = SplitSpec(),
             normalization: str = "global", pattern: BeamPattern | None = None) -> Dataset:
    """All-beam RSS for every receiver; normalized by the training-split maximum."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    rng = np.random.default_rng(seed)
    rss = rss_matrix_dbm(scene, channel, budget, rng, pattern)
    train_idx, _, _ = split_indices(len(scene), split_spec)
    rows = train_idx if len(train_idx) else np.arange(len(scene))
    norm = float(dbm_to_mw(rss[rows].max()))
    return Dataset(rss, np.asarray(scene.labels, dtype=np.int64), norm, channel, int(seed),
                   split_spec, normalization)


def split(ds: Dataset, spec: SplitSpec | None = None) -> tuple[Dataset, Dataset, Dataset]:
    spec = spec or ds.split_spec
    return tuple(ds.take(idx) for idx in split_indices(len(ds), spec))


def normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / x.max(axis=1, keepdims=True)


def select_features(ds: Dataset, subset: BeamSubset) -> np.ndarray:
    """Network inputs for the swept beams, in subset order."""
    x = ds.features[:, subset.columns]
    if ds.normalization == "per_sample":
        x = normalize_rows(x)
    return x


def save(ds: Dataset, path) -> None:
    spec = ds.split_spec
    ch = ds.channel
    header = _HEADER.pack(MAGIC, VERSION, len(ds), ds.rss_dbm.shape[1],
                          _CONDITIONS.index(ch.condition), NORMALIZATIONS.index(ds.normalization),
                          ch.ple, ch.shadow_sigma_db, ch.carrier_hz, ch.ref_distance_m,
                          ds.seed, ds.norm_max_linear,
                          spec.train_frac, spec.val_frac, spec.test_frac, spec.seed)
    with open(path, "wb") as f:
        f.write(header)
        f.write(ds.features.astype("<f4").tobytes())
        f.write(ds.labels.astype(np.uint8).tobytes())


def load(path) -> Dataset:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise DatasetFormatError("file shorter than header")
    (magic, version, n, n_beams, cond, norm_mode, ple, sigma, carrier, d0, seed, norm,
     f_tr, f_va, f_te, split_seed) = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}")
    expected = _HEADER.size + 4 * n * n_beams + n
    if len(blob) != expected:
        raise DatasetFormatError(f"expected {expected} bytes, found {len(blob)}")
    off = _HEADER.size
    feats = np.frombuffer(blob, "<f4", n * n_beams, off).reshape(n, n_beams).astype(np.float64)
    labels = np.frombuffer(blob, np.uint8, n, off + 4 * n * n_beams).astype(np.int64)
    channel = ChannelParams(_CONDITIONS[cond], ple, sigma, carrier, d0)
    return Dataset(mw_to_dbm(feats * norm), labels, norm, channel, seed,
                   SplitSpec(f_tr, f_va, f_te, split_seed), NORMALIZATIONS[norm_mode])


def export_text(ds: Dataset, path, limit: int | None = None) -> None:
    """CSV with one row per receiver: index, RSS per beam (dBm), true beam."""
    n = len(ds) if limit is None else min(limit, len(ds))
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["receiver"] + [f"beam_{i}" for i in range(1, ds.rss_dbm.shape[1] + 1)]
                   + ["true_beam"])
        for k in range(n):
            w.writerow([k + 1] + [f"{v:.3f}" for v in ds.rss_dbm[k]] + [int(ds.labels[k])])
