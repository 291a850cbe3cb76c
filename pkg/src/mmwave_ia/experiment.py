"""End-to-end sweep: accuracy of the learned predictor and of the conventional
sweep for every (channel condition, swept-beam count) pair, plus the timing
budget.

Randomness is derived from a single master seed through labeled substreams
(see :mod:`mmwave_ia.seeding`). The same receiver layout is shared by both
channel conditions, and one dataset per condition serves every ``m``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, dataset, ia, nn, scene, timing
from .antenna import ArrayConfig, BeamPattern
from .channel import CONDITION_DEFAULTS, LOS, NLOS, ChannelParams, LinkBudget
from .seeding import derive_seed

log = logging.getLogger(__name__)

DESK_SAMPLES = 100_000
PAPER_SAMPLES = 1_000_000


class ExperimentError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    sample_count: int = DESK_SAMPLES
    conditions: tuple[str, ...] = (LOS, NLOS)
    m_values: tuple[int, ...] = dataset.SUPPORTED_M
    master_seed: int = 0
    half_side: float = 25.0
    exclusion_radius: float = 1.0
    carrier_hz: float = 28e9
    ref_distance_m: float = 1.0
    # condition -> {"ple": ..., "shadow_sigma_db": ...}; missing keys use the defaults
    channel_overrides: dict = field(default_factory=dict)
    normalization: str = "global"
    array: ArrayConfig = ArrayConfig()
    budget: LinkBudget = LinkBudget()
    split: dataset.SplitSpec = dataset.SplitSpec()
    train: nn.TrainConfig = nn.TrainConfig()
    timing: timing.TimingConfig = timing.TimingConfig()

    def __post_init__(self):
        if self.sample_count < 10:
            raise ConfigError("sample_count must be >= 10")
        if not self.conditions or any(c not in CONDITION_DEFAULTS for c in self.conditions):
            raise ConfigError(f"conditions must be a nonempty subset of {list(CONDITION_DEFAULTS)}")
        if not self.m_values or any(m not in dataset.SUPPORTED_M for m in self.m_values):
            raise ConfigError(f"m_values must be a nonempty subset of {dataset.SUPPORTED_M}")
        if any(m not in self.train.epochs for m in self.m_values):
            raise ConfigError("every m needs an epoch count")
        if self.normalization not in dataset.NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {dataset.NORMALIZATIONS}")
        for cond in self.conditions:
            self.channel(cond)  # validates overrides

    def channel(self, condition: str) -> ChannelParams:
        over = dict(self.channel_overrides.get(condition, {}))
        try:
            return ChannelParams.for_condition(condition, carrier_hz=self.carrier_hz,
                                               ref_distance_m=self.ref_distance_m, **over)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad channel settings for {condition}: {e}") from e

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conditions"] = list(self.conditions)
        d["m_values"] = list(self.m_values)
        d["train"]["epochs"] = {str(k): v for k, v in self.train.epochs.items()}
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


_NESTED = {"array": ArrayConfig, "budget": LinkBudget, "split": dataset.SplitSpec,
           "train": nn.TrainConfig, "timing": timing.TimingConfig}


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build a config from plain data, rejecting unknown keys."""
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    for key, value in d.items():
        if key in _NESTED:
            cls = _NESTED[key]
            sub_known = {f.name for f in fields(cls)}
            bad = set(value) - sub_known
            if bad:
                raise ConfigError(f"unknown keys in {key!r}: {sorted(bad)}")
            value = dict(value)
            if key == "train" and "epochs" in value:
                value["epochs"] = {int(k): int(v) for k, v in value["epochs"].items()}
            try:
                kw[key] = cls(**value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"invalid {key!r} settings: {e}") from e
        elif key in ("conditions", "m_values"):
            kw[key] = tuple(value)
        else:
            kw[key] = value
    try:
        return ExperimentConfig(**kw)
    except TypeError as e:
        raise ConfigError(str(e)) from e


@dataclass
class ExperimentReport:
    rows: list  # dicts: condition, m, method, accuracy_pct, train_epochs, sweep_time_ms, ...
    histories: dict  # "LoS/m=6" -> {"train_loss": [...], "val_loss": [...], "val_acc": [...]}
    timing: list
    provenance: dict
    wall_time_s: dict = field(default_factory=dict)

    def accuracy(self, condition: str, m: int, method: str) -> float:
        for r in self.rows:
            if (r["condition"], r["m"], r["method"]) == (condition, m, method):
                return r["accuracy_pct"]
        raise KeyError((condition, m, method))

    def row(self, condition: str, m: int, method: str) -> dict:
        for r in self.rows:
            if (r["condition"], r["m"], r["method"]) == (condition, m, method):
                return r
        raise KeyError((condition, m, method))

    def content_hash(self) -> str:
        """Hash of everything except wall-clock timings."""
        blob = json.dumps({"rows": self.rows, "histories": self.histories,
                           "timing": self.timing, "provenance": self.provenance},
                          sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_json(self) -> dict:
        return {"rows": self.rows, "histories": self.histories, "timing": self.timing,
                "provenance": self.provenance, "wall_time_s": self.wall_time_s,
                "report_hash": self.content_hash()}

    @classmethod
    def from_json(cls, d: dict) -> ExperimentReport:
        return cls(d["rows"], d["histories"], d["timing"], d["provenance"], d.get("wall_time_s", {}))

    def save(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))
        with open(out / "report.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(REPORT_COLUMNS)
            for r in self.rows:
                w.writerow([r[c] for c in REPORT_COLUMNS])
        self.write_curves(out / "curves.csv")
        with open(out / "timing.csv", "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(self.timing[0]))
            w.writeheader()
            w.writerows(self.timing)
        hist_dir = out / "histories"
        hist_dir.mkdir(exist_ok=True)
        for key, h in self.histories.items():
            th = nn.TrainHistory(h["train_loss"], h["val_loss"], h["val_acc"])
            th.to_csv(hist_dir / (key.replace("/", "_").replace("=", "") + ".csv"))

    def write_curves(self, path) -> None:
        """One row per m, one accuracy column per (condition, method)."""
        series = sorted({(r["condition"], r["method"]) for r in self.rows})
        ms = sorted({r["m"] for r in self.rows})
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["m"] + [f"{c}_{meth}" for c, meth in series])
            for m in ms:
                vals = []
                for c, meth in series:
                    try:
                        vals.append(f"{self.accuracy(c, m, meth):.4f}")
                    except KeyError:
                        vals.append("")
                w.writerow([m] + vals)


REPORT_COLUMNS = ["condition", "m", "method", "accuracy_pct", "train_epochs", "sweep_time_ms"]


def run_seeds(cfg: ExperimentConfig) -> dict:
    s = cfg.master_seed
    seeds = {"scene": derive_seed(s, "scene"), "split": derive_seed(s, "split")}
    for cond in cfg.conditions:
        seeds[f"shadow/{cond}"] = derive_seed(s, "shadow", cond)
        for m in cfg.m_values:
            seeds[f"init/{cond}/m={m}"] = derive_seed(s, "init", cond, m)
            seeds[f"shuffle/{cond}/m={m}"] = derive_seed(s, "shuffle", cond, m)
    return seeds


def build_dataset(cfg: ExperimentConfig, condition: str, scn: scene.Scene | None = None,
                  pattern: BeamPattern | None = None) -> dataset.Dataset:
    seeds = run_seeds(cfg)
    if scn is None:
        scn = scene.sample_scene(scene.SceneConfig(cfg.sample_count, cfg.half_side,
                                                   cfg.exclusion_radius, seeds["scene"]))
    pattern = pattern or BeamPattern(cfg.array)
    split_spec = replace(cfg.split, seed=seeds["split"])
    return dataset.generate(scn, cfg.channel(condition), cfg.budget, seeds[f"shadow/{condition}"],
                            split_spec, cfg.normalization, pattern)


def evaluate_cell(model: nn.ModelState, test: dataset.Dataset, subset: dataset.BeamSubset):
    """Paired predictions on identical test RSS rows. Returns (deep, cbs) label arrays."""
    rss = test.rss_dbm[:, subset.columns]
    deep = ia.deepia_predict(model, rss, subset)
    cbs = ia.cbs_predict(rss, subset)
    return np.atleast_1d(deep), np.atleast_1d(cbs)


def run(cfg: ExperimentConfig, out_dir=None, save_models: bool = False) -> ExperimentReport:
    seeds = run_seeds(cfg)
    pattern = BeamPattern(cfg.array)
    scn = scene.sample_scene(scene.SceneConfig(cfg.sample_count, cfg.half_side,
                                               cfg.exclusion_radius, seeds["scene"]))
    rows, histories, walls = [], {}, {}
    for cond in cfg.conditions:
        ds = build_dataset(cfg, cond, scn, pattern)
        train_ds, val_ds, test_ds = dataset.split(ds)
        for m in cfg.m_values:
            key = f"{cond}/m={m}"
            subset = dataset.beam_subset(m)
            tcfg = replace(cfg.train, seed=seeds[f"shuffle/{key}"])
            t0 = time.perf_counter()
            try:
                model, hist = nn.train((train_ds, val_ds, test_ds), subset, tcfg,
                                       init_seed=seeds[f"init/{key}"])
                deep, cbs = evaluate_cell(model, test_ds, subset)
            except Exception as e:
                raise ExperimentError(f"{cond} m={m}: {e}") from e
            walls[key] = time.perf_counter() - t0
            in_subset = 100.0 * float(np.mean(np.isin(test_ds.labels, subset.indices)))
            common = {"condition": cond, "m": m, "train_epochs": len(hist),
                      "sweep_time_ms": timing.sweep_time_ms(m, cfg.timing),
                      "test_samples": len(test_ds), "true_in_subset_pct": in_subset}
            deep_acc = ia.accuracy_from_arrays(deep, test_ds.labels)
            cbs_acc = ia.accuracy_from_arrays(cbs, test_ds.labels)
            rows.append({**common, "method": ia.DEEPIA, "accuracy_pct": deep_acc,
                         "outside_subset_pct": 100.0 * float(np.mean(~np.isin(deep, subset.indices)))})
            rows.append({**common, "method": ia.CBS, "accuracy_pct": cbs_acc,
                         "outside_subset_pct": 0.0})
            histories[key] = {"train_loss": hist.train_loss, "val_loss": hist.val_loss,
                              "val_acc": hist.val_acc}
            log.info("%s: DeepIA %.2f%%  CBS %.2f%%  (%.0f s)", key, deep_acc, cbs_acc, walls[key])
            if out_dir is not None and save_models:
                mdir = Path(out_dir) / "models"
                mdir.mkdir(parents=True, exist_ok=True)
                nn.save(model, mdir / f"{cond}_m{m}.ckpt")
    provenance = {"master_seed": cfg.master_seed, "seeds": seeds,
                  "config_hash": cfg.config_hash(), "config": cfg.to_dict(),
                  "version": __version__}
    report = ExperimentReport(rows, histories, timing.timing_table(cfg.m_values, cfg.timing),
                              provenance, walls)
    if out_dir is not None:
        report.save(out_dir)
    return report
