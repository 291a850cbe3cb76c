"""Beam selection: conventional sweep (argmax) and the learned predictor."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import nn
from .channel import dbm_to_mw
from .dataset import BeamSubset, normalize_rows

CBS = "CBS"
DEEPIA = "DeepIA"


@dataclass(frozen=True)
class PredictionRecord:
    receiver: int
    predicted: int
    true: int
    method: str
    m: int

    def __post_init__(self):
        if not (1 <= self.predicted <= 24 and 1 <= self.true <= 24):
            raise ValueError("beams must lie in 1..24")

    @property
    def correct(self) -> bool:
        return self.predicted == self.true


def cbs_predict(rss, subset: BeamSubset):
    """Swept beam with the largest RSS; ties go to the lowest beam index.

    ``rss`` holds one value per swept beam (a row, or a matrix of rows), in
    any monotone unit. The result is always a member of ``subset``.
    """
    rss = np.asarray(rss)
    if rss.shape[-1] != subset.m:
        raise ValueError(f"expected {subset.m} RSS values per row, got {rss.shape[-1]}")
    beams = np.asarray(subset.indices)[np.argmax(rss, axis=-1)]
    return int(beams) if rss.ndim == 1 else beams


def model_features(model: nn.ModelState, rss_dbm) -> np.ndarray:
    """Turn measured RSS (dBm) over the swept beams into network inputs."""
    x = dbm_to_mw(rss_dbm) / model.norm_max_linear
    x = np.minimum(x, 1.0)
    if model.normalization == "per_sample":
        x = normalize_rows(np.atleast_2d(x)).reshape(x.shape)
    return x


def deepia_predict(model: nn.ModelState, rss_dbm, subset: BeamSubset | None = None):
    """Predict the best of all 24 beams from RSS measured on the swept subset.

    Unlike :func:`cbs_predict` the answer may be a beam that was never swept.
    """
    rss_dbm = np.asarray(rss_dbm, dtype=np.float64)
    if subset is not None and model.subset is not None and tuple(subset.indices) != model.subset:
        raise ValueError(f"model was trained on beams {model.subset}, not {subset.indices}")
    if rss_dbm.shape[-1] != model.arch.input_width:
        raise ValueError(f"model expects {model.arch.input_width} RSS values, got {rss_dbm.shape[-1]}")
    return nn.predict(model, model_features(model, rss_dbm))


def accuracy(records) -> float:
    """Percentage of records whose predicted beam equals the true beam."""
    records = list(records)
    if not records:
        raise ValueError("accuracy of an empty record set is undefined")
    return 100.0 * sum(r.correct for r in records) / len(records)


def accuracy_from_arrays(predicted, true) -> float:
    predicted = np.asarray(predicted)
    true = np.asarray(true)
    if predicted.size == 0 or predicted.shape != true.shape:
        raise ValueError("need equally shaped, nonempty prediction arrays")
    return 100.0 * float(np.mean(predicted == true))


def make_records(predicted, true, method: str, m: int) -> list[PredictionRecord]:
    return [PredictionRecord(k + 1, int(p), int(t), method, m)
            for k, (p, t) in enumerate(zip(predicted, true))]


def write_predictions(path, rss_dbm, subset: BeamSubset, predicted, true, method: str) -> None:
    """Per-receiver CSV: receiver, RSS per swept beam (dBm), predicted beam, true beam."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["receiver"] + [f"beam_{i}" for i in subset.indices]
                   + ["predicted_beam", "true_beam", "method"])
        for k, (row, p, t) in enumerate(zip(rss_dbm, predicted, true), 1):
            w.writerow([k] + [f"{v:.3f}" for v in row] + [int(p), int(t), method])
