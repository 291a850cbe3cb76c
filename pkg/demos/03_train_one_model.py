"""Train the classifier for one partial sweep and compare with the sweep itself.

The conventional sweep can only return a beam it measured, so with 6 of 24
beams it is right about a quarter of the time. The network maps the 6 RSS
values to any of the 24 beams.

    python demos/03_train_one_model.py [samples] [epochs]
"""

import sys
import time

from mmwave_ia import dataset, experiment, nn
from mmwave_ia.experiment import ExperimentConfig

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 30_000
epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 20
m = 6

cfg = ExperimentConfig(sample_count=samples, conditions=("LoS",), train=nn.TrainConfig(dtype="float32"))
train, val, test = dataset.split(experiment.build_dataset(cfg, "LoS"))
sub = dataset.beam_subset(m)
print(f"{len(train)} training receivers, sweeping beams {sub.indices}")

t0 = time.perf_counter()
model, hist = nn.train((train, val, test), sub, cfg.train, epochs=epochs)
print(f"trained {len(hist)} epochs in {time.perf_counter() - t0:.0f} s")
for e in range(0, len(hist), max(1, len(hist) // 5)):
    print(f"  epoch {e + 1:3d}: train loss {hist.train_loss[e]:.3f}, val accuracy {100 * hist.val_acc[e]:.1f}%")

deep, cbs = experiment.evaluate_cell(model, test, sub)
print(f"test accuracy: network {100 * (deep == test.labels).mean():.1f}%, "
      f"conventional sweep {100 * (cbs == test.labels).mean():.1f}%")
print(f"network answers outside the swept set: {100 * (~(deep[:, None] == list(sub.indices)).any(1)).mean():.1f}%")
