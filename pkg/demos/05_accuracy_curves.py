"""Accuracy against the number of swept beams, both channel conditions.

A reduced version of the full sweep (fewer receivers, fewer epochs) so it
finishes in a few minutes. The full desk-scale run is
``mmwave-ia sweep --out results/``.

    python demos/05_accuracy_curves.py [samples] [epoch_scale] [out_dir]
"""

import sys

from mmwave_ia import experiment, ia, nn
from mmwave_ia.nn import EPOCHS_BY_M

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
scale = float(sys.argv[2]) if len(sys.argv) > 2 else 0.2
out_dir = sys.argv[3] if len(sys.argv) > 3 else None

epochs = {m: max(1, round(scale * e)) for m, e in EPOCHS_BY_M.items()}
cfg = experiment.ExperimentConfig(sample_count=samples, train=nn.TrainConfig(epochs=epochs, dtype="float32"))
report = experiment.run(cfg, out_dir=out_dir)

print(" m   LoS net  LoS sweep  NLoS net  NLoS sweep")
for m in cfg.m_values:
    vals = [report.accuracy(c, m, meth) for c in ("LoS", "NLoS") for meth in (ia.DEEPIA, ia.CBS)]
    print(f"{m:2d}  " + "  ".join(f"{v:8.1f}" for v in vals))
if out_dir:
    print(f"curves written to {out_dir}/curves.csv")
