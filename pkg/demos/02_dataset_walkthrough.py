"""From receiver positions to a labeled RSS dataset.

Receivers fall uniformly on a 50 m square around the transmitter. Each one
gets a label from its floored azimuth and an RSS for every one of the 24
beams. Shadowing is drawn separately for every (receiver, beam) pair, which
is what makes NLoS hard.

    python demos/02_dataset_walkthrough.py
"""

import numpy as np

from mmwave_ia import dataset, ia, scene
from mmwave_ia.channel import ChannelParams

scn = scene.sample_scene(scene.SceneConfig(20_000, seed=1))
print(f"{len(scn)} receivers, closest at {scn.distance.min():.2f} m, farthest at {scn.distance.max():.2f} m")

# the square is not a disk: sectors pointing at its corners hold more receivers
freq = np.bincount(scn.labels, minlength=25)[1:] / len(scn)
print(f"label frequency: beam 1 {freq[0]:.3f}, beam 4 {freq[3]:.3f} (1/24 = {1 / 24:.3f})")

sub = dataset.beam_subset(4)
for cond in ("LoS", "NLoS"):
    ds = dataset.generate(scn, ChannelParams.for_condition(cond), seed=2)
    print(f"\n{cond}: first receivers, RSS (dBm) on beams {sub.indices}")
    for k in range(3):
        row = ds.rss_dbm[k, sub.columns]
        print(f"  rx {k + 1}: " + "  ".join(f"{v:7.1f}" for v in row)
              + f"   true beam {ds.labels[k]:2d}, sweep picks {ia.cbs_predict(row, sub)}")
    for m in (4, 24):
        s = dataset.beam_subset(m)
        pred = ia.cbs_predict(ds.rss_dbm[:, s.columns], s)
        print(f"  conventional sweep over {m:2d} beams: {ia.accuracy_from_arrays(pred, ds.labels):5.1f}% correct")
