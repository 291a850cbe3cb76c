"""Acceptance criteria at their stated tolerances.

Criteria 1-6 read a desk-scale sweep (1e5 receivers, default settings).
The sweep takes about half an hour on one core, so its report is cached in
``.acceptance_cache/`` under a key made from the config and the package
source; set ``MMWAVE_ACCEPTANCE_RERUN=1`` to ignore the cache. Each test
records its checks, and a pass/fail line per criterion is printed at the end
of the run.
"""

import hashlib
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import mmwave_ia
from mmwave_ia import antenna, channel, dataset, experiment, ia, nn, scene, timing
from mmwave_ia.seeding import derive_seed

from conftest import ACCEPTANCE

CACHE = Path(__file__).resolve().parent.parent / ".acceptance_cache"
M_VALUES = dataset.SUPPORTED_M


def check(cid: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(cid, []).append((bool(passed), detail))
    return bool(passed)


def source_digest() -> str:
    h = hashlib.sha256()
    for p in sorted(Path(mmwave_ia.__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


@pytest.fixture(scope="module")
def sweep():
    cfg = experiment.ExperimentConfig()
    key = hashlib.sha256((cfg.config_hash() + source_digest()).encode()).hexdigest()[:20]
    path = CACHE / f"sweep-{key}.json"
    if path.exists() and not os.environ.get("MMWAVE_ACCEPTANCE_RERUN"):
        return experiment.ExperimentReport.from_json(json.loads(path.read_text()))
    report = experiment.run(cfg)
    CACHE.mkdir(exist_ok=True)
    path.write_text(json.dumps(report.to_json()))
    return report


def acc(rep, cond, m, method=ia.DEEPIA):
    return rep.accuracy(cond, m, method)


def test_criterion_1_los_m24(sweep):
    a = acc(sweep, "LoS", 24)
    wall = sweep.wall_time_s.get("LoS/m=24", float("nan"))
    ok = check("1", a >= 97.0, f"LoS DeepIA m=24 accuracy {a:.2f}% (need >= 97%)")
    ok &= check("1", wall <= 20 * 60, f"LoS m=24 training+evaluation wall time {wall / 60:.1f} min (target <= 20)")
    assert ok


def test_criterion_2_los_m6(sweep):
    a = acc(sweep, "LoS", 6)
    assert check("2", a >= 90.0, f"LoS DeepIA m=6 accuracy {a:.2f}% (need >= 90%)")


def test_criterion_3_los_cbs_m6(sweep):
    a = acc(sweep, "LoS", 6, ia.CBS)
    assert check("3", 21.0 <= a <= 29.0, f"LoS CBS m=6 accuracy {a:.2f}% (need 21-29%)")


def test_criterion_4_cbs_structural_law(sweep):
    ok = True
    for cond in ("LoS", "NLoS"):
        for m in M_VALUES:
            row = sweep.row(cond, m, ia.CBS)
            frac = row["true_in_subset_pct"]
            ok &= check("4", row["accuracy_pct"] <= frac + 0.1,
                        f"{cond} m={m}: CBS {row['accuracy_pct']:.2f}% <= in-subset {frac:.2f}% + 0.1")
            if cond == "LoS":
                ideal = 100.0 * m / 24
                ok &= check("4", abs(frac - ideal) <= 1.0,
                            f"LoS m={m}: in-subset fraction {frac:.2f}% vs m/24 = {ideal:.2f}% (+-1)")
    assert ok


def test_criterion_5_nlos_ordering(sweep):
    ok = True
    for m in M_VALUES:
        deep_n, cbs_n = acc(sweep, "NLoS", m), acc(sweep, "NLoS", m, ia.CBS)
        if m <= 8:
            ok &= check("5", deep_n >= cbs_n, f"NLoS m={m}: DeepIA {deep_n:.2f}% >= CBS {cbs_n:.2f}%")
        if m < 24:
            deep_l = acc(sweep, "LoS", m)
            ok &= check("5", deep_n < deep_l, f"m={m}: DeepIA NLoS {deep_n:.2f}% < LoS {deep_l:.2f}%")
    assert ok


def test_criterion_6_monotone_los(sweep):
    a = {m: acc(sweep, "LoS", m) for m in (2, 4, 6, 8)}
    ok = True
    for hi, lo in ((8, 6), (6, 4), (4, 2)):
        ok &= check("6", a[hi] >= a[lo], f"LoS DeepIA m={hi} {a[hi]:.2f}% >= m={lo} {a[lo]:.2f}%")
    assert ok


def test_criterion_7_timing():
    ok = check("7", timing.sweep_time_ms(24) == 1.875, f"sweep_time(24) = {timing.sweep_time_ms(24)} ms")
    ok &= check("7", timing.sweep_time_ms(12) == 0.9375, f"sweep_time(12) = {timing.sweep_time_ms(12)} ms")
    tc1 = timing.coherence_time_ms(28e9, 1.4)
    ok &= check("7", 7.6 <= tc1 <= 7.7, f"coherence_time(28 GHz, 1.4 m/s) = {tc1:.4f} ms")
    tc2 = timing.coherence_time_ms(28e9, 25.0)
    ok &= check("7", 0.42 <= tc2 <= 0.43, f"coherence_time(28 GHz, 25 m/s) = {tc2:.4f} ms")
    p = timing.cbs_prediction_time_us(6, timing.TimingConfig(comparator_count=1, comparator_period_us=0.01))
    ok &= check("7", round(p, 2) == 0.06, f"cbs_prediction_time(6, 1 comparator) = {p:.4f} us")
    assert ok


def test_criterion_8_gradient_check():
    rng = np.random.default_rng(2024)
    for position in ("post",):
        model = nn.init(nn.Architecture(6, bn_position=position), 7)
        x, y = rng.random((32, 6)), rng.integers(1, 25, 32)
        report = nn.gradient_check(model, x, y, h=1e-5)
        worst = max(err for err, _, _ in report.values())
        checked = sum(n for _, n, _ in report.values())
        skipped = sum(s for _, _, s in report.values())
        assert check("8", worst < 1e-4, f"gradient check ({position} BN, {checked} entries, "
                     f"{skipped} at ReLU kinks skipped): max relative error {worst:.2e}")


def test_criterion_8_softmax():
    rng = np.random.default_rng(1)
    model = nn.init(nn.Architecture(8), 0)
    x = rng.random((500, 8)) * rng.choice([1e-6, 1.0, 1e3], size=(500, 1))
    dev = max(np.abs(nn.forward(model.copy(), x, m).sum(axis=1) - 1).max() for m in ("train", "infer"))
    assert check("8", dev <= 1e-9, f"softmax row sums within {dev:.1e} of 1")


def test_criterion_8_label_oracle():
    def oracle(a):
        return next(i for i in range(1, 25) if (a - (15 * (i - 1) - 8)) % 360 <= 15 and (a - (15 * (i - 1) - 8)) % 360 > 0)
    mism = [a for a in range(360) if scene.true_beam(a) != oracle(a)]
    assert check("8", not mism, f"beam-label oracle agrees on {360 - len(mism)}/360 integer angles")


def test_criterion_8_backlobe_antisymmetry():
    pattern = antenna.BeamPattern()
    o = np.random.default_rng(3).uniform(0.0, 180.0, 200)
    o = o[(o > 0) & (o < 180)]
    back, front = pattern.lookup(360.0 - o), pattern.lookup(o)
    err = np.abs(back - (front - 10.0))
    held = np.mean(err < 1e-6)
    assert check("8", held == 1.0, f"gain(360-o) = gain(o) - 10 dB held for {100 * held:.1f}% of {len(o)} "
                 f"sampled offsets (region '{pattern.cfg.backlobe_region}')")


def test_criterion_8_noise_free_cbs():
    a = np.radians(np.arange(360) + 1e-6)
    s = scene.Scene.from_xy(10 * np.cos(a), 10 * np.sin(a))
    assert np.array_equal(s.azimuth_int, np.arange(360))
    rss = channel.rss_matrix_dbm(s, channel.ChannelParams.for_condition("LoS", shadow_sigma_db=0.0))
    acc24 = ia.accuracy_from_arrays(ia.cbs_predict(rss, dataset.beam_subset(24)), s.labels)
    assert check("8", acc24 >= 99.0, f"noise-free full-sweep CBS {acc24:.2f}% on the integer-angle grid")


def test_criterion_8_bit_exact_training():
    cfg = experiment.ExperimentConfig(sample_count=10_000, conditions=("LoS",))
    seeds = experiment.run_seeds(cfg)

    def once():
        splits = dataset.split(experiment.build_dataset(cfg, "LoS"))
        tcfg = nn.TrainConfig(seed=seeds["shuffle/LoS/m=6"])
        model, hist = nn.train(splits, dataset.beam_subset(6), tcfg,
                               init_seed=seeds["init/LoS/m=6"], epochs=2)
        return model, hist

    (m1, h1), (m2, h2) = once(), once()
    same = h1 == h2 and all(np.array_equal(a, b) for (_, a), (_, b) in zip(m1.tensors(), m2.tensors()))
    assert check("8", same, "2-epoch training repeated with the same master seed is bit-identical")
