import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmwave_ia import channel, dataset, ia, nn, scene
from mmwave_ia.channel import ChannelParams
from mmwave_ia.dataset import BeamSubset, beam_subset
from mmwave_ia.ia import PredictionRecord


def test_cbs_argmax_example():
    assert ia.cbs_predict(np.array([-40.0, -50.0]), BeamSubset(2, (1, 13))) == 1


def test_cbs_noise_free_beam9():
    a = np.radians(15.0 * 8)
    rx = scene.Scene.from_xy([7 * np.cos(a)], [7 * np.sin(a)])
    rss = channel.rss_matrix_dbm(rx, ChannelParams.for_condition("LoS", shadow_sigma_db=0.0))
    assert ia.cbs_predict(rss[0], beam_subset(24)) == 9


def test_cbs_ties_to_lowest_index():
    assert ia.cbs_predict(np.array([-50.0, -40.0, -40.0, -60.0]), beam_subset(4)) == 7


@given(st.sampled_from(dataset.SUPPORTED_M), st.integers(0, 2**16))
def test_cbs_output_in_subset(m, seed):
    sub = beam_subset(m)
    rss = np.random.default_rng(seed).normal(-70, 10, (20, m))
    assert set(ia.cbs_predict(rss, sub).tolist()) <= set(sub.indices)


def test_cbs_rejects_wrong_width():
    with pytest.raises(ValueError):
        ia.cbs_predict(np.zeros(5), beam_subset(6))


def test_accuracy_examples():
    recs = [PredictionRecord(1, 1, 1, ia.CBS, 4), PredictionRecord(2, 5, 5, ia.CBS, 4),
            PredictionRecord(3, 4, 5, ia.CBS, 4)]
    assert ia.accuracy(recs) == pytest.approx(100 * 2 / 3)
    assert ia.accuracy(recs[:2]) == 100.0
    assert ia.accuracy(recs[2:]) == 0.0
    with pytest.raises(ValueError):
        ia.accuracy([])


def test_records_round_trip_arrays():
    pred, true = np.array([3, 4, 5]), np.array([3, 4, 6])
    recs = ia.make_records(pred, true, ia.DEEPIA, 6)
    assert ia.accuracy(recs) == pytest.approx(ia.accuracy_from_arrays(pred, true))


@pytest.fixture(scope="module")
def trained():
    s = scene.sample_scene(scene.SceneConfig(4000, seed=21))
    ds = dataset.generate(s, ChannelParams.for_condition("LoS"), seed=5)
    splits = dataset.split(ds)
    model, _ = nn.train(splits, beam_subset(6), nn.TrainConfig(batch_size=256), epochs=3)
    return model, splits[2]


def test_deepia_is_deterministic_and_unconstrained(trained):
    model, test = trained
    sub = beam_subset(6)
    rss = test.rss_dbm[:, sub.columns]
    a = ia.deepia_predict(model, rss, sub)
    assert np.array_equal(a, ia.deepia_predict(model, rss, sub))
    assert not set(a.tolist()) <= set(sub.indices)
    assert ia.deepia_predict(model, rss[0], sub) == a[0]


def test_deepia_contract_errors(trained):
    model, test = trained
    with pytest.raises(ValueError):
        ia.deepia_predict(model, test.rss_dbm[:, :8])
    with pytest.raises(ValueError):
        ia.deepia_predict(model, test.rss_dbm[:, :6], beam_subset(8))


def test_model_features_match_dataset(trained):
    model, test = trained
    sub = beam_subset(6)
    assert np.allclose(ia.model_features(model, test.rss_dbm[:, sub.columns]),
                       dataset.select_features(test, sub), rtol=1e-12)


def test_cbs_structural_ceiling():
    s = scene.sample_scene(scene.SceneConfig(3000, seed=2))
    ds = dataset.generate(s, ChannelParams.for_condition("NLoS"), seed=1)
    for m in dataset.SUPPORTED_M:
        sub = beam_subset(m)
        pred = ia.cbs_predict(ds.rss_dbm[:, sub.columns], sub)
        ceiling = 100 * np.mean(np.isin(ds.labels, sub.indices))
        assert ia.accuracy_from_arrays(pred, ds.labels) <= ceiling + 1e-9


def test_cbs_noise_free_full_sweep():
    a = np.radians(np.arange(360) + 1e-6)
    s = scene.Scene.from_xy(12 * np.cos(a), 12 * np.sin(a))
    rss = channel.rss_matrix_dbm(s, ChannelParams.for_condition("LoS", shadow_sigma_db=0.0))
    assert ia.accuracy_from_arrays(ia.cbs_predict(rss, beam_subset(24)), s.labels) >= 99.0


def test_write_predictions(tmp_path):
    sub = beam_subset(2)
    ia.write_predictions(tmp_path / "p.csv", np.array([[-40.0, -50.0]]), sub, [1], [1], ia.CBS)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines == ["receiver,beam_1,beam_13,predicted_beam,true_beam,method",
                     "1,-40.000,-50.000,1,1,CBS"]
