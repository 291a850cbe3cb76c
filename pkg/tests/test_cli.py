import hashlib
import json

import pytest

from mmwave_ia import cli, dataset, nn


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "los.mwds"
    assert cli.main(["gen-data", "--samples", "1500", "--out", str(path)]) == 0
    return path


def test_gen_data_is_idempotent(tmp_path, capsys, data_file):
    code, out, _ = run(capsys, "gen-data", "--samples", 1500, "--out", tmp_path / "b.mwds")
    assert code == 0
    assert "samples=1500" in out and "channel=LoS" in out and "seed=0" in out
    assert digest(tmp_path / "b.mwds") == digest(data_file)
    assert dataset.load(data_file).channel.condition == "LoS"


def test_invalid_sigma_rejected_before_work(tmp_path, capsys):
    code, _, err = run(capsys, "gen-data", "--set", "channel_overrides.LoS.shadow_sigma_db=-1",
                       "--out", tmp_path / "x.mwds")
    assert code != 0 and err.startswith("error: ConfigError:") and err.count("\n") == 1
    assert not (tmp_path / "x.mwds").exists()


def test_train_and_eval(tmp_path, capsys, data_file):
    ckpt = tmp_path / "m6.ckpt"
    code, out, _ = run(capsys, "train", "--dataset", data_file, "--m", 6, "--epochs", 2,
                       "--set", "train.batch_size=256", "--out", ckpt)
    assert code == 0 and "epochs=2" in out
    assert (tmp_path / "m6.ckpt.history.csv").read_text().count("\n") == 3
    assert nn.load(ckpt).subset == (1, 5, 9, 13, 17, 21)
    code, out, _ = run(capsys, "eval", "--dataset", data_file, "--model", ckpt,
                       "--predictions", tmp_path / "p.csv")
    result = json.loads(out)
    assert code == 0 and result["m"] == 6 and 0 <= result["deepia_accuracy_pct"] <= 100
    assert (tmp_path / "p.csv").exists()


def test_train_errors(tmp_path, capsys, data_file):
    code, _, err = run(capsys, "train", "--dataset", tmp_path / "nope", "--m", 6, "--out", tmp_path / "m")
    assert code != 0 and "dataset not found" in err
    code, _, err = run(capsys, "train", "--dataset", data_file, "--m", 5, "--out", tmp_path / "m")
    assert code != 0 and "m must be one of" in err


def test_train_uses_table_epochs(tmp_path, capsys):
    path = tmp_path / "small.mwds"
    assert cli.main(["gen-data", "--samples", "300", "--out", str(path)]) == 0
    code, out, _ = run(capsys, "train", "--dataset", path, "--m", 6, "--out", tmp_path / "m")
    assert code == 0 and "epochs=65" in out


def test_sweep(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps(
        {"sample_count": 400, "train": {"batch_size": 128, "epochs": {str(m): 1 for m in dataset.SUPPORTED_M}}}))
    code, out, _ = run(capsys, "sweep", "--config", tmp_path / "c.json", "--out", tmp_path / "r")
    assert code == 0
    rows = (tmp_path / "r" / "report.csv").read_text().splitlines()[1:]
    assert len(rows) == 24 and sum(",DeepIA," in r for r in rows) == 12
    assert "provenance" in json.loads((tmp_path / "r" / "report.json").read_text())
    code, out2, _ = run(capsys, "sweep", "--config", tmp_path / "c.json", "--out", tmp_path / "r2")
    assert out2.split("wrote")[0] == out.split("wrote")[0]


def test_timing(capsys):
    code, out, _ = run(capsys, "timing", "--m", 24, 6, "--speed", 1.4, "--fc", 28e9)
    assert code == 0
    assert "24,1.875,0.24," in out and "6,0.46875,0.06," in out
    assert "1.4,2.8e+10,7.64777" in out


def test_export_pattern(tmp_path, capsys):
    code, out, _ = run(capsys, "export-pattern", "--out", tmp_path / "p.txt")
    assert code == 0 and "hpbw_deg=10.18" in out
    assert (tmp_path / "p.txt").read_text().startswith("# offset_deg gain_db")


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "mmwave_ia", "timing", "--m", "12"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "12,0.9375," in res.stdout
