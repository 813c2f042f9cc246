import json
import subprocess
import sys

import pytest

from trajwarp.cli import EXIT_BUNDLE, EXIT_CONFIG, EXIT_INPUT, EXIT_PIPELINE, EXIT_USAGE, main
from trajwarp.dataio import load_manifest


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "fast.yaml"
    cfg.write_text("forest: {n_trees: 20}\nwavelet: {autotune: false}\nprotocol: {repeats: 1}\n")
    data = root / "data"
    assert main(["synth", "--out", str(data), "--subjects", "4", "--reps", "2",
                 "--frames", "40", "--seed", "3"]) == 0
    model = root / "model"
    assert main(["train", "--data", str(data / "manifest.yaml"), "--out", str(model),
                 "--config", str(cfg)]) == 0
    return root, cfg, data / "manifest.yaml", model


def test_synth_writes_manifest(workspace):
    _, _, manifest, _ = workspace
    m = load_manifest(manifest)
    assert m.format == "generic-csv" and len(m.entries) == 3 * 4 * 2


def test_eval_losubo_four_folds(workspace, capsys, tmp_path):
    _, cfg, manifest, _ = workspace
    out = tmp_path / "report.json"
    code = main(["eval", "--data", str(manifest), "--protocol", "losubo", "--config", str(cfg),
                 "--report-out", str(out)])
    assert code == 0
    assert "accuracy" in capsys.readouterr().out
    report = json.loads(out.read_text())
    assert len(report["folds"]) == 4
    assert [f["test_subjects"] for f in report["folds"]] == [[1], [2], [3], [4]]


def test_predict_training_sample(workspace, capsys, tmp_path):
    _, _, manifest, model = workspace
    m = load_manifest(manifest)
    hits = 0
    for e in m.entries[::4]:
        capsys.readouterr()
        assert main(["predict", "--model", str(model), "--sample", str(m.root / e.file)]) == 0
        label = int(capsys.readouterr().out.split("\t")[1])
        hits += label == e.label
    assert hits == len(m.entries[::4])
    out = tmp_path / "pred.json"
    assert main(["predict", "--model", str(model), "--sample", str(manifest),
                 "--report-out", str(out)]) == 0
    rows = json.loads(out.read_text())["predictions"]
    assert len(rows) == len(m.entries)
    assert all(abs(sum(r["votes"].values()) - 1) < 1e-12 for r in rows)


def test_inspect(workspace, capsys):
    _, _, manifest, model = workspace
    assert main(["inspect", "--model", str(model)]) == 0
    out = capsys.readouterr().out
    assert "feature dimension" in out and "template class 3" in out
    assert main(["inspect", "--data", str(manifest)]) == 0
    assert "n_sequences: 24" in capsys.readouterr().out


def test_config_typo_names_key(workspace, capsys, tmp_path):
    _, _, manifest, _ = workspace
    bad = tmp_path / "bad.yaml"
    bad.write_text("forest: {n_tress: 3}\n")
    assert main(["eval", "--data", str(manifest), "--config", str(bad)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "ConfigError" in err and "forest.n_tress" in err


def test_exit_codes(workspace, tmp_path, capsys):
    root, cfg, manifest, model = workspace
    assert main([]) == EXIT_USAGE
    assert main(["eval"]) == EXIT_USAGE
    assert main(["train", "--data", str(tmp_path / "none.yaml"), "--out", str(tmp_path / "m")]) == EXIT_INPUT
    broken = tmp_path / "broken"
    broken.mkdir()
    assert main(["inspect", "--model", str(broken)]) == EXIT_BUNDLE
    assert main(["synth", "--out", str(tmp_path / "s"), "--classes", "0"]) == EXIT_INPUT
    one = tmp_path / "one"
    assert main(["synth", "--out", str(one), "--subjects", "1", "--reps", "2", "--frames", "30"]) == 0
    assert main(["eval", "--data", str(one / "manifest.yaml"), "--config", str(cfg)]) == EXIT_PIPELINE
    err = capsys.readouterr().err
    assert "InsufficientSubjects" in err


def test_global_flags_in_either_position(workspace, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--seed", "4", "synth", "--out", str(a), "--reps", "1"]) == 0
    assert main(["synth", "--out", str(b), "--reps", "1", "--seed", "4"]) == 0
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "trajwarp", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("trajwarp ")
