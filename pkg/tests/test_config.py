import pytest

from trajwarp.config import PipelineConfig, config_from_dict, load_config
from trajwarp.exceptions import ConfigError, MissingFile


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("")
    assert load_config(path) == PipelineConfig()
    assert load_config() == PipelineConfig()


def test_documented_defaults():
    c = PipelineConfig()
    assert (c.filter.median_window, c.filter.savgol_window, c.filter.savgol_order) == (5, 11, 3)
    assert (c.forest.n_trees, c.forest.features_per_split) == (500, "sqrt")
    assert (c.protocol.kind, c.protocol.repeats) == ("losubo", 10)
    assert c.wavelet.autotune and c.dtw.window is None


def test_unknown_keys_are_named(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("seed: 3\nforest:\n  n_tress: 10\nmirorr: true\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert set(err.value.keys) == {"forest.n_tress", "mirorr"}
    assert "forest.n_tress" in str(err.value) and "mirorr" in str(err.value)


def test_partial_file_merges(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("seed: 9\nforest: {n_trees: 40}\nwavelet: {family: symlet}\n")
    c = load_config(path)
    assert c.seed == 9 and c.forest.n_trees == 40 and c.wavelet.family == "symlet"
    assert c.forest.min_samples_leaf == 1 and c.filter == PipelineConfig().filter


def test_bad_values_and_files(tmp_path):
    with pytest.raises(ConfigError) as err:
        config_from_dict({"protocol": {"kind": "bootstrap", "repeats": 0}})
    assert set(err.value.keys) == {"protocol.kind", "protocol.repeats"}
    with pytest.raises(ConfigError):
        config_from_dict({"forest": 5})
    with pytest.raises(MissingFile):
        load_config(tmp_path / "none.yaml")
    (tmp_path / "list.yaml").write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "list.yaml")


def test_mirror_defaults_by_format():
    c = PipelineConfig()
    assert c.mirror_for("cad60") and c.mirror_for("cad120")
    assert not c.mirror_for("utkinect") and not c.mirror_for(None)
    assert not c.replace(mirror=False).mirror_for("cad60")
    p = c.classifier_params("cad60")
    assert p["mirror"] and p["n_trees"] == 500 and p["random_state"] == 0
