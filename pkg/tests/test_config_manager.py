import json

from src.config_manager import ConfigManager
from src.weaksim.config import DEFAULT_SEED, DEFAULT_TRIALS, DEFAULT_ZERO_TOL


def _manager(tmp_path):
    return ConfigManager([tmp_path / "project.json", tmp_path / "global" / "config.json"])


def test_defaults_without_any_source(tmp_path):
    config = _manager(tmp_path)
    assert config.get_zero_tol() == DEFAULT_ZERO_TOL
    assert config.get_seed() == DEFAULT_SEED
    assert config.get_trials() == DEFAULT_TRIALS
    assert config.get_workers() == 1
    assert config.is_verbose() is False


def test_priority_env_over_project_over_global(tmp_path, monkeypatch):
    config = _manager(tmp_path)
    config.save_config({"seed": 1, "trials": 500}, config.config_paths[1])
    assert config.get_seed() == 1

    config.save_config({"seed": 2})
    assert config.get_seed() == 2
    assert config.get_trials() == 500

    monkeypatch.setenv("WEAKSIM_SEED", "3")
    assert config.get_seed() == 3


def test_bad_env_value_falls_through(tmp_path, monkeypatch, capsys):
    config = _manager(tmp_path)
    monkeypatch.setenv("WEAKSIM_ZERO_TOL", "tiny")
    assert config.get_zero_tol() == DEFAULT_ZERO_TOL
    assert "ignoring WEAKSIM_ZERO_TOL" in capsys.readouterr().out


def test_verbose_and_workers_parsing(tmp_path, monkeypatch):
    config = _manager(tmp_path)
    monkeypatch.setenv("WEAKSIM_VERBOSE", "yes")
    monkeypatch.setenv("WEAKSIM_WORKERS", "0")
    assert config.is_verbose() is True
    assert config.get_workers() == 1


def test_save_config_merges(tmp_path):
    config = _manager(tmp_path)
    config.save_config({"seed": 5})
    config.save_config({"zero_tol": 1e-6})
    stored = json.loads(config.config_paths[0].read_text())
    assert stored == {"seed": 5, "zero_tol": 1e-6}


def test_load_all_configs_reports_every_source(tmp_path, monkeypatch):
    config = _manager(tmp_path)
    config.save_config({"trials": 1000})
    config.config_paths[1].parent.mkdir(parents=True)
    config.config_paths[1].write_text("{broken")
    monkeypatch.setenv("WEAKSIM_TRIALS", "2000")
    everything = config.load_all_configs()
    assert everything["environment"]["WEAKSIM_TRIALS"] == "2000"
    assert everything[str(config.config_paths[0])] == {"trials": 1000}
    assert "error" in everything[str(config.config_paths[1])]
