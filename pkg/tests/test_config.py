import logging

import pytest

from eigenfactors.checks import CheckConfig
from eigenfactors.config import EvaluationSettings, Settings
from eigenfactors.errors import ConfigError
from eigenfactors.models import OptimizerConfig, WorldSpec


def _write(tmp_path, text):
    path = tmp_path / "settings.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_packaged_defaults_match_the_dataclasses():
    settings = Settings.load_default()
    assert settings.world == WorldSpec()
    assert settings.optimizer == OptimizerConfig()
    assert settings.evaluation == EvaluationSettings()
    assert settings.checks == CheckConfig()
    assert set(settings.as_dict()) == {"world", "optimizer", "evaluation", "checks"}


def test_file_overrides_defaults(tmp_path):
    path = _write(tmp_path, "optimizer:\n  max_iters: 7\n  cost_tolerance: 1\nworld:\n  seed: 42\n")
    settings = Settings.load(path)
    assert settings.optimizer.max_iters == 7
    assert settings.optimizer.cost_tolerance == 1.0
    assert isinstance(settings.optimizer.cost_tolerance, float)
    assert settings.world.seed == 42
    assert settings.world.n_poses == WorldSpec().n_poses


def test_empty_file_keeps_defaults(tmp_path):
    assert Settings.load(_write(tmp_path, "")) == Settings.load_default()


def test_unknown_keys_are_reported(tmp_path, caplog):
    path = _write(tmp_path, "optimizer:\n  bogus: 1\nextras:\n  x: 2\n")
    with caplog.at_level(logging.WARNING, logger="eigenfactors.config"):
        settings = Settings.load(path)
    assert settings.optimizer == OptimizerConfig()
    assert "optimizer.bogus" in caplog.text
    assert "extras" in caplog.text


@pytest.mark.parametrize(
    "text",
    [
        "optimizer:\n  max_iters: many\n",
        "optimizer:\n  mode: true\n",
        "optimizer:\n  max_iters: -1\n",
        "optimizer:\n  mode: fancy\n",
        "world:\n  n_poses: 0\n",
        "evaluation:\n  radius: 0\n",
        "optimizer: [1, 2]\n",
        "- just\n- a list\n",
        "optimizer: {max_iters: [\n",
    ],
)
def test_bad_settings_raise_config_error(tmp_path, text):
    with pytest.raises(ConfigError):
        Settings.load(_write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        Settings.load(tmp_path / "absent.yaml")
