"""Tests for environment and YAML configuration loading."""

import pytest

from utils.config import Config


@pytest.fixture
def clean_env(monkeypatch):
    for key in ('BASIS_GRID', 'EPS_LOC', 'ENABLE_EXCEL_EXPORT', 'FLUX_CONFIG_FILE', 'LOG_LEVEL'):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setattr('utils.config.load_dotenv', lambda: None)
    return monkeypatch


class TestConfig:

    def test_defaults(self, clean_env):
        cfg = Config()
        assert cfg.get_app_setting('BASIS_GRID') == 16
        assert cfg.get_app_setting('EPS_LOC') is None
        assert cfg.get_app_setting('EPS_LOC', 0.01) == 0.01
        assert cfg.get_app_setting('LOG_LEVEL') == 'INFO'
        assert cfg.config_file is None

    def test_environment(self, clean_env):
        clean_env.setenv('BASIS_GRID', '24')
        clean_env.setenv('EPS_LOC', '0.02')
        cfg = Config()
        assert cfg.get_app_setting('BASIS_GRID') == 24
        assert cfg.get_app_setting('EPS_LOC') == pytest.approx(0.02)

    def test_yaml_override(self, clean_env, tmp_path):
        path = tmp_path / 'flux.yaml'
        path.write_text("basis_grid: 12\nseed: 7\nnot_a_setting: 1\n", encoding='utf-8')
        clean_env.setenv('FLUX_CONFIG_FILE', str(path))
        cfg = Config()
        assert cfg.get_app_setting('BASIS_GRID') == 12
        assert cfg.get_app_setting('SEED') == 7
        assert 'NOT_A_SETTING' not in cfg.as_dict()
        assert cfg.config_file == str(path)

    def test_missing_yaml(self, clean_env, tmp_path):
        clean_env.setenv('FLUX_CONFIG_FILE', str(tmp_path / 'absent.yaml'))
        cfg = Config()
        assert cfg.config_file is None
        assert cfg.get_app_setting('BASIS_GRID') == 16

    def test_feature_flags(self, clean_env):
        assert Config().is_feature_enabled('excel_export')
        clean_env.setenv('ENABLE_EXCEL_EXPORT', 'false')
        assert not Config().is_feature_enabled('EXCEL_EXPORT')
        assert Config().is_feature_enabled('unknown_feature')
