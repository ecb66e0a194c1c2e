import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import Config
from errors import ConfigError


@pytest.mark.unit
class TestConfig:

    def test_defaults(self, monkeypatch):
        """Test built-in defaults when no CAMO_ variable is set"""
        for name in list(os.environ):
            if name.startswith('CAMO_'):
                monkeypatch.delenv(name)

        config = Config()

        assert (config.SEED, config.JOBS, config.K_MIN, config.K_MAX) == (42, 1, 2, 8)
        assert (config.MIN_N, config.MAX_N, config.DIM) == (3, 6, 100)
        assert config.LOG_LEVEL == 'INFO'
        assert config.MAX_DIRECTORIES == 60

    def test_environment_overrides(self, monkeypatch):
        """Test CAMO_ variables override the defaults"""
        # Given
        monkeypatch.setenv('CAMO_SEED', '7')
        monkeypatch.setenv('CAMO_DIM', '32')
        monkeypatch.setenv('CAMO_TOL', '1e-8')

        # When
        config = Config()

        # Then
        assert config.SEED == 7
        assert config.ngram_config().dim == 32
        assert config.fit_config(k=3).tol == 1e-8
        assert config.fit_config(k=3).seed == 7

    def test_flag_overrides_beat_environment(self, monkeypatch):
        """Test explicit overrides win and None keeps the configured value"""
        monkeypatch.setenv('CAMO_RESTARTS', '9')
        config = Config()
        assert config.fit_config(restarts=2).restarts == 2
        assert config.fit_config(restarts=None).restarts == 9

    def test_invalid_values(self, monkeypatch):
        """Test unparsable numbers and bad ranges raise ConfigError"""
        monkeypatch.setenv('CAMO_SEED', 'forty-two')
        with pytest.raises(ConfigError):
            Config()
        monkeypatch.setenv('CAMO_SEED', '42')
        monkeypatch.setenv('CAMO_K_MIN', '1')
        with pytest.raises(ConfigError):
            Config()
        monkeypatch.setenv('CAMO_K_MIN', '2')
        monkeypatch.setenv('CAMO_JOBS', '-1')
        with pytest.raises(ConfigError):
            Config()
        monkeypatch.setenv('CAMO_JOBS', '1')
        monkeypatch.setenv('CAMO_MAX_DIRECTORIES', '-5')
        with pytest.raises(ConfigError):
            Config()

    def test_invalid_ngram_range_reaches_config(self, monkeypatch):
        """Test an impossible n-gram range fails when the embedder is configured"""
        monkeypatch.setenv('CAMO_MIN_N', '5')
        monkeypatch.setenv('CAMO_MAX_N', '3')
        with pytest.raises(ConfigError):
            Config().ngram_config()
