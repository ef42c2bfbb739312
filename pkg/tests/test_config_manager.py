import json

import pytest

from config_manager import DEFAULT_CONFIG, ConfigManager
from errors import ConfigError


@pytest.fixture
def config_path(tmp_path):
    return tmp_path / "subword_config.json"


class TestLoading:
    def test_defaults_without_file(self, config_path):
        manager = ConfigManager(str(config_path), environ={})
        assert manager.config == DEFAULT_CONFIG
        assert manager.get('tokenize.seed') == 1234
        assert manager.get('analysis.alpha') == 2.5

    def test_file_overrides_single_keys(self, config_path):
        config_path.write_text(json.dumps({'tokenize': {'mode': 'uniform', 'rate': 0.25}}), encoding='utf-8')
        manager = ConfigManager(str(config_path), environ={})
        assert manager.get('tokenize.mode') == 'uniform'
        assert manager.get('tokenize.rate') == 0.25
        assert manager.get('tokenize.scheme') == 'bpe'

    def test_corrupt_file_falls_back_to_defaults(self, config_path):
        config_path.write_text("{nicht json", encoding='utf-8')
        assert ConfigManager(str(config_path), environ={}).config == DEFAULT_CONFIG

    def test_defaults_are_not_shared(self, config_path):
        manager = ConfigManager(str(config_path), environ={})
        manager.set('analysis.sample_grid', [1])
        assert DEFAULT_CONFIG['analysis']['sample_grid'] == [1, 2, 5, 10, 20, 50, 100]


class TestEnvironment:
    def test_typed_overrides(self, config_path):
        manager = ConfigManager(str(config_path), environ={
            'SUBWORD_TOKENIZE_SEED': '99',
            'SUBWORD_TOKENIZE_RATE': '0.3',
            'SUBWORD_TOKENIZE_MODE': 'dropout',
            'SUBWORD_EXPORT_INCLUDE_CURVE': 'nein',
            'SUBWORD_ANALYSIS_SAMPLE_GRID': '1, 10,100',
        })
        assert manager.get('tokenize.seed') == 99
        assert manager.get('tokenize.rate') == 0.3
        assert manager.get('tokenize.mode') == 'dropout'
        assert manager.get('export.include_curve') is False
        assert manager.get('analysis.sample_grid') == [1, 10, 100]

    def test_rate_is_unset_by_default(self, config_path):
        assert ConfigManager(str(config_path), environ={}).get('tokenize.rate') is None

    def test_zero_rate_stays_zero(self, config_path):
        manager = ConfigManager(str(config_path), environ={'SUBWORD_TOKENIZE_RATE': '0'})
        assert manager.get('tokenize.rate') == 0.0
        assert manager.get('tokenize.rate') is not None

    def test_empty_rate_means_unset(self, config_path):
        config_path.write_text(json.dumps({'tokenize': {'rate': 0.4}}), encoding='utf-8')
        manager = ConfigManager(str(config_path), environ={'SUBWORD_TOKENIZE_RATE': ' '})
        assert manager.get('tokenize.rate') is None

    def test_environment_beats_file(self, config_path):
        config_path.write_text(json.dumps({'tokenize': {'seed': 5}}), encoding='utf-8')
        manager = ConfigManager(str(config_path), environ={'SUBWORD_TOKENIZE_SEED': '6'})
        assert manager.get('tokenize.seed') == 6

    def test_invalid_value(self, config_path):
        with pytest.raises(ConfigError):
            ConfigManager(str(config_path), environ={'SUBWORD_TOKENIZE_SEED': 'viele'})


class TestAccess:
    def test_dot_notation(self, config_path):
        manager = ConfigManager(str(config_path), environ={})
        manager.set('model.vocab_path', 'vocab.txt')
        assert manager.get_model_config()['vocab_path'] == 'vocab.txt'
        assert manager.get('model.missing', 'x') == 'x'
        assert manager.get('tokenize.seed.deeper') is None

    def test_save_round_trip(self, config_path):
        manager = ConfigManager(str(config_path), environ={})
        manager.set('tokenize.scheme', 'maxmatch')
        assert manager.save_config()
        reloaded = ConfigManager(str(config_path), environ={})
        assert reloaded.get_tokenize_config()['scheme'] == 'maxmatch'

    def test_save_into_missing_directory(self, tmp_path):
        manager = ConfigManager(str(tmp_path / "fehlt" / "config.json"), environ={})
        assert not manager.save_config()
