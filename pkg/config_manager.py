"""
Configuration Manager
Handles loading, overriding and saving the tokenizer settings
"""

import copy
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "subword_config.json"
ENV_PREFIX = "SUBWORD_"

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    'model': {
        'bpe_dir': '',
        'vocab_path': '',
        'marker': '#',
        'end_of_word': '',
        'merges': 1000
    },
    'tokenize': {
        'scheme': 'bpe',
        'mode': 'deterministic',
        'rate': None,
        'seed': 1234,
        'scope': 'both',
        'sampler': 'exact',
        'coin_policy': 'persistent',
        'max_rejections': 10 ** 7,
        'workers': 1,
        'chunk_lines': 1000
    },
    'lattice': {
        'enumerate_limit': 10000
    },
    'analysis': {
        'samples': 10000,
        'repeats': 50,
        'alpha': 2.5,
        'sample_grid': [1, 2, 5, 10, 20, 50, 100],
        'p_grid': [0.1, 0.3, 0.5, 0.7, 0.9],
        'format': 'csv'
    },
    'export': {
        'output_dir': 'reports',
        'title': 'Tokenisierungsanalyse',
        'author': '',
        'include_curve': True
    }
}

_TRUE = {'1', 'true', 'yes', 'ja', 'on'}
_FALSE = {'0', 'false', 'no', 'nein', 'off'}


def _coerce(raw: str, default: Any, name: str) -> Any:
    """Convert an environment string to the type of the default value"""
    try:
        if default is None:
            # optional number, empty means unset
            return float(raw) if raw.strip() else None
        if isinstance(default, bool):
            value = raw.strip().lower()
            if value in _TRUE:
                return True
            if value in _FALSE:
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, list):
            item = default[0] if default else ''
            return [_coerce(part.strip(), item, name) for part in raw.split(',') if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Umgebungsvariable {name}: ungültiger Wert '{raw}'") from e
    return raw


def _merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


class ConfigManager:
    """Manages tokenizer configuration"""

    def __init__(self, config_file: str = DEFAULT_CONFIG_FILE,
                 environ: Optional[Mapping[str, str]] = None):
        """
        Initialize configuration manager

        Args:
            config_file: Name of configuration file
            environ: Environment to read overrides from (os.environ by default)
        """
        self.config_file = Path(config_file)
        self.config: Dict[str, Any] = self._load_config()
        self.apply_environment(os.environ if environ is None else environ)

    def _load_config(self) -> Dict[str, Any]:
        """
        Load configuration from file on top of the defaults

        Returns:
            Configuration dictionary
        """
        config = self._get_default_config()
        if not self.config_file.exists():
            return config
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                stored = json.load(f)
        except (OSError, ValueError) as e:
            logger.warning("Fehler beim Laden der Konfiguration %s: %s", self.config_file, e)
            return config
        if not isinstance(stored, dict):
            logger.warning("Konfiguration %s ist kein JSON-Objekt, verwende Standardwerte", self.config_file)
            return config
        return _merge(config, stored)

    def _get_default_config(self) -> Dict[str, Any]:
        return copy.deepcopy(DEFAULT_CONFIG)

    def apply_environment(self, environ: Mapping[str, str]) -> None:
        """
        Override values from SUBWORD_<SECTION>_<KEY> variables

        Args:
            environ: Mapping of environment variables
        """
        for section, values in DEFAULT_CONFIG.items():
            for key, default in values.items():
                name = f"{ENV_PREFIX}{section.upper()}_{key.upper()}"
                if name in environ:
                    self.set(f"{section}.{key}", _coerce(environ[name], default, name))
                    logger.debug("%s overrides %s.%s", name, section, key)

    def save_config(self) -> bool:
        """
        Save current configuration to file

        Returns:
            True if successful, False otherwise
        """
        try:
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=4, ensure_ascii=False)
            return True
        except OSError as e:
            logger.error("Fehler beim Speichern der Konfiguration: %s", e)
            return False

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation

        Args:
            key_path: Path to value (e.g., 'tokenize.rate')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        value = self.config
        for key in key_path.split('.'):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def set(self, key_path: str, value: Any) -> None:
        """
        Set configuration value using dot notation

        Args:
            key_path: Path to value (e.g., 'tokenize.seed')
            value: Value to set
        """
        keys = key_path.split('.')
        config = self.config
        for key in keys[:-1]:
            config = config.setdefault(key, {})
        config[keys[-1]] = value

    def get_model_config(self) -> Dict[str, Any]:
        return self.config.get('model', {})

    def get_tokenize_config(self) -> Dict[str, Any]:
        return self.config.get('tokenize', {})

    def get_analysis_config(self) -> Dict[str, Any]:
        return self.config.get('analysis', {})

    def get_export_config(self) -> Dict[str, Any]:
        return self.config.get('export', {})
