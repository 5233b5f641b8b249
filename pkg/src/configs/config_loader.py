"""
Config Loader Module

Loads and merges experiment configs from JSON files.

Config priority (highest to lowest):
1. Command-line overrides (--seed, --out, --threads)
2. User config file
3. Experiment preset (presets/<experiment>.json)
4. Project defaults (defaults.json)

Objects are merged key by key; scalars and lists from a higher layer
replace the lower value.
"""

import json
import logging
from copy import deepcopy
from pathlib import Path
from typing import Dict, Optional

from config.settings import CONFIG_RULES, DEFAULTS_CONFIG, EXPERIMENT_KINDS, PRESETS_DIR
from src.exceptions import ConfigError
from src.validator.validation_engine import ValidationEngine, ValidationResult

logger = logging.getLogger(__name__)


def merge_layers(base: Dict, layer: Dict) -> Dict:
    """
    Recursive merge; values from ``layer`` win.

    Example:
        >>> merge_layers({"model": {"kind": "brownian", "d": 2}}, {"model": {"d": 3}})
        {'model': {'kind': 'brownian', 'd': 3}}
    """
    merged = deepcopy(base)
    for key, value in layer.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_layers(merged[key], value)
        else:
            merged[key] = deepcopy(value)
    return merged


class ConfigLoader:
    """
    Loads, merges and validates experiment configs.

    Example:
        >>> loader = ConfigLoader()
        >>> config = loader.load_validated("samples/configs/variance_bm.json", {"seed": 7})
        >>> config["model"]["kind"]
        'brownian'
    """

    def __init__(self):
        """Initialize the config loader."""
        self.defaults: Dict = {}
        self.preset: Dict = {}
        self.user_config: Dict = {}
        self.overrides: Dict = {}
        self.merged_config: Dict = {}
        self.layers_applied = []
        self.validation_result: Optional[ValidationResult] = None

    def load_defaults(self) -> Dict:
        """Load project defaults."""
        logger.debug(f"Loading config defaults from {DEFAULTS_CONFIG}")
        self.defaults = self._load_json_file(DEFAULTS_CONFIG).get("values", {})
        return self.defaults

    def load_preset(self, experiment: str) -> Dict:
        """
        Load the preset for one experiment kind.

        Raises:
            ConfigError: If the experiment kind is not supported
        """
        experiment = str(experiment).strip()
        if experiment not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"experiment has unsupported value '{experiment}'. "
                f"Supported experiments: {EXPERIMENT_KINDS}"
            )
        preset_file = PRESETS_DIR / f"{experiment}.json"
        if not preset_file.exists():
            logger.debug(f"No preset for {experiment}")
            self.preset = {}
            return self.preset
        logger.debug(f"Loading {experiment} preset from {preset_file}")
        self.preset = self._load_json_file(preset_file).get("values", {})
        return self.preset

    def load_user_config(self, file_path) -> Dict:
        """
        Load a user config file (a plain JSON object).

        Raises:
            FileNotFoundError: If the file doesn't exist
            ConfigError: If the file is not a JSON object
        """
        data = self._load_json_file(Path(file_path))
        if not isinstance(data, dict):
            raise ConfigError(f"config file {file_path} must contain a JSON object")
        self.user_config = data
        return self.user_config

    def load_rules(self) -> Dict:
        """Load the config validation rules."""
        return self._load_json_file(CONFIG_RULES)

    def load_config(
        self,
        file_path=None,
        overrides: Optional[Dict] = None,
        experiment: Optional[str] = None
    ) -> Dict:
        """
        Load and merge every config layer.

        Args:
            file_path: Optional user config file
            overrides: Highest-priority values (command-line flags)
            experiment: Experiment kind; checked against the file's own value

        Returns:
            Merged config

        Raises:
            ConfigError: If the experiment kind is missing, unsupported or contradictory
        """
        defaults = self.load_defaults()
        user = self.load_user_config(file_path) if file_path else {}
        self.overrides = deepcopy(overrides or {})

        declared = user.get("experiment")
        if experiment and declared and declared != experiment:
            raise ConfigError(
                f"experiment '{declared}' in {file_path} does not match subcommand '{experiment}'"
            )
        kind = experiment or declared
        if not kind:
            raise ConfigError("experiment is required but missing")

        preset = self.load_preset(kind)
        merged = merge_layers(defaults, preset)
        merged = merge_layers(merged, user)
        merged = merge_layers(merged, self.overrides)
        merged["experiment"] = kind

        self.layers_applied = ["defaults"]
        if preset:
            self.layers_applied.append(f"preset_{kind}")
        if user:
            self.layers_applied.append("user")
        if self.overrides:
            self.layers_applied.append("overrides")

        self.merged_config = merged
        logger.debug(f"Merged config layers {self.layers_applied}")
        return self.merged_config

    def validate(self, config: Optional[Dict] = None) -> ValidationResult:
        """Validate a merged config against config_rules.json."""
        config = self.merged_config if config is None else config
        self.validation_result = ValidationEngine().validate(config, self.load_rules())
        return self.validation_result

    def load_validated(self, file_path=None, overrides: Optional[Dict] = None, experiment: Optional[str] = None) -> Dict:
        """
        ``load_config`` followed by validation.

        Raises:
            ConfigError: If any ERROR-level issue is found; the message names each field
        """
        config = self.load_config(file_path, overrides, experiment)
        result = self.validate(config)
        if not result.is_valid():
            raise ConfigError(f"invalid config: {result.error_message()}", result)
        return config

    def _load_json_file(self, file_path: Path) -> Dict:
        """
        Load a JSON file.

        Raises:
            FileNotFoundError: If file doesn't exist
            ConfigError: If JSON is invalid
        """
        if not file_path.exists():
            raise FileNotFoundError(f"Config file not found: {file_path}")

        with open(file_path, "r", encoding="utf-8") as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                logger.error(f"Invalid JSON in {file_path}: {e}")
                raise ConfigError(f"invalid JSON in {file_path}: {e}") from None

    def get_statistics(self) -> Dict:
        """Layer and key counts of the merged config."""
        if not self.merged_config:
            return {}
        return {
            "layers_applied": list(self.layers_applied),
            "top_level_keys": len(self.merged_config),
            "user_keys": sorted(self.user_config),
            "override_keys": sorted(self.overrides),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.merged_config, indent=indent, sort_keys=True)

    def __repr__(self) -> str:
        if not self.merged_config:
            return "ConfigLoader(no config loaded)"
        return (
            f"ConfigLoader(experiment={self.merged_config.get('experiment')}, "
            f"layers={len(self.layers_applied)})"
        )
