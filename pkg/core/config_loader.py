"""Analysis configuration loader with YAML/JSON support."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import ValidationError

from models.config import AnalysisConfig

logger = logging.getLogger(__name__)


class ConfigLoader:
    """Loads and validates lochaus configuration files."""

    DEFAULT_YAML_FILE = "lochaus_config.yaml"
    YAML_SUFFIXES = (".yaml", ".yml")

    def __init__(self):
        self.config: Optional[AnalysisConfig] = None
        self.errors: List[str] = []

    def load(self, file_path: Path) -> Optional[AnalysisConfig]:
        """
        Load a configuration file, choosing the parser by extension.

        Args:
            file_path: ``.yaml``, ``.yml`` or ``.json`` file

        Returns:
            Validated configuration, or None with the reason in ``get_errors()``
        """
        self.config = None
        self.errors = []
        file_path = Path(file_path)
        if not file_path.exists():
            self._fail(f"File not found: {file_path}")
            return None

        logger.info(f"Loading configuration from {file_path}")
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                if file_path.suffix.lower() in self.YAML_SUFFIXES:
                    data = yaml.safe_load(f)
                elif file_path.suffix.lower() == ".json":
                    data = json.load(f)
                else:
                    self._fail(f"Unsupported configuration format '{file_path.suffix}' (use .yaml or .json)")
                    return None
        except yaml.YAMLError as e:
            self._fail(f"YAML syntax error in {file_path}: {e}")
            return None
        except json.JSONDecodeError as e:
            self._fail(f"JSON syntax error in {file_path}: {e}")
            return None

        if data is None:
            data = {}
        if not isinstance(data, dict):
            self._fail(f"Configuration in {file_path} must be a mapping, got {type(data).__name__}")
            return None
        return self.validate(data, file_path)

    def validate(self, data: Dict[str, Any], source: Any = "<dict>") -> Optional[AnalysisConfig]:
        """Validate a mapping against the configuration model."""
        try:
            self.config = AnalysisConfig(**data)
        except ValidationError as e:
            self._fail(self._format_validation_error(e, source))
            return None
        logger.info(f"Configuration from {source} is valid")
        return self.config

    def _fail(self, message: str) -> None:
        logger.error(message)
        self.errors.append(message)

    def _format_validation_error(self, error: ValidationError, source: Any) -> str:
        """Format Pydantic validation errors one per line."""
        error_lines = [f"Validation errors in {source}:"]
        for err in error.errors():
            location = " -> ".join(str(loc) for loc in err['loc'])
            error_lines.append(f"  • {location}: {err['msg']}")
        return "\n".join(error_lines)

    def get_errors(self) -> List[str]:
        """Get list of loading errors."""
        return self.errors

    def merge(self, overrides: Dict[str, Any]) -> AnalysisConfig:
        """
        Apply explicit flag values on top of the loaded configuration.

        ``None`` values mean the flag was not given. Raises ValidationError
        when the merged values are invalid.
        """
        base = self.config.model_dump() if self.config is not None else {}
        base.update({k: v for k, v in overrides.items() if v is not None})
        return AnalysisConfig(**base)

    def export_to_yaml(self, output_path: Path, config: Optional[AnalysisConfig] = None) -> bool:
        """
        Write a configuration to YAML.

        Args:
            output_path: Target file
            config: Configuration to write; the loaded one when None

        Returns:
            True if successful, False otherwise
        """
        config = config if config is not None else self.config
        if config is None:
            logger.warning("No configuration to export")
            return False
        try:
            data = config.model_dump(mode='json', exclude_none=True)
            with open(output_path, 'w', encoding='utf-8') as f:
                yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False, allow_unicode=True)
        except OSError as e:
            self._fail(f"Failed to export configuration to {output_path}: {e}")
            return False
        logger.info(f"Exported configuration to {output_path}")
        return True
