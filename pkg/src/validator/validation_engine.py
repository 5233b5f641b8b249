"""
Config Validation Engine

Runs every config rule category and produces a ValidationResult.

Usage:
    from src.configs.config_loader import ConfigLoader
    from src.validator.validation_engine import ValidationEngine

    loader = ConfigLoader()
    config = loader.load_config("samples/configs/variance_bm.json")

    engine = ValidationEngine()
    result = engine.validate(config, loader.load_rules())

    if result.is_valid():
        print("✓ config is valid")
    else:
        for issue in result.get_errors():
            print(issue)
"""

import logging
import time
from typing import Dict

from .error_collector import ErrorCollector
from .rule_evaluators import (
    AllowedKeysValidator,
    ConditionalRuleValidator,
    CrossFieldValidator,
    FieldRuleValidator,
)

logger = logging.getLogger(__name__)


class ValidationResult:
    """
    Represents the result of validating one config.
    """

    def __init__(
        self,
        error_collector: ErrorCollector,
        config: Dict,
        rules: Dict,
        validation_time: float
    ):
        """
        Args:
            error_collector: ErrorCollector with all issues
            config: The validated config
            rules: Rules that were applied
            validation_time: Time taken to validate (seconds)
        """
        self.error_collector = error_collector
        self.config = config
        self.rules = rules
        self.validation_time = validation_time

    def is_valid(self) -> bool:
        """True when there are no ERROR-level issues."""
        return not self.error_collector.has_errors()

    def error_count(self) -> int:
        return len(self.error_collector.errors)

    def warning_count(self) -> int:
        return len(self.error_collector.warnings)

    def get_errors(self):
        return self.error_collector.errors

    def get_warnings(self):
        return self.error_collector.warnings

    def get_all_issues(self):
        return self.error_collector.get_all_errors()

    def error_message(self) -> str:
        """One line per ERROR issue, each naming its field."""
        return "; ".join(issue.message for issue in self.get_errors())

    def get_summary(self) -> Dict:
        """
        Get validation summary.

        Returns:
            Dictionary with status and issue statistics
        """
        return {
            "experiment": self.config.get("experiment"),
            "rules_applied": self.rules.get("rules_info", {}).get("name"),
            "status": {
                "is_valid": self.is_valid(),
                "errors": self.error_count(),
                "warnings": self.warning_count()
            },
            "issue_statistics": self.error_collector.get_statistics()
        }

    def to_dict(self) -> Dict:
        return {
            "summary": self.get_summary(),
            "issues": [issue.to_dict() for issue in self.get_all_issues()]
        }

    def __repr__(self) -> str:
        status = "VALID" if self.is_valid() else "INVALID"
        return (
            f"ValidationResult("
            f"status={status}, "
            f"errors={self.error_count()}, "
            f"warnings={self.warning_count()})"
        )


class ValidationEngine:
    """
    Orchestrates the config validators.
    """

    def __init__(self):
        self.error_collector = None

    def validate(self, config: Dict, rules: Dict) -> ValidationResult:
        """
        Validate a merged config against the rule file.

        Args:
            config: Merged config from ConfigLoader
            rules: Rules from ConfigLoader.load_rules()

        Returns:
            ValidationResult with all issues

        Example:
            >>> result = ValidationEngine().validate({"experiment": "variance"}, rules)
            >>> result.is_valid()
        """
        start = time.perf_counter()
        self.error_collector = ErrorCollector()

        logger.debug(f"Validating config for experiment {config.get('experiment')!r}")

        self._validate_category(
            AllowedKeysValidator(self.error_collector), config, rules.get("allowed_keys", {}), "Allowed Keys"
        )
        self._validate_category(
            FieldRuleValidator(self.error_collector), config, rules.get("field_rules", []), "Field Rules"
        )
        self._validate_category(
            ConditionalRuleValidator(self.error_collector),
            config,
            rules.get("conditional_rules", []),
            "Conditional Rules"
        )
        self._validate_category(
            CrossFieldValidator(self.error_collector),
            config,
            rules.get("cross_field_rules", []),
            "Cross-Field Rules"
        )

        validation_time = time.perf_counter() - start
        stats = self.error_collector.get_statistics()
        logger.info(
            f"Config validation: {stats['by_severity']['ERROR']} errors, "
            f"{stats['by_severity']['WARNING']} warnings ({validation_time:.3f}s)"
        )
        for warning in self.error_collector.warnings:
            logger.warning(warning.message)

        return ValidationResult(self.error_collector, config, rules, validation_time)

    def _validate_category(self, validator, config: Dict, rules, category_name: str) -> None:
        """
        Run one validator category; a crash becomes a SYSTEM_ERROR issue.
        """
        if not rules:
            logger.debug(f"No rules for {category_name}, skipping")
            return

        try:
            validator.validate(config, rules)
        except Exception as e:
            logger.error(f"Error during {category_name} validation: {e}")
            self.error_collector.add_error(
                rule_id="SYSTEM_ERROR",
                severity="ERROR",
                message=f"System error during {category_name} validation: {e}"
            )

    def __repr__(self) -> str:
        return "ValidationEngine()"
