"""
Rule Evaluators Module

Contains validators for each config rule category:
- Allowed keys (unknown keys are rejected)
- Field rules (type, bounds, allowed values)
- Conditional rules (if a field has a value, other fields are required)
- Cross-field rules (relations between several fields)

Fields are addressed by dotted paths ("model.theta"). A field that is
absent or null is "unset": only a ``required`` validation reports it.
"""

import math
from typing import Any, Dict, List, Optional, Tuple

from .error_collector import ErrorCollector

_MISSING = object()


def get_field(config: Dict, path: str) -> Any:
    """Value at a dotted path, or None when any part is missing."""
    node: Any = config
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def _is_integer(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return (isinstance(value, (int, float)) and not isinstance(value, bool)) and math.isfinite(value)


def word_letters(value: Any) -> Optional[Tuple[int, ...]]:
    """
    Letters of a word given as "12", "1,2" or [1, 2]; None if malformed.
    """
    if isinstance(value, list):
        if value and all(_is_integer(letter) for letter in value):
            return tuple(value)
        return None
    if not isinstance(value, str) or not value.strip():
        return None
    text = value.strip()
    parts = text.split(",") if "," in text else list(text)
    if not all(part.strip().isdigit() for part in parts):
        return None
    return tuple(int(part) for part in parts)


def _applies(rule: Dict, config: Dict) -> bool:
    experiments = rule.get("applies_to_experiments", [])
    return not experiments or config.get("experiment") in experiments


class AllowedKeysValidator:
    """Rejects keys that no rule file declares."""

    def __init__(self, error_collector: ErrorCollector):
        """
        Args:
            error_collector: ErrorCollector instance to report violations
        """
        self.error_collector = error_collector

    def validate(self, config: Dict, allowed: Dict[str, List[str]]) -> None:
        """
        Args:
            config: Merged experiment config
            allowed: Section name ("top" for the root) -> allowed keys
        """
        self._check_section(config, allowed.get("top", []), "")
        for section, keys in allowed.items():
            if section == "top":
                continue
            value = config.get(section)
            if value is None:
                continue
            if not isinstance(value, dict):
                self.error_collector.add_error(
                    rule_id="CFG_SECTION_TYPE",
                    severity="ERROR",
                    message=f"{section} must be an object, got {type(value).__name__}",
                    field=section,
                    expected_value="object",
                    actual_value=repr(value)
                )
                continue
            self._check_section(value, keys, f"{section}.")

    def _check_section(self, section: Dict, keys: List[str], prefix: str) -> None:
        for key in sorted(section):
            if key not in keys:
                self.error_collector.add_error(
                    rule_id="CFG_UNKNOWN_KEY",
                    severity="ERROR",
                    message=f"unknown config key '{prefix}{key}'",
                    field=f"{prefix}{key}",
                    expected_value=f"one of {sorted(keys)}"
                )


class FieldRuleValidator:
    """Validates single-field rules."""

    def __init__(self, error_collector: ErrorCollector):
        """
        Args:
            error_collector: ErrorCollector instance to report violations
        """
        self.error_collector = error_collector

    def validate(self, config: Dict, rules: List[Dict]) -> None:
        """
        Validate field rules.

        Args:
            config: Merged experiment config
            rules: List of field rules
        """
        for rule in rules:
            if not _applies(rule, config):
                continue
            field = rule["field"]
            validations = rule.get("validations", {})
            value = get_field(config, field)

            if value is None:
                if validations.get("required"):
                    self._report(rule, f"{field} is required but missing")
                continue

            if not self._check_type(rule, value, validations.get("type")):
                continue

            if isinstance(value, list):
                self._check_length(rule, value, validations)
                for position, item in enumerate(value):
                    self._check_value(rule, item, validations, f"{field}[{position}]")
            else:
                self._check_value(rule, value, validations, field)

    def _report(self, rule: Dict, message: str, expected=None, actual=None) -> None:
        self.error_collector.add_error(
            rule_id=rule["rule_id"],
            severity=rule.get("severity", "ERROR"),
            message=message,
            field=rule["field"],
            expected_value=None if expected is None else str(expected),
            actual_value=None if actual is None else repr(actual)
        )

    def _check_type(self, rule: Dict, value: Any, expected: Optional[str]) -> bool:
        """
        Check the declared type.

        Returns:
            True if the value has the right type (or no type is declared)
        """
        checks = {
            "string": lambda v: isinstance(v, str),
            "integer": _is_integer,
            "number": _is_number,
            "boolean": lambda v: isinstance(v, bool),
            "word": lambda v: word_letters(v) is not None,
            "integer_list": lambda v: isinstance(v, list) and all(_is_integer(x) for x in v),
            "number_list": lambda v: isinstance(v, list) and all(_is_number(x) for x in v),
        }
        if expected is None:
            return True
        if expected not in checks:
            raise ValueError(f"rule {rule['rule_id']} declares unknown type '{expected}'")
        if checks[expected](value):
            return True
        self._report(rule, f"{rule['field']} must be of type {expected}, got {value!r}", expected, value)
        return False

    def _check_length(self, rule: Dict, value: List, validations: Dict) -> None:
        min_length = validations.get("min_length")
        max_length = validations.get("max_length")
        if min_length is not None and len(value) < min_length:
            self._report(
                rule,
                f"{rule['field']} needs at least {min_length} entries, got {len(value)}",
                f"min length {min_length}",
                value
            )
        if max_length is not None and len(value) > max_length:
            self._report(
                rule,
                f"{rule['field']} allows at most {max_length} entries, got {len(value)}",
                f"max length {max_length}",
                value
            )

    def _check_value(self, rule: Dict, value: Any, validations: Dict, label: str) -> None:
        allowed_values = validations.get("allowed_values")
        if allowed_values is not None and value not in allowed_values:
            self._report(
                rule,
                f"{label} has invalid value {value!r} (allowed: {', '.join(map(str, allowed_values))})",
                f"one of {allowed_values}",
                value
            )
            return

        if not _is_number(value):
            return
        bounds = [
            ("min", lambda v, b: v >= b, ">="),
            ("max", lambda v, b: v <= b, "<="),
            ("exclusive_min", lambda v, b: v > b, ">"),
            ("exclusive_max", lambda v, b: v < b, "<"),
        ]
        for key, holds, symbol in bounds:
            bound = validations.get(key)
            if bound is not None and not holds(value, bound):
                self._report(
                    rule,
                    f"{label} must be {symbol} {bound} (got {value!r})",
                    f"{symbol} {bound}",
                    value
                )


class ConditionalRuleValidator:
    """Validates conditional (if-then) rules."""

    def __init__(self, error_collector: ErrorCollector):
        """
        Args:
            error_collector: ErrorCollector instance to report violations
        """
        self.error_collector = error_collector

    def validate(self, config: Dict, rules: List[Dict]) -> None:
        """
        Validate conditional rules.

        A condition names a field and one of ``equals``, ``in`` or
        ``at_most``. When it holds, every field in ``then.required_fields``
        must be set; a rule without required fields reports its message
        whenever the condition holds.
        """
        for rule in rules:
            if not _applies(rule, config):
                continue
            condition = rule.get("condition", {})
            if not self._condition_met(config, condition):
                continue

            then_clause = rule.get("then", {})
            required = then_clause.get("required_fields", [])
            message = then_clause.get("message")

            if not required:
                self.error_collector.add_error(
                    rule_id=rule["rule_id"],
                    severity=rule.get("severity", "WARNING"),
                    message=message or f"condition on {condition.get('field')} holds",
                    field=condition.get("field"),
                    actual_value=repr(get_field(config, condition.get("field", "")))
                )
                continue

            for field in required:
                if get_field(config, field) is None:
                    self.error_collector.add_error(
                        rule_id=rule["rule_id"],
                        severity=rule.get("severity", "ERROR"),
                        message=message or (
                            f"{field} is required when {condition.get('field')} is "
                            f"{get_field(config, condition.get('field', ''))!r}"
                        ),
                        field=field,
                        context={"condition": condition}
                    )

    @staticmethod
    def _condition_met(config: Dict, condition: Dict) -> bool:
        value = get_field(config, condition.get("field", ""))
        if value is None:
            return False
        if "equals" in condition:
            return value == condition["equals"]
        if "in" in condition:
            return value in condition["in"]
        if "at_most" in condition:
            return _is_number(value) and value <= condition["at_most"]
        return False


class CrossFieldValidator:
    """Validates rules that relate several fields."""

    def __init__(self, error_collector: ErrorCollector):
        """
        Args:
            error_collector: ErrorCollector instance to report violations
        """
        self.error_collector = error_collector

    def validate(self, config: Dict, rules: List[Dict]) -> None:
        """
        Validate cross-field rules.

        Args:
            config: Merged experiment config
            rules: List of cross-field rules
        """
        handlers = {
            "min_multiple": self._validate_min_multiple,
            "strictly_increasing": self._validate_increasing,
            "ordered_pair": self._validate_ordered_pair,
            "word_letters": self._validate_word_letters,
            "word_length": self._validate_word_length,
            "min_value": self._validate_min_value,
        }
        for rule in rules:
            if not _applies(rule, config):
                continue
            logic = rule.get("validation_logic", {})
            handler = handlers.get(logic.get("type"))
            if handler is None:
                raise ValueError(f"rule {rule['rule_id']} has unknown cross-field type {logic.get('type')!r}")
            handler(rule, config, logic)

    def _report(self, rule: Dict, field: str, message: str, expected=None, actual=None) -> None:
        self.error_collector.add_error(
            rule_id=rule["rule_id"],
            severity=rule.get("severity", "ERROR"),
            message=rule.get("message") or message,
            field=field,
            expected_value=None if expected is None else str(expected),
            actual_value=None if actual is None else repr(actual)
        )

    def _validate_min_multiple(self, rule: Dict, config: Dict, logic: Dict) -> None:
        """field >= factor * max(of)."""
        field, of, factor = logic["field"], logic["of"], logic.get("factor", 1)
        value, others = get_field(config, field), get_field(config, of)
        if not _is_number(value) or not isinstance(others, list) or not others:
            return
        if not all(_is_number(x) for x in others):
            return
        needed = factor * max(others)
        if value < needed:
            self._report(
                rule, field,
                f"{field}={value} must be at least {factor} * max({of}) = {needed}",
                f">= {needed}", value
            )

    def _validate_increasing(self, rule: Dict, config: Dict, logic: Dict) -> None:
        field = logic["field"]
        value = get_field(config, field)
        if not isinstance(value, list) or not all(_is_number(x) for x in value):
            return
        if any(b <= a for a, b in zip(value, value[1:])):
            self._report(rule, field, f"{field} must be strictly increasing, got {value}", "strictly increasing", value)

    def _validate_ordered_pair(self, rule: Dict, config: Dict, logic: Dict) -> None:
        field = logic["field"]
        value = get_field(config, field)
        if not isinstance(value, list) or len(value) != 2 or not all(_is_number(x) for x in value):
            return
        if not value[0] < value[1]:
            self._report(rule, field, f"{field} must satisfy low < high, got {value}", "low < high", value)

    def _validate_word_letters(self, rule: Dict, config: Dict, logic: Dict) -> None:
        word_field, d_field = logic["word"], logic["d"]
        letters = word_letters(get_field(config, word_field))
        d = get_field(config, d_field)
        if letters is None or not _is_integer(d):
            return
        bad = [letter for letter in letters if not 1 <= letter <= d]
        if bad:
            self._report(
                rule, word_field,
                f"{word_field} uses letters {bad} outside 1..{d_field}={d}",
                f"letters in 1..{d}", get_field(config, word_field)
            )

    def _validate_word_length(self, rule: Dict, config: Dict, logic: Dict) -> None:
        word_field, m_field = logic["word"], logic["m"]
        letters = word_letters(get_field(config, word_field))
        m = get_field(config, m_field)
        if letters is None or not _is_integer(m):
            return
        if len(letters) > m:
            self._report(
                rule, word_field,
                f"{word_field} has length {len(letters)} > {m_field}={m}",
                f"length <= {m}", get_field(config, word_field)
            )

    def _validate_min_value(self, rule: Dict, config: Dict, logic: Dict) -> None:
        field, minimum = logic["field"], logic["min"]
        value = get_field(config, field)
        if _is_number(value) and value < minimum:
            self._report(rule, field, f"{field} must be >= {minimum} here, got {value}", f">= {minimum}", value)
