"""
Error Collector Module

Collects configuration issues and experiment invariant checks.

Each config issue includes:
- Severity (ERROR, WARNING, INFO)
- Rule ID
- Offending field (dotted path, e.g. "model.theta")
- Human-readable message

Each invariant check additionally records whether it passed, the observed
value and the expected value or range.
"""

from typing import Any, Dict, List, Optional

from config.settings import SEVERITY_LEVELS


def _severity(value: str) -> str:
    severity = value.upper()
    if severity not in SEVERITY_LEVELS:
        raise ValueError(f"unknown severity '{value}', expected one of {SEVERITY_LEVELS}")
    return severity


class ConfigIssue:
    """
    Represents a single configuration problem.
    """

    def __init__(
        self,
        rule_id: str,
        severity: str,
        message: str,
        field: Optional[str] = None,
        expected_value: Optional[str] = None,
        actual_value: Optional[str] = None,
        context: Optional[Dict] = None
    ):
        """
        Initialize a config issue.

        Args:
            rule_id: Identifier of the rule that was violated
            severity: ERROR, WARNING, or INFO
            message: Human-readable message naming the field
            field: Dotted path of the offending field
            expected_value: What was expected
            actual_value: What was found
            context: Additional context information
        """
        self.rule_id = rule_id
        self.severity = _severity(severity)
        self.message = message
        self.field = field
        self.expected_value = expected_value
        self.actual_value = actual_value
        self.context = context or {}

    def to_dict(self) -> Dict:
        return {
            "rule_id": self.rule_id,
            "severity": self.severity,
            "message": self.message,
            "field": self.field,
            "expected_value": self.expected_value,
            "actual_value": self.actual_value,
            "context": self.context
        }

    def __repr__(self) -> str:
        location = f" ({self.field})" if self.field else ""
        return f"[{self.severity}]{location}: {self.message}"


class ErrorCollector:
    """
    Collects and organizes config issues by severity.
    """

    def __init__(self):
        """Initialize the error collector."""
        self.errors: List[ConfigIssue] = []
        self.warnings: List[ConfigIssue] = []
        self.info: List[ConfigIssue] = []

    def add_error(
        self,
        rule_id: str,
        severity: str,
        message: str,
        field: Optional[str] = None,
        expected_value: Optional[str] = None,
        actual_value: Optional[str] = None,
        context: Optional[Dict] = None
    ) -> None:
        """
        Add a config issue.

        Args:
            rule_id: Rule identifier
            severity: ERROR, WARNING, or INFO
            message: Issue message
            field: Dotted field path
            expected_value: Expected value
            actual_value: Actual value
            context: Additional context
        """
        issue = ConfigIssue(
            rule_id=rule_id,
            severity=severity,
            message=message,
            field=field,
            expected_value=expected_value,
            actual_value=actual_value,
            context=context
        )

        if issue.severity == "ERROR":
            self.errors.append(issue)
        elif issue.severity == "WARNING":
            self.warnings.append(issue)
        else:
            self.info.append(issue)

    def get_all_errors(self) -> List[ConfigIssue]:
        """All issues, ERROR first."""
        return self.errors + self.warnings + self.info

    def has_errors(self) -> bool:
        return len(self.errors) > 0

    def get_statistics(self) -> Dict:
        """
        Get issue statistics.

        Returns:
            Dictionary with counts by severity, field and rule
        """
        all_issues = self.get_all_errors()

        field_counts: Dict[str, int] = {}
        rule_counts: Dict[str, int] = {}
        for issue in all_issues:
            if issue.field:
                field_counts[issue.field] = field_counts.get(issue.field, 0) + 1
            rule_counts[issue.rule_id] = rule_counts.get(issue.rule_id, 0) + 1

        return {
            "total_errors": len(all_issues),
            "by_severity": {
                "ERROR": len(self.errors),
                "WARNING": len(self.warnings),
                "INFO": len(self.info)
            },
            "by_field": field_counts,
            "by_rule": rule_counts,
            "is_valid": len(self.errors) == 0
        }

    def to_dict(self) -> Dict:
        return {
            "statistics": self.get_statistics(),
            "errors": [issue.to_dict() for issue in self.get_all_errors()]
        }

    def __len__(self) -> int:
        return len(self.get_all_errors())

    def __repr__(self) -> str:
        stats = self.get_statistics()
        return (
            f"ErrorCollector("
            f"errors={stats['by_severity']['ERROR']}, "
            f"warnings={stats['by_severity']['WARNING']}, "
            f"info={stats['by_severity']['INFO']})"
        )


class InvariantCheck:
    """
    Outcome of one experiment invariant check.
    """

    def __init__(
        self,
        check_id: str,
        severity: str,
        passed: bool,
        message: str,
        observed: Any = None,
        expected: Any = None
    ):
        """
        Args:
            check_id: Stable identifier, e.g. "variance.second_moment"
            severity: ERROR checks decide the exit status, WARNING/INFO are reported only
            passed: Whether the check holds
            message: Human-readable description
            observed: Observed value
            expected: Expected value or [low, high] range
        """
        self.check_id = check_id
        self.severity = _severity(severity)
        self.passed = bool(passed)
        self.message = message
        self.observed = observed
        self.expected = expected

    def to_dict(self) -> Dict:
        return {
            "id": self.check_id,
            "severity": self.severity,
            "pass": self.passed,
            "observed": self.observed,
            "expected": self.expected,
            "message": self.message
        }

    def __repr__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{self.severity}] {status} {self.check_id}: {self.message}"


class CheckCollector:
    """
    Collects invariant checks in the order they were run.

    Example:
        >>> checks = CheckCollector()
        >>> checks.add("levy.second_moment", "ERROR", True, "E[A^2] matches T^2/4", 0.2497, 0.25)
        >>> checks.failed()
        []
    """

    def __init__(self):
        self.checks: List[InvariantCheck] = []

    def add(
        self,
        check_id: str,
        severity: str,
        passed: bool,
        message: str,
        observed: Any = None,
        expected: Any = None
    ) -> InvariantCheck:
        check = InvariantCheck(check_id, severity, passed, message, observed, expected)
        self.checks.append(check)
        return check

    def add_within(
        self,
        check_id: str,
        observed: float,
        low: float,
        high: float,
        message: str,
        severity: str = "ERROR"
    ) -> InvariantCheck:
        """Add a check that passes when low <= observed <= high."""
        return self.add(check_id, severity, low <= observed <= high, message, observed, [low, high])

    def failed(self, severity: Optional[str] = "ERROR") -> List[InvariantCheck]:
        """Failed checks of one severity (all severities when None)."""
        return [
            check for check in self.checks
            if not check.passed and (severity is None or check.severity == severity)
        ]

    def status(self) -> str:
        if self.failed("ERROR"):
            return "FAIL"
        if self.failed("WARNING"):
            return "PASS_WITH_WARNINGS"
        return "PASS"

    def get_statistics(self) -> Dict:
        return {
            "total_checks": len(self.checks),
            "passed": sum(1 for check in self.checks if check.passed),
            "failed_by_severity": {
                level: len(self.failed(level)) for level in SEVERITY_LEVELS
            },
            "status": self.status()
        }

    def to_list(self) -> List[Dict]:
        return [check.to_dict() for check in self.checks]

    def __len__(self) -> int:
        return len(self.checks)

    def __repr__(self) -> str:
        stats = self.get_statistics()
        return f"CheckCollector(checks={stats['total_checks']}, status={stats['status']})"
