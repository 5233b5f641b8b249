"""
Report Generator Module

Main interface for writing the result bundle of an experiment run.

Usage:
    from src.reporting.report_generator import ExperimentOutcome, ReportGenerator

    outcome = ExperimentOutcome("variance", config, results, checks)
    outcome.tables["variance_moments.csv"] = csv_text

    generator = ReportGenerator(outcome)
    print(generator.generate_dashboard())
    files = generator.save_all("output")
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from src.validator.error_collector import CheckCollector
from .formatters import DashboardFormatter, JSONFormatter

logger = logging.getLogger(__name__)


@dataclass
class ExperimentOutcome:
    """
    Everything one run produces.

    Attributes:
        experiment: Experiment kind
        config: Merged, validated config
        results: JSON-ready result tree
        checks: Invariant checks
        tables: File name -> CSV text
        svg: SVG plot text, if one was requested
    """

    experiment: str
    config: Dict
    results: Dict
    checks: CheckCollector
    tables: Dict[str, str] = field(default_factory=dict)
    svg: Optional[str] = None

    @property
    def status(self) -> str:
        return self.checks.status()


class ReportGenerator:
    """
    Writes result bundles from experiment outcomes.
    """

    def __init__(self, outcome: ExperimentOutcome):
        """
        Args:
            outcome: ExperimentOutcome from the runner
        """
        self.outcome = outcome
        self.files: Dict[str, str] = {}

    def generate_json_report(self, indent: int = 2) -> str:
        """
        Generate the JSON summary.

        Returns:
            JSON string
        """
        outcome = self.outcome
        return JSONFormatter.format_report(
            outcome.experiment,
            outcome.config,
            outcome.results,
            outcome.checks.to_list(),
            outcome.status,
            indent=indent,
        )

    def generate_dashboard(self) -> str:
        """
        Generate a summary dashboard of the checks and written files.

        Returns:
            Dashboard string
        """
        return DashboardFormatter.format_report(self.outcome.experiment, self.outcome.checks, self.files)

    def save_report(self, output_path, content: str) -> str:
        """
        Save one file with ``\\n`` line endings.

        Args:
            output_path: Path where the file should be saved
            content: File content

        Returns:
            The path written, as a string
        """
        output_file = Path(output_path)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        logger.debug(f"Wrote {output_file} ({len(content)} chars)")
        return str(output_file)

    def save_all(self, base_path) -> Dict[str, str]:
        """
        Save the whole bundle: tables, SVG (if any) and the JSON summary.

        Args:
            base_path: Output directory

        Returns:
            Dictionary mapping file kind to file path

        Example:
            >>> generator.save_all("output")
            {'json': 'output/variance_summary.json', 'variance_moments.csv': 'output/variance_moments.csv'}
        """
        base_dir = Path(base_path)
        base_dir.mkdir(parents=True, exist_ok=True)
        experiment = self.outcome.experiment

        self.files = {}
        for name in sorted(self.outcome.tables):
            self.files[name] = self.save_report(base_dir / name, self.outcome.tables[name])
        if self.outcome.svg is not None:
            self.files["svg"] = self.save_report(base_dir / f"{experiment}_tail.svg", self.outcome.svg)
        self.files["json"] = self.save_report(base_dir / f"{experiment}_summary.json", self.generate_json_report())

        logger.info(f"Saved {len(self.files)} file(s) to {base_dir}")
        return dict(self.files)

    def __repr__(self) -> str:
        return (
            f"ReportGenerator("
            f"experiment={self.outcome.experiment}, "
            f"status={self.outcome.status})"
        )
