"""
Report Formatters Module

Provides formatters for the result files of an experiment run:
- Tensor, Lie-coordinate, Path and TailCurve CSV
- JSON summary
- SVG tail plot
- Text report of config issues and a summary dashboard of checks

Every formatter is a pure function of its input: floats are written with
``repr`` precision, rows in a fixed order and lines end in ``\\n``, so
identical input gives byte-identical output.
"""

import csv
import json
import math
from enum import Enum
from io import StringIO
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config.settings import SCHEMA_VERSION
from src.algebra.lie_algebra import LieCoordinates
from src.algebra.tensor_algebra import TruncatedTensor, coordinate_labels
from src.exceptions import DomainError
from src.experiments.statistics import TailCurve, reference_tail_curve
from src.signature.signature_engine import Path


def format_float(value: float) -> str:
    """Shortest text that parses back to the same double."""
    return repr(float(value))


def _writer(output: StringIO):
    return csv.writer(output, lineterminator="\n")


def _with_ids(path_ids: Optional[Sequence[str]], count: int) -> Optional[List[str]]:
    if path_ids is None:
        return None
    if len(path_ids) != count:
        raise DomainError(f"{len(path_ids)} path ids given for {count} rows")
    return [str(path_id) for path_id in path_ids]


class TensorCSVFormatter:
    """
    Formats truncated tensors as CSV.

    Header ``d,m,S(),S(1),...,S(d,...,d)``; a leading ``path_id`` column
    is added when ids are given.
    """

    @staticmethod
    def format_report(tensors: Sequence[TruncatedTensor], path_ids: Optional[Sequence[str]] = None) -> str:
        if not tensors:
            raise DomainError("no tensors to format")
        d, m = tensors[0].d, tensors[0].m
        if any((t.d, t.m) != (d, m) for t in tensors):
            raise DomainError("all tensors in one CSV must share d and m")
        ids = _with_ids(path_ids, len(tensors))

        output = StringIO()
        writer = _writer(output)
        header = ["d", "m"] + coordinate_labels(d, m)
        writer.writerow((["path_id"] if ids else []) + header)
        for row, tensor in enumerate(tensors):
            fields = [str(d), str(m)] + [format_float(x) for x in tensor.coords]
            writer.writerow(([ids[row]] if ids else []) + fields)
        return output.getvalue()


class LieCSVFormatter:
    """Formats Lyndon coordinates as ``degree,word,coefficient`` rows."""

    @staticmethod
    def format_report(elements: Sequence[LieCoordinates], path_ids: Optional[Sequence[str]] = None) -> str:
        if not elements:
            raise DomainError("no Lie elements to format")
        ids = _with_ids(path_ids, len(elements))

        output = StringIO()
        writer = _writer(output)
        writer.writerow((["path_id"] if ids else []) + ["degree", "word", "coefficient"])
        for row, element in enumerate(elements):
            for degree, terms in enumerate(element.by_degree(), start=1):
                for word, value in terms:
                    fields = [str(degree), str(word), format_float(value)]
                    writer.writerow(([ids[row]] if ids else []) + fields)
        return output.getvalue()


class PathCSVFormatter:
    """
    Formats paths in the layouts PathParser reads.

    single:  ``t,x1,...,xd``
    stacked: ``path_id,t,x1,...,xd``
    """

    @staticmethod
    def format_single(path: Path) -> str:
        output = StringIO()
        writer = _writer(output)
        writer.writerow(["t"] + [f"x{j}" for j in range(1, path.d + 1)])
        for t, row in zip(path.times, path.values):
            writer.writerow([format_float(t)] + [format_float(x) for x in row])
        return output.getvalue()

    @staticmethod
    def format_stacked(paths: Sequence[Path], path_ids: Optional[Sequence[str]] = None) -> str:
        if not paths:
            raise DomainError("no paths to format")
        d = paths[0].d
        if any(p.d != d for p in paths):
            raise DomainError("stacked paths must share the dimension d")
        ids = _with_ids(path_ids, len(paths)) or [str(i) for i in range(len(paths))]

        output = StringIO()
        writer = _writer(output)
        writer.writerow(["path_id", "t"] + [f"x{j}" for j in range(1, d + 1)])
        for path_id, path in zip(ids, paths):
            for t, row in zip(path.times, path.values):
                writer.writerow([path_id, format_float(t)] + [format_float(x) for x in row])
        return output.getvalue()


class TailCurveCSVFormatter:
    """Formats tail curves as ``label,threshold,survival,std_err,sample_count`` rows."""

    COLUMNS = ["label", "threshold", "survival", "std_err", "sample_count"]

    @staticmethod
    def format_report(curves: Sequence[TailCurve]) -> str:
        if not curves:
            raise DomainError("no tail curves to format")
        output = StringIO()
        writer = _writer(output)
        writer.writerow(TailCurveCSVFormatter.COLUMNS)
        for curve in curves:
            for row in curve.to_rows():
                writer.writerow([
                    row["label"],
                    format_float(row["threshold"]),
                    format_float(row["survival"]),
                    format_float(row["std_err"]),
                    str(row["sample_count"]),
                ])
        return output.getvalue()


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


class TableCSVFormatter:
    """Formats a list of flat dicts as CSV with the given columns."""

    @staticmethod
    def format_report(rows: Sequence[Dict], columns: Sequence[str]) -> str:
        output = StringIO()
        writer = _writer(output)
        writer.writerow(list(columns))
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
        return output.getvalue()


def to_jsonable(value: Any) -> Any:
    """
    Plain JSON types for a result tree.

    numpy scalars and arrays become Python numbers and lists, tuples become
    lists, enums their values; non-finite floats become null.
    """
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class JSONFormatter:
    """
    Formats the JSON summary of a run.
    """

    @staticmethod
    def format_report(
        experiment: str,
        config: Dict,
        results: Dict,
        checks: List[Dict],
        status: str,
        indent: int = 2
    ) -> str:
        """
        Generate the JSON summary.

        Returns:
            ``{schema_version, experiment, config, results, checks, status}``
            with sorted keys and a trailing newline
        """
        summary = {
            "schema_version": SCHEMA_VERSION,
            "experiment": experiment,
            "config": config,
            "results": results,
            "checks": checks,
            "status": status,
        }
        return json.dumps(to_jsonable(summary), indent=indent, sort_keys=True, allow_nan=False) + "\n"


class SVGFormatter:
    """
    Log-linear plot of survival curves.

    Coordinate mapping (fixed):
        plot box     x in [70, 610], y in [30, 370] of a 760 x 420 canvas
        horizontal   t in [0, t_max] mapped linearly
        vertical     log10(survival) in [-6, 0] mapped linearly, 0 at the top

    Points with survival below 1e-6 are dropped. Reference curves
    exp(-t^(2/k)) are sampled at REFERENCE_POINTS evenly spaced t.
    """

    WIDTH, HEIGHT = 760, 420
    LEFT, RIGHT, TOP, BOTTOM = 70, 610, 30, 370
    LOG_FLOOR = -6
    REFERENCE_POINTS = 200
    DEFAULT_T_MAX = 6.0
    PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]

    @classmethod
    def _x(cls, t: float, t_max: float) -> float:
        return cls.LEFT + (cls.RIGHT - cls.LEFT) * t / t_max

    @classmethod
    def _y(cls, survival: float) -> float:
        level = math.log10(survival)
        return cls.TOP + (cls.BOTTOM - cls.TOP) * level / cls.LOG_FLOOR

    @classmethod
    def _polyline(cls, curve: TailCurve, t_max: float, color: str, dashed: bool) -> Optional[str]:
        points = [
            f"{cls._x(t, t_max):.3f},{cls._y(s):.3f}"
            for t, s in zip(curve.thresholds, curve.survival)
            if 0.0 <= t <= t_max and s >= 10.0 ** cls.LOG_FLOOR
        ]
        if len(points) < 2:
            return None
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        return (
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
            f'points="{" ".join(points)}"/>'
        )

    @classmethod
    def format_plot(
        cls,
        curves: Sequence[TailCurve],
        reference_ks: Sequence[int] = (),
        t_max: Optional[float] = None,
        title: str = "P(|F| >= t)"
    ) -> str:
        """
        Render empirical curves (solid) and reference curves (dashed).

        Args:
            curves: Empirical tail curves
            reference_ks: Levels k of the reference curves exp(-t^(2/k))
            t_max: Right end of the t axis; the largest empirical threshold
                (or DEFAULT_T_MAX for a reference-only plot) when omitted
            title: Plot title

        Raises:
            DomainError: If there is nothing to plot
        """
        if not curves and not reference_ks:
            raise DomainError("emit_plot needs at least one curve")
        if t_max is None:
            t_max = max((float(c.thresholds[-1]) for c in curves), default=cls.DEFAULT_T_MAX)
        if not t_max > 0:
            raise DomainError(f"plot range must be positive, got t_max={t_max}")

        grid = np.linspace(0.0, t_max, cls.REFERENCE_POINTS)
        series = [(curve, False) for curve in curves]
        series += [(reference_tail_curve(int(k), grid), True) for k in reference_ks]

        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{cls.WIDTH}" height="{cls.HEIGHT}" '
            f'viewBox="0 0 {cls.WIDTH} {cls.HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{cls.WIDTH}" height="{cls.HEIGHT}" fill="white"/>',
            f'<text x="{(cls.LEFT + cls.RIGHT) / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
            f'{_escape(title)}</text>',
            f'<rect x="{cls.LEFT}" y="{cls.TOP}" width="{cls.RIGHT - cls.LEFT}" '
            f'height="{cls.BOTTOM - cls.TOP}" fill="none" stroke="black"/>',
        ]

        for exponent in range(cls.LOG_FLOOR, 1):
            y = cls._y(10.0 ** exponent)
            lines.append(f'<line x1="{cls.LEFT}" y1="{y:.3f}" x2="{cls.RIGHT}" y2="{y:.3f}" stroke="#dddddd"/>')
            lines.append(f'<text x="{cls.LEFT - 6}" y="{y + 4:.3f}" text-anchor="end">1e{exponent}</text>')
        for tick in np.linspace(0.0, t_max, 6):
            x = cls._x(tick, t_max)
            lines.append(f'<line x1="{x:.3f}" y1="{cls.BOTTOM}" x2="{x:.3f}" y2="{cls.BOTTOM + 5}" stroke="black"/>')
            lines.append(f'<text x="{x:.3f}" y="{cls.BOTTOM + 18}" text-anchor="middle">{tick:.3g}</text>')
        lines.append(
            f'<text x="{(cls.LEFT + cls.RIGHT) / 2:.1f}" y="{cls.HEIGHT - 12}" text-anchor="middle">t</text>'
        )

        for position, (curve, dashed) in enumerate(series):
            color = cls.PALETTE[position % len(cls.PALETTE)]
            polyline = cls._polyline(curve, t_max, color, dashed)
            if polyline:
                lines.append(polyline)
            y = cls.TOP + 14 * position + 8
            dash = ' stroke-dasharray="6,4"' if dashed else ""
            lines.append(
                f'<line x1="{cls.RIGHT + 10}" y1="{y}" x2="{cls.RIGHT + 30}" y2="{y}" '
                f'stroke="{color}" stroke-width="1.5"{dash}/>'
            )
            lines.append(f'<text x="{cls.RIGHT + 34}" y="{y + 4}">{_escape(curve.label or "curve")}</text>')

        lines.append("</svg>")
        return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class TextFormatter:
    """
    Formats config validation results as human-readable text.
    """

    @staticmethod
    def format_report(validation_result) -> str:
        """
        Generate a text report of config issues.

        Args:
            validation_result: ValidationResult instance

        Returns:
            Formatted text report as string
        """
        summary = validation_result.get_summary()
        issues = validation_result.get_all_issues()

        lines = []
        lines.append("=" * 70)
        lines.append("CONFIG VALIDATION REPORT")
        lines.append("=" * 70)
        lines.append(f"  Experiment:        {summary.get('experiment') or 'N/A'}")
        lines.append(f"  Rules Applied:     {summary.get('rules_applied') or 'N/A'}")
        status = summary["status"]
        symbol = "✓" if status["is_valid"] else "✗"
        lines.append(f"  Status:            {symbol} {'VALID' if status['is_valid'] else 'INVALID'}")
        lines.append(f"    Errors:          {status['errors']}")
        lines.append(f"    Warnings:        {status['warnings']}")
        lines.append("")

        for severity in ("ERROR", "WARNING", "INFO"):
            selected = [issue for issue in issues if issue.severity == severity]
            if not selected:
                continue
            lines.append(f"{severity}S ({len(selected)})")
            lines.append("-" * 70)
            for number, issue in enumerate(selected, 1):
                lines.extend(TextFormatter._format_issue(number, issue))
            lines.append("")

        lines.append("=" * 70)
        return "\n".join(lines)

    @staticmethod
    def _format_issue(number: int, issue) -> List[str]:
        lines = [f"{number}. {issue.field or 'config'}", f"   Rule:    {issue.rule_id}", f"   Message: {issue.message}"]
        if issue.expected_value:
            lines.append(f"   Expected: {issue.expected_value}")
        if issue.actual_value:
            lines.append(f"   Actual:   {issue.actual_value}")
        return lines


class DashboardFormatter:
    """
    Formats the invariant checks of a run as a summary dashboard.
    """

    WIDTH = 68

    @staticmethod
    def _row(text: str) -> str:
        return "│ " + text[:DashboardFormatter.WIDTH - 2].ljust(DashboardFormatter.WIDTH - 2) + " │"

    @staticmethod
    def format_report(experiment: str, checks, files: Optional[Dict[str, str]] = None) -> str:
        """
        Generate a summary dashboard (text-based).

        Args:
            experiment: Experiment kind
            checks: CheckCollector of the run
            files: Written files, kind -> path

        Returns:
            Dashboard string
        """
        width = DashboardFormatter.WIDTH
        row = DashboardFormatter._row
        stats = checks.get_statistics()
        symbol = {"PASS": "✓", "PASS_WITH_WARNINGS": "!", "FAIL": "✗"}[stats["status"]]

        lines = ["╔" + "═" * width + "╗"]
        lines.append("║" + f"SIGCONC {experiment.upper()}".center(width) + "║")
        lines.append("╚" + "═" * width + "╝")
        lines.append("┌" + "─" * width + "┐")
        lines.append(row(f"STATUS: {symbol} {stats['status']}"))
        lines.append(row(f"Checks: {stats['total_checks']}  passed: {stats['passed']}  "
                         f"failed errors: {stats['failed_by_severity']['ERROR']}  "
                         f"failed warnings: {stats['failed_by_severity']['WARNING']}"))
        lines.append("└" + "─" * width + "┘")

        if len(checks):
            lines.append("┌─── CHECKS " + "─" * (width - 11) + "┐")
            for check in checks.checks:
                mark = "✓" if check.passed else "✗"
                lines.append(row(f"{mark} [{check.severity:7}] {check.check_id}"))
            lines.append("└" + "─" * width + "┘")

        if files:
            lines.append("┌─── FILES " + "─" * (width - 10) + "┐")
            for kind, path in sorted(files.items()):
                lines.append(row(f"{kind:10} {path}"))
            lines.append("└" + "─" * width + "┘")

        return "\n".join(lines)
