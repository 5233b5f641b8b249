"""
TailCurve CSV Parser

Reads ``label,threshold,survival,std_err,sample_count`` documents back
into ``TailCurve`` values, one curve per label in first-seen order.
"""

import logging
from pathlib import Path as FilePath
from typing import Dict, List

from src.exceptions import DomainError
from src.experiments.statistics import TailCurve
from .csv_utils import parse_float, split_rows

logger = logging.getLogger(__name__)

TAIL_COLUMNS = ["label", "threshold", "survival", "std_err", "sample_count"]


class TailCurveParser:
    """
    Converts TailCurve CSV documents into lists of curves.

    Example:
        >>> curves = TailCurveParser().parse_file("output/tail_curve.csv")
        >>> curves[0].label
        'S_1'
    """

    def __init__(self):
        self.labels: List[str] = []

    def parse_file(self, file_path) -> List[TailCurve]:
        """
        Raises:
            FileNotFoundError: If the file doesn't exist
            DomainError: If the file is malformed
        """
        path = FilePath(file_path)
        if not path.exists():
            raise FileNotFoundError(f"tail curve file not found: {file_path}")
        logger.debug(f"Parsing tail curve CSV {file_path}")
        return self.parse_text(path.read_text(encoding="utf-8"))

    def parse_text(self, csv_text: str) -> List[TailCurve]:
        rows = split_rows(csv_text)
        if not rows or rows[0] != TAIL_COLUMNS:
            found = rows[0] if rows else []
            raise DomainError(f"tail curve CSV header must read {','.join(TAIL_COLUMNS)}, found {found}")
        if len(rows) < 2:
            raise DomainError("tail curve CSV has no data rows")

        columns: Dict[str, Dict[str, list]] = {}
        self.labels = []
        for line, row in enumerate(rows[1:], start=2):
            if len(row) != len(TAIL_COLUMNS):
                raise DomainError(f"row {line}: expected {len(TAIL_COLUMNS)} fields, found {len(row)}")
            label = row[0]
            if label not in columns:
                columns[label] = {"threshold": [], "survival": [], "std_err": [], "sample_count": []}
                self.labels.append(label)
            for name, field in zip(TAIL_COLUMNS[1:], row[1:]):
                columns[label][name].append(parse_float(field, line, name))

        curves = []
        for label in self.labels:
            data = columns[label]
            counts = set(data["sample_count"])
            if len(counts) != 1:
                raise DomainError(f"curve '{label}' mixes sample counts {sorted(counts)}")
            curves.append(
                TailCurve(data["threshold"], data["survival"], data["std_err"], int(counts.pop()), label)
            )
        return curves

    def __repr__(self) -> str:
        return f"TailCurveParser(curves={len(self.labels)})"
